use kamcore::hamalg::parse_hamiltonian;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<F: for<'py> FnOnce(Python<'py>, &Bound<'py, PyModule>)>(f: F) {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "nlkg_kam").unwrap();
        nlkg_kam::register(&m).unwrap();
        f(py, &m);
    });
}

#[test]
fn model_build_and_round_trip() {
    with_module(|py, m| {
        let locals = PyDict::new(py);
        locals.set_item("m", m).unwrap();
        py.run(
            c"model = m.Model(1.0, 1e-6, n_max=3)
n, r = model.build()
text = (n + r).to_text()
back = m.Hamiltonian.parse(text)
assert back == n + r and back.to_text() == text
assert len(model.frequencies()) == 7
assert r.norm(0.01) > 0 and r.norm_plus(0.01) > 0
sched = m.schedule(1, 1e-6)
assert abs(sched['eps'] - 1e-9) < 1e-21
",
            None,
            Some(&locals),
        )
        .unwrap();
        let text: String = py.eval(c"text", None, Some(&locals)).unwrap().extract().unwrap();
        assert!(parse_hamiltonian(&text).is_ok());
    });
}

#[test]
fn errors_become_value_errors() {
    with_module(|py, m| {
        let locals = PyDict::new(py);
        locals.set_item("m", m).unwrap();
        py.run(
            c"try:
    m.Model(0.5, 1e-6)
    raise AssertionError('accepted c < 1')
except ValueError as e:
    assert 'c = 0.5' in str(e)
",
            None,
            Some(&locals),
        )
        .unwrap();
    });
}
