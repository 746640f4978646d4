"""Smoke test for the nlkg_kam extension module.

Build and install first:  pip install --no-build-isolation ./crates/py
"""

import math

import nlkg_kam as nk


def main():
    model = nk.Model(c=1.0, eps=1e-6, n_max=3, v_seed=0)
    n, r = model.build()
    h = n + r
    print(model, "->", h)

    text = h.to_text()
    back = nk.Hamiltonian.parse(text)
    assert back == h and back.to_text() == text

    r0, r1, r2 = r.split()
    assert len(r0) + len(r1) + len(r2) == len(r)
    print("‖R‖ at rho=0.01:", r.norm(0.01), "plus:", r.norm_plus(0.01))

    # antisymmetry of the bracket on the quartic part
    ab = r0.bracket(r1)
    ba = r1.bracket(r0)
    assert (ab + ba).max_abs_coeff() <= 1e-12 * ab.max_abs_coeff()

    lam = model.frequencies()
    assert all(math.isclose(l, math.sqrt(1 + k * k + v)) for l, k, v in zip(lam, range(-3, 4), model.v))

    sched = nk.schedule(0, 1e-6)
    assert math.isclose(sched["rho"], (3 - 2 * math.sqrt(2)) / 100)

    report = nk.run_kam(model, gamma=1e-3, steps=3, seed=0)
    print("status:", report["status"], "eps0:", report["eps0"])
    print("R0 norms:", report["r0_norms"])
    print("decay exponents:", report["decay_exponents"])
    assert report["status"] == "completed"

    cfg = nk.parse_config('{"c": 1, "eps": 1e-6}')
    assert cfg["N_max"] == 4 and cfg["steps"] == 3

    est = nk.resonant_measure(1.0, 1e-3, samples=200, height=2, n3max=3, seed=1)
    print("resonant fraction:", est["fraction"], "±", est["stderr"])

    try:
        nk.Model(c=0.5, eps=1e-6)
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("c < 1 accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
