use num_complex::Complex64;
use smallvec::SmallVec;

use super::hamiltonian::{Accumulator, Form, Hamiltonian};
use super::monomial::{Monomial, Var};
use super::HamError;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Overflow {
    Fail,
    Drop,
}

struct Prepared<'a> {
    coeff: Complex64,
    degree: u32,
    // (mode, ∂/∂z_n, ∂/∂z̄_n)
    partials: SmallVec<[Partial; 4]>,
    _mono: &'a Monomial,
}

type Partial = (i32, SmallVec<[(Monomial, f64); 2]>, SmallVec<[(Monomial, f64); 2]>);

fn prepare(h: &Hamiltonian) -> Vec<Prepared<'_>> {
    h.iter()
        .map(|(m, &c)| Prepared {
            coeff: c,
            degree: m.degree(),
            partials: m
                .var_modes()
                .into_iter()
                .map(|n| (n, m.derivative(n, Var::Z), m.derivative(n, Var::ZBar)))
                .collect(),
            _mono: m,
        })
        .collect()
}

/// `{R, F} = i Σ_n (∂R/∂z̄_n ∂F/∂z_n − ∂R/∂z_n ∂F/∂z̄_n)`, computed on the
/// stored representation and returned in the same form.
///
/// Fails with `DegreeOverflow` if an interacting pair of terms would exceed
/// `D_max`.
pub fn poisson_bracket(r: &Hamiltonian, f: &Hamiltonian) -> Result<Hamiltonian, HamError> {
    bracket(r, f, Overflow::Fail)
}

/// Like [`poisson_bracket`] but silently drops products above `D_max`.
pub fn poisson_bracket_truncated(r: &Hamiltonian, f: &Hamiltonian) -> Result<Hamiltonian, HamError> {
    bracket(r, f, Overflow::Drop)
}

fn bracket(r: &Hamiltonian, f: &Hamiltonian, overflow: Overflow) -> Result<Hamiltonian, HamError> {
    if r.meta() != f.meta() {
        return Err(HamError::MetadataMismatch);
    }
    if r.form() != f.form() {
        return Err(HamError::RepresentationError(
            "bracket operands must share a representation".into(),
        ));
    }
    let meta = *r.meta();
    let form = r.form();
    let pr = prepare(r);
    let mut pf = prepare(f);
    pf.sort_by_key(|t| t.degree);
    let mut acc = Accumulator::with_capacity(4 * (pr.len() + pf.len()));

    let mut emit = |prod: Monomial, w: f64, x: Complex64, y: Complex64| match form {
        Form::Canonical => {
            for (t, b) in prod.canonical_expansion() {
                acc.add_scaled_mul(t, w * b, x, y);
            }
        }
        Form::Expanded => acc.add_scaled_mul(prod, w, x, y),
    };

    for t1 in &pr {
        // in drop mode, pairs above D_max contribute nothing whether or not
        // they share a mode
        let cap = match overflow {
            Overflow::Drop => (meta.d_max + 2).saturating_sub(t1.degree),
            Overflow::Fail => u32::MAX,
        };
        for t2 in pf.iter().take_while(|t| t.degree <= cap) {
            let shared = t1
                .partials
                .iter()
                .filter_map(|p1| t2.partials.iter().find(|p2| p2.0 == p1.0).map(|p2| (p1, p2)));
            let mut checked = false;
            for ((_, r_z, r_zb), (_, f_z, f_zb)) in shared {
                if !checked {
                    let degree = t1.degree + t2.degree - 2;
                    if degree > meta.d_max {
                        match overflow {
                            Overflow::Fail => {
                                return Err(HamError::DegreeOverflow {
                                    degree,
                                    d_max: meta.d_max,
                                })
                            }
                            Overflow::Drop => break,
                        }
                    }
                    checked = true;
                }
                for (a, wa) in r_zb {
                    for (b, wb) in f_z {
                        emit(a.mul(b), wa * wb, t1.coeff, t2.coeff);
                    }
                }
                for (a, wa) in r_z {
                    for (b, wb) in f_zb {
                        emit(a.mul(b), -wa * wb, t1.coeff, t2.coeff);
                    }
                }
            }
        }
    }
    Ok(acc.finish(meta, form, Complex64::new(0.0, 1.0)))
}
