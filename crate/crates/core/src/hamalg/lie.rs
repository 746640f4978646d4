use num_complex::Complex64;

use super::bracket::poisson_bracket_truncated;
use super::hamiltonian::Hamiltonian;
use super::norm::{norm, NormContext};
use super::HamError;

/// Bracket index from which the series must contract by at least 1/2 per term.
const CONTRACTION_CHECK_FROM: usize = 10;

#[derive(Clone, Copy, Debug)]
pub struct LieOptions {
    /// Stop once a scaled term's norm drops to this value. `None` means
    /// `1e-16 · norm(H)`.
    pub tail_tol: Option<f64>,
    pub max_brackets: usize,
    pub norm: NormContext,
}

impl LieOptions {
    pub fn new(norm: NormContext) -> Self {
        LieOptions {
            tail_tol: None,
            max_brackets: 25,
            norm,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LieOutput {
    pub value: Hamiltonian,
    /// Number of brackets evaluated.
    pub brackets: usize,
    /// Geometric estimate of the neglected tail; 0 when the series ended
    /// exactly at the degree cap.
    pub tail_bound: f64,
    /// Norms of `H^(n)/n!`.
    pub term_norms: Vec<f64>,
}

/// Iterated brackets `H^(0) = H`, `H^(n) = {H^(n−1), F}` truncated at
/// `D_max`, unscaled. The second value is the list of `‖H^(n)‖/n!`; the
/// third is true when the sequence ended because a bracket vanished.
pub fn lie_terms(
    h: &Hamiltonian,
    f: &Hamiltonian,
    opts: &LieOptions,
) -> Result<(Vec<Hamiltonian>, Vec<f64>, bool), HamError> {
    let h_norm = norm(h, &opts.norm);
    let tol = opts.tail_tol.unwrap_or(1e-16 * h_norm);
    let mut terms = vec![h.clone()];
    let mut norms = vec![h_norm];
    if h.is_zero() || f.is_zero() {
        return Ok((terms, norms, true));
    }
    let mut factorial = 1.0;
    for n in 1..=opts.max_brackets {
        let next = poisson_bracket_truncated(&terms[n - 1], f)?;
        factorial *= n as f64;
        let t = norm(&next, &opts.norm) / factorial;
        let prev = norms[n - 1];
        let exhausted = next.is_zero();
        terms.push(next);
        norms.push(t);
        if exhausted {
            return Ok((terms, norms, true));
        }
        if n >= CONTRACTION_CHECK_FROM && t > 0.5 * prev {
            return Err(HamError::NoContraction {
                bracket: n,
                ratio: t / prev,
            });
        }
        if t <= tol {
            break;
        }
    }
    Ok((terms, norms, false))
}

/// `H ∘ Φ_F = Σ_n H^(n)/n!`, truncated at `D_max` and at the tail tolerance.
pub fn lie_transform(h: &Hamiltonian, f: &Hamiltonian, opts: &LieOptions) -> Result<LieOutput, HamError> {
    let (terms, norms, exhausted) = lie_terms(h, f, opts)?;
    let mut value = h.clone();
    let mut factorial = 1.0;
    for (n, t) in terms.iter().enumerate().skip(1) {
        factorial *= n as f64;
        value = value.add_scaled(t, Complex64::new(1.0 / factorial, 0.0))?;
    }
    let tail_bound = if exhausted {
        0.0
    } else {
        let k = norms.len();
        let (a, b) = (norms[k - 2], norms[k - 1]);
        let q = if a > 0.0 { b / a } else { 0.0 };
        if q < 1.0 {
            b * q / (1.0 - q)
        } else {
            f64::INFINITY
        }
    };
    Ok(LieOutput {
        value,
        brackets: terms.len() - 1,
        tail_bound,
        term_norms: norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamalg::{Form, Meta, Monomial};
    use crate::indices::ExponentMap;

    fn meta() -> Meta {
        Meta {
            sigma: 3.0,
            r: 1.5,
            c: 1.0,
            n_max: 3,
            d_max: 8,
        }
    }

    fn em(p: &[(i32, u32)]) -> ExponentMap {
        ExponentMap::from_pairs(p.iter().copied())
    }

    fn opts() -> LieOptions {
        LieOptions::new(NormContext::new(3.0, 0.01, 1.5, 1.0).unwrap())
    }

    #[test]
    fn zero_generator_is_identity() {
        let h = Hamiltonian::from_terms(
            meta(),
            Form::Canonical,
            [(Monomial::zz(em(&[(1, 1)]), em(&[(-2, 1), (3, 1)])), Complex64::new(0.5, 0.1))],
        )
        .unwrap();
        let out = lie_transform(&h, &Hamiltonian::zero(meta()), &opts()).unwrap();
        assert_eq!(out.value, h);
        assert_eq!(out.tail_bound, 0.0);
    }

    #[test]
    fn constants_are_invariant() {
        let h = Hamiltonian::from_terms(
            meta(),
            Form::Canonical,
            [(Monomial::new(em(&[(2, 1)]), em(&[]), em(&[]), em(&[])), Complex64::new(3.0, 0.0))],
        )
        .unwrap();
        let f = Hamiltonian::from_terms(
            meta(),
            Form::Canonical,
            [(Monomial::zz(em(&[(1, 2)]), em(&[(2, 1)])), Complex64::new(0.1, 0.0))],
        )
        .unwrap();
        let out = lie_transform(&h, &f, &opts()).unwrap();
        assert_eq!(out.value, h);
        assert_eq!(out.brackets, 1);
    }
}
