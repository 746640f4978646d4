use serde::{Deserialize, Serialize};

use super::hamiltonian::Hamiltonian;
use super::monomial::Monomial;
use super::HamError;
use crate::indices::weight;

/// Parameters of the weighted sup norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormContext {
    pub sigma: f64,
    pub rho: f64,
    pub r: f64,
    pub c: f64,
}

impl NormContext {
    pub fn new(sigma: f64, rho: f64, r: f64, c: f64) -> Result<Self, HamError> {
        let bad = |what: &str| Err(HamError::InvalidContext(what.to_string()));
        if !(sigma > 2.0 && sigma <= 3.0) {
            return bad("sigma must lie in (2, 3]");
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return bad("rho must be positive");
        }
        if !(r > 1.0) {
            return bad("r must exceed 1");
        }
        if !(c >= 1.0 && c.is_finite()) {
            return bad("c must be at least 1");
        }
        Ok(NormContext { sigma, rho, r, c })
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self, HamError> {
        Self::new(self.sigma, rho, self.r, self.c)
    }
}

/// Natural log of the norm quotient of `m` divided by `|coeff|`:
/// `Σ ½ w_n ln⟨n/c⟩ − ρ(Σ w_n ln^σ⌊n⌋ − 2 ln^σ⌊n_1*⌋)` with
/// `w_n = 2a_n + 2b_n + k_n + k'_n`.
pub fn term_log_weight(m: &Monomial, ctx: &NormContext) -> f64 {
    let mut bracket_sum = 0.0;
    let mut angle = 0.0;
    let mut top = 0u64;
    for (n, w) in m.weighted_multiset() {
        let wf = w as f64;
        let nc = n as f64 / ctx.c;
        angle += 0.5 * wf * 0.5 * (1.0 + nc * nc).ln();
        bracket_sum += wf * weight(n, ctx.sigma);
        top = top.max(n.unsigned_abs());
    }
    let exponent = bracket_sum - 2.0 * weight(top as i64, ctx.sigma);
    angle - ctx.rho * exponent
}

fn sup(h: &Hamiltonian, ctx: &NormContext) -> f64 {
    h.iter()
        .map(|(m, c)| c.norm() * term_log_weight(m, ctx).exp())
        .fold(0.0, f64::max)
}

/// Weighted sup norm over `(a, b, k, k')`, with `J` powers weighted like
/// `I(0)` powers.
pub fn norm(h: &Hamiltonian, ctx: &NormContext) -> f64 {
    sup(h, ctx)
}

/// Weighted sup norm over `(a, k, k')`; requires `b = 0` in every term.
pub fn norm_plus(h: &Hamiltonian, ctx: &NormContext) -> Result<f64, HamError> {
    if let Some((m, _)) = h.iter().find(|(m, _)| !m.b.is_empty()) {
        return Err(HamError::RepresentationError(format!(
            "norm_plus needs b = 0, found {m}; expand J first"
        )));
    }
    Ok(sup(h, ctx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamalg::{Form, Meta};
    use crate::indices::ExponentMap;
    use num_complex::Complex64;

    fn meta() -> Meta {
        Meta {
            sigma: 3.0,
            r: 1.5,
            c: 1.0,
            n_max: 6,
            d_max: 8,
        }
    }

    fn em(p: &[(i32, u32)]) -> ExponentMap {
        ExponentMap::from_pairs(p.iter().copied())
    }

    fn ctx(rho: f64) -> NormContext {
        NormContext::new(3.0, rho, 1.5, 1.0).unwrap()
    }

    #[test]
    fn diagonal_zero_mode_has_unit_norm() {
        let h = Hamiltonian::from_terms(
            meta(),
            Form::Expanded,
            [(Monomial::zz(em(&[(0, 1)]), em(&[(0, 1)])), Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        for rho in [1e-4, 0.01, 0.3] {
            assert!((norm_plus(&h, &ctx(rho)).unwrap() - 1.0).abs() < 1e-15);
        }
        let j0 = Hamiltonian::from_terms(
            meta(),
            Form::Canonical,
            [(Monomial::new(em(&[]), em(&[(0, 1)]), em(&[]), em(&[])), Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        assert!((norm(&j0, &ctx(0.01)) - 1.0).abs() < 1e-15);
        assert!(norm_plus(&j0, &ctx(0.01)).is_err());
    }

    #[test]
    fn hand_evaluated_quotient() {
        let g0 = Complex64::new(0.3, -0.4);
        let h = Hamiltonian::from_terms(
            meta(),
            Form::Canonical,
            [(Monomial::zz(em(&[(3, 2)]), em(&[(6, 1)])), g0)],
        )
        .unwrap();
        let l = 1024f64.ln().powi(3);
        let expected = 0.5 * 10f64.sqrt() * 37f64.sqrt().sqrt() * (-0.01 * l).exp();
        let got = norm_plus(&h, &ctx(0.01)).unwrap();
        assert!((got - expected).abs() <= 1e-14 * expected, "{got} vs {expected}");
    }

    #[test]
    fn homogeneous_and_zero() {
        let h = Hamiltonian::from_terms(
            meta(),
            Form::Canonical,
            [
                (Monomial::zz(em(&[(1, 1), (2, 1)]), em(&[(3, 1)])), Complex64::new(1.0, 2.0)),
                (Monomial::new(em(&[(4, 1)]), em(&[(1, 1)]), em(&[]), em(&[])), Complex64::new(-3.0, 0.5)),
            ],
        )
        .unwrap();
        let c = ctx(0.02);
        let scaled = h.scaled(Complex64::new(2.5, 0.0));
        assert!((norm(&scaled, &c) - 2.5 * norm(&h, &c)).abs() <= 1e-15 * norm(&scaled, &c));
        assert_eq!(norm(&Hamiltonian::zero(meta()), &c), 0.0);
    }

    #[test]
    fn context_validation() {
        assert!(NormContext::new(2.0, 0.1, 1.5, 1.0).is_err());
        assert!(NormContext::new(3.0, 0.0, 1.5, 1.0).is_err());
        assert!(NormContext::new(3.0, 0.1, 1.0, 1.0).is_err());
        assert!(NormContext::new(3.0, 0.1, 1.5, 0.5).is_err());
    }
}
