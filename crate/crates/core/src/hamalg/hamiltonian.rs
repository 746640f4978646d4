use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dd::CAcc;
use super::monomial::{Monomial, TermClass, Var};
use super::{HamError, COEFF_FLOOR};
use crate::indices::{ExponentMap, ModeVec};

/// Truncation and weight parameters shared by every Hamiltonian of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub sigma: f64,
    pub r: f64,
    pub c: f64,
    pub n_max: u32,
    pub d_max: u32,
}

/// `Canonical`: disjoint `z`/`z̄` supports, `J` powers allowed.
/// `Expanded`: `b = 0` everywhere, supports may overlap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Form {
    Canonical,
    Expanded,
}

/// A `z^k z̄^k'` monomial with coefficient, before canonicalization.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTerm {
    pub coeff: Complex64,
    pub k: ExponentMap,
    pub kp: ExponentMap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    meta: Meta,
    form: Form,
    terms: BTreeMap<Monomial, Complex64>,
}

#[derive(Default)]
pub(crate) struct Accumulator {
    map: FxHashMap<Monomial, CAcc>,
}

impl Accumulator {
    pub(crate) fn with_capacity(n: usize) -> Self {
        Accumulator {
            map: FxHashMap::with_capacity_and_hasher(n, Default::default()),
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, m: Monomial, c: Complex64) {
        self.map.entry(m).or_default().add(c);
    }

    #[inline]
    pub(crate) fn add_scaled(&mut self, m: Monomial, w: f64, c: Complex64) {
        self.map.entry(m).or_default().add_scaled(w, c);
    }

    #[inline]
    pub(crate) fn add_scaled_mul(&mut self, m: Monomial, w: f64, x: Complex64, y: Complex64) {
        self.map.entry(m).or_default().add_scaled_mul(w, x, y);
    }

    pub(crate) fn finish(self, meta: Meta, form: Form, post: Complex64) -> Hamiltonian {
        let terms = self
            .map
            .into_iter()
            .filter_map(|(m, acc)| {
                let v = acc.value() * post;
                (v.norm() >= COEFF_FLOOR).then_some((m, v))
            })
            .collect();
        Hamiltonian { meta, form, terms }
    }
}

fn check_mono(meta: &Meta, form: Form, m: &Monomial) -> Result<(), HamError> {
    let top = m.max_abs_mode();
    if top > meta.n_max {
        let n = [&m.a, &m.b, &m.k, &m.kp]
            .iter()
            .flat_map(|e| e.support())
            .find(|n| n.unsigned_abs() == top)
            .unwrap_or(0);
        return Err(HamError::ModeOutOfRange {
            n,
            n_max: meta.n_max,
        });
    }
    let p = m.momentum();
    if p != 0 {
        return Err(HamError::MomentumViolation {
            term: m.to_string(),
            momentum: p,
        });
    }
    let d = m.degree();
    if d > meta.d_max {
        return Err(HamError::DegreeOverflow {
            degree: d,
            d_max: meta.d_max,
        });
    }
    match form {
        Form::Canonical if !m.is_canonical() => Err(HamError::RepresentationError(format!(
            "overlapping z/z̄ supports in canonical term {m}"
        ))),
        Form::Expanded if !m.b.is_empty() => Err(HamError::RepresentationError(format!(
            "J power in expanded term {m}"
        ))),
        _ => Ok(()),
    }
}

impl Hamiltonian {
    pub fn zero(meta: Meta) -> Self {
        Hamiltonian {
            meta,
            form: Form::Canonical,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a Hamiltonian from explicit terms, summing repeated keys and
    /// checking every invariant of `form`.
    pub fn from_terms<I>(meta: Meta, form: Form, terms: I) -> Result<Self, HamError>
    where
        I: IntoIterator<Item = (Monomial, Complex64)>,
    {
        let mut acc = Accumulator::default();
        for (m, c) in terms {
            check_mono(&meta, form, &m)?;
            acc.add(m, c);
        }
        Ok(acc.finish(meta, form, Complex64::new(1.0, 0.0)))
    }

    /// Canonical form of a sum of `z^k z̄^k'` monomials: each diagonal pair
    /// `(z_n z̄_n)^m` becomes `(J_n + I_n(0))^m`, with `I(0)` kept symbolic.
    pub fn canonicalize(meta: Meta, raw: &[RawTerm]) -> Result<Self, HamError> {
        let mut acc = Accumulator::with_capacity(raw.len());
        for t in raw {
            let m = Monomial::zz(t.k.clone(), t.kp.clone());
            check_mono(&meta, Form::Expanded, &m)?;
            for (c, w) in m.canonical_expansion() {
                acc.add_scaled(c, w, t.coeff);
            }
        }
        Ok(acc.finish(meta, Form::Canonical, Complex64::new(1.0, 0.0)))
    }

    /// Converts to canonical form; identity on canonical input.
    pub fn canonical(&self) -> Hamiltonian {
        if self.form == Form::Canonical {
            return self.clone();
        }
        let mut acc = Accumulator::with_capacity(self.terms.len());
        for (m, &c) in &self.terms {
            for (t, w) in m.canonical_expansion() {
                acc.add_scaled(t, w, c);
            }
        }
        acc.finish(self.meta, Form::Canonical, Complex64::new(1.0, 0.0))
    }

    /// Substitutes `J_n = z_n z̄_n − I_n(0)`, giving the `b = 0` form.
    pub fn expand_j(&self) -> Result<Hamiltonian, HamError> {
        let mut acc = Accumulator::with_capacity(self.terms.len());
        for (m, &c) in &self.terms {
            if m.degree() > self.meta.d_max {
                return Err(HamError::DegreeOverflow {
                    degree: m.degree(),
                    d_max: self.meta.d_max,
                });
            }
            for (t, w) in m.j_expansion() {
                acc.add_scaled(t, w, c);
            }
        }
        Ok(acc.finish(self.meta, Form::Expanded, Complex64::new(1.0, 0.0)))
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn get(&self, m: &Monomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn filtered(&self, keep: impl Fn(&Monomial) -> bool) -> Hamiltonian {
        Hamiltonian {
            meta: self.meta,
            form: self.form,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }

    pub fn class_part(&self, class: TermClass) -> Hamiltonian {
        self.filtered(|m| m.class() == class)
    }

    /// `(R⁰, R¹, R²)`.
    pub fn split(&self) -> (Hamiltonian, Hamiltonian, Hamiltonian) {
        (
            self.class_part(TermClass::R0),
            self.class_part(TermClass::R1),
            self.class_part(TermClass::R2),
        )
    }

    /// Terms with `k = k' = 0`.
    pub fn diagonal_part(&self) -> Hamiltonian {
        self.filtered(Monomial::is_diagonal)
    }

    pub fn off_diagonal_part(&self) -> Hamiltonian {
        self.filtered(|m| !m.is_diagonal())
    }

    /// Terms of degree at most `d`.
    pub fn truncated(&self, d: u32) -> Hamiltonian {
        self.filtered(|m| m.degree() <= d)
    }

    pub fn scaled(&self, alpha: Complex64) -> Hamiltonian {
        let mut acc = Accumulator::with_capacity(self.terms.len());
        for (m, &c) in &self.terms {
            acc.add(m.clone(), c);
        }
        acc.finish(self.meta, self.form, alpha)
    }

    /// `self + alpha·other`.
    pub fn add_scaled(&self, other: &Hamiltonian, alpha: Complex64) -> Result<Hamiltonian, HamError> {
        if self.meta != other.meta {
            return Err(HamError::MetadataMismatch);
        }
        if self.form != other.form {
            return Err(HamError::RepresentationError(
                "cannot add canonical and expanded Hamiltonians".into(),
            ));
        }
        let mut acc = Accumulator::with_capacity(self.terms.len() + other.terms.len());
        for (m, &c) in &self.terms {
            acc.add(m.clone(), c);
        }
        for (m, &c) in &other.terms {
            acc.add_scaled_mul(m.clone(), 1.0, c, alpha);
        }
        Ok(acc.finish(self.meta, self.form, Complex64::new(1.0, 0.0)))
    }

    pub fn add(&self, other: &Hamiltonian) -> Result<Hamiltonian, HamError> {
        self.add_scaled(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Hamiltonian) -> Result<Hamiltonian, HamError> {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }

    /// Exhaustive invariant scan: zero momentum, degree cap, modes in range,
    /// form-specific support rules, nonzero coefficients.
    pub fn validate(&self) -> Result<(), HamError> {
        for (m, c) in &self.terms {
            check_mono(&self.meta, self.form, m)?;
            if c.norm() < COEFF_FLOOR {
                return Err(HamError::RepresentationError(format!("zero coefficient at {m}")));
            }
        }
        Ok(())
    }

    /// `H(z, z̄)` with `J_n = |z_n|² − I_n(0)`.
    pub fn evaluate(&self, z: &ModeVec<Complex64>, i0: &ModeVec<f64>) -> Complex64 {
        let mut acc = CAcc::default();
        for (m, &c) in &self.terms {
            acc.add_scaled_mul(1.0, c, eval_monomial(m, z, i0));
        }
        acc.value()
    }

    /// Gradient with respect to `z_n` or `z̄_n` for every mode.
    pub fn gradient(&self, z: &ModeVec<Complex64>, i0: &ModeVec<f64>, var: Var) -> ModeVec<Complex64> {
        super::field::GradientField::new(self, i0).eval(z, var)
    }
}

pub(crate) fn eval_monomial(m: &Monomial, z: &ModeVec<Complex64>, i0: &ModeVec<f64>) -> Complex64 {
    let mut v = Complex64::new(1.0, 0.0);
    for (n, e) in m.a.iter() {
        v *= i0[n].powi(e as i32);
    }
    for (n, e) in m.b.iter() {
        v *= (z[n].norm_sqr() - i0[n]).powi(e as i32);
    }
    for (n, e) in m.k.iter() {
        v *= z[n].powu(e);
    }
    for (n, e) in m.kp.iter() {
        v *= z[n].conj().powu(e);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn meta() -> Meta {
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

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn canonicalize_examples() {
        let raw = [RawTerm {
            coeff: one(),
            k: em(&[(3, 1), (-3, 1)]),
            kp: em(&[(3, 1), (-3, 1)]),
        }];
        let h = Hamiltonian::canonicalize(meta(), &raw).unwrap();
        assert_eq!(h.len(), 4);
        let (r0, r1, r2) = h.split();
        assert_eq!((r0.len(), r1.len(), r2.len()), (1, 2, 1));
        let r0_key = Monomial::new(em(&[(-3, 1), (3, 1)]), em(&[]), em(&[]), em(&[]));
        assert_eq!(r0.get(&r0_key), one());

        let raw = [RawTerm {
            coeff: one(),
            k: em(&[(5, 1)]),
            kp: em(&[(5, 1)]),
        }];
        let h = Hamiltonian::canonicalize(meta(), &raw).unwrap();
        let (r0, r1, _) = h.split();
        assert_eq!((r0.len(), r1.len()), (1, 1));

        let raw = [RawTerm {
            coeff: one(),
            k: em(&[(2, 1), (-2, 1)]),
            kp: em(&[]),
        }];
        let h = Hamiltonian::canonicalize(meta(), &raw).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.split().0.len(), 1);
    }

    #[test]
    fn canonicalize_rejects_momentum_and_degree() {
        let raw = [RawTerm {
            coeff: one(),
            k: em(&[(2, 1)]),
            kp: em(&[]),
        }];
        assert!(matches!(
            Hamiltonian::canonicalize(meta(), &raw),
            Err(HamError::MomentumViolation { momentum: 2, .. })
        ));
        let raw = [RawTerm {
            coeff: one(),
            k: em(&[(0, 5)]),
            kp: em(&[(0, 4)]),
        }];
        assert!(matches!(
            Hamiltonian::canonicalize(meta(), &raw),
            Err(HamError::DegreeOverflow { degree: 9, d_max: 8 })
        ));
    }

    #[test]
    fn evaluate_uses_shifted_actions() {
        let raw = [RawTerm {
            coeff: Complex64::new(2.0, 0.0),
            k: em(&[(1, 1)]),
            kp: em(&[(1, 1)]),
        }];
        let h = Hamiltonian::canonicalize(meta(), &raw).unwrap();
        let mut z = ModeVec::filled(6, Complex64::default());
        z[1] = one();
        let mut i0 = ModeVec::filled(6, 0.0);
        i0[1] = 0.25;
        assert_eq!(h.evaluate(&z, &i0), Complex64::new(2.0, 0.0));
        assert_eq!(Hamiltonian::zero(meta()).evaluate(&z, &i0), Complex64::default());
    }

    #[test]
    fn expand_j_examples() {
        let j3 = Monomial::new(em(&[]), em(&[(3, 1)]), em(&[]), em(&[]));
        let h = Hamiltonian::from_terms(meta(), Form::Canonical, [(j3, one())]).unwrap();
        let e = h.expand_j().unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e.get(&Monomial::zz(em(&[(3, 1)]), em(&[(3, 1)]))), one());
        assert_eq!(
            e.get(&Monomial::new(em(&[(3, 1)]), em(&[]), em(&[]), em(&[]))),
            -one()
        );
        let plain = Monomial::zz(em(&[(2, 1), (-2, 1)]), em(&[]));
        let h = Hamiltonian::from_terms(meta(), Form::Canonical, [(plain.clone(), one())]).unwrap();
        let e = h.expand_j().unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.get(&plain), one());
    }

    #[test]
    fn from_terms_checks_form() {
        let overlap = Monomial::zz(em(&[(1, 1)]), em(&[(1, 1)]));
        assert!(Hamiltonian::from_terms(meta(), Form::Canonical, [(overlap.clone(), one())]).is_err());
        assert!(Hamiltonian::from_terms(meta(), Form::Expanded, [(overlap, one())]).is_ok());
        let far = Monomial::zz(em(&[(7, 1)]), em(&[(7, 1)]));
        assert!(matches!(
            Hamiltonian::from_terms(meta(), Form::Expanded, [(far, one())]),
            Err(HamError::ModeOutOfRange { n: 7, .. })
        ));
    }
}
