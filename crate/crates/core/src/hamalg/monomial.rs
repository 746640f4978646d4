use std::fmt;

use smallvec::SmallVec;

use crate::indices::{decreasing_rearrangement, momentum, ExponentMap, Rearrangement};

/// Exponent data of one term `I(0)^a J^b z^k z̄^k'`.
///
/// Ordering is lexicographic on `(a, b, k, k')`, which fixes the canonical
/// term order of a [`Hamiltonian`](super::Hamiltonian).
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub a: ExponentMap,
    pub b: ExponentMap,
    pub k: ExponentMap,
    pub kp: ExponentMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermClass {
    R0,
    R1,
    R2,
}

impl TermClass {
    pub const ALL: [TermClass; 3] = [TermClass::R0, TermClass::R1, TermClass::R2];
}

/// Which variable a derivative is taken with respect to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    Z,
    ZBar,
}

impl Monomial {
    pub fn new(a: ExponentMap, b: ExponentMap, k: ExponentMap, kp: ExponentMap) -> Self {
        Monomial { a, b, k, kp }
    }

    /// A pure `z^k z̄^k'` monomial.
    pub fn zz(k: ExponentMap, kp: ExponentMap) -> Self {
        Monomial {
            k,
            kp,
            ..Default::default()
        }
    }

    pub fn degree(&self) -> u32 {
        2 * self.a.total() + 2 * self.b.total() + self.k.total() + self.kp.total()
    }

    pub fn momentum(&self) -> i64 {
        momentum(&self.k, &self.kp)
    }

    pub fn class(&self) -> TermClass {
        match self.b.total() {
            0 => TermClass::R0,
            1 => TermClass::R1,
            _ => TermClass::R2,
        }
    }

    /// Disjoint `z`/`z̄` supports.
    pub fn is_canonical(&self) -> bool {
        self.k.disjoint(&self.kp)
    }

    /// `k = k' = 0`.
    pub fn is_diagonal(&self) -> bool {
        self.k.is_empty() && self.kp.is_empty()
    }

    pub fn max_abs_mode(&self) -> u32 {
        [&self.a, &self.b, &self.k, &self.kp]
            .iter()
            .map(|m| m.max_abs_mode())
            .max()
            .unwrap_or(0)
    }

    /// Modes on which the monomial depends through `J`, `z` or `z̄`.
    pub fn var_modes(&self) -> SmallVec<[i32; 8]> {
        let mut v: SmallVec<[i32; 8]> = self
            .b
            .support()
            .chain(self.k.support())
            .chain(self.kp.support())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Multiset `n ↦ 2a_n + 2b_n + k_n + k'_n`.
    pub fn weighted_multiset(&self) -> SmallVec<[(i64, u64); 8]> {
        let mut out: SmallVec<[(i64, u64); 8]> = SmallVec::new();
        for (m, w) in [(&self.a, 2u64), (&self.b, 2), (&self.k, 1), (&self.kp, 1)] {
            for (n, e) in m.iter() {
                out.push((n as i64, w * e as u64));
            }
        }
        out
    }

    pub fn rearrangement(&self) -> Rearrangement {
        decreasing_rearrangement(self.weighted_multiset())
    }

    /// Entrywise product of two monomials; the result may overlap in `k`/`k'`.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            a: self.a.merged(&other.a),
            b: self.b.merged(&other.b),
            k: self.k.merged(&other.k),
            kp: self.kp.merged(&other.kp),
        }
    }

    /// Partial derivative with respect to `z_n` or `z̄_n`, as up to two
    /// monomials with integer multipliers. `J_n` differentiates to `z̄_n`
    /// (resp. `z_n`).
    pub fn derivative(&self, n: i32, var: Var) -> SmallVec<[(Monomial, f64); 2]> {
        let mut out = SmallVec::new();
        let bn = self.b.get(n);
        if bn > 0 {
            let mut m = self.clone();
            m.b.sub(n, 1);
            match var {
                Var::Z => m.kp.add(n, 1),
                Var::ZBar => m.k.add(n, 1),
            }
            out.push((m, bn as f64));
        }
        let (e, is_k) = match var {
            Var::Z => (self.k.get(n), true),
            Var::ZBar => (self.kp.get(n), false),
        };
        if e > 0 {
            let mut m = self.clone();
            if is_k {
                m.k.sub(n, 1);
            } else {
                m.kp.sub(n, 1);
            }
            out.push((m, e as f64));
        }
        out
    }

    /// Rewrites every diagonal pair `(z_n z̄_n)^m` as `(J_n + I_n(0))^m`.
    ///
    /// Returns canonical monomials with binomial multipliers.
    pub fn canonical_expansion(&self) -> SmallVec<[(Monomial, f64); 4]> {
        let mut base = self.clone();
        let mut pairs: SmallVec<[(i32, u32); 4]> = SmallVec::new();
        for (n, e) in self.k.iter() {
            let m = e.min(self.kp.get(n));
            if m > 0 {
                pairs.push((n, m));
            }
        }
        for &(n, m) in &pairs {
            base.k.sub(n, m);
            base.kp.sub(n, m);
        }
        let mut out: SmallVec<[(Monomial, f64); 4]> = SmallVec::new();
        out.push((base, 1.0));
        for &(n, m) in &pairs {
            let mut next: SmallVec<[(Monomial, f64); 4]> = SmallVec::new();
            for (mono, w) in &out {
                for j in 0..=m {
                    let mut t = mono.clone();
                    t.b.add(n, j);
                    t.a.add(n, m - j);
                    next.push((t, w * binomial(m, j)));
                }
            }
            out = next;
        }
        out
    }

    /// Rewrites every `J_n^b` as `(z_n z̄_n − I_n(0))^b`, producing `b = 0`
    /// monomials with signed binomial multipliers.
    pub fn j_expansion(&self) -> SmallVec<[(Monomial, f64); 4]> {
        let mut base = self.clone();
        base.b = ExponentMap::new();
        let mut out: SmallVec<[(Monomial, f64); 4]> = SmallVec::new();
        out.push((base, 1.0));
        for (n, e) in self.b.iter() {
            let mut next: SmallVec<[(Monomial, f64); 4]> = SmallVec::new();
            for (mono, w) in &out {
                for j in 0..=e {
                    let mut t = mono.clone();
                    t.k.add(n, j);
                    t.kp.add(n, j);
                    t.a.add(n, e - j);
                    let sign = if (e - j) % 2 == 0 { 1.0 } else { -1.0 };
                    next.push((t, w * sign * binomial(e, j)));
                }
            }
            out = next;
        }
        out
    }
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a:{} b:{} k:{} k':{}", self.a, self.b, self.k, self.kp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn em(p: &[(i32, u32)]) -> ExponentMap {
        ExponentMap::from_pairs(p.iter().copied())
    }

    #[test]
    fn diagonal_pairs_expand_binomially() {
        let m = Monomial::zz(em(&[(3, 1), (-3, 1)]), em(&[(3, 1), (-3, 1)]));
        let exp = m.canonical_expansion();
        assert_eq!(exp.len(), 4);
        let classes: Vec<_> = exp.iter().map(|(t, _)| t.class()).collect();
        assert!(classes.contains(&TermClass::R2));
        assert_eq!(classes.iter().filter(|c| **c == TermClass::R1).count(), 2);
        assert!(exp.iter().all(|(t, w)| *w == 1.0 && t.is_diagonal()));
    }

    #[test]
    fn j_square_expands_with_signs() {
        let m = Monomial::new(em(&[]), em(&[(1, 2)]), em(&[]), em(&[]));
        let exp = m.j_expansion();
        let mut got: Vec<(String, f64)> = exp.iter().map(|(t, w)| (t.to_string(), *w)).collect();
        got.sort_by(|x, y| x.0.cmp(&y.0));
        assert_eq!(
            got,
            vec![
                ("a:{1:1} b:{} k:{1:1} k':{1:1}".to_string(), -2.0),
                ("a:{1:2} b:{} k:{} k':{}".to_string(), 1.0),
                ("a:{} b:{} k:{1:2} k':{1:2}".to_string(), 1.0),
            ]
        );
    }

    #[test]
    fn derivative_of_j_gives_conjugate_variable() {
        let m = Monomial::new(em(&[]), em(&[(2, 1)]), em(&[]), em(&[]));
        let d = m.derivative(2, Var::Z);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].0.kp.get(2), 1);
        assert!(d[0].0.b.is_empty());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(10, 0), 1.0);
        assert_eq!(binomial(7, 7), 1.0);
    }
}
