//! Index bookkeeping: Fourier modes, sparse exponent maps, weights and
//! decreasing rearrangements.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

/// Indices with `|n|` below this value share the same weight.
pub const FLOOR_INDEX: u64 = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndexError {
    #[error("mode {n} outside truncation |n| <= {n_max}")]
    OutOfRange { n: i32, n_max: u32 },
    #[error("truncation bound N_max = {0} must be at least 2")]
    BadTruncation(u32),
}

/// A Fourier mode inside the truncation window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeIndex(i32);

impl ModeIndex {
    pub fn new(n: i32, n_max: u32) -> Result<Self, IndexError> {
        if n_max < 2 {
            return Err(IndexError::BadTruncation(n_max));
        }
        if n.unsigned_abs() > n_max {
            return Err(IndexError::OutOfRange { n, n_max });
        }
        Ok(ModeIndex(n))
    }

    #[inline]
    pub fn get(self) -> i32 {
        self.0
    }
}

/// `⌊n⌋ = max(1024, |n|)`.
#[inline]
pub fn floor_index(n: i64) -> u64 {
    n.unsigned_abs().max(FLOOR_INDEX)
}

/// `ln^σ ⌊n⌋`, evaluated as `exp(σ ln ln ⌊n⌋)`.
#[inline]
pub fn weight(n: i64, sigma: f64) -> f64 {
    let ln = (floor_index(n) as f64).ln();
    (sigma * ln.ln()).exp()
}

/// Nonincreasing list of `|n|` values, counted with multiplicity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Rearrangement {
    values: Vec<u64>,
}

impl Rearrangement {
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `n_i*`, one-based; 0 past the end.
    pub fn nth_star(&self, i: usize) -> u64 {
        assert!(i >= 1, "rearrangement positions are one-based");
        self.values.get(i - 1).copied().unwrap_or(0)
    }

    /// `Σ_{i ≥ from} ln^σ ⌊n_i*⌋`.
    pub fn tail_weight(&self, from: usize, sigma: f64) -> f64 {
        self.values
            .iter()
            .skip(from.saturating_sub(1))
            .map(|&v| weight(v as i64, sigma))
            .sum()
    }
}

pub fn decreasing_rearrangement<I>(multiset: I) -> Rearrangement
where
    I: IntoIterator<Item = (i64, u64)>,
{
    let mut values = Vec::new();
    for (n, mult) in multiset {
        values.extend(std::iter::repeat(n.unsigned_abs()).take(mult as usize));
    }
    values.sort_unstable_by(|a, b| b.cmp(a));
    Rearrangement { values }
}

/// Sparse map from mode to a positive exponent, sorted by mode.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExponentMap(SmallVec<[(i32, u32); 4]>);

impl ExponentMap {
    pub fn new() -> Self {
        ExponentMap(SmallVec::new())
    }

    /// Builds a map from arbitrary pairs; repeated modes add up and zero
    /// exponents are dropped.
    pub fn from_pairs<I: IntoIterator<Item = (i32, u32)>>(pairs: I) -> Self {
        let mut m = ExponentMap::new();
        for (n, e) in pairs {
            m.add(n, e);
        }
        m
    }

    pub fn single(n: i32, e: u32) -> Self {
        Self::from_pairs([(n, e)])
    }

    #[inline]
    pub fn get(&self, n: i32) -> u32 {
        match self.0.binary_search_by_key(&n, |&(m, _)| m) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    #[inline]
    pub fn iter(&self) -> impl Iterator<Item = (i32, u32)> + '_ {
        self.0.iter().copied()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn max_abs_mode(&self) -> u32 {
        self.0.iter().map(|&(n, _)| n.unsigned_abs()).max().unwrap_or(0)
    }

    /// Adds `e` to the exponent of mode `n`.
    pub fn add(&mut self, n: i32, e: u32) {
        if e == 0 {
            return;
        }
        match self.0.binary_search_by_key(&n, |&(m, _)| m) {
            Ok(i) => self.0[i].1 += e,
            Err(i) => self.0.insert(i, (n, e)),
        }
    }

    /// Sets the exponent of mode `n`, removing the entry when `e == 0`.
    pub fn set(&mut self, n: i32, e: u32) {
        match self.0.binary_search_by_key(&n, |&(m, _)| m) {
            Ok(i) if e == 0 => {
                self.0.remove(i);
            }
            Ok(i) => self.0[i].1 = e,
            Err(_) if e == 0 => {}
            Err(i) => self.0.insert(i, (n, e)),
        }
    }

    /// Subtracts `e` from mode `n`; panics on underflow.
    pub fn sub(&mut self, n: i32, e: u32) {
        let cur = self.get(n);
        assert!(cur >= e, "exponent underflow at mode {n}");
        self.set(n, cur - e);
    }

    /// Entrywise sum, merging two sorted maps.
    pub fn merged(&self, other: &ExponentMap) -> ExponentMap {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        let mut out = SmallVec::with_capacity(self.len() + other.len());
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        ExponentMap(out)
    }

    /// `Σ n · e_n`.
    pub fn moment(&self) -> i64 {
        self.0.iter().map(|&(n, e)| n as i64 * e as i64).sum()
    }

    pub fn support(&self) -> impl Iterator<Item = i32> + '_ {
        self.0.iter().map(|&(n, _)| n)
    }

    pub fn disjoint(&self, other: &ExponentMap) -> bool {
        self.0.iter().all(|&(n, _)| other.get(n) == 0)
    }
}

impl fmt::Debug for ExponentMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ExponentMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (n, e)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}:{e}")?;
        }
        f.write_str("}")
    }
}

/// `Σ (k_n − k'_n) n`.
pub fn momentum(k: &ExponentMap, kprime: &ExponentMap) -> i64 {
    k.moment() - kprime.moment()
}

/// Dense vector over the modes `−N_max..=N_max`, indexed by the signed mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeVec<T> {
    n_max: u32,
    data: Vec<T>,
}

impl<T: Clone> ModeVec<T> {
    pub fn filled(n_max: u32, value: T) -> Self {
        ModeVec {
            n_max,
            data: vec![value; 2 * n_max as usize + 1],
        }
    }
}

impl<T> ModeVec<T> {
    pub fn from_fn(n_max: u32, mut f: impl FnMut(i32) -> T) -> Self {
        let m = n_max as i32;
        ModeVec {
            n_max,
            data: (-m..=m).map(&mut f).collect(),
        }
    }

    /// Wraps a vector ordered as `n = −N_max, …, N_max`.
    pub fn from_vec(n_max: u32, data: Vec<T>) -> Option<Self> {
        (data.len() == 2 * n_max as usize + 1).then_some(ModeVec { n_max, data })
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn modes(&self) -> impl Iterator<Item = i32> {
        let m = self.n_max as i32;
        -m..=m
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &T)> {
        self.modes().zip(self.data.iter())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map<U>(&self, mut f: impl FnMut(i32, &T) -> U) -> ModeVec<U> {
        ModeVec {
            n_max: self.n_max,
            data: self.iter().map(|(n, v)| f(n, v)).collect(),
        }
    }

    #[inline]
    pub fn contains(&self, n: i32) -> bool {
        n.unsigned_abs() <= self.n_max
    }

    #[inline]
    fn slot(&self, n: i32) -> usize {
        assert!(self.contains(n), "mode {n} outside |n| <= {}", self.n_max);
        (n + self.n_max as i32) as usize
    }
}

impl<T> Index<i32> for ModeVec<T> {
    type Output = T;
    #[inline]
    fn index(&self, n: i32) -> &T {
        &self.data[self.slot(n)]
    }
}

impl<T> IndexMut<i32> for ModeVec<T> {
    #[inline]
    fn index_mut(&mut self, n: i32) -> &mut T {
        let i = self.slot(n);
        &mut self.data[i]
    }
}

impl ModeVec<f64> {
    pub fn max_abs_diff(&self, other: &ModeVec<f64>) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_below_floor_is_constant() {
        let l = 1024f64.ln();
        let direct = (3.0 * l.ln()).exp();
        assert_eq!(weight(5, 3.0), direct);
        assert_eq!(weight(0, 3.0), weight(1024, 3.0));
        assert!((weight(0, 3.0) - 333.024_651_988_929_5).abs() < 1e-10);
        assert_eq!(weight(-7, 2.5), weight(7, 2.5));
        assert!(weight(1025, 3.0) > weight(1024, 3.0));
    }

    #[test]
    fn rearrangement_examples() {
        let r = decreasing_rearrangement([(5, 1), (-2, 1), (3, 1)]);
        assert_eq!(r.values(), &[5, 3, 2]);
        let r = decreasing_rearrangement(std::iter::empty());
        assert!(r.is_empty());
        assert_eq!(r.nth_star(1), 0);
        let r = decreasing_rearrangement([(2, 2), (-5, 1)]);
        assert_eq!(r.values(), &[5, 2, 2]);
        assert_eq!(r.nth_star(4), 0);
    }

    #[test]
    fn momentum_examples() {
        let k = ExponentMap::from_pairs([(3, 1), (-3, 1)]);
        assert_eq!(momentum(&k, &ExponentMap::new()), 0);
        let k = ExponentMap::single(2, 1);
        assert_eq!(momentum(&k, &k), 0);
        let k = ExponentMap::from_pairs([(5, 1), (-2, 1)]);
        let kp = ExponentMap::single(3, 1);
        assert_eq!(momentum(&k, &kp), 0);
    }

    #[test]
    fn exponent_map_stays_sparse() {
        let mut m = ExponentMap::from_pairs([(3, 2), (-1, 0), (3, 1), (0, 1)]);
        assert_eq!(m.get(3), 3);
        assert_eq!(m.len(), 2);
        m.sub(0, 1);
        assert_eq!(m.len(), 1);
        assert_eq!(m.to_string(), "{3:3}");
        let a = ExponentMap::from_pairs([(-2, 1), (4, 1)]);
        let b = ExponentMap::from_pairs([(-2, 2), (1, 1)]);
        assert_eq!(a.merged(&b).to_string(), "{-2:3,1:1,4:1}");
    }

    #[test]
    fn mode_index_bounds() {
        assert!(ModeIndex::new(4, 4).is_ok());
        assert_eq!(
            ModeIndex::new(-5, 4),
            Err(IndexError::OutOfRange { n: -5, n_max: 4 })
        );
        assert_eq!(ModeIndex::new(0, 1), Err(IndexError::BadTruncation(1)));
    }

    #[test]
    fn mode_vec_indexing() {
        let v = ModeVec::from_fn(2, |n| n * 10);
        assert_eq!(v[-2], -20);
        assert_eq!(v[2], 20);
        assert_eq!(v.len(), 5);
    }
}
