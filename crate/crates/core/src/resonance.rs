//! Diophantine nonresonance predicates and Monte Carlo estimates of the
//! resonant set in frequency space.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::hamalg::dd::Dd;
use crate::indices::{decreasing_rearrangement, floor_index, ExponentMap, ModeVec, Rearrangement};
use crate::rng;

/// Hard cap on the number of enumerated integer vectors.
pub const ELL_BUDGET_LIMIT: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResonanceError {
    #[error("|ℓ| = {0} is below 3")]
    ArityError(u64),
    #[error("integer vector must have at least one nonzero entry")]
    ZeroVector,
    #[error("enumeration exceeds {limit} vectors")]
    BudgetOverflow { limit: u64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Sparse integer vector `ℓ`, sorted by mode, no zero entries.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IntegerVector {
    entries: SmallVec<[(i32, i32); 4]>,
}

impl IntegerVector {
    pub fn new<I: IntoIterator<Item = (i32, i32)>>(pairs: I) -> Result<Self, ResonanceError> {
        let mut entries: SmallVec<[(i32, i32); 4]> = SmallVec::new();
        for (n, l) in pairs {
            match entries.binary_search_by_key(&n, |&(m, _)| m) {
                Ok(i) => entries[i].1 += l,
                Err(i) => entries.insert(i, (n, l)),
            }
        }
        entries.retain(|e| e.1 != 0);
        if entries.is_empty() {
            return Err(ResonanceError::ZeroVector);
        }
        Ok(IntegerVector { entries })
    }

    /// `ℓ = k − k'`, or `None` when it vanishes.
    pub fn from_exponents(k: &ExponentMap, kp: &ExponentMap) -> Option<Self> {
        Self::new(
            k.iter()
                .map(|(n, e)| (n, e as i32))
                .chain(kp.iter().map(|(n, e)| (n, -(e as i32)))),
        )
        .ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        self.entries.iter().copied()
    }

    pub fn get(&self, n: i32) -> i32 {
        self.entries
            .binary_search_by_key(&n, |&(m, _)| m)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// `|ℓ| = Σ |ℓ_n|`.
    pub fn l1(&self) -> u64 {
        self.entries.iter().map(|&(_, l)| l.unsigned_abs() as u64).sum()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn height(&self) -> u32 {
        self.entries.iter().map(|&(_, l)| l.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn momentum(&self) -> i64 {
        self.entries.iter().map(|&(n, l)| n as i64 * l as i64).sum()
    }

    pub fn negated(&self) -> Self {
        IntegerVector {
            entries: self.entries.iter().map(|&(n, l)| (n, -l)).collect(),
        }
    }

    /// `|n|` repeated `|ℓ_n|` times, nonincreasing.
    pub fn rearrangement(&self) -> Rearrangement {
        decreasing_rearrangement(self.entries.iter().map(|&(n, l)| (n as i64, l.unsigned_abs() as u64)))
    }

    pub fn n3star(&self) -> u64 {
        self.rearrangement().nth_star(3)
    }

    /// `ℓ = e_n − e_{−n}` for some `n ≠ 0`, whose divisor vanishes for even
    /// frequencies.
    pub fn is_degenerate_pair(&self) -> bool {
        self.entries.len() == 2
            && self.entries[0].0 == -self.entries[1].0
            && self.entries[0].1 == -self.entries[1].1
            && self.entries[0].1.abs() == 1
    }

    fn check_arity(&self) -> Result<(), ResonanceError> {
        let l1 = self.l1();
        if l1 < 3 {
            return Err(ResonanceError::ArityError(l1));
        }
        Ok(())
    }

    /// Entries with `|n| ≤ n3*(ℓ)`.
    fn low_sites(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        let cut = self.n3star();
        self.iter().filter(move |&(n, _)| n.unsigned_abs() as u64 <= cut)
    }
}

impl std::fmt::Display for IntegerVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("{")?;
        for (i, (n, l)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}:{l}")?;
        }
        f.write_str("}")
    }
}

/// A point of `Π_c`: `ω_n = c√(c²+n²) + r_n` with
/// `r_n ∈ [0, c/(3√(c²+n²+1))]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencySample {
    pub omega: ModeVec<f64>,
    pub c: f64,
}

fn base_frequency(c: f64, n: i32) -> f64 {
    let n = n as f64;
    c * (c * c + n * n).sqrt()
}

fn box_width(c: f64, n: i32) -> f64 {
    let n = n as f64;
    c / (3.0 * (c * c + n * n + 1.0).sqrt())
}

impl FrequencySample {
    pub fn draw<R: Rng>(c: f64, n_max: u32, rng: &mut R) -> Self {
        let omega = ModeVec::from_fn(n_max, |n| base_frequency(c, n) + rng.random::<f64>() * box_width(c, n));
        FrequencySample { omega, c }
    }

    /// Exact box-membership check.
    pub fn in_box(&self) -> bool {
        self.omega.iter().all(|(n, &w)| {
            let r = w - base_frequency(self.c, n);
            (0.0..=box_width(self.c, n)).contains(&r)
        })
    }
}

/// `Σ ℓ_n ω_n` with compensated summation.
pub fn small_divisor(ell: &IntegerVector, omega: &ModeVec<f64>) -> f64 {
    let mut acc = Dd::default();
    for (n, l) in ell.iter() {
        acc.add_prod(l as f64, omega[n]);
    }
    acc.value()
}

/// A threshold kept in log space; `value` is `None` when it underflows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub log_value: f64,
    pub value: Option<f64>,
}

impl Threshold {
    fn from_log(log_value: f64) -> Self {
        let v = log_value.exp();
        Threshold {
            log_value,
            value: (v >= f64::MIN_POSITIVE || log_value == f64::NEG_INFINITY).then_some(v),
        }
    }

    /// `|x| ≥ threshold`, on logs when either side is tiny.
    pub fn passed_by(&self, x: f64) -> bool {
        let ax = x.abs();
        match self.value {
            Some(v) if ax >= 1e-300 && v >= 1e-300 => ax >= v,
            _ => ax.ln() >= self.log_value,
        }
    }
}

fn ln_floor(n: i32) -> f64 {
    (floor_index(n as i64) as f64).ln()
}

/// `ln Π_{|n| ≤ n3*, ℓ_n ≠ 0} 1/(|ℓ_n|⁵ ⌊n⌋⁶)`.
fn log_low_product(ell: &IntegerVector) -> f64 {
    ell.low_sites()
        .map(|(n, l)| -5.0 * (l.unsigned_abs() as f64).ln() - 6.0 * ln_floor(n))
        .sum()
}

/// `γ (Π_{|n| ≤ n3*(ℓ), ℓ_n ≠ 0} 1/(|ℓ_n|⁵ ⌊n⌋⁶))⁵`.
pub fn nr_threshold(ell: &IntegerVector, gamma: f64) -> Result<Threshold, ResonanceError> {
    ell.check_arity()?;
    Ok(Threshold::from_log(gamma.ln() + 5.0 * log_low_product(ell)))
}

pub fn check_nr_main(ell: &IntegerVector, omega: &ModeVec<f64>, gamma: f64) -> Result<bool, ResonanceError> {
    let thr = nr_threshold(ell, gamma)?;
    Ok(thr.passed_by(small_divisor(ell, omega)))
}

/// `|Σ ℓ_n ω_n| ≥ γ^{1/3} Π_n 1/(|ℓ_n|² ⌊n⌋³)` over every nonzero site.
pub fn check_nr_basic(ell: &IntegerVector, omega: &ModeVec<f64>, gamma: f64) -> bool {
    let log: f64 = ell
        .iter()
        .map(|(n, l)| -2.0 * (l.unsigned_abs() as f64).ln() - 3.0 * ln_floor(n))
        .sum();
    Threshold::from_log(gamma.ln() / 3.0 + log).passed_by(small_divisor(ell, omega))
}

/// `B(ℓ) = 2 Π_{|n| ≤ n3*(ℓ), ℓ_n ≠ 0} |ℓ_n| ⌊n⌋`.
pub fn b_bound(ell: &IntegerVector) -> Result<f64, ResonanceError> {
    ell.check_arity()?;
    Ok(2.0
        * ell
            .low_sites()
            .map(|(n, l)| l.unsigned_abs() as f64 * floor_index(n as i64) as f64)
            .product::<f64>())
}

/// Which side of `2√2 B(ℓ)² ≥ c` an integer vector falls on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `2√2 B² ≥ c`: the `b·c` variant of the condition is used.
    BcVariant,
    /// `c > 2√2 B²`: the partial divisor is bounded directly.
    LargeC,
}

pub fn regime(ell: &IntegerVector, c: f64) -> Result<Regime, ResonanceError> {
    let b = b_bound(ell)?;
    Ok(if 2.0 * std::f64::consts::SQRT_2 * b * b >= c {
        Regime::BcVariant
    } else {
        Regime::LargeC
    })
}

fn partial_divisor(ell: &IntegerVector, omega: &ModeVec<f64>, b: i64, c: f64) -> f64 {
    let mut acc = Dd::default();
    for (n, l) in ell.low_sites() {
        acc.add_prod(l as f64, omega[n]);
    }
    acc.add_prod(b as f64, c);
    acc.value()
}

/// The `b·c` condition evaluated directly, without the large-`b` shortcut.
pub fn check_nr_with_b_direct(
    ell: &IntegerVector,
    b: i64,
    omega: &ModeVec<f64>,
    gamma: f64,
    c: f64,
) -> Result<bool, ResonanceError> {
    ell.check_arity()?;
    let thr = Threshold::from_log(gamma.ln() / 3.0 + log_low_product(ell));
    Ok(thr.passed_by(partial_divisor(ell, omega, b, c)))
}

/// `|Σ_{|n| ≤ n3*} ℓ_n ω_n + b c| ≥ γ^{1/3} Π_{|n| ≤ n3*, ℓ_n ≠ 0} 1/(|ℓ_n|⁵⌊n⌋⁶)`;
/// true without evaluation when `|b| > c B(ℓ) + 1`.
pub fn check_nr_with_b(
    ell: &IntegerVector,
    b: i64,
    omega: &ModeVec<f64>,
    gamma: f64,
    c: f64,
) -> Result<bool, ResonanceError> {
    let big_b = b_bound(ell)?;
    if (b.unsigned_abs() as f64) > c * big_b + 1.0 {
        return Ok(true);
    }
    check_nr_with_b_direct(ell, b, omega, gamma, c)
}

/// Enumeration limits for `ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllBudget {
    pub max_support: usize,
    pub max_height: u32,
    pub max_n3star: u32,
    /// Largest `|n|` allowed in the support. Defaults to `max_n3star`.
    pub n_max: Option<u32>,
}

impl EllBudget {
    pub fn mode_bound(&self) -> u32 {
        self.n_max.unwrap_or(self.max_n3star)
    }
}

fn choose(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Every `ℓ` within the budget with `|ℓ| ≥ 3`, ordered by support size,
/// then height, then lexicographically.
pub fn enumerate_ells(budget: &EllBudget) -> Result<Vec<IntegerVector>, ResonanceError> {
    let nm = budget.mode_bound() as i32;
    let modes: Vec<i32> = (-nm..=nm).collect();
    let h = budget.max_height as i32;
    let s_max = budget.max_support.min(modes.len());
    let upper: f64 = (1..=s_max)
        .map(|s| choose(modes.len() as u64, s as u64) * (2.0 * h as f64).powi(s as i32))
        .sum();
    if upper > 1e12 {
        return Err(ResonanceError::BudgetOverflow {
            limit: ELL_BUDGET_LIMIT,
        });
    }
    let values: Vec<i32> = (-h..=h).filter(|&v| v != 0).collect();
    let mut out = Vec::new();
    let mut support = Vec::with_capacity(s_max);
    let mut coeffs = Vec::with_capacity(s_max);

    fn assign(
        modes: &[i32],
        values: &[i32],
        support: &[usize],
        coeffs: &mut Vec<i32>,
        budget: &EllBudget,
        out: &mut Vec<IntegerVector>,
    ) -> Result<(), ResonanceError> {
        if coeffs.len() == support.len() {
            let ell = IntegerVector {
                entries: support.iter().zip(coeffs.iter()).map(|(&i, &l)| (modes[i], l)).collect(),
            };
            if ell.l1() >= 3 && ell.n3star() <= budget.max_n3star as u64 {
                if out.len() as u64 >= ELL_BUDGET_LIMIT {
                    return Err(ResonanceError::BudgetOverflow {
                        limit: ELL_BUDGET_LIMIT,
                    });
                }
                out.push(ell);
            }
            return Ok(());
        }
        for &v in values {
            coeffs.push(v);
            assign(modes, values, support, coeffs, budget, out)?;
            coeffs.pop();
        }
        Ok(())
    }

    fn supports(
        modes: &[i32],
        values: &[i32],
        start: usize,
        size: usize,
        support: &mut Vec<usize>,
        coeffs: &mut Vec<i32>,
        budget: &EllBudget,
        out: &mut Vec<IntegerVector>,
    ) -> Result<(), ResonanceError> {
        if support.len() == size {
            return assign(modes, values, support, coeffs, budget, out);
        }
        for i in start..modes.len() {
            support.push(i);
            supports(modes, values, i + 1, size, support, coeffs, budget, out)?;
            support.pop();
        }
        Ok(())
    }

    for size in 1..=s_max {
        let first = out.len();
        supports(&modes, &values, 0, size, &mut support, &mut coeffs, budget, &mut out)?;
        out[first..].sort_by(|a, b| a.height().cmp(&b.height()).then_with(|| a.cmp(b)));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub fraction: f64,
    pub stderr: f64,
    pub samples: usize,
    /// Number of enumerated integer vectors.
    pub budget: usize,
    pub gamma: f64,
    pub c: f64,
    /// The enumeration is truncated, so the fraction is a lower bound.
    pub lower_bound: bool,
}

struct Prepared {
    sites: SmallVec<[(usize, f64); 4]>,
    log_base: f64,
}

/// Samples per parallel work item; fixed so results do not depend on the
/// thread count.
const CHUNK: usize = 64;

/// Resonant-fraction estimates for several `γ` from one shared set of
/// samples.
pub fn estimate_resonant_measure_multi(
    c: f64,
    gammas: &[f64],
    budget: &EllBudget,
    samples: usize,
    seed: u64,
) -> Result<Vec<MeasureEstimate>, ResonanceError> {
    if samples < 100 {
        return Err(ResonanceError::Invalid(format!("samples = {samples} < 100")));
    }
    if !(c >= 1.0) {
        return Err(ResonanceError::Invalid(format!("c = {c} must be at least 1")));
    }
    if gammas.iter().any(|g| !(*g >= 0.0)) {
        return Err(ResonanceError::Invalid("gamma must be nonnegative".into()));
    }
    let ells = enumerate_ells(budget)?;
    let n_max = budget.mode_bound();
    let prepared: Vec<Prepared> = ells
        .iter()
        .map(|ell| Prepared {
            sites: ell.iter().map(|(n, l)| ((n + n_max as i32) as usize, l as f64)).collect(),
            log_base: 5.0 * log_low_product(ell),
        })
        .collect();
    let log_gammas: Vec<f64> = gammas.iter().map(|g| g.ln()).collect();
    let log_gamma_max = log_gammas.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let chunks = samples.div_ceil(CHUNK);
    let counts: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut g = rng::substream(seed, rng::STREAM_RESONANCE, ci as u64);
            let mut hits = vec![0u64; gammas.len()];
            let lo = ci * CHUNK;
            let hi = (lo + CHUNK).min(samples);
            for _ in lo..hi {
                let sample = FrequencySample::draw(c, n_max, &mut g);
                let w = sample.omega.as_slice();
                // smallest ln|divisor| − ln(threshold/γ) over all ℓ
                let mut worst = f64::INFINITY;
                for p in &prepared {
                    let mut acc = Dd::default();
                    for &(i, l) in &p.sites {
                        acc.add_prod(l, w[i]);
                    }
                    let d = acc.value().abs();
                    // fast reject: divisor clearly above every threshold
                    let top = log_gamma_max + p.log_base;
                    if top < -690.0 && d > 1e-300 {
                        continue;
                    }
                    if top >= -690.0 && d > 1e-300 && d > top.exp() * (1.0 + 1e-12) {
                        continue;
                    }
                    worst = worst.min(d.ln() - p.log_base);
                }
                for (h, lg) in hits.iter_mut().zip(&log_gammas) {
                    if worst < *lg {
                        *h += 1;
                    }
                }
            }
            hits
        })
        .collect();

    let ells_len = ells.len();
    Ok(gammas
        .iter()
        .enumerate()
        .map(|(gi, &gamma)| {
            let k: u64 = counts.iter().map(|h| h[gi]).sum();
            let p = k as f64 / samples as f64;
            MeasureEstimate {
                fraction: p,
                stderr: (p * (1.0 - p) / samples as f64).sqrt(),
                samples,
                budget: ells_len,
                gamma,
                c,
                lower_bound: true,
            }
        })
        .collect())
}

pub fn estimate_resonant_measure(
    c: f64,
    gamma: f64,
    budget: &EllBudget,
    samples: usize,
    seed: u64,
) -> Result<MeasureEstimate, ResonanceError> {
    Ok(estimate_resonant_measure_multi(c, &[gamma], budget, samples, seed)?.remove(0))
}

/// Least-squares slope of `ln fraction` against `ln γ` over the points with a
/// positive fraction; `None` with fewer than two such points.
pub fn fit_log_slope(estimates: &[MeasureEstimate]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = estimates
        .iter()
        .filter(|e| e.fraction > 0.0 && e.gamma > 0.0)
        .map(|e| (e.gamma.ln(), e.fraction.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlkg::frequency;

    fn ell(p: &[(i32, i32)]) -> IntegerVector {
        IntegerVector::new(p.iter().copied()).unwrap()
    }

    fn flat_omega(c: f64, n_max: u32) -> ModeVec<f64> {
        ModeVec::from_fn(n_max, |n| frequency(c, n, 0.0))
    }

    #[test]
    fn divisor_examples() {
        let w = flat_omega(1.0, 4);
        assert_eq!(small_divisor(&ell(&[(3, 1), (-3, -1)]), &w), 0.0);
        assert_eq!(small_divisor(&ell(&[(0, 1)]), &w), 1.0);
        let d = small_divisor(&ell(&[(1, 2), (-2, 1)]), &w);
        assert!((d - 5.064_495_102_245_98).abs() < 1e-13);
    }

    #[test]
    fn threshold_examples() {
        let l = ell(&[(1, 2), (-2, 1)]);
        assert_eq!(l.n3star(), 1);
        let t = nr_threshold(&l, 1e-3).unwrap();
        let expected = 1e-3f64.ln() + 5.0 * (-5.0 * 2f64.ln() - 6.0 * 1024f64.ln());
        assert!((t.log_value - expected).abs() < 1e-12);
        assert!(check_nr_main(&l, &flat_omega(1.0, 4), 1e-3).unwrap());
        let single = ell(&[(3, 3)]);
        assert_eq!(single.n3star(), 3);
        let t = nr_threshold(&single, 1.0).unwrap();
        assert!((t.log_value - 5.0 * (-5.0 * 3f64.ln() - 6.0 * 1024f64.ln())).abs() < 1e-12);
        assert_eq!(nr_threshold(&single, 0.0).unwrap().value, Some(0.0));
        assert!(matches!(
            nr_threshold(&ell(&[(1, 1), (2, 1)]), 1e-3),
            Err(ResonanceError::ArityError(2))
        ));
    }

    #[test]
    fn b_bound_example() {
        assert_eq!(b_bound(&ell(&[(1, 2), (-2, 1)])).unwrap(), 4096.0);
    }

    #[test]
    fn basic_check_on_unit_vector() {
        assert!(check_nr_basic(&ell(&[(0, 1)]), &flat_omega(1.0, 3), 1.0));
    }

    #[test]
    fn degenerate_pair_detection() {
        assert!(ell(&[(3, 1), (-3, -1)]).is_degenerate_pair());
        assert!(!ell(&[(3, 1), (-3, 1)]).is_degenerate_pair());
        assert!(!ell(&[(3, 1), (2, -1)]).is_degenerate_pair());
    }

    #[test]
    fn enumeration_respects_budget() {
        let b = EllBudget {
            max_support: 2,
            max_height: 2,
            max_n3star: 1,
            n_max: Some(2),
        };
        let ells = enumerate_ells(&b).unwrap();
        assert!(ells.iter().all(|l| l.l1() >= 3 && l.support_len() <= 2 && l.height() <= 2 && l.n3star() <= 1));
        assert!(ells.windows(2).all(|w| w[0].support_len() <= w[1].support_len()));
        // brute force over the 5-mode box
        let mut brute = 0;
        for a in -2i32..=2 {
            for b2 in -2i32..=2 {
                for c2 in -2i32..=2 {
                    for d in -2i32..=2 {
                        for e in -2i32..=2 {
                            let v = [a, b2, c2, d, e];
                            let nz = v.iter().filter(|x| **x != 0).count();
                            if nz == 0 || nz > 2 {
                                continue;
                            }
                            let l = IntegerVector::new((-2..=2).zip(v)).unwrap();
                            if l.l1() >= 3 && l.n3star() <= 1 {
                                brute += 1;
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(ells.len(), brute);
    }
}
