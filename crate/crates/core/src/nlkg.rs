//! The truncated NLKG Hamiltonian `N + R` with cubic nonlinearity `εu³`,
//! its frequencies and the unperturbed torus.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hamalg::{Form, HamError, Hamiltonian, Meta, Monomial, RawTerm, Var};
use crate::indices::{weight, ExponentMap, ModeVec};
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model parameter: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub c: f64,
    pub v: ModeVec<f64>,
    pub eps: f64,
    pub sigma: f64,
    pub r: f64,
    pub n_max: u32,
    pub d_max: u32,
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Invalid(m));
        if !(self.c >= 1.0 && self.c.is_finite()) {
            return bad(format!("c = {} must be at least 1", self.c));
        }
        if self.n_max < 2 {
            return bad(format!("N_max = {} must be at least 2", self.n_max));
        }
        if self.v.n_max() != self.n_max {
            return bad(format!(
                "V has {} entries, expected 2·N_max+1 = {}",
                self.v.len(),
                2 * self.n_max + 1
            ));
        }
        if let Some((n, v)) = self.v.iter().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return bad(format!("V_{n} = {v} outside [0, 1]"));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return bad(format!("eps = {} must be nonnegative", self.eps));
        }
        if !(self.sigma > 2.0 && self.sigma <= 3.0) {
            return bad(format!("sigma = {} outside (2, 3]", self.sigma));
        }
        if !(self.r > 1.0 && self.r.is_finite()) {
            return bad(format!("r = {} must exceed 1", self.r));
        }
        if self.d_max < 4 {
            return bad(format!("D_max = {} must be at least 4", self.d_max));
        }
        Ok(())
    }

    pub fn meta(&self) -> Meta {
        Meta {
            sigma: self.sigma,
            r: self.r,
            c: self.c,
            n_max: self.n_max,
            d_max: self.d_max,
        }
    }

    pub fn with_potential(&self, v: ModeVec<f64>) -> ModelParams {
        ModelParams { v, ..self.clone() }
    }
}

/// `V_n` uniform on `[0, 1]`, drawn in mode order from the potential stream.
pub fn draw_potential(n_max: u32, seed: u64) -> ModeVec<f64> {
    let mut g = rng::stream(seed, rng::STREAM_POTENTIAL);
    ModeVec::from_fn(n_max, |_| g.random::<f64>())
}

#[inline]
pub fn frequency(c: f64, n: i32, v: f64) -> f64 {
    let n = n as f64;
    c * (c * c + n * n + v).sqrt()
}

/// Inverse of [`frequency`] in `V`: `(λ/c)² − c² − n²`.
#[inline]
pub fn potential_from_frequency(c: f64, n: i32, lambda: f64) -> f64 {
    let n = n as f64;
    let q = lambda / c;
    q * q - c * c - n * n
}

/// `λ_n = c √(c² + n² + V_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector {
    pub lambda: ModeVec<f64>,
}

pub fn frequencies(p: &ModelParams) -> FrequencyVector {
    FrequencyVector {
        lambda: p.v.map(|n, &v| frequency(p.c, n, v)),
    }
}

/// `d_n = (c / √(c² + n² + V_n))^{1/2}`.
#[inline]
pub fn d_factor(c: f64, n: i32, v: f64) -> f64 {
    let n = n as f64;
    (c / (c * c + n * n + v).sqrt()).sqrt()
}

/// `∫_{−π}^{π} (√(2/π))⁴ dx`.
pub const QUARTIC_INTEGRAL: f64 = 8.0 / PI;

/// One `(n, σ)` factor of a quartic product; `true` is `z`, `false` is `z̄`.
type Factor = (i32, bool);

fn factors(n_max: u32) -> Vec<Factor> {
    let m = n_max as i32;
    (-m..=m).flat_map(|n| [(n, true), (n, false)]).collect()
}

fn raw_quartic(p: &ModelParams, combo: [Factor; 4], multiplicity: f64) -> Option<RawTerm> {
    let signed: i32 = combo.iter().map(|&(n, s)| if s { n } else { -n }).sum();
    if signed != 0 {
        return None;
    }
    let dprod: f64 = combo.iter().map(|&(n, _)| d_factor(p.c, n, p.v[n])).product();
    let coeff = multiplicity * (p.eps / 16.0) * dprod * QUARTIC_INTEGRAL;
    let mut k = ExponentMap::new();
    let mut kp = ExponentMap::new();
    for &(n, s) in &combo {
        if s {
            k.add(n, 1);
        } else {
            kp.add(n, 1);
        }
    }
    Some(RawTerm {
        coeff: Complex64::new(coeff, 0.0),
        k,
        kp,
    })
}

fn multinomial4(idx: [usize; 4]) -> f64 {
    let mut fact = 1.0;
    let mut run = 1.0;
    for w in 1..4 {
        if idx[w] == idx[w - 1] {
            run += 1.0;
            fact *= run;
        } else {
            run = 1.0;
        }
    }
    24.0 / fact
}

/// Quartic part of the Hamiltonian from unordered factor combinations with
/// multinomial multiplicities.
pub fn quartic_raw_terms(p: &ModelParams) -> Vec<RawTerm> {
    let fs = factors(p.n_max);
    let len = fs.len();
    let mut out = Vec::new();
    for i in 0..len {
        for j in i..len {
            for k in j..len {
                for l in k..len {
                    let idx = [i, j, k, l];
                    let combo = idx.map(|x| fs[x]);
                    if let Some(t) = raw_quartic(p, combo, multinomial4(idx)) {
                        out.push(t);
                    }
                }
            }
        }
    }
    out
}

/// `N = Σ λ_n |z_n|²` in canonical form, i.e. `Σ λ_n (J_n + I_n(0))`.
pub fn normal_form_hamiltonian(lambda: &ModeVec<f64>, meta: Meta) -> Result<Hamiltonian, HamError> {
    Hamiltonian::from_terms(
        meta,
        Form::Canonical,
        lambda.iter().flat_map(|(n, &l)| {
            let c = Complex64::new(l, 0.0);
            [
                (Monomial::new(ExponentMap::new(), ExponentMap::single(n, 1), ExponentMap::new(), ExponentMap::new()), c),
                (Monomial::new(ExponentMap::single(n, 1), ExponentMap::new(), ExponentMap::new(), ExponentMap::new()), c),
            ]
        }),
    )
}

/// `(N, R)` for the model.
pub fn build_hamiltonian(p: &ModelParams) -> Result<(Hamiltonian, Hamiltonian), HamError> {
    let meta = p.meta();
    let n = normal_form_hamiltonian(&frequencies(p).lambda, meta)?;
    let r = Hamiltonian::canonicalize(meta, &quartic_raw_terms(p))?;
    Ok((n, r))
}

/// `I_n(0) = (9/16) e^{−2r ln^σ⌊n⌋}`.
pub fn initial_amplitudes(p: &ModelParams) -> ModeVec<f64> {
    ModeVec::from_fn(p.n_max, |n| 9.0 / 16.0 * (-2.0 * p.r * weight(n as i64, p.sigma)).exp())
}

/// `z_n(t) = √I_n(0) e^{−iω_n t}`.
pub fn torus_trajectory(omega: &ModeVec<f64>, i0: &ModeVec<f64>, t: f64) -> ModeVec<Complex64> {
    omega.map(|n, &w| Complex64::from_polar(i0[n].sqrt(), -w * t))
}

/// `max_n |−i ∂H/∂z̄_n(z) + i ω_n z_n|`, with the gradient taken symbolically on
/// the `b = 0` form of `H`.
pub fn motion_residual(
    h: &Hamiltonian,
    z: &ModeVec<Complex64>,
    omega: &ModeVec<f64>,
    i0: &ModeVec<f64>,
) -> Result<f64, HamError> {
    let expanded = h.expand_j()?;
    let g = expanded.gradient(z, i0, Var::ZBar);
    Ok(g.iter()
        .map(|(n, gn)| (*gn - omega[n] * z[n]).norm())
        .fold(0.0, f64::max))
}
