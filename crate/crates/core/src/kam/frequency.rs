use log::warn;
use serde::{Deserialize, Serialize};

use super::KamError;
use crate::indices::ModeVec;
use crate::nlkg::potential_from_frequency;

const MAX_ITERATIONS: usize = 100;
/// Finite-difference step for closure maps.
const FD_STEP: f64 = 1e-7;

/// `Ṽ_n = (λ̃_n/c)² − c² − n²`.
pub fn vtilde_from_lambda(c: f64, lambda: &ModeVec<f64>) -> ModeVec<f64> {
    lambda.map(|n, &l| potential_from_frequency(c, n, l))
}

/// A map `V ↦ Ṽ(V)` with a Jacobian; rows index outputs, columns inputs.
pub trait FrequencyMap {
    fn eval(&self, v: &ModeVec<f64>) -> Result<ModeVec<f64>, KamError>;
    fn jacobian(&self, v: &ModeVec<f64>) -> Result<Vec<Vec<f64>>, KamError>;
}

/// `Ṽ(V) ≈ value + J (V − center)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub center: ModeVec<f64>,
    pub value: ModeVec<f64>,
    pub jacobian: Vec<Vec<f64>>,
}

impl AffineMap {
    pub fn identity(center: ModeVec<f64>) -> Self {
        let k = center.len();
        AffineMap {
            value: center.clone(),
            center,
            jacobian: (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect(),
        }
    }
}

impl FrequencyMap for AffineMap {
    fn eval(&self, v: &ModeVec<f64>) -> Result<ModeVec<f64>, KamError> {
        let dv: Vec<f64> = v.as_slice().iter().zip(self.center.as_slice()).map(|(a, b)| a - b).collect();
        let mut out = self.value.clone();
        for (o, row) in out.as_mut_slice().iter_mut().zip(&self.jacobian) {
            *o += row.iter().zip(&dv).map(|(j, d)| j * d).sum::<f64>();
        }
        Ok(out)
    }

    fn jacobian(&self, _v: &ModeVec<f64>) -> Result<Vec<Vec<f64>>, KamError> {
        Ok(self.jacobian.clone())
    }
}

/// Any closure, with a central-difference Jacobian.
pub struct ClosureMap<F>(pub F);

impl<F: Fn(&ModeVec<f64>) -> ModeVec<f64>> FrequencyMap for ClosureMap<F> {
    fn eval(&self, v: &ModeVec<f64>) -> Result<ModeVec<f64>, KamError> {
        Ok((self.0)(v))
    }

    fn jacobian(&self, v: &ModeVec<f64>) -> Result<Vec<Vec<f64>>, KamError> {
        let k = v.len();
        let mut jac = vec![vec![0.0; k]; k];
        for col in 0..k {
            let mut plus = v.clone();
            let mut minus = v.clone();
            plus.as_mut_slice()[col] += FD_STEP;
            minus.as_mut_slice()[col] -= FD_STEP;
            let (fp, fm) = ((self.0)(&plus), (self.0)(&minus));
            for (row, j) in jac.iter_mut().enumerate() {
                j[col] = (fp.as_slice()[row] - fm.as_slice()[row]) / (2.0 * FD_STEP);
            }
        }
        Ok(jac)
    }
}

/// `‖J − I‖` as an operator norm on `ℓ^∞` (largest absolute row sum).
pub fn jacobian_defect(jac: &[Vec<f64>]) -> f64 {
    jac.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, x)| (x - if i == j { 1.0 } else { 0.0 }).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inversion {
    pub vstar: ModeVec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// `‖J − I‖` at the starting point.
    pub defect: f64,
    /// Some component of `V*` left `[0, 1]`.
    pub range_exit: bool,
}

/// Solves `Ṽ(V) = T` by the fixed-point iteration `V ← V − (Ṽ(V) − T)`
/// from `guess`.
pub fn invert_frequency_map(
    map: &dyn FrequencyMap,
    target: &ModeVec<f64>,
    guess: &ModeVec<f64>,
    tol: f64,
) -> Result<Inversion, KamError> {
    let defect = jacobian_defect(&map.jacobian(guess)?);
    if !(defect < 0.5) {
        return Err(KamError::JacobianDegenerate { defect });
    }
    let mut v = guess.clone();
    let mut residual = f64::INFINITY;
    for iterations in 0..=MAX_ITERATIONS {
        let r = map.eval(&v)?;
        residual = r.max_abs_diff(target);
        if residual <= tol {
            let range_exit = v.iter().any(|(_, x)| !(0.0..=1.0).contains(x));
            if range_exit {
                warn!("V* left the box [0, 1]: {:?}", v.as_slice());
            }
            return Ok(Inversion {
                vstar: v,
                iterations,
                residual,
                defect,
                range_exit,
            });
        }
        for ((x, ri), ti) in v.as_mut_slice().iter_mut().zip(r.as_slice()).zip(target.as_slice()) {
            *x -= ri - ti;
        }
    }
    Err(KamError::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual,
    })
}
