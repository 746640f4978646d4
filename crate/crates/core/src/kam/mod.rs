//! The iterative lemma: schedule, homological equation, Lie transform,
//! frequency shift, frequency-map inversion and the multi-step driver.

mod driver;
mod frequency;
mod homological;
mod schedule;

use thiserror::Error;

pub use driver::{
    kam_step, regrouped_remainder, run_kam, run_kam_with, IterationState, KamEngine, KamOptions, KamReport, KamStatus, StepOutput, StepRecord,
    TorusCheck,
};
pub use frequency::{
    invert_frequency_map, jacobian_defect, vtilde_from_lambda, AffineMap, ClosureMap, FrequencyMap, Inversion,
};
pub use homological::{
    divisor, effective_frequencies, frequency_shift, homological_residual, resonant_part, shift_bound,
    solve_homological, HomologicalSolution,
};
pub use schedule::{rho0, schedule_params, Schedule};

use crate::hamalg::HamError;
use crate::nlkg::ModelError;
use crate::resonance::IntegerVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KamError {
    #[error("small divisor {divisor:.3e} at ℓ = {ell} (floor {floor:.3e})")]
    SmallDivisor { ell: IntegerVector, divisor: f64, floor: f64 },
    #[error(transparent)]
    Ham(#[from] HamError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{quantity} = {value:.3e} exceeds its bound {bound:.3e} by more than 10x")]
    NormBlowup { quantity: String, value: f64, bound: f64 },
    #[error("frequency map Jacobian is not identity-dominant: ‖J − I‖ = {defect:.3e}")]
    JacobianDegenerate { defect: f64 },
    #[error("frequency-map inversion did not converge in {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("step {step}: {source}")]
    AtStep {
        step: u32,
        #[source]
        source: Box<KamError>,
    },
}

impl KamError {
    /// The error with any step annotation removed.
    pub fn root(&self) -> &KamError {
        match self {
            KamError::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}
