//! Run reports: JSON with the resolved config embedded, and a per-step CSV.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::kam::{KamReport, StepRecord};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    #[serde(flatten)]
    pub kam: KamReport,
}

impl RunReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

#[derive(Serialize)]
struct TraceRow {
    s: u32,
    rho: f64,
    eps: f64,
    norm_r0: f64,
    norm_r1: f64,
    norm_r2: f64,
    next_norm_r0: f64,
    next_norm_r1: f64,
    next_norm_r2: f64,
    shift_inf: f64,
    vtilde_delta_inf: f64,
    vstar_delta_inf: f64,
    phi_size: f64,
    min_divisor: f64,
    newton_iterations: usize,
    jacobian_defect: f64,
    terms: usize,
    brackets: usize,
    pre_ok: bool,
    post_ok: bool,
    frequency_ok: bool,
    phi_ok: bool,
}

impl From<&StepRecord> for TraceRow {
    fn from(t: &StepRecord) -> Self {
        TraceRow {
            s: t.s,
            rho: t.rho,
            eps: t.eps,
            norm_r0: t.norm_r0,
            norm_r1: t.norm_r1,
            norm_r2: t.norm_r2,
            next_norm_r0: t.next_norm_r0,
            next_norm_r1: t.next_norm_r1,
            next_norm_r2: t.next_norm_r2,
            shift_inf: t.shift_inf,
            vtilde_delta_inf: t.vtilde_delta_inf,
            vstar_delta_inf: t.vstar_delta_inf,
            phi_size: t.phi_size,
            min_divisor: t.min_divisor,
            newton_iterations: t.newton_iterations,
            jacobian_defect: t.jacobian_defect,
            terms: t.terms,
            brackets: t.brackets,
            pre_ok: t.pre_ok.iter().all(|&b| b),
            post_ok: t.post_ok.iter().all(|&b| b),
            frequency_ok: t.shift_bound_ok && t.vtilde_delta_ok && t.vstar_delta_ok,
            phi_ok: t.phi_ok,
        }
    }
}

/// One row per step.
pub fn write_trace_csv<W: Write>(trace: &[StepRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in trace {
        w.serialize(TraceRow::from(t))?;
    }
    w.flush()?;
    Ok(())
}
