//! Analysis of GSAT traces: hill-climbing phases, mean curves, and
//! exponential-decay regression.

mod curves;
mod exploratory;
mod fit;
mod phases;
mod segment;
pub mod csv;

use thiserror::Error;

pub use curves::{aggregate_curves, AggregateCurves, CurvePoint};
pub use exploratory::{
    plateau_flip_probability_check, pooled_ratio, success_cost_summary, CostRow, PlateauRow,
};
pub use fit::{
    fit_decay, fit_poss_model, fit_region_decay, fit_score_model, region_delta_profile, DecayFit, DecayModel, ExpFitResult,
    FitKind, FitWindow, MIN_FIT_POINTS,
};
pub use phases::{flip_size_histogram, phase_stats, Histogram, PhaseStats, RegionStats, Summary};
pub use segment::{segment_deltas, segment_phases, PhaseSegmentation, Region};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("no traces to analyse")]
    EmptyInput,
    #[error("region H_{0} is empty in every trace")]
    EmptyRegion(u32),
    #[error("traces mix problem parameters: {0}")]
    MixedParameters(String),
    #[error("need at least {needed} points to fit, have {found}")]
    InsufficientData { needed: usize, found: usize },
    #[error("fit window [{lo}, {hi}] lies outside the curve horizon {horizon}")]
    BadWindow { lo: usize, hi: usize, horizon: usize },
}

/// Problem parameters shared by every trace, or an error naming the mismatch.
pub(crate) fn common_shape(traces: &[crate::gsat::Trace]) -> Result<(usize, usize, usize), AnalysisError> {
    let first = traces.first().ok_or(AnalysisError::EmptyInput)?;
    let shape = (first.num_vars, first.num_clauses, first.k);
    for t in traces {
        let other = (t.num_vars, t.num_clauses, t.k);
        if other != shape {
            return Err(AnalysisError::MixedParameters(format!(
                "(N, L, k) = {shape:?} vs {other:?} (problem {} try {})",
                t.problem_id, t.try_id
            )));
        }
    }
    Ok(shape)
}

#[cfg(test)]
pub(crate) mod synthetic {
    //! Hand-built traces from a delta sequence.
    use crate::formula::Var;
    use crate::gsat::{FlipRecord, Trace};

    pub fn trace(num_vars: usize, num_clauses: usize, initial: u32, deltas: &[i32]) -> Trace {
        let mut score = initial as i64;
        let flips: Vec<FlipRecord> = deltas
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                score += i64::from(d);
                FlipRecord {
                    index: i as u32 + 1,
                    var: Var::from_index(i % num_vars),
                    delta: d,
                    score_after: score as u32,
                    poss_size: 1,
                    best_delta: d,
                }
            })
            .collect();
        let solved_at = (score as usize == num_clauses).then_some(flips.len() as u32);
        Trace {
            problem_id: 0,
            try_id: 0,
            seed: 0,
            num_vars,
            num_clauses,
            k: 3,
            initial_score: initial,
            flip_count: flips.len() as u32,
            flips,
            solved_at,
        }
    }
}
