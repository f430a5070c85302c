//! Report-only checks of the plateau flip-probability relation and the cost
//! of successful tries. Nothing here passes or fails.

use std::collections::BTreeMap;

use super::fit::ExpFitResult;
use super::{common_shape, AnalysisError};
use crate::gsat::Trace;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PlateauRow {
    pub x: usize,
    pub x_over_n: f64,
    pub active_tries: usize,
    /// Fraction of active tries whose flip from state `x` was +1.
    pub observed: f64,
    /// `(L − S̄(x)) / (A N)` with `S̄` the mean score of the active tries.
    pub predicted: f64,
    /// `observed / predicted`; `None` when nothing was predicted.
    pub ratio: Option<f64>,
}

/// Observed +1 flip frequency against `(L − S̄(x)) / (A N)` for every
/// `x >= window_start` (default `0.4 N`) with at least one active try.
pub fn plateau_flip_probability_check(
    traces: &[Trace],
    score_fit: &ExpFitResult,
    window_start: Option<usize>,
) -> Result<Vec<PlateauRow>, AnalysisError> {
    let (num_vars, num_clauses, _) = common_shape(traces)?;
    let n = num_vars as f64;
    let l = num_clauses as f64;
    let start = window_start.unwrap_or((0.4 * n).round() as usize);
    let end = traces.iter().map(|t| t.flips.len()).max().unwrap_or(0);
    let scale = score_fit.decay_constant * n;

    let mut rows = Vec::new();
    for x in start..end {
        let (mut active, mut ups, mut score) = (0usize, 0usize, 0u64);
        for t in traces.iter().filter(|t| x < t.flips.len()) {
            active += 1;
            score += u64::from(t.score_at(x));
            if t.flips[x].delta == 1 {
                ups += 1;
            }
        }
        if active == 0 {
            continue;
        }
        let observed = ups as f64 / active as f64;
        let predicted = (l - score as f64 / active as f64) / scale;
        rows.push(PlateauRow {
            x,
            x_over_n: x as f64 / n,
            active_tries: active,
            observed,
            predicted,
            ratio: (predicted > 0.0).then(|| observed / predicted),
        });
    }
    Ok(rows)
}

/// Ratio of total observed to total predicted +1 flips over a table.
pub fn pooled_ratio(rows: &[PlateauRow]) -> Option<f64> {
    let obs: f64 = rows.iter().map(|r| r.observed * r.active_tries as f64).sum();
    let pred: f64 = rows.iter().map(|r| r.predicted * r.active_tries as f64).sum();
    (pred > 0.0).then(|| obs / pred)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CostRow {
    pub num_vars: usize,
    pub tries: usize,
    pub successes: usize,
    /// Mean flips to solution over successful tries.
    pub mean_flips: Option<f64>,
    /// `mean_flips / (N ln N)`.
    pub per_n_ln_n: Option<f64>,
}

/// Mean flips on successful tries, grouped by N.
pub fn success_cost_summary(traces: &[Trace]) -> Vec<CostRow> {
    let mut groups: BTreeMap<usize, (usize, Vec<u32>)> = BTreeMap::new();
    for t in traces {
        let entry = groups.entry(t.num_vars).or_default();
        entry.0 += 1;
        if let Some(s) = t.solved_at {
            entry.1.push(s);
        }
    }
    groups
        .into_iter()
        .map(|(num_vars, (tries, solved))| {
            let mean_flips =
                (!solved.is_empty()).then(|| solved.iter().map(|&s| f64::from(s)).sum::<f64>() / solved.len() as f64);
            let n = num_vars as f64;
            CostRow {
                num_vars,
                tries,
                successes: solved.len(),
                mean_flips,
                per_n_ln_n: mean_flips.filter(|_| num_vars > 1).map(|m| m / (n * n.ln())),
            }
        })
        .collect()
}
