use super::{common_shape, AnalysisError};
use crate::gsat::Trace;

/// Mean behaviour at flip count `x`.
///
/// The score is the score after `x` flips. Poss-flips and delta describe the
/// flip taken from that state (flip `x + 1`), so they only average over tries
/// that are still running at `x`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub x: usize,
    pub x_over_n: f64,
    /// Mean score / L. Solved tries count as L from `solved_at` on.
    pub mean_score_frac: Option<f64>,
    /// Tries contributing to the score mean.
    pub score_tries: usize,
    /// Mean poss-flips / N over active tries.
    pub mean_poss_frac: Option<f64>,
    pub mean_delta: Option<f64>,
    /// Tries that execute a flip from state `x`.
    pub active_tries: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateCurves {
    pub num_vars: usize,
    pub num_clauses: usize,
    pub k: usize,
    pub tries: usize,
    /// One point per `x` in `0..=horizon`.
    pub points: Vec<CurvePoint>,
}

impl AggregateCurves {
    pub fn horizon(&self) -> usize {
        self.points.len() - 1
    }

    /// Mean score fraction at `x`, if defined.
    pub fn score_frac(&self, x: usize) -> Option<f64> {
        self.points.get(x).and_then(|p| p.mean_score_frac)
    }
}

pub fn aggregate_curves(traces: &[Trace], horizon: usize) -> Result<AggregateCurves, AnalysisError> {
    let (num_vars, num_clauses, k) = common_shape(traces)?;
    let size = horizon + 1;
    let mut score_sum = vec![0u64; size];
    let mut score_n = vec![0usize; size];
    let mut poss_sum = vec![0u64; size];
    let mut delta_sum = vec![0i64; size];
    let mut active = vec![0usize; size];

    for t in traces {
        let recorded = t.flips.len();
        for x in 0..size {
            if x <= recorded {
                score_sum[x] += u64::from(t.score_at(x));
                score_n[x] += 1;
            } else if t.is_solved() {
                score_sum[x] += num_clauses as u64;
                score_n[x] += 1;
            } else {
                // ran out of flips before the horizon
                break;
            }
            if x < recorded {
                let r = &t.flips[x];
                poss_sum[x] += u64::from(r.poss_size);
                delta_sum[x] += i64::from(r.delta);
                active[x] += 1;
            }
        }
    }

    let l = num_clauses as f64;
    let n = num_vars as f64;
    let points = (0..size)
        .map(|x| {
            let a = active[x];
            CurvePoint {
                x,
                x_over_n: x as f64 / n,
                mean_score_frac: (score_n[x] > 0).then(|| {
                    if num_clauses == 0 {
                        1.0
                    } else {
                        score_sum[x] as f64 / score_n[x] as f64 / l
                    }
                }),
                score_tries: score_n[x],
                mean_poss_frac: (a > 0).then(|| poss_sum[x] as f64 / a as f64 / n),
                mean_delta: (a > 0).then(|| delta_sum[x] as f64 / a as f64),
                active_tries: a,
            }
        })
        .collect();

    Ok(AggregateCurves {
        num_vars,
        num_clauses,
        k,
        tries: traces.len(),
        points,
    })
}
