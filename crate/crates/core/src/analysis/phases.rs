use std::collections::BTreeMap;

use super::segment::{segment_phases, PhaseSegmentation};
use super::AnalysisError;
use crate::gsat::Trace;

/// Mean and sample standard deviation (n − 1 denominator; 0 for n < 2).
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                mean: f64::NAN,
                sd: f64::NAN,
                count,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let sd = if count < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        };
        Self { mean, sd, count }
    }
}

/// Fraction of flips of each size, pooled over tries.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub j: u32,
    pub total_flips: usize,
    pub fractions: BTreeMap<i32, f64>,
}

impl Histogram {
    fn from_counts(j: u32, counts: BTreeMap<i32, usize>) -> Self {
        let total_flips: usize = counts.values().sum();
        let fractions = counts
            .into_iter()
            .map(|(d, c)| (d, c as f64 / total_flips as f64))
            .collect();
        Self {
            j,
            total_flips,
            fractions,
        }
    }

    pub fn fraction(&self, delta: i32) -> f64 {
        self.fractions.get(&delta).copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionStats {
    pub j: u32,
    /// `len(H_j) / (flips up to the end of H_j)`, over tries where `H_j` is nonempty.
    pub ratio: Summary,
    pub length: Summary,
    pub histogram: Histogram,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseStats {
    pub tries: usize,
    /// Indexed by `j - 1`, for every `j` nonempty in at least one try.
    pub regions: Vec<RegionStats>,
    /// Flips up to the start of `H_0`.
    pub climb_length: Summary,
    /// Per-try `(score at climb end − initial score) / climb length`, for tries that climbed.
    pub gradient: Summary,
}

impl PhaseStats {
    pub fn region(&self, j: u32) -> Option<&RegionStats> {
        self.regions.iter().find(|r| r.j == j)
    }
}

pub fn phase_stats(traces: &[Trace]) -> Result<PhaseStats, AnalysisError> {
    if traces.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let segs: Vec<PhaseSegmentation> = traces.iter().map(segment_phases).collect();
    let max_j = segs.iter().flat_map(|s| s.regions.iter().map(|r| r.j)).max().unwrap_or(0);

    let mut regions = Vec::new();
    for j in 1..=max_j {
        let mut ratios = Vec::new();
        let mut lengths = Vec::new();
        for s in &segs {
            if let Some(r) = s.region(j) {
                ratios.push(r.len() as f64 / r.end as f64);
                lengths.push(r.len() as f64);
            }
        }
        if ratios.is_empty() {
            continue;
        }
        regions.push(RegionStats {
            j,
            ratio: Summary::of(&ratios),
            length: Summary::of(&lengths),
            histogram: histogram_from(traces, &segs, j).expect("region is nonempty somewhere"),
        });
    }

    let climb: Vec<f64> = segs.iter().map(|s| s.climb_end as f64).collect();
    let gradients: Vec<f64> = traces
        .iter()
        .zip(&segs)
        .filter(|(_, s)| s.climb_end > 0)
        .map(|(t, s)| {
            let gained = f64::from(t.score_at(s.climb_end)) - f64::from(t.initial_score);
            gained / s.climb_end as f64
        })
        .collect();

    Ok(PhaseStats {
        tries: traces.len(),
        regions,
        climb_length: Summary::of(&climb),
        gradient: Summary::of(&gradients),
    })
}

fn histogram_from(traces: &[Trace], segs: &[PhaseSegmentation], j: u32) -> Option<Histogram> {
    let mut counts = BTreeMap::new();
    for (t, s) in traces.iter().zip(segs) {
        if let Some(r) = s.region(j) {
            for rec in &t.flips[r.start..r.end] {
                *counts.entry(rec.delta).or_insert(0usize) += 1;
            }
        }
    }
    (!counts.is_empty()).then(|| Histogram::from_counts(j, counts))
}

/// Distribution of flip sizes inside `H_j`, pooled over tries where it is nonempty.
pub fn flip_size_histogram(traces: &[Trace], j: u32) -> Result<Histogram, AnalysisError> {
    let segs: Vec<PhaseSegmentation> = traces.iter().map(segment_phases).collect();
    histogram_from(traces, &segs, j).ok_or(AnalysisError::EmptyRegion(j))
}
