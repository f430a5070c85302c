//! Exponential-decay regression with one nonlinear parameter.
//!
//! Every model here has the shape `y(t) = a + b * exp(-t / tau)` with
//! `t = x / N`. For a fixed `tau` the best `a` and `b` solve a weighted linear
//! least-squares problem in closed form, so the fit reduces to minimising
//! the profiled SSE over `tau` alone: a 400-point logarithmic scan over
//! `[span / 1000, span * 1000]` followed by golden-section refinement in
//! `ln tau` around the best scan point.

use nalgebra::{DMatrix, DVector};

use super::curves::AggregateCurves;
use super::segment::segment_phases;
use super::{common_shape, AnalysisError};
use crate::gsat::Trace;

pub const MIN_FIT_POINTS: usize = 10;
const SCAN_POINTS: usize = 400;
const SCAN_DECADES: f64 = 3.0;

/// Which curve a fit describes.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DecayModel {
    /// `S(x) = N (B − C e^{−x/(A N)})`
    Score,
    /// `P(x) = N (E + F e^{−x/(D N)})`
    Poss,
    /// mean delta in `H_j` at `x` flips after its start `= j + E_j e^{−x/(D_j N)}`
    Region(u32),
}

impl DecayModel {
    pub fn name(&self) -> String {
        match self {
            DecayModel::Score => "score".into(),
            DecayModel::Poss => "poss".into(),
            DecayModel::Region(j) => format!("region_h{j}"),
        }
    }
}

/// Whether the additive term is fitted or held fixed.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum FitKind {
    FreeAsymptote,
    FixedOffset(f64),
}

/// Inclusive range of flip counts.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct FitWindow {
    pub lo: usize,
    pub hi: usize,
}

/// Raw fit of `a + b e^{−t/tau}`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DecayFit {
    pub tau: f64,
    pub offset: f64,
    pub coefficient: f64,
    pub sse: f64,
    pub r_squared: f64,
    /// Standard errors of `(tau, offset, coefficient)`; offset is 0 when fixed.
    pub std_errors: [f64; 3],
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpFitResult {
    pub model: DecayModel,
    /// A, D or D_j, in flips per variable.
    pub decay_constant: f64,
    /// B or E (per variable), or the fixed offset j.
    pub asymptote: f64,
    /// C, F or E_j.
    pub amplitude: f64,
    pub r_squared: f64,
    pub sse: f64,
    pub window: FitWindow,
    pub points: usize,
    /// Standard errors of (decay_constant, asymptote, amplitude).
    pub std_errors: [f64; 3],
    /// The exponential term vanished; the decay constant carries no information.
    pub degenerate: bool,
}

impl ExpFitResult {
    /// Model value in per-variable units (score/N, poss/N) or raw delta for regions.
    pub fn predict(&self, t: f64) -> f64 {
        let e = (-t / self.decay_constant).exp();
        match self.model {
            DecayModel::Score => self.asymptote - self.amplitude * e,
            DecayModel::Poss | DecayModel::Region(_) => self.asymptote + self.amplitude * e,
        }
    }
}

struct Data<'a> {
    t: &'a [f64],
    y: &'a [f64],
    w: &'a [f64],
    t0: f64,
    kind: FitKind,
}

impl Data<'_> {
    /// Best linear parameters for `tau` in the shifted basis `exp(-(t - t0)/tau)`,
    /// returned as (offset, shifted coefficient, sse).
    fn profile(&self, tau: f64) -> (f64, f64, f64) {
        let phi = |t: f64| (-(t - self.t0) / tau).exp();
        let (offset, coef) = match self.kind {
            FitKind::FixedOffset(a) => {
                let (mut num, mut den) = (0.0, 0.0);
                for i in 0..self.t.len() {
                    let p = phi(self.t[i]);
                    num += self.w[i] * p * (self.y[i] - a);
                    den += self.w[i] * p * p;
                }
                (a, if den > 0.0 { num / den } else { 0.0 })
            }
            FitKind::FreeAsymptote => {
                let (mut sw, mut sp, mut sy) = (0.0, 0.0, 0.0);
                for i in 0..self.t.len() {
                    sw += self.w[i];
                    sp += self.w[i] * phi(self.t[i]);
                    sy += self.w[i] * self.y[i];
                }
                let (pm, ym) = (sp / sw, sy / sw);
                let (mut spp, mut spy) = (0.0, 0.0);
                for i in 0..self.t.len() {
                    let dp = phi(self.t[i]) - pm;
                    spp += self.w[i] * dp * dp;
                    spy += self.w[i] * dp * (self.y[i] - ym);
                }
                let c = if spp > 1e-300 { spy / spp } else { 0.0 };
                (ym - c * pm, c)
            }
        };
        let sse = (0..self.t.len())
            .map(|i| {
                let r = self.y[i] - offset - coef * phi(self.t[i]);
                self.w[i] * r * r
            })
            .sum();
        (offset, coef, sse)
    }
}

/// Weighted least-squares fit of `y = a + b e^{−t/tau}`.
pub fn fit_decay(t: &[f64], y: &[f64], w: &[f64], kind: FitKind) -> Result<DecayFit, AnalysisError> {
    assert!(t.len() == y.len() && t.len() == w.len());
    if t.len() < MIN_FIT_POINTS {
        return Err(AnalysisError::InsufficientData {
            needed: MIN_FIT_POINTS,
            found: t.len(),
        });
    }
    let t0 = t.iter().copied().fold(f64::INFINITY, f64::min);
    let t1 = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = t1 - t0;
    if span.is_nan() || span <= 0.0 {
        return Err(AnalysisError::InsufficientData {
            needed: MIN_FIT_POINTS,
            found: 1,
        });
    }
    let data = Data { t, y, w, t0, kind };

    let lo = (span).ln() - SCAN_DECADES * std::f64::consts::LN_10;
    let hi = (span).ln() + SCAN_DECADES * std::f64::consts::LN_10;
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let sse_at = |ln_tau: f64| data.profile(ln_tau.exp()).2;
    let (best_i, _) = (0..SCAN_POINTS)
        .map(|i| (i, sse_at(lo + step * i as f64)))
        .fold((0, f64::INFINITY), |acc, (i, s)| if s < acc.1 { (i, s) } else { acc });

    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = lo + step * (best_i + 1).min(SCAN_POINTS - 1) as f64;
    let best_scan = lo + step * best_i as f64;
    let ln_tau = golden_min(&sse_at, &mut a, &mut b);
    let ln_tau = if sse_at(ln_tau) <= sse_at(best_scan) { ln_tau } else { best_scan };

    let tau = ln_tau.exp();
    let (offset, shifted, sse) = data.profile(tau);
    let coefficient = shifted * (t0 / tau).exp();

    let wsum: f64 = w.iter().sum();
    let ymean = w.iter().zip(y).map(|(w, y)| w * y).sum::<f64>() / wsum;
    let sst: f64 = w.iter().zip(y).map(|(w, y)| w * (y - ymean).powi(2)).sum();
    let r_squared = if sst > 0.0 {
        (1.0 - sse / sst).min(1.0)
    } else if sse <= 1e-24 {
        1.0
    } else {
        0.0
    };
    let degenerate = !coefficient.is_finite() || shifted.abs() <= 1e-9 * ymean.abs().max(1.0);
    let std_errors = standard_errors(&data, tau, offset, coefficient, sse);

    Ok(DecayFit {
        tau,
        offset,
        coefficient,
        sse,
        r_squared,
        std_errors,
        degenerate,
    })
}

fn golden_min(f: &impl Fn(f64) -> f64, a: &mut f64, b: &mut f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = *b - INV_PHI * (*b - *a);
    let mut d = *a + INV_PHI * (*b - *a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (*b - *a).abs() < 1e-13 {
            break;
        }
        if fc < fd {
            *b = d;
            d = c;
            fd = fc;
            c = *b - INV_PHI * (*b - *a);
            fc = f(c);
        } else {
            *a = c;
            c = d;
            fc = fd;
            d = *a + INV_PHI * (*b - *a);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}

/// Asymptotic standard errors from the weighted Jacobian at the optimum.
fn standard_errors(data: &Data<'_>, tau: f64, _offset: f64, coefficient: f64, sse: f64) -> [f64; 3] {
    let free = matches!(data.kind, FitKind::FreeAsymptote);
    let p = if free { 3 } else { 2 };
    let n = data.t.len();
    if n <= p || !coefficient.is_finite() {
        return [f64::NAN; 3];
    }
    let mut jac = DMatrix::<f64>::zeros(n, p);
    for i in 0..n {
        let t = data.t[i];
        let e = (-t / tau).exp();
        let sw = data.w[i].sqrt();
        jac[(i, 0)] = sw * coefficient * e * t / (tau * tau);
        jac[(i, 1)] = sw * e;
        if free {
            jac[(i, 2)] = sw;
        }
    }
    let sigma2 = sse / (n - p) as f64;
    let normal = jac.transpose() * &jac;
    let Some(inv) = normal.try_inverse() else {
        return [f64::NAN; 3];
    };
    let se = DVector::from_iterator(p, (0..p).map(|i| (sigma2 * inv[(i, i)]).max(0.0).sqrt()));
    [se[0], if free { se[2] } else { 0.0 }, se[1]]
}

fn score_window(curves: &AggregateCurves, window: Option<FitWindow>) -> Result<FitWindow, AnalysisError> {
    let horizon = curves.horizon();
    let w = window.unwrap_or(FitWindow {
        lo: (0.4 * curves.num_vars as f64).round() as usize,
        hi: horizon,
    });
    if w.lo > w.hi || w.hi > horizon {
        return Err(AnalysisError::BadWindow {
            lo: w.lo,
            hi: w.hi,
            horizon,
        });
    }
    Ok(w)
}

/// Fit `S(x) = N (B − C e^{−x/(A N)})` to the mean score curve. The default
/// window runs from `0.4 N` flips to the horizon.
pub fn fit_score_model(curves: &AggregateCurves, window: Option<FitWindow>) -> Result<ExpFitResult, AnalysisError> {
    let w = score_window(curves, window)?;
    let n = curves.num_vars as f64;
    let l = curves.num_clauses as f64;
    let (t, y): (Vec<f64>, Vec<f64>) = curves.points[w.lo..=w.hi]
        .iter()
        .filter_map(|p| p.mean_score_frac.map(|s| (p.x as f64 / n, s * l / n)))
        .unzip();
    let fit = fit_decay(&t, &y, &vec![1.0; t.len()], FitKind::FreeAsymptote)?;
    Ok(ExpFitResult {
        model: DecayModel::Score,
        decay_constant: fit.tau,
        asymptote: fit.offset,
        amplitude: -fit.coefficient,
        r_squared: fit.r_squared,
        sse: fit.sse,
        window: w,
        points: t.len(),
        std_errors: fit.std_errors,
        degenerate: fit.degenerate,
    })
}

/// Fit `P(x) = N (E + F e^{−x/(D N)})` to the mean poss-flips curve.
pub fn fit_poss_model(curves: &AggregateCurves, window: Option<FitWindow>) -> Result<ExpFitResult, AnalysisError> {
    let w = score_window(curves, window)?;
    let n = curves.num_vars as f64;
    let (t, y): (Vec<f64>, Vec<f64>) = curves.points[w.lo..=w.hi]
        .iter()
        .filter_map(|p| p.mean_poss_frac.map(|f| (p.x as f64 / n, f)))
        .unzip();
    let fit = fit_decay(&t, &y, &vec![1.0; t.len()], FitKind::FreeAsymptote)?;
    Ok(ExpFitResult {
        model: DecayModel::Poss,
        decay_constant: fit.tau,
        asymptote: fit.offset,
        amplitude: fit.coefficient,
        r_squared: fit.r_squared,
        sse: fit.sse,
        window: w,
        points: t.len(),
        std_errors: fit.std_errors,
        degenerate: fit.degenerate,
    })
}

/// Pooled mean flip size in `H_j` against flips since the region began:
/// `(offset x, mean delta, tries in region at x)` for `x >= 1`.
///
/// Offset 0 is the flip that opens the region and is exactly `j` by
/// definition, so it is left out.
pub fn region_delta_profile(traces: &[Trace], j: u32) -> Vec<(usize, f64, usize)> {
    let mut sum: Vec<i64> = Vec::new();
    let mut count: Vec<usize> = Vec::new();
    for t in traces {
        if let Some(r) = segment_phases(t).region(j) {
            if sum.len() < r.len() {
                sum.resize(r.len(), 0);
                count.resize(r.len(), 0);
            }
            for (i, rec) in t.flips[r.start..r.end].iter().enumerate() {
                sum[i] += i64::from(rec.delta);
                count[i] += 1;
            }
        }
    }
    sum.into_iter()
        .zip(count)
        .enumerate()
        .skip(1)
        .map(|(x, (s, c))| (x, s as f64 / c as f64, c))
        .collect()
}

/// Fit `j + E_j e^{−x/(D_j N)}` to the pooled in-region mean flip size,
/// with `x` counted from the start of `H_j` in each try and each offset
/// weighted by the number of tries still inside `H_j`.
pub fn fit_region_decay(traces: &[Trace], j: u32) -> Result<ExpFitResult, AnalysisError> {
    let (num_vars, _, _) = common_shape(traces)?;
    let profile = region_delta_profile(traces, j);
    if profile.len() < MIN_FIT_POINTS {
        return Err(AnalysisError::InsufficientData {
            needed: MIN_FIT_POINTS,
            found: profile.len(),
        });
    }
    let n = num_vars as f64;
    let t: Vec<f64> = profile.iter().map(|p| p.0 as f64 / n).collect();
    let y: Vec<f64> = profile.iter().map(|p| p.1).collect();
    let w: Vec<f64> = profile.iter().map(|p| p.2 as f64).collect();
    let fit = fit_decay(&t, &y, &w, FitKind::FixedOffset(f64::from(j)))?;
    Ok(ExpFitResult {
        model: DecayModel::Region(j),
        decay_constant: fit.tau,
        asymptote: f64::from(j),
        amplitude: fit.coefficient,
        r_squared: fit.r_squared,
        sse: fit.sse,
        window: FitWindow {
            lo: profile[0].0,
            hi: profile[profile.len() - 1].0,
        },
        points: profile.len(),
        std_errors: fit.std_errors,
        degenerate: fit.degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::curves::CurvePoint;
    use crate::analysis::synthetic::trace;
    use crate::rng::Stream;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn curves_from(n: usize, l: usize, horizon: usize, score: impl Fn(f64) -> f64, poss: impl Fn(f64) -> f64) -> AggregateCurves {
        let points = (0..=horizon)
            .map(|x| {
                let t = x as f64 / n as f64;
                CurvePoint {
                    x,
                    x_over_n: t,
                    mean_score_frac: Some(score(t) * n as f64 / l as f64),
                    score_tries: 1,
                    mean_poss_frac: Some(poss(t)),
                    mean_delta: Some(0.0),
                    active_tries: 1,
                }
            })
            .collect();
        AggregateCurves {
            num_vars: n,
            num_clauses: l,
            k: 3,
            tries: 1,
            points,
        }
    }

    /// Per-tau linear least squares, solved from the 2x2 normal equations.
    fn oracle_sse(t: &[f64], y: &[f64], tau: f64) -> f64 {
        let e: Vec<f64> = t.iter().map(|t| (-t / tau).exp()).collect();
        let n = t.len() as f64;
        let (se, see) = (e.iter().sum::<f64>(), e.iter().map(|v| v * v).sum::<f64>());
        let (sy, sey) = (y.iter().sum::<f64>(), e.iter().zip(y).map(|(a, b)| a * b).sum::<f64>());
        let det = n * see - se * se;
        let a = (see * sy - se * sey) / det;
        let b = (n * sey - se * sy) / det;
        t.iter()
            .zip(y)
            .zip(&e)
            .map(|((_, y), e)| (y - a - b * e).powi(2))
            .sum()
    }

    #[test]
    fn exact_score_model_recovery() {
        let (a, b, c) = (0.5, 4.3, 0.08);
        let curves = curves_from(500, 2150, 1250, |t| b - c * (-t / a).exp(), |_| 0.1);
        let fit = fit_score_model(&curves, None).unwrap();
        assert_eq!(fit.window, FitWindow { lo: 200, hi: 1250 });
        assert!(rel(fit.decay_constant, a) < 1e-4, "{fit:?}");
        assert!(rel(fit.asymptote, b) < 1e-4);
        assert!(rel(fit.amplitude, c) < 1e-4);
        assert!(fit.r_squared >= 1.0 - 1e-12, "{}", fit.r_squared);
        assert!(!fit.degenerate);
    }

    #[test]
    fn exact_poss_model_recovery() {
        let (d, e, f) = (0.838, 0.100, 0.0348);
        let curves = curves_from(500, 2150, 1250, |_| 4.2, |t| e + f * (-t / d).exp());
        let fit = fit_poss_model(&curves, None).unwrap();
        assert!(rel(fit.decay_constant, d) < 1e-4, "{fit:?}");
        assert!(rel(fit.asymptote, e) < 1e-4);
        assert!(rel(fit.amplitude, f) < 1e-4);
        assert!(fit.r_squared >= 1.0 - 1e-12);
    }

    #[test]
    fn beats_a_dense_grid_over_the_decay_constant() {
        let mut rng = Stream::new(5);
        let t: Vec<f64> = (200..=1250).map(|x| x as f64 / 500.0).collect();
        let y: Vec<f64> = t
            .iter()
            .map(|t| 4.27 - 0.0772 * (-t / 0.566).exp() + 0.002 * (rng.unit_f64() - 0.5))
            .collect();
        let fit = fit_decay(&t, &y, &vec![1.0; t.len()], FitKind::FreeAsymptote).unwrap();
        // two decades either side of the truth, 200 log-spaced points
        let grid_min = (0..200)
            .map(|i| 0.0566 * 10f64.powf(2.0 * i as f64 / 199.0))
            .map(|tau| oracle_sse(&t, &y, tau))
            .fold(f64::INFINITY, f64::min);
        assert!(fit.sse <= grid_min * (1.0 + 1e-12), "{} vs {}", fit.sse, grid_min);
        assert!(fit.r_squared >= 0.0 && fit.r_squared <= 1.0);
    }

    #[test]
    fn short_window_is_rejected() {
        let curves = curves_from(500, 2150, 1250, |_| 4.0, |_| 0.1);
        assert_eq!(
            fit_score_model(&curves, Some(FitWindow { lo: 10, hi: 18 })),
            Err(AnalysisError::InsufficientData { needed: 10, found: 9 })
        );
        assert!(matches!(
            fit_score_model(&curves, Some(FitWindow { lo: 10, hi: 2000 })),
            Err(AnalysisError::BadWindow { .. })
        ));
    }

    #[test]
    fn exact_region_model_recovery() {
        let (d, e) = (0.045, 0.25);
        let t: Vec<f64> = (0..60).map(|x| x as f64 / 500.0).collect();
        let y: Vec<f64> = t.iter().map(|t| 1.0 + e * (-t / d).exp()).collect();
        let w: Vec<f64> = (0..60).map(|x| 1000.0 - 10.0 * x as f64).collect();
        let fit = fit_decay(&t, &y, &w, FitKind::FixedOffset(1.0)).unwrap();
        assert!(rel(fit.tau, d) < 1e-4);
        assert!(rel(fit.coefficient, e) < 1e-4);
        assert!(fit.r_squared >= 1.0 - 1e-12);
    }

    #[test]
    fn constant_region_is_degenerate() {
        let traces: Vec<Trace> = (0..5)
            .map(|_| {
                let mut d = vec![2; 21];
                d.push(0);
                trace(100, 500, 300, &d)
            })
            .collect();
        let fit = fit_region_decay(&traces, 2).unwrap();
        assert!(fit.amplitude.abs() < 1e-12);
        assert!(fit.degenerate);
        assert_eq!(fit.r_squared, 1.0);
        assert!(fit.decay_constant > 0.0);
    }

    #[test]
    fn region_fit_needs_enough_offsets() {
        let traces = vec![trace(100, 500, 300, &[1, 1, 1, 0])];
        assert!(matches!(
            fit_region_decay(&traces, 1),
            Err(AnalysisError::InsufficientData { .. })
        ));
    }

    #[test]
    fn stochastic_region_recovery_within_standard_error() {
        // Flips of size j+1 with probability E e^{-x/(D N)} at offset x, else size j.
        let (n, d, e, j) = (500usize, 0.045, 0.25, 1i32);
        let mut rng = Stream::new(77);
        let traces: Vec<Trace> = (0..2000)
            .map(|_| {
                let len = 40 + rng.below(30) as usize;
                let mut deltas = vec![j];
                for x in 1..len {
                    let p = e * (-(x as f64) / (d * n as f64)).exp();
                    deltas.push(if rng.unit_f64() < p { j + 1 } else { j });
                }
                deltas.push(0);
                trace(n, 2150, 1800, &deltas)
            })
            .collect();
        let fit = fit_region_decay(&traces, 1).unwrap();
        let [se_d, _, se_e] = fit.std_errors;
        assert!(se_d.is_finite() && se_e.is_finite());
        assert!((fit.decay_constant - d).abs() < 3.0 * se_d, "D = {} ± {se_d}", fit.decay_constant);
        assert!((fit.amplitude - e).abs() < 3.0 * se_e, "E = {} ± {se_e}", fit.amplitude);
    }
}
