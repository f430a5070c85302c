//! CSV renderings of analysis results. Undefined cells are left empty.

use std::fmt::Write as _;

use super::{AggregateCurves, ExpFitResult, PhaseStats};

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v}"))
}

/// `x,x_over_N,mean_score_frac,mean_poss_frac,mean_delta,active_tries`
pub fn curves_csv(curves: &AggregateCurves) -> String {
    let mut out = String::from("x,x_over_N,mean_score_frac,mean_poss_frac,mean_delta,active_tries\n");
    for p in &curves.points {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.x,
            p.x_over_n,
            opt(p.mean_score_frac),
            opt(p.mean_poss_frac),
            opt(p.mean_delta),
            p.active_tries
        )
        .unwrap();
    }
    out
}

/// `j,mean_ratio,sd_ratio,mean_length,sd_length`, with the whole climb as `j = all`.
pub fn phases_csv(stats: &PhaseStats) -> String {
    let mut out = String::from("j,mean_ratio,sd_ratio,mean_length,sd_length\n");
    writeln!(out, "all,,,{},{}", stats.climb_length.mean, stats.climb_length.sd).unwrap();
    for r in &stats.regions {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.j, r.ratio.mean, r.ratio.sd, r.length.mean, r.length.sd
        )
        .unwrap();
    }
    out
}

/// `model,A_or_D,B_or_E,C_or_F,r_squared,window_lo,window_hi`
pub fn fits_csv(fits: &[ExpFitResult]) -> String {
    let mut out = String::from("model,A_or_D,B_or_E,C_or_F,r_squared,window_lo,window_hi\n");
    for f in fits {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            f.model.name(),
            f.decay_constant,
            f.asymptote,
            f.amplitude,
            f.r_squared,
            f.window.lo,
            f.window.hi
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::synthetic::trace;
    use crate::analysis::{aggregate_curves, phase_stats};

    #[test]
    fn headers_and_empty_cells() {
        let t = trace(10, 40, 30, &[2, 1, 0]);
        let c = aggregate_curves(std::slice::from_ref(&t), 3).unwrap();
        let csv = curves_csv(&c);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,x_over_N,mean_score_frac,mean_poss_frac,mean_delta,active_tries");
        assert_eq!(lines[1], "0,0,0.75,0.1,2,1");
        assert_eq!(lines[4], "3,0.3,0.825,,,0");

        let p = phases_csv(&phase_stats(&[t]).unwrap());
        assert!(p.starts_with("j,mean_ratio,sd_ratio,mean_length,sd_length\nall,,,2,0\n1,"));
    }
}
