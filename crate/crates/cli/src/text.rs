//! Fixed-width text rendering of the result tables, laid out like the
//! published tables so the two can be eyeballed side by side. JSON carries
//! the full-precision values; these renderings round for readability.

use std::fmt::Write as _;

use hgopa::{FitResult, OverlapTable, Uncertain, MODE_LABELS};

use crate::commands::{GainOutput, SqueezeOutput};
use crate::report::ThresholdTable;

fn mode_header(width: usize) -> String {
    MODE_LABELS
        .iter()
        .map(|m| format!("{:>width$}", m.to_uppercase()))
        .collect::<Vec<_>>()
        .join("")
}

pub fn overlap_text(table: &OverlapTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "overlap table (signal order n, pump modes v_2i)");
    let _ = writeln!(out, "{:>3} {:>10}  gamma_ni (i = 0..n)", "n", "alpha_n");
    for n in 0..=table.max_order() {
        let gammas: Vec<String> = (0..=n)
            .map(|i| format!("{:.2}", table.gamma(n, i).unwrap_or(0.0)))
            .collect();
        let _ = writeln!(
            out,
            "{:>3} {:>10.6}  {}",
            n,
            table.alpha(n).unwrap_or(f64::NAN),
            gammas.join("  ")
        );
    }
    out
}

fn uncertain_cell(u: &Uncertain) -> String {
    if u.sigma > 0.0 {
        format!("{:.2} +- {:.2}", u.value, u.sigma)
    } else {
        format!("{:.2}", u.value)
    }
}

pub fn threshold_text(table: &ThresholdTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "relative oscillation threshold (TEM00 pump, normalized to TEM00)");
    let _ = writeln!(out, "{:<14}{}", "", mode_header(14));
    let theory: Vec<String> = table
        .theoretical
        .iter()
        .map(|v| format!("{:>14.2}", v))
        .collect();
    let _ = writeln!(out, "{:<14}{}", "theoretical", theory.join(""));
    if let Some(exp) = &table.experimental {
        let row: Vec<String> = exp
            .model_fit
            .iter()
            .map(|u| format!("{:>14}", uncertain_cell(u)))
            .collect();
        let _ = writeln!(out, "{:<14}{}", "model-fit", row.join(""));
        let row: Vec<String> = exp
            .slope_ratio
            .iter()
            .map(|u| format!("{:>14}", uncertain_cell(u)))
            .collect();
        let _ = writeln!(out, "{:<14}{}", "slope-ratio", row.join(""));
        let _ = writeln!(
            out,
            "(model-fit TEM00 threshold: {:.1} mW; slope-ratio uses the lowest points only)",
            exp.fitted_threshold_mw[0]
        );
    }
    let factors: Vec<String> = table
        .intensity_factors
        .iter()
        .zip(&table.overlap_factors)
        .map(|(a, g)| format!("{:.3}*{:.3}", a, g))
        .collect();
    let _ = writeln!(out, "factors (intensity * overlap): {}", factors.join(", "));
    out
}

pub fn squeeze_text(output: &SqueezeOutput) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "squeezing / anti-squeezing (dB relative to QNL)");
    let _ = writeln!(out, "{:<14}{}", "", mode_header(16));
    for (label, pick) in [
        ("a) corrected", 0usize),
        ("b) inferred", 1),
        ("c) calculated", 2),
    ] {
        let cells: Vec<String> = output
            .entries
            .iter()
            .map(|e| {
                let pair = match pick {
                    0 => &e.corrected_db,
                    1 => &e.inferred_db,
                    _ => &e.calculated_db,
                };
                format!("{:>7.1} {:>+7.1}", pair.squeezing_db, pair.anti_squeezing_db)
            })
            .collect();
        let _ = writeln!(out, "{:<14}{}", label, cells.join(" "));
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "detection efficiency");
    let _ = writeln!(out, "{:<16}{}", "", mode_header(14));
    let est: Vec<String> = output
        .table3
        .estimated
        .iter()
        .map(|u| format!("{:>14}", uncertain_cell(u)))
        .collect();
    let _ = writeln!(out, "{:<16}{}", "estimated", est.join(""));
    let cal: Vec<String> = output
        .table3
        .calculated
        .iter()
        .map(|v| format!("{:>14.2}", v))
        .collect();
    let _ = writeln!(out, "{:<16}{}", "calculated", cal.join(""));
    let backout: Vec<String> = output
        .table3
        .eta_cav_backout
        .iter()
        .map(|v| format!("{:>14.2}", v))
        .collect();
    let _ = writeln!(out, "{:<16}{}", "eta_cav backout", backout.join(""));
    out
}

pub fn gain_text(output: &GainOutput) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<8}{:>12}{:>12}{:>14}{:>16}",
        "mode", "t_opt (C)", "peak gain", "fwhm (C)", "deamp @ thresh"
    );
    for s in &output.summaries {
        let _ = writeln!(
            out,
            "{:<8}{:>12.1}{:>12.2}{:>14.3}{:>16.2}",
            s.mode,
            s.peak_temperature_c,
            s.peak_gain,
            s.gain_excess_fwhm_c,
            s.deamplification_at_threshold
        );
    }
    out
}

pub fn fit_text(result: &FitResult) -> String {
    format!(
        "method: {}\nthreshold: {:.3} mW\nuncertainty: {:.3} mW\nresidual norm: {:.3e}\n",
        result.method, result.threshold_mw, result.uncertainty_mw, result.residual_norm
    )
}
