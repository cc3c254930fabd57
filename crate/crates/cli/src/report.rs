//! Report bundle: every table and figure series the toolkit reproduces,
//! in one deterministic JSON document.

use serde::{Deserialize, Serialize};

use hgopa::detection::LossBudgetEntry;
use hgopa::{ExperimentConfig, OverlapTable, Uncertain};

/// Relative-threshold table (theory always, experiment when gain curves
/// were supplied).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub modes: Vec<String>,
    /// Exact theoretical ratios for a fundamental-mode pump.
    pub theoretical: Vec<f64>,
    /// Intermediate factors behind the theory column.
    pub intensity_factors: Vec<f64>,
    pub overlap_factors: Vec<f64>,
    pub experimental: Option<ExperimentalThresholds>,
}

/// Fitted relative thresholds, one entry per mode, by both estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentalThresholds {
    pub model_fit: Vec<Uncertain>,
    pub slope_ratio: Vec<Uncertain>,
    /// Absolute fitted thresholds (mW) from the model fit.
    pub fitted_threshold_mw: Vec<f64>,
}

/// Estimated vs calculated total efficiency plus the cavity back-out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyTable {
    pub modes: Vec<String>,
    pub estimated: Vec<Uncertain>,
    pub calculated: Vec<f64>,
    pub eta_cav_backout: Vec<f64>,
}

/// A sampled (x, y) series with named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    /// Renders the series as CSV, full float precision.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Per-mode gain summary for the text output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSummary {
    pub mode: String,
    pub peak_temperature_c: f64,
    pub peak_gain: f64,
    pub gain_excess_fwhm_c: f64,
    pub deamplification_at_threshold: f64,
}

/// Everything `report` emits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub config: ExperimentConfig,
    pub overlap: OverlapTable,
    pub table1: ThresholdTable,
    pub table2: Vec<LossBudgetEntry>,
    pub table3: EfficiencyTable,
    pub gain_summaries: Vec<GainSummary>,
    pub gain_vs_temperature: Vec<Series>,
    pub gain_vs_pump: Vec<Series>,
    pub phase_scans: Vec<Series>,
    pub provenance: Provenance,
}

/// Names the formulas and configuration values each table came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub equations: Vec<String>,
    pub config_values: Vec<String>,
}

impl Provenance {
    pub fn standard(config: &ExperimentConfig) -> Self {
        Provenance {
            equations: vec![
                "gamma_ni = integral(u_n^2/alpha_n * v_2i), alpha_n^2 = integral(u_n^4)"
                    .to_string(),
                "relative threshold = (alpha_0/alpha_n)^2 / kappa_n(pump)^2".to_string(),
                "classical gain G = 1/(1 -+ sqrt(P/Pthr))^2".to_string(),
                "phase-match envelope s(t) = sinc^2(b (t - t_opt)), b from gain-excess fwhm"
                    .to_string(),
                "V+- = 1 +- eta_esc * 4 sqrt(p) / (1 -+ sqrt(p))^2, p = P/Pthr".to_string(),
                "inferred source: V -> 1 + (V - 1)/eta, eta = eta_prop eta_det eta_hd".to_string(),
                "total efficiency from spectrum: eta = (Vs + Va - 1 - Vs Va)/(Vs + Va - 2)"
                    .to_string(),
                "phase scan: V(theta) = V- cos^2(theta) + V+ sin^2(theta)".to_string(),
            ],
            config_values: vec![
                {
                    let derived = hgopa::escape_efficiency(&config.opa_params(0))
                        .map(|v| format!("{v:.4}"))
                        .unwrap_or_else(|_| "undefined".to_string());
                    format!(
                        "eta_cav = {} (derived escape efficiency T/(T+L) = {derived})",
                        config.eta_cav
                    )
                },
                format!("threshold_mw = {:?}", config.threshold_mw),
                format!("pump_mw = {:?}", config.pump_mw),
                format!(
                    "detection chain = {} * {} * {:?}",
                    config.eta_prop, config.eta_det, config.eta_hd
                ),
                format!("signal_waist_um = {}", config.signal_waist_um),
                format!("quad_nodes = {}", config.quad_nodes),
            ],
        }
    }
}
