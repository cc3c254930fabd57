//! Command implementations behind the CLI surface. Each command is a pure
//! function from configuration (plus optional data files) to a result
//! struct, so the binary, the tests and the report assembly all share one
//! code path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hgopa::detection::{DbPair, LossBudgetEntry};
use hgopa::opa::CalibratedEnvelope;
use hgopa::{
    back_out_cavity_escape, classical_gain, efficiency_from_spectrum, fit_threshold,
    infer_source, relative_threshold, squeezing_variance, BeamGeometry, Error, ExperimentConfig,
    FitMethod, FitResult, GainPhase, OverlapTable, PumpProfile, QuadratureSign,
    QuadratureSpec, ReferenceCurve, Result, SqueezingMeasurement, Uncertain, VarianceDb,
    MODE_COUNT, MODE_LABELS,
};

use crate::report::{
    EfficiencyTable, ExperimentalThresholds, GainSummary, Provenance, ReportBundle, Series,
    ThresholdTable,
};

/// Builds the quadrature request the configuration asks for.
pub fn quad_spec(config: &ExperimentConfig) -> Result<QuadratureSpec> {
    QuadratureSpec::gauss_hermite(config.quad_nodes)
}

fn signal_geometry(config: &ExperimentConfig) -> Result<BeamGeometry> {
    BeamGeometry::signal(config.signal_waist_um)
}

/// `overlap`: alpha and Gamma tables up to `max_order`.
pub fn cmd_overlap(config: &ExperimentConfig, max_order: usize) -> Result<OverlapTable> {
    let geometry = signal_geometry(config)?;
    OverlapTable::compute(max_order, &geometry, &quad_spec(config)?)
}

/// Optional per-mode gain-curve files for the threshold commands.
#[derive(Debug, Clone, Default)]
pub struct GainData {
    pub paths: [Option<PathBuf>; MODE_COUNT],
}

impl GainData {
    /// Looks for `gain_temN0.csv` (or the digitized `fig3_gain_temN0.csv`)
    /// in a data directory.
    pub fn discover(dir: &Path) -> Self {
        let mut paths: [Option<PathBuf>; MODE_COUNT] = Default::default();
        for (i, label) in MODE_LABELS.iter().enumerate() {
            for candidate in [
                dir.join(format!("gain_{label}.csv")),
                dir.join(format!("fig3_gain_{label}.csv")),
            ] {
                if candidate.is_file() {
                    paths[i] = Some(candidate);
                    break;
                }
            }
        }
        GainData { paths }
    }

    pub fn any(&self) -> bool {
        self.paths.iter().any(Option::is_some)
    }
}

/// `threshold`: the relative-threshold table, theory always, fitted
/// experimental columns when gain curves are supplied.
pub fn cmd_threshold(config: &ExperimentConfig, data: &GainData) -> Result<ThresholdTable> {
    let table = cmd_overlap(config, MODE_COUNT - 1)?;
    let fundamental = PumpProfile::fundamental();
    let mut theoretical = Vec::with_capacity(MODE_COUNT);
    let mut intensity = Vec::with_capacity(MODE_COUNT);
    let mut overlap_factor = Vec::with_capacity(MODE_COUNT);
    let alpha_0 = table.alpha(0).expect("order 0 present");
    for n in 0..MODE_COUNT {
        let value = relative_threshold(n, &fundamental, &table)?
            .finite()
            .ok_or_else(|| {
                Error::Domain("fundamental pump has no coupling to this mode".to_string())
            })?;
        theoretical.push(value);
        intensity.push((alpha_0 / table.alpha(n).expect("in range")).powi(2));
        let g = table.gamma(n, 0).expect("in range");
        overlap_factor.push(1.0 / (g * g));
    }

    let experimental = if data.any() {
        let reference_path = data.paths[0].as_ref().ok_or_else(|| {
            Error::Domain(
                "experimental thresholds need the TEM00 reference gain curve".to_string(),
            )
        })?;
        let mut reference_curve = hgopa::load_gain_csv(reference_path)?;
        reference_curve.mode_order = Some(0);
        let reference_fit =
            fit_threshold(&reference_curve, FitMethod::ModelFit, None, config.fit_points)?;

        let mut model_fit = vec![Uncertain::exact(1.0); MODE_COUNT];
        let mut slope_ratio = vec![Uncertain::exact(1.0); MODE_COUNT];
        let mut fitted = vec![f64::NAN; MODE_COUNT];
        fitted[0] = reference_fit.threshold_mw;
        for n in 1..MODE_COUNT {
            let Some(path) = data.paths[n].as_ref() else {
                continue;
            };
            let mut curve = hgopa::load_gain_csv(path)?;
            curve.mode_order = Some(n);
            let fit = fit_threshold(&curve, FitMethod::ModelFit, None, config.fit_points)?;
            fitted[n] = fit.threshold_mw;
            let ratio = fit.threshold_mw / reference_fit.threshold_mw;
            let rel = ((fit.uncertainty_mw / fit.threshold_mw).powi(2)
                + (reference_fit.uncertainty_mw / reference_fit.threshold_mw).powi(2))
            .sqrt();
            model_fit[n] = Uncertain::new(ratio, ratio * rel);

            let slope = fit_threshold(
                &curve,
                FitMethod::SlopeRatio,
                Some(ReferenceCurve {
                    curve: &reference_curve,
                    threshold_mw: reference_fit.threshold_mw,
                }),
                config.fit_points,
            )?;
            slope_ratio[n] = Uncertain::new(
                slope.threshold_mw / reference_fit.threshold_mw,
                slope.uncertainty_mw / reference_fit.threshold_mw,
            );
        }
        Some(ExperimentalThresholds {
            model_fit,
            slope_ratio,
            fitted_threshold_mw: fitted,
        })
    } else {
        None
    };

    Ok(ThresholdTable {
        modes: MODE_LABELS.iter().map(|s| s.to_string()).collect(),
        theoretical,
        intensity_factors: intensity,
        overlap_factors: overlap_factor,
        experimental,
    })
}

/// Output of `squeeze`: the loss budget per mode plus phase-scan series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezeOutput {
    pub entries: Vec<LossBudgetEntry>,
    pub table3: EfficiencyTable,
    pub phase_scans: Vec<Series>,
}

/// `squeeze`: reproduces the squeezing tables and the V(theta) scans.
#[allow(clippy::needless_range_loop)]
pub fn cmd_squeeze(config: &ExperimentConfig) -> Result<SqueezeOutput> {
    let floor = VarianceDb::new(config.electronic_floor_db)?;
    let mut entries = Vec::with_capacity(MODE_COUNT);
    let mut phase_scans = Vec::with_capacity(MODE_COUNT);
    let mut estimated = Vec::with_capacity(MODE_COUNT);
    let mut calculated_eta = Vec::with_capacity(MODE_COUNT);
    let mut backout = Vec::with_capacity(MODE_COUNT);

    for mode in 0..MODE_COUNT {
        let measurement = SqueezingMeasurement::new(
            mode,
            VarianceDb::new(config.squeezing_db[mode])?,
            VarianceDb::new(config.anti_squeezing_db[mode])?,
            floor,
        )?;
        let corrected_sq = measurement.squeezing.to_linear();
        let corrected_asq = measurement.anti_squeezing.to_linear();

        let chain = config.detection_chain(mode)?;
        let detection = chain.detection_product();
        let inferred_sq = infer_source(corrected_sq, detection.value)?;
        let inferred_asq = infer_source(corrected_asq, detection.value)?;

        let p_ratio = config.pump_ratio(mode);
        let calc_sq = squeezing_variance(p_ratio, config.eta_cav, QuadratureSign::Minus)?;
        let calc_asq = squeezing_variance(p_ratio, config.eta_cav, QuadratureSign::Plus)?;

        let eta_estimated = chain.total(Uncertain::exact(config.eta_cav));
        let eta_calculated = efficiency_from_spectrum(&measurement)?;
        let eta_cav_backout = back_out_cavity_escape(eta_calculated, &chain)?;

        entries.push(LossBudgetEntry {
            mode_order: mode,
            corrected_db: DbPair::from_linear(corrected_sq, corrected_asq),
            inferred_db: DbPair::from_linear(inferred_sq, inferred_asq),
            calculated_db: DbPair::from_linear(calc_sq, calc_asq),
            eta_estimated,
            eta_calculated,
            eta_cav_backout,
        });
        estimated.push(eta_estimated);
        calculated_eta.push(eta_calculated);
        backout.push(eta_cav_backout);

        // Local-oscillator phase scan between the two quadratures.
        let vm = corrected_sq.value();
        let vp = corrected_asq.value();
        let rows: Vec<Vec<f64>> = (0..=180)
            .map(|deg| {
                let theta = (deg as f64).to_radians();
                let v = vm * theta.cos().powi(2) + vp * theta.sin().powi(2);
                vec![deg as f64, 10.0 * v.log10(), v]
            })
            .collect();
        phase_scans.push(Series {
            label: format!("phase_scan_{}", MODE_LABELS[mode]),
            columns: vec![
                "theta_deg".to_string(),
                "variance_db".to_string(),
                "variance_linear".to_string(),
            ],
            rows,
        });
    }

    Ok(SqueezeOutput {
        entries,
        table3: EfficiencyTable {
            modes: MODE_LABELS.iter().map(|s| s.to_string()).collect(),
            estimated,
            calculated: calculated_eta,
            eta_cav_backout: backout,
        },
        phase_scans,
    })
}

/// Output of `gain`: temperature and pump series with per-mode summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainOutput {
    pub summaries: Vec<GainSummary>,
    pub temperature_series: Vec<Series>,
    pub pump_series: Vec<Series>,
}

/// `gain`: classical gain against crystal temperature and pump power.
#[allow(clippy::needless_range_loop)]
pub fn cmd_gain(config: &ExperimentConfig) -> Result<GainOutput> {
    let mut summaries = Vec::with_capacity(MODE_COUNT);
    let mut temperature_series = Vec::with_capacity(MODE_COUNT);
    let mut pump_series = Vec::with_capacity(MODE_COUNT);

    for mode in 0..MODE_COUNT {
        let spec = config.phase_match_spec(mode);
        let p_ratio = config.pump_ratio(mode);
        let envelope = CalibratedEnvelope::at_pump(&spec, p_ratio, GainPhase::Amplify)?;

        let mut rows = Vec::with_capacity(121);
        for step in 0..=120 {
            let t = spec.t_opt_c - 3.0 + 0.05 * step as f64;
            let env = envelope.value(t);
            let gain = classical_gain(p_ratio * env, GainPhase::Amplify)?;
            rows.push(vec![t, env, gain]);
        }
        let peak_gain = classical_gain(p_ratio, GainPhase::Amplify)?;
        let fwhm = measured_excess_fwhm(&rows, spec.t_opt_c, peak_gain);
        temperature_series.push(Series {
            label: format!("gain_vs_temperature_{}", MODE_LABELS[mode]),
            columns: vec![
                "temp_c".to_string(),
                "envelope".to_string(),
                "gain".to_string(),
            ],
            rows,
        });

        let p_max = config
            .pump_cap_mw
            .min(0.995 * config.threshold_mw[mode]);
        let steps = 60;
        let pump_rows: Vec<Vec<f64>> = (0..=steps)
            .map(|k| {
                let p_mw = p_max * k as f64 / steps as f64;
                let ratio = p_mw / config.threshold_mw[mode];
                Ok(vec![
                    p_mw,
                    classical_gain(ratio, GainPhase::Amplify)?,
                    classical_gain(ratio, GainPhase::Deamplify)?,
                ])
            })
            .collect::<Result<_>>()?;
        pump_series.push(Series {
            label: format!("gain_vs_pump_{}", MODE_LABELS[mode]),
            columns: vec![
                "pump_mw".to_string(),
                "amplification".to_string(),
                "deamplification".to_string(),
            ],
            rows: pump_rows,
        });

        summaries.push(GainSummary {
            mode: MODE_LABELS[mode].to_string(),
            peak_temperature_c: spec.t_opt_c,
            peak_gain,
            gain_excess_fwhm_c: fwhm,
            deamplification_at_threshold: classical_gain(1.0, GainPhase::Deamplify)?,
        });
    }

    Ok(GainOutput {
        summaries,
        temperature_series,
        pump_series,
    })
}

/// FWHM of the gain excess read off the sampled temperature series by
/// linear interpolation; independent check on the envelope calibration.
fn measured_excess_fwhm(rows: &[Vec<f64>], t_opt: f64, peak_gain: f64) -> f64 {
    let half = 1.0 + 0.5 * (peak_gain - 1.0);
    let mut crossing = f64::NAN;
    for pair in rows.windows(2) {
        let (t0, g0) = (pair[0][0], pair[0][2]);
        let (t1, g1) = (pair[1][0], pair[1][2]);
        if t0 >= t_opt && (g0 - half) * (g1 - half) <= 0.0 && g0 != g1 {
            crossing = t0 + (half - g0) / (g1 - g0) * (t1 - t0);
            break;
        }
    }
    2.0 * (crossing - t_opt)
}

/// Arguments for a one-off `fit` run.
#[derive(Debug, Clone)]
pub struct FitRequest {
    pub csv: PathBuf,
    pub method: FitMethod,
    pub reference_csv: Option<PathBuf>,
    pub reference_threshold_mw: Option<f64>,
    pub fit_points: usize,
}

/// `fit`: threshold estimate for a single user-supplied curve.
pub fn cmd_fit(request: &FitRequest) -> Result<FitResult> {
    let curve = hgopa::load_gain_csv(&request.csv)?;
    match request.method {
        FitMethod::ModelFit => fit_threshold(&curve, FitMethod::ModelFit, None, request.fit_points),
        FitMethod::SlopeRatio => {
            let path = request.reference_csv.as_ref().ok_or_else(|| {
                Error::Domain("slope-ratio fit needs --reference <csv>".to_string())
            })?;
            let reference_curve = hgopa::load_gain_csv(path)?;
            let threshold_mw = match request.reference_threshold_mw {
                Some(t) => t,
                // fall back to fitting the reference curve itself
                None => {
                    fit_threshold(&reference_curve, FitMethod::ModelFit, None, request.fit_points)?
                        .threshold_mw
                }
            };
            fit_threshold(
                &curve,
                FitMethod::SlopeRatio,
                Some(ReferenceCurve {
                    curve: &reference_curve,
                    threshold_mw,
                }),
                request.fit_points,
            )
        }
    }
}

/// `report`: the full bundle, theory-only when no data directory is given.
pub fn cmd_report(
    config: &ExperimentConfig,
    max_order: usize,
    data_dir: Option<&Path>,
) -> Result<ReportBundle> {
    let overlap = cmd_overlap(config, max_order)?;
    let data = data_dir.map(GainData::discover).unwrap_or_default();
    let table1 = cmd_threshold(config, &data)?;
    let squeeze = cmd_squeeze(config)?;
    let gain = cmd_gain(config)?;
    Ok(ReportBundle {
        config: config.clone(),
        overlap,
        table1,
        table2: squeeze.entries,
        table3: squeeze.table3,
        gain_summaries: gain.summaries,
        gain_vs_temperature: gain.temperature_series,
        gain_vs_pump: gain.pump_series,
        phase_scans: squeeze.phase_scans,
        provenance: Provenance::standard(config),
    })
}
