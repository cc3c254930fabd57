//! Least-squares threshold estimation from measured gain curves.
//!
//! Two estimators are provided. The model fit minimizes the residual of
//! `G(P) = 1/(1 - sqrt(P/Pthr))^2` over `Pthr` by golden-section search on
//! `ln Pthr`, where the objective is unimodal for physical data. The
//! slope-ratio estimator mirrors the published procedure: a straight-line
//! fit of `sqrt(G) - 1` against `sqrt(P)` on the lowest few points of each
//! curve, with the threshold ratio given by the inverse squared slope ratio
//! against a reference curve of known threshold.

use serde::{Deserialize, Serialize};

use crate::curves::GainCurve;
use crate::error::{Error, Result};

/// Threshold estimator selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    ModelFit,
    SlopeRatio,
}

impl std::fmt::Display for FitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitMethod::ModelFit => write!(f, "model-fit"),
            FitMethod::SlopeRatio => write!(f, "slope-ratio"),
        }
    }
}

/// A curve whose threshold is already known, used to anchor the slope-ratio
/// estimator.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceCurve<'a> {
    pub curve: &'a GainCurve,
    pub threshold_mw: f64,
}

/// Outcome of a threshold fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub threshold_mw: f64,
    /// One-sigma uncertainty derived from the residual curvature
    /// (model fit) or the slope standard errors (slope ratio).
    pub uncertainty_mw: f64,
    /// Euclidean norm of the residuals at the optimum.
    pub residual_norm: f64,
    pub method: FitMethod,
}

/// Gain model used by the fitter.
fn model_gain(p: f64, threshold: f64) -> f64 {
    1.0 / (1.0 - (p / threshold).sqrt()).powi(2)
}

/// Estimates the oscillation threshold from a below-threshold gain curve.
///
/// `fit_points` is the number of low-power samples the slope-ratio method
/// uses; the model fit uses every sample.
pub fn fit_threshold(
    curve: &GainCurve,
    method: FitMethod,
    reference: Option<ReferenceCurve<'_>>,
    fit_points: usize,
) -> Result<FitResult> {
    curve.validate()?;
    if curve.samples.len() < 3 {
        return Err(Error::domain(format!(
            "threshold fit needs at least 3 samples, got {}",
            curve.samples.len()
        )));
    }
    match method {
        FitMethod::ModelFit => model_fit(curve),
        FitMethod::SlopeRatio => {
            let reference = reference.ok_or_else(|| {
                Error::domain(
                    "slope-ratio fit needs a reference curve with a known threshold".to_string(),
                )
            })?;
            slope_ratio_fit(curve, reference, fit_points)
        }
    }
}

fn residual_sum_of_squares(curve: &GainCurve, threshold: f64) -> f64 {
    curve
        .samples
        .iter()
        .map(|&(p, g)| (model_gain(p, threshold) - g).powi(2))
        .sum()
}

fn model_fit(curve: &GainCurve) -> Result<FitResult> {
    let max_power = curve.max_power();
    if max_power <= 0.0 {
        return Err(Error::domain("curve has no non-zero pump powers".to_string()));
    }
    let spread = curve.samples.iter().map(|&(_, g)| g).fold(
        (f64::MAX, f64::MIN),
        |(lo, hi), g| (lo.min(g), hi.max(g)),
    );
    if spread.1 - spread.0 < 1e-12 {
        return Err(Error::domain(
            "degenerate fit: gain curve is flat".to_string(),
        ));
    }

    // Golden-section search on ln(Pthr); the model only exists for
    // thresholds above the largest sampled power.
    let lo_bound = max_power * (1.0 + 1e-9);
    let hi_bound = max_power * 1e6;
    let (mut a, mut b) = (lo_bound.ln(), hi_bound.ln());
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = residual_sum_of_squares(curve, c.exp());
    let mut fd = residual_sum_of_squares(curve, d.exp());
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = residual_sum_of_squares(curve, c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = residual_sum_of_squares(curve, d.exp());
        }
    }
    let threshold = (0.5 * (a + b)).exp();

    if threshold <= lo_bound * (1.0 + 1e-6) {
        return Err(Error::domain(format!(
            "fitted threshold {threshold:.3} mW does not exceed the sampled power range \
             (max {max_power} mW); the data is not below-threshold gain data"
        )));
    }
    if threshold >= hi_bound * (1.0 - 1e-3) {
        return Err(Error::domain(
            "degenerate fit: residual keeps improving toward infinite threshold".to_string(),
        ));
    }

    let rss = residual_sum_of_squares(curve, threshold);
    let n = curve.samples.len() as f64;
    // Curvature of the residual in Pthr by central difference; the
    // covariance of a 1-parameter least-squares estimate is
    // 2 s^2 / d2(RSS)/dtheta^2.
    let h = threshold * 1e-5;
    let curvature = (residual_sum_of_squares(curve, threshold + h)
        + residual_sum_of_squares(curve, threshold - h)
        - 2.0 * rss)
        / (h * h);
    let uncertainty = if curvature > 0.0 {
        (2.0 * (rss / (n - 1.0)) / curvature).sqrt()
    } else {
        return Err(Error::domain(
            "degenerate fit: no curvature at the optimum".to_string(),
        ));
    };
    Ok(FitResult {
        threshold_mw: threshold,
        uncertainty_mw: uncertainty,
        residual_norm: rss.sqrt(),
        method: FitMethod::ModelFit,
    })
}

/// Through-origin straight-line fit of `sqrt(G) - 1` against `sqrt(P)`,
/// returning the slope, its standard error and the residual sum of squares.
fn gain_slope(curve: &GainCurve, fit_points: usize) -> Result<(f64, f64, f64)> {
    if fit_points < 2 {
        return Err(Error::domain("slope fit needs at least 2 points".to_string()));
    }
    let points: Vec<(f64, f64)> = curve
        .samples
        .iter()
        .filter(|&&(p, _)| p > 0.0)
        .take(fit_points)
        .map(|&(p, g)| (p.sqrt(), g.sqrt() - 1.0))
        .collect();
    if points.len() < 2 {
        return Err(Error::domain(format!(
            "slope fit needs {fit_points} non-zero-power points, found {}",
            points.len()
        )));
    }
    let sxx: f64 = points.iter().map(|&(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|&(x, y)| x * y).sum();
    let slope = sxy / sxx;
    if slope <= 0.0 {
        return Err(Error::domain(
            "degenerate fit: non-positive gain slope".to_string(),
        ));
    }
    let rss: f64 = points.iter().map(|&(x, y)| (y - slope * x).powi(2)).sum();
    let dof = (points.len() - 1) as f64;
    let slope_sigma = (rss / (dof * sxx)).sqrt();
    Ok((slope, slope_sigma, rss))
}

fn slope_ratio_fit(
    curve: &GainCurve,
    reference: ReferenceCurve<'_>,
    fit_points: usize,
) -> Result<FitResult> {
    reference.curve.validate()?;
    if reference.threshold_mw.is_nan() || reference.threshold_mw <= 0.0 {
        return Err(Error::domain("reference threshold must be positive".to_string()));
    }
    let (slope_ref, sigma_ref, _) = gain_slope(reference.curve, fit_points)?;
    let (slope, sigma, rss) = gain_slope(curve, fit_points)?;
    // sqrt(G) - 1 ~ sqrt(P/Pthr) at low pump, so the threshold scales with
    // the inverse squared slope.
    let threshold = reference.threshold_mw * (slope_ref / slope).powi(2);
    let rel = 2.0 * ((sigma_ref / slope_ref).powi(2) + (sigma / slope).powi(2)).sqrt();
    Ok(FitResult {
        threshold_mw: threshold,
        uncertainty_mw: threshold * rel,
        residual_norm: rss.sqrt(),
        method: FitMethod::SlopeRatio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn synthetic(threshold: f64, max_power: f64, points: usize) -> GainCurve {
        let samples: Vec<(f64, f64)> = (1..=points)
            .map(|i| {
                let p = max_power * i as f64 / points as f64;
                (p, model_gain(p, threshold))
            })
            .collect();
        GainCurve::new(samples, None).unwrap()
    }

    #[test]
    fn noiseless_recovery_within_a_tenth_percent() {
        for &threshold in &[260.0, 1000.0, 1600.0] {
            let curve = synthetic(threshold, 0.9 * threshold.min(350.0 * 3.0), 8);
            let fit = fit_threshold(&curve, FitMethod::ModelFit, None, 3).unwrap();
            assert!(
                (fit.threshold_mw - threshold).abs() / threshold < 1e-3,
                "recovered {} for true {threshold}",
                fit.threshold_mw
            );
            assert!(fit.residual_norm < 1e-6);
        }
    }

    #[test]
    fn noisy_recovery_within_five_percent() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for &threshold in &[260.0, 1000.0, 1600.0] {
            let mut curve = synthetic(threshold, 300.0_f64.min(0.9 * threshold), 10);
            for sample in &mut curve.samples {
                // 1% multiplicative Gaussian noise via Box-Muller
                let (u1, u2): (f64, f64) = (rng.gen_range(1e-12..1.0), rng.gen());
                let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                sample.1 *= 1.0 + 0.01 * z;
            }
            let fit = fit_threshold(&curve, FitMethod::ModelFit, None, 3).unwrap();
            assert!(
                (fit.threshold_mw - threshold).abs() / threshold < 0.05,
                "recovered {} for true {threshold}",
                fit.threshold_mw
            );
        }
    }

    /// Gain data obeying the linearized relation sqrt(G) = 1 + sqrt(P/Pthr)
    /// exactly; the slope-ratio estimator is exact on it.
    fn linearized(threshold: f64, max_power: f64, points: usize) -> GainCurve {
        let samples: Vec<(f64, f64)> = (1..=points)
            .map(|i| {
                let p = max_power * i as f64 / points as f64;
                (p, (1.0 + (p / threshold).sqrt()).powi(2))
            })
            .collect();
        GainCurve::new(samples, None).unwrap()
    }

    #[test]
    fn slope_ratio_is_exact_on_linearized_gain() {
        let reference_curve = linearized(260.0, 120.0, 8);
        let curve = linearized(1040.0, 120.0, 8);
        let fit = fit_threshold(
            &curve,
            FitMethod::SlopeRatio,
            Some(ReferenceCurve {
                curve: &reference_curve,
                threshold_mw: 260.0,
            }),
            3,
        )
        .unwrap();
        assert_abs_diff_eq!(fit.threshold_mw, 1040.0, epsilon = 1e-6);
        assert!(fit.residual_norm < 1e-9);
    }

    #[test]
    fn slope_ratio_bias_shrinks_with_pump_power() {
        // On full-model data the linearization inflates the reference slope
        // more than the higher-threshold one, biasing the ratio upward; the
        // bias must decay as the sampled powers drop.
        let mut previous = f64::MAX;
        for &max_power in &[120.0, 30.0, 3.0] {
            let reference_curve = synthetic(260.0, max_power, 8);
            let curve = synthetic(1040.0, max_power, 8);
            let fit = fit_threshold(
                &curve,
                FitMethod::SlopeRatio,
                Some(ReferenceCurve {
                    curve: &reference_curve,
                    threshold_mw: 260.0,
                }),
                3,
            )
            .unwrap();
            let ratio = fit.threshold_mw / 260.0;
            assert!(ratio > 4.0 && ratio < previous, "ratio {ratio}");
            previous = ratio;
        }
        assert_abs_diff_eq!(previous, 4.0, epsilon = 0.3);
    }

    #[test]
    fn slope_ratio_requires_reference() {
        let curve = synthetic(1000.0, 300.0, 6);
        assert!(fit_threshold(&curve, FitMethod::SlopeRatio, None, 3).is_err());
    }

    #[test]
    fn flat_curve_is_degenerate() {
        let curve = GainCurve::new(
            vec![(10.0, 1.0), (20.0, 1.0), (30.0, 1.0)],
            None,
        )
        .unwrap();
        assert!(fit_threshold(&curve, FitMethod::ModelFit, None, 3).is_err());
    }

    #[test]
    fn too_few_samples() {
        let curve = GainCurve::new(vec![(10.0, 1.1), (20.0, 1.2)], None).unwrap();
        assert!(fit_threshold(&curve, FitMethod::ModelFit, None, 3).is_err());
    }

    #[test]
    fn threshold_pinned_at_sampled_power_is_rejected() {
        // the final gain is so large the optimum collapses onto the last
        // sampled power, i.e. the data is not below-threshold data
        let curve = GainCurve::new(
            vec![(50.0, 2.0), (100.0, 30.0), (150.0, 800.0), (200.0, 1e18)],
            None,
        )
        .unwrap();
        assert!(fit_threshold(&curve, FitMethod::ModelFit, None, 3).is_err());
    }

    #[test]
    fn decreasing_gain_still_respects_the_threshold_invariant() {
        // a poor but legal fit: threshold stays above the sampled range and
        // the misfit shows up in the residual norm
        let curve = GainCurve::new(vec![(50.0, 3.0), (100.0, 2.0), (150.0, 1.2)], None).unwrap();
        let fit = fit_threshold(&curve, FitMethod::ModelFit, None, 3).unwrap();
        assert!(fit.threshold_mw > curve.max_power());
        assert!(fit.residual_norm > 1.0);
    }
}
