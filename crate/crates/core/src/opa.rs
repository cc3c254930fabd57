//! Classical gain, oscillation-threshold scaling, phase-matching envelope
//! and the zero-frequency squeezing variance of a below-threshold OPA.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::overlap::{OverlapTable, PumpProfile};
use crate::variance::VarianceLinear;

/// Cavity and pumping parameters of the OPA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpaParams {
    /// Output-coupler transmittance at the signal wavelength (fraction).
    pub output_coupler_t: f64,
    /// Intra-cavity loss per round trip (fraction).
    pub intracavity_loss: f64,
    /// Oscillation threshold for TEM_00 operation, mW.
    pub threshold_mw_00: f64,
    /// Pump power, mW.
    pub pump_mw: f64,
}

impl OpaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.output_coupler_t > 0.0 && self.output_coupler_t <= 1.0) {
            return Err(Error::domain(format!(
                "output coupler transmittance must be in (0, 1], got {}",
                self.output_coupler_t
            )));
        }
        if !(0.0..1.0).contains(&self.intracavity_loss) {
            return Err(Error::domain(format!(
                "intra-cavity loss must be in [0, 1), got {}",
                self.intracavity_loss
            )));
        }
        if self.threshold_mw_00.is_nan() || self.threshold_mw_00 <= 0.0 || self.pump_mw < 0.0 {
            return Err(Error::domain("powers must be non-negative, threshold positive".to_string()));
        }
        Ok(())
    }
}

/// Escape efficiency `T / (T + L)`: the fraction of intra-cavity field that
/// leaves through the output coupler rather than being dissipated.
pub fn escape_efficiency(params: &OpaParams) -> Result<f64> {
    let t = params.output_coupler_t;
    let l = params.intracavity_loss;
    if t + l <= 0.0 {
        return Err(Error::domain(
            "escape efficiency undefined for T + L = 0".to_string(),
        ));
    }
    Ok(t / (t + l))
}

/// Relative phase between pump and seed selects amplification or
/// de-amplification of the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainPhase {
    Amplify,
    Deamplify,
}

/// Classical parametric gain `G = 1 / (1 -+ sqrt(P/Pthr))^2`.
///
/// Amplification diverges at threshold; de-amplification reaches its floor
/// of 1/4 there.
pub fn classical_gain(p_ratio: f64, phase: GainPhase) -> Result<f64> {
    if !(p_ratio >= 0.0 && p_ratio.is_finite()) {
        return Err(Error::domain(format!(
            "pump ratio must be finite and non-negative, got {p_ratio}"
        )));
    }
    let root = p_ratio.sqrt();
    match phase {
        GainPhase::Amplify => {
            if p_ratio >= 1.0 {
                return Err(Error::Divergence(format!(
                    "amplification gain diverges at P/Pthr = {p_ratio} >= 1"
                )));
            }
            Ok(1.0 / (1.0 - root).powi(2))
        }
        GainPhase::Deamplify => Ok(1.0 / (1.0 + root).powi(2)),
    }
}

/// Oscillation threshold relative to TEM_00 operation with a TEM_00 pump.
///
/// The pump power required to reach threshold never comes out below the
/// reference, and a pump with no projection on the optimal profile cannot
/// reach threshold at all; that case is the distinguished `Infinite` value
/// rather than an f64 infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativeThreshold {
    Finite(f64),
    Infinite,
}

impl RelativeThreshold {
    pub fn finite(self) -> Option<f64> {
        match self {
            RelativeThreshold::Finite(v) => Some(v),
            RelativeThreshold::Infinite => None,
        }
    }
}

/// `P_thr(n, pump) / P_thr(0, v_0) = (alpha_0/alpha_n)^2 / kappa_n(pump)^2`.
///
/// The first factor is the lower local intensity of the spread-out
/// higher-order mode; the second is the imperfect projection of the chosen
/// pump on the optimal profile.
pub fn relative_threshold(
    n: usize,
    pump: &PumpProfile,
    table: &OverlapTable,
) -> Result<RelativeThreshold> {
    let alpha_0 = table
        .alpha(0)
        .ok_or_else(|| Error::domain("overlap table is empty".to_string()))?;
    let alpha_n = table
        .alpha(n)
        .ok_or_else(|| Error::domain(format!("order {n} beyond table range")))?;
    let kappa = table.pump_coupling(pump, n)?;
    if kappa.abs() < 1e-12 {
        return Ok(RelativeThreshold::Infinite);
    }
    let intensity_factor = (alpha_0 / alpha_n).powi(2);
    Ok(RelativeThreshold::Finite(intensity_factor / (kappa * kappa)))
}

/// Temperature dependence of the phase-matching condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchSpec {
    /// Optimal crystal temperature, deg C.
    pub t_opt_c: f64,
    /// Full width at half maximum of the gain excess, deg C.
    pub fwhm_c: f64,
}

impl PhaseMatchSpec {
    pub fn new(t_opt_c: f64, fwhm_c: f64) -> Result<Self> {
        if !(fwhm_c > 0.0 && fwhm_c.is_finite() && t_opt_c.is_finite()) {
            return Err(Error::domain(format!(
                "phase-match spec needs finite t_opt and positive fwhm, got ({t_opt_c}, {fwhm_c})"
            )));
        }
        Ok(PhaseMatchSpec { t_opt_c, fwhm_c })
    }
}

/// sinc(x) = sin(x)/x solves sinc(x) = 1/2 here; calibrates the envelope
/// width against the gain-excess FWHM in the small-gain limit, where the
/// excess is proportional to sqrt of the pump ratio.
const SINC_HALF_POINT: f64 = 1.895_494_267_033_981;

fn sinc_squared(arg: f64) -> f64 {
    if arg.abs() < 1e-9 {
        return 1.0;
    }
    let s = arg.sin() / arg;
    s * s
}

/// Multiplicative envelope on the pump-power ratio: `sinc^2(b (t - t_opt))`
/// with `b` set so the small-signal gain excess has the configured FWHM.
pub fn phase_match_envelope(t_c: f64, spec: &PhaseMatchSpec) -> f64 {
    let b = 2.0 * SINC_HALF_POINT / spec.fwhm_c;
    sinc_squared(b * (t_c - spec.t_opt_c))
}

/// A sinc^2 temperature envelope with its width pinned at a particular
/// operating point, so the emitted gain-versus-temperature curve has the
/// configured FWHM at that pump ratio rather than in the small-gain limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedEnvelope {
    t_opt_c: f64,
    b: f64,
}

impl CalibratedEnvelope {
    /// Small-signal calibration; identical to [`phase_match_envelope`].
    pub fn small_signal(spec: &PhaseMatchSpec) -> Self {
        CalibratedEnvelope {
            t_opt_c: spec.t_opt_c,
            b: 2.0 * SINC_HALF_POINT / spec.fwhm_c,
        }
    }

    /// Calibrates the width so the gain excess `G - 1` at pump ratio
    /// `p_ratio` falls to half its peak at `t_opt +- fwhm/2`.
    pub fn at_pump(spec: &PhaseMatchSpec, p_ratio: f64, phase: GainPhase) -> Result<Self> {
        if p_ratio == 0.0 {
            return Ok(Self::small_signal(spec));
        }
        let peak = classical_gain(p_ratio, phase)?;
        let half_gain = 1.0 + 0.5 * (peak - 1.0);
        // Envelope value at which the gain excess halves.
        let half_envelope = match phase {
            GainPhase::Amplify => (1.0 - half_gain.sqrt().recip()).powi(2) / p_ratio,
            GainPhase::Deamplify => (half_gain.sqrt().recip() - 1.0).powi(2) / p_ratio,
        };
        // sinc^2 is monotone on [0, pi]; invert by bisection.
        let (mut lo, mut hi) = (0.0_f64, std::f64::consts::PI - 1e-12);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if sinc_squared(mid) > half_envelope {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(CalibratedEnvelope {
            t_opt_c: spec.t_opt_c,
            b: (lo + hi) / spec.fwhm_c,
        })
    }

    pub fn value(&self, t_c: f64) -> f64 {
        sinc_squared(self.b * (t_c - self.t_opt_c))
    }
}

/// Which quadrature of [`squeezing_variance`] is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureSign {
    /// Anti-squeezed (phase) quadrature, `V+`.
    Plus,
    /// Squeezed (amplitude) quadrature, `V-`.
    Minus,
}

/// Zero-frequency quadrature variance of the OPA output,
/// `V± = 1 ± eta_esc * 4 sqrt(p) / (1 -+ sqrt(p))^2` with `p = P/Pthr`.
///
/// The anti-squeezed variance diverges at threshold; requesting it with
/// `p >= 1` is an error rather than an infinite result.
pub fn squeezing_variance(
    p_ratio: f64,
    eta_esc: f64,
    quadrature: QuadratureSign,
) -> Result<VarianceLinear> {
    if !(p_ratio >= 0.0 && p_ratio.is_finite()) {
        return Err(Error::domain(format!(
            "pump ratio must be finite and non-negative, got {p_ratio}"
        )));
    }
    if !(0.0..=1.0).contains(&eta_esc) {
        return Err(Error::domain(format!(
            "escape efficiency must be in [0, 1], got {eta_esc}"
        )));
    }
    let root = p_ratio.sqrt();
    // Both numerators are written as sums of non-negative terms, so neither
    // quadrature suffers cancellation anywhere on eta in [0, 1]:
    //   V+ = ((1-r)^2 + 4 eta r) / (1-r)^2
    //   V- = ((1-r)^2 + 4 (1-eta) r) / (1+r)^2
    let squared_gap = (1.0 - root).powi(2);
    let value = match quadrature {
        QuadratureSign::Plus => {
            if p_ratio >= 1.0 {
                return Err(Error::Divergence(format!(
                    "anti-squeezing diverges at P/Pthr = {p_ratio} >= 1"
                )));
            }
            (squared_gap + 4.0 * eta_esc * root) / squared_gap
        }
        QuadratureSign::Minus => {
            (squared_gap + 4.0 * (1.0 - eta_esc) * root) / (1.0 + root).powi(2)
        }
    };
    VarianceLinear::new(value)
}
