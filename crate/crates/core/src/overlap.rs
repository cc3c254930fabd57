//! Pump-signal mode-overlap engine.
//!
//! The squared signal mode `u_n^2`, normalized by `alpha_n = sqrt(∫u_n^4)`,
//! decomposes on the pump basis `{v_j}` (waist w0/sqrt(2)) with coefficients
//!
//! ```text
//! Gamma_ni = ∫ u_n(x)^2 / alpha_n * v_{2i}(x) dx
//! ```
//!
//! Only even pump orders up to `2n` appear, and the coefficients are
//! complete: sum_i Gamma_ni^2 = 1. The optimal pump for an order-n signal is
//! the profile with exactly these coefficients; pumping with anything else
//! reduces the effective parametric coupling by the projection onto it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hg::{ln_factorial, mode_amplitude, BeamGeometry, BeamLabel};
use crate::parallel;
use crate::quadrature::{integrate, QuadratureSpec};

/// Squared-signal normalization `alpha_n = sqrt(∫ u_n^4 dx)`.
pub fn alpha(n: usize, geometry: &BeamGeometry, spec: &QuadratureSpec) -> Result<f64> {
    let w = geometry.waist();
    let spec = spec.with_scale(0.5 * w)?;
    let value = integrate(|x| mode_amplitude(n, w, x).powi(4), &spec)?;
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::quadrature(format!(
            "alpha_{n} integral came out non-positive ({value})"
        )));
    }
    Ok(value.sqrt())
}

/// Overlap coefficient `Gamma_ni` between the normalized squared signal mode
/// of order `n` and the pump-basis mode `v_{2i}`.
pub fn gamma(n: usize, i: usize, signal: &BeamGeometry, spec: &QuadratureSpec) -> Result<f64> {
    if signal.label() != BeamLabel::Signal {
        return Err(Error::domain(
            "gamma expects the signal geometry; the pump basis is derived internally".to_string(),
        ));
    }
    let a = alpha(n, signal, spec)?;
    gamma_with_alpha(n, i, a, signal, spec)
}

fn gamma_with_alpha(
    n: usize,
    i: usize,
    alpha_n: f64,
    signal: &BeamGeometry,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let w = signal.waist();
    let wp = signal.pump_basis().waist();
    let spec = spec.with_scale(0.5 * w)?;
    integrate(
        |x| mode_amplitude(n, w, x).powi(2) / alpha_n * mode_amplitude(2 * i, wp, x),
        &spec,
    )
}

/// Precomputed `alpha_n` and `Gamma_ni` for signal orders `0..=max_order`.
///
/// `gamma[n][i]` holds the coefficient on pump mode `v_{2i}`; entries with
/// `i > n` are exact zeros of the decomposition and are stored as computed
/// (they vanish to quadrature accuracy).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapTable {
    max_order: usize,
    alpha: Vec<f64>,
    gamma: Vec<Vec<f64>>,
}

impl OverlapTable {
    /// Builds the table on the signal basis, parallelizing over signal
    /// orders when the `parallel` feature is enabled.
    pub fn compute(
        max_order: usize,
        signal: &BeamGeometry,
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        Self::build(max_order, signal, spec, false)
    }

    /// Sequential twin of [`OverlapTable::compute`]; used by the benchmark
    /// suite to compare against the data-parallel path.
    pub fn compute_sequential(
        max_order: usize,
        signal: &BeamGeometry,
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        Self::build(max_order, signal, spec, true)
    }

    fn build(
        max_order: usize,
        signal: &BeamGeometry,
        spec: &QuadratureSpec,
        force_sequential: bool,
    ) -> Result<Self> {
        if signal.label() != BeamLabel::Signal {
            return Err(Error::domain(
                "overlap table expects the signal geometry".to_string(),
            ));
        }
        let row = |n: usize| -> Result<(f64, Vec<f64>)> {
            let a = alpha(n, signal, spec)?;
            let mut coeffs = Vec::with_capacity(max_order + 1);
            for i in 0..=max_order {
                coeffs.push(gamma_with_alpha(n, i, a, signal, spec)?);
            }
            Ok((a, coeffs))
        };
        let rows = if force_sequential {
            parallel::map_indexed_seq(max_order + 1, row)
        } else {
            parallel::map_indexed(max_order + 1, row)
        };
        let mut alpha_col = Vec::with_capacity(max_order + 1);
        let mut gamma_rows = Vec::with_capacity(max_order + 1);
        for r in rows {
            let (a, g) = r?;
            alpha_col.push(a);
            gamma_rows.push(g);
        }
        Ok(OverlapTable {
            max_order,
            alpha: alpha_col,
            gamma: gamma_rows,
        })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn alpha(&self, n: usize) -> Option<f64> {
        self.alpha.get(n).copied()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alpha
    }

    /// `Gamma_ni`; zero for pump indices beyond the stored range (where the
    /// decomposition has no support anyway).
    pub fn gamma(&self, n: usize, i: usize) -> Option<f64> {
        self.gamma.get(n).map(|row| row.get(i).copied().unwrap_or(0.0))
    }

    pub fn gamma_rows(&self) -> &[Vec<f64>] {
        &self.gamma
    }

    /// The pump profile that maximizes parametric coupling to signal order
    /// `n`: coefficients `Gamma_ni` on `v_0, v_2, ..., v_2n`, zero elsewhere.
    pub fn optimal_pump(&self, n: usize) -> Result<PumpProfile> {
        let row = self
            .gamma
            .get(n)
            .ok_or_else(|| Error::domain(format!("order {n} beyond table range")))?;
        let mut coeffs = vec![0.0; 2 * n + 1];
        for (i, &g) in row.iter().enumerate().take(n + 1) {
            coeffs[2 * i] = g;
        }
        PumpProfile::new(coeffs)
    }

    /// Effective coupling `kappa_n = sum_i c_{2i} Gamma_ni` of a unit-norm
    /// pump to signal order `n`. Equals 1 exactly for the optimal pump.
    pub fn pump_coupling(&self, pump: &PumpProfile, n: usize) -> Result<f64> {
        if n > self.max_order {
            return Err(Error::domain(format!("order {n} beyond table range")));
        }
        let kappa = pump
            .coefficients()
            .iter()
            .enumerate()
            .filter(|(j, _)| j % 2 == 0)
            .map(|(j, &c)| c * self.gamma(n, j / 2).unwrap_or(0.0))
            .sum::<f64>();
        Ok(kappa)
    }
}

/// A pump field decomposed on the pump mode basis `{v_j}`; unit norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpProfile {
    coefficients: Vec<f64>,
}

/// Unit-norm tolerance for pump profiles.
const NORM_TOL: f64 = 1e-10;

impl PumpProfile {
    /// Validates that `sum c_j^2 = 1` within 1e-10.
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        let norm2: f64 = coefficients.iter().map(|c| c * c).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!(
                "pump profile must have unit norm, got |c|^2 = {norm2}"
            )));
        }
        Ok(PumpProfile { coefficients })
    }

    /// Rescales arbitrary (non-zero) coefficients to unit norm.
    pub fn normalized(coefficients: Vec<f64>) -> Result<Self> {
        let norm2: f64 = coefficients.iter().map(|c| c * c).sum();
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::domain(
                "pump profile needs at least one non-zero coefficient".to_string(),
            ));
        }
        let norm = norm2.sqrt();
        Ok(PumpProfile {
            coefficients: coefficients.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// A pure `TEM_00` pump.
    pub fn fundamental() -> Self {
        PumpProfile {
            coefficients: vec![1.0],
        }
    }

    /// Coefficient on `v_j`, zero beyond the stored range.
    pub fn coefficient(&self, j: usize) -> f64 {
        self.coefficients.get(j).copied().unwrap_or(0.0)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

/// Transverse misalignment of the seed beam: a lateral displacement (in the
/// same length unit as the waist) and a normalized tilt (far-field
/// displacement in units of the beam divergence).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedMisalignment {
    pub displacement: f64,
    pub tilt: f64,
}

impl SeedMisalignment {
    pub fn new(displacement: f64, tilt: f64) -> Result<Self> {
        if !(displacement.is_finite() && tilt.is_finite()) {
            return Err(Error::domain("misalignment values must be finite".to_string()));
        }
        Ok(SeedMisalignment { displacement, tilt })
    }
}

/// Decomposes a displaced and tilted `TEM_00` seed onto `u_0..u_max_order`
/// by quadrature projection.
///
/// The seed field is `u_0(x - d) exp(i 2 t x / w0)`: the displacement is a
/// real shift, the normalized tilt a linear phase whose slope reproduces a
/// far-field displacement of `t` divergence half-angles. Coefficients carry
/// sign and phase; `sum |c_n|^2 -> 1` as `max_order` grows.
pub fn misaligned_seed_decomposition(
    m: &SeedMisalignment,
    max_order: usize,
    signal: &BeamGeometry,
    spec: &QuadratureSpec,
) -> Result<Vec<Complex64>> {
    let w = signal.waist();
    let d = m.displacement;
    let phase_slope = 2.0 * m.tilt / w;
    // The product u_0(x-d) u_n(x) decays like exp(-2(x - d/2)^2/w^2); the
    // broader scale w covers both the width and the centroid shift for the
    // displacements of interest.
    let spec = spec.with_scale(w / std::f64::consts::SQRT_2 + 0.5 * d.abs())?;
    let project = |n: usize| -> Result<Complex64> {
        let re = integrate(
            |x| mode_amplitude(0, w, x - d) * (phase_slope * x).cos() * mode_amplitude(n, w, x),
            &spec,
        )?;
        let im = integrate(
            |x| mode_amplitude(0, w, x - d) * (phase_slope * x).sin() * mode_amplitude(n, w, x),
            &spec,
        )?;
        Ok(Complex64::new(re, im))
    };
    parallel::map_indexed(max_order + 1, project)
        .into_iter()
        .collect()
}

/// Closed-form coefficients of the misaligned-seed decomposition,
/// `c_n = exp(i t d / w) exp(-|a|^2 / 2) a^n / sqrt(n!)` with
/// `a = d/w + i t`. Kept public as an independent cross-check of the
/// quadrature projection.
pub fn misaligned_seed_closed_form(
    m: &SeedMisalignment,
    max_order: usize,
    signal: &BeamGeometry,
) -> Vec<Complex64> {
    let w = signal.waist();
    let a = Complex64::new(m.displacement / w, m.tilt);
    let global = Complex64::from_polar(1.0, m.tilt * m.displacement / w)
        * (-0.5 * a.norm_sqr()).exp();
    (0..=max_order)
        .map(|n| global * a.powu(n as u32) * (-0.5 * ln_factorial(n)).exp())
        .collect()
}
