//! One-dimensional Hermite-Gauss transverse modes.
//!
//! Physicists' Hermite convention throughout: `H_0 = 1`, `H_1 = 2x`,
//! `H_{n+1} = 2x H_n - 2n H_{n-1}`, matching the standard TEM_n0 beam
//! definition. A mode of order `n` on waist `w` is
//!
//! ```text
//! u_n(x) = N_n H_n(sqrt(2) x / w) exp(-x^2 / w^2)
//! ```
//!
//! with `N_n` fixed by unit L2 norm. The `2^n n!` factor inside `N_n` is
//! folded into a normalized recurrence (equivalent to carrying the constant
//! in log space), so evaluation stays finite well past order 80.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const QUARTER_ROOT_TWO_OVER_PI: f64 = 0.893_243_841_738_002_3; // (2/pi)^(1/4)

/// Which field a transverse basis describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamLabel {
    /// Fundamental (signal/idler) basis at the infrared wavelength.
    Signal,
    /// Second-harmonic pump basis.
    Pump,
}

/// A transverse mode basis: a waist and the field it belongs to.
///
/// The pump basis is always derived from a signal basis; its waist is the
/// signal waist divided by sqrt(2), which is what makes the squared-signal
/// decomposition on the pump basis exactly finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamGeometry {
    waist: f64,
    label: BeamLabel,
}

impl BeamGeometry {
    /// Signal basis on the given waist (any consistent length unit).
    pub fn signal(waist: f64) -> Result<Self> {
        if !(waist > 0.0 && waist.is_finite()) {
            return Err(Error::domain(format!(
                "waist must be positive and finite, got {waist}"
            )));
        }
        Ok(BeamGeometry {
            waist,
            label: BeamLabel::Signal,
        })
    }

    /// The pump basis matched to this signal basis (waist w0 / sqrt(2)).
    pub fn pump_basis(&self) -> BeamGeometry {
        BeamGeometry {
            waist: self.waist / std::f64::consts::SQRT_2,
            label: BeamLabel::Pump,
        }
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn label(&self) -> BeamLabel {
        self.label
    }
}

/// A single Hermite-Gauss mode `u_n` on a given basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HGMode {
    order: usize,
    geometry: BeamGeometry,
}

impl HGMode {
    pub fn new(order: usize, geometry: BeamGeometry) -> Self {
        HGMode { order, geometry }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn geometry(&self) -> BeamGeometry {
        self.geometry
    }

    /// Field amplitude `u_n(x)`, normalized to unit L2 norm.
    pub fn amplitude(&self, x: f64) -> f64 {
        mode_amplitude(self.order, self.geometry.waist, x)
    }
}

/// Physicists' Hermite polynomial `H_n(x)` by the three-term recurrence.
pub fn hermite_poly(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0 * x,
        _ => {
            let mut h_prev = 1.0;
            let mut h = 2.0 * x;
            for k in 1..n {
                let next = 2.0 * x * h - 2.0 * (k as f64) * h_prev;
                h_prev = h;
                h = next;
            }
            h
        }
    }
}

/// `H_n(t) / sqrt(2^n n!)`, evaluated by the normalized recurrence so large
/// orders neither overflow nor lose the leading digits.
pub(crate) fn normalized_hermite(n: usize, t: f64) -> f64 {
    let mut h_prev = 0.0_f64;
    let mut h = 1.0_f64;
    for k in 0..n {
        let kf = k as f64;
        let next = t * (2.0 / (kf + 1.0)).sqrt() * h - (kf / (kf + 1.0)).sqrt() * h_prev;
        h_prev = h;
        h = next;
    }
    h
}

/// Unit-norm mode amplitude `u_n(x)` on waist `w`.
pub fn mode_amplitude(n: usize, waist: f64, x: f64) -> f64 {
    let t = std::f64::consts::SQRT_2 * x / waist;
    QUARTER_ROOT_TWO_OVER_PI / waist.sqrt()
        * normalized_hermite(n, t)
        * (-(x * x) / (waist * waist)).exp()
}

/// `ln(n!)`, summed directly; exact enough for every order used here.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}
