//! Detection-chain loss budget: electronic-noise correction, efficiency
//! propagation, loss maps on variances and the efficiency inversion from a
//! measured squeezing/anti-squeezing pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::variance::{VarianceDb, VarianceLinear};

/// A value with a symmetric one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uncertain {
    pub value: f64,
    pub sigma: f64,
}

impl Uncertain {
    pub fn new(value: f64, sigma: f64) -> Self {
        Uncertain { value, sigma }
    }

    pub fn exact(value: f64) -> Self {
        Uncertain { value, sigma: 0.0 }
    }
}

/// Product with first-order uncertainty: relative errors add in quadrature.
impl std::ops::Mul for Uncertain {
    type Output = Uncertain;

    fn mul(self, other: Uncertain) -> Uncertain {
        let value = self.value * other.value;
        let rel = |u: Uncertain| if u.value != 0.0 { u.sigma / u.value } else { 0.0 };
        let rel_total = (rel(self).powi(2) + rel(other).powi(2)).sqrt();
        Uncertain {
            value,
            sigma: value.abs() * rel_total,
        }
    }
}

/// Per-mode efficiencies between the OPA output and the recorded variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionChain {
    /// Propagation efficiency through the optical path.
    pub eta_prop: Uncertain,
    /// Photodiode quantum efficiency.
    pub eta_det: Uncertain,
    /// Homodyne (mode-matching) efficiency for this mode.
    pub eta_hd: Uncertain,
}

impl DetectionChain {
    pub fn new(eta_prop: Uncertain, eta_det: Uncertain, eta_hd: Uncertain) -> Result<Self> {
        for (name, eta) in [
            ("eta_prop", eta_prop),
            ("eta_det", eta_det),
            ("eta_hd", eta_hd),
        ] {
            if !(eta.value > 0.0 && eta.value <= 1.0) {
                return Err(Error::domain(format!(
                    "{name} must be in (0, 1], got {}",
                    eta.value
                )));
            }
        }
        Ok(DetectionChain {
            eta_prop,
            eta_det,
            eta_hd,
        })
    }

    /// Product of the detection-side efficiencies (no cavity factor).
    pub fn detection_product(&self) -> Uncertain {
        self.eta_prop * self.eta_det * self.eta_hd
    }

    /// Total efficiency including the cavity escape factor.
    pub fn total(&self, eta_cav: Uncertain) -> Uncertain {
        eta_cav * self.detection_product()
    }
}

/// One recorded squeezing measurement, in dB relative to the QNL.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingMeasurement {
    pub mode_order: usize,
    pub squeezing: VarianceDb,
    pub anti_squeezing: VarianceDb,
    /// Electronic noise floor relative to the QNL (negative dB).
    pub electronic_floor: VarianceDb,
}

impl SqueezingMeasurement {
    pub fn new(
        mode_order: usize,
        squeezing: VarianceDb,
        anti_squeezing: VarianceDb,
        electronic_floor: VarianceDb,
    ) -> Result<Self> {
        if squeezing.value() >= 0.0 || anti_squeezing.value() <= 0.0 {
            return Err(Error::InvalidMeasurement(format!(
                "need squeezing < 0 dB < anti-squeezing, got ({}, {})",
                squeezing.value(),
                anti_squeezing.value()
            )));
        }
        if electronic_floor.value() >= squeezing.value() {
            return Err(Error::InvalidMeasurement(format!(
                "electronic floor ({} dB) must sit below the squeezing level ({} dB)",
                electronic_floor.value(),
                squeezing.value()
            )));
        }
        Ok(SqueezingMeasurement {
            mode_order,
            squeezing,
            anti_squeezing,
            electronic_floor,
        })
    }
}

/// Removes the electronic-noise contribution from a raw variance:
/// `(raw - floor) / (1 - floor)`, both in linear units.
pub fn correct_electronic_noise(
    raw: VarianceLinear,
    floor: VarianceLinear,
) -> Result<VarianceLinear> {
    let raw = raw.value();
    let floor = floor.value();
    if floor >= 1.0 {
        return Err(Error::InvalidMeasurement(format!(
            "electronic floor must sit below the QNL, got {floor}"
        )));
    }
    if raw <= floor {
        return Err(Error::InvalidMeasurement(format!(
            "raw variance {raw} does not exceed the electronic floor {floor}"
        )));
    }
    VarianceLinear::new((raw - floor) / (1.0 - floor))
}

/// Propagates a variance through an efficiency `eta`:
/// `V -> eta V + (1 - eta)`; vacuum fills in what the loss removes.
pub fn apply_loss(v: VarianceLinear, eta: f64) -> Result<VarianceLinear> {
    check_eta(eta)?;
    VarianceLinear::new(eta * v.value() + (1.0 - eta))
}

/// Inverse of [`apply_loss`]: infers the source variance from a measured
/// one, `V -> 1 + (V - 1)/eta`.
pub fn infer_source(v: VarianceLinear, eta: f64) -> Result<VarianceLinear> {
    check_eta(eta)?;
    let inferred = 1.0 + (v.value() - 1.0) / eta;
    if inferred <= 0.0 {
        return Err(Error::InconsistentInputs(format!(
            "measured variance {} with efficiency {eta} implies a non-physical source",
            v.value()
        )));
    }
    VarianceLinear::new(inferred)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::domain(format!(
            "efficiency must be in (0, 1], got {eta}"
        )));
    }
    Ok(())
}

/// Total efficiency implied by a squeezing/anti-squeezing pair of a lossy
/// OPA:
///
/// ```text
/// eta = (V_sq + V_asq - 1 - V_sq V_asq) / (V_sq + V_asq - 2)
/// ```
///
/// evaluated in linear units. A pair sitting at the QNL carries no
/// information (the denominator vanishes); a pair below the pure-state
/// hyperbola is flagged as inconsistent rather than clamped.
pub fn efficiency_from_spectrum(m: &SqueezingMeasurement) -> Result<f64> {
    let v_sq = m.squeezing.to_linear().value();
    let v_asq = m.anti_squeezing.to_linear().value();
    let denominator = v_sq + v_asq - 2.0;
    if denominator.abs() < 1e-12 {
        return Err(Error::InvalidMeasurement(
            "both variances at the QNL: efficiency is indeterminate".to_string(),
        ));
    }
    let eta = (v_sq + v_asq - 1.0 - v_sq * v_asq) / denominator;
    if !(0.0..=1.0 + 1e-12).contains(&eta) {
        return Err(Error::InconsistentInputs(format!(
            "pair ({} dB, {} dB) implies efficiency {eta} outside [0, 1]",
            m.squeezing.value(),
            m.anti_squeezing.value()
        )));
    }
    Ok(eta.min(1.0))
}

/// Splits a total efficiency into the cavity escape part by dividing out
/// the detection-side product.
pub fn back_out_cavity_escape(eta_total: f64, chain: &DetectionChain) -> Result<f64> {
    let product = chain.detection_product().value;
    if product <= 0.0 {
        return Err(Error::domain("detection chain product must be positive".to_string()));
    }
    let eta_cav = eta_total / product;
    if eta_cav > 1.0 + 1e-12 {
        return Err(Error::InconsistentInputs(format!(
            "total efficiency {eta_total} exceeds the detection product {product}"
        )));
    }
    Ok(eta_cav.min(1.0))
}

/// Per-mode loss-budget summary, serialized to JSON by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBudgetEntry {
    pub mode_order: usize,
    pub corrected_db: DbPair,
    pub inferred_db: DbPair,
    pub calculated_db: DbPair,
    pub eta_estimated: Uncertain,
    pub eta_calculated: f64,
    pub eta_cav_backout: f64,
}

/// A squeezing/anti-squeezing pair, carried in both units so every printed
/// dB value can be checked against its linear form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbPair {
    pub squeezing_db: f64,
    pub anti_squeezing_db: f64,
    pub squeezing_linear: f64,
    pub anti_squeezing_linear: f64,
}

impl DbPair {
    pub fn from_linear(squeezing: VarianceLinear, anti_squeezing: VarianceLinear) -> Self {
        DbPair {
            squeezing_db: squeezing.to_db().value(),
            anti_squeezing_db: anti_squeezing.to_db().value(),
            squeezing_linear: squeezing.value(),
            anti_squeezing_linear: anti_squeezing.value(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn chain(eta_hd: f64) -> DetectionChain {
        DetectionChain::new(
            Uncertain::new(0.97, 0.02),
            Uncertain::new(0.93, 0.05),
            Uncertain::new(eta_hd, 0.02),
        )
        .unwrap()
    }

    #[test]
    fn electronic_noise_correction() {
        let one = VarianceLinear::new(1.0).unwrap();
        let no_floor = VarianceLinear::new(1e-12).unwrap();
        assert_abs_diff_eq!(
            correct_electronic_noise(one, no_floor).unwrap().value(),
            1.0,
            epsilon = 1e-9
        );
        // floor 9.1 dB below QNL; raw chosen so the corrected value is -4.0 dB
        let floor = VarianceDb::new(-9.1).unwrap().to_linear();
        let raw = VarianceLinear::new(0.472_156).unwrap();
        let corrected = correct_electronic_noise(raw, floor).unwrap();
        assert_abs_diff_eq!(corrected.to_db().value(), -4.0, epsilon = 1e-4);
        // forward oracle: undo the correction and recover the raw value
        let forward = corrected.value() * (1.0 - floor.value()) + floor.value();
        assert_abs_diff_eq!(forward, raw.value(), epsilon = 1e-12);
        // raw at the floor is invalid, just above it collapses to zero optical noise
        assert!(correct_electronic_noise(floor, floor).is_err());
        let just_above = VarianceLinear::new(floor.value() + 1e-9).unwrap();
        assert!(correct_electronic_noise(just_above, floor).unwrap().value() < 1e-8);
    }

    #[test]
    fn chain_products() {
        let eta_cav = Uncertain::exact(0.89);
        let total_00 = chain(0.98).total(eta_cav);
        assert_abs_diff_eq!(total_00.value, 0.79, epsilon = 5e-3);
        let total_10 = chain(0.95).total(eta_cav);
        assert_abs_diff_eq!(total_10.value, 0.76, epsilon = 5e-3);
        let identity = DetectionChain::new(
            Uncertain::exact(1.0),
            Uncertain::exact(1.0),
            Uncertain::exact(1.0),
        )
        .unwrap();
        assert_abs_diff_eq!(identity.total(Uncertain::exact(1.0)).value, 1.0);
        assert_abs_diff_eq!(identity.total(Uncertain::exact(1.0)).sigma, 0.0);
    }

    #[test]
    fn chain_uncertainty_is_root_sum_square() {
        let c = chain(0.98);
        let total = c.detection_product();
        let rel = ((0.02_f64 / 0.97).powi(2) + (0.05_f64 / 0.93).powi(2)
            + (0.02_f64 / 0.98).powi(2))
        .sqrt();
        assert_abs_diff_eq!(total.sigma, total.value * rel, epsilon = 1e-12);
    }

    #[test]
    fn loss_maps_reference_points() {
        let eta = 0.97 * 0.93 * 0.98;
        let measured = VarianceDb::new(-4.0).unwrap().to_linear();
        let inferred = infer_source(measured, eta).unwrap();
        assert_abs_diff_eq!(inferred.to_db().value(), -5.0, epsilon = 0.05);
        let anti = VarianceDb::new(8.5).unwrap().to_linear();
        let inferred_anti = infer_source(anti, eta).unwrap();
        assert_abs_diff_eq!(inferred_anti.to_db().value(), 9.0, epsilon = 0.05);
        // lossless chain is the identity
        let v = VarianceLinear::new(0.37).unwrap();
        assert_abs_diff_eq!(apply_loss(v, 1.0).unwrap().value(), v.value());
        assert!(infer_source(VarianceLinear::new(0.01).unwrap(), 0.2).is_err());
        assert!(apply_loss(v, 0.0).is_err());
    }

    #[test]
    fn efficiency_from_spectrum_reference_points() {
        let floor = VarianceDb::new(-20.0).unwrap();
        let m = SqueezingMeasurement::new(
            0,
            VarianceDb::new(-4.0).unwrap(),
            VarianceDb::new(8.5).unwrap(),
            floor,
        )
        .unwrap();
        let eta = efficiency_from_spectrum(&m).unwrap();
        assert_abs_diff_eq!(eta, 0.67, epsilon = 0.01);
        assert_abs_diff_eq!(eta, 0.668_031, epsilon = 1e-5);
        let m10 = SqueezingMeasurement::new(
            1,
            VarianceDb::new(-2.6).unwrap(),
            VarianceDb::new(5.4).unwrap(),
            floor,
        )
        .unwrap();
        let eta10 = efficiency_from_spectrum(&m10).unwrap();
        assert_abs_diff_eq!(eta10, 0.551_065, epsilon = 1e-5);
        // the published 0.53 came from unrounded data; stay within its band
        assert_abs_diff_eq!(eta10, 0.53, epsilon = 0.03);
    }

    #[test]
    fn pure_state_has_unit_efficiency() {
        let v = 0.5_f64;
        let m = SqueezingMeasurement::new(
            0,
            VarianceLinear::new(v).unwrap().to_db(),
            VarianceLinear::new(1.0 / v).unwrap().to_db(),
            VarianceDb::new(-30.0).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(efficiency_from_spectrum(&m).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn qnl_straddling_pair_is_indeterminate() {
        // linear variances summing to 2 carry no efficiency information
        let m = SqueezingMeasurement::new(
            0,
            VarianceLinear::new(0.9).unwrap().to_db(),
            VarianceLinear::new(1.1).unwrap().to_db(),
            VarianceDb::new(-30.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            efficiency_from_spectrum(&m),
            Err(Error::InvalidMeasurement(_))
        ));
    }

    #[test]
    fn unphysical_pair_is_rejected() {
        // below the pure-state hyperbola: V_asq < 1/V_sq
        let m = SqueezingMeasurement::new(
            0,
            VarianceLinear::new(0.1).unwrap().to_db(),
            VarianceLinear::new(1.5).unwrap().to_db(),
            VarianceDb::new(-30.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            efficiency_from_spectrum(&m),
            Err(Error::InconsistentInputs(_))
        ));
    }

    #[test]
    fn measurement_invariants() {
        let floor = VarianceDb::new(-9.1).unwrap();
        assert!(SqueezingMeasurement::new(
            0,
            VarianceDb::new(0.5).unwrap(),
            VarianceDb::new(8.5).unwrap(),
            floor
        )
        .is_err());
        assert!(SqueezingMeasurement::new(
            0,
            VarianceDb::new(-9.5).unwrap(),
            VarianceDb::new(8.5).unwrap(),
            floor
        )
        .is_err());
    }

    #[test]
    fn cavity_backout_reference_points() {
        let eta_cav = back_out_cavity_escape(0.67, &chain(0.98)).unwrap();
        assert_abs_diff_eq!(eta_cav, 0.76, epsilon = 0.005);
        let eta_cav_10 = back_out_cavity_escape(0.53, &chain(0.95)).unwrap();
        assert_abs_diff_eq!(eta_cav_10, 0.62, epsilon = 0.005);
        // total equal to the chain product leaves no cavity deficit
        let c = chain(0.98);
        assert_abs_diff_eq!(
            back_out_cavity_escape(c.detection_product().value, &c).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert!(back_out_cavity_escape(0.95, &c).is_err());
    }

    proptest! {
        #[test]
        fn loss_maps_are_inverse(v in 0.01_f64..20.0, eta in 0.05_f64..=1.0) {
            let v = VarianceLinear::new(v).unwrap();
            let there = apply_loss(v, eta).unwrap();
            let back = infer_source(there, eta).unwrap();
            prop_assert!((back.value() - v.value()).abs() < 1e-12 * v.value().max(1.0));
        }

        #[test]
        fn loss_contracts_toward_qnl(v in 0.01_f64..20.0, eta in 0.05_f64..=1.0) {
            let v0 = VarianceLinear::new(v).unwrap();
            let mapped = apply_loss(v0, eta).unwrap();
            prop_assert!(((mapped.value() - 1.0).abs() - eta * (v - 1.0).abs()).abs() < 1e-12);
        }

        #[test]
        fn spectrum_inversion_recovers_efficiency(v in 0.05_f64..0.95, eta in 0.05_f64..=1.0) {
            let sq = apply_loss(VarianceLinear::new(v).unwrap(), eta).unwrap();
            let asq = apply_loss(VarianceLinear::new(1.0 / v).unwrap(), eta).unwrap();
            let m = SqueezingMeasurement::new(
                0,
                sq.to_db(),
                asq.to_db(),
                VarianceDb::new(-60.0).unwrap(),
            ).unwrap();
            let recovered = efficiency_from_spectrum(&m).unwrap();
            prop_assert!((recovered - eta).abs() < 1e-10);
        }
    }
}
