//! Experiment configuration: a flat `key = value` text format with `#`
//! comments. Unset keys fall back to the published experiment's values, so
//! an empty file reproduces the reference setup.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detection::{DetectionChain, Uncertain};
use crate::error::{Error, Result};
use crate::opa::{OpaParams, PhaseMatchSpec};

/// Number of transverse modes the experiment tracks (TEM_00, TEM_10, TEM_20).
pub const MODE_COUNT: usize = 3;

/// Display labels for the tracked modes.
pub const MODE_LABELS: [&str; MODE_COUNT] = ["tem00", "tem10", "tem20"];

/// All tunable constants of the modeled experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Signal-cavity waist, micrometers.
    pub signal_waist_um: f64,
    /// Output-coupler transmittance at 1064 nm.
    pub output_coupler_t: f64,
    /// Intra-cavity loss per round trip.
    pub intracavity_loss: f64,
    /// Cavity escape efficiency used for table reproduction. The published
    /// value (0.89) sits slightly below T/(T+L) = 0.903 from the two fields
    /// above; both are kept so neither is silently re-derived.
    pub eta_cav: f64,
    /// Oscillation threshold per mode, mW. The fundamental value is
    /// measured; the higher-order values are the slope-fit estimates.
    pub threshold_mw: [f64; MODE_COUNT],
    /// Pump power used for squeezing per mode, mW.
    pub pump_mw: [f64; MODE_COUNT],
    /// Pump power above which the fundamental mode starts to oscillate
    /// regardless of the locked mode, mW.
    pub pump_cap_mw: f64,
    /// Optimal phase-matching temperature per mode, deg C.
    pub phase_match_c: [f64; MODE_COUNT],
    /// FWHM of the gain excess over temperature, deg C.
    pub phase_match_fwhm_c: f64,
    pub eta_prop: f64,
    pub eta_prop_err: f64,
    pub eta_det: f64,
    pub eta_det_err: f64,
    /// Homodyne efficiency per mode.
    pub eta_hd: [f64; MODE_COUNT],
    pub eta_hd_err: f64,
    /// Electronic noise floor relative to the QNL, dB (negative).
    pub electronic_floor_db: f64,
    pub electronic_floor_err_db: f64,
    /// Measured squeezing per mode, dB (negative), already corrected for
    /// electronic noise.
    pub squeezing_db: [f64; MODE_COUNT],
    /// Measured anti-squeezing per mode, dB (positive), corrected likewise.
    pub anti_squeezing_db: [f64; MODE_COUNT],
    /// Number of low-power samples used by the slope-ratio threshold fit.
    pub fit_points: usize,
    /// Default maximum signal order for overlap tables.
    pub max_order: usize,
    /// Gauss-Hermite node count.
    pub quad_nodes: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            signal_waist_um: 24.0,
            output_coupler_t: 0.04,
            intracavity_loss: 0.0043,
            eta_cav: 0.89,
            threshold_mw: [260.0, 1000.0, 1600.0],
            pump_mw: [100.0, 300.0, 300.0],
            pump_cap_mw: 350.0,
            phase_match_c: [62.1, 61.6, 60.6],
            phase_match_fwhm_c: 1.0,
            eta_prop: 0.97,
            eta_prop_err: 0.02,
            eta_det: 0.93,
            eta_det_err: 0.05,
            eta_hd: [0.98, 0.95, 0.91],
            eta_hd_err: 0.02,
            electronic_floor_db: -9.1,
            electronic_floor_err_db: 0.1,
            squeezing_db: [-4.0, -2.6, -1.5],
            anti_squeezing_db: [8.5, 5.4, 2.7],
            fit_points: 3,
            max_order: 2,
            quad_nodes: 128,
        }
    }
}

impl ExperimentConfig {
    /// Cavity parameters for the given mode's pump power.
    pub fn opa_params(&self, mode: usize) -> OpaParams {
        OpaParams {
            output_coupler_t: self.output_coupler_t,
            intracavity_loss: self.intracavity_loss,
            threshold_mw_00: self.threshold_mw[0],
            pump_mw: self.pump_mw[mode],
        }
    }

    /// Pump power over that mode's threshold.
    pub fn pump_ratio(&self, mode: usize) -> f64 {
        self.pump_mw[mode] / self.threshold_mw[mode]
    }

    pub fn phase_match_spec(&self, mode: usize) -> PhaseMatchSpec {
        PhaseMatchSpec {
            t_opt_c: self.phase_match_c[mode],
            fwhm_c: self.phase_match_fwhm_c,
        }
    }

    pub fn detection_chain(&self, mode: usize) -> Result<DetectionChain> {
        DetectionChain::new(
            Uncertain::new(self.eta_prop, self.eta_prop_err),
            Uncertain::new(self.eta_det, self.eta_det_err),
            Uncertain::new(self.eta_hd[mode], self.eta_hd_err),
        )
    }

    fn validate_key(&self, key: &str, line: usize) -> Result<()> {
        let fraction = |name: &str, v: f64| -> Result<()> {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config {
                    key: name.to_string(),
                    line,
                    reason: format!("must be in (0, 1], got {v}"),
                });
            }
            Ok(())
        };
        let positive = |name: &str, v: f64| -> Result<()> {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config {
                    key: name.to_string(),
                    line,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
            Ok(())
        };
        match key {
            "signal_waist_um" => positive(key, self.signal_waist_um),
            "output_coupler_t" => fraction(key, self.output_coupler_t),
            "intracavity_loss" => {
                if !(0.0..1.0).contains(&self.intracavity_loss) {
                    return Err(Error::Config {
                        key: key.to_string(),
                        line,
                        reason: format!("must be in [0, 1), got {}", self.intracavity_loss),
                    });
                }
                Ok(())
            }
            "eta_cav" => fraction(key, self.eta_cav),
            "threshold_mw_00" => positive(key, self.threshold_mw[0]),
            "threshold_mw_10" => positive(key, self.threshold_mw[1]),
            "threshold_mw_20" => positive(key, self.threshold_mw[2]),
            "pump_mw_00" | "pump_mw_10" | "pump_mw_20" => {
                let v = match key {
                    "pump_mw_00" => self.pump_mw[0],
                    "pump_mw_10" => self.pump_mw[1],
                    _ => self.pump_mw[2],
                };
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::Config {
                        key: key.to_string(),
                        line,
                        reason: format!("must be non-negative and finite, got {v}"),
                    });
                }
                Ok(())
            }
            "pump_cap_mw" => positive(key, self.pump_cap_mw),
            "phase_match_c_00" => positive(key, self.phase_match_c[0]),
            "phase_match_c_10" => positive(key, self.phase_match_c[1]),
            "phase_match_c_20" => positive(key, self.phase_match_c[2]),
            "phase_match_fwhm_c" => positive(key, self.phase_match_fwhm_c),
            "eta_prop" => fraction(key, self.eta_prop),
            "eta_det" => fraction(key, self.eta_det),
            "eta_hd_00" => fraction(key, self.eta_hd[0]),
            "eta_hd_10" => fraction(key, self.eta_hd[1]),
            "eta_hd_20" => fraction(key, self.eta_hd[2]),
            "eta_prop_err" | "eta_det_err" | "eta_hd_err" | "electronic_floor_err_db" => Ok(()),
            "electronic_floor_db" => {
                if self.electronic_floor_db >= 0.0 {
                    return Err(Error::Config {
                        key: key.to_string(),
                        line,
                        reason: format!(
                            "must sit below the QNL (negative dB), got {}",
                            self.electronic_floor_db
                        ),
                    });
                }
                Ok(())
            }
            k if k.starts_with("squeezing_db_") => {
                let idx = mode_suffix_index(k)?;
                if self.squeezing_db[idx] >= 0.0 {
                    return Err(Error::Config {
                        key: key.to_string(),
                        line,
                        reason: format!("squeezing must be negative dB, got {}", self.squeezing_db[idx]),
                    });
                }
                Ok(())
            }
            k if k.starts_with("anti_squeezing_db_") => {
                let idx = mode_suffix_index(k)?;
                if self.anti_squeezing_db[idx] <= 0.0 {
                    return Err(Error::Config {
                        key: key.to_string(),
                        line,
                        reason: format!(
                            "anti-squeezing must be positive dB, got {}",
                            self.anti_squeezing_db[idx]
                        ),
                    });
                }
                Ok(())
            }
            "fit_points" => {
                if self.fit_points < 2 {
                    return Err(Error::Config {
                        key: key.to_string(),
                        line,
                        reason: "needs at least 2 points".to_string(),
                    });
                }
                Ok(())
            }
            "max_order" => Ok(()),
            "quad_nodes" => {
                if !(crate::quadrature::MIN_SPEC_NODES..=crate::quadrature::MAX_NODES)
                    .contains(&self.quad_nodes)
                {
                    return Err(Error::Config {
                        key: key.to_string(),
                        line,
                        reason: format!(
                            "must be in [{}, {}], got {}",
                            crate::quadrature::MIN_SPEC_NODES,
                            crate::quadrature::MAX_NODES,
                            self.quad_nodes
                        ),
                    });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn set(&mut self, key: &str, raw: &str, line: usize) -> Result<()> {
        let f = || -> Result<f64> {
            raw.parse::<f64>().map_err(|_| Error::Config {
                key: key.to_string(),
                line,
                reason: format!("cannot parse `{raw}` as a number"),
            })
        };
        let u = || -> Result<usize> {
            raw.parse::<usize>().map_err(|_| Error::Config {
                key: key.to_string(),
                line,
                reason: format!("cannot parse `{raw}` as a non-negative integer"),
            })
        };
        match key {
            "signal_waist_um" => self.signal_waist_um = f()?,
            "output_coupler_t" => self.output_coupler_t = f()?,
            "intracavity_loss" => self.intracavity_loss = f()?,
            "eta_cav" => self.eta_cav = f()?,
            "threshold_mw_00" => self.threshold_mw[0] = f()?,
            "threshold_mw_10" => self.threshold_mw[1] = f()?,
            "threshold_mw_20" => self.threshold_mw[2] = f()?,
            "pump_mw_00" => self.pump_mw[0] = f()?,
            "pump_mw_10" => self.pump_mw[1] = f()?,
            "pump_mw_20" => self.pump_mw[2] = f()?,
            "pump_cap_mw" => self.pump_cap_mw = f()?,
            "phase_match_c_00" => self.phase_match_c[0] = f()?,
            "phase_match_c_10" => self.phase_match_c[1] = f()?,
            "phase_match_c_20" => self.phase_match_c[2] = f()?,
            "phase_match_fwhm_c" => self.phase_match_fwhm_c = f()?,
            "eta_prop" => self.eta_prop = f()?,
            "eta_prop_err" => self.eta_prop_err = f()?,
            "eta_det" => self.eta_det = f()?,
            "eta_det_err" => self.eta_det_err = f()?,
            "eta_hd_00" => self.eta_hd[0] = f()?,
            "eta_hd_10" => self.eta_hd[1] = f()?,
            "eta_hd_20" => self.eta_hd[2] = f()?,
            "eta_hd_err" => self.eta_hd_err = f()?,
            "electronic_floor_db" => self.electronic_floor_db = f()?,
            "electronic_floor_err_db" => self.electronic_floor_err_db = f()?,
            "squeezing_db_00" => self.squeezing_db[0] = f()?,
            "squeezing_db_10" => self.squeezing_db[1] = f()?,
            "squeezing_db_20" => self.squeezing_db[2] = f()?,
            "anti_squeezing_db_00" => self.anti_squeezing_db[0] = f()?,
            "anti_squeezing_db_10" => self.anti_squeezing_db[1] = f()?,
            "anti_squeezing_db_20" => self.anti_squeezing_db[2] = f()?,
            "fit_points" => self.fit_points = u()?,
            "max_order" => self.max_order = u()?,
            "quad_nodes" => self.quad_nodes = u()?,
            _ => {
                return Err(Error::Config {
                    key: key.to_string(),
                    line,
                    reason: "unknown key".to_string(),
                })
            }
        }
        self.validate_key(key, line)
    }

    /// Serializes back to the flat `key = value` format, in a fixed key
    /// order so the output is stable byte for byte.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("signal_waist_um", self.signal_waist_um.to_string());
        kv("output_coupler_t", self.output_coupler_t.to_string());
        kv("intracavity_loss", self.intracavity_loss.to_string());
        kv("eta_cav", self.eta_cav.to_string());
        for (i, suffix) in ["00", "10", "20"].iter().enumerate() {
            kv(&format!("threshold_mw_{suffix}"), self.threshold_mw[i].to_string());
        }
        for (i, suffix) in ["00", "10", "20"].iter().enumerate() {
            kv(&format!("pump_mw_{suffix}"), self.pump_mw[i].to_string());
        }
        kv("pump_cap_mw", self.pump_cap_mw.to_string());
        for (i, suffix) in ["00", "10", "20"].iter().enumerate() {
            kv(&format!("phase_match_c_{suffix}"), self.phase_match_c[i].to_string());
        }
        kv("phase_match_fwhm_c", self.phase_match_fwhm_c.to_string());
        kv("eta_prop", self.eta_prop.to_string());
        kv("eta_prop_err", self.eta_prop_err.to_string());
        kv("eta_det", self.eta_det.to_string());
        kv("eta_det_err", self.eta_det_err.to_string());
        for (i, suffix) in ["00", "10", "20"].iter().enumerate() {
            kv(&format!("eta_hd_{suffix}"), self.eta_hd[i].to_string());
        }
        kv("eta_hd_err", self.eta_hd_err.to_string());
        kv("electronic_floor_db", self.electronic_floor_db.to_string());
        kv(
            "electronic_floor_err_db",
            self.electronic_floor_err_db.to_string(),
        );
        for (i, suffix) in ["00", "10", "20"].iter().enumerate() {
            kv(&format!("squeezing_db_{suffix}"), self.squeezing_db[i].to_string());
        }
        for (i, suffix) in ["00", "10", "20"].iter().enumerate() {
            kv(
                &format!("anti_squeezing_db_{suffix}"),
                self.anti_squeezing_db[i].to_string(),
            );
        }
        kv("fit_points", self.fit_points.to_string());
        kv("max_order", self.max_order.to_string());
        kv("quad_nodes", self.quad_nodes.to_string());
        out
    }
}

fn mode_suffix_index(key: &str) -> Result<usize> {
    match key.rsplit('_').next() {
        Some("00") => Ok(0),
        Some("10") => Ok(1),
        Some("20") => Ok(2),
        _ => Err(Error::Config {
            key: key.to_string(),
            line: 0,
            reason: "unknown mode suffix".to_string(),
        }),
    }
}

/// Parses the flat `key = value` format. Later assignments win; every key is
/// validated with its line number as it is applied.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config {
                key: line.to_string(),
                line: line_no,
                reason: "expected `key = value`".to_string(),
            });
        };
        config.set(key.trim(), value.trim(), line_no)?;
    }
    // Cross-field invariants that no single key can decide.
    for mode in 0..MODE_COUNT {
        if config.electronic_floor_db >= config.squeezing_db[mode] {
            return Err(Error::Config {
                key: format!("squeezing_db_{}0", mode),
                line: 0,
                reason: format!(
                    "electronic floor {} dB must sit below the squeezing level {} dB",
                    config.electronic_floor_db, config.squeezing_db[mode]
                ),
            });
        }
    }
    Ok(config)
}

/// Loads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}
