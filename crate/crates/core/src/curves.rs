//! CSV ingestion for measured gain curves and squeezing traces.
//!
//! Gain files carry the header `pump_mw,gain`; trace files carry
//! `sample,variance_db` with an optional third `trace_id` column for
//! multi-trace recordings. All files are UTF-8 with LF line endings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A measured classical-gain curve: (pump power mW, gain) samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainCurve {
    pub samples: Vec<(f64, f64)>,
    /// Transverse order of the mode the cavity was locked to, when known.
    pub mode_order: Option<usize>,
    /// Set when the input rows were not sorted by pump power and the loader
    /// had to canonicalize them.
    pub sorted_on_load: bool,
}

impl GainCurve {
    pub fn new(samples: Vec<(f64, f64)>, mode_order: Option<usize>) -> Result<Self> {
        let curve = GainCurve {
            samples,
            mode_order,
            sorted_on_load: false,
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::Csv {
                line: 0,
                reason: "gain curve has no samples".to_string(),
            });
        }
        for (i, &(p, g)) in self.samples.iter().enumerate() {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::Csv {
                    line: i + 2,
                    reason: format!("pump power must be finite and non-negative, got {p}"),
                });
            }
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::Csv {
                    line: i + 2,
                    reason: format!("gain must be positive and finite, got {g}"),
                });
            }
            if i > 0 && p <= self.samples[i - 1].0 {
                return Err(Error::Csv {
                    line: i + 2,
                    reason: format!(
                        "pump powers must be strictly increasing ({} after {})",
                        p,
                        self.samples[i - 1].0
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn max_power(&self) -> f64 {
        self.samples.last().map(|&(p, _)| p).unwrap_or(0.0)
    }

    /// Renders back to the canonical CSV text.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pump_mw,gain\n");
        for &(p, g) in &self.samples {
            out.push_str(&format!("{p},{g}\n"));
        }
        out
    }
}

/// One trace of a squeezing recording (e.g. a local-oscillator phase scan).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    pub trace_id: Option<String>,
    pub samples: Vec<(f64, f64)>,
}

fn parse_cell(cell: &str, line: usize, what: &str) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| Error::Csv {
        line,
        reason: format!("cannot parse {what} `{}` as a number", cell.trim()),
    })
}

/// Parses gain-curve CSV text. Unsorted rows are sorted and flagged;
/// duplicate powers, non-numeric cells, bad headers and empty bodies are
/// errors.
pub fn parse_gain_csv(text: &str) -> Result<GainCurve> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((i, l)) => break (i + 1, l.trim()),
            None => {
                return Err(Error::Csv {
                    line: 0,
                    reason: "empty file".to_string(),
                })
            }
        }
    };
    if header.1 != "pump_mw,gain" {
        return Err(Error::Csv {
            line: header.0,
            reason: format!("expected header `pump_mw,gain`, got `{}`", header.1),
        });
    }
    let mut samples = Vec::new();
    for (i, raw) in lines {
        let line_no = i + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let mut cells = row.split(',');
        let p = parse_cell(cells.next().unwrap_or(""), line_no, "pump power")?;
        let g = parse_cell(
            cells.next().ok_or(Error::Csv {
                line: line_no,
                reason: "missing gain column".to_string(),
            })?,
            line_no,
            "gain",
        )?;
        if cells.next().is_some() {
            return Err(Error::Csv {
                line: line_no,
                reason: "too many columns for a gain row".to_string(),
            });
        }
        samples.push((p, g));
    }
    if samples.is_empty() {
        return Err(Error::Csv {
            line: header.0,
            reason: "no data rows".to_string(),
        });
    }
    let sorted = samples.windows(2).all(|w| w[0].0 < w[1].0);
    if !sorted {
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    }
    let curve = GainCurve {
        samples,
        mode_order: None,
        sorted_on_load: !sorted,
    };
    curve.validate()?;
    Ok(curve)
}

/// Loads a gain-curve CSV from disk.
pub fn load_gain_csv(path: impl AsRef<Path>) -> Result<GainCurve> {
    parse_gain_csv(&std::fs::read_to_string(path)?)
}

/// Parses trace CSV text into per-id series, preserving first-seen order.
pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceSeries>> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((i, l)) => break (i + 1, l.trim()),
            None => {
                return Err(Error::Csv {
                    line: 0,
                    reason: "empty file".to_string(),
                })
            }
        }
    };
    let with_id = match header.1 {
        "sample,variance_db" => false,
        "sample,variance_db,trace_id" => true,
        other => {
            return Err(Error::Csv {
                line: header.0,
                reason: format!(
                    "expected header `sample,variance_db[,trace_id]`, got `{other}`"
                ),
            })
        }
    };
    let mut traces: Vec<TraceSeries> = Vec::new();
    for (i, raw) in lines {
        let line_no = i + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let cells: Vec<&str> = row.split(',').collect();
        let expected = if with_id { 3 } else { 2 };
        if cells.len() != expected {
            return Err(Error::Csv {
                line: line_no,
                reason: format!("expected {expected} columns, got {}", cells.len()),
            });
        }
        let sample = parse_cell(cells[0], line_no, "sample")?;
        let variance = parse_cell(cells[1], line_no, "variance")?;
        let id = with_id.then(|| cells[2].trim().to_string());
        match traces.iter_mut().find(|t| t.trace_id == id) {
            Some(t) => t.samples.push((sample, variance)),
            None => traces.push(TraceSeries {
                trace_id: id,
                samples: vec![(sample, variance)],
            }),
        }
    }
    if traces.is_empty() {
        return Err(Error::Csv {
            line: header.0,
            reason: "no data rows".to_string(),
        });
    }
    Ok(traces)
}

/// Loads a trace CSV from disk.
pub fn load_trace_csv(path: impl AsRef<Path>) -> Result<Vec<TraceSeries>> {
    parse_trace_csv(&std::fs::read_to_string(path)?)
}
