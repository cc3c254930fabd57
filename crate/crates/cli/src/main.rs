//! Command-line interface: reproduces the overlap, threshold, gain and
//! squeezing tables of the modeled experiment and analyzes measured data.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hgopa::{Error, ExperimentConfig, FitMethod};
use hgopa_cli::commands::{self, FitRequest, GainData};
use hgopa_cli::report::Series;
use hgopa_cli::text;

#[derive(Parser)]
#[command(name = "hgopa", version, about = "Hermite-Gauss mode OPA toolkit")]
struct Cli {
    /// Configuration file (key = value); defaults reproduce the reference
    /// experiment.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the command's result as JSON to this path.
    #[arg(long, global = true)]
    json: Option<PathBuf>,

    /// Directory for emitted CSV series.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Highest signal order for overlap tables and reports.
    #[arg(long, global = true)]
    max_order: Option<usize>,

    /// Number of low-power points used by slope fits.
    #[arg(long, global = true)]
    fit_points: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute alpha_n and Gamma_ni overlap tables.
    Overlap,
    /// Relative oscillation thresholds: theory, plus fits of measured
    /// gain curves when supplied.
    Threshold {
        /// TEM00 reference gain curve (pump_mw,gain).
        #[arg(long)]
        csv_00: Option<PathBuf>,
        /// TEM10 gain curve.
        #[arg(long)]
        csv_10: Option<PathBuf>,
        /// TEM20 gain curve.
        #[arg(long)]
        csv_20: Option<PathBuf>,
        /// Directory holding gain_temN0.csv (or fig3_gain_temN0.csv) files.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Squeezing tables: corrected, inferred and calculated variances,
    /// efficiency budget and local-oscillator phase scans.
    Squeeze,
    /// Classical gain versus crystal temperature and pump power.
    Gain,
    /// Fit the oscillation threshold of one measured gain curve.
    Fit {
        /// Gain curve to fit (pump_mw,gain).
        #[arg(long)]
        csv: PathBuf,
        /// model-fit (default) or slope-ratio.
        #[arg(long, default_value = "model-fit")]
        method: String,
        /// Reference curve for the slope-ratio method.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Threshold of the reference curve in mW (fitted from the
        /// reference itself when omitted).
        #[arg(long)]
        reference_threshold: Option<f64>,
    },
    /// Emit every table and series as one JSON bundle.
    Report {
        /// Directory with measured gain curves.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> hgopa::Result<()> {
    let mut body = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Domain(format!("serialization failed: {e}")))?;
    body.push('\n');
    std::fs::write(path, body)?;
    Ok(())
}

fn write_series(out_dir: &Path, series: &[Series]) -> hgopa::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    for s in series {
        std::fs::write(out_dir.join(format!("{}.csv", s.label)), s.to_csv())?;
    }
    Ok(())
}

fn run(cli: &Cli) -> hgopa::Result<()> {
    let mut config = match &cli.config {
        Some(path) => hgopa::load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(order) = cli.max_order {
        config.max_order = order;
    }
    if let Some(points) = cli.fit_points {
        if points < 2 {
            return Err(Error::Domain(format!(
                "--fit-points needs at least 2 points, got {points}"
            )));
        }
        config.fit_points = points;
    }

    match &cli.command {
        Command::Overlap => {
            let table = commands::cmd_overlap(&config, config.max_order)?;
            print!("{}", text::overlap_text(&table));
            if let Some(path) = &cli.json {
                write_json(path, &table)?;
            }
        }
        Command::Threshold {
            csv_00,
            csv_10,
            csv_20,
            data_dir,
        } => {
            let mut data = match data_dir {
                Some(dir) => GainData::discover(dir),
                None => GainData::default(),
            };
            for (slot, path) in [(0, csv_00), (1, csv_10), (2, csv_20)] {
                if let Some(p) = path {
                    data.paths[slot] = Some(p.clone());
                }
            }
            let table = commands::cmd_threshold(&config, &data)?;
            print!("{}", text::threshold_text(&table));
            if let Some(path) = &cli.json {
                write_json(path, &table)?;
            }
        }
        Command::Squeeze => {
            let output = commands::cmd_squeeze(&config)?;
            print!("{}", text::squeeze_text(&output));
            if let Some(dir) = &cli.out_dir {
                write_series(dir, &output.phase_scans)?;
            }
            if let Some(path) = &cli.json {
                write_json(path, &output)?;
            }
        }
        Command::Gain => {
            let output = commands::cmd_gain(&config)?;
            print!("{}", text::gain_text(&output));
            if let Some(dir) = &cli.out_dir {
                write_series(dir, &output.temperature_series)?;
                write_series(dir, &output.pump_series)?;
            }
            if let Some(path) = &cli.json {
                write_json(path, &output)?;
            }
        }
        Command::Fit {
            csv,
            method,
            reference,
            reference_threshold,
        } => {
            let method = match method.as_str() {
                "model-fit" => FitMethod::ModelFit,
                "slope-ratio" => FitMethod::SlopeRatio,
                other => {
                    return Err(Error::Domain(format!(
                        "unknown fit method `{other}` (expected model-fit or slope-ratio)"
                    )))
                }
            };
            let request = FitRequest {
                csv: csv.clone(),
                method,
                reference_csv: reference.clone(),
                reference_threshold_mw: *reference_threshold,
                fit_points: config.fit_points,
            };
            let result = commands::cmd_fit(&request)?;
            print!("{}", text::fit_text(&result));
            if let Some(path) = &cli.json {
                write_json(path, &result)?;
            }
        }
        Command::Report { data_dir } => {
            let bundle = commands::cmd_report(&config, config.max_order, data_dir.as_deref())?;
            if let Some(dir) = &cli.out_dir {
                write_series(dir, &bundle.phase_scans)?;
                write_series(dir, &bundle.gain_vs_temperature)?;
                write_series(dir, &bundle.gain_vs_pump)?;
            }
            match &cli.json {
                Some(path) => write_json(path, &bundle)?,
                None => {
                    let body = serde_json::to_string_pretty(&bundle)
                        .map_err(|e| Error::Domain(format!("serialization failed: {e}")))?;
                    println!("{body}");
                }
            }
        }
    }
    Ok(())
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Domain(_) => 2,
        Error::Config { .. }
        | Error::Csv { .. }
        | Error::Io(_)
        | Error::InvalidMeasurement(_)
        | Error::InconsistentInputs(_) => 3,
        Error::Quadrature(_) | Error::Divergence(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}
