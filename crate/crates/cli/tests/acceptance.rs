//! Acceptance suite: one test per exit criterion, each printing a
//! `criterion N: PASS/FAIL` line with the measured numbers (run with
//! `cargo test --test acceptance -- --nocapture` to see the lines for
//! passing criteria too).
//!
//! Criteria 2 and 5 encode published-table tolerances that the exact model
//! cannot meet (the theoretical TEM20 threshold is exactly 64/9 = 7.111,
//! and the published "calculated" anti-squeezing column was produced with
//! pump ratios the text does not state). They are asserted as specified
//! and fail honestly; the measured numbers are printed alongside.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};

use hgopa::{
    alpha, apply_loss, back_out_cavity_escape, classical_gain, efficiency_from_spectrum,
    fit_threshold, gamma, infer_source, misaligned_seed_decomposition, relative_threshold,
    squeezing_variance, BeamGeometry, ExperimentConfig, FitMethod, GainCurve, GainPhase,
    OverlapTable, PumpProfile, QuadratureSign, QuadratureSpec, SeedMisalignment,
    SqueezingMeasurement, Uncertain, VarianceDb, VarianceLinear,
};
use hgopa_cli::commands;

struct Gate {
    criterion: &'static str,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Gate {
    fn new(criterion: &'static str) -> Self {
        Gate {
            criterion,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        if ok {
            self.notes.push(detail);
        } else {
            self.failures.push(detail);
        }
    }

    fn within(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.check(
            (got - want).abs() <= tol,
            format!("{what}: got {got:.6}, want {want} +- {tol}"),
        );
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("{}: PASS ({} checks)", self.criterion, self.notes.len());
        } else {
            println!("{}: FAIL", self.criterion);
            for f in &self.failures {
                println!("  failed: {f}");
            }
        }
        assert!(
            self.failures.is_empty(),
            "{} failed:\n{}",
            self.criterion,
            self.failures.join("\n")
        );
    }
}

fn geometry() -> BeamGeometry {
    BeamGeometry::signal(24.0).unwrap()
}

fn table(max_order: usize) -> OverlapTable {
    OverlapTable::compute(max_order, &geometry(), &QuadratureSpec::default()).unwrap()
}

fn digitized(name: &str) -> GainCurve {
    let path = Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/digitized")).join(name);
    hgopa::load_gain_csv(path).unwrap()
}

#[test]
fn criterion_01_overlap_coefficients() {
    let mut gate = Gate::new("criterion 1 (overlap coefficients)");
    let start = Instant::now();
    let table = table(6);
    gate.within("Gamma_10", table.gamma(1, 0).unwrap(), 0.58, 0.01);
    gate.within("Gamma_12", table.gamma(1, 1).unwrap(), 0.82, 0.01);
    gate.within("Gamma_20", table.gamma(2, 0).unwrap(), 0.47, 0.01);
    gate.within("Gamma_22", table.gamma(2, 1).unwrap(), 0.44, 0.01);
    gate.within("Gamma_24", table.gamma(2, 2).unwrap(), 0.77, 0.01);
    for n in 0..=6 {
        let sum: f64 = (0..=n).map(|i| table.gamma(n, i).unwrap().powi(2)).sum();
        gate.check(
            (sum - 1.0).abs() < 1e-8,
            format!("completeness n={n}: sum Gamma^2 = {sum:.12}"),
        );
    }
    let elapsed = start.elapsed();
    gate.check(
        elapsed.as_secs_f64() < 1.0,
        format!("runtime {elapsed:?} < 1 s"),
    );
    gate.finish();
}

#[test]
fn criterion_02_threshold_theory() {
    let mut gate = Gate::new("criterion 2 (threshold theory)");
    let table = table(4);
    let geometry = geometry();
    let spec = QuadratureSpec::default();
    let v0 = PumpProfile::fundamental();
    let rt: Vec<f64> = (0..3)
        .map(|n| relative_threshold(n, &v0, &table).unwrap().finite().unwrap())
        .collect();
    gate.within("relative threshold n=0", rt[0], 1.0, 1e-10);
    gate.within("relative threshold n=1", rt[1], 4.00, 0.02);
    // Exact value is (64/41)*(41/9) = 64/9 = 7.111; the required band
    // around the rounded reference value "7" excludes it by 0.011.
    gate.within("relative threshold n=2", rt[2], 7.0, 0.1);

    let g10 = gamma(1, 0, &geometry, &spec).unwrap();
    let g20 = gamma(2, 0, &geometry, &spec).unwrap();
    gate.within("overlap factor 1/Gamma_10^2", 1.0 / (g10 * g10), 3.0, 0.1);
    gate.within("overlap factor 1/Gamma_20^2", 1.0 / (g20 * g20), 4.5, 0.1);
    let a0 = alpha(0, &geometry, &spec).unwrap();
    let a1 = alpha(1, &geometry, &spec).unwrap();
    let a2 = alpha(2, &geometry, &spec).unwrap();
    gate.within("intensity factor (a0/a1)^2", (a0 / a1).powi(2), 1.333, 0.001);
    gate.within("intensity factor (a0/a2)^2", (a0 / a2).powi(2), 1.561, 0.001);
    gate.finish();
}

#[test]
fn criterion_03_threshold_fitting() {
    let mut gate = Gate::new("criterion 3 (threshold fitting)");
    // noiseless synthetic curves from the gain model
    for &threshold in &[260.0, 1000.0, 1600.0] {
        let samples: Vec<(f64, f64)> = (1..=8)
            .map(|i| {
                let p = 0.85 * threshold * i as f64 / 8.0;
                (p, 1.0 / (1.0 - (p / threshold).sqrt()).powi(2))
            })
            .collect();
        let curve = GainCurve::new(samples, None).unwrap();
        let fit = fit_threshold(&curve, FitMethod::ModelFit, None, 3).unwrap();
        gate.check(
            (fit.threshold_mw - threshold).abs() / threshold < 1e-3,
            format!(
                "noiseless recovery: {:.4} mW for true {threshold} mW",
                fit.threshold_mw
            ),
        );
    }
    // digitized curves against the published bands
    let reference = digitized("fig3_gain_tem00.csv");
    let fit00 = fit_threshold(&reference, FitMethod::ModelFit, None, 3).unwrap();
    let fit10 = fit_threshold(&digitized("fig3_gain_tem10.csv"), FitMethod::ModelFit, None, 3)
        .unwrap();
    let fit20 = fit_threshold(&digitized("fig3_gain_tem20.csv"), FitMethod::ModelFit, None, 3)
        .unwrap();
    gate.within(
        "digitized TEM10 relative threshold",
        fit10.threshold_mw / fit00.threshold_mw,
        3.9,
        0.5,
    );
    gate.within(
        "digitized TEM20 relative threshold",
        fit20.threshold_mw / fit00.threshold_mw,
        6.2,
        0.8,
    );
    gate.finish();
}

#[test]
fn criterion_04_deamplification_limit() {
    let mut gate = Gate::new("criterion 4 (de-amplification limit)");
    let g = classical_gain(1.0, GainPhase::Deamplify).unwrap();
    gate.check(g == 0.25, format!("G(P=Pthr, deamplify) = {g} (exact 0.25)"));
    gate.finish();
}

#[test]
fn criterion_05_squeezing_model() {
    let mut gate = Gate::new("criterion 5 (squeezing model vs published calculated row)");
    let eta_esc = 0.89;
    // Published calculated row; the pump ratios below are the stated ones.
    // The squeezing column lands within the band; the anti-squeezing column
    // sits ~1.1 dB above it for every mode, consistent with the documented
    // parameter ambiguity behind the published row.
    let cases = [
        (100.0 / 260.0, -7.6, 11.0, "tem00"),
        (300.0 / 1000.0, -6.8, 9.1, "tem10"),
        (300.0 / 1600.0, -5.4, 6.5, "tem20"),
    ];
    for (p, sq_db, asq_db, label) in cases {
        let vm = squeezing_variance(p, eta_esc, QuadratureSign::Minus).unwrap();
        let vp = squeezing_variance(p, eta_esc, QuadratureSign::Plus).unwrap();
        gate.within(
            &format!("{label} squeezing dB"),
            vm.to_db().value(),
            sq_db,
            0.8,
        );
        gate.within(
            &format!("{label} anti-squeezing dB"),
            vp.to_db().value(),
            asq_db,
            0.8,
        );
    }
    // lossless identity on a pump-ratio grid
    let mut worst = 0.0_f64;
    for k in 0..100 {
        let p = k as f64 / 100.0;
        let vm = squeezing_variance(p, 1.0, QuadratureSign::Minus).unwrap().value();
        let vp = squeezing_variance(p, 1.0, QuadratureSign::Plus).unwrap().value();
        worst = worst.max((vm * vp - 1.0).abs());
    }
    gate.check(
        worst < 1e-12,
        format!("lossless identity: max |V+V- - 1| = {worst:.3e}"),
    );
    gate.finish();
}

#[test]
#[allow(clippy::needless_range_loop)]
fn criterion_06_inference_chain() {
    let mut gate = Gate::new("criterion 6 (inference chain)");
    let config = ExperimentConfig::default();
    // published inferred row and total efficiencies
    let inferred_db = [(-5.1, 9.0), (-3.2, 5.9), (-1.9, 3.1)];
    let eta_totals = [0.79, 0.76, 0.73];
    for mode in 0..3 {
        let chain = config.detection_chain(mode).unwrap();
        let eta = chain.detection_product().value;
        let sq = VarianceDb::new(config.squeezing_db[mode]).unwrap().to_linear();
        let asq = VarianceDb::new(config.anti_squeezing_db[mode])
            .unwrap()
            .to_linear();
        let inf_sq = infer_source(sq, eta).unwrap().to_db().value();
        let inf_asq = infer_source(asq, eta).unwrap().to_db().value();
        gate.within(
            &format!("mode {mode} inferred squeezing dB"),
            inf_sq,
            inferred_db[mode].0,
            0.15,
        );
        gate.within(
            &format!("mode {mode} inferred anti-squeezing dB"),
            inf_asq,
            inferred_db[mode].1,
            0.15,
        );
        let total = chain.total(Uncertain::exact(config.eta_cav)).value;
        gate.within(
            &format!("mode {mode} eta_total"),
            total,
            eta_totals[mode],
            0.01,
        );
    }
    gate.finish();
}

#[test]
fn criterion_07_efficiency_inversion() {
    let mut gate = Gate::new("criterion 7 (efficiency inversion)");
    let floor = VarianceDb::new(-60.0).unwrap();
    let m = SqueezingMeasurement::new(
        0,
        VarianceDb::new(-4.0).unwrap(),
        VarianceDb::new(8.5).unwrap(),
        floor,
    )
    .unwrap();
    gate.within(
        "eta from (-4.0, +8.5) dB",
        efficiency_from_spectrum(&m).unwrap(),
        0.67,
        0.01,
    );
    let mut rng = rand::rngs::StdRng::seed_from_u64(42);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let v = rng.gen_range(0.05..0.95);
        let eta = rng.gen_range(0.05..1.0);
        let sq = apply_loss(VarianceLinear::new(v).unwrap(), eta).unwrap();
        let asq = apply_loss(VarianceLinear::new(1.0 / v).unwrap(), eta).unwrap();
        let m = SqueezingMeasurement::new(0, sq.to_db(), asq.to_db(), floor).unwrap();
        let recovered = efficiency_from_spectrum(&m).unwrap();
        worst = worst.max((recovered - eta).abs());
    }
    gate.check(
        worst < 1e-10,
        format!("round-trip over 1000 random states: max |eta' - eta| = {worst:.3e}"),
    );
    gate.finish();
}

#[test]
#[allow(clippy::needless_range_loop)]
fn criterion_08_cavity_backout() {
    let mut gate = Gate::new("criterion 8 (cavity escape back-out)");
    let config = ExperimentConfig::default();
    let published = [0.76, 0.62, 0.53];
    for mode in 0..3 {
        let chain = config.detection_chain(mode).unwrap();
        let m = SqueezingMeasurement::new(
            mode,
            VarianceDb::new(config.squeezing_db[mode]).unwrap(),
            VarianceDb::new(config.anti_squeezing_db[mode]).unwrap(),
            VarianceDb::new(config.electronic_floor_db).unwrap(),
        )
        .unwrap();
        let eta_calculated = efficiency_from_spectrum(&m).unwrap();
        let eta_cav = back_out_cavity_escape(eta_calculated, &chain).unwrap();
        gate.within(
            &format!("mode {mode} eta_cav"),
            eta_cav,
            published[mode],
            0.03,
        );
    }
    gate.finish();
}

#[test]
fn criterion_09_misaligned_seed() {
    let mut gate = Gate::new("criterion 9 (misaligned-seed decomposition)");
    let geometry = geometry();
    let spec = QuadratureSpec::default();
    let w0 = geometry.waist();
    for &frac in &[-0.5, -0.25, 0.1, 0.33, 0.5] {
        let m = SeedMisalignment::new(frac * w0, 0.0).unwrap();
        let coeffs = misaligned_seed_decomposition(&m, 20, &geometry, &spec).unwrap();
        let total: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        gate.check(
            (total - 1.0).abs() < 1e-6,
            format!("d = {frac} w0: sum |c_n|^2 = {total:.9}"),
        );
    }
    let aligned = SeedMisalignment::new(0.0, 0.0).unwrap();
    let coeffs = misaligned_seed_decomposition(&aligned, 20, &geometry, &spec).unwrap();
    gate.check(
        (coeffs[0].re - 1.0).abs() < 1e-10 && coeffs[0].im.abs() < 1e-12,
        format!("aligned seed: c_0 = {}", coeffs[0]),
    );
    let spurious = coeffs[1..]
        .iter()
        .map(|c| c.norm())
        .fold(0.0_f64, f64::max);
    gate.check(
        spurious < 1e-10,
        format!("aligned seed: max |c_n>0| = {spurious:.3e}"),
    );
    gate.finish();
}

#[test]
fn criterion_10_determinism_and_schema() {
    let mut gate = Gate::new("criterion 10 (determinism and schema)");
    let config = ExperimentConfig::default();
    let data_dir = Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/digitized"));
    let bundle_a = commands::cmd_report(&config, 2, Some(data_dir)).unwrap();
    let bundle_b = commands::cmd_report(&config, 2, Some(data_dir)).unwrap();
    let bytes_a = serde_json::to_vec_pretty(&bundle_a).unwrap();
    let bytes_b = serde_json::to_vec_pretty(&bundle_b).unwrap();
    gate.check(
        bytes_a == bytes_b,
        format!("two report runs byte-identical ({} bytes)", bytes_a.len()),
    );

    let value: serde_json::Value = serde_json::from_slice(&bytes_a).unwrap();
    let object = value.as_object().unwrap();
    for key in [
        "config",
        "overlap",
        "table1",
        "table2",
        "table3",
        "gain_summaries",
        "gain_vs_temperature",
        "gain_vs_pump",
        "phase_scans",
        "provenance",
    ] {
        gate.check(object.contains_key(key), format!("report has `{key}`"));
    }
    let overlap = object["overlap"].as_object().unwrap();
    gate.check(
        overlap.len() == 3
            && overlap.contains_key("max_order")
            && overlap.contains_key("alpha")
            && overlap.contains_key("gamma"),
        "overlap block has exactly the documented keys".to_string(),
    );
    let table2 = object["table2"].as_array().unwrap();
    gate.check(table2.len() == 3, "table2 has one entry per mode".to_string());
    for entry in table2 {
        for key in [
            "mode_order",
            "corrected_db",
            "inferred_db",
            "calculated_db",
            "eta_estimated",
            "eta_calculated",
            "eta_cav_backout",
        ] {
            gate.check(
                entry.as_object().unwrap().contains_key(key),
                format!("loss-budget entry has `{key}`"),
            );
        }
    }
    // every dB value in the bundle agrees with its linear twin
    for entry in &bundle_a.table2 {
        for pair in [&entry.corrected_db, &entry.inferred_db, &entry.calculated_db] {
            let db = 10f64.powf(pair.squeezing_db / 10.0);
            gate.check(
                (db - pair.squeezing_linear).abs() < 1e-9,
                "db/linear agreement".to_string(),
            );
        }
    }
    gate.finish();
}
