//! Round trip of experimental data through the rescaling pipeline.
//!
//! Simulates a thermal cloud the way an atom-optics experiment would report
//! it (mean energy including the initial thermal spread), writes the record
//! to disk, reads it back, rescales onto the x = t*sqrt(k*|eps|) plane, and
//! checks the residuals against the tabulated scaling function.

use std::env;
use std::error::Error;
use std::path::PathBuf;

use kicked_rotor::harness::output::{
    load_experiment_record, write_experiment_record, write_scaled_points,
};
use kicked_rotor::harness::{compare_to_scaling, rescale_experimental, synthetic_experiment};
use kicked_rotor::scaling::{tabulate_phi0_g, TabulationSpec};

fn out_dir() -> PathBuf {
    env::var_os("KICKED_ROTOR_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn main() -> Result<(), Box<dyn Error>> {
    let (k, ell, t, sigma_p) = (2.8, 2, 30, 3.0);
    // The last detuning lies beyond the reduced map's reach and should be
    // dropped by the rescaling step.
    let epsilons = [0.002, 0.005, 0.01, 0.02, 0.04, 0.2];
    let levels = [0.0, 1.0];

    println!(
        "[ingest] simulating a cloud of 400 atoms per point, sigma_p = {} recoils, t = {}",
        sigma_p, t
    );
    let synthetic = synthetic_experiment(k, ell, t, &epsilons, &levels, sigma_p, 400, 99)?;

    let dir = out_dir();
    std::fs::create_dir_all(&dir)?;
    let record_path = dir.join("experiment_record.tsv");
    write_experiment_record(&record_path, &synthetic.record)?;
    println!(
        "[ingest] wrote {} rows to {}",
        synthetic.record.rows.len(),
        record_path.display()
    );

    let record = load_experiment_record(&record_path)?;
    let peak_reference = k * k / 4.0 * t as f64;
    let rescaled = rescale_experimental(&record, k, t, peak_reference, 0.0)?;
    println!(
        "[ingest] rescaled {} points ({} dropped for |eps| beyond the map's reach)",
        rescaled.points.len(),
        rescaled.dropped_invalid
    );

    let table = tabulate_phi0_g(&TabulationSpec {
        ensemble: 20_000,
        x_min: 0.5,
        x_max: 25.0,
        points: 20,
        ..TabulationSpec::default()
    })?;
    let report = compare_to_scaling(&rescaled.points, &table)?;
    for s in &report.summaries {
        println!(
            "[ingest] L = {:3}: {} points, mean |residual| = {:.4}",
            s.noise_level, s.count, s.mean_abs_residual
        );
    }

    let points_path = dir.join("experiment_rescaled.tsv");
    write_scaled_points(
        &points_path,
        &[
            ("source", record_path.display().to_string()),
            ("peak_reference", format!("{peak_reference}")),
        ],
        &rescaled.points,
        rescaled.dropped_invalid,
    )?;
    println!("[ingest] wrote {}", points_path.display());
    Ok(())
}
