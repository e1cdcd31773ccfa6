//! Collapse of scattered (k, eps, t, L) runs onto the scaling curves.
//!
//! Samples random parameter combinations, rescales each run's energy to the
//! ratio E / (k^2 t / 4), and compares against the tabulated noisy scaling
//! function at the same x = t*sqrt(k*|eps|).  Residual statistics per noise
//! level quantify how tightly the cloud collapses.

use std::env;
use std::error::Error;
use std::path::PathBuf;

use kicked_rotor::harness::output::{write_residual_report, write_scaled_points};
use kicked_rotor::harness::{compare_to_scaling, run_sweep, Engine, SweepKind, SweepSpec};
use kicked_rotor::scaling::{tabulate_phi0_g, TabulationSpec};

fn out_dir() -> PathBuf {
    env::var_os("KICKED_ROTOR_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn main() -> Result<(), Box<dyn Error>> {
    println!("[collapse] tabulating the reference scaling functions");
    let table = tabulate_phi0_g(&TabulationSpec {
        ensemble: 20_000,
        x_min: 0.5,
        x_max: 40.0,
        points: 24,
        ..TabulationSpec::default()
    })?;

    let spec = SweepSpec {
        kind: SweepKind::ScalingCollapse {
            points_per_level: 80,
            k_range: (1.0, 10.0),
            eps_range: (1e-3, 0.1),
            t_range: (20, 150),
            fixed_k: None,
        },
        engine: Engine::Pclassical,
        k: 2.8,
        t: 50,
        ell: 2,
        noise_levels: vec![0.0, 2.0],
        n_beta: 0,
        n_traj: 20_000,
        seed: 2718,
    };
    println!("[collapse] running 80 random (k, eps, t) points per noise level");
    let rows = run_sweep(&spec)?;
    let points: Vec<_> = rows.iter().map(|r| r.scaled_point()).collect();

    let report = compare_to_scaling(&points, &table)?;
    for s in &report.summaries {
        println!(
            "[collapse] L = {:3}: {} points, mean |residual| = {:.4}, max = {:.4}",
            s.noise_level, s.count, s.mean_abs_residual, s.max_abs_residual
        );
    }
    if report.skipped_out_of_range > 0 {
        println!(
            "[collapse] {} points fell outside the tabulated x range",
            report.skipped_out_of_range
        );
    }

    let dir = out_dir();
    std::fs::create_dir_all(&dir)?;
    let points_path = dir.join("collapse_points.tsv");
    write_scaled_points(
        &points_path,
        &[("generator", "scaling_collapse example".to_string())],
        &points,
        0,
    )?;
    let report_path = dir.join("collapse_residuals.tsv");
    write_residual_report(&report_path, &report, "map sweep", "in-memory table")?;
    println!(
        "[collapse] wrote {} and {}",
        points_path.display(),
        report_path.display()
    );
    Ok(())
}
