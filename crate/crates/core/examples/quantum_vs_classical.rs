//! Side-by-side energies from the quantum evolution and the detuning map.
//!
//! Near tau = 4*pi the quasimomentum-averaged quantum energy is reproduced by
//! the pseudoclassical map with J = |eps|*n + pi*ell + tau*beta.  This runs
//! both engines over the same detunings and noise levels and writes a table
//! with one row per (engine, eps, L) combination.

use std::env;
use std::error::Error;
use std::path::PathBuf;

use kicked_rotor::harness::output::write_sweep_table;
use kicked_rotor::harness::{run_sweep, Engine, SweepKind, SweepSpec};

fn out_dir() -> PathBuf {
    env::var_os("KICKED_ROTOR_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn main() -> Result<(), Box<dyn Error>> {
    let spec = SweepSpec {
        kind: SweepKind::QuantumVsClassical { epsilons: vec![0.005, 0.02, 0.05] },
        engine: Engine::Pclassical,
        k: 2.8,
        t: 30,
        ell: 2,
        noise_levels: vec![0.0, 1.5],
        n_beta: 2000,
        n_traj: 50_000,
        seed: 11,
    };

    println!("[compare] quantum beta average (2000 fibers) vs map ensemble (50000)");
    let rows = run_sweep(&spec)?;

    println!("{:>10} {:>7} {:>5} {:>12} {:>12}", "engine", "eps", "L", "E", "stderr");
    for row in &rows {
        println!(
            "{:>10} {:>7} {:>5} {:>12.4} {:>12.2e}",
            row.engine.name(),
            row.epsilon,
            row.noise_level,
            row.energy,
            row.energy_stderr
        );
    }

    for eps in [0.005_f64, 0.02, 0.05] {
        for level in [0.0_f64, 1.5] {
            let pick = |engine: Engine| {
                rows.iter()
                    .find(|r| r.engine == engine && r.epsilon == eps && r.noise_level == level)
                    .expect("row present")
            };
            let q = pick(Engine::Quantum);
            let c = pick(Engine::Pclassical);
            println!(
                "[compare] eps = {:5}, L = {:3}: map/quantum = {:.4}",
                eps,
                level,
                c.energy / q.energy
            );
        }
    }

    let dir = out_dir();
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("quantum_vs_classical.tsv");
    write_sweep_table(&path, &spec, &rows)?;
    println!("[compare] wrote {}", path.display());
    Ok(())
}
