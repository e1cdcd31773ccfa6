//! Poincare sections of the detuning map and the noise-smeared separatrix.
//!
//! Without noise the map is a kicked pendulum with a resonant island of
//! half-width 2*sqrt(k*|eps|); amplitude noise blurs the separatrix into a
//! band whose envelopes follow the extreme kick strengths.  Writes one
//! portrait file per noise level plus the analytic band.

use std::env;
use std::error::Error;
use std::path::PathBuf;

use kicked_rotor::harness::output::{write_band, write_portrait};
use kicked_rotor::harness::{run_portrait, Engine, SweepKind, SweepSpec};
use kicked_rotor::phasespace::{island_half_width, smeared_band};

fn out_dir() -> PathBuf {
    env::var_os("KICKED_ROTOR_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn main() -> Result<(), Box<dyn Error>> {
    let (k, epsilon) = (2.8, 0.01);
    let spec = SweepSpec {
        kind: SweepKind::PhasePortrait { grid_theta: 24, grid_j: 24, iterations: 300, epsilon },
        engine: Engine::Pclassical,
        k,
        t: 1,
        ell: 2,
        noise_levels: vec![0.0, 1.5],
        n_beta: 0,
        n_traj: 1,
        seed: 5,
    };

    println!(
        "[portrait] 24x24 grid of orbits, {} iterations each, k = {}, eps = {}",
        300, k, epsilon
    );
    let portraits = run_portrait(&spec)?;

    let dir = out_dir();
    std::fs::create_dir_all(&dir)?;
    for portrait in &portraits {
        let name = format!("portrait_L{}.tsv", portrait.noise_level);
        let path = dir.join(name);
        write_portrait(&path, portrait)?;
        println!(
            "[portrait] L = {:3}: {} orbits -> {}",
            portrait.noise_level,
            portrait.orbits.len(),
            path.display()
        );
    }

    let width = island_half_width(k, epsilon, 2000)?;
    println!(
        "[portrait] measured island half-width {:.4} vs pendulum value {:.4}",
        width,
        2.0 * (k * epsilon).sqrt()
    );

    let band = smeared_band(k, epsilon, 1.5, 256)?;
    let band_path = dir.join("separatrix_band.tsv");
    write_band(&band_path, k, epsilon, 1.5, &band)?;
    println!(
        "[portrait] mean-square band width factor {:.4}, wrote {}",
        band.mean_square_width_factor,
        band_path.display()
    );
    Ok(())
}
