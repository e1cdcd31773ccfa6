//! Tabulate the resonance-peak scaling functions Phi0 and G.
//!
//! Runs the detuning map deep in the eps -> 0 limit to build the one-argument
//! scaling function of x = t*sqrt(k*|eps|) and its noisy extension, then saves
//! the table for reuse by the collapse and comparison tools.

use std::env;
use std::error::Error;
use std::path::PathBuf;

use kicked_rotor::scaling::{tabulate_phi0_g, TabulationSpec};

fn out_dir() -> PathBuf {
    env::var_os("KICKED_ROTOR_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn main() -> Result<(), Box<dyn Error>> {
    let spec = TabulationSpec {
        ensemble: 30_000,
        x_min: 0.5,
        x_max: 30.0,
        points: 24,
        ..TabulationSpec::default()
    };
    println!(
        "[tabulate] eps_ref = {:.0e}, ensemble = {}, {} nodes on x in [{}, {}]",
        spec.eps_ref, spec.ensemble, spec.points, spec.x_min, spec.x_max
    );
    let table = tabulate_phi0_g(&spec)?;

    println!("{:>8} {:>10} {:>10} {:>10} {:>10}", "x", "Phi0", "G", "H(x)", "H(x,L=2)");
    for (i, &x) in table.xs().iter().enumerate() {
        println!(
            "{:>8.3} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            x,
            table.phi0_values()[i],
            table.g_values()[i],
            table.ratio(x)?,
            table.noisy_ratio(x, 2.0)?
        );
    }

    let dir = out_dir();
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("scaling_table.tsv");
    table.save(&path)?;
    println!("[tabulate] saved table to {}", path.display());
    Ok(())
}
