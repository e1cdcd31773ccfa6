//! Noise-induced leakage across the smeared separatrix.
//!
//! Amplitude noise of level L widens the band of kick strengths and lets
//! weight initially inside the resonant island escape into rotation; the
//! relative change in rotating weight grows like L/(8*pi).  This measures the
//! escaped fraction of a uniform cell ensemble for increasing L and compares
//! against that linear estimate.

use std::error::Error;

use kicked_rotor::model::{NoiseModel, SystemParams};
use kicked_rotor::phasespace::escaped_weight;
use kicked_rotor::scaling::rotating_weight_change;

fn main() -> Result<(), Box<dyn Error>> {
    let params = SystemParams::new(2.8, 100, 2, 0.05)?;
    println!(
        "[escape] k = {}, eps = {}, {} kicks, 200000 samples per level",
        params.k, params.epsilon, params.t
    );

    let base = escaped_weight(&params, &NoiseModel::new(0.0, 66)?, 200_000, params.t, 19)?;
    let rotating = 1.0 - base.librating_weight;
    println!(
        "[escape] noise-free: escaped weight {:.4}, rotating weight {:.4}",
        base.escaped_weight, rotating
    );

    println!("{:>5} {:>12} {:>12} {:>9}", "L", "change", "L/(8*pi)", "ratio");
    for level in [0.4, 0.8, 1.2, 1.6] {
        let noisy =
            escaped_weight(&params, &NoiseModel::new(level, 66)?, 200_000, params.t, 19)?;
        let change = (noisy.escaped_weight - base.escaped_weight) / rotating;
        let estimate = rotating_weight_change(level);
        println!(
            "{:>5} {:>12.5} {:>12.5} {:>9.3}",
            level,
            change,
            estimate,
            change / estimate
        );
    }
    Ok(())
}
