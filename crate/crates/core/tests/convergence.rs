//! Slow cross-checks that tie the tabulated scaling function and the
//! statistical estimators to independent simulations: the table must be
//! converged in its reference detuning, reproduce fresh runs at unrelated
//! parameters, approach its analytic limits, and the quoted shot errors must
//! describe the actual scatter of repeated noisy runs.

use kicked_rotor::harness::{
    compare_to_scaling, run_sweep, shot_statistics, Engine, SweepKind, SweepSpec,
};
use kicked_rotor::model::{EnsembleMode, InitialEnsemble, NoiseModel, SystemParams};
use kicked_rotor::pclassical::{ensemble_energy, evolve_ensemble, MapEnsemble};
use kicked_rotor::quantum::beta_average;
use kicked_rotor::scaling::{scaling_variable, tabulate_phi0_g, TabulationSpec};

/// Quartering the reference detuning while doubling t (so the scaling
/// variable x matches exactly, with no interpolation in between) moves the
/// rescaled energy by less than 2%, so eps_ref = 1e-4 sits in the scaling
/// limit.
#[test]
fn reference_detuning_sits_in_the_scaling_limit() {
    let k = 2.8;
    let ratio_at = |eps: f64, t: usize, level: f64| {
        let params = SystemParams::new(k, t, 2, eps).unwrap();
        let noise = NoiseModel::new(level, 31).unwrap();
        let ens = InitialEnsemble { mode: EnsembleMode::TheoryUniform, size: 500_000 };
        let mut m = MapEnsemble::sample(params, &ens, 8080).unwrap();
        evolve_ensemble(&mut m, &noise, t);
        ensemble_energy(&m).unwrap().mean / (k * k / 4.0 * t as f64)
    };

    let mut worst = (0.0_f64, 0.0_f64);
    for &(t, level) in &[(30_usize, 0.0), (80, 0.0), (200, 0.0), (440, 0.0), (200, 2.0)] {
        let coarse = ratio_at(1e-4, t, level);
        let fine = ratio_at(2.5e-5, 2 * t, level);
        let rel = (coarse - fine).abs() / fine;
        let x = scaling_variable(k, 1e-4, t);
        if rel > worst.0 {
            worst = (rel, x);
        }
    }
    assert!(
        worst.0 < 0.02,
        "quartering the detuning moved the ratio by {:.2}% at x = {:.2}",
        100.0 * worst.0,
        worst.1
    );
}

/// At small x nothing has left the resonance yet: H(x) -> 1 and
/// H(x, L) -> 1 + L^2/12.  Phi0 itself must run from ~0 to ~1.
#[test]
fn scaling_function_limits() {
    let table = tabulate_phi0_g(&TabulationSpec {
        eps_ref: 1e-4,
        ensemble: 40_000,
        x_min: 0.1,
        x_max: 30.0,
        points: 16,
        ..TabulationSpec::default()
    })
    .unwrap();

    let (x_lo, _) = table.x_range();
    assert!((table.ratio(x_lo).unwrap() - 1.0).abs() < 0.02);
    for level in [1.0, 2.0] {
        let expect = 1.0 + level * level / 12.0;
        let got = table.noisy_ratio(x_lo, level).unwrap();
        assert!(
            (got - expect).abs() / expect < 0.02,
            "H({x_lo:.3}, {level}) = {got:.4}, want -> {expect:.4}"
        );
    }

    let phi0 = table.phi0_values();
    assert!(phi0[0] < 0.1, "Phi0 should vanish at small x, got {}", phi0[0]);
    assert!(phi0[phi0.len() - 1] > 0.8, "Phi0 should saturate, got {}", phi0[phi0.len() - 1]);
    // Monotone crossover up to Monte Carlo wiggle.
    for w in phi0.windows(2) {
        assert!(w[1] > w[0] - 0.02, "Phi0 dipped: {} -> {}", w[0], w[1]);
    }
}

/// Fresh map ensembles at parameters unrelated to the tabulation reference
/// land on the interpolated curve within 5%.
#[test]
fn fresh_simulations_land_on_the_table() {
    let table = tabulate_phi0_g(&TabulationSpec {
        eps_ref: 1e-4,
        ensemble: 40_000,
        x_min: 0.8,
        x_max: 15.0,
        points: 20,
        ..TabulationSpec::default()
    })
    .unwrap();

    for &(k, eps, t, level) in
        &[(5.0, 0.002, 100_usize, 0.0), (2.8, 1e-3, 20, 0.0), (5.0, 0.002, 100, 2.0)]
    {
        let params = SystemParams::new(k, t, 2, eps).unwrap();
        let noise = NoiseModel::new(level, 52).unwrap();
        let ens = InitialEnsemble { mode: EnsembleMode::TheoryUniform, size: 100_000 };
        let mut m = MapEnsemble::sample(params, &ens, 4711).unwrap();
        evolve_ensemble(&mut m, &noise, t);
        let ratio = ensemble_energy(&m).unwrap().mean / (k * k / 4.0 * t as f64);
        let x = scaling_variable(k, eps, t);
        let model = table.noisy_ratio(x, level).unwrap();
        assert!(
            (ratio - model).abs() / model < 0.05,
            "k={k} eps={eps} t={t} L={level}: ratio {ratio:.4} vs table {model:.4} at x={x:.2}"
        );
    }
}

/// Ten independent-seed repetitions of the noisy resonance-peak run scatter
/// by well under 2% of the mean, so quoted standard errors are meaningful.
#[test]
fn shot_error_of_the_noisy_peak_run() {
    let params = SystemParams::new(2.8, 20, 2, 0.0).unwrap();
    let shots: Vec<f64> = (0..10)
        .map(|s| {
            let noise = NoiseModel::new(1.0, 100 + s).unwrap();
            beta_average(&params, &noise, 2000).unwrap().mean
        })
        .collect();
    let stat = shot_statistics(&shots).unwrap();
    assert!(
        stat.stderr < 0.02 * stat.mean,
        "shot scatter {:.4} on mean {:.4}",
        stat.stderr,
        stat.mean
    );
}

/// The residual report of a fixed-k sweep against the table reproduces the
/// collapse: mean |residual| below 0.1 with nothing skipped.
#[test]
fn residual_report_on_the_fixed_k_family() {
    let table = tabulate_phi0_g(&TabulationSpec {
        eps_ref: 1e-4,
        ensemble: 30_000,
        x_min: 0.8,
        x_max: 35.0,
        points: 30,
        ..TabulationSpec::default()
    })
    .unwrap();

    let spec = SweepSpec {
        kind: SweepKind::ScalingCollapse {
            points_per_level: 60,
            k_range: (1.0, 10.0),
            eps_range: (1e-3, 0.1),
            t_range: (20, 150),
            fixed_k: Some(2.8),
        },
        engine: Engine::Pclassical,
        k: 2.8,
        ell: 2,
        t: 50,
        noise_levels: vec![0.0],
        n_beta: 500,
        n_traj: 30_000,
        seed: 4242,
    };
    let rows = run_sweep(&spec).unwrap();
    let points: Vec<_> = rows.iter().map(|r| r.scaled_point()).collect();
    let report = compare_to_scaling(&points, &table).unwrap();

    assert_eq!(report.skipped_invalid, 0);
    let summary = &report.summaries[0];
    assert_eq!(summary.noise_level, 0.0);
    assert!(summary.count > 40);
    assert!(
        summary.mean_abs_residual < 0.1,
        "mean |residual| = {:.3}",
        summary.mean_abs_residual
    );
}
