//! Run orchestration: sweep specifications, the engines that evaluate them,
//! statistics over repeated shots, experimental-data ingestion, and residual
//! comparison against the tabulated scaling function.
//!
//! A sweep is fully specified by a [`SweepSpec`] (including its master
//! seed): every parameter point derives its own sub-seed from the master,
//! points are evaluated and written in specification order, and trajectories
//! within a point parallelize over the worker pool, so output files are
//! byte-identical no matter how many threads run.

pub mod config;
pub mod output;

pub use config::Config;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{
    purpose, stream, EnsembleMode, InitialEnsemble, NoiseModel, SystemParams,
    PSEUDOCLASSICAL_EPS_LIMIT,
};
use crate::pclassical::{
    ensemble_energy, evolve_ensemble, resonance_limit_ensemble_energy, EnergyStat, MapEnsemble,
};
use crate::phasespace::{poincare_section, PhasePortrait};
use crate::quantum::{
    beta_average, evolve_adaptive, resonance_peak_average, resonant_beta_grid, DEFAULT_GRID,
};
use crate::scaling::{resonance_peak_energy, scaling_variable, ScalingTable};

// ---------------------------------------------------------------------------
// Sweep specification
// ---------------------------------------------------------------------------

/// Which dynamics evaluates a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Split-operator quantum evolution, averaged over a quasimomentum grid.
    Quantum,
    /// The reduced classical map over a Monte Carlo ensemble.
    Pclassical,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Quantum => "quantum",
            Engine::Pclassical => "pclassical",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "quantum" => Ok(Engine::Quantum),
            "pclassical" => Ok(Engine::Pclassical),
            other => Err(Error::Config(format!(
                "unknown engine {other:?} (expected quantum or pclassical)"
            ))),
        }
    }
}

/// The sweep families; each corresponds to one kind of figure data set.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepKind {
    /// Energy vs detuning across noise levels (resonance-peak profiles).
    EpsilonScan { epsilons: Vec<f64> },
    /// Peak energy vs noise level at exact resonance.
    PeakVsL,
    /// Map-ensemble and quantum energies side by side at each detuning.
    QuantumVsClassical { epsilons: Vec<f64> },
    /// Random parameter points, log-uniform in `k`, `eps`, and `t`, for the
    /// scaling collapse.  `fixed_k` pins `k` instead of sampling it.
    ScalingCollapse {
        points_per_level: usize,
        k_range: (f64, f64),
        eps_range: (f64, f64),
        t_range: (usize, usize),
        fixed_k: Option<f64>,
    },
    /// Poincare sections (orbit blocks rather than energy rows).
    PhasePortrait { grid_theta: usize, grid_j: usize, iterations: usize, epsilon: f64 },
}

/// A fully reproducible sweep: parameters, ensembles, and master seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub engine: Engine,
    pub k: f64,
    pub ell: u32,
    pub t: usize,
    pub noise_levels: Vec<f64>,
    /// Quasimomentum grid size for the quantum engine.
    pub n_beta: usize,
    /// Trajectory count for the classical engine.
    pub n_traj: usize,
    pub seed: u64,
}

impl SweepSpec {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            SweepKind::EpsilonScan { .. } => "epsilon-scan",
            SweepKind::PeakVsL => "peak-vs-L",
            SweepKind::QuantumVsClassical { .. } => "quantum-vs-classical",
            SweepKind::ScalingCollapse { .. } => "scaling-collapse",
            SweepKind::PhasePortrait { .. } => "phase-portrait",
        }
    }

    /// Sorted `(key, value)` pairs capturing every field; the canonical form
    /// behind [`SweepSpec::spec_hash`] and output-file provenance.
    pub fn canonical_entries(&self) -> Vec<(String, String)> {
        let join = |vals: &[f64]| {
            vals.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
        };
        let mut entries = vec![
            ("kind".to_string(), self.kind_name().to_string()),
            ("engine".to_string(), self.engine.name().to_string()),
            ("k".to_string(), self.k.to_string()),
            ("ell".to_string(), self.ell.to_string()),
            ("t".to_string(), self.t.to_string()),
            ("noise".to_string(), join(&self.noise_levels)),
            ("n_beta".to_string(), self.n_beta.to_string()),
            ("n_traj".to_string(), self.n_traj.to_string()),
            ("seed".to_string(), self.seed.to_string()),
        ];
        match &self.kind {
            SweepKind::EpsilonScan { epsilons } | SweepKind::QuantumVsClassical { epsilons } => {
                entries.push(("epsilons".to_string(), join(epsilons)));
            }
            SweepKind::PeakVsL => {}
            SweepKind::ScalingCollapse { points_per_level, k_range, eps_range, t_range, fixed_k } => {
                entries.push(("points".to_string(), points_per_level.to_string()));
                entries.push(("k_range".to_string(), format!("{},{}", k_range.0, k_range.1)));
                entries.push(("eps_range".to_string(), format!("{},{}", eps_range.0, eps_range.1)));
                entries.push(("t_range".to_string(), format!("{},{}", t_range.0, t_range.1)));
                entries.push((
                    "fixed_k".to_string(),
                    fixed_k.map_or_else(|| "none".to_string(), |k| k.to_string()),
                ));
            }
            SweepKind::PhasePortrait { grid_theta, grid_j, iterations, epsilon } => {
                entries.push(("grid_theta".to_string(), grid_theta.to_string()));
                entries.push(("grid_j".to_string(), grid_j.to_string()));
                entries.push(("iterations".to_string(), iterations.to_string()));
                entries.push(("epsilon".to_string(), epsilon.to_string()));
            }
        }
        entries.sort();
        entries
    }

    /// Hex digest (first 16 chars of SHA-256) of the canonical form.
    pub fn spec_hash(&self) -> String {
        let mut canon = String::new();
        for (k, v) in self.canonical_entries() {
            canon.push_str(&k);
            canon.push_str(" = ");
            canon.push_str(&v);
            canon.push('\n');
        }
        let digest = Sha256::digest(canon.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in &digest[..8] {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }

    /// Full up-front validation; no compute happens on a bad spec.
    pub fn validate(&self) -> Result<()> {
        let check = |cond: bool, msg: &str| -> Result<()> {
            if cond {
                Ok(())
            } else {
                Err(Error::Config(msg.to_string()))
            }
        };
        check(self.k.is_finite() && self.k > 0.0, "k must be positive")?;
        check(self.ell >= 1, "ell must be >= 1")?;
        for &level in &self.noise_levels {
            check(
                level.is_finite() && (0.0..=2.0).contains(&level),
                &format!("noise level {level} must lie in [0, 2]"),
            )?;
        }
        match self.engine {
            Engine::Quantum => check(self.n_beta >= 1, "n_beta must be >= 1")?,
            Engine::Pclassical => check(self.n_traj >= 1, "n_traj must be >= 1")?,
        }
        match &self.kind {
            SweepKind::EpsilonScan { epsilons } | SweepKind::QuantumVsClassical { epsilons } => {
                check(self.t >= 1, "t must be >= 1")?;
                for &eps in epsilons {
                    // Full parameter validation, including tau > 0.
                    SystemParams::new(self.k, self.t, self.ell, eps)
                        .map_err(|e| Error::Config(e.to_string()))?;
                }
                if matches!(self.kind, SweepKind::QuantumVsClassical { .. }) {
                    check(self.n_beta >= 1, "n_beta must be >= 1")?;
                    check(self.n_traj >= 1, "n_traj must be >= 1")?;
                }
            }
            SweepKind::PeakVsL => check(self.t >= 1, "t must be >= 1")?,
            SweepKind::ScalingCollapse { points_per_level, k_range, eps_range, t_range, fixed_k } => {
                check(*points_per_level >= 1, "points_per_level must be >= 1")?;
                check(
                    k_range.0.is_finite() && k_range.0 > 0.0 && k_range.1 >= k_range.0,
                    "k_range must satisfy 0 < lo <= hi",
                )?;
                check(
                    eps_range.0.is_finite() && eps_range.0 > 0.0 && eps_range.1 >= eps_range.0,
                    "eps_range must satisfy 0 < lo <= hi",
                )?;
                check(t_range.0 >= 1 && t_range.1 >= t_range.0, "t_range must satisfy 1 <= lo <= hi")?;
                if let Some(k) = fixed_k {
                    check(k.is_finite() && *k > 0.0, "fixed_k must be positive")?;
                }
            }
            SweepKind::PhasePortrait { grid_theta, grid_j, iterations, epsilon } => {
                check(*grid_theta >= 1 && *grid_j >= 1, "portrait grid must be >= 1 x 1")?;
                check(*iterations >= 1, "iterations must be >= 1")?;
                check(epsilon.is_finite(), "epsilon must be finite")?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Sweep execution
// ---------------------------------------------------------------------------

/// One evaluated parameter point with complete provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub engine: Engine,
    pub k: f64,
    pub epsilon: f64,
    pub t: usize,
    pub ell: u32,
    pub noise_level: f64,
    /// Fibers (quantum) or trajectories (classical) behind the mean.
    pub samples: usize,
    /// Mean energy change over the ensemble.
    pub energy: f64,
    pub energy_stderr: f64,
    /// `ratio = energy / (k^2 t / 4)`, the scaled energy.
    pub ratio: f64,
    pub ratio_stderr: f64,
    /// Scaling variable `x = t*sqrt(k|eps|)`.
    pub x: f64,
    /// False where `|eps|` exceeds the reduced-map validity cutoff.
    pub scaling_valid: bool,
    /// Sub-seed this point was evaluated with.
    pub point_seed: u64,
}

impl SweepRow {
    pub fn scaled_point(&self) -> ScaledPoint {
        ScaledPoint {
            x: self.x,
            ratio: self.ratio,
            ratio_stderr: self.ratio_stderr,
            noise_level: self.noise_level,
            k: self.k,
            epsilon: self.epsilon,
            t: self.t,
            scaling_valid: self.scaling_valid,
        }
    }
}

struct Point {
    engine: Engine,
    k: f64,
    epsilon: f64,
    t: usize,
    level: f64,
    index: u64,
}

fn enumerate_points(spec: &SweepSpec) -> Result<Vec<Point>> {
    let mut points = Vec::new();
    let push = |engine, k, epsilon, t, level, points: &mut Vec<Point>| {
        let index = points.len() as u64;
        points.push(Point { engine, k, epsilon, t, level, index });
    };
    match &spec.kind {
        SweepKind::EpsilonScan { epsilons } => {
            for &level in &spec.noise_levels {
                for &eps in epsilons {
                    push(spec.engine, spec.k, eps, spec.t, level, &mut points);
                }
            }
        }
        SweepKind::PeakVsL => {
            for &level in &spec.noise_levels {
                push(spec.engine, spec.k, 0.0, spec.t, level, &mut points);
            }
        }
        SweepKind::QuantumVsClassical { epsilons } => {
            for &level in &spec.noise_levels {
                for &eps in epsilons {
                    push(Engine::Quantum, spec.k, eps, spec.t, level, &mut points);
                    push(Engine::Pclassical, spec.k, eps, spec.t, level, &mut points);
                }
            }
        }
        SweepKind::ScalingCollapse { points_per_level, k_range, eps_range, t_range, fixed_k } => {
            for (li, &level) in spec.noise_levels.iter().enumerate() {
                for i in 0..*points_per_level {
                    // Log-uniform draws addressed by the would-be row index,
                    // so a point's parameters never depend on thread count.
                    let draw_idx = (li * points_per_level + i) as u64;
                    let log_draw = |dim: u64, lo: f64, hi: f64| {
                        let u = stream::uniform(spec.seed, purpose::SWEEP, draw_idx, dim);
                        (lo.ln() + u * (hi.ln() - lo.ln())).exp()
                    };
                    let k = fixed_k.unwrap_or_else(|| log_draw(0, k_range.0, k_range.1));
                    let eps = log_draw(1, eps_range.0, eps_range.1);
                    let t = (log_draw(2, t_range.0 as f64, t_range.1 as f64).round() as usize)
                        .clamp(t_range.0, t_range.1);
                    push(spec.engine, k, eps, t, level, &mut points);
                }
            }
        }
        SweepKind::PhasePortrait { .. } => {
            return Err(Error::Config(
                "phase-portrait specs produce orbit files, not energy rows; \
                 use run_portrait"
                    .to_string(),
            ))
        }
    }
    Ok(points)
}

fn eval_point(spec: &SweepSpec, p: &Point) -> Result<SweepRow> {
    let params = SystemParams::new(p.k, p.t, spec.ell, p.epsilon)?;
    let point_seed = stream::derive(spec.seed, purpose::POINT, p.index);
    let noise = NoiseModel::new(p.level, point_seed)?;
    let (energy, energy_stderr, samples) = match p.engine {
        Engine::Quantum if p.epsilon == 0.0 && p.level > 0.0 => {
            // At the peak itself a per-fiber noise draw leaves the estimator
            // at the mercy of the few ballistic fibers; shot averaging with
            // antithetic pairs sidesteps that.  Pairs are sized so the fiber
            // count comes out near the requested n_beta.
            let grid = resonant_beta_grid(&params);
            let pairs = (spec.n_beta / (2 * grid)).max(2);
            let avg = resonance_peak_average(&params, p.level, point_seed, pairs)?;
            (avg.mean, avg.stderr, avg.fibers)
        }
        Engine::Quantum => {
            let avg = beta_average(&params, &noise, spec.n_beta)?;
            (avg.mean, avg.stderr, avg.n_beta)
        }
        Engine::Pclassical => {
            let ens = InitialEnsemble { mode: EnsembleMode::TheoryUniform, size: spec.n_traj };
            let stat = if p.epsilon == 0.0 {
                // The reduced map degenerates at eps = 0; use the exact
                // resonant limit instead.
                resonance_limit_ensemble_energy(&params, &noise, &ens, point_seed)?
            } else {
                let mut ensemble = MapEnsemble::sample(params, &ens, point_seed)?;
                evolve_ensemble(&mut ensemble, &noise, p.t);
                ensemble_energy(&ensemble)?
            };
            (stat.mean, stat.stderr, stat.samples)
        }
    };
    let peak = resonance_peak_energy(p.k, p.t, 0.0);
    Ok(SweepRow {
        engine: p.engine,
        k: p.k,
        epsilon: p.epsilon,
        t: p.t,
        ell: spec.ell,
        noise_level: p.level,
        samples,
        energy,
        energy_stderr,
        ratio: energy / peak,
        ratio_stderr: energy_stderr / peak,
        x: scaling_variable(p.k, p.epsilon, p.t),
        scaling_valid: p.epsilon.abs() <= PSEUDOCLASSICAL_EPS_LIMIT,
        point_seed,
    })
}

/// Evaluate a tabular sweep.  Points run in specification order (each one
/// parallelizes internally over trajectories), so the resulting rows are
/// deterministic in content and order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let points = enumerate_points(spec)?;
    points.iter().map(|p| eval_point(spec, p)).collect()
}

/// Evaluate a phase-portrait spec: one portrait per noise level, each with
/// its own derived seed.
pub fn run_portrait(spec: &SweepSpec) -> Result<Vec<PhasePortrait>> {
    spec.validate()?;
    let SweepKind::PhasePortrait { grid_theta, grid_j, iterations, epsilon } = spec.kind else {
        return Err(Error::Config(format!(
            "run_portrait needs a phase-portrait spec, got {}",
            spec.kind_name()
        )));
    };
    let params = SystemParams::new(spec.k, spec.t.max(1), spec.ell, epsilon)?;
    spec.noise_levels
        .iter()
        .enumerate()
        .map(|(i, &level)| {
            let noise = NoiseModel::new(level, stream::derive(spec.seed, purpose::POINT, i as u64))?;
            poincare_section(&params, &noise, grid_theta, grid_j, iterations)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Scaled points, shots, and comparison against the scaling function
// ---------------------------------------------------------------------------

/// One point in the scaling plane `(x, ratio)`, with provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPoint {
    pub x: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    pub noise_level: f64,
    pub k: f64,
    pub epsilon: f64,
    pub t: usize,
    pub scaling_valid: bool,
}

/// Mean and standard error over repeated independent-seed shots.
pub fn shot_statistics(shots: &[f64]) -> Result<EnergyStat> {
    if shots.len() < 2 {
        return Err(Error::Parameter(format!(
            "shot statistics need >= 2 shots, got {}",
            shots.len()
        )));
    }
    Ok(EnergyStat::from_samples(shots))
}

/// Per-point residual against the tabulated scaling function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow {
    pub x: f64,
    pub noise_level: f64,
    pub ratio: f64,
    /// Tabulated `H(x, L)` value.
    pub model: f64,
    /// `ratio - model`.
    pub residual: f64,
}

/// Residual statistics for one noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSummary {
    pub noise_level: f64,
    pub count: usize,
    pub mean_residual: f64,
    pub mean_abs_residual: f64,
    pub max_abs_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub rows: Vec<ResidualRow>,
    /// Points whose `x` fell outside the tabulated range.
    pub skipped_out_of_range: usize,
    /// Points beyond the reduced-map validity cutoff `|eps| <= 0.15`.
    pub skipped_invalid: usize,
    pub summaries: Vec<LevelSummary>,
}

/// Compare scaled points against the tabulated scaling function: residual
/// `ratio - H(x, L)` per row, summarized per noise level.  Points outside
/// the table's `x` range or the map's validity cutoff are skipped and
/// counted.
pub fn compare_to_scaling(points: &[ScaledPoint], table: &ScalingTable) -> Result<ResidualReport> {
    let mut rows = Vec::new();
    let mut skipped_out_of_range = 0;
    let mut skipped_invalid = 0;
    for p in points {
        if !p.scaling_valid {
            skipped_invalid += 1;
            continue;
        }
        let model = match table.noisy_ratio(p.x, p.noise_level) {
            Ok(v) => v,
            Err(Error::OutOfRange { .. }) => {
                skipped_out_of_range += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        rows.push(ResidualRow {
            x: p.x,
            noise_level: p.noise_level,
            ratio: p.ratio,
            model,
            residual: p.ratio - model,
        });
    }

    let mut levels: Vec<f64> = rows.iter().map(|r| r.noise_level).collect();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup();
    let summaries = levels
        .iter()
        .map(|&level| {
            let group: Vec<&ResidualRow> =
                rows.iter().filter(|r| r.noise_level == level).collect();
            let n = group.len() as f64;
            LevelSummary {
                noise_level: level,
                count: group.len(),
                mean_residual: group.iter().map(|r| r.residual).sum::<f64>() / n,
                mean_abs_residual: group.iter().map(|r| r.residual.abs()).sum::<f64>() / n,
                max_abs_residual: group
                    .iter()
                    .map(|r| r.residual.abs())
                    .fold(0.0, f64::max),
            }
        })
        .collect();
    Ok(ResidualReport { rows, skipped_out_of_range, skipped_invalid, summaries })
}

// ---------------------------------------------------------------------------
// Experimental records
// ---------------------------------------------------------------------------

/// Measured mean energies from an experiment (or a synthetic stand-in).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub k: f64,
    pub ell: u32,
    pub t: usize,
    /// Initial momentum spread (two-photon recoils); required for rescaling.
    pub sigma_p: Option<f64>,
    /// Stated systematic uncertainty on `k`.  Recorded, not corrected for.
    pub k_uncertainty: Option<f64>,
    /// Shots averaged per energy value, when reported.
    pub shots: Option<u32>,
    pub rows: Vec<ExperimentRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentRow {
    pub epsilon: f64,
    pub noise_level: f64,
    /// Measured mean energy, including the initial thermal energy.
    pub energy: f64,
    pub energy_stderr: f64,
}

/// Result of rescaling an experiment record into the scaling plane.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledSet {
    pub points: Vec<ScaledPoint>,
    /// Rows dropped for `|eps|` beyond the reduced-map cutoff.
    pub dropped_invalid: usize,
}

/// Rescale measured energies into the scaling plane:
/// `ratio = (E - sigma_p^2/4 - offset) / peak_reference`, `x = t*sqrt(k|eps|)`.
/// `offset` is an optional empirical constant (heating background), normally
/// zero.  Rows with `|eps| > 0.15` are dropped and counted.
pub fn rescale_experimental(
    record: &ExperimentRecord,
    k: f64,
    t: usize,
    peak_reference: f64,
    offset: f64,
) -> Result<RescaledSet> {
    let sigma_p = record.sigma_p.ok_or_else(|| {
        Error::Parameter("record lacks sigma_p; the initial energy cannot be subtracted".into())
    })?;
    if !(peak_reference.is_finite() && peak_reference > 0.0) {
        return Err(Error::Parameter(format!(
            "peak_reference = {peak_reference} must be positive"
        )));
    }
    if !offset.is_finite() {
        return Err(Error::Parameter(format!("offset = {offset} must be finite")));
    }
    let initial_energy = sigma_p * sigma_p / 4.0;
    let mut points = Vec::new();
    let mut dropped_invalid = 0;
    for row in &record.rows {
        if row.epsilon.abs() > PSEUDOCLASSICAL_EPS_LIMIT {
            dropped_invalid += 1;
            continue;
        }
        points.push(ScaledPoint {
            x: scaling_variable(k, row.epsilon, t),
            ratio: (row.energy - initial_energy - offset) / peak_reference,
            ratio_stderr: row.energy_stderr / peak_reference,
            noise_level: row.noise_level,
            k,
            epsilon: row.epsilon,
            t,
            scaling_valid: true,
        });
    }
    Ok(RescaledSet { points, dropped_invalid })
}

/// A synthetic "measurement" produced by the quantum engine, for exercising
/// the ingestion path end to end.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticExperiment {
    pub record: ExperimentRecord,
    /// The engine's own scaled points, the ground truth for a round trip.
    pub internal: Vec<ScaledPoint>,
}

/// Simulate a thermal cloud of `atoms` plane waves with Gaussian momentum
/// spread `sigma_p`, and report measured energies the way an experiment
/// would: energy change plus the initial thermal energy `sigma_p^2/4`.
pub fn synthetic_experiment(
    k: f64,
    ell: u32,
    t: usize,
    epsilons: &[f64],
    levels: &[f64],
    sigma_p: f64,
    atoms: usize,
    seed: u64,
) -> Result<SyntheticExperiment> {
    let mut rows = Vec::new();
    let mut internal = Vec::new();
    let mut point_index = 0u64;
    for &level in levels {
        for &eps in epsilons {
            let params = SystemParams::new(k, t, ell, eps)?;
            let point_seed = stream::derive(seed, purpose::POINT, point_index);
            point_index += 1;
            let noise = NoiseModel::new(level, point_seed)?;
            let ens = InitialEnsemble {
                mode: EnsembleMode::ExperimentGaussian { sigma_p },
                size: atoms,
            };
            let ics = crate::model::sample_initial_conditions(&ens, &params, point_seed)?;
            let changes: Vec<f64> = ics
                .iter()
                .enumerate()
                .map(|(i, ic)| {
                    evolve_adaptive(&params, &noise, i as u64, ic.n0, ic.beta, DEFAULT_GRID)
                        .map(|(_, rec)| rec.energy_change())
                })
                .collect::<Result<Vec<_>>>()?;
            let stat = EnergyStat::from_samples(&changes);
            rows.push(ExperimentRow {
                epsilon: eps,
                noise_level: level,
                energy: stat.mean + sigma_p * sigma_p / 4.0,
                energy_stderr: stat.stderr,
            });
            let peak = resonance_peak_energy(k, t, 0.0);
            internal.push(ScaledPoint {
                x: scaling_variable(k, eps, t),
                ratio: stat.mean / peak,
                ratio_stderr: stat.stderr / peak,
                noise_level: level,
                k,
                epsilon: eps,
                t,
                scaling_valid: eps.abs() <= PSEUDOCLASSICAL_EPS_LIMIT,
            });
        }
    }
    Ok(SyntheticExperiment {
        record: ExperimentRecord {
            k,
            ell,
            t,
            sigma_p: Some(sigma_p),
            k_uncertainty: None,
            shots: None,
            rows,
        },
        internal,
    })
}

// ---------------------------------------------------------------------------
