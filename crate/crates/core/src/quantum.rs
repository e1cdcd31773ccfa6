//! Exact quantum evolution of one quasimomentum fiber of the kicked rotor.
//!
//! Quasimomentum `beta` is conserved, so the state of a fiber lives on the
//! integer momentum ladder `p = n + beta` and one kick period factorizes
//! into the kick `exp(-i*k_s*cos(theta))` (applied in the angle
//! representation, reached by FFT) followed by free evolution
//! `exp(-i*tau*(n+beta)^2/2)` (diagonal in momentum).  The kick comes first,
//! then the free flight over one period.
//!
//! The momentum grid is finite, so every kick checks how much probability
//! has reached the outermost 5% of the grid and fails with
//! [`Error::GridOverflow`] when that exceeds `1e-8`; [`evolve_adaptive`]
//! responds by doubling the grid and rerunning the fiber, which is cheap and
//! keeps results independent of the starting grid.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::model::{purpose, stream, NoiseModel, SystemParams};

/// Starting momentum-grid size for adaptive propagation.
pub const DEFAULT_GRID: usize = 1024;
/// Largest grid the adaptive driver will try before giving up.
pub const MAX_GRID: usize = 1 << 17;
/// Maximum tolerated probability in the outermost 5% of the grid.
pub const BOUNDARY_LIMIT: f64 = 1e-8;

/// State of one fiber: amplitudes over integer momenta in FFT storage order
/// (index `m` holds momentum `n = m` for `m < grid/2`, else `n = m - grid`).
#[derive(Debug, Clone)]
pub struct QuantumState {
    beta: f64,
    amps: Vec<Complex64>,
}

/// Momentum number stored at FFT index `m` of an `grid`-point state.
fn momentum_number(m: usize, grid: usize) -> i64 {
    if m < grid / 2 {
        m as i64
    } else {
        m as i64 - grid as i64
    }
}

impl QuantumState {
    /// Momentum eigenstate `|n0 + beta>` on a power-of-two grid.
    pub fn plane_wave(n0: i64, beta: f64, grid: usize) -> Result<Self> {
        if !grid.is_power_of_two() || grid < 16 {
            return Err(Error::Parameter(format!(
                "momentum grid size {grid} must be a power of two >= 16"
            )));
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::Parameter(format!(
                "quasimomentum beta = {beta} must lie in [0, 1)"
            )));
        }
        let half = grid as i64 / 2;
        if n0 < -half || n0 >= half {
            return Err(Error::Parameter(format!(
                "initial momentum n0 = {n0} not representable on a {grid}-point grid"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); grid];
        let m = n0.rem_euclid(grid as i64) as usize;
        amps[m] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { beta, amps })
    }

    pub fn grid_size(&self) -> usize {
        self.amps.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Total probability (1 for a normalized state, up to rounding).
    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitude on the momentum state `n + beta`.
    pub fn amplitude(&self, n: i64) -> Complex64 {
        let grid = self.grid_size() as i64;
        self.amps[n.rem_euclid(grid) as usize]
    }

    /// Mean kinetic energy `<(n + beta)^2> / 2`.
    pub fn kinetic_energy(&self) -> f64 {
        let grid = self.grid_size();
        self.amps
            .iter()
            .enumerate()
            .map(|(m, a)| {
                let p = momentum_number(m, grid) as f64 + self.beta;
                a.norm_sqr() * p * p
            })
            .sum::<f64>()
            / 2.0
    }
}

// ---------------------------------------------------------------------------
// Propagation
// ---------------------------------------------------------------------------

/// FFT plans, scratch, and the boundary guard for one grid size.
pub struct Propagator {
    grid: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    cos_theta: Vec<f64>,
    /// FFT indices holding the outermost 5% of momenta (contiguous run).
    boundary: std::ops::RangeInclusive<usize>,
}

impl Propagator {
    pub fn new(grid: usize) -> Result<Self> {
        if !grid.is_power_of_two() || grid < 16 {
            return Err(Error::Parameter(format!(
                "momentum grid size {grid} must be a power of two >= 16"
            )));
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid);
        let inv = planner.plan_fft_inverse(grid);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        let cos_theta = (0..grid)
            .map(|j| (std::f64::consts::TAU * j as f64 / grid as f64).cos())
            .collect();
        // |n| >= 0.95 * grid/2 is a contiguous index run around m = grid/2.
        let threshold = (0.95 * (grid / 2) as f64).floor() as usize;
        Ok(Propagator {
            grid,
            fwd,
            inv,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            cos_theta,
            boundary: threshold..=(grid - threshold),
        })
    }

    pub fn grid_size(&self) -> usize {
        self.grid
    }

    /// Apply one kick `exp(-i * strength * cos(theta))` in place.
    /// `kick_index` only labels the error should the boundary guard trip.
    pub fn kick(
        &mut self,
        state: &mut QuantumState,
        strength: f64,
        kick_index: usize,
    ) -> Result<()> {
        if state.grid_size() != self.grid {
            return Err(Error::Parameter(format!(
                "state grid {} does not match propagator grid {}",
                state.grid_size(),
                self.grid
            )));
        }
        // Momentum -> angle, multiply the kick phase, angle -> momentum.
        self.inv.process_with_scratch(&mut state.amps, &mut self.scratch);
        for (a, &c) in state.amps.iter_mut().zip(&self.cos_theta) {
            let (sin, cos) = (-strength * c).sin_cos();
            *a *= Complex64::new(cos, sin);
        }
        self.fwd.process_with_scratch(&mut state.amps, &mut self.scratch);
        let scale = 1.0 / self.grid as f64;
        for a in state.amps.iter_mut() {
            *a *= scale;
        }

        let boundary: f64 = state.amps[self.boundary.clone()]
            .iter()
            .map(|a| a.norm_sqr())
            .sum();
        let population = boundary / state.norm_sq();
        if population > BOUNDARY_LIMIT {
            return Err(Error::GridOverflow {
                population,
                limit: BOUNDARY_LIMIT,
                kick: kick_index,
                grid: self.grid,
            });
        }
        Ok(())
    }
}

/// Free-evolution phases `exp(-i*tau*(n+beta)^2/2)` for a whole grid.
fn free_phases(grid: usize, tau: f64, beta: f64) -> Vec<Complex64> {
    (0..grid)
        .map(|m| {
            let p = momentum_number(m, grid) as f64 + beta;
            let (sin, cos) = (-tau * p * p / 2.0).sin_cos();
            Complex64::new(cos, sin)
        })
        .collect()
}

/// Free flight over one kicking period: `exp(-i*tau*(n+beta)^2/2)`, diagonal
/// in momentum.
pub fn free_evolution(state: &mut QuantumState, tau: f64) {
    let phases = free_phases(state.grid_size(), tau, state.beta);
    for (a, p) in state.amps.iter_mut().zip(&phases) {
        *a *= p;
    }
}

/// Per-kick energy record of one evolved fiber.
#[derive(Debug, Clone)]
pub struct EvolutionRecord {
    /// Kinetic energy of the initial state.
    pub initial_energy: f64,
    /// Kinetic energy after each kick period (length `t`).
    pub energies: Vec<f64>,
}

impl EvolutionRecord {
    /// Energy change from the initial state to after the final kick.
    pub fn energy_change(&self) -> f64 {
        self.energies.last().copied().unwrap_or(self.initial_energy) - self.initial_energy
    }
}

/// Evolve a fiber through `params.t` kick periods with noisy kick strengths
/// from `noise` substream `trajectory`.  Fails with [`Error::GridOverflow`]
/// if the state outgrows the grid.
pub fn evolve(
    state: &mut QuantumState,
    params: &SystemParams,
    noise: &NoiseModel,
    trajectory: u64,
) -> Result<EvolutionRecord> {
    let mut prop = Propagator::new(state.grid_size())?;
    let free = free_phases(state.grid_size(), params.tau(), state.beta);
    let initial_energy = state.kinetic_energy();
    let mut energies = Vec::with_capacity(params.t);
    for s in 0..params.t {
        let strength = noise.kick_strength(params.k, trajectory, s as u64);
        prop.kick(state, strength, s)?;
        for (a, p) in state.amps.iter_mut().zip(&free) {
            *a *= p;
        }
        energies.push(state.kinetic_energy());
    }
    Ok(EvolutionRecord { initial_energy, energies })
}

/// Evolve the fiber `|n0 + beta>`, doubling the momentum grid and rerunning
/// on overflow until the boundary stays clean (or [`MAX_GRID`] is reached,
/// in which case the overflow is reported).  Deterministic: the final grid
/// depends only on the fiber's own dynamics.
pub fn evolve_adaptive(
    params: &SystemParams,
    noise: &NoiseModel,
    trajectory: u64,
    n0: i64,
    beta: f64,
    start_grid: usize,
) -> Result<(QuantumState, EvolutionRecord)> {
    // Start large enough to represent n0 away from the boundary.
    let mut grid = start_grid;
    while (8 * (n0.unsigned_abs() + 1)) as usize > grid {
        grid *= 2;
    }
    loop {
        let mut state = QuantumState::plane_wave(n0, beta, grid)?;
        match evolve(&mut state, params, noise, trajectory) {
            Ok(record) => return Ok((state, record)),
            Err(Error::GridOverflow { .. }) if grid < MAX_GRID => grid *= 2,
            Err(e) => return Err(e),
        }
    }
}

// ---------------------------------------------------------------------------
// Quasimomentum averages
// ---------------------------------------------------------------------------

/// Ensemble average over a uniform quasimomentum grid.
#[derive(Debug, Clone)]
pub struct BetaAverage {
    /// Mean energy change after the final kick.
    pub mean: f64,
    /// Standard error over fibers (conservative at zero noise, where the
    /// fiber-to-fiber spread is deterministic).
    pub stderr: f64,
    /// Mean energy change after each kick (length `t`).
    pub per_kick: Vec<f64>,
    pub n_beta: usize,
}

/// Average the energy change of initially-at-rest atoms (`n0 = 0`) over the
/// quasimomentum grid `beta_m = m / n_beta`, each fiber carrying an
/// independent noise substream.
///
/// The equally spaced grid integrates the resonant `beta` dependence exactly
/// once `n_beta` exceeds the harmonic content `2*ell*(t-1)` of the fiber
/// energy, so at `L = 0` the result is quadrature-exact; at `L > 0` the
/// leftover error is the noise-sampling one reported in `stderr`.
pub fn beta_average(
    params: &SystemParams,
    noise: &NoiseModel,
    n_beta: usize,
) -> Result<BetaAverage> {
    if n_beta == 0 {
        return Err(Error::Parameter("n_beta must be >= 1".into()));
    }
    let records: Vec<EvolutionRecord> = (0..n_beta as u64)
        .into_par_iter()
        .map(|m| {
            let beta = m as f64 / n_beta as f64;
            evolve_adaptive(params, noise, m, 0, beta, DEFAULT_GRID).map(|(_, rec)| rec)
        })
        .collect::<Result<Vec<_>>>()?;

    // Sequential fixed-order reduction keeps results bit-reproducible.
    let changes: Vec<f64> = records.iter().map(|r| r.energy_change()).collect();
    let nf = n_beta as f64;
    let mean = changes.iter().sum::<f64>() / nf;
    let stderr = if n_beta > 1 {
        let var =
            changes.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (nf - 1.0);
        (var / nf).sqrt()
    } else {
        0.0
    };
    let mut per_kick = vec![0.0; params.t];
    for rec in &records {
        for (s, e) in rec.energies.iter().enumerate() {
            per_kick[s] += e - rec.initial_energy;
        }
    }
    for e in per_kick.iter_mut() {
        *e /= nf;
    }
    Ok(BetaAverage { mean, stderr, per_kick, n_beta })
}

/// Variance-reduced estimate of the noisy resonance-peak energy.
#[derive(Debug, Clone)]
pub struct ShotAverage {
    /// Mean energy change after the final kick.
    pub mean: f64,
    /// Standard error over antithetic shot pairs.
    pub stderr: f64,
    /// Number of antithetic pairs averaged.
    pub pairs: usize,
    /// Total fibers evolved (`2 * pairs * grid`).
    pub fibers: usize,
}

/// Smallest quasimomentum grid that integrates a resonant fiber energy
/// exactly: at `tau = 2*pi*ell` the energy after `t` kicks is a trigonometric
/// polynomial in `beta` whose order the grid must exceed.
pub fn resonant_beta_grid(params: &SystemParams) -> usize {
    2 * params.ell as usize * params.t.saturating_sub(1) + 1
}

/// Average the resonance-peak energy over noise with whole-grid shots and
/// antithetic pairing.
///
/// Sampling one independent noise sequence per fiber makes the estimator
/// variance at the resonance peak blow up: a few near-resonant fibers grow
/// ballistically and dominate the fiber-to-fiber spread.  This estimator
/// instead applies the *same* kick sequence `k_s` to an entire exact
/// quasimomentum grid ("shot").  The grid average at fixed `k_s` collapses to
/// `(1/4) sum_s k_s^2` — the cross terms carrying the resonant spread
/// integrate to zero exactly — so only the noise dependence of `sum k_s^2`
/// fluctuates between shots.  Averaging each shot with its mirrored partner
/// (every draw negated) also cancels the term linear in the draws, leaving a
/// relative standard error of order `L^2 / sqrt(180 * t * pairs)`.
///
/// Each pair rotates the grid by a random offset, so the ensemble still
/// covers quasimomentum densely; any offset keeps the quadrature exact.  The
/// estimate is unbiased for every `epsilon`, but the variance cancellation —
/// and hence the point of the design — is specific to the peak, so callers
/// away from `epsilon = 0` want [`beta_average`] instead.
pub fn resonance_peak_average(
    params: &SystemParams,
    level: f64,
    master_seed: u64,
    pairs: usize,
) -> Result<ShotAverage> {
    if pairs == 0 {
        return Err(Error::Parameter("pairs must be >= 1".into()));
    }
    let grid = resonant_beta_grid(params);
    let noise = NoiseModel::new(level, master_seed)?;
    let mut samples = Vec::with_capacity(pairs);
    for shot in 0..pairs as u64 {
        let offset = stream::uniform(master_seed, purpose::SHOT, shot, 0);
        let mut pair_sum = 0.0;
        for noise in [noise, noise.mirrored()] {
            let changes: Vec<f64> = (0..grid as u64)
                .into_par_iter()
                .map(|m| {
                    let beta = (m as f64 + offset) / grid as f64;
                    evolve_adaptive(params, &noise, shot, 0, beta, DEFAULT_GRID)
                        .map(|(_, rec)| rec.energy_change())
                })
                .collect::<Result<Vec<_>>>()?;
            pair_sum += changes.iter().sum::<f64>() / grid as f64;
        }
        samples.push(pair_sum / 2.0);
    }
    let n = pairs as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let stderr = if pairs > 1 {
        let var =
            samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(ShotAverage { mean, stderr, pairs, fibers: 2 * pairs * grid })
}

// ---------------------------------------------------------------------------
// Momentum distributions
// ---------------------------------------------------------------------------

/// Probability over momentum states of one fiber, in ascending momentum.
#[derive(Debug, Clone)]
pub struct MomentumDistribution {
    /// Physical momenta `n + beta`.
    pub momenta: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl MomentumDistribution {
    pub fn from_state(state: &QuantumState) -> Self {
        let grid = state.grid_size();
        let half = grid as i64 / 2;
        let mut momenta = Vec::with_capacity(grid);
        let mut probabilities = Vec::with_capacity(grid);
        for n in -half..half {
            momenta.push(n as f64 + state.beta);
            probabilities.push(state.amplitude(n).norm_sqr());
        }
        MomentumDistribution { momenta, probabilities }
    }

    pub fn total_probability(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Mean kinetic energy of the distribution.
    pub fn energy(&self) -> f64 {
        self.momenta
            .iter()
            .zip(&self.probabilities)
            .map(|(p, w)| w * p * p)
            .sum::<f64>()
            / 2.0
    }
}

/// Energy change of a distribution relative to a reference energy.
pub fn mean_energy(dist: &MomentumDistribution, reference: f64) -> f64 {
    dist.energy() - reference
}

// ---------------------------------------------------------------------------
