//! The eps-classical map: the small-`|eps|` reduction of the quantum
//! dynamics near a resonance `tau = 2*pi*ell + eps`.
//!
//! One kick advances a trajectory as
//!
//! ```text
//! theta' = (theta + J) mod 2*pi
//! J'     = J + |eps| * k_s * sin(theta')
//! ```
//!
//! (free rotation first, then the kick at the updated angle), with
//! `k_s = k * (1 + R_s)` the noisy kick strength.  The map momentum carries
//! the conserved quasimomentum as `J = |eps|*n + pi*ell + tau*beta`, so a
//! physical momentum change maps exactly to `delta p = (J_t - J_0)/|eps|`
//! and the kinetic-energy change of a trajectory starting at `p_0` is
//! `delta p^2 / 2 + delta p * p_0`.  At exact resonance (`eps = 0`) the map
//! degenerates and the energy follows the closed-form free-rotation limit
//! instead; see [`resonance_limit_energy`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    sample_initial_conditions, InitialCondition, InitialEnsemble, NoiseModel, SystemParams,
};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Phase-space point of the reduced map.  `theta` is kept in `[0, 2*pi)`;
/// `J` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapState {
    pub theta: f64,
    pub j: f64,
}

/// One kick of the map.  `impulse` is the full momentum-kick coefficient
/// `|eps| * k_s` for this step.
pub fn map_step(state: MapState, impulse: f64) -> MapState {
    let theta = (state.theta + state.j).rem_euclid(TWO_PI);
    MapState {
        theta,
        j: state.j + impulse * theta.sin(),
    }
}

/// Exact inverse of [`map_step`], used for reversibility checks.
pub fn map_step_back(state: MapState, impulse: f64) -> MapState {
    let j = state.j - impulse * state.theta.sin();
    MapState {
        theta: (state.theta - j).rem_euclid(TWO_PI),
        j,
    }
}

/// An ensemble of map trajectories evolving under common parameters.
///
/// Trajectory `i` consumes the noise substream `i` of whichever
/// [`NoiseModel`] is passed to [`evolve_ensemble`], so results do not depend
/// on scheduling or thread count.
#[derive(Debug, Clone)]
pub struct MapEnsemble {
    pub params: SystemParams,
    /// Initial conditions, kept for energy bookkeeping and classification.
    pub initial: Vec<InitialCondition>,
    /// Current state of each trajectory.
    pub states: Vec<MapState>,
    /// Kicks applied so far (noise counters continue from here).
    pub kicks_done: usize,
}

impl MapEnsemble {
    /// Wrap explicit initial conditions.
    pub fn from_initial_conditions(
        params: SystemParams,
        initial: Vec<InitialCondition>,
    ) -> Result<Self> {
        if initial.is_empty() {
            return Err(Error::Parameter("ensemble must contain at least one trajectory".into()));
        }
        let states = initial
            .iter()
            .map(|ic| MapState { theta: ic.theta0, j: ic.j0 })
            .collect();
        Ok(MapEnsemble { params, initial, states, kicks_done: 0 })
    }

    /// Sample a fresh ensemble from the counter stream rooted at `seed`.
    pub fn sample(
        params: SystemParams,
        ensemble: &InitialEnsemble,
        seed: u64,
    ) -> Result<Self> {
        let initial = sample_initial_conditions(ensemble, &params, seed)?;
        Self::from_initial_conditions(params, initial)
    }

    /// Kinetic-energy change of each trajectory.
    ///
    /// The momentum change is recovered exactly as `delta p = (J - J0)/|eps|`
    /// (the quasimomentum part of `J` never moves), so the energy change of
    /// an atom starting at `p0 = n0 + beta` is
    /// `(J - J0)^2 / (2*eps^2) + (J - J0) * p0 / |eps|`.  The cross term is
    /// what a plane wave with nonzero quasimomentum actually gains from a
    /// momentum kick; dropping it undershoots beta-averaged quantum energies
    /// by a few percent once the resonant growth has saturated.
    pub fn per_trajectory_energy(&self) -> Result<Vec<f64>> {
        let eps = self.params.epsilon;
        if eps == 0.0 {
            return Err(Error::Parameter(
                "energy is undefined through the map at eps = 0; \
                 use resonance_limit_energy instead"
                    .into(),
            ));
        }
        let eps_abs = eps.abs();
        Ok(self
            .states
            .iter()
            .zip(&self.initial)
            .map(|(s, ic)| {
                let dj = s.j - ic.j0;
                let p0 = ic.n0 as f64 + ic.beta;
                dj * dj / (2.0 * eps * eps) + dj * p0 / eps_abs
            })
            .collect())
    }
}

/// Mean and standard error of an ensemble-averaged energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyStat {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl EnergyStat {
    /// Mean and standard error (`std / sqrt(n)`) of raw per-sample values.
    /// A single sample reports zero standard error.
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (n as f64 - 1.0);
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        EnergyStat { mean, stderr, samples: n }
    }
}

/// Advance every trajectory by `kicks` kicks.  May be called repeatedly; the
/// noise counters pick up where the previous call stopped, so evolving
/// `a + b` kicks in two calls is bit-identical to one call of `a + b`.
pub fn evolve_ensemble(ensemble: &mut MapEnsemble, noise: &NoiseModel, kicks: usize) {
    let params = ensemble.params;
    let eps = params.epsilon.abs();
    let start = ensemble.kicks_done as u64;
    ensemble
        .states
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, state)| {
            let traj = i as u64;
            let scale = eps * params.k * noise.k_scale(traj);
            let mut s = *state;
            for kick in 0..kicks as u64 {
                let impulse = scale * (1.0 + noise.kick_factor(traj, start + kick));
                s = map_step(s, impulse);
            }
            *state = s;
        });
    ensemble.kicks_done += kicks;
}

/// Ensemble-averaged kinetic-energy change after the kicks applied so far.
/// Fails at `eps = 0`, where the map carries no energy information.
pub fn ensemble_energy(ensemble: &MapEnsemble) -> Result<EnergyStat> {
    let energies = ensemble.per_trajectory_energy()?;
    Ok(EnergyStat::from_samples(&energies))
}

/// Energy of a single trajectory at exact resonance (`eps -> 0` limit):
/// the map momentum freezes at `J0`, the angle winds ballistically, and
///
/// ```text
/// E_t = (1/2) * [ sum_s k_s * sin(theta0 + s*J0) ]^2 ,   s = 0 .. t-1 ,
/// ```
///
/// with `kick_strengths[s] = k_s` the (noisy) kick strengths.
pub fn resonance_limit_energy(theta0: f64, j0: f64, kick_strengths: &[f64]) -> f64 {
    let sum: f64 = kick_strengths
        .iter()
        .enumerate()
        .map(|(s, k)| k * (theta0 + s as f64 * j0).sin())
        .sum();
    0.5 * sum * sum
}

/// Ensemble average of [`resonance_limit_energy`] over sampled initial
/// conditions and noise, for `t` kicks at exact resonance.
pub fn resonance_limit_ensemble_energy(
    params: &SystemParams,
    noise: &NoiseModel,
    ensemble: &InitialEnsemble,
    seed: u64,
) -> Result<EnergyStat> {
    let ics = sample_initial_conditions(ensemble, params, seed)?;
    let energies: Vec<f64> = ics
        .par_iter()
        .enumerate()
        .map(|(i, ic)| {
            let traj = i as u64;
            let k = params.k * noise.k_scale(traj);
            let kicks: Vec<f64> = (0..params.t as u64)
                .map(|s| k * (1.0 + noise.kick_factor(traj, s)))
                .collect();
            resonance_limit_energy(ic.theta0, ic.j0, &kicks)
        })
        .collect();
    Ok(EnergyStat::from_samples(&energies))
}

/// Full `(theta, J)` history of a single trajectory, initial state included.
/// `trajectory` selects the noise substream.
pub fn trajectory_history(
    params: &SystemParams,
    noise: &NoiseModel,
    ic: &InitialCondition,
    trajectory: u64,
    kicks: usize,
) -> Vec<MapState> {
    let eps = params.epsilon.abs();
    let scale = eps * params.k * noise.k_scale(trajectory);
    let mut history = Vec::with_capacity(kicks + 1);
    let mut state = MapState { theta: ic.theta0, j: ic.j0 };
    history.push(state);
    for s in 0..kicks as u64 {
        let impulse = scale * (1.0 + noise.kick_factor(trajectory, s));
        state = map_step(state, impulse);
        history.push(state);
    }
    history
}

// ---------------------------------------------------------------------------
