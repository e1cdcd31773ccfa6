//! Phase-space picture of the reduced map: Poincare sections, the pendulum
//! separatrix of the principal resonance island, and the noise-smeared
//! separatrix band through which amplitude noise converts librating orbits
//! into rotating ones.
//!
//! Portraits reduce `J` modulo `2*pi` for display (one cell); everything
//! that measures transport (libration bounds, escape statistics) keeps `J`
//! unwrapped.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{purpose, stream, NoiseModel, SystemParams};
use crate::pclassical::{map_step, MapState};
use crate::scaling::{classify_pendulum, Topology};

const PI: f64 = std::f64::consts::PI;
const TWO_PI: f64 = std::f64::consts::TAU;

/// One recorded orbit of a Poincare section.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub theta0: f64,
    pub j0: f64,
    /// `(theta, J mod 2*pi)` after each iteration, initial point included.
    pub points: Vec<(f64, f64)>,
}

/// A set of orbits evolved under common parameters and noise.
#[derive(Debug, Clone)]
pub struct PhasePortrait {
    pub params: SystemParams,
    pub noise_level: f64,
    pub seed: u64,
    pub iterations: usize,
    pub orbits: Vec<Orbit>,
}

/// Poincare section from an `n_theta x n_j` uniform lattice of initial
/// conditions in one `(theta, J mod 2*pi)` cell, each orbit evolved
/// `iterations` kicks with its own noise substream.
pub fn poincare_section(
    params: &SystemParams,
    noise: &NoiseModel,
    n_theta: usize,
    n_j: usize,
    iterations: usize,
) -> Result<PhasePortrait> {
    if n_theta == 0 || n_j == 0 {
        return Err(Error::Parameter("portrait grid must be at least 1 x 1".into()));
    }
    let eps = params.epsilon.abs();
    let orbits: Vec<Orbit> = (0..n_theta * n_j)
        .into_par_iter()
        .map(|idx| {
            let theta0 = TWO_PI * (idx / n_j) as f64 / n_theta as f64;
            let j0 = TWO_PI * (idx % n_j) as f64 / n_j as f64;
            let traj = idx as u64;
            let scale = eps * params.k * noise.k_scale(traj);
            let mut state = MapState { theta: theta0, j: j0 };
            let mut points = Vec::with_capacity(iterations + 1);
            points.push((state.theta, state.j.rem_euclid(TWO_PI)));
            for s in 0..iterations as u64 {
                let impulse = scale * (1.0 + noise.kick_factor(traj, s));
                state = map_step(state, impulse);
                points.push((state.theta, state.j.rem_euclid(TWO_PI)));
            }
            Orbit { theta0, j0, points }
        })
        .collect();
    Ok(PhasePortrait {
        params: *params,
        noise_level: noise.level,
        seed: noise.master_seed,
        iterations,
        orbits,
    })
}

/// The pendulum separatrix `J(theta) = +-2*sqrt(k_eff)*|sin(theta/2)|` of
/// the island centered at `(theta, J) = (pi, 0)`, sampled on `n_points`
/// angles covering `[0, 2*pi]` inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatrixCurve {
    pub theta: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

fn curve_from_k_eff(k_eff: f64, n_points: usize) -> SeparatrixCurve {
    let amp = 2.0 * k_eff.sqrt();
    let mut theta = Vec::with_capacity(n_points);
    let mut upper = Vec::with_capacity(n_points);
    let mut lower = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let th = TWO_PI * i as f64 / (n_points - 1) as f64;
        let j = amp * (th / 2.0).sin().abs();
        theta.push(th);
        upper.push(j);
        lower.push(-j);
    }
    SeparatrixCurve { theta, upper, lower }
}

/// Separatrix polyline for effective kick strength `k_eff = k*|eps| > 0`.
pub fn separatrix_curve(k_eff: f64, n_points: usize) -> Result<SeparatrixCurve> {
    if !(k_eff.is_finite() && k_eff > 0.0) {
        return Err(Error::Parameter(format!(
            "effective kick strength k_eff = {k_eff} must be positive"
        )));
    }
    if n_points < 2 {
        return Err(Error::Parameter("separatrix polyline needs >= 2 points".into()));
    }
    Ok(curve_from_k_eff(k_eff, n_points))
}

/// The noise-smeared separatrix region: with kick strengths `k*(1+R)` and
/// `R` uniform on `[-L/2, L/2]`, the instantaneous separatrix sweeps between
/// the curves for `k*(1 - L/2)` and `k*(1 + L/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmearedBand {
    /// Bare separatrix at the nominal kick strength.
    pub nominal: SeparatrixCurve,
    /// Separatrix at `k*(1 - L/2)` (flat zero at L = 2).
    pub inner: SeparatrixCurve,
    /// Separatrix at `k*(1 + L/2)`.
    pub outer: SeparatrixCurve,
    /// Mean-square width factor `1 + L/4` of the upward fluctuations.
    pub mean_square_width_factor: f64,
}

/// Band of separatrix positions swept by the noise, bounded by the support
/// endpoints of the noise distribution.
pub fn smeared_band(k: f64, epsilon: f64, level: f64, n_points: usize) -> Result<SmearedBand> {
    let k_eff = k * epsilon.abs();
    if !(k_eff.is_finite() && k_eff > 0.0) {
        return Err(Error::Parameter(format!(
            "k*|eps| = {k_eff} must be positive"
        )));
    }
    if !(0.0..=2.0).contains(&level) {
        return Err(Error::Parameter(format!("noise level L = {level} must lie in [0, 2]")));
    }
    if n_points < 2 {
        return Err(Error::Parameter("band polylines need >= 2 points".into()));
    }
    Ok(SmearedBand {
        nominal: curve_from_k_eff(k_eff, n_points),
        inner: curve_from_k_eff(k_eff * (1.0 - level / 2.0), n_points),
        outer: curve_from_k_eff(k_eff * (1.0 + level / 2.0), n_points),
        mean_square_width_factor: 1.0 + level / 4.0,
    })
}

/// Largest `|dJ|` for which the noise-free orbit launched at `theta = pi`
/// stays librating, found by bisection.  The pendulum approximation predicts
/// `2*sqrt(k*|eps|)`; the measured value differs by the map's finite-kick
/// deformation of the island.
///
/// An orbit counts as librating while its unwrapped angle stays within one
/// full turn of the island center over `iterations` kicks.
pub fn island_half_width(k: f64, epsilon: f64, iterations: usize) -> Result<f64> {
    let k_eff = k * epsilon.abs();
    if !(k_eff.is_finite() && k_eff > 0.0) {
        return Err(Error::Parameter(format!("k*|eps| = {k_eff} must be positive")));
    }
    if iterations == 0 {
        return Err(Error::Parameter("island width needs >= 1 iteration".into()));
    }

    let librates = |dj: f64| -> bool {
        let mut theta = PI;
        let mut j = dj;
        for _ in 0..iterations {
            // Unreduced map; sin() is 2*pi-periodic so reduction is not
            // needed for the dynamics, only for the libration test.
            theta += j;
            j += k_eff * theta.sin();
            if (theta - PI).abs() >= TWO_PI {
                return false;
            }
        }
        true
    };

    let mut lo = 0.0;
    let mut hi = 4.0 * k_eff.sqrt(); // comfortably outside the island
    if librates(hi) {
        return Ok(hi);
    }
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if librates(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Escape statistics of initially-librating orbits under noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeStats {
    /// Weight (relative to the full `(2*pi)^2` cell) of trajectories that
    /// started librating and ended rotating.
    pub escaped_weight: f64,
    /// Initially-librating weight relative to the cell (the island area
    /// fraction, up to sampling error).
    pub librating_weight: f64,
    pub samples: usize,
}

/// Monte Carlo escape measurement: sample the cell uniformly, classify each
/// point by its initial pendulum energy, evolve `kicks` kicks with unwrapped
/// `J`, and count initially-librating trajectories that end rotating.
pub fn escaped_weight(
    params: &SystemParams,
    noise: &NoiseModel,
    samples: usize,
    kicks: usize,
    seed: u64,
) -> Result<EscapeStats> {
    let k_eff = params.k_eff();
    if k_eff <= 0.0 {
        return Err(Error::Parameter(
            "escape statistics need k*|eps| > 0 (no islands at eps = 0)".into(),
        ));
    }
    if samples == 0 {
        return Err(Error::Parameter("escape statistics need >= 1 sample".into()));
    }

    let eps = params.epsilon.abs();
    let counts: Vec<(bool, bool)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let theta0 = TWO_PI * stream::uniform(seed, purpose::CELL, i, 0);
            let j0 = TWO_PI * stream::uniform(seed, purpose::CELL, i, 1);
            if classify_pendulum(theta0, j0, k_eff) != Topology::Librating {
                return (false, false);
            }
            let scale = eps * params.k * noise.k_scale(i);
            let mut state = MapState { theta: theta0, j: j0 };
            for s in 0..kicks as u64 {
                let impulse = scale * (1.0 + noise.kick_factor(i, s));
                state = map_step(state, impulse);
            }
            let escaped = classify_pendulum(state.theta, state.j, k_eff) == Topology::Rotating;
            (true, escaped)
        })
        .collect();

    let librating = counts.iter().filter(|(l, _)| *l).count();
    let escaped = counts.iter().filter(|(_, e)| *e).count();
    Ok(EscapeStats {
        escaped_weight: escaped as f64 / samples as f64,
        librating_weight: librating as f64 / samples as f64,
        samples,
    })
}

// ---------------------------------------------------------------------------
