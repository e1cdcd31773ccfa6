//! Shared parameter types, unit conversion, and the reproducible noise /
//! initial-condition sampling used by both evolution engines.
//!
//! All randomness is counter-based: a draw is a pure function of
//! `(master_seed, purpose, trajectory, index)`, hashed through chained
//! SplitMix64 finalizer rounds.  Trajectories therefore own independent,
//! order-free substreams, which keeps parallel runs bit-reproducible and lets
//! the quantum and classical engines consume identical noise histories.

use crate::error::{Error, Result};

/// Largest `|eps|` for which the eps-classical reduction is trusted; sweep
/// rows outside this window are flagged, and experimental points are dropped
/// during rescaling.
pub const PSEUDOCLASSICAL_EPS_LIMIT: f64 = 0.15;

const TWO_PI: f64 = std::f64::consts::TAU;

// ---------------------------------------------------------------------------
// Counter-based random streams
// ---------------------------------------------------------------------------

/// Purpose tags keep draws for different roles statistically disjoint even
/// when they share a master seed and trajectory index.
pub(crate) mod purpose {
    pub const KICK_NOISE: u64 = 1;
    pub const K_JITTER: u64 = 2;
    pub const THETA0: u64 = 3;
    pub const BETA: u64 = 4;
    pub const MOMENTUM: u64 = 5;
    pub const SWEEP: u64 = 6;
    pub const CELL: u64 = 7;
    pub const POINT: u64 = 8;
    pub const SHOT: u64 = 9;
}

pub(crate) mod stream {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

    /// SplitMix64 finalizer; full-avalanche mixing of one word.
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn absorb(h: u64, word: u64) -> u64 {
        mix(h ^ word.wrapping_mul(GOLDEN))
    }

    /// Hash of the full draw coordinate `(seed, purpose, trajectory, index)`.
    pub fn counter(seed: u64, purpose: u64, trajectory: u64, index: u64) -> u64 {
        absorb(absorb(absorb(mix(seed ^ GOLDEN), purpose), trajectory), index)
    }

    /// Uniform draw on `[0, 1)` with 53-bit resolution.
    pub fn uniform(seed: u64, purpose: u64, trajectory: u64, index: u64) -> f64 {
        (counter(seed, purpose, trajectory, index) >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Standard normal draw (Box-Muller over two counter values).
    pub fn gaussian(seed: u64, purpose: u64, trajectory: u64, index: u64) -> f64 {
        // Shift into (0, 1] so the logarithm is finite.
        let u1 = ((counter(seed, purpose, trajectory, 2 * index) >> 11) + 1) as f64
            / (1u64 << 53) as f64;
        let u2 = uniform(seed, purpose, trajectory, 2 * index + 1);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Derived master seed for an indexed sub-task (sweep point, tabulation
    /// node, ...), so each task owns a disjoint family of substreams.
    pub fn derive(seed: u64, purpose: u64, index: u64) -> u64 {
        counter(seed, purpose, index, 0)
    }
}

// ---------------------------------------------------------------------------
// System parameters
// ---------------------------------------------------------------------------

/// Physical parameters of one kicked-rotor run.
///
/// The kicking period is stored through its detuning from the resonance of
/// order `ell`: `tau = 2*pi*ell + epsilon`.  `epsilon` may take either sign;
/// the classical reduction depends only on `|epsilon|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Dimensionless kick strength `k`.
    pub k: f64,
    /// Number of kicks.
    pub t: usize,
    /// Resonance order `ell >= 1` (`tau` near `2*pi*ell`).
    pub ell: u32,
    /// Detuning `eps = tau - 2*pi*ell`.
    pub epsilon: f64,
}

impl SystemParams {
    pub fn new(k: f64, t: usize, ell: u32, epsilon: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::Parameter(format!("kick strength k = {k} must be positive")));
        }
        if ell == 0 {
            return Err(Error::Parameter("resonance order ell must be >= 1".into()));
        }
        if !epsilon.is_finite() {
            return Err(Error::Parameter(format!("detuning eps = {epsilon} must be finite")));
        }
        let params = SystemParams { k, t, ell, epsilon };
        if params.tau() <= 0.0 {
            return Err(Error::Parameter(format!(
                "kicking period tau = {} must be positive",
                params.tau()
            )));
        }
        Ok(params)
    }

    /// Build from an absolute kicking period instead of a detuning.
    pub fn with_tau(k: f64, t: usize, ell: u32, tau: f64) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::Parameter(format!("tau = {tau} must be finite")));
        }
        Self::new(k, t, ell, tau - TWO_PI * f64::from(ell))
    }

    /// Kicking period `tau = 2*pi*ell + eps`.
    pub fn tau(&self) -> f64 {
        TWO_PI * f64::from(self.ell) + self.epsilon
    }

    /// Effective kick strength `k_eff = k*|eps|` of the reduced map.
    pub fn k_eff(&self) -> f64 {
        self.k * self.epsilon.abs()
    }

    /// Scaling variable `x = t * sqrt(k*|eps|)`.
    pub fn x(&self) -> f64 {
        self.t as f64 * self.k_eff().sqrt()
    }

    /// Whether `|eps|` is small enough for the reduced map (and hence the
    /// scaling law) to apply.
    pub fn scaling_valid(&self) -> bool {
        self.epsilon.abs() <= PSEUDOCLASSICAL_EPS_LIMIT
    }

    /// Same parameters with a different kick count.
    pub fn with_kicks(&self, t: usize) -> Self {
        SystemParams { t, ..*self }
    }
}

// ---------------------------------------------------------------------------
// Laboratory units
// ---------------------------------------------------------------------------

/// Laboratory quantities describing a pulsed-optical-lattice experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabUnits {
    /// Recoil frequency `omega_r = hbar*k_L^2 / (2*M)` in rad/s.
    pub omega_r: f64,
    /// Pulse period `T` in seconds.
    pub period: f64,
    /// Lattice wavenumber `k_L` in 1/m.
    pub wavenumber: f64,
    /// Atomic mass `M` in kg.
    pub mass: f64,
}

/// Dimensionless kicking period `tau = 8 * omega_r * T`.
pub fn tau_from_lab(units: &LabUnits) -> Result<f64> {
    for (name, value) in [
        ("omega_r", units.omega_r),
        ("period", units.period),
        ("wavenumber", units.wavenumber),
        ("mass", units.mass),
    ] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Parameter(format!(
                "lab quantity {name} = {value} must be positive and finite"
            )));
        }
    }
    Ok(8.0 * units.omega_r * units.period)
}

// ---------------------------------------------------------------------------
// Noise model
// ---------------------------------------------------------------------------

/// Multiplicative kick-amplitude noise: kick `s` of trajectory `i` is
/// delivered with strength `k * (1 + R_{i,s})`, `R` uniform on `[-L/2, L/2]`.
///
/// Draws come from the counter stream `(master_seed, KICK_NOISE, i, s)`, so a
/// given `(seed, trajectory, kick)` always yields the same factor no matter
/// in which order, or on how many threads, trajectories are evolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Noise level `L` in `[0, 2]`; `L = 0` switches noise off exactly.
    pub level: f64,
    /// Master seed of the noise stream.
    pub master_seed: u64,
    /// Fractional full width of a static per-trajectory spread of `k`
    /// (uniform), mimicking shot-to-shot calibration drift.  Zero by default.
    pub k_jitter: f64,
    /// Negate every centered draw (antithetic partner stream).
    pub mirror: bool,
}

impl NoiseModel {
    pub fn new(level: f64, master_seed: u64) -> Result<Self> {
        if !(0.0..=2.0).contains(&level) || !level.is_finite() {
            return Err(Error::Parameter(format!(
                "noise level L = {level} must lie in [0, 2]"
            )));
        }
        Ok(NoiseModel {
            level,
            master_seed,
            k_jitter: 0.0,
            mirror: false,
        })
    }

    /// The antithetic partner of this stream: every centered draw (kick noise
    /// and `k` jitter alike) comes out negated.  Since the draws are
    /// distributed symmetrically about zero, averaging a statistic over a
    /// stream/partner pair keeps its expectation while cancelling the linear
    /// part of its noise dependence exactly — a cheap variance reduction for
    /// ensemble means.
    pub fn mirrored(mut self) -> Self {
        self.mirror = !self.mirror;
        self
    }

    /// Enable a static uniform spread of fractional full width `width` on the
    /// kick strength of each trajectory.
    pub fn with_k_jitter(mut self, width: f64) -> Result<Self> {
        if !(width.is_finite() && (0.0..2.0).contains(&width)) {
            return Err(Error::Parameter(format!(
                "k jitter width {width} must lie in [0, 2)"
            )));
        }
        self.k_jitter = width;
        Ok(self)
    }

    fn sign(&self) -> f64 {
        if self.mirror { -1.0 } else { 1.0 }
    }

    /// Noise factor `R_{trajectory,kick}`, uniform on `[-L/2, L/2]`.
    pub fn kick_factor(&self, trajectory: u64, kick: u64) -> f64 {
        if self.level == 0.0 {
            return 0.0;
        }
        self.sign()
            * self.level
            * (stream::uniform(self.master_seed, purpose::KICK_NOISE, trajectory, kick) - 0.5)
    }

    /// Static kick-strength scale of one trajectory (1 unless `k_jitter` is
    /// set).
    pub fn k_scale(&self, trajectory: u64) -> f64 {
        if self.k_jitter == 0.0 {
            return 1.0;
        }
        1.0 + self.sign()
            * self.k_jitter
            * (stream::uniform(self.master_seed, purpose::K_JITTER, trajectory, 0) - 0.5)
    }

    /// Full kick strength `k * k_scale * (1 + R)` delivered at one kick.
    pub fn kick_strength(&self, k: f64, trajectory: u64, kick: u64) -> f64 {
        k * self.k_scale(trajectory) * (1.0 + self.kick_factor(trajectory, kick))
    }
}

// ---------------------------------------------------------------------------
// Initial ensembles
// ---------------------------------------------------------------------------

/// How initial conditions are distributed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleMode {
    /// Theory ensemble: `p0 = 0` exactly, quasimomentum `beta` uniform on
    /// `[0, 1)`, angle uniform on `[0, 2*pi)`.
    TheoryUniform,
    /// Experiment ensemble: `p0` Gaussian with standard deviation `sigma_p`
    /// (in two-photon recoils), split into `n0 = floor(p0)` and
    /// `beta = p0 - n0`; angle uniform.
    ExperimentGaussian { sigma_p: f64 },
}

/// Size and distribution of an initial ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialEnsemble {
    pub mode: EnsembleMode,
    pub size: usize,
}

/// One sampled initial condition, carrying both the quantum labels
/// `(n0, beta)` and the reduced-map coordinates `(theta0, j0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialCondition {
    /// Initial angle `theta0` in `[0, 2*pi)`.
    pub theta0: f64,
    /// Initial map momentum `J0 = |eps|*n0 + pi*ell + tau*beta`.
    pub j0: f64,
    /// Integer initial momentum.
    pub n0: i64,
    /// Quasimomentum in `[0, 1)`.
    pub beta: f64,
}

impl InitialCondition {
    /// Map momentum for given quantum labels under `params`.
    pub fn from_quantum_labels(n0: i64, beta: f64, theta0: f64, params: &SystemParams) -> Self {
        let j0 = params.epsilon.abs() * n0 as f64
            + std::f64::consts::PI * f64::from(params.ell)
            + params.tau() * beta;
        InitialCondition { theta0, j0, n0, beta }
    }
}

/// Draw `ensemble.size` initial conditions for `params` from the counter
/// stream rooted at `seed`.  Pure: identical arguments give identical output.
pub fn sample_initial_conditions(
    ensemble: &InitialEnsemble,
    params: &SystemParams,
    seed: u64,
) -> Result<Vec<InitialCondition>> {
    if ensemble.size == 0 {
        return Err(Error::Parameter("ensemble size must be >= 1".into()));
    }
    if let EnsembleMode::ExperimentGaussian { sigma_p } = ensemble.mode {
        if !(sigma_p.is_finite() && sigma_p >= 0.0) {
            return Err(Error::Parameter(format!(
                "momentum spread sigma_p = {sigma_p} must be non-negative"
            )));
        }
    }
    let ics = (0..ensemble.size as u64)
        .map(|i| {
            let theta0 = TWO_PI * stream::uniform(seed, purpose::THETA0, i, 0);
            let (n0, beta) = match ensemble.mode {
                EnsembleMode::TheoryUniform => (0, stream::uniform(seed, purpose::BETA, i, 0)),
                EnsembleMode::ExperimentGaussian { sigma_p } => {
                    let p0 = sigma_p * stream::gaussian(seed, purpose::MOMENTUM, i, 0);
                    let n0 = p0.floor();
                    (n0 as i64, p0 - n0)
                }
            };
            InitialCondition::from_quantum_labels(n0, beta, theta0, params)
        })
        .collect();
    Ok(ics)
}

// ---------------------------------------------------------------------------
