//! The one-parameter scaling law of the resonance peak and its deformation
//! by kick-amplitude noise.
//!
//! At exact resonance the mean energy after `t` kicks is ballistic,
//!
//! ```text
//! <<E_t>> = (k^2/4) * t * (1 + L^2/12) ,
//! ```
//!
//! and slightly off resonance it is cut down by a function of the single
//! variable `x = t * sqrt(k*|eps|)`:
//!
//! ```text
//! E / (k^2 t / 4) = H(x)       = 1 - Phi0(x) + (4/(pi*x)) * G(x) ,
//! ```
//!
//! where `Phi0` collects the saturation of rotating (outside-island)
//! trajectories of the reduced map and `G` the contribution of librating
//! (inside-island) ones.  `Phi0` and `G` carry no simple closed form; they
//! are tabulated once, deep in the small-`|eps|` limit, by decomposing
//! reduced-map ensembles by phase-space topology, and then interpolated.
//!
//! Noise deforms the law in two ways: the ballistic prefactor grows by
//! `1 + L^2/12`, and the smeared separatrix converts a fraction `L/(8*pi)`
//! of librating weight into rotating weight, giving
//!
//! ```text
//! E / (k^2 t / 4) = H(x, L) = 1 + L^2/12 - (1 - L/(8*pi)) * Phi0(x)
//!                             + (4/(pi*x)) * G(x) .
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{stream, purpose, EnsembleMode, InitialEnsemble, NoiseModel, SystemParams};
use crate::pclassical::{evolve_ensemble, MapEnsemble};

const PI: f64 = std::f64::consts::PI;
const TWO_PI: f64 = std::f64::consts::TAU;

/// Ballistic resonance-peak energy `(k^2/4) * t * (1 + L^2/12)`.
pub fn resonance_peak_energy(k: f64, t: usize, level: f64) -> f64 {
    k * k / 4.0 * t as f64 * (1.0 + level * level / 12.0)
}

/// Scaling variable `x = t * sqrt(k*|eps|)`.
pub fn scaling_variable(k: f64, epsilon: f64, t: usize) -> f64 {
    t as f64 * (k * epsilon.abs()).sqrt()
}

/// Relative rotating-weight gain `L/(8*pi)` produced by the noise-smeared
/// separatrix: the instantaneous island half-width `2*sqrt(k*|eps|*(1+R))`
/// fluctuates with the kick noise, and averaging the corresponding
/// phase-space areas over `R` transfers that fraction of the librating
/// weight to the rotating component.
pub fn rotating_weight_change(level: f64) -> f64 {
    level / (8.0 * PI)
}

/// Phase-space character of a reduced-map trajectory in the pendulum
/// approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Bound inside a resonance island.
    Librating,
    /// Outside the islands, winding in angle.
    Rotating,
}

/// Classify a point by the pendulum energy `H = dJ^2/2 + k_eff*cos(theta)`,
/// with `dJ` the distance of `J` from the nearest island center `2*pi*m`.
/// Librating means `H < k_eff`; the separatrix itself counts as rotating.
pub fn classify_pendulum(theta: f64, j: f64, k_eff: f64) -> Topology {
    let dj = (j + PI).rem_euclid(TWO_PI) - PI;
    if 0.5 * dj * dj + k_eff * theta.cos() < k_eff {
        Topology::Librating
    } else {
        Topology::Rotating
    }
}

/// [`classify_pendulum`] in physical parameters `k`, `eps`.  Fails at
/// `eps = 0`, where the reduced map has no islands.
pub fn classify_topology(theta0: f64, j0: f64, k: f64, epsilon: f64) -> Result<Topology> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Parameter(format!("kick strength k = {k} must be positive")));
    }
    if epsilon == 0.0 || !epsilon.is_finite() {
        return Err(Error::Parameter(
            "topology is undefined at eps = 0 (the reduced map degenerates)".into(),
        ));
    }
    Ok(classify_pendulum(theta0, j0, k * epsilon.abs()))
}

// ---------------------------------------------------------------------------
// Tabulation
// ---------------------------------------------------------------------------

/// Parameters of a scaling-function tabulation run.
///
/// Each requested grid point `x` is realized as an integer kick count
/// `t = round(x / sqrt(k_ref*eps_ref))`; points with `t < 1` are dropped
/// (counted in [`TableMeta::dropped`]) and duplicate kick counts are merged,
/// so the stored abscissae are the exactly realizable `x` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TabulationSpec {
    /// Reference detuning, small enough to sit in the scaling limit.
    pub eps_ref: f64,
    /// Reference kick strength.
    pub k_ref: f64,
    /// Resonance order.
    pub ell: u32,
    /// Trajectories per grid point.
    pub ensemble: usize,
    /// Requested range of the scaling variable (log-spaced grid).
    pub x_min: f64,
    pub x_max: f64,
    /// Number of requested grid points.
    pub points: usize,
    /// Master seed; grid point `i` derives its own ensemble seed from it.
    pub seed: u64,
}

impl Default for TabulationSpec {
    fn default() -> Self {
        TabulationSpec {
            eps_ref: 1e-4,
            k_ref: 2.8,
            ell: 2,
            ensemble: 200_000,
            x_min: 1e-2,
            x_max: 1e2,
            points: 60,
            seed: 7,
        }
    }
}

/// Provenance of a tabulated scaling function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableMeta {
    pub eps_ref: f64,
    pub k_ref: f64,
    pub ell: u32,
    pub ensemble: usize,
    pub seed: u64,
    pub requested_points: usize,
    /// Requested grid points that could not be realized (`t < 1`).
    pub dropped: usize,
}

/// Tabulated `Phi0` and `G` with monotone-cubic interpolation in `ln x`.
/// The table never extrapolates: queries outside the realized grid fail
/// with [`Error::OutOfRange`].
#[derive(Debug, Clone)]
pub struct ScalingTable {
    xs: Vec<f64>,
    phi0: Vec<f64>,
    g: Vec<f64>,
    meta: TableMeta,
    phi0_interp: Pchip,
    g_interp: Pchip,
}

/// Topology-resolved energy decomposition of one ensemble, in units of the
/// ballistic energy `k^2 t / 4`.  By construction
/// `rotating + librating = <E> / (k^2 t / 4)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NodeDecomposition {
    pub x: f64,
    pub rotating: f64,
    pub librating: f64,
}

/// Evaluate one tabulation node: evolve a noise-free theory ensemble for
/// `t` kicks of the reduced map and split the energy by initial topology.
pub(crate) fn tabulate_node(spec: &TabulationSpec, t: usize, idx: u64) -> Result<NodeDecomposition> {
    let params = SystemParams::new(spec.k_ref, t, spec.ell, spec.eps_ref)?;
    let k_eff = params.k_eff();
    let node_seed = stream::derive(spec.seed, purpose::POINT, idx);
    let ens_spec = InitialEnsemble { mode: EnsembleMode::TheoryUniform, size: spec.ensemble };
    let mut ens = MapEnsemble::sample(params, &ens_spec, node_seed)?;
    let topology: Vec<Topology> = ens
        .initial
        .iter()
        .map(|ic| classify_pendulum(ic.theta0, ic.j0, k_eff))
        .collect();
    evolve_ensemble(&mut ens, &NoiseModel::new(0.0, node_seed)?, t);
    let energies = ens.per_trajectory_energy()?;

    let denom = spec.ensemble as f64 * spec.k_ref * spec.k_ref * t as f64 / 4.0;
    let (mut rotating, mut librating) = (0.0, 0.0);
    for (e, topo) in energies.iter().zip(&topology) {
        match topo {
            Topology::Rotating => rotating += e,
            Topology::Librating => librating += e,
        }
    }
    Ok(NodeDecomposition {
        x: params.x(),
        rotating: rotating / denom,
        librating: librating / denom,
    })
}

/// Tabulate `Phi0(x)` and `G(x)` over a log grid of the scaling variable.
pub fn tabulate_phi0_g(spec: &TabulationSpec) -> Result<ScalingTable> {
    if !(spec.eps_ref.is_finite() && spec.eps_ref > 0.0)
        || spec.eps_ref > crate::model::PSEUDOCLASSICAL_EPS_LIMIT
    {
        return Err(Error::Parameter(format!(
            "eps_ref = {} must lie in (0, {}]",
            spec.eps_ref,
            crate::model::PSEUDOCLASSICAL_EPS_LIMIT
        )));
    }
    if spec.points < 2 || spec.ensemble == 0 {
        return Err(Error::Parameter("tabulation needs >= 2 points and a non-empty ensemble".into()));
    }
    if !(spec.x_min.is_finite() && spec.x_min > 0.0 && spec.x_max > spec.x_min) {
        return Err(Error::Parameter(format!(
            "invalid x range [{}, {}]",
            spec.x_min, spec.x_max
        )));
    }

    let step = (spec.k_ref * spec.eps_ref).sqrt();
    let ratio = (spec.x_max / spec.x_min).powf(1.0 / (spec.points - 1) as f64);

    let mut xs = Vec::new();
    let mut phi0 = Vec::new();
    let mut g = Vec::new();
    let mut dropped = 0usize;
    let mut last_t = 0usize;
    for idx in 0..spec.points {
        let x_req = spec.x_min * ratio.powi(idx as i32);
        let t = (x_req / step).round() as usize;
        if t < 1 {
            dropped += 1;
            continue;
        }
        if t == last_t {
            continue; // duplicate kick count; node already realized
        }
        last_t = t;
        let node = tabulate_node(spec, t, idx as u64)?;
        xs.push(node.x);
        phi0.push(1.0 - node.rotating);
        g.push(PI * node.x / 4.0 * node.librating);
    }

    let meta = TableMeta {
        eps_ref: spec.eps_ref,
        k_ref: spec.k_ref,
        ell: spec.ell,
        ensemble: spec.ensemble,
        seed: spec.seed,
        requested_points: spec.points,
        dropped,
    };
    ScalingTable::from_columns(xs, phi0, g, meta)
}

impl ScalingTable {
    /// Assemble a table from raw columns, validating the grid.
    pub fn from_columns(
        xs: Vec<f64>,
        phi0: Vec<f64>,
        g: Vec<f64>,
        meta: TableMeta,
    ) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::Parameter(format!(
                "scaling table needs at least two realized grid points, got {}",
                xs.len()
            )));
        }
        if xs.len() != phi0.len() || xs.len() != g.len() {
            return Err(Error::Parameter("scaling table columns differ in length".into()));
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Parameter("scaling-table grid must increase strictly".into()));
            }
        }
        if xs[0] <= 0.0
            || xs.iter().any(|v| !v.is_finite())
            || phi0.iter().chain(&g).any(|v| !v.is_finite())
        {
            return Err(Error::Parameter("scaling table values must be finite, x > 0".into()));
        }
        let lnx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let phi0_interp = Pchip::new(&lnx, &phi0);
        let g_interp = Pchip::new(&lnx, &g);
        Ok(ScalingTable { xs, phi0, g, meta, phi0_interp, g_interp })
    }

    pub fn meta(&self) -> &TableMeta {
        &self.meta
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn phi0_values(&self) -> &[f64] {
        &self.phi0
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g
    }

    /// Realized range of the scaling variable.
    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    fn check_range(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.x_range();
        if !x.is_finite() || x < lo || x > hi {
            return Err(Error::OutOfRange { quantity: "x", value: x, min: lo, max: hi });
        }
        Ok(())
    }

    /// Interpolated `Phi0(x)`.
    pub fn phi0(&self, x: f64) -> Result<f64> {
        self.check_range(x)?;
        Ok(self.phi0_interp.eval(x.ln()))
    }

    /// Interpolated `G(x)`.
    pub fn g(&self, x: f64) -> Result<f64> {
        self.check_range(x)?;
        Ok(self.g_interp.eval(x.ln()))
    }

    /// Noise-free scaling function `H(x) = 1 - Phi0 + (4/(pi*x)) G`.
    pub fn ratio(&self, x: f64) -> Result<f64> {
        self.check_range(x)?;
        let phi0 = self.phi0_interp.eval(x.ln());
        let g = self.g_interp.eval(x.ln());
        Ok(1.0 - phi0 + 4.0 / (PI * x) * g)
    }

    /// Noisy scaling function
    /// `H(x, L) = 1 + L^2/12 - (1 - L/(8*pi)) Phi0 + (4/(pi*x)) G`.
    pub fn noisy_ratio(&self, x: f64, level: f64) -> Result<f64> {
        if !(0.0..=2.0).contains(&level) {
            return Err(Error::Parameter(format!("noise level L = {level} must lie in [0, 2]")));
        }
        self.check_range(x)?;
        let phi0 = self.phi0_interp.eval(x.ln());
        let g = self.g_interp.eval(x.ln());
        Ok(1.0 + level * level / 12.0 - (1.0 - rotating_weight_change(level)) * phi0
            + 4.0 / (PI * x) * g)
    }

    /// Write the table as self-describing delimited text.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str("# kicked-rotor scaling table\n");
        out.push_str("# schema = scaling-table/1\n");
        let m = &self.meta;
        let _ = writeln!(out, "# eps_ref = {}", m.eps_ref);
        let _ = writeln!(out, "# k_ref = {}", m.k_ref);
        let _ = writeln!(out, "# ell = {}", m.ell);
        let _ = writeln!(out, "# ensemble = {}", m.ensemble);
        let _ = writeln!(out, "# seed = {}", m.seed);
        let _ = writeln!(out, "# requested_points = {}", m.requested_points);
        let _ = writeln!(out, "# dropped = {}", m.dropped);
        out.push_str("# columns: x phi0 g\n");
        for i in 0..self.xs.len() {
            let _ = writeln!(out, "{} {} {}", self.xs[i], self.phi0[i], self.g[i]);
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Read a table written by [`ScalingTable::save`].  The schema line and
    /// every provenance key must be present.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let bad = |reason: &str| Error::format(path, reason);

        let mut keys = std::collections::BTreeMap::new();
        let mut xs = Vec::new();
        let mut phi0 = Vec::new();
        let mut g = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((key, value)) = comment.split_once('=') {
                    keys.insert(key.trim().to_string(), value.trim().to_string());
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(bad(&format!("expected 3 columns, got {}", fields.len())));
            }
            let mut parsed = fields.iter().map(|f| f.parse::<f64>());
            xs.push(parsed.next().unwrap().map_err(|_| bad("unparsable x"))?);
            phi0.push(parsed.next().unwrap().map_err(|_| bad("unparsable phi0"))?);
            g.push(parsed.next().unwrap().map_err(|_| bad("unparsable g"))?);
        }

        if keys.get("schema").map(String::as_str) != Some("scaling-table/1") {
            return Err(bad("missing or unsupported schema (want scaling-table/1)"));
        }
        let want = |key: &str| {
            keys.get(key)
                .ok_or_else(|| bad(&format!("missing provenance key '{key}'")))
        };
        let meta = TableMeta {
            eps_ref: want("eps_ref")?.parse().map_err(|_| bad("unparsable eps_ref"))?,
            k_ref: want("k_ref")?.parse().map_err(|_| bad("unparsable k_ref"))?,
            ell: want("ell")?.parse().map_err(|_| bad("unparsable ell"))?,
            ensemble: want("ensemble")?.parse().map_err(|_| bad("unparsable ensemble"))?,
            seed: want("seed")?.parse().map_err(|_| bad("unparsable seed"))?,
            requested_points: want("requested_points")?
                .parse()
                .map_err(|_| bad("unparsable requested_points"))?,
            dropped: want("dropped")?.parse().map_err(|_| bad("unparsable dropped"))?,
        };
        ScalingTable::from_columns(xs, phi0, g, meta)
            .map_err(|e| bad(&format!("invalid table data: {e}")))
    }
}

// ---------------------------------------------------------------------------
// Monotone cubic interpolation
// ---------------------------------------------------------------------------

/// Piecewise-cubic Hermite interpolant with Fritsch-Carlson monotone slopes:
/// shape-preserving, no overshoot between nodes, exact at the nodes.
#[derive(Debug, Clone)]
struct Pchip {
    u: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl Pchip {
    /// `u` strictly increasing, `u.len() == y.len() >= 2`.
    fn new(u: &[f64], y: &[f64]) -> Self {
        let n = u.len();
        let h: Vec<f64> = (0..n - 1).map(|i| u[i + 1] - u[i]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut slope = vec![0.0; n];
        if n == 2 {
            slope[0] = delta[0];
            slope[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] <= 0.0 {
                    slope[i] = 0.0;
                } else {
                    // Weighted harmonic mean of the neighboring secants.
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    slope[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            slope[0] = Self::edge_slope(h[0], h[1], delta[0], delta[1]);
            slope[n - 1] = Self::edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Pchip { u: u.to_vec(), y: y.to_vec(), slope }
    }

    /// Non-centered three-point end slope, clipped to preserve shape.
    fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 < 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    }

    /// Evaluate at `x` inside `[u[0], u[n-1]]` (callers enforce the range).
    fn eval(&self, x: f64) -> f64 {
        let n = self.u.len();
        let i = self
            .u
            .partition_point(|&v| v <= x)
            .clamp(1, n - 1)
            - 1;
        let h = self.u[i + 1] - self.u[i];
        let s = (x - self.u[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h * h10 * self.slope[i] + h01 * self.y[i + 1] + h * h11 * self.slope[i + 1]
    }
}

// ---------------------------------------------------------------------------
