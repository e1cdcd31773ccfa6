//! Command-line driver: one subcommand per figure-style data set.
//!
//! Every subcommand resolves its settings in three layers — built-in
//! defaults, then an optional `--config` file, then explicit flags — and
//! writes delimited-text tables with full provenance headers.  The default
//! output directory is the current one, or `$KICKED_ROTOR_OUT` when set.
//!
//! Exit codes: 0 on success, 2 for configuration/format problems, 3 when a
//! numerical guard trips (grid overflow, out-of-range interpolation).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kicked_rotor::harness::{
    self, config::Config, output, Engine, SweepKind, SweepSpec,
};
use kicked_rotor::phasespace::smeared_band;
use kicked_rotor::scaling::{resonance_peak_energy, ScalingTable, TabulationSpec};
use kicked_rotor::Error;

const OUT_ENV: &str = "KICKED_ROTOR_OUT";

#[derive(Parser)]
#[command(
    name = "kicked-rotor",
    version,
    about = "Noisy quantum kicked rotor near resonance: simulation sweeps, \
             scaling-function tabulation, and experimental-data rescaling"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Energy vs detuning eps across noise levels (resonance-peak profiles).
    ResonanceScan(SweepArgs),
    /// Resonance-peak energy vs noise level at eps = 0.
    PeakVsNoise(SweepArgs),
    /// Random-parameter collapse data in the scaling variable x.
    ScalingCollapse(SweepArgs),
    /// Poincare sections plus separatrix and noise-band curves.
    PhasePortrait(SweepArgs),
    /// Tabulate the scaling-function ingredients Phi0 and G.
    TabulateScaling(TabulateArgs),
    /// Rescale measured energies into the scaling plane.
    IngestExperiment(IngestArgs),
    /// Compare scaled points against a tabulated scaling function.
    Compare(CompareArgs),
}

/// Flags shared by the sweep-style subcommands; every flag mirrors a config
/// key of the same name (flags override the file, the file overrides
/// defaults).
#[derive(Args)]
struct SweepArgs {
    /// Config file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (phase-portrait: output directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Engine: quantum or pclassical.
    #[arg(long)]
    engine: Option<String>,
    /// Kick strength k.
    #[arg(long)]
    k: Option<f64>,
    /// Resonance order ell (tau = 2*pi*ell + eps).
    #[arg(long)]
    ell: Option<u32>,
    /// Number of kicks t.
    #[arg(long)]
    t: Option<usize>,
    /// Noise levels, comma-separated or lo:hi:n.
    #[arg(long)]
    noise: Option<String>,
    /// Detunings, comma-separated or lo:hi:n.
    #[arg(long)]
    epsilons: Option<String>,
    /// Quasimomentum grid size (quantum engine).
    #[arg(long)]
    n_beta: Option<usize>,
    /// Trajectories per point (classical engine).
    #[arg(long)]
    n_traj: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Scaling collapse: random points per noise level.
    #[arg(long)]
    points: Option<usize>,
    /// Scaling collapse: kick-strength range.
    #[arg(long)]
    k_min: Option<f64>,
    #[arg(long)]
    k_max: Option<f64>,
    /// Scaling collapse: detuning range.
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    /// Scaling collapse: kick-count range.
    #[arg(long)]
    t_min: Option<usize>,
    #[arg(long)]
    t_max: Option<usize>,
    /// Scaling collapse: pin k instead of sampling it.
    #[arg(long)]
    fixed_k: Option<f64>,
    /// Phase portrait: initial-condition grid.
    #[arg(long)]
    grid_theta: Option<usize>,
    #[arg(long)]
    grid_j: Option<usize>,
    /// Phase portrait: kicks per orbit.
    #[arg(long)]
    iterations: Option<usize>,
    /// Phase portrait: detuning eps.
    #[arg(long)]
    epsilon: Option<f64>,
}

impl SweepArgs {
    /// Flags as a config layer (only the flags actually given).
    fn overrides(&self) -> Config {
        let mut cfg = Config::new();
        macro_rules! put {
            ($key:literal, $field:expr) => {
                if let Some(v) = &$field {
                    cfg.set($key, v);
                }
            };
        }
        put!("engine", self.engine);
        put!("k", self.k);
        put!("ell", self.ell);
        put!("t", self.t);
        put!("noise", self.noise);
        put!("epsilons", self.epsilons);
        put!("n_beta", self.n_beta);
        put!("n_traj", self.n_traj);
        put!("seed", self.seed);
        put!("points", self.points);
        put!("k_min", self.k_min);
        put!("k_max", self.k_max);
        put!("eps_min", self.eps_min);
        put!("eps_max", self.eps_max);
        put!("t_min", self.t_min);
        put!("t_max", self.t_max);
        put!("fixed_k", self.fixed_k);
        put!("grid_theta", self.grid_theta);
        put!("grid_j", self.grid_j);
        put!("iterations", self.iterations);
        put!("epsilon", self.epsilon);
        cfg
    }

    /// defaults <- config file <- flags.
    fn resolve(&self, defaults: Config) -> Result<Config, Error> {
        let file_layer = match &self.config {
            Some(path) => Config::from_file(path)?,
            None => Config::new(),
        };
        Ok(defaults.merge(&file_layer).merge(&self.overrides()))
    }
}

#[derive(Args)]
struct TabulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output table file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reference detuning of the tabulation.
    #[arg(long)]
    eps_ref: Option<f64>,
    /// Reference kick strength.
    #[arg(long)]
    k_ref: Option<f64>,
    #[arg(long)]
    ell: Option<u32>,
    /// Trajectories per grid point.
    #[arg(long)]
    ensemble: Option<usize>,
    /// Scaling-variable grid range and size.
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct IngestArgs {
    /// Experiment record to ingest.
    #[arg(long)]
    data: PathBuf,
    /// Output file for the scaled points.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the record's kick strength.
    #[arg(long)]
    k: Option<f64>,
    /// Override the record's kick count.
    #[arg(long)]
    t: Option<usize>,
    /// Override the record's initial momentum spread.
    #[arg(long)]
    sigma_p: Option<f64>,
    /// Measured L = 0 peak energy to normalize by (default: k^2 t / 4).
    #[arg(long)]
    peak_reference: Option<f64>,
    /// Constant energy offset subtracted before rescaling (heating
    /// background); off by default.
    #[arg(long, default_value_t = 0.0)]
    offset: f64,
}

#[derive(Args)]
struct CompareArgs {
    /// Sweep table or scaled-points file.
    #[arg(long)]
    data: PathBuf,
    /// Tabulated scaling function.
    #[arg(long)]
    table: PathBuf,
    /// Output residual report.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::ResonanceScan(args) => run_tabular(&args, scan_defaults(), "resonance_scan.tsv"),
        Cmd::PeakVsNoise(args) => run_tabular(&args, peak_defaults(), "peak_vs_noise.tsv"),
        Cmd::ScalingCollapse(args) => {
            run_tabular(&args, collapse_defaults(), "scaling_collapse.tsv")
        }
        Cmd::PhasePortrait(args) => run_portrait(&args),
        Cmd::TabulateScaling(args) => run_tabulate(&args),
        Cmd::IngestExperiment(args) => run_ingest(&args),
        Cmd::Compare(args) => run_compare(&args),
    }
}

// ---------------------------------------------------------------------------
// Defaults (config layers)
// ---------------------------------------------------------------------------

fn common_defaults() -> Config {
    let mut cfg = Config::new();
    cfg.set("k", 2.8);
    cfg.set("ell", 2);
    cfg.set("seed", 42);
    cfg.set("n_beta", 2000);
    cfg.set("n_traj", 50000);
    cfg
}

fn scan_defaults() -> Config {
    let mut cfg = common_defaults();
    cfg.set("kind", "epsilon-scan");
    cfg.set("engine", "pclassical");
    cfg.set("t", 20);
    cfg.set("noise", "0, 1, 2");
    cfg.set("epsilons", "-0.2:0.2:41");
    cfg.set("n_traj", 20000);
    cfg
}

fn peak_defaults() -> Config {
    let mut cfg = common_defaults();
    cfg.set("kind", "peak-vs-L");
    cfg.set("engine", "quantum");
    cfg.set("t", 20);
    cfg.set("noise", "0, 0.5, 1, 1.5, 2");
    cfg
}

fn collapse_defaults() -> Config {
    let mut cfg = common_defaults();
    cfg.set("kind", "scaling-collapse");
    cfg.set("engine", "pclassical");
    cfg.set("t", 50);
    cfg.set("noise", "0, 1, 2");
    cfg.set("points", 200);
    cfg.set("k_min", 1.0);
    cfg.set("k_max", 10.0);
    cfg.set("eps_min", 1e-3);
    cfg.set("eps_max", 0.1);
    cfg.set("t_min", 2);
    cfg.set("t_max", 150);
    cfg
}

fn portrait_defaults() -> Config {
    let mut cfg = common_defaults();
    cfg.set("kind", "phase-portrait");
    cfg.set("engine", "pclassical");
    cfg.set("t", 1);
    cfg.set("noise", "0, 1.5");
    cfg.set("epsilon", 0.05);
    cfg.set("grid_theta", 20);
    cfg.set("grid_j", 20);
    cfg.set("iterations", 500);
    cfg
}

// ---------------------------------------------------------------------------
// Spec assembly and execution
// ---------------------------------------------------------------------------

fn build_spec(cfg: &Config) -> Result<SweepSpec, Error> {
    let kind_name = cfg.get("kind").unwrap_or("epsilon-scan");
    let kind = match kind_name {
        "epsilon-scan" => SweepKind::EpsilonScan { epsilons: cfg.require_f64_list("epsilons")? },
        "peak-vs-L" => SweepKind::PeakVsL,
        "quantum-vs-classical" => {
            SweepKind::QuantumVsClassical { epsilons: cfg.require_f64_list("epsilons")? }
        }
        "scaling-collapse" => SweepKind::ScalingCollapse {
            points_per_level: cfg.require_usize("points")?,
            k_range: (cfg.require_f64("k_min")?, cfg.require_f64("k_max")?),
            eps_range: (cfg.require_f64("eps_min")?, cfg.require_f64("eps_max")?),
            t_range: (cfg.require_usize("t_min")?, cfg.require_usize("t_max")?),
            fixed_k: cfg.get_f64("fixed_k")?,
        },
        "phase-portrait" => SweepKind::PhasePortrait {
            grid_theta: cfg.require_usize("grid_theta")?,
            grid_j: cfg.require_usize("grid_j")?,
            iterations: cfg.require_usize("iterations")?,
            epsilon: cfg.require_f64("epsilon")?,
        },
        other => return Err(Error::Config(format!("unknown sweep kind {other:?}"))),
    };
    Ok(SweepSpec {
        kind,
        engine: Engine::parse(cfg.get("engine").unwrap_or("pclassical"))?,
        k: cfg.require_f64("k")?,
        ell: cfg.require_u32("ell")?,
        t: cfg.require_usize("t")?,
        noise_levels: cfg.require_f64_list("noise")?,
        n_beta: cfg.require_usize("n_beta")?,
        n_traj: cfg.require_usize("n_traj")?,
        seed: cfg.require_u64("seed")?,
    })
}

/// Resolve an output path against `--out`, `$KICKED_ROTOR_OUT`, and the
/// subcommand's default file name, creating missing parent directories (a
/// failure there resurfaces as the write error).
fn resolve_out(flag: &Option<PathBuf>, default_name: &str) -> PathBuf {
    let base = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_default();
    let path = match flag {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => base.join(p),
        None => base.join(default_name),
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            let _ = std::fs::create_dir_all(parent);
        }
    }
    path
}

fn run_tabular(args: &SweepArgs, defaults: Config, default_name: &str) -> Result<(), Error> {
    let cfg = args.resolve(defaults)?;
    let spec = build_spec(&cfg)?;
    let rows = harness::run_sweep(&spec)?;
    let path = resolve_out(&args.out, default_name);
    output::write_sweep_table(&path, &spec, &rows)?;
    let flagged = rows.iter().filter(|r| !r.scaling_valid).count();
    println!(
        "wrote {} rows ({} beyond the |eps| <= 0.15 scaling cutoff) to {}",
        rows.len(),
        flagged,
        path.display()
    );
    Ok(())
}

fn run_portrait(args: &SweepArgs) -> Result<(), Error> {
    let cfg = args.resolve(portrait_defaults())?;
    let spec = build_spec(&cfg)?;
    let portraits = harness::run_portrait(&spec)?;
    let dir = resolve_out(&args.out, ".");
    if !dir.as_os_str().is_empty() && !dir.exists() {
        std::fs::create_dir_all(&dir)?;
    }
    let SweepKind::PhasePortrait { epsilon, .. } = spec.kind else { unreachable!() };
    for portrait in &portraits {
        let level = portrait.noise_level;
        let portrait_path = dir.join(format!("portrait_L{level}.tsv"));
        output::write_portrait(&portrait_path, portrait)?;
        let band = smeared_band(spec.k, epsilon, level, 401)?;
        let band_path = dir.join(format!("band_L{level}.tsv"));
        output::write_band(&band_path, spec.k, epsilon, level, &band)?;
        println!(
            "wrote {} orbits to {} (separatrix band: {})",
            portrait.orbits.len(),
            portrait_path.display(),
            band_path.display()
        );
    }
    Ok(())
}

fn run_tabulate(args: &TabulateArgs) -> Result<(), Error> {
    let mut cfg = Config::new();
    let d = TabulationSpec::default();
    cfg.set("eps_ref", d.eps_ref);
    cfg.set("k_ref", d.k_ref);
    cfg.set("ell", d.ell);
    cfg.set("ensemble", d.ensemble);
    cfg.set("x_min", d.x_min);
    cfg.set("x_max", d.x_max);
    cfg.set("points", d.points);
    cfg.set("seed", d.seed);
    if let Some(path) = &args.config {
        cfg = cfg.merge(&Config::from_file(path)?);
    }
    let mut flags = Config::new();
    macro_rules! put {
        ($key:literal, $field:expr) => {
            if let Some(v) = &$field {
                flags.set($key, v);
            }
        };
    }
    put!("eps_ref", args.eps_ref);
    put!("k_ref", args.k_ref);
    put!("ell", args.ell);
    put!("ensemble", args.ensemble);
    put!("x_min", args.x_min);
    put!("x_max", args.x_max);
    put!("points", args.points);
    put!("seed", args.seed);
    let cfg = cfg.merge(&flags);

    let spec = TabulationSpec {
        eps_ref: cfg.require_f64("eps_ref")?,
        k_ref: cfg.require_f64("k_ref")?,
        ell: cfg.require_u32("ell")?,
        ensemble: cfg.require_usize("ensemble")?,
        x_min: cfg.require_f64("x_min")?,
        x_max: cfg.require_f64("x_max")?,
        points: cfg.require_usize("points")?,
        seed: cfg.require_u64("seed")?,
    };
    let table = kicked_rotor::scaling::tabulate_phi0_g(&spec)?;
    let path = resolve_out(&args.out, "scaling_table.tsv");
    table.save(&path)?;
    let (lo, hi) = table.x_range();
    println!(
        "tabulated {} grid points over x in [{lo:.4}, {hi:.4}] ({} requested points dropped) to {}",
        table.xs().len(),
        table.meta().dropped,
        path.display()
    );
    Ok(())
}

fn run_ingest(args: &IngestArgs) -> Result<(), Error> {
    let mut record = output::load_experiment_record(&args.data)?;
    if let Some(k) = args.k {
        record.k = k;
    }
    if let Some(t) = args.t {
        record.t = t;
    }
    if let Some(s) = args.sigma_p {
        record.sigma_p = Some(s);
    }
    let peak = args
        .peak_reference
        .unwrap_or_else(|| resonance_peak_energy(record.k, record.t, 0.0));
    let set = harness::rescale_experimental(&record, record.k, record.t, peak, args.offset)?;
    let path = resolve_out(&args.out, "experiment_scaled.tsv");
    let meta: Vec<(&str, String)> = vec![
        ("source", args.data.display().to_string()),
        ("k", record.k.to_string()),
        ("t", record.t.to_string()),
        ("sigma_p", record.sigma_p.expect("validated above").to_string()),
        ("peak_reference", peak.to_string()),
        ("offset", args.offset.to_string()),
    ];
    output::write_scaled_points(&path, &meta, &set.points, set.dropped_invalid)?;
    println!(
        "rescaled {} points ({} dropped beyond |eps| = 0.15) to {}",
        set.points.len(),
        set.dropped_invalid,
        path.display()
    );
    Ok(())
}

fn run_compare(args: &CompareArgs) -> Result<(), Error> {
    let points = output::load_scaled_points(&args.data)?;
    let table = ScalingTable::load(&args.table)?;
    let report = harness::compare_to_scaling(&points, &table)?;
    let path = resolve_out(&args.out, "residuals.tsv");
    output::write_residual_report(
        &path,
        &report,
        &args.data.display().to_string(),
        &args.table.display().to_string(),
    )?;
    println!(
        "compared {} points ({} out of tabulated range, {} beyond validity cutoff) to {}",
        report.rows.len(),
        report.skipped_out_of_range,
        report.skipped_invalid,
        path.display()
    );
    for s in &report.summaries {
        println!(
            "  L = {:<4} n = {:<5} mean |residual| = {:.4}  max |residual| = {:.4}",
            s.noise_level, s.count, s.mean_abs_residual, s.max_abs_residual
        );
    }
    Ok(())
}
