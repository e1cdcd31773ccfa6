//! Versioned delimited-text output.
//!
//! Every file starts with a `# schema: <name>/<version>` line, followed by
//! `# key = value` provenance metadata, a `# columns:` declaration, and
//! tab-separated data rows.  Numbers are written in shortest round-trip
//! form, so a rewritten file is byte-identical and loaded values are exact.
//! Loaders check the schema and refuse files with incomplete provenance.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::phasespace::{PhasePortrait, SmearedBand};

use super::{
    ExperimentRecord, ExperimentRow, ResidualReport, ScaledPoint, SweepRow, SweepSpec,
};

pub const SWEEP_SCHEMA: &str = "sweep-table/1";
pub const SCALED_SCHEMA: &str = "scaled-points/1";
pub const EXPERIMENT_SCHEMA: &str = "experiment/1";
pub const PORTRAIT_SCHEMA: &str = "portrait/1";
pub const BAND_SCHEMA: &str = "band/1";
pub const RESIDUAL_SCHEMA: &str = "residual-report/1";

// ---------------------------------------------------------------------------
// Generic table document
// ---------------------------------------------------------------------------

/// One delimited-text table: schema, metadata header, named columns, rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableDoc {
    pub schema: String,
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    source: Option<PathBuf>,
}

impl TableDoc {
    pub fn new(schema: &str, columns: &[&str]) -> Self {
        TableDoc {
            schema: schema.to_string(),
            meta: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            source: None,
        }
    }

    pub fn set_meta(&mut self, key: &str, value: impl Display) {
        self.meta.insert(key.to_string(), value.to_string());
    }

    /// Append a row of numbers, formatted in shortest round-trip form.
    pub fn push_row(&mut self, cells: &[f64]) {
        self.push_cells(cells.iter().map(|c| c.to_string()).collect());
    }

    pub fn push_cells(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    fn context(&self) -> PathBuf {
        self.source.clone().unwrap_or_else(|| PathBuf::from("<memory>"))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# schema: {}", self.schema);
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "# columns: {}", self.columns.join("\t"));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join("\t"));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut doc = Self::parse(&text, path)?;
        doc.source = Some(path.to_path_buf());
        Ok(doc)
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut schema = None;
        let mut meta = BTreeMap::new();
        let mut columns: Vec<String> = Vec::new();
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(s) = rest.strip_prefix("schema:") {
                    schema = Some(s.trim().to_string());
                } else if let Some(c) = rest.strip_prefix("columns:") {
                    columns = c.split_whitespace().map(str::to_string).collect();
                } else if let Some((k, v)) = rest.split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                // Other comments (orbit markers etc.) are ignored here.
                continue;
            }
            if schema.is_none() {
                return Err(Error::format(path, "data before the `# schema:` line"));
            }
            if columns.is_empty() {
                return Err(Error::format(path, "data before the `# columns:` line"));
            }
            let cells: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            if cells.len() != columns.len() {
                return Err(Error::format(
                    path,
                    format!("row has {} cells, expected {}", cells.len(), columns.len()),
                ));
            }
            rows.push(cells);
        }
        let schema = schema.ok_or_else(|| Error::format(path, "missing `# schema:` line"))?;
        Ok(TableDoc { schema, meta, columns, rows, source: None })
    }

    pub fn expect_schema(&self, want: &str) -> Result<()> {
        if self.schema != want {
            return Err(Error::format(
                &self.context(),
                format!("schema {:?}, expected {want:?}", self.schema),
            ));
        }
        Ok(())
    }

    /// Provenance lookup; a missing key fails schema validation.
    pub fn require_meta(&self, key: &str) -> Result<&str> {
        self.meta.get(key).map(String::as_str).ok_or_else(|| {
            Error::format(&self.context(), format!("missing provenance key {key:?}"))
        })
    }

    pub fn require_meta_f64(&self, key: &str) -> Result<f64> {
        self.parse_meta(self.require_meta(key)?, key)
    }

    pub fn meta_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.meta.get(key) {
            None => Ok(None),
            Some(raw) => self.parse_meta(raw, key).map(Some),
        }
    }

    fn parse_meta<T: std::str::FromStr>(&self, raw: &str, key: &str) -> Result<T> {
        raw.parse().map_err(|_| {
            Error::format(&self.context(), format!("cannot parse meta {key} = {raw:?}"))
        })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| {
            Error::format(&self.context(), format!("missing column {name:?}"))
        })
    }

    pub fn f64_cell(&self, row: usize, col: usize) -> Result<f64> {
        let raw = &self.rows[row][col];
        raw.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
            Error::format(
                &self.context(),
                format!("row {}: cannot parse {raw:?} as a number", row + 1),
            )
        })
    }
}

// ---------------------------------------------------------------------------
// Sweep tables and scaled points
// ---------------------------------------------------------------------------

const SWEEP_COLUMNS: &[&str] = &[
    "engine", "k", "epsilon", "t", "ell", "noise_level", "samples", "energy", "energy_stderr",
    "ratio", "ratio_stderr", "x", "scaling_valid", "point_seed",
];

/// One file per sweep: full spec in the header, one row per parameter point.
pub fn write_sweep_table(path: &Path, spec: &SweepSpec, rows: &[SweepRow]) -> Result<()> {
    let mut doc = TableDoc::new(SWEEP_SCHEMA, SWEEP_COLUMNS);
    doc.set_meta("kind", spec.kind_name());
    doc.set_meta("engine", spec.engine.name());
    doc.set_meta("seed", spec.seed);
    doc.set_meta("spec_hash", spec.spec_hash());
    for (key, value) in spec.canonical_entries() {
        doc.set_meta(&format!("spec.{key}"), value);
    }
    for r in rows {
        doc.push_cells(vec![
            r.engine.name().to_string(),
            r.k.to_string(),
            r.epsilon.to_string(),
            r.t.to_string(),
            r.ell.to_string(),
            r.noise_level.to_string(),
            r.samples.to_string(),
            r.energy.to_string(),
            r.energy_stderr.to_string(),
            r.ratio.to_string(),
            r.ratio_stderr.to_string(),
            r.x.to_string(),
            (r.scaling_valid as u8).to_string(),
            r.point_seed.to_string(),
        ]);
    }
    doc.write(path)
}

/// Scaled points produced by experimental ingestion.
pub fn write_scaled_points(
    path: &Path,
    meta: &[(&str, String)],
    points: &[ScaledPoint],
    dropped_invalid: usize,
) -> Result<()> {
    let mut doc = TableDoc::new(
        SCALED_SCHEMA,
        &["x", "ratio", "ratio_stderr", "noise_level", "k", "epsilon", "t", "scaling_valid"],
    );
    for (k, v) in meta {
        doc.set_meta(k, v);
    }
    doc.set_meta("dropped_invalid", dropped_invalid);
    for p in points {
        doc.push_cells(vec![
            p.x.to_string(),
            p.ratio.to_string(),
            p.ratio_stderr.to_string(),
            p.noise_level.to_string(),
            p.k.to_string(),
            p.epsilon.to_string(),
            p.t.to_string(),
            (p.scaling_valid as u8).to_string(),
        ]);
    }
    doc.write(path)
}

/// Load scaled points from either a sweep table or a scaled-points file.
/// Both carry the same per-point columns; provenance keys differ.
pub fn load_scaled_points(path: &Path) -> Result<Vec<ScaledPoint>> {
    let doc = TableDoc::read(path)?;
    match doc.schema.as_str() {
        s if s == SWEEP_SCHEMA => {
            for key in ["kind", "engine", "seed", "spec_hash"] {
                doc.require_meta(key)?;
            }
        }
        s if s == SCALED_SCHEMA => {
            for key in ["source", "peak_reference", "sigma_p", "k", "t"] {
                doc.require_meta(key)?;
            }
        }
        other => {
            return Err(Error::format(
                path,
                format!("schema {other:?}, expected {SWEEP_SCHEMA:?} or {SCALED_SCHEMA:?}"),
            ))
        }
    }
    let (cx, cr, cs) = (doc.column("x")?, doc.column("ratio")?, doc.column("ratio_stderr")?);
    let (cl, ck) = (doc.column("noise_level")?, doc.column("k")?);
    let (ce, ct, cv) = (doc.column("epsilon")?, doc.column("t")?, doc.column("scaling_valid")?);
    let mut points = Vec::with_capacity(doc.rows.len());
    for i in 0..doc.rows.len() {
        points.push(ScaledPoint {
            x: doc.f64_cell(i, cx)?,
            ratio: doc.f64_cell(i, cr)?,
            ratio_stderr: doc.f64_cell(i, cs)?,
            noise_level: doc.f64_cell(i, cl)?,
            k: doc.f64_cell(i, ck)?,
            epsilon: doc.f64_cell(i, ce)?,
            t: doc.f64_cell(i, ct)? as usize,
            scaling_valid: doc.f64_cell(i, cv)? != 0.0,
        });
    }
    Ok(points)
}

// ---------------------------------------------------------------------------
// Experiment records
// ---------------------------------------------------------------------------

pub fn write_experiment_record(path: &Path, record: &ExperimentRecord) -> Result<()> {
    let mut doc = TableDoc::new(
        EXPERIMENT_SCHEMA,
        &["epsilon", "noise_level", "energy", "energy_stderr"],
    );
    doc.set_meta("k", record.k);
    doc.set_meta("ell", record.ell);
    doc.set_meta("t", record.t);
    if let Some(s) = record.sigma_p {
        doc.set_meta("sigma_p", s);
    }
    if let Some(u) = record.k_uncertainty {
        doc.set_meta("k_uncertainty", u);
    }
    if let Some(n) = record.shots {
        doc.set_meta("shots", n);
    }
    for r in &record.rows {
        doc.push_row(&[r.epsilon, r.noise_level, r.energy, r.energy_stderr]);
    }
    doc.write(path)
}

/// Load a measured-energy record.  The detuning may be given either as an
/// `epsilon` column or as a `tau` column (converted using the header `ell`).
pub fn load_experiment_record(path: &Path) -> Result<ExperimentRecord> {
    let doc = TableDoc::read(path)?;
    doc.expect_schema(EXPERIMENT_SCHEMA)?;
    let k = doc.require_meta_f64("k")?;
    let ell: u32 = doc.require_meta("ell")?.parse().map_err(|_| {
        Error::format(path, format!("cannot parse meta ell = {:?}", doc.meta["ell"]))
    })?;
    let t = doc.require_meta_f64("t")? as usize;
    let sigma_p = doc.meta_f64("sigma_p")?;
    if let Some(s) = sigma_p {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::format(path, format!("sigma_p = {s} must be >= 0")));
        }
    }
    let k_uncertainty = doc.meta_f64("k_uncertainty")?;
    let shots = doc.meta_f64("shots")?.map(|n| n as u32);

    let detuning = match doc.column("epsilon") {
        Ok(c) => (c, false),
        Err(_) => (doc.column("tau")?, true),
    };
    let cl = doc.column("noise_level")?;
    let cen = doc.column("energy")?;
    let cse = doc.column("energy_stderr").ok();

    let mut rows = Vec::with_capacity(doc.rows.len());
    for i in 0..doc.rows.len() {
        let raw = doc.f64_cell(i, detuning.0)?;
        let epsilon = if detuning.1 {
            raw - std::f64::consts::TAU * f64::from(ell)
        } else {
            raw
        };
        let energy = doc.f64_cell(i, cen)?;
        let energy_stderr = match cse {
            Some(c) => doc.f64_cell(i, c)?,
            None => 0.0,
        };
        rows.push(ExperimentRow {
            epsilon,
            noise_level: doc.f64_cell(i, cl)?,
            energy,
            energy_stderr,
        });
    }
    Ok(ExperimentRecord { k, ell, t, sigma_p, k_uncertainty, shots, rows })
}

// ---------------------------------------------------------------------------
// Residual reports
// ---------------------------------------------------------------------------

pub fn write_residual_report(
    path: &Path,
    report: &ResidualReport,
    data_source: &str,
    table_source: &str,
) -> Result<()> {
    let mut doc = TableDoc::new(
        RESIDUAL_SCHEMA,
        &["x", "noise_level", "ratio", "model", "residual"],
    );
    doc.set_meta("data_source", data_source);
    doc.set_meta("table_source", table_source);
    doc.set_meta("skipped_out_of_range", report.skipped_out_of_range);
    doc.set_meta("skipped_invalid", report.skipped_invalid);
    for s in &report.summaries {
        doc.set_meta(
            &format!("summary.L{}", s.noise_level),
            format!(
                "n = {}, mean_abs = {}, max_abs = {}, mean = {}",
                s.count, s.mean_abs_residual, s.max_abs_residual, s.mean_residual
            ),
        );
    }
    for r in &report.rows {
        doc.push_row(&[r.x, r.noise_level, r.ratio, r.model, r.residual]);
    }
    doc.write(path)
}

// ---------------------------------------------------------------------------
// Phase-space output
// ---------------------------------------------------------------------------

/// Portrait file: header plus one block per orbit, blocks separated by a
/// `# orbit` marker line and a blank line, for direct consumption by
/// plotting tools.
pub fn write_portrait(path: &Path, portrait: &PhasePortrait) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# schema: {PORTRAIT_SCHEMA}");
    let _ = writeln!(out, "# k = {}", portrait.params.k);
    let _ = writeln!(out, "# epsilon = {}", portrait.params.epsilon);
    let _ = writeln!(out, "# ell = {}", portrait.params.ell);
    let _ = writeln!(out, "# noise_level = {}", portrait.noise_level);
    let _ = writeln!(out, "# seed = {}", portrait.seed);
    let _ = writeln!(out, "# iterations = {}", portrait.iterations);
    let _ = writeln!(out, "# orbits = {}", portrait.orbits.len());
    let _ = writeln!(out, "# columns: theta\tj");
    for (i, orbit) in portrait.orbits.iter().enumerate() {
        let _ = writeln!(out, "# orbit {i}: theta0 = {}, j0 = {}", orbit.theta0, orbit.j0);
        for &(theta, j) in &orbit.points {
            let _ = writeln!(out, "{theta}\t{j}");
        }
        let _ = writeln!(out);
    }
    fs::write(path, out)?;
    Ok(())
}

/// Separatrix and noise-smeared band curves.  Each column is the upper
/// branch `J(theta)`; the lower branch is its negative.
pub fn write_band(path: &Path, k: f64, epsilon: f64, level: f64, band: &SmearedBand) -> Result<()> {
    let mut doc = TableDoc::new(BAND_SCHEMA, &["theta", "nominal", "inner", "outer"]);
    doc.set_meta("k", k);
    doc.set_meta("epsilon", epsilon);
    doc.set_meta("noise_level", level);
    doc.set_meta("mean_square_width_factor", band.mean_square_width_factor);
    for i in 0..band.nominal.theta.len() {
        doc.push_row(&[
            band.nominal.theta[i],
            band.nominal.upper[i],
            band.inner.upper[i],
            band.outer.upper[i],
        ]);
    }
    doc.write(path)
}

// ---------------------------------------------------------------------------
