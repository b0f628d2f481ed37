//! Sweep configuration, deterministic parallel execution over parameter
//! grids, and CSV/JSON emission.
//!
//! A sweep is described by one JSON document (all keys optional):
//!
//! ```json
//! {
//!   "delta1": 30.0,
//!   "omega1": 15.0,
//!   "units": "2pi_mhz",
//!   "experiment": "chern",
//!   "grid": { "axis": "d2_ratio", "min": 0.0, "max": 2.0, "count": 21 },
//!   "protocol": { "total_time": 2000.0, "steps": 20000, "smoothing": "linear" },
//!   "output": { "path": "chern.csv", "format": "csv" },
//!   "workers": 1
//! }
//! ```
//!
//! Grid points are computed independently and gathered into pre-allocated
//! slots by index, so the row order is the grid order and the data rows are
//! bitwise identical for any worker count.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use crate::berry::{self, CurvatureMethod};
use crate::dynamics::{self, RampProtocol, Smoothing};
use crate::error::{Result, SimError};
use crate::quad;
use crate::spin::DriveParams;

/// Frequency unit of `delta1`/`omega1` in the config document. Internal
/// computations are always dimensionless with delta1 as the unit, so the
/// laboratory-scale values (30, 15) in 2*pi*MHz and (1, 0.5) dimensionless
/// describe the same physics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Dimensionless,
    #[serde(rename = "2pi_mhz")]
    TwoPiMhz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Curvature,
    Chern,
    Fidelity,
    Ramp,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridAxis {
    D2Ratio,
    Theta,
    RampTime,
}

impl GridAxis {
    pub fn column_name(&self) -> &'static str {
        match self {
            GridAxis::D2Ratio => "d2_ratio",
            GridAxis::Theta => "theta",
            GridAxis::RampTime => "ramp_time",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axis: GridAxis,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub total_time: f64,
    pub steps: usize,
    pub smoothing: Smoothing,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self { total_time: 2000.0, steps: 20_000, smoothing: Smoothing::Linear }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output file; stdout when absent.
    pub path: Option<String>,
    pub format: Option<OutputFormat>,
}

/// The raw config document; every key has a laboratory-scale default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub delta1: f64,
    pub omega1: f64,
    pub units: Units,
    pub experiment: Option<Experiment>,
    pub grid: Option<GridSpec>,
    pub protocol: ProtocolConfig,
    pub output: OutputConfig,
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            delta1: 30.0,
            omega1: 15.0,
            units: Units::TwoPiMhz,
            experiment: None,
            grid: None,
            protocol: ProtocolConfig::default(),
            output: OutputConfig::default(),
            workers: 1,
        }
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SimError::Config(format!("bad config: {e}")))
    }
}

/// Command-line overrides applied on top of the config document.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub d2_ratio: Option<f64>,
    pub ramp_time: Option<f64>,
    pub steps: Option<usize>,
    pub nodes: Option<usize>,
    pub workers: Option<usize>,
    pub format: Option<OutputFormat>,
}

/// Fully resolved sweep description; echoed into the output metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub experiment: Experiment,
    pub delta1: f64,
    pub omega1: f64,
    pub units: Units,
    /// Base delta2/delta1 used by experiments that do not sweep it.
    pub d2_ratio: f64,
    pub grid: GridSpec,
    pub protocol: RampProtocol,
    pub nodes: usize,
    pub workers: usize,
    pub format: OutputFormat,
    pub output_path: Option<String>,
}

impl SweepSpec {
    /// Resolve config + overrides for one experiment, checking every
    /// invariant the engine relies on.
    pub fn resolve(
        experiment: Experiment,
        config: &SweepConfig,
        overrides: &Overrides,
    ) -> Result<Self> {
        if !(config.delta1 > 0.0) || !config.delta1.is_finite() {
            return Err(SimError::Config(format!(
                "delta1 must be positive and finite, got {}",
                config.delta1
            )));
        }
        if !(config.omega1 > 0.0) || !config.omega1.is_finite() {
            return Err(SimError::Config(format!(
                "omega1 must be positive and finite, got {}",
                config.omega1
            )));
        }
        if let Some(e) = config.experiment {
            if e != experiment {
                return Err(SimError::Config(format!(
                    "config experiment {e:?} conflicts with the requested {experiment:?}"
                )));
            }
        }
        let grid = match config.grid {
            Some(g) => g,
            None => default_grid(experiment),
        };
        if grid.count < 2 {
            return Err(SimError::Config(format!(
                "grid count must be >= 2, got {}",
                grid.count
            )));
        }
        if !(grid.min < grid.max) || !grid.min.is_finite() || !grid.max.is_finite() {
            return Err(SimError::Config(format!(
                "grid range must satisfy min < max, got [{}, {}]",
                grid.min, grid.max
            )));
        }
        match (experiment, grid.axis) {
            (Experiment::Chern, GridAxis::D2Ratio) => {}
            (Experiment::Curvature, GridAxis::Theta) => {}
            (Experiment::Fidelity, GridAxis::D2Ratio | GridAxis::RampTime) => {}
            (Experiment::Ramp, _) => {} // the ramp experiment emits a trajectory; grid unused
            (e, a) => {
                return Err(SimError::Config(format!(
                    "experiment {e:?} cannot sweep axis {a:?}"
                )))
            }
        }
        if experiment == Experiment::Curvature
            && !(grid.min >= 0.0 && grid.max <= std::f64::consts::PI + 1e-12)
        {
            return Err(SimError::Config(
                "theta grid must lie within [0, pi]".into(),
            ));
        }
        if grid.axis == GridAxis::RampTime && grid.min < 0.0 {
            return Err(SimError::Config("ramp_time grid must be >= 0".into()));
        }
        let total_time = overrides.ramp_time.unwrap_or(config.protocol.total_time);
        let steps = overrides.steps.unwrap_or(config.protocol.steps);
        let protocol = RampProtocol::new(
            0.0,
            std::f64::consts::PI,
            total_time,
            steps,
            0.0,
            config.protocol.smoothing,
        )
        .map_err(|e| SimError::Config(e.to_string()))?;
        let nodes = overrides.nodes.unwrap_or(berry::DEFAULT_CHERN_NODES);
        if nodes < berry::MIN_CHERN_NODES || nodes.is_multiple_of(2) {
            return Err(SimError::Config(format!(
                "nodes must be odd and >= {}, got {nodes}",
                berry::MIN_CHERN_NODES
            )));
        }
        let workers = overrides.workers.unwrap_or(config.workers);
        if workers == 0 {
            return Err(SimError::Config("workers must be >= 1".into()));
        }
        Ok(Self {
            experiment,
            delta1: config.delta1,
            omega1: config.omega1,
            units: config.units,
            d2_ratio: overrides.d2_ratio.unwrap_or(0.0),
            grid,
            protocol,
            nodes,
            workers,
            format: overrides
                .format
                .or(config.output.format)
                .unwrap_or(OutputFormat::Csv),
            output_path: config.output.path.clone(),
        })
    }

    /// Internal base parameters, normalized so delta1 == 1.
    fn base_params(&self) -> DriveParams {
        DriveParams {
            delta1: 1.0,
            delta2: self.d2_ratio,
            omega1: self.omega1 / self.delta1,
            theta: 0.0,
            phi: 0.0,
        }
    }
}

fn default_grid(experiment: Experiment) -> GridSpec {
    match experiment {
        Experiment::Chern => GridSpec { axis: GridAxis::D2Ratio, min: 0.0, max: 2.0, count: 21 },
        Experiment::Fidelity => {
            GridSpec { axis: GridAxis::D2Ratio, min: 0.0, max: 2.0, count: 81 }
        }
        Experiment::Curvature => {
            GridSpec { axis: GridAxis::Theta, min: 0.0, max: std::f64::consts::PI, count: 101 }
        }
        // unused by the trajectory dump, kept for the spec echo
        Experiment::Ramp | Experiment::Validate => {
            GridSpec { axis: GridAxis::D2Ratio, min: 0.0, max: 2.0, count: 2 }
        }
    }
}

/// One output row: the grid value, one entry per column (None when that
/// observable could not be computed), and an error tag for partial failures.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub grid: f64,
    pub values: Vec<Option<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepMetadata {
    pub engine_version: String,
    pub wall_ms: f64,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
}

/// Static block partition of `count` indices over `workers` threads;
/// results land in pre-allocated slots by index.
fn compute_rows<F>(count: usize, workers: usize, f: F) -> Vec<SweepRow>
where
    F: Fn(usize) -> SweepRow + Sync,
{
    let mut slots: Vec<Option<SweepRow>> = vec![None; count];
    let workers = workers.min(count).max(1);
    let chunk = count.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, block) in slots.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (i, slot) in block.iter_mut().enumerate() {
                    *slot = Some(f(w * chunk + i));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every slot filled")).collect()
}

fn err_row(grid: f64, width: usize, err: &SimError) -> SweepRow {
    SweepRow { grid, values: vec![None; width], error: Some(err.to_string()) }
}

/// Run one sweep. Grid points that fail are recorded as tagged error rows
/// rather than aborting the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let start = Instant::now();
    let base = spec.base_params();
    let grid_values = quad::linspace(spec.grid.min, spec.grid.max, spec.grid.count);

    let (axis, columns, rows) = match spec.experiment {
        Experiment::Chern => {
            let columns = vec!["chern", "est_error"];
            let rows = compute_rows(grid_values.len(), spec.workers, |i| {
                let r = grid_values[i];
                match berry::chern_number(
                    1.0,
                    r,
                    base.omega1,
                    CurvatureMethod::ClosedForm,
                    spec.nodes,
                ) {
                    Ok(c) => SweepRow {
                        grid: r,
                        values: vec![Some(c.chern), Some(c.est_error)],
                        error: None,
                    },
                    Err(e) => err_row(r, 2, &e),
                }
            });
            ("d2_ratio", columns, rows)
        }
        Experiment::Curvature => {
            let columns = vec!["F_closed", "F_spectral", "F_dynamic"];
            // one trajectory serves every theta row
            let dynamic = dynamics::evolve_ramp(&spec.protocol, &base)
                .and_then(|traj| dynamics::extract_curvature_dynamic(&traj, &base, None));
            let rows = compute_rows(grid_values.len(), spec.workers, |i| {
                let theta = grid_values[i];
                let p = base.with_theta(theta);
                let closed = Some(berry::curvature_closed_form(&p).value);
                let mut error: Option<String> = None;
                let spectral = match berry::curvature_spectral(&p) {
                    Ok(s) => Some(s.value),
                    Err(e) => {
                        error = Some(e.to_string());
                        None
                    }
                };
                let dyn_value = match &dynamic {
                    Ok(samples) => samples
                        .iter()
                        .min_by(|a, b| {
                            (a.theta - theta).abs().total_cmp(&(b.theta - theta).abs())
                        })
                        .map(|s| s.value),
                    Err(e) => {
                        let msg = format!("dynamic extraction: {e}");
                        error = Some(match error {
                            Some(prev) => format!("{prev}; {msg}"),
                            None => msg,
                        });
                        None
                    }
                };
                SweepRow { grid: theta, values: vec![closed, spectral, dyn_value], error }
            });
            ("theta", columns, rows)
        }
        Experiment::Fidelity => {
            let columns = vec!["fidelity"];
            match spec.grid.axis {
                GridAxis::D2Ratio => {
                    let rows = compute_rows(grid_values.len(), spec.workers, |i| {
                        let r = grid_values[i];
                        match dynamics::fidelity_experiment(&base, r, &spec.protocol) {
                            Ok(f) => {
                                SweepRow { grid: r, values: vec![Some(f)], error: None }
                            }
                            Err(e) => err_row(r, 1, &e),
                        }
                    });
                    ("d2_ratio", columns, rows)
                }
                GridAxis::RampTime => {
                    let rows = compute_rows(grid_values.len(), spec.workers, |i| {
                        let t = grid_values[i];
                        let protocol = RampProtocol { total_time: t, ..spec.protocol };
                        match dynamics::fidelity_experiment(&base, spec.d2_ratio, &protocol) {
                            Ok(f) => {
                                SweepRow { grid: t, values: vec![Some(f)], error: None }
                            }
                            Err(e) => err_row(t, 1, &e),
                        }
                    });
                    ("ramp_time", columns, rows)
                }
                GridAxis::Theta => unreachable!("rejected at resolve time"),
            }
        }
        Experiment::Ramp => {
            let columns = vec!["theta", "re_a", "im_a", "re_b", "im_b", "sigma_y"];
            let traj = dynamics::evolve_ramp(&spec.protocol, &base)
                .map_err(|e| SimError::Config(format!("ramp experiment failed: {e}")))?;
            let rows = traj
                .samples
                .iter()
                .map(|s| SweepRow {
                    grid: s.t,
                    values: vec![
                        Some(s.theta),
                        Some(s.state.a.re),
                        Some(s.state.a.im),
                        Some(s.state.b.re),
                        Some(s.state.b.im),
                        Some(s.sigma_y),
                    ],
                    error: None,
                })
                .collect();
            ("t", columns, rows)
        }
        Experiment::Validate => {
            return Err(SimError::Config(
                "validate is not a sweep; run the validate subcommand".into(),
            ))
        }
    };

    Ok(SweepResult {
        axis,
        columns,
        rows,
        metadata: SweepMetadata {
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            spec: spec.clone(),
        },
    })
}

/// 17 significant digits, locale-free; round-trips f64 exactly.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn sanitize_tag(msg: &str) -> String {
    msg.replace(',', ";")
}

/// CSV with the fixed per-experiment schema. The `error` column appears
/// only when at least one row carries an error tag.
pub fn csv_string(result: &SweepResult) -> String {
    let has_errors = result.rows.iter().any(|r| r.error.is_some());
    let mut out = String::new();
    out.push_str(result.axis);
    for c in &result.columns {
        out.push(',');
        out.push_str(c);
    }
    if has_errors {
        out.push_str(",error");
    }
    out.push('\n');
    for row in &result.rows {
        out.push_str(&fmt_float(row.grid));
        for v in &row.values {
            out.push(',');
            if let Some(v) = v {
                out.push_str(&fmt_float(*v));
            }
        }
        if has_errors {
            out.push(',');
            if let Some(e) = &row.error {
                out.push_str(&sanitize_tag(e));
            }
        }
        out.push('\n');
    }
    out
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

/// JSON document with metadata (spec echo, engine version, wall time) and
/// the same data rows as the CSV; data floats use 17 significant digits.
pub fn json_string(result: &SweepResult) -> String {
    let spec_echo = serde_json::to_string(&result.metadata.spec)
        .expect("spec serialization cannot fail");
    let mut out = String::new();
    out.push_str("{\n  \"metadata\": {\n");
    let _ = writeln!(
        out,
        "    \"engine_version\": \"{}\",",
        json_escape(&result.metadata.engine_version)
    );
    let _ = writeln!(out, "    \"wall_ms\": {},", fmt_float(result.metadata.wall_ms));
    let _ = writeln!(out, "    \"spec\": {spec_echo}");
    out.push_str("  },\n");
    let _ = writeln!(out, "  \"axis\": \"{}\",", json_escape(result.axis));
    out.push_str("  \"columns\": [");
    for (i, c) in result.columns.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "\"{}\"", json_escape(c));
    }
    out.push_str("],\n  \"rows\": [\n");
    for (i, row) in result.rows.iter().enumerate() {
        let _ = write!(out, "    {{\"{}\": {}", json_escape(result.axis), fmt_float(row.grid));
        for (c, v) in result.columns.iter().zip(&row.values) {
            match v {
                Some(v) => {
                    let _ = write!(out, ", \"{}\": {}", json_escape(c), fmt_float(*v));
                }
                None => {
                    let _ = write!(out, ", \"{}\": null", json_escape(c));
                }
            }
        }
        if let Some(e) = &row.error {
            let _ = write!(out, ", \"error\": \"{}\"", json_escape(e));
        }
        out.push('}');
        if i + 1 < result.rows.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    out
}

/// Render and write a sweep result; stdout when no path is given.
pub fn emit(result: &SweepResult, format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => csv_string(result),
        OutputFormat::Json => json_string(result),
    };
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
