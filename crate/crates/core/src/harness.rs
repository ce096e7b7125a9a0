//! Experiment configuration, dispatch, sweeps and result files.
//!
//! A run is described by an [`ExperimentConfig`] (JSON, versioned, unknown
//! keys rejected). [`run`] produces a CSV body plus [`ResultRecord`]s;
//! [`write_outputs`] stores the CSV and a JSON summary next to it.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cobra::{simulate_cobra_with, CobraOptions};
use crate::error::{Error, Result};
use crate::estimate::{Estimate, Moments};
use crate::graphical::{check_additivity, check_duality, sample_event_log, OccupiedSet};
use crate::params::ModelParams;
use crate::rng::{keyed_stream, replicate_seeds};
use crate::thresholds::{classify, nu0, p_crit, reference_table_comparison, Geometry, REFERENCE_PC_READINGS, TABLE_MU};
use crate::tree::{DegreeDist, Tree, TreeSpec, Vertex, VertexSet};
use crate::zealot::{run_replicas, simulate_forward_with, Cadence, ForwardOptions};

pub const SCHEMA_VERSION: u32 = 1;

/// Boundary-touch fraction above which a result is flagged.
pub const BOUNDARY_WARNING: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Forward,
    Cobra,
    DualityCheck,
    Thresholds,
    Nu0Scan,
    PcScan,
    #[serde(rename = "table-43")]
    Table43,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Forward => "forward",
            Kind::Cobra => "cobra",
            Kind::DualityCheck => "duality-check",
            Kind::Thresholds => "thresholds",
            Kind::Nu0Scan => "nu0-scan",
            Kind::PcScan => "pc-scan",
            Kind::Table43 => "table-43",
        }
    }

    /// CSV header written by this kind.
    pub fn csv_header(self) -> &'static str {
        match self {
            Kind::Forward => "replica,seed,survived,final_count,extinction_time,boundary_touched,events",
            Kind::Cobra => {
                "replica,seed,survived,particle_count,root_visits,root_hit_in_window,boundary_kills,extinction_time"
            }
            Kind::DualityCheck => "instance,seed,t,a_size,b_size,duality,additivity,attempts",
            Kind::Thresholds => "criterion,status,regime,margin",
            Kind::Nu0Scan => "q3,mu,nu0,flag",
            Kind::PcScan => "mu,p_crit",
            Kind::Table43 => "q3,mu,nu0,minimizer,reference,discrepancy",
        }
    }
}

/// Inclusive grid `from, from + step, .., to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.to >= self.from) {
            return Err(Error::Config(format!("bad grid {:?}", self)));
        }
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as u64;
        // Decimal steps: count in units of the step so that 0.996 prints as 0.996.
        let scale = (1.0 / self.step).round();
        let decimal = ((1.0 / self.step) - scale).abs() < 1e-9;
        Ok((0..=n)
            .map(|i| {
                if decimal {
                    ((self.from * scale).round() + i as f64) / scale
                } else {
                    self.from + i as f64 * self.step
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ModelParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<DegreeDist>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q3_grid: Option<Grid>,
    /// Initial occupied sites; defaults to the root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<Vertex>>,
    /// Start of the root-watching window as a fraction of the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<u64>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn need<T: Clone>(v: &Option<T>, field: &str, kind: Kind) -> Result<T> {
    v.clone().ok_or_else(|| Error::Config(format!("kind {} needs `{field}`", kind.name())))
}

impl ExperimentConfig {
    /// Minimal config of the given kind.
    pub fn new(kind: Kind, seed: u64) -> Self {
        ExperimentConfig {
            schema: SCHEMA_VERSION,
            kind,
            tree: None,
            params: None,
            dist: None,
            mu: None,
            mu_values: None,
            q3_grid: None,
            init: None,
            window_fraction: None,
            horizon: None,
            replicas: None,
            seed,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// SHA-256 of the compact JSON form, in hex.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        Sha256::digest(&bytes).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!("schema {} (expected {SCHEMA_VERSION})", self.schema)));
        }
        if self.replicas == Some(0) {
            return Err(Error::Config("replicas must be >= 1".into()));
        }
        if let Some(h) = self.horizon {
            if !(h >= 0.0) || !h.is_finite() {
                return Err(Error::Config(format!("horizon must be finite and >= 0, got {h}")));
            }
        }
        let k = self.kind;
        match k {
            Kind::Forward | Kind::Cobra | Kind::DualityCheck => {
                let tree = need(&self.tree, "tree", k)?;
                let params = need(&self.params, "params", k)?;
                need(&self.horizon, "horizon", k)?;
                need(&self.replicas, "replicas", k)?;
                params.check_against(tree.min_degree()).map_err(|e| Error::Config(e.to_string()))?;
                if let Some(f) = self.window_fraction {
                    if !(0.0..=1.0).contains(&f) {
                        return Err(Error::Config(format!("window_fraction {f} outside [0, 1]")));
                    }
                }
            }
            Kind::Thresholds => {
                if self.params.is_some() {
                    need(&self.tree, "tree", k)?;
                } else if self.dist.is_none() || self.mu.is_none() {
                    return Err(Error::Config("kind thresholds needs `params` + `tree`, or `dist` + `mu`".into()));
                }
            }
            Kind::Nu0Scan => {
                need(&self.mu_values, "mu_values", k)?;
            }
            Kind::PcScan | Kind::Table43 => {}
        }
        Ok(())
    }

    fn init_set(&self, tree: &Tree) -> Result<OccupiedSet> {
        let set: OccupiedSet = match &self.init {
            Some(v) => v.iter().copied().collect(),
            None => VertexSet::from([tree.root()]),
        };
        set.check_in(tree)?;
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultValue {
    Scalar(f64),
    Estimate(Estimate),
    Count { passed: u64, total: u64 },
    Flag(bool),
}

impl ResultValue {
    pub fn point(&self) -> f64 {
        match self {
            ResultValue::Scalar(v) => *v,
            ResultValue::Estimate(e) => e.point,
            ResultValue::Count { passed, total } => *passed as f64 / *total as f64,
            ResultValue::Flag(b) => f64::from(u8::from(*b)),
        }
    }

    pub fn half_width(&self) -> Option<f64> {
        match self {
            ResultValue::Estimate(e) => Some(e.half_width),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub config_digest: String,
    pub metric: String,
    pub value: ResultValue,
    pub flags: Vec<String>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    pub records: Vec<ResultRecord>,
    pub csv: String,
    /// Kind-specific structured summary.
    pub summary: serde_json::Value,
}

impl RunOutput {
    pub fn record(&self, metric: &str) -> Option<&ResultRecord> {
        self.records.iter().find(|r| r.metric == metric)
    }
}

fn boundary_flags(e: &Estimate) -> Vec<String> {
    let mut flags = Vec::new();
    if let Some(f) = e.boundary_fraction {
        if f > BOUNDARY_WARNING {
            flags.push(format!("boundary-touched:{f}"));
        }
    }
    if e.truncation_dominated() {
        flags.push("truncation-dominated".into());
    }
    flags
}

struct Collector {
    digest: String,
    start: Instant,
    records: Vec<ResultRecord>,
}

impl Collector {
    fn push(&mut self, metric: impl Into<String>, value: ResultValue, flags: Vec<String>) {
        self.records.push(ResultRecord {
            config_digest: self.digest.clone(),
            metric: metric.into(),
            value,
            flags,
            wall_time: 0.0,
        });
    }

    fn finish(mut self, csv: String, summary: serde_json::Value) -> RunOutput {
        let wall = self.start.elapsed().as_secs_f64();
        self.records.iter_mut().for_each(|r| r.wall_time = wall);
        RunOutput { records: self.records, csv, summary }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Executes `config` and returns its records and CSV body.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let mut col = Collector { digest: config.digest(), start: Instant::now(), records: Vec::new() };
    let mut csv = String::from(config.kind.csv_header());
    csv.push('\n');
    let summary = match config.kind {
        Kind::Forward => run_forward(config, &mut col, &mut csv)?,
        Kind::Cobra => run_cobra(config, &mut col, &mut csv)?,
        Kind::DualityCheck => run_duality(config, &mut col, &mut csv)?,
        Kind::Thresholds => run_thresholds(config, &mut col, &mut csv)?,
        Kind::Nu0Scan => run_nu0_scan(config, &mut col, &mut csv)?,
        Kind::PcScan => run_pc_scan(config, &mut col, &mut csv)?,
        Kind::Table43 => run_table(&mut col, &mut csv)?,
    };
    Ok(col.finish(csv, summary))
}

fn run_forward(c: &ExperimentConfig, col: &mut Collector, csv: &mut String) -> Result<serde_json::Value> {
    let spec = c.tree.clone().unwrap();
    let params = c.params.clone().unwrap();
    let (horizon, replicas) = (c.horizon.unwrap(), c.replicas.unwrap());
    let opts = ForwardOptions::new(horizon).cadence(Cadence::Off);
    let rows = run_replicas(
        &spec,
        replicas,
        c.seed,
        Vec::new(),
        |tree, rs| {
            let run = simulate_forward_with(tree, &params, &c.init_set(tree)?, &opts, rs)?;
            Ok(vec![(rs, run.survived(), run.final_count, run.extinction_time, run.boundary_touched, run.events)])
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    )?;
    let (mut alive, mut touched, mut counts) = (0, 0, Moments::default());
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(csv, "{i},{},{},{},{},{},{}", r.0, u8::from(r.1), r.2, opt(r.3), u8::from(r.4), r.5);
        alive += u64::from(r.1);
        touched += u64::from(r.4);
        counts.push(r.2 as f64);
    }
    let survival = Estimate::proportion(alive, replicas, c.seed).with_boundary(touched);
    let flags = boundary_flags(&survival);
    col.push("survival_probability", ResultValue::Estimate(survival.clone()), flags.clone());
    col.push("final_count", ResultValue::Estimate(Estimate::mean(&counts, c.seed)), flags);
    Ok(serde_json::json!({ "survival_probability": survival }))
}

fn run_cobra(c: &ExperimentConfig, col: &mut Collector, csv: &mut String) -> Result<serde_json::Value> {
    let spec = c.tree.clone().unwrap();
    let params = c.params.clone().unwrap();
    let (horizon, replicas) = (c.horizon.unwrap(), c.replicas.unwrap());
    let f = c.window_fraction.unwrap_or(0.5);
    let opts = CobraOptions { root_window: Some((f * horizon, horizon)), ..CobraOptions::new(horizon) };
    let rows = run_replicas(
        &spec,
        replicas,
        c.seed,
        Vec::new(),
        |tree, rs| {
            let run = simulate_cobra_with(tree, &params, &c.init_set(tree)?, &opts, rs)?;
            let s = &run.final_state;
            Ok(vec![(
                rs,
                run.survived(),
                s.occupied.len(),
                s.root_visits,
                run.root_hit_in_window,
                s.boundary_kills,
                run.extinction_time,
            )])
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    )?;
    let (mut alive, mut hits, mut touched) = (0, 0, 0);
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(csv, "{i},{},{},{},{},{},{},{}", r.0, u8::from(r.1), r.2, r.3, u8::from(r.4), r.5, opt(r.6));
        alive += u64::from(r.1);
        hits += u64::from(r.4);
        touched += u64::from(r.5 > 0);
    }
    let survival = Estimate::proportion(alive, replicas, c.seed).with_boundary(touched);
    let local = Estimate::proportion(hits, replicas, c.seed).with_boundary(touched);
    let flags = boundary_flags(&survival);
    col.push("survival_probability", ResultValue::Estimate(survival.clone()), flags.clone());
    col.push("local_survival_frequency", ResultValue::Estimate(local.clone()), flags);
    Ok(serde_json::json!({ "survival_probability": survival, "local_survival_frequency": local }))
}

/// A randomised duality / additivity test case.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityOutcome {
    /// Time actually checked; at most the initial draw.
    pub t: f64,
    pub a_size: usize,
    pub b_size: usize,
    pub duality: bool,
    pub additivity: bool,
    /// Event logs drawn before the dual stayed clear of the boundary.
    pub attempts: u32,
}

const MAX_ATTEMPTS: u32 = 64;

/// Draws `A` (each interior site with probability 0.3), `B` (one to three
/// sites within distance 2 of the root), `t` uniform in `(0, horizon]` and a
/// graphical representation, redrawing the representation until the dual
/// from `B` avoids the boundary (halving `t` after every 8 failed draws). Then checks duality, and additivity over a
/// random split of `A`.
pub fn duality_instance(tree: &Tree, params: &ModelParams, horizon: f64, seed: u64) -> Result<DualityOutcome> {
    let mut rng = keyed_stream(seed, 7);
    let interior: Vec<Vertex> = tree.vertices().filter(|&x| !tree.is_boundary(x)).collect();
    let near: Vec<Vertex> = interior.iter().copied().filter(|&x| tree.level_unchecked(x) <= 2).collect();
    if near.is_empty() {
        return Err(Error::InvalidParameter("tree has no interior sites".into()));
    }
    let a: OccupiedSet = interior.iter().copied().filter(|_| rng.random::<f64>() < 0.3).collect();
    let b_size = rng.random_range(1..=3usize).min(near.len());
    let b: OccupiedSet = rand::seq::index::sample(&mut rng, near.len(), b_size).into_iter().map(|i| near[i]).collect();
    let mut t = horizon * (1.0 - rng.random::<f64>());
    let mut parts = vec![VertexSet::new(); rng.random_range(2..=3)];
    for x in a.iter() {
        let i = rng.random_range(0..parts.len());
        parts[i].insert(x);
    }
    for attempt in 1..=MAX_ATTEMPTS {
        let log = sample_event_log(tree, params, horizon, replicate_seeds(seed, attempt as u64))?;
        match check_duality(&log, &a, &b, t) {
            // Boundary margin: pull t back until the dual stays inside the tree.
            Err(Error::Inconclusive) => {
                if attempt % 8 == 0 {
                    t *= 0.5;
                }
                continue;
            }
            Err(e) => return Err(e),
            Ok(duality) => {
                return Ok(DualityOutcome {
                    t,
                    a_size: a.len(),
                    b_size: b.len(),
                    duality,
                    additivity: check_additivity(&log, &parts, t)?,
                    attempts: attempt,
                })
            }
        }
    }
    Err(Error::Inconclusive)
}

fn run_duality(c: &ExperimentConfig, col: &mut Collector, csv: &mut String) -> Result<serde_json::Value> {
    let spec = c.tree.clone().unwrap();
    let params = c.params.clone().unwrap();
    let (horizon, replicas) = (c.horizon.unwrap(), c.replicas.unwrap());
    let rows = run_replicas(
        &spec,
        replicas,
        c.seed,
        Vec::new(),
        |tree, rs| Ok(vec![(rs, duality_instance(tree, &params, horizon, rs)?)]),
        |mut a, b| {
            a.extend(b);
            a
        },
    )?;
    let (mut dual_ok, mut add_ok) = (0, 0);
    for (i, (rs, o)) in rows.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{i},{rs},{},{},{},{},{},{}",
            o.t,
            o.a_size,
            o.b_size,
            u8::from(o.duality),
            u8::from(o.additivity),
            o.attempts
        );
        dual_ok += u64::from(o.duality);
        add_ok += u64::from(o.additivity);
    }
    col.push("duality_pass", ResultValue::Count { passed: dual_ok, total: replicas }, Vec::new());
    col.push("additivity_pass", ResultValue::Count { passed: add_ok, total: replicas }, Vec::new());
    Ok(serde_json::json!({ "duality_pass": dual_ok, "additivity_pass": add_ok, "instances": replicas }))
}

fn run_thresholds(c: &ExperimentConfig, col: &mut Collector, csv: &mut String) -> Result<serde_json::Value> {
    if let Some(params) = &c.params {
        let geometry = match c.tree.as_ref().unwrap() {
            TreeSpec::Regular { d, .. } => Geometry::Regular(*d),
            TreeSpec::GaltonWatson { dist, .. } => Geometry::GaltonWatson(dist.clone()),
        };
        let report = classify(&geometry, params)?;
        for cr in &report.criteria {
            let status = serde_json::to_value(cr.status).unwrap();
            let regime = serde_json::to_value(cr.regime).unwrap();
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                cr.name,
                status.as_str().unwrap(),
                regime.as_str().unwrap(),
                opt(cr.margin)
            );
        }
        col.push("gamma", ResultValue::Scalar(report.gamma), Vec::new());
        if let Some(m) = report.extinction_margin {
            col.push("extinction_margin", ResultValue::Scalar(m), Vec::new());
        }
        col.push("local_dieout_bound", ResultValue::Scalar(report.local_dieout_bound), Vec::new());
        if let Some(b) = report.local_survival_bound {
            col.push("local_survival_bound", ResultValue::Scalar(b), Vec::new());
        }
        if let Some((lo, hi)) = report.local_interval {
            col.push("local_interval_lower", ResultValue::Scalar(lo), Vec::new());
            col.push("local_interval_upper", ResultValue::Scalar(hi), Vec::new());
        }
        if let Some(n) = &report.nu0 {
            col.push("nu0", ResultValue::Scalar(n.nu0), Vec::new());
        }
        return Ok(serde_json::to_value(&report).unwrap());
    }
    let (dist, mu) = (c.dist.clone().unwrap(), c.mu.unwrap());
    let r = nu0(&dist, mu)?;
    let _ = writeln!(csv, "nu0,{},{},{}", u8::from(r.local_survival), r.nu0, r.minimizer);
    col.push("nu0", ResultValue::Scalar(r.nu0), Vec::new());
    col.push("local_survival", ResultValue::Flag(r.local_survival), Vec::new());
    Ok(serde_json::to_value(&r).unwrap())
}

const DEFAULT_Q3_GRID: Grid = Grid { from: 0.0, to: 1.0, step: 0.001 };

fn run_nu0_scan(c: &ExperimentConfig, col: &mut Collector, csv: &mut String) -> Result<serde_json::Value> {
    let grid = c.q3_grid.clone().unwrap_or(DEFAULT_Q3_GRID).values()?;
    let mut crossings = serde_json::Map::new();
    for &mu in c.mu_values.as_ref().unwrap() {
        let mut first = None;
        for &q3 in &grid {
            let r = nu0(&DegreeDist::three_four(q3)?, mu)?;
            let _ = writeln!(csv, "{q3},{mu},{},{}", r.nu0, u8::from(r.local_survival));
            if r.local_survival && first.is_none() {
                first = Some(q3);
            }
        }
        let metric = format!("crossing_mu={mu}");
        match first {
            Some(q) => col.push(metric, ResultValue::Scalar(q), Vec::new()),
            None => col.push(metric, ResultValue::Flag(false), vec!["no-crossing".into()]),
        }
        crossings.insert(mu.to_string(), serde_json::json!(first));
    }
    Ok(serde_json::json!({ "crossings": crossings }))
}

const DEFAULT_PC_GRID: Grid = Grid { from: 1.51, to: 2.0, step: 0.01 };

fn run_pc_scan(c: &ExperimentConfig, col: &mut Collector, csv: &mut String) -> Result<serde_json::Value> {
    let mus = match &c.mu_values {
        Some(v) => v.clone(),
        None => DEFAULT_PC_GRID.values()?,
    };
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for &mu in &mus {
        let pc = p_crit(mu)?;
        let _ = writeln!(csv, "{mu},{pc}");
        monotone &= pc < prev;
        prev = pc;
    }
    col.push("monotone_decreasing", ResultValue::Flag(monotone), Vec::new());
    let mut readings = Vec::new();
    for (&mu, &read) in TABLE_MU.iter().zip(&REFERENCE_PC_READINGS) {
        let pc = p_crit(mu)?;
        col.push(format!("p_crit_mu={mu}"), ResultValue::Scalar(pc), Vec::new());
        readings.push(serde_json::json!({ "mu": mu, "p_crit": pc, "graph_reading": read, "difference": read - pc }));
    }
    Ok(serde_json::json!({ "monotone_decreasing": monotone, "reference_readings": readings }))
}

fn run_table(col: &mut Collector, csv: &mut String) -> Result<serde_json::Value> {
    let cells = reference_table_comparison()?;
    let mut flagged = Vec::new();
    for cell in &cells {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            cell.q3,
            cell.mu,
            cell.nu0,
            cell.minimizer,
            opt(cell.reference),
            u8::from(cell.discrepancy)
        );
        if cell.discrepancy {
            flagged.push(serde_json::json!({
                "q3": cell.q3, "mu": cell.mu, "computed": cell.nu0, "reference": cell.reference,
            }));
        }
    }
    let checked = cells.iter().filter(|c| c.reference.is_some()).count() as u64;
    col.push(
        "reference_agreement",
        ResultValue::Count { passed: checked - flagged.len() as u64, total: checked },
        Vec::new(),
    );
    Ok(serde_json::json!({ "discrepancies": flagged }))
}

/// One cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub value: f64,
    pub seed: u64,
    pub output: RunOutput,
}

pub const SWEEP_AXES: [&str; 4] = ["mu", "q3", "horizon", "depth"];

fn with_axis(base: &ExperimentConfig, axis: &str, v: f64) -> Result<ExperimentConfig> {
    let mut c = base.clone();
    match axis {
        "mu" => c.mu = Some(v),
        "horizon" => c.horizon = Some(v),
        "q3" => {
            let dist = DegreeDist::three_four(v)?;
            if let Some(TreeSpec::GaltonWatson { dist: d, .. }) = &mut c.tree {
                *d = dist.clone();
            }
            c.dist = Some(dist);
        }
        "depth" => match &mut c.tree {
            Some(TreeSpec::Regular { depth, .. }) | Some(TreeSpec::GaltonWatson { depth, .. }) => {
                if !(v >= 0.0 && v.fract() == 0.0) {
                    return Err(Error::Config(format!("depth must be a whole number, got {v}")));
                }
                *depth = v as u32;
            }
            None => return Err(Error::Config("axis depth needs a tree".into())),
        },
        other => return Err(Error::Config(format!("unknown sweep axis `{other}` (known: {SWEEP_AXES:?})"))),
    }
    Ok(c)
}

/// Runs `base` once per value of `axis`, cell `i` with seed
/// `replicate_seeds(base.seed, i)`.
pub fn sweep(base: &ExperimentConfig, axis: &str, values: &[f64]) -> Result<Vec<SweepCell>> {
    if !SWEEP_AXES.contains(&axis) {
        return Err(Error::Config(format!("unknown sweep axis `{axis}` (known: {SWEEP_AXES:?})")));
    }
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut c = with_axis(base, axis, v)?;
            c.seed = replicate_seeds(base.seed, i as u64);
            Ok(SweepCell { value: v, seed: c.seed, output: run(&c)? })
        })
        .collect()
}

/// Long-format grid: one line per (cell, record).
pub fn sweep_csv(axis: &str, cells: &[SweepCell]) -> String {
    let mut s = format!("{axis},seed,metric,value,half_width\n");
    for cell in cells {
        for r in &cell.output.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                cell.value,
                cell.seed,
                r.metric,
                r.value.point(),
                opt(r.value.half_width())
            );
        }
    }
    s
}

/// Writes `contents` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::Io(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// JSON summary path for a CSV path: same stem, `.json` extension.
pub fn summary_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes the CSV to `path` and the JSON summary beside it.
pub fn write_outputs(config: &ExperimentConfig, out: &RunOutput, path: &Path) -> Result<PathBuf> {
    let json = summary_path(path);
    if json == path {
        return Err(Error::Config(format!("output {} would collide with its JSON summary", path.display())));
    }
    write_atomic(path, out.csv.as_bytes())?;
    let doc = serde_json::json!({
        "config": config,
        "config_digest": config.digest(),
        "records": out.records,
        "summary": out.summary,
    });
    write_atomic(&json, serde_json::to_string_pretty(&doc).unwrap().as_bytes())?;
    Ok(json)
}
