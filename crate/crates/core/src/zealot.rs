//! Event-driven forward simulation of the zealot voter model.
//!
//! A site can only change state if it is a zealot or has a zealot
//! neighbour, so the simulator restricts the graphical representation to
//! these *active* sites: each active site carries a clock of rate
//! `R_max = p_0 + M(1 - p_0)`, thinned down to its own rate `R_x`. Events at
//! inactive sites are no-ops and are never drawn. The state update itself
//! is shared with the log-driven path ([`drive_from_log`]), which replays
//! every event of an [`EventLog`].

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimate::{Estimate, Moments};
use crate::graphical::{EventLog, OccupiedSet};
use crate::params::ModelParams;
use crate::rng::{choose_distinct, exp_time, keyed_stream, replicate_seeds};
use crate::tree::{Tree, TreeSpec, Vertex, VertexSet};

/// Default spacing of trajectory samples.
pub const DEFAULT_SAMPLE_DT: f64 = 0.1;

/// When to record the occupancy along a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cadence {
    /// Record nothing beyond the summary fields.
    Off,
    /// Record after every event that changes the state.
    EveryChange,
    /// Record on the grid `0, dt, 2dt, ..` up to the horizon.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOptions {
    pub horizon: f64,
    pub cadence: Cadence,
    /// Interval over which the time spent with the root occupied is measured.
    pub root_window: Option<(f64, f64)>,
}

impl ForwardOptions {
    pub fn new(horizon: f64) -> Self {
        ForwardOptions { horizon, cadence: Cadence::Fixed(DEFAULT_SAMPLE_DT), root_window: None }
    }

    pub fn cadence(mut self, cadence: Cadence) -> Self {
        self.cadence = cadence;
        self
    }

    pub fn root_window(mut self, from: f64, to: f64) -> Self {
        self.root_window = Some((from, to));
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ForwardTrajectory {
    pub times: Vec<f64>,
    pub counts: Vec<usize>,
    pub root_states: Vec<bool>,
    pub extinction_time: Option<f64>,
    /// A zealot appeared next to the truncation boundary.
    pub boundary_touched: bool,
    /// Zealots at the end of the run.
    pub final_count: usize,
    /// Time the root spent occupied inside [`ForwardOptions::root_window`].
    pub root_window_time: f64,
    pub events: u64,
}

impl ForwardTrajectory {
    pub fn survived(&self) -> bool {
        self.final_count > 0
    }

    /// CSV with header `t,count,root_state`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,count,root_state\n");
        for i in 0..self.times.len() {
            s.push_str(&format!("{},{},{}\n", self.times[i], self.counts[i], u8::from(self.root_states[i])));
        }
        s
    }
}

/// Dense index set with O(1) insert, remove and uniform sampling.
#[derive(Debug, Clone)]
pub(crate) struct IndexSet {
    members: Vec<Vertex>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl IndexSet {
    pub(crate) fn new(n: usize) -> Self {
        IndexSet { members: Vec::new(), pos: vec![ABSENT; n] }
    }

    #[inline]
    pub(crate) fn contains(&self, x: Vertex) -> bool {
        self.pos[x] != ABSENT
    }

    #[inline]
    pub(crate) fn insert(&mut self, x: Vertex) {
        if self.pos[x] == ABSENT {
            self.pos[x] = self.members.len() as u32;
            self.members.push(x);
        }
    }

    #[inline]
    pub(crate) fn remove(&mut self, x: Vertex) {
        let i = self.pos[x];
        if i != ABSENT {
            let last = self.members.pop().unwrap();
            if last != x {
                self.members[i as usize] = last;
                self.pos[last] = i;
            }
            self.pos[x] = ABSENT;
        }
    }

    #[inline]
    pub(crate) fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> Vertex {
        self.members[i]
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.members.iter().copied()
    }
}

/// Zealot configuration with the bookkeeping needed to find active sites.
#[derive(Debug, Clone)]
pub struct ZealotState<'t> {
    tree: &'t Tree,
    state: Vec<bool>,
    zealot_neighbors: Vec<u32>,
    active: IndexSet,
    count: usize,
    touched: bool,
}

impl<'t> ZealotState<'t> {
    /// Boundary members of `init` are dropped (the boundary is held at 0).
    pub fn new(tree: &'t Tree, init: &OccupiedSet) -> Result<Self> {
        init.check_in(tree)?;
        let n = tree.len();
        let mut s = ZealotState {
            tree,
            state: vec![false; n],
            zealot_neighbors: vec![0; n],
            active: IndexSet::new(n),
            count: 0,
            touched: false,
        };
        for x in init.iter() {
            if tree.is_boundary(x) {
                s.touched = true;
            } else {
                s.set(x, true);
            }
        }
        Ok(s)
    }

    #[inline]
    pub fn is_zealot(&self, x: Vertex) -> bool {
        self.state[x]
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn boundary_touched(&self) -> bool {
        self.touched
    }

    pub fn occupied(&self) -> OccupiedSet {
        VertexSet::from_mask(&self.state)
    }

    /// Sites whose next event could change the configuration.
    pub fn is_active(&self, x: Vertex) -> bool {
        self.active.contains(x)
    }

    #[inline]
    fn refresh(&mut self, x: Vertex) {
        if self.tree.is_boundary(x) {
            return;
        }
        if self.state[x] || self.zealot_neighbors[x] > 0 {
            self.active.insert(x);
        } else {
            self.active.remove(x);
        }
    }

    #[inline]
    fn set(&mut self, x: Vertex, value: bool) {
        let tree = self.tree;
        self.state[x] = value;
        if value {
            self.count += 1;
        } else {
            self.count -= 1;
        }
        for &y in tree.neighbors(x) {
            if value {
                self.zealot_neighbors[y] += 1;
                self.touched |= tree.is_boundary(y);
            } else {
                self.zealot_neighbors[y] -= 1;
            }
            self.refresh(y);
        }
        self.refresh(x);
    }

    /// Applies one mark at `site`: its new state is the OR of the sources.
    /// Returns whether the state changed.
    #[inline]
    pub fn apply(&mut self, site: Vertex, sources: &[Vertex]) -> bool {
        let value = sources.iter().any(|&y| self.state[y]);
        if value != self.state[site] {
            self.set(site, value);
            true
        } else {
            false
        }
    }
}

struct Recorder {
    cadence: Cadence,
    next_grid: f64,
    window: Option<(f64, f64)>,
    root_since: Option<f64>,
    root_time: f64,
}

impl Recorder {
    fn new(cadence: Cadence, window: Option<(f64, f64)>) -> Self {
        Recorder { cadence, next_grid: 0.0, window, root_since: None, root_time: 0.0 }
    }

    fn push(traj: &mut ForwardTrajectory, t: f64, s: &ZealotState<'_>) {
        traj.times.push(t);
        traj.counts.push(s.count());
        traj.root_states.push(s.is_zealot(0));
    }

    fn start(&mut self, traj: &mut ForwardTrajectory, s: &ZealotState<'_>) {
        if self.cadence == Cadence::EveryChange {
            Self::push(traj, 0.0, s);
        }
        if s.is_zealot(0) {
            self.root_since = Some(0.0);
        }
    }

    /// Called with the state that held on `[last event, t)`.
    fn before_event(&mut self, traj: &mut ForwardTrajectory, t: f64, s: &ZealotState<'_>) {
        if let Cadence::Fixed(dt) = self.cadence {
            while self.next_grid < t {
                Self::push(traj, self.next_grid, s);
                self.next_grid += dt;
            }
        }
    }

    fn after_change(&mut self, traj: &mut ForwardTrajectory, t: f64, s: &ZealotState<'_>) {
        if self.cadence == Cadence::EveryChange {
            Self::push(traj, t, s);
        }
        match (self.root_since, s.is_zealot(0)) {
            (None, true) => self.root_since = Some(t),
            (Some(from), false) => {
                self.root_time += self.overlap(from, t);
                self.root_since = None;
            }
            _ => {}
        }
    }

    fn overlap(&self, from: f64, to: f64) -> f64 {
        match self.window {
            Some((a, b)) => (to.min(b) - from.max(a)).max(0.0),
            None => 0.0,
        }
    }

    fn finish(mut self, traj: &mut ForwardTrajectory, horizon: f64, s: &ZealotState<'_>) {
        if let Cadence::Fixed(dt) = self.cadence {
            while self.next_grid <= horizon {
                Self::push(traj, self.next_grid, s);
                self.next_grid += dt;
            }
        }
        if let Some(from) = self.root_since {
            self.root_time += self.overlap(from, horizon);
        }
        traj.root_window_time = self.root_time;
        traj.boundary_touched = s.boundary_touched();
        traj.final_count = s.count();
    }
}

fn check_options(opts: &ForwardOptions) -> Result<()> {
    if !(opts.horizon >= 0.0) || !opts.horizon.is_finite() {
        return Err(invalid(format!("horizon must be finite and >= 0, got {}", opts.horizon)));
    }
    if let Cadence::Fixed(dt) = opts.cadence {
        if !(dt > 0.0) {
            return Err(invalid(format!("sample spacing must be positive, got {dt}")));
        }
    }
    Ok(())
}

/// Forward simulation with the default options (samples every 0.1).
pub fn simulate_forward(
    tree: &Tree,
    params: &ModelParams,
    init: &OccupiedSet,
    horizon: f64,
    seed: u64,
) -> Result<ForwardTrajectory> {
    simulate_forward_with(tree, params, init, &ForwardOptions::new(horizon), seed)
}

pub fn simulate_forward_with(
    tree: &Tree,
    params: &ModelParams,
    init: &OccupiedSet,
    opts: &ForwardOptions,
    seed: u64,
) -> Result<ForwardTrajectory> {
    check_options(opts)?;
    params.check_against(tree.min_degree())?;
    let mut rng = keyed_stream(seed, 1);
    let mut s = ZealotState::new(tree, init)?;
    let mut traj = ForwardTrajectory::default();
    let mut rec = Recorder::new(opts.cadence, opts.root_window);
    rec.start(&mut traj, &s);

    let r_max = params.site_rate(tree.max_degree());
    let (mut scratch, mut sources) = (Vec::new(), Vec::new());
    let mut t = 0.0;
    loop {
        if s.count() == 0 {
            traj.extinction_time = Some(t);
            break;
        }
        t += exp_time(&mut rng, s.active.len() as f64 * r_max);
        if t > opts.horizon {
            break;
        }
        let x = s.active.get(rng.random_range(0..s.active.len()));
        let degree = tree.degree(x);
        let rate = params.site_rate(degree);
        if rate < r_max && rng.random::<f64>() * r_max >= rate {
            continue;
        }
        traj.events += 1;
        let k = params.pick_k(degree, rng.random());
        choose_distinct(&mut rng, tree.neighbors(x), k, &mut scratch, &mut sources);
        rec.before_event(&mut traj, t, &s);
        if s.apply(x, &sources) {
            rec.after_change(&mut traj, t, &s);
        }
    }
    rec.finish(&mut traj, opts.horizon, &s);
    Ok(traj)
}

/// Runs the forward kernel on every event of `log` up to `horizon`,
/// calling `observe(time, state)` after each one.
pub fn drive_from_log<'t>(
    log: &EventLog<'t>,
    init: &OccupiedSet,
    horizon: f64,
    mut observe: impl FnMut(f64, &ZealotState<'t>),
) -> Result<ForwardTrajectory> {
    let opts = ForwardOptions::new(horizon).cadence(Cadence::EveryChange);
    check_options(&opts)?;
    let mut s = ZealotState::new(log.tree(), init)?;
    let mut traj = ForwardTrajectory::default();
    let mut rec = Recorder::new(opts.cadence, None);
    rec.start(&mut traj, &s);
    if s.count() == 0 {
        traj.extinction_time = Some(0.0);
    }
    for e in log.events().take_while(|e| e.time <= horizon) {
        traj.events += 1;
        if s.apply(e.site, e.sources) {
            rec.after_change(&mut traj, e.time, &s);
            if s.count() == 0 {
                traj.extinction_time = Some(e.time);
            }
        }
        observe(e.time, &s);
    }
    rec.finish(&mut traj, horizon, &s);
    Ok(traj)
}

/// Tree for replica `i`: shared for regular trees, resampled for Galton-Watson.
pub(crate) fn replica_tree(spec: &TreeSpec, shared: Option<&Tree>, replica_seed: u64) -> Result<Tree> {
    match shared {
        Some(t) => Ok(t.clone()),
        None => spec.build(replicate_seeds(replica_seed, 0)),
    }
}

/// Runs `replicas` independent copies in parallel and folds their results
/// in replica order, so the outcome does not depend on scheduling.
pub(crate) fn run_replicas<T, F>(
    spec: &TreeSpec,
    replicas: u64,
    seed: u64,
    init: T,
    run: F,
    merge: fn(T, T) -> T,
) -> Result<T>
where
    T: Send + Clone + Sync,
    F: Fn(&Tree, u64) -> Result<T> + Sync,
{
    if replicas == 0 {
        return Err(invalid("replicas must be >= 1"));
    }
    let shared = if spec.is_deterministic() { Some(spec.build(seed)?) } else { None };
    let results = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let rs = replicate_seeds(seed, i);
            match &shared {
                Some(t) => run(t, rs),
                None => run(&replica_tree(spec, None, rs)?, rs),
            }
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(results.into_iter().fold(init, merge))
}

/// Fraction of replicas with a zealot alive at `horizon`.
pub fn survival_probability(
    spec: &TreeSpec,
    params: &ModelParams,
    init: &OccupiedSet,
    horizon: f64,
    replicas: u64,
    seed: u64,
) -> Result<Estimate> {
    let opts = ForwardOptions::new(horizon).cadence(Cadence::Off);
    let (alive, touched) = run_replicas(
        spec,
        replicas,
        seed,
        (0u64, 0u64),
        |tree, rs| {
            let run = simulate_forward_with(tree, params, init, &opts, rs)?;
            Ok((u64::from(run.survived()), u64::from(run.boundary_touched)))
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    Ok(Estimate::proportion(alive, replicas, seed).with_boundary(touched))
}

/// Mean fraction of `[horizon/2, horizon]` during which the root is a
/// zealot, started from all zealots.
pub fn root_occupation_frequency(
    spec: &TreeSpec,
    params: &ModelParams,
    horizon: f64,
    replicas: u64,
    seed: u64,
) -> Result<Estimate> {
    let root_rate = match spec {
        TreeSpec::Regular { d, .. } => params.site_rate(*d),
        TreeSpec::GaltonWatson { dist, .. } => params.site_rate(dist.min_degree()),
    };
    if root_rate * horizon < 10.0 {
        return Err(invalid(format!("horizon {horizon} gives fewer than 10 expected events at the root")));
    }
    let window = (horizon / 2.0, horizon);
    let opts = ForwardOptions::new(horizon).cadence(Cadence::Off).root_window(window.0, window.1);
    let (moments, touched) = run_replicas(
        spec,
        replicas,
        seed,
        (Moments::default(), 0u64),
        |tree, rs| {
            let all: OccupiedSet = tree.vertices().collect();
            let run = simulate_forward_with(tree, params, &all, &opts, rs)?;
            let mut m = Moments::default();
            m.push(run.root_window_time / (window.1 - window.0));
            Ok((m, u64::from(run.boundary_touched)))
        },
        |a, b| (a.0.merge(b.0), a.1 + b.1),
    )?;
    Ok(Estimate::mean(&moments, seed).with_boundary(touched))
}
