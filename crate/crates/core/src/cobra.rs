//! The dual: coalescing branching random walk (COBRA), its non-coalescing
//! counterpart the branching random walk (BRW), and the tagged lineage.
//!
//! A particle at `x` dies at rate `p_0`, and at rate `d(x) p_k` dies leaving
//! offspring on `k` distinct uniformly chosen neighbours. In the COBRA
//! offspring merge with particles already present; in the BRW they stack.
//! Offspring landing on the boundary are killed and counted.

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::estimate::{Estimate, Moments};
use crate::graphical::OccupiedSet;
use crate::params::ModelParams;
use crate::rng::{choose_distinct, exp_time, keyed_stream};
use crate::tree::{Tree, TreeSpec, Vertex, VertexSet};
use crate::zealot::{run_replicas, IndexSet};

/// Default cap on the BRW population.
pub const DEFAULT_POPULATION_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CobraOptions {
    pub horizon: f64,
    /// Sample spacing for the trajectory; `None` records nothing.
    pub sample_dt: Option<f64>,
    /// Window in which root occupation is watched.
    pub root_window: Option<(f64, f64)>,
    /// Stop as soon as the root is seen occupied inside the window.
    pub stop_on_root_hit: bool,
}

impl CobraOptions {
    pub fn new(horizon: f64) -> Self {
        CobraOptions { horizon, sample_dt: None, root_window: None, stop_on_root_hit: false }
    }
}

/// COBRA configuration plus counters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    pub occupied: OccupiedSet,
    pub time: f64,
    /// Number of times the root went from empty to occupied.
    pub root_visits: u64,
    pub boundary_kills: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CobraRun {
    pub final_state: ParticleState,
    pub extinction_time: Option<f64>,
    /// The root was occupied at some time inside the watched window.
    pub root_hit_in_window: bool,
    /// `(t, particle_count, root_visits)` samples.
    pub samples: Vec<(f64, usize, u64)>,
    pub events: u64,
}

impl CobraRun {
    pub fn survived(&self) -> bool {
        !self.final_state.occupied.is_empty()
    }

    /// CSV with header `t,particle_count,root_visits`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,particle_count,root_visits\n");
        for &(t, n, v) in &self.samples {
            s.push_str(&format!("{t},{n},{v}\n"));
        }
        s
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(invalid(format!("horizon must be finite and >= 0, got {horizon}")));
    }
    Ok(())
}

fn in_window(window: Option<(f64, f64)>, t: f64) -> bool {
    window.is_some_and(|(a, b)| a <= t && t <= b)
}

pub fn simulate_cobra(
    tree: &Tree,
    params: &ModelParams,
    init: &OccupiedSet,
    horizon: f64,
    seed: u64,
) -> Result<CobraRun> {
    let opts = CobraOptions { sample_dt: Some(0.1), ..CobraOptions::new(horizon) };
    simulate_cobra_with(tree, params, init, &opts, seed)
}

pub fn simulate_cobra_with(
    tree: &Tree,
    params: &ModelParams,
    init: &OccupiedSet,
    opts: &CobraOptions,
    seed: u64,
) -> Result<CobraRun> {
    check_horizon(opts.horizon)?;
    init.check_in(tree)?;
    params.check_against(tree.min_degree())?;
    let mut rng = keyed_stream(seed, 2);
    let mut occ = IndexSet::new(tree.len());
    let mut kills = 0u64;
    for x in init.iter() {
        if tree.is_boundary(x) {
            kills += 1;
        } else {
            occ.insert(x);
        }
    }
    let root = tree.root();
    let mut visits = 0u64;
    let window = opts.root_window;
    // Occupied at the start of the window counts as a hit.
    let mut hit = occ.contains(root) && in_window(window, 0.0);
    let mut samples = Vec::new();
    let mut next_sample = 0.0;
    let r_max = params.site_rate(tree.max_degree());
    let (mut scratch, mut offspring) = (Vec::new(), Vec::new());
    let mut t = 0.0;
    let mut events = 0u64;
    let mut extinction_time = None;
    let mut sample = |upto: f64, strict: bool, occ: &IndexSet, visits: u64, samples: &mut Vec<_>| {
        if let Some(dt) = opts.sample_dt {
            while next_sample < upto || (!strict && next_sample <= upto) {
                samples.push((next_sample, occ.len(), visits));
                next_sample += dt;
            }
        }
    };
    loop {
        if occ.len() == 0 {
            extinction_time = Some(t);
            break;
        }
        if opts.stop_on_root_hit && hit {
            break;
        }
        let next = t + exp_time(&mut rng, occ.len() as f64 * r_max);
        if let Some((a, _)) = window {
            // The root may sit occupied across the window's left edge.
            if t < a && a <= next.min(opts.horizon) && occ.contains(root) {
                hit = true;
            }
        }
        t = next;
        if t > opts.horizon {
            break;
        }
        let x = occ.get(rng.random_range(0..occ.len()));
        let degree = tree.degree(x);
        let rate = params.site_rate(degree);
        if rate < r_max && rng.random::<f64>() * r_max >= rate {
            continue;
        }
        events += 1;
        sample(t, true, &occ, visits, &mut samples);
        let k = params.pick_k(degree, rng.random());
        choose_distinct(&mut rng, tree.neighbors(x), k, &mut scratch, &mut offspring);
        occ.remove(x);
        for &y in &offspring {
            if tree.is_boundary(y) {
                kills += 1;
            } else if !occ.contains(y) {
                occ.insert(y);
                if y == root {
                    visits += 1;
                    hit |= in_window(window, t);
                }
            }
        }
    }
    let end = t.min(opts.horizon);
    if extinction_time.is_some() || !(opts.stop_on_root_hit && hit) {
        sample(opts.horizon, false, &occ, visits, &mut samples);
    }
    Ok(CobraRun {
        final_state: ParticleState {
            occupied: occ.iter().collect(),
            time: end,
            root_visits: visits,
            boundary_kills: kills,
        },
        extinction_time,
        root_hit_in_window: hit,
        samples,
        events,
    })
}

/// BRW population: one entry per particle (sites may repeat).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrwState {
    pub particles: Vec<Vertex>,
    pub time: f64,
    pub boundary_kills: u64,
    /// Sites of the COBRA embedded in this BRW (see [`simulate_brw`]).
    pub embedded_cobra: OccupiedSet,
}

impl BrwState {
    pub fn count_at(&self, x: Vertex) -> usize {
        self.particles.iter().filter(|&&y| y == x).count()
    }

    pub fn support(&self) -> OccupiedSet {
        self.particles.iter().copied().collect()
    }
}

/// Branching random walk without coalescence.
///
/// Each particle carries its own clock. One particle per site is marked as
/// the COBRA representative: when a marked particle branches, offspring on
/// sites without a marked particle become marked. The marked particles
/// follow exactly the COBRA dynamics, so [`BrwState::embedded_cobra`] is a
/// COBRA coupled below the BRW.
///
/// `observe` is called after every event. Fails with [`Error::Overflow`]
/// once the population exceeds `cap`.
pub fn simulate_brw_with(
    tree: &Tree,
    params: &ModelParams,
    init: &OccupiedSet,
    horizon: f64,
    seed: u64,
    cap: usize,
    mut observe: impl FnMut(&BrwState),
) -> Result<BrwState> {
    check_horizon(horizon)?;
    init.check_in(tree)?;
    params.check_against(tree.min_degree())?;
    let mut rng = keyed_stream(seed, 3);
    let mut particles: Vec<(Vertex, bool)> = Vec::new();
    let mut marked = vec![false; tree.len()];
    let mut kills = 0u64;
    for x in init.iter() {
        if tree.is_boundary(x) {
            kills += 1;
        } else {
            particles.push((x, true));
            marked[x] = true;
        }
    }
    let r_max = params.site_rate(tree.max_degree());
    let (mut scratch, mut offspring) = (Vec::new(), Vec::new());
    let mut t = 0.0;
    let snapshot = |particles: &[(Vertex, bool)], t: f64, kills: u64, marked: &[bool]| BrwState {
        particles: particles.iter().map(|p| p.0).collect(),
        time: t,
        boundary_kills: kills,
        embedded_cobra: VertexSet::from_mask(marked),
    };
    while !particles.is_empty() {
        t += exp_time(&mut rng, particles.len() as f64 * r_max);
        if t > horizon {
            break;
        }
        let i = rng.random_range(0..particles.len());
        let (x, is_marked) = particles[i];
        let degree = tree.degree(x);
        let rate = params.site_rate(degree);
        if rate < r_max && rng.random::<f64>() * r_max >= rate {
            continue;
        }
        let k = params.pick_k(degree, rng.random());
        choose_distinct(&mut rng, tree.neighbors(x), k, &mut scratch, &mut offspring);
        particles.swap_remove(i);
        if is_marked {
            marked[x] = false;
        }
        for &y in &offspring {
            if tree.is_boundary(y) {
                kills += 1;
                continue;
            }
            let mark = is_marked && !marked[y];
            if mark {
                marked[y] = true;
            }
            particles.push((y, mark));
        }
        if particles.len() > cap {
            return Err(Error::Overflow { cap });
        }
        observe(&snapshot(&particles, t, kills, &marked));
    }
    Ok(snapshot(&particles, t.min(horizon), kills, &marked))
}

pub fn simulate_brw(
    tree: &Tree,
    params: &ModelParams,
    init: &OccupiedSet,
    horizon: f64,
    seed: u64,
) -> Result<BrwState> {
    simulate_brw_with(tree, params, init, horizon, seed, DEFAULT_POPULATION_CAP, |_| {})
}

/// `m(t, root)` together with the probability mass left out by truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanOccupancy {
    pub value: f64,
    /// Upper bound on the neglected mass of `P(S_t = root)`.
    pub tail_bound: f64,
}

const TAIL_TOLERANCE: f64 = 1e-12;

/// Expected number of BRW particles at the root of the `d`-regular tree at
/// time `t`, started from one particle there:
/// `m(t, root) = exp((d mu - alpha) t) P(S_t = root)`, `alpha = d(1 - p_0) + p_0`,
/// with `S` the walk jumping to a uniform neighbour at rate `d mu`.
///
/// `P(S_t = root)` is computed by uniformisation over at most `truncation`
/// jumps of the distance-to-root chain.
pub fn brw_mean_occupancy_root(d: u32, params: &ModelParams, t: f64, truncation: usize) -> Result<MeanOccupancy> {
    if d < 3 {
        return Err(invalid(format!("degree {d} < 3")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!("time must be finite and >= 0, got {t}")));
    }
    let df = d as f64;
    let mu = params.mu();
    let alpha = df * (1.0 - params.p0()) + params.p0();
    let lambda = df * mu * t;

    // Poisson(lambda) weights in log space.
    let log_pmf = |n: usize, ln_fact: f64| -> f64 {
        if lambda == 0.0 {
            return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
        }
        -lambda + n as f64 * lambda.ln() - ln_fact
    };
    let mut dist = vec![0.0; truncation + 2];
    dist[0] = 1.0;
    let mut next = vec![0.0; truncation + 2];
    let (up, down) = ((df - 1.0) / df, 1.0 / df);
    let mut ln_fact = 0.0;
    let mut p_root = 0.0;
    for n in 0..=truncation {
        if n > 0 {
            ln_fact += (n as f64).ln();
            next.iter_mut().for_each(|v| *v = 0.0);
            next[1] += dist[0];
            for x in 1..=n.min(truncation) {
                next[x + 1] += up * dist[x];
                next[x - 1] += down * dist[x];
            }
            std::mem::swap(&mut dist, &mut next);
        }
        p_root += log_pmf(n, ln_fact).exp() * dist[0];
    }
    let mut tail = 0.0;
    let mut n = truncation;
    loop {
        n += 1;
        ln_fact += (n as f64).ln();
        let term = log_pmf(n, ln_fact).exp();
        tail += term;
        if (n as f64 > lambda && term < 1e-18 * tail.max(1e-300)) || term == 0.0 && n as f64 > lambda {
            break;
        }
    }
    if tail > TAIL_TOLERANCE {
        return Err(Error::Precision(format!("truncation {truncation} leaves {tail:e} of P(S_t = root) at t = {t}")));
    }
    let growth = ((df * mu - alpha) * t).exp();
    Ok(MeanOccupancy { value: growth * p_root, tail_bound: growth * tail })
}

/// Path of the lineage that always follows an offspring placed on the
/// parent, when there is one.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TaggedWalk {
    pub positions: Vec<Vertex>,
    /// Branching events at non-root sites.
    pub events: u64,
    /// Events at non-root sites that moved the lineage to the parent.
    pub toward_root_steps: u64,
    /// Per-degree `(events, toward_root_steps)` at non-root sites.
    pub by_degree: Vec<(u64, u64)>,
    /// Forced steps back from the boundary (not branching events).
    pub reflections: u64,
}

impl TaggedWalk {
    pub fn toward_root_frequency(&self) -> f64 {
        self.toward_root_steps as f64 / self.events as f64
    }
}

/// Follows one lineage for `steps` branching events.
///
/// Only the jump chain matters, so no clock is kept. A lineage that reaches
/// the boundary is stepped back to the parent; such reflections are not
/// branching events and do not enter the frequencies.
pub fn tagged_particle_walk(tree: &Tree, params: &ModelParams, steps: u64, seed: u64) -> Result<TaggedWalk> {
    if params.p0() > 0.0 {
        return Err(Error::Unsupported("the tagged lineage needs p_0 = 0".into()));
    }
    params.check_against(tree.min_degree())?;
    if tree.is_boundary(tree.root()) {
        return Err(invalid("tree has no interior"));
    }
    let mut rng = keyed_stream(seed, 4);
    let mut walk = TaggedWalk {
        positions: vec![tree.root()],
        by_degree: vec![(0, 0); tree.max_degree() as usize + 1],
        ..TaggedWalk::default()
    };
    let (mut scratch, mut offspring) = (Vec::new(), Vec::new());
    let mut x = tree.root();
    for _ in 0..steps {
        let degree = tree.degree(x);
        let k = params.pick_k(degree, rng.random());
        choose_distinct(&mut rng, tree.neighbors(x), k, &mut scratch, &mut offspring);
        let parent = tree.parent(x);
        let next = match parent {
            Some(p) if offspring.contains(&p) => p,
            _ => offspring[rng.random_range(0..offspring.len())],
        };
        if parent.is_some() {
            let toward = Some(next) == parent;
            walk.events += 1;
            walk.toward_root_steps += u64::from(toward);
            let slot = &mut walk.by_degree[degree as usize];
            slot.0 += 1;
            slot.1 += u64::from(toward);
        }
        x = next;
        walk.positions.push(x);
        if tree.is_boundary(x) {
            x = tree.parent(x).unwrap();
            walk.reflections += 1;
            walk.positions.push(x);
        }
    }
    Ok(walk)
}

/// Fraction of COBRA runs from `{root}` in which the root is occupied at
/// some time in `[horizon/2, horizon]`.
pub fn local_survival_frequency(
    spec: &TreeSpec,
    params: &ModelParams,
    horizon: f64,
    replicas: u64,
    seed: u64,
) -> Result<Estimate> {
    local_survival_frequency_window(spec, params, horizon, 0.5, replicas, seed)
}

/// As [`local_survival_frequency`] with the window `[f * horizon, horizon]`.
pub fn local_survival_frequency_window(
    spec: &TreeSpec,
    params: &ModelParams,
    horizon: f64,
    window_fraction: f64,
    replicas: u64,
    seed: u64,
) -> Result<Estimate> {
    if !(0.0..=1.0).contains(&window_fraction) {
        return Err(invalid(format!("window fraction {window_fraction} outside [0, 1]")));
    }
    let opts = CobraOptions {
        root_window: Some((window_fraction * horizon, horizon)),
        stop_on_root_hit: true,
        ..CobraOptions::new(horizon)
    };
    let (hits, touched) = run_replicas(
        spec,
        replicas,
        seed,
        (0u64, 0u64),
        |tree, rs| {
            let run = simulate_cobra_with(tree, params, &VertexSet::from([tree.root()]), &opts, rs)?;
            Ok((u64::from(run.root_hit_in_window), u64::from(run.final_state.boundary_kills > 0)))
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    Ok(Estimate::proportion(hits, replicas, seed).with_boundary(touched))
}

/// Fraction of COBRA runs from `init` with a particle alive at `horizon`.
pub fn cobra_survival_probability(
    spec: &TreeSpec,
    params: &ModelParams,
    init: &OccupiedSet,
    horizon: f64,
    replicas: u64,
    seed: u64,
) -> Result<Estimate> {
    let opts = CobraOptions::new(horizon);
    let (alive, touched) = run_replicas(
        spec,
        replicas,
        seed,
        (0u64, 0u64),
        |tree, rs| {
            let run = simulate_cobra_with(tree, params, init, &opts, rs)?;
            Ok((u64::from(run.survived()), u64::from(run.final_state.boundary_kills > 0)))
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    Ok(Estimate::proportion(alive, replicas, seed).with_boundary(touched))
}

/// Monte Carlo mean of the BRW particle count at the root at time `t`.
pub fn brw_root_occupancy(tree: &Tree, params: &ModelParams, t: f64, replicas: u64, seed: u64) -> Result<Estimate> {
    let spec_tree = tree;
    let moments = (0..replicas)
        .map(|i| {
            let rs = crate::rng::replicate_seeds(seed, i);
            let end = simulate_brw(spec_tree, params, &VertexSet::from([tree.root()]), t, rs)?;
            Ok(end.count_at(tree.root()) as f64)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .collect::<Moments>();
    if replicas == 0 {
        return Err(invalid("replicas must be >= 1"));
    }
    Ok(Estimate::mean(&moments, seed))
}
