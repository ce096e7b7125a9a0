//! The graphical representation as a replayable event log.
//!
//! Each non-boundary site `x` carries a Poisson stream of rate
//! `p_0 + d(x)(1 - p_0)`; an event consults `k` distinct neighbours
//! (`k = 0` with probability `p_0 / R`, `k >= 1` with `d(x) p_k / R`).
//! Read forward in time an event sets `x` to the OR of its sources; read
//! backward, a dual particle at `x` is replaced by particles on the sources.
//!
//! Boundary policy: boundary sites carry no events. Forward, they are held
//! at 0. Backward, a particle that lands on one is killed and the
//! truncation flag is raised.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::params::ModelParams;
use crate::rng::{choose_distinct, exp_time, keyed_stream};
use crate::tree::{Tree, Vertex, VertexSet};

/// Set of occupied sites: zealots forward, particles in the dual.
pub type OccupiedSet = VertexSet;

/// One mark of the graphical representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<'a> {
    pub time: f64,
    pub site: Vertex,
    /// Empty for a pure death mark.
    pub sources: &'a [Vertex],
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Mark {
    time: f64,
    site: Vertex,
    start: u32,
    len: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventLog<'t> {
    tree: &'t Tree,
    horizon: f64,
    seed: u64,
    // Global order: (time, site).
    marks: Vec<Mark>,
    sources: Vec<Vertex>,
}

/// Result of reading the dual backward from time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualOutcome {
    pub particles: OccupiedSet,
    /// Some particle was killed on the boundary.
    pub truncated: bool,
}

/// Samples the graphical representation on `tree` up to `horizon`.
///
/// Site `x` draws from ChaCha stream `x` under key `seed`, so the log is a
/// pure function of `(tree, params, horizon, seed)`.
pub fn sample_event_log<'t>(tree: &'t Tree, params: &ModelParams, horizon: f64, seed: u64) -> Result<EventLog<'t>> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    params.check_against(tree.min_degree())?;
    let mut marks = Vec::new();
    let mut sources = Vec::new();
    let (mut scratch, mut picked) = (Vec::new(), Vec::new());
    for x in tree.vertices().filter(|&x| !tree.is_boundary(x)) {
        let mut rng = keyed_stream(seed, x as u64);
        let degree = tree.degree(x);
        let rate = params.site_rate(degree);
        let mut time = 0.0;
        loop {
            time += exp_time(&mut rng, rate);
            if time > horizon {
                break;
            }
            let k = params.pick_k(degree, rng.random());
            choose_distinct(&mut rng, tree.neighbors(x), k, &mut scratch, &mut picked);
            marks.push(Mark { time, site: x, start: sources.len() as u32, len: k as u32 });
            sources.extend_from_slice(&picked);
        }
    }
    marks.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.site.cmp(&b.site)));
    // Lay the sources out in global event order.
    let mut ordered = Vec::with_capacity(sources.len());
    for m in &mut marks {
        let s = m.start as usize;
        m.start = ordered.len() as u32;
        ordered.extend_from_slice(&sources[s..s + m.len as usize]);
    }
    Ok(EventLog { tree, horizon, seed, marks, sources: ordered })
}

impl<'t> EventLog<'t> {
    pub fn tree(&self) -> &'t Tree {
        self.tree
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    fn view(&self, m: &Mark) -> Event<'_> {
        let s = m.start as usize;
        Event { time: m.time, site: m.site, sources: &self.sources[s..s + m.len as usize] }
    }

    /// All events in increasing time.
    pub fn events(&self) -> impl DoubleEndedIterator<Item = Event<'_>> + ExactSizeIterator + '_ {
        self.marks.iter().map(|m| self.view(m))
    }

    /// Events at `site`, in increasing time.
    pub fn site_events(&self, site: Vertex) -> impl Iterator<Item = Event<'_>> + '_ {
        self.events().filter(move |e| e.site == site)
    }

    /// Number of events with time `<= t`.
    fn count_until(&self, t: f64) -> usize {
        self.marks.partition_point(|m| m.time <= t)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::OutOfWindow { t, horizon: self.horizon });
        }
        Ok(())
    }

    /// Text form: `# horizon <h>` and `# seed <s>` header lines, then one
    /// event per line as `time site k source_1 .. source_k`, sorted by time.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.len() * 24 + 64);
        writeln!(s, "# horizon {}", self.horizon).unwrap();
        writeln!(s, "# seed {}", self.seed).unwrap();
        for e in self.events() {
            write!(s, "{} {} {}", e.time, e.site, e.sources.len()).unwrap();
            for y in e.sources {
                write!(s, " {y}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Inverse of [`to_text`](Self::to_text) against the same tree.
    pub fn from_text(tree: &'t Tree, text: &str) -> Result<EventLog<'t>> {
        let mut horizon = None;
        let mut seed = None;
        let mut marks: Vec<Mark> = Vec::new();
        let mut sources = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let perr = |msg: String| Error::Parse { line: i + 1, msg };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut f = rest.split_whitespace();
                match (f.next(), f.next()) {
                    (Some("horizon"), Some(v)) => horizon = Some(v.parse::<f64>().map_err(|e| perr(e.to_string()))?),
                    (Some("seed"), Some(v)) => seed = Some(v.parse::<u64>().map_err(|e| perr(e.to_string()))?),
                    _ => {}
                }
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() < 3 {
                return Err(perr("expected `time site k sources..`".into()));
            }
            let time: f64 = f[0].parse().map_err(|_| perr("bad time".into()))?;
            let site: Vertex = f[1].parse().map_err(|_| perr("bad site".into()))?;
            let k: usize = f[2].parse().map_err(|_| perr("bad k".into()))?;
            if f.len() != 3 + k {
                return Err(perr(format!("expected {k} sources")));
            }
            if !tree.contains(site) || tree.is_boundary(site) {
                return Err(perr(format!("site {site} cannot carry events")));
            }
            let start = sources.len();
            for tok in &f[3..] {
                let y: Vertex = tok.parse().map_err(|_| perr("bad source".into()))?;
                if !tree.neighbors(site).contains(&y) || sources[start..].contains(&y) {
                    return Err(perr(format!("{y} is not a fresh neighbour of {site}")));
                }
                sources.push(y);
            }
            if let Some(prev) = marks.last() {
                if (prev.time, prev.site) >= (time, site) {
                    return Err(perr("events out of order".into()));
                }
            }
            marks.push(Mark { time, site, start: start as u32, len: k as u32 });
        }
        let horizon = horizon.ok_or(Error::Parse { line: 0, msg: "missing horizon".into() })?;
        let seed = seed.ok_or(Error::Parse { line: 0, msg: "missing seed".into() })?;
        if marks.iter().any(|m| !(m.time > 0.0 && m.time <= horizon)) {
            return Err(Error::Parse { line: 0, msg: "event time outside (0, horizon]".into() });
        }
        Ok(EventLog { tree, horizon, seed, marks, sources })
    }
}

/// Zealot configuration at time `t` started from `a`: fluid flows up the
/// log and is blocked by marks whose sources are all empty.
pub fn forward_state(log: &EventLog<'_>, a: &OccupiedSet, t: f64) -> Result<OccupiedSet> {
    log.check_time(t)?;
    a.check_in(log.tree)?;
    let mut state = a.to_mask(log.tree.len());
    for x in log.tree.boundary() {
        state[x] = false;
    }
    for e in log.events().take(log.count_until(t)) {
        state[e.site] = e.sources.iter().any(|&y| state[y]);
    }
    Ok(VertexSet::from_mask(&state))
}

/// Dual particles after reading the log backward from `t` over `(t - s, t]`.
pub fn dual_state(log: &EventLog<'_>, b: &OccupiedSet, t: f64, s: f64) -> Result<DualOutcome> {
    if s > t || s < 0.0 {
        return Err(Error::InvalidWindow { s, t });
    }
    log.check_time(t)?;
    b.check_in(log.tree)?;
    let tree = log.tree;
    let mut occupied = b.to_mask(tree.len());
    let mut truncated = false;
    for x in tree.boundary() {
        truncated |= occupied[x];
        occupied[x] = false;
    }
    let start = t - s;
    for e in log.events().take(log.count_until(t)).rev() {
        if e.time <= start {
            break;
        }
        if !occupied[e.site] {
            continue;
        }
        occupied[e.site] = false;
        for &y in e.sources {
            if tree.is_boundary(y) {
                truncated = true;
            } else {
                occupied[y] = true;
            }
        }
    }
    Ok(DualOutcome { particles: VertexSet::from_mask(&occupied), truncated })
}

/// Pathwise duality on one log: `{xi_t^A meets B} = {A meets zeta_t^{B,t}}`.
///
/// Returns [`Error::Inconclusive`] if the dual reached the boundary.
pub fn check_duality(log: &EventLog<'_>, a: &OccupiedSet, b: &OccupiedSet, t: f64) -> Result<bool> {
    let dual = dual_state(log, b, t, t)?;
    if dual.truncated {
        return Err(Error::Inconclusive);
    }
    let forward = forward_state(log, a, t)?;
    Ok(forward.intersects(b) == a.intersects(&dual.particles))
}

/// Pathwise additivity: the process from a union is the union of processes.
pub fn check_additivity(log: &EventLog<'_>, parts: &[OccupiedSet], t: f64) -> Result<bool> {
    let union = parts.iter().fold(VertexSet::new(), |acc, p| acc.union(p));
    let whole = forward_state(log, &union, t)?;
    let mut pieces = VertexSet::new();
    for p in parts {
        pieces = pieces.union(&forward_state(log, p, t)?);
    }
    Ok(whole == pieces)
}
