//! Closed-form thresholds, the `nu(0)` minimisation for Galton-Watson trees,
//! and the Monte Carlo estimators for coalescing walks on unbounded trees.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::estimate::{Estimate, Moments};
use crate::params::ModelParams;
use crate::rng::{exp_time, keyed_stream, replicate_seeds};
use crate::tree::{DegreeDist, Tree, Vertex, MAX_DEGREE, MIN_DEGREE};

fn check_degree(d: u32) -> Result<()> {
    if d < MIN_DEGREE {
        return Err(invalid(format!("degree {d} < {MIN_DEGREE}")));
    }
    Ok(())
}

/// Probability that two rate-1 walks on the `d`-regular tree started at
/// distance 2 never meet: `1 - (d-1)^-2`.
pub fn beta(d: u32) -> Result<f64> {
    check_degree(d)?;
    Ok(1.0 - ((d - 1) as f64).powi(-2))
}

/// `h(x) = (d-1)^-x`, the probability that two walks at distance `x` ever meet.
pub fn pair_hit_prob(d: u32, x: u32) -> Result<f64> {
    check_degree(d)?;
    Ok(((d - 1) as f64).powi(-(x as i32)))
}

/// `sum_{k>=2} (k-1) p_k - p_0`; positive means the model survives on any
/// tree with degrees in `[3, M]`.
pub fn survival_margin(params: &ModelParams) -> f64 {
    params.gamma()
}

/// `d beta sum_{k>=2} (k-1) p_k - p_0`; negative means extinction on the
/// `d`-regular tree.
pub fn extinction_margin(d: u32, params: &ModelParams) -> Result<f64> {
    Ok(d as f64 * beta(d)? * params.branching_excess() - params.p0())
}

/// Local die-out holds on the `d`-regular tree for `mu` below
/// `(d(1 - p_0) + p_0) / (2 sqrt(d-1))`.
pub fn local_dieout_bound(d: u32, p0: f64) -> Result<f64> {
    check_degree(d)?;
    if !(0.0..=1.0).contains(&p0) {
        return Err(invalid(format!("p_0 = {p0} is not a probability")));
    }
    let df = d as f64;
    Ok((df * (1.0 - p0) + p0) / (2.0 * (df - 1.0).sqrt()))
}

/// With `p_0 = 0`, local survival holds on the `d`-regular tree for `mu`
/// above `d / (1 + sqrt(d-1))`.
pub fn local_survival_bound(d: u32) -> Result<f64> {
    check_degree(d)?;
    let df = d as f64;
    Ok(df / (1.0 + (df - 1.0).sqrt()))
}

/// `[d / (2 sqrt(d-1)), d / (1 + sqrt(d-1))]`, where the local survival
/// transition lies when `p_0 = 0`.
pub fn local_interval(d: u32) -> Result<(f64, f64)> {
    Ok((local_dieout_bound(d, 0.0)?, local_survival_bound(d)?))
}

/// With `p_0 = 0`, local die-out holds on a tree with degrees at most `M`
/// for `mu < M / (2 sqrt(M-1))`.
pub fn gw_local_dieout_bound(max_degree: u32) -> Result<f64> {
    local_dieout_bound(max_degree, 0.0)
}

/// Number of closed walks of length `2n` from a vertex of the `d`-regular tree.
pub fn loop_count_exact(d: u32, n: u32) -> Result<BigUint> {
    check_degree(d)?;
    let steps = 2 * n as usize;
    // ways[x]: walks of the current length ending at distance x.
    let mut ways = vec![BigUint::from(0u32); steps + 2];
    ways[0] = BigUint::from(1u32);
    for len in 0..steps {
        let reach = len.min(steps - len);
        let mut next = vec![BigUint::from(0u32); steps + 2];
        for x in 0..=reach {
            if ways[x] == BigUint::ZERO {
                continue;
            }
            if x == 0 {
                next[1] += &ways[0] * d;
            } else {
                next[x + 1] += &ways[x] * (d - 1);
                next[x - 1] += &ways[x];
            }
        }
        ways = next;
    }
    Ok(ways.swap_remove(0))
}

fn bases(dist: &DegreeDist, mu: f64) -> Result<Vec<(f64, f64)>> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(invalid(format!("mu must be positive, got {mu}")));
    }
    dist.atoms()
        .map(|(j, q)| {
            if mu >= j as f64 {
                return Err(Error::SingularBase { mu, degree: j });
            }
            Ok((q * (j - 1) as f64, (j as f64 - mu) / mu))
        })
        .collect()
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta >= 0.0) {
        return Err(invalid(format!("theta must be >= 0, got {theta}")));
    }
    Ok(())
}

/// `m(theta) = sum_j q_j (j-1) ((j - mu)/mu)^theta`.
pub fn m_theta(dist: &DegreeDist, mu: f64, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(eval_m(&bases(dist, mu)?, theta))
}

/// `m'(0) = sum_j q_j (j-1) log((j - mu)/mu)`.
pub fn m_prime0(dist: &DegreeDist, mu: f64) -> Result<f64> {
    Ok(eval_dm(&bases(dist, mu)?, 0.0))
}

fn eval_m(terms: &[(f64, f64)], theta: f64) -> f64 {
    terms.iter().map(|&(w, b)| w * b.powf(theta)).sum()
}

fn eval_dm(terms: &[(f64, f64)], theta: f64) -> f64 {
    terms.iter().map(|&(w, b)| w * b.powf(theta) * b.ln()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuReport {
    pub mu: f64,
    pub m0: f64,
    pub mprime0: f64,
    /// Closed-form minimiser, on `{3, 4}` support with `m'(0) < 0`.
    pub theta_bar: Option<f64>,
    pub nu0: f64,
    /// `+inf` when `m` decreases forever and the infimum is a limit.
    pub minimizer: f64,
    pub local_survival: bool,
}

const GOLDEN_TOL: f64 = 1e-10;
const THETA_BAR_TOL: f64 = 1e-8;

/// `nu(0) = min_{theta >= 0} m(theta)`; `nu(0) < 1` certifies local survival
/// on the Galton-Watson tree when `p_0 = 0`.
///
/// `m` is convex. The minimiser is bracketed by doubling until `m' > 0`,
/// narrowed by golden-section search, then polished by bisection on the
/// sign of `m'` (near a flat minimum `m` alone cannot locate `theta` to
/// better than about the square root of machine precision).
pub fn nu0(dist: &DegreeDist, mu: f64) -> Result<NuReport> {
    let terms = bases(dist, mu)?;
    let m0 = eval_m(&terms, 0.0);
    let mprime0 = eval_dm(&terms, 0.0);
    let report = |minimizer: f64, nu0: f64, theta_bar| NuReport {
        mu,
        m0,
        mprime0,
        theta_bar,
        nu0,
        minimizer,
        local_survival: nu0 < 1.0,
    };
    if mprime0 >= 0.0 {
        return Ok(report(0.0, m0, None));
    }
    if terms.iter().all(|&(_, b)| b <= 1.0) {
        // m decreases to the mass sitting on unit bases.
        let limit = terms.iter().filter(|&&(_, b)| b == 1.0).map(|&(w, _)| w).sum();
        return Ok(report(f64::INFINITY, limit, None));
    }
    let mut hi = 1.0;
    while eval_dm(&terms, hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Precision(format!("cannot bracket the minimiser of m at mu = {mu}")));
        }
    }
    let (a, b) = golden_section(|t| eval_m(&terms, t), 0.0, hi, GOLDEN_TOL);
    let theta = polish(|t| eval_dm(&terms, t), a, b, hi);
    let value = eval_m(&terms, theta);
    let theta_bar = closed_form_theta(dist, mu);
    if let Some(tb) = theta_bar {
        if (tb - theta).abs() > THETA_BAR_TOL * tb.max(1.0) {
            return Err(Error::Precision(format!("numerical minimiser {theta} disagrees with closed form {tb}")));
        }
    }
    Ok(report(theta, value, theta_bar))
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > rel_tol * (0.5 * (a + b)).max(1.0) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a, b)
}

/// Root of the increasing function `dm` near `[a, b]`, within `[0, outer]`.
fn polish(dm: impl Fn(f64) -> f64, a: f64, b: f64, outer: f64) -> f64 {
    let width = b - a;
    let mut lo = (a - width).max(0.0);
    let mut hi = (b + width).min(outer);
    if dm(lo) > 0.0 {
        lo = 0.0;
    }
    if dm(hi) < 0.0 {
        hi = outer;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if dm(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// `(log A - log B) / log((4-mu)/(3-mu))` with `A = 2 q_3 log(mu/(3-mu))`
/// and `B = 3 q_4 log((4-mu)/mu)`; defined on `{3, 4}` support when both
/// logarithms are positive and `A > B`.
pub fn closed_form_theta(dist: &DegreeDist, mu: f64) -> Option<f64> {
    let (q3, q4) = (dist.q(3), dist.q(4));
    if q3 <= 0.0 || q4 <= 0.0 || dist.atoms().count() != 2 {
        return None;
    }
    let a = 2.0 * q3 * (mu / (3.0 - mu)).ln();
    let b = 3.0 * q4 * ((4.0 - mu) / mu).ln();
    if !(a > 0.0 && b > 0.0 && a > b) {
        return None;
    }
    Some((a.ln() - b.ln()) / ((4.0 - mu) / (3.0 - mu)).ln())
}

/// The value of `q_3` on `{3, 4}` trees at which `m'(0)` changes sign:
/// `3 log((4-mu)/mu) / (3 log((4-mu)/mu) + 2 log(mu/(3-mu)))`.
pub fn p_crit(mu: f64) -> Result<f64> {
    if !(mu > 1.5 && mu <= 2.0) {
        return Err(invalid(format!("p_crit needs 3/2 < mu <= 2, got {mu}")));
    }
    let up = 3.0 * ((4.0 - mu) / mu).ln();
    Ok(up / (up + 2.0 * (mu / (3.0 - mu)).ln()))
}

/// Log-increments `log(phi(x_n) - phi(x_{n-1}))` of the harmonic function
/// along `path`, for `n = 1, ..`, with the first increment normalised to 1.
pub fn harmonic_increments(tree: &Tree, mu: f64, path: &[Vertex]) -> Result<Vec<f64>> {
    if !(mu > 0.0) {
        return Err(invalid(format!("mu must be positive, got {mu}")));
    }
    match path.first() {
        Some(&x) if x == tree.root() => {}
        _ => return Err(invalid("path must start at the root")),
    }
    for pair in path.windows(2) {
        if !tree.contains(pair[1]) || !tree.neighbors(pair[0]).contains(&pair[1]) {
            return Err(invalid(format!("{} and {} are not adjacent", pair[0], pair[1])));
        }
    }
    let mut out = Vec::with_capacity(path.len().saturating_sub(1));
    let mut acc = 0.0;
    for n in 1..path.len() {
        if n > 1 {
            let d = tree.degree(path[n - 1]);
            if mu >= d as f64 {
                return Err(Error::SingularBase { mu, degree: d });
            }
            acc += (mu / (d as f64 - mu)).ln();
        }
        out.push(acc);
    }
    Ok(out)
}

/// Inputs of the voter-perturbation margin.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationInputs {
    /// Fraction of vertices of each degree.
    pub pi: BTreeMap<u32, f64>,
    /// Expected long-run survivors among `k` coalescing walks started on
    /// distinct neighbours of a degree-`m` vertex. `k = 1` defaults to 1.
    pub mu_mk: BTreeMap<(u32, usize), f64>,
    pub p: ModelParams,
}

impl PerturbationInputs {
    /// `pi_m = q_m`, and `mu_{m,k}` looked up in `table`.
    pub fn from_dist(dist: &DegreeDist, p: ModelParams, table: BTreeMap<(u32, usize), f64>) -> Self {
        PerturbationInputs { pi: dist.atoms().collect(), mu_mk: table, p }
    }
}

/// `sum_m pi_m sum_k k p_k (mu_{m,k} - 1) - p_0`.
pub fn perturbation_margin(inputs: &PerturbationInputs) -> Result<f64> {
    let total: f64 = inputs.pi.values().sum();
    if (total - 1.0).abs() > 1e-9 || inputs.pi.values().any(|&v| !(v >= 0.0)) {
        return Err(invalid(format!("degree fractions sum to {total}")));
    }
    for (&(m, k), &v) in &inputs.mu_mk {
        if !(v >= 1.0 && v <= k as f64) {
            return Err(invalid(format!("mu_{{{m},{k}}} = {v} outside [1, {k}]")));
        }
    }
    let mut sum = 0.0;
    for (&m, &pi) in &inputs.pi {
        if pi == 0.0 {
            continue;
        }
        for k in 1..=inputs.p.max_k() {
            let pk = inputs.p.p(k);
            if pk == 0.0 {
                continue;
            }
            let mu = match inputs.mu_mk.get(&(m, k)) {
                Some(&v) => v,
                None if k == 1 => 1.0,
                None => return Err(invalid(format!("missing mu_{{{m},{k}}}"))),
            };
            sum += pi * k as f64 * pk * (mu - 1.0);
        }
    }
    Ok(sum - inputs.p.p0())
}

/// Galton-Watson tree that creates vertices on first visit, so walks never
/// see a boundary. The root has a prescribed degree.
struct LazyTree<'a> {
    dist: &'a DegreeDist,
    rng: ChaCha8Rng,
    parent: Vec<u32>,
    degree: Vec<u8>,
    first_child: Vec<u32>,
}

const UNEXPANDED: u32 = u32::MAX;

impl<'a> LazyTree<'a> {
    fn new(dist: &'a DegreeDist, root_degree: u32, rng: ChaCha8Rng) -> Self {
        LazyTree { dist, rng, parent: vec![0], degree: vec![root_degree as u8], first_child: vec![UNEXPANDED] }
    }

    fn len(&self) -> usize {
        self.parent.len()
    }

    /// The `j`-th neighbour of `x`; index 0 is the parent for non-root `x`.
    fn neighbor(&mut self, x: usize, j: usize) -> usize {
        if x != 0 && j == 0 {
            return self.parent[x] as usize;
        }
        if self.first_child[x] == UNEXPANDED {
            let count = self.degree[x] as usize - usize::from(x != 0);
            self.first_child[x] = self.len() as u32;
            for _ in 0..count {
                let d = self.dist.sample(self.rng.random());
                self.parent.push(x as u32);
                self.degree.push(d as u8);
                self.first_child.push(UNEXPANDED);
            }
        }
        self.first_child[x] as usize + j - usize::from(x != 0)
    }

    fn step(&mut self, x: usize, rng: &mut ChaCha8Rng) -> usize {
        let j = rng.random_range(0..self.degree[x] as usize);
        self.neighbor(x, j)
    }
}

/// Sums of a count statistic over replicas, in exact integer arithmetic so
/// the result does not depend on the order replicas finish in.
fn integer_moments(replicas: u64, seed: u64, f: impl Fn(u64) -> u64 + Sync) -> Result<Moments> {
    if replicas == 0 {
        return Err(invalid("replicas must be >= 1"));
    }
    let (sum, sum_sq) = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let v = f(replicate_seeds(seed, i)) as u128;
            (v, v * v)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(Moments { n: replicas, sum: sum as f64, sum_sq: sum_sq as f64 })
}

/// Monte Carlo probability that two rate-1 walks on the `d`-regular tree,
/// started at distance `x`, meet before `horizon`.
pub fn estimate_pair_hit(d: u32, x: u32, horizon: f64, replicas: u64, seed: u64) -> Result<Estimate> {
    check_degree(d)?;
    if d > MAX_DEGREE {
        return Err(invalid(format!("degree {d} > {MAX_DEGREE}")));
    }
    let dist = DegreeDist::single(d)?;
    let m = integer_moments(replicas, seed, |rs| {
        let mut tree = LazyTree::new(&dist, d, keyed_stream(rs, 6));
        let mut rng = keyed_stream(rs, 5);
        let mut b = 0;
        for _ in 0..x {
            b = tree.neighbor(b, usize::from(b != 0));
        }
        let mut pos = [0usize, b];
        if pos[0] == pos[1] {
            return 1;
        }
        let mut t = 0.0;
        loop {
            t += exp_time(&mut rng, 2.0);
            if t > horizon {
                return 0;
            }
            let i = rng.random_range(0..2);
            pos[i] = tree.step(pos[i], &mut rng);
            if pos[0] == pos[1] {
                return 1;
            }
        }
    })?;
    Ok(Estimate::proportion(m.sum as u64, replicas, seed))
}

/// Default horizon of the `mu_{m,k}` estimator.
pub const MU_MK_HORIZON: f64 = 50.0;

/// Monte Carlo `mu_{m,k}`: `k` rate-1 coalescing walks started on distinct
/// uniform neighbours of a degree-`m` root of a Galton-Watson tree, counted
/// at `horizon`.
///
/// Coalescences after the horizon are missed, so the estimate is biased
/// upward. On the `d`-regular tree the remaining bias for a pair at distance
/// `x` is bounded by `h(x)` minus its value at the horizon.
pub fn estimate_mu_mk(dist: &DegreeDist, m: u32, k: usize, horizon: f64, replicas: u64, seed: u64) -> Result<Estimate> {
    if k == 0 || k > m as usize {
        return Err(invalid(format!("need 1 <= k <= m, got k = {k}, m = {m}")));
    }
    if dist.q(m) == 0.0 {
        return Err(invalid(format!("degree {m} has no mass under the distribution")));
    }
    if !(horizon >= 0.0) {
        return Err(invalid(format!("horizon must be >= 0, got {horizon}")));
    }
    let moments = integer_moments(replicas, seed, |rs| {
        let mut tree = LazyTree::new(dist, m, keyed_stream(rs, 6));
        let mut rng = keyed_stream(rs, 5);
        let mut slots: Vec<usize> = (0..m as usize).collect();
        let mut walkers = Vec::with_capacity(k);
        for i in 0..k {
            let j = rng.random_range(i..slots.len());
            slots.swap(i, j);
            walkers.push(tree.neighbor(0, slots[i]));
        }
        let mut t = 0.0;
        while walkers.len() > 1 {
            t += exp_time(&mut rng, walkers.len() as f64);
            if t > horizon {
                break;
            }
            let i = rng.random_range(0..walkers.len());
            let to = tree.step(walkers[i], &mut rng);
            if walkers.contains(&to) {
                walkers.swap_remove(i);
            } else {
                walkers[i] = to;
            }
        }
        walkers.len() as u64
    })?;
    Ok(Estimate::mean(&moments, seed))
}

/// Conclusion a criterion supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Survives,
    Dies,
    DiesLocally,
    SurvivesLocally,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Satisfied,
    Violated,
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: &'static str,
    pub status: Status,
    /// Conclusion when satisfied, otherwise undetermined.
    pub regime: Regime,
    /// Signed margin; positive when satisfied.
    pub margin: Option<f64>,
}

impl Criterion {
    fn new(name: &'static str, margin: Option<f64>, conclusion: Regime) -> Self {
        let status = match margin {
            None => Status::Inapplicable,
            Some(m) if m > 0.0 => Status::Satisfied,
            Some(_) => Status::Violated,
        };
        let regime = if status == Status::Satisfied { conclusion } else { Regime::Undetermined };
        Criterion { name, status, regime, margin }
    }
}

/// Tree family the criteria refer to.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Regular(u32),
    GaltonWatson(DegreeDist),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub mu: f64,
    pub gamma: f64,
    /// Regular trees only.
    pub extinction_margin: Option<f64>,
    pub local_dieout_bound: f64,
    /// Regular trees only.
    pub local_survival_bound: Option<f64>,
    pub local_interval: Option<(f64, f64)>,
    /// Galton-Watson trees with `mu` below the minimum degree.
    pub nu0: Option<NuReport>,
    pub criteria: Vec<Criterion>,
    pub global: Regime,
    pub local: Regime,
}

/// Evaluates every applicable criterion. The gap between the local bounds
/// is reported as undetermined, never resolved.
pub fn classify(geometry: &Geometry, params: &ModelParams) -> Result<ThresholdReport> {
    let mu = params.mu();
    let p0 = params.p0();
    let no_death = p0 == 0.0;
    let gamma = survival_margin(params);
    let mut criteria = vec![Criterion::new("survival-margin", Some(gamma), Regime::Survives)];
    let mut report = match geometry {
        Geometry::Regular(d) => {
            let d = *d;
            params.check_against(d)?;
            let ext = extinction_margin(d, params)?;
            let dieout = local_dieout_bound(d, p0)?;
            let surv = local_survival_bound(d)?;
            criteria.push(Criterion::new("extinction-margin", Some(-ext), Regime::Dies));
            criteria.push(Criterion::new("local-dieout", Some(dieout - mu), Regime::DiesLocally));
            criteria.push(Criterion::new(
                "tagged-recurrence",
                no_death.then(|| mu - d as f64 / 2.0),
                Regime::SurvivesLocally,
            ));
            criteria.push(Criterion::new("local-survival", no_death.then_some(mu - surv), Regime::SurvivesLocally));
            ThresholdReport {
                mu,
                gamma,
                extinction_margin: Some(ext),
                local_dieout_bound: dieout,
                local_survival_bound: Some(surv),
                local_interval: Some(local_interval(d)?),
                nu0: None,
                criteria: Vec::new(),
                global: Regime::Undetermined,
                local: Regime::Undetermined,
            }
        }
        Geometry::GaltonWatson(dist) => {
            params.check_against(dist.min_degree())?;
            let bound = gw_local_dieout_bound(dist.max_degree())?;
            criteria.push(Criterion::new("gw-local-dieout", no_death.then_some(bound - mu), Regime::DiesLocally));
            let nu = if no_death && mu > 0.0 && mu < dist.min_degree() as f64 { Some(nu0(dist, mu)?) } else { None };
            criteria.push(Criterion::new("nu0", nu.as_ref().map(|r| 1.0 - r.nu0), Regime::SurvivesLocally));
            ThresholdReport {
                mu,
                gamma,
                extinction_margin: None,
                local_dieout_bound: bound,
                local_survival_bound: None,
                local_interval: None,
                nu0: nu,
                criteria: Vec::new(),
                global: Regime::Undetermined,
                local: Regime::Undetermined,
            }
        }
    };
    let pick = |a: Regime, b: Regime| {
        if criteria.iter().any(|c| c.regime == a) {
            a
        } else if criteria.iter().any(|c| c.regime == b) {
            b
        } else {
            Regime::Undetermined
        }
    };
    report.global = pick(Regime::Survives, Regime::Dies);
    report.local = pick(Regime::SurvivesLocally, Regime::DiesLocally);
    report.criteria = criteria;
    Ok(report)
}

/// The `mu` columns of the reference `nu(0)` table.
pub const TABLE_MU: [f64; 4] = [1.6, 1.7, 1.8, 1.9];

/// Published `nu(0)` values on `{3, 4}` trees, rows `(q_3, [mu = 1.6, 1.7, 1.8, 1.9])`.
pub const REFERENCE_TABLE: [(f64, [Option<f64>; 4]); 20] = [
    (0.8, [Some(2.2), Some(2.014149722), Some(1.597069414), Some(1.074539921)]),
    (0.81, [Some(2.19), Some(1.979137551), Some(1.549560204), Some(1.030929768)]),
    (0.82, [Some(2.179999993), Some(1.942042353), Some(1.500601354), Some(0.896331678)]),
    (0.83, [Some(2.169035962), Some(1.902724759), Some(1.450116162), Some(0.941977346)]),
    (0.88, [Some(2.079229445), Some(1.666138794), Some(1.171184237), Some(0.708137684)]),
    (0.89, [Some(2.052259329), Some(1.608953028), Some(1.109102792), Some(0.659079066)]),
    (0.9, [Some(2.021286727), Some(1.547575636), Some(1.044453965), Some(0.609119574)]),
    (0.91, [Some(1.985646496), Some(1.481425138), Some(0.976943138), Some(0.558174592)]),
    (0.92, [Some(1.944464056), Some(1.409753116), Some(0.906197761), Some(0.506138592)]),
    (0.93, [Some(1.896552634), Some(1.331568175), Some(0.831734216), Some(0.452876792)]),
    (0.94, [Some(1.840236437), Some(1.245508443), Some(0.752903513), Some(0.398211752)]),
    (0.95, [Some(1.773023132), Some(1.14961228), Some(0.668796138), Some(0.341900422)]),
    (0.96, [Some(1.690934707), Some(1.040865809), Some(0.578059943), Some(0.283591365)]),
    (0.97, [Some(1.586938026), Some(0.914185487), Some(0.478505588), Some(0.222735055)]),
    (0.98, [Some(1.446391322), Some(0.759622966), Some(0.366073412), Some(0.158358633)]),
    (0.99, [Some(1.227510494), Some(0.551306428), Some(0.23102478), Some(0.088284998)]),
    (0.995, [Some(1.037752234), None, None, None]),
    (0.996, [Some(0.98268267), None, None, None]),
    (0.997, [Some(0.915774891), None, None, None]),
    (0.998, [Some(0.828879261), None, None, None]),
];

/// Published local-survival onsets `q_3` for `mu = 1.6, 1.7, 1.8, 1.9`.
pub const REFERENCE_CROSSINGS: [f64; 4] = [0.996, 0.97, 0.91, 0.82];

/// Published graph readings of `p_c` for `mu = 1.6, 1.7, 1.8, 1.9`.
pub const REFERENCE_PC_READINGS: [f64; 4] = [0.85, 0.65, 0.45, 0.25];

/// Agreement required before a reference cell counts as reproduced.
pub const TABLE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCell {
    pub q3: f64,
    pub mu: f64,
    pub nu0: f64,
    pub minimizer: f64,
    pub reference: Option<f64>,
    /// The reference value is off by more than [`TABLE_TOLERANCE`].
    pub discrepancy: bool,
}

/// Recomputes every cell of [`REFERENCE_TABLE`] and flags disagreements.
pub fn reference_table_comparison() -> Result<Vec<TableCell>> {
    let mut cells = Vec::new();
    for &(q3, row) in &REFERENCE_TABLE {
        for (&mu, reference) in TABLE_MU.iter().zip(row) {
            let r = nu0(&DegreeDist::three_four(q3)?, mu)?;
            cells.push(TableCell {
                q3,
                mu,
                nu0: r.nu0,
                minimizer: r.minimizer,
                reference,
                discrepancy: reference.is_some_and(|v| (v - r.nu0).abs() > TABLE_TOLERANCE),
            });
        }
    }
    Ok(cells)
}

/// Smallest grid value `q_3 = i * step` with `nu(0) < 1` on `{3, 4}` trees.
pub fn nu0_crossing(mu: f64, step: f64) -> Result<Option<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(invalid(format!("step must be in (0, 1], got {step}")));
    }
    let n = (1.0 / step).round() as u64;
    for i in 0..=n {
        let q3 = (i as f64 * step).min(1.0);
        if nu0(&DegreeDist::three_four(q3)?, mu)?.local_survival {
            return Ok(Some(q3));
        }
    }
    Ok(None)
}
