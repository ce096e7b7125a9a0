//! Rooted bounded-degree trees, materialised to a finite depth.
//!
//! Vertices are dense ids in breadth-first order, so a parent always has a
//! smaller id than its children. Each vertex stores its *intended* degree;
//! vertices on the boundary keep that degree even though their children
//! were cut off.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::keyed_stream;

pub type Vertex = usize;

/// Largest supported intended degree.
pub const MAX_DEGREE: u32 = 64;

/// Smallest degree allowed anywhere in a tree.
pub const MIN_DEGREE: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    parent: Vec<Option<Vertex>>,
    adj_start: Vec<usize>,
    // Parent first (if any), then children in construction order.
    adj: Vec<Vertex>,
    degree: Vec<u32>,
    level: Vec<u32>,
    boundary: Vec<bool>,
    depth_limit: u32,
    d_min: u32,
    d_max: u32,
}

impl Tree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> Vertex {
        0
    }

    pub fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.len()
    }

    pub fn contains(&self, x: Vertex) -> bool {
        x < self.len()
    }

    pub fn parent(&self, x: Vertex) -> Option<Vertex> {
        self.parent[x]
    }

    /// Neighbours present in the materialised tree: parent first, then children.
    #[inline]
    pub fn neighbors(&self, x: Vertex) -> &[Vertex] {
        &self.adj[self.adj_start[x]..self.adj_start[x + 1]]
    }

    pub fn children(&self, x: Vertex) -> &[Vertex] {
        let skip = usize::from(self.parent[x].is_some());
        &self.neighbors(x)[skip..]
    }

    /// Intended degree (also for boundary vertices).
    #[inline]
    pub fn degree(&self, x: Vertex) -> u32 {
        self.degree[x]
    }

    #[inline]
    pub fn is_boundary(&self, x: Vertex) -> bool {
        self.boundary[x]
    }

    pub fn boundary(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.vertices().filter(|&x| self.boundary[x])
    }

    pub fn depth_limit(&self) -> u32 {
        self.depth_limit
    }

    pub fn min_degree(&self) -> u32 {
        self.d_min
    }

    /// The bound `M` on intended degrees.
    pub fn max_degree(&self) -> u32 {
        self.d_max
    }

    /// Graph distance from `x` to the root.
    pub fn level(&self, x: Vertex) -> Result<u32> {
        self.level.get(x).copied().ok_or(Error::UnknownVertex(x))
    }

    #[inline]
    pub(crate) fn level_unchecked(&self, x: Vertex) -> u32 {
        self.level[x]
    }

    /// Vertices of `S(x)`: `x` and all its descendants in the materialised tree.
    pub fn subtree(&self, x: Vertex) -> Vec<Vertex> {
        let mut out = vec![x];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(self.children(out[i]));
            i += 1;
        }
        out
    }

    /// Serialises as one line per vertex: `id parent intended_degree is_boundary`,
    /// with `-` as the root's parent and `0`/`1` for the boundary flag.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.len() * 12);
        for x in self.vertices() {
            match self.parent[x] {
                Some(p) => write!(s, "{x} {p}"),
                None => write!(s, "{x} -"),
            }
            .unwrap();
            writeln!(s, " {} {}", self.degree[x], u8::from(self.boundary[x])).unwrap();
        }
        s
    }

    /// Inverse of [`to_text`](Self::to_text). Lines starting with `#` and
    /// blank lines are ignored.
    pub fn from_text(text: &str) -> Result<Tree> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(perr("expected 4 fields"));
            }
            let id: Vertex = f[0].parse().map_err(|_| perr("bad id"))?;
            if id != records.len() {
                return Err(perr("ids must be 0, 1, 2, ... in order"));
            }
            let parent = match f[1] {
                "-" => None,
                p => Some(p.parse::<Vertex>().map_err(|_| perr("bad parent"))?),
            };
            let degree: u32 = f[2].parse().map_err(|_| perr("bad degree"))?;
            let boundary = match f[3] {
                "0" => false,
                "1" => true,
                _ => return Err(perr("boundary flag must be 0 or 1")),
            };
            records.push((parent, degree, boundary));
        }
        Tree::from_records(&records)
    }

    /// Builds a tree from `(parent, intended_degree, is_boundary)` per vertex.
    ///
    /// Vertex 0 is the root; every other parent id must be smaller than the
    /// child id. Non-boundary vertices must have their full child list;
    /// boundary vertices must have none.
    pub fn from_records(records: &[(Option<Vertex>, u32, bool)]) -> Result<Tree> {
        let n = records.len();
        if n == 0 {
            return Err(invalid("a tree needs a root"));
        }
        let mut children: Vec<Vec<Vertex>> = vec![Vec::new(); n];
        for (x, &(parent, degree, _)) in records.iter().enumerate() {
            if !(MIN_DEGREE..=MAX_DEGREE).contains(&degree) {
                return Err(invalid(format!("vertex {x} has degree {degree}")));
            }
            match (x, parent) {
                (0, None) => {}
                (0, Some(_)) => return Err(invalid("root must have no parent")),
                (_, None) => return Err(invalid(format!("vertex {x} has no parent"))),
                (_, Some(p)) if p >= x => return Err(invalid(format!("parent {p} of {x} must precede it"))),
                (_, Some(p)) => {
                    if records[p].2 {
                        return Err(invalid(format!("boundary vertex {p} has a child")));
                    }
                    children[p].push(x)
                }
            }
        }
        for (x, &(parent, degree, boundary)) in records.iter().enumerate() {
            let expected = degree as usize - usize::from(parent.is_some());
            if !boundary && children[x].len() != expected {
                return Err(invalid(format!(
                    "vertex {x} has {} children but intended degree {degree}",
                    children[x].len()
                )));
            }
        }
        let mut level = vec![0u32; n];
        for x in 1..n {
            level[x] = level[records[x].0.unwrap()] + 1;
        }
        let parent: Vec<Option<Vertex>> = records.iter().map(|r| r.0).collect();
        let degree: Vec<u32> = records.iter().map(|r| r.1).collect();
        let boundary: Vec<bool> = records.iter().map(|r| r.2).collect();
        Ok(assemble(parent, children, degree, level, boundary))
    }
}

fn assemble(
    parent: Vec<Option<Vertex>>,
    children: Vec<Vec<Vertex>>,
    degree: Vec<u32>,
    level: Vec<u32>,
    boundary: Vec<bool>,
) -> Tree {
    let n = parent.len();
    let mut adj_start = Vec::with_capacity(n + 1);
    let mut adj = Vec::with_capacity(2 * n);
    for x in 0..n {
        adj_start.push(adj.len());
        if let Some(p) = parent[x] {
            adj.push(p);
        }
        adj.extend_from_slice(&children[x]);
    }
    adj_start.push(adj.len());
    Tree {
        depth_limit: level.iter().copied().max().unwrap_or(0),
        d_min: degree.iter().copied().min().unwrap_or(MIN_DEGREE),
        d_max: degree.iter().copied().max().unwrap_or(MIN_DEGREE),
        parent,
        adj_start,
        adj,
        degree,
        level,
        boundary,
    }
}

/// Breadth-first construction to `depth`, drawing each vertex's intended
/// degree from `draw` in id order.
fn grow(depth: u32, mut draw: impl FnMut() -> u32) -> Tree {
    let mut parent = vec![None];
    let mut degree = vec![draw()];
    let mut level = vec![0u32];
    let mut children: Vec<Vec<Vertex>> = vec![Vec::new()];
    let mut x = 0;
    while x < parent.len() {
        if level[x] < depth {
            let n_children = degree[x] - u32::from(parent[x].is_some());
            for _ in 0..n_children {
                let c = parent.len();
                parent.push(Some(x));
                degree.push(draw());
                level.push(level[x] + 1);
                children.push(Vec::new());
                children[x].push(c);
            }
        }
        x += 1;
    }
    let boundary = level.iter().map(|&l| l == depth).collect();
    let mut tree = assemble(parent, children, degree, level, boundary);
    tree.depth_limit = depth;
    tree
}

/// The `d`-regular tree truncated at `depth`.
pub fn build_regular_tree(d: u32, depth: u32) -> Result<Tree> {
    if !(MIN_DEGREE..=MAX_DEGREE).contains(&d) {
        return Err(invalid(format!("degree {d} outside [{MIN_DEGREE}, {MAX_DEGREE}]")));
    }
    Ok(grow(depth, || d))
}

/// Galton-Watson tree with degree distribution `dist`: the root has `j`
/// children and every other vertex `j - 1`, where `j ~ dist`.
pub fn sample_gw_tree(dist: &DegreeDist, depth: u32, seed: u64) -> Tree {
    let mut rng = keyed_stream(seed, 0);
    grow(depth, || dist.sample(rng.random()))
}

/// Degree distribution `{j -> q_j}` supported on `3..=MAX_DEGREE`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<u32, f64>", into = "BTreeMap<u32, f64>")]
pub struct DegreeDist {
    atoms: BTreeMap<u32, f64>,
}

impl TryFrom<BTreeMap<u32, f64>> for DegreeDist {
    type Error = Error;
    fn try_from(atoms: BTreeMap<u32, f64>) -> Result<Self> {
        DegreeDist::new(atoms)
    }
}

impl From<DegreeDist> for BTreeMap<u32, f64> {
    fn from(d: DegreeDist) -> Self {
        d.atoms
    }
}

impl DegreeDist {
    pub fn new(atoms: BTreeMap<u32, f64>) -> Result<Self> {
        let mut total = 0.0;
        for (&j, &q) in &atoms {
            if !(MIN_DEGREE..=MAX_DEGREE).contains(&j) {
                return Err(invalid(format!("degree {j} outside [{MIN_DEGREE}, {MAX_DEGREE}]")));
            }
            if !(q >= 0.0) || !q.is_finite() {
                return Err(invalid(format!("q_{j} = {q} is not a probability")));
            }
            total += q;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("degree probabilities sum to {total}")));
        }
        let atoms = atoms.into_iter().filter(|&(_, q)| q > 0.0).collect();
        Ok(DegreeDist { atoms })
    }

    pub fn from_pairs(pairs: &[(u32, f64)]) -> Result<Self> {
        let mut atoms = BTreeMap::new();
        for &(j, q) in pairs {
            *atoms.entry(j).or_insert(0.0) += q;
        }
        Self::new(atoms)
    }

    pub fn single(d: u32) -> Result<Self> {
        Self::from_pairs(&[(d, 1.0)])
    }

    /// `{3 -> q3, 4 -> 1 - q3}`.
    pub fn three_four(q3: f64) -> Result<Self> {
        Self::from_pairs(&[(3, q3), (4, 1.0 - q3)])
    }

    /// Atoms with positive mass, in increasing degree.
    pub fn atoms(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.atoms.iter().map(|(&j, &q)| (j, q))
    }

    pub fn q(&self, j: u32) -> f64 {
        self.atoms.get(&j).copied().unwrap_or(0.0)
    }

    pub fn min_degree(&self) -> u32 {
        *self.atoms.keys().next().unwrap()
    }

    pub fn max_degree(&self) -> u32 {
        *self.atoms.keys().next_back().unwrap()
    }

    /// Inverse-CDF draw from a uniform in `[0, 1)`.
    pub fn sample(&self, u: f64) -> u32 {
        let mut acc = 0.0;
        for (&j, &q) in &self.atoms {
            acc += q;
            if u < acc {
                return j;
            }
        }
        self.max_degree()
    }
}

/// Recipe for the tree a simulation runs on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TreeSpec {
    Regular { d: u32, depth: u32 },
    GaltonWatson { dist: DegreeDist, depth: u32 },
}

impl TreeSpec {
    pub fn build(&self, seed: u64) -> Result<Tree> {
        match self {
            TreeSpec::Regular { d, depth } => build_regular_tree(*d, *depth),
            TreeSpec::GaltonWatson { dist, depth } => Ok(sample_gw_tree(dist, *depth, seed)),
        }
    }

    /// Whether every replica runs on the same tree.
    pub fn is_deterministic(&self) -> bool {
        matches!(self, TreeSpec::Regular { .. })
    }

    pub fn min_degree(&self) -> u32 {
        match self {
            TreeSpec::Regular { d, .. } => *d,
            TreeSpec::GaltonWatson { dist, .. } => dist.min_degree(),
        }
    }
}

/// A set of vertex ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexSet(BTreeSet<Vertex>);

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: Vertex) -> bool {
        self.0.insert(x)
    }

    pub fn contains(&self, x: Vertex) -> bool {
        self.0.contains(&x)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn intersects(&self, other: &VertexSet) -> bool {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.iter().any(|x| large.contains(x))
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.union(&other.0).copied().collect())
    }

    /// Errors with the first member that is not a vertex of `tree`.
    pub fn check_in(&self, tree: &Tree) -> Result<()> {
        match self.0.iter().find(|&&x| !tree.contains(x)) {
            Some(&x) => Err(Error::UnknownVertex(x)),
            None => Ok(()),
        }
    }

    pub(crate) fn from_mask(mask: &[bool]) -> VertexSet {
        VertexSet(mask.iter().enumerate().filter(|(_, &b)| b).map(|(x, _)| x).collect())
    }

    pub(crate) fn to_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for x in self.iter() {
            mask[x] = true;
        }
        mask
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        VertexSet(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[Vertex; N]> for VertexSet {
    fn from(xs: [Vertex; N]) -> Self {
        xs.into_iter().collect()
    }
}

/// Frontier `F(A)` and exterior boundary `H(A)` of a finite set `A`.
///
/// `x` is in `F(A)` when `x` is in `A` and some child `x'` has a subtree
/// `S(x')` disjoint from `A`; `H(A)` collects every such `x'`. Members of
/// `A` must not lie on the boundary, since their subtrees would be
/// incomplete.
pub fn frontier_sets(tree: &Tree, a: &VertexSet) -> Result<(VertexSet, VertexSet)> {
    if a.is_empty() {
        return Err(invalid("frontier of the empty set"));
    }
    a.check_in(tree)?;
    if let Some(x) = a.iter().find(|&x| tree.is_boundary(x)) {
        return Err(Error::TruncationUnsound(format!("vertex {x} of A is on the boundary")));
    }
    // Ids are breadth-first, so a reverse sweep sees children before parents.
    let mut hit = a.to_mask(tree.len());
    for x in (1..tree.len()).rev() {
        if hit[x] {
            hit[tree.parent(x).unwrap()] = true;
        }
    }
    let mut frontier = VertexSet::new();
    let mut exterior = VertexSet::new();
    for x in a.iter() {
        for &c in tree.children(x) {
            if !hit[c] {
                frontier.insert(x);
                exterior.insert(c);
            }
        }
    }
    Ok((frontier, exterior))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn regular_tree_counts() {
        assert_eq!(build_regular_tree(3, 0).unwrap().len(), 1);
        assert!(build_regular_tree(3, 0).unwrap().is_boundary(0));
        assert_eq!(build_regular_tree(3, 2).unwrap().len(), 10);
        assert_eq!(build_regular_tree(4, 3).unwrap().len(), 53);
        assert!(build_regular_tree(2, 3).is_err());
        assert!(build_regular_tree(MAX_DEGREE + 1, 1).is_err());
    }

    #[test]
    fn regular_tree_shape() {
        let t = build_regular_tree(3, 3).unwrap();
        assert_eq!(t.children(0).len(), 3);
        for x in t.vertices() {
            assert_eq!(t.degree(x), 3);
            if x != 0 && !t.is_boundary(x) {
                assert_eq!(t.children(x).len(), 2);
            }
            assert_eq!(t.is_boundary(x), t.level(x).unwrap() == 3);
        }
        assert_eq!(t.level(0).unwrap(), 0);
        assert_eq!(t.level(1).unwrap(), 1);
        assert_eq!(t.level(t.len() - 1).unwrap(), 3);
        assert_eq!(t.level(t.len()), Err(Error::UnknownVertex(t.len())));
    }

    #[test]
    fn gw_single_atom_is_regular() {
        let d3 = DegreeDist::single(3).unwrap();
        assert_eq!(sample_gw_tree(&d3, 2, 7), build_regular_tree(3, 2).unwrap());
        let d4 = DegreeDist::single(4).unwrap();
        assert_eq!(sample_gw_tree(&d4, 2, 7).len(), 17);
        assert_eq!(sample_gw_tree(&d4, 3, 1), build_regular_tree(4, 3).unwrap());
    }

    #[test]
    fn gw_root_degree_frequency() {
        let dist = DegreeDist::three_four(0.5).unwrap();
        let n = 10_000;
        let threes = (0..n).filter(|&s| sample_gw_tree(&dist, 1, s).children(0).len() == 3).count();
        let sigma = (0.25 / n as f64).sqrt();
        assert!(((threes as f64 / n as f64) - 0.5).abs() < 3.0 * sigma, "{threes}");
    }

    #[test]
    fn gw_is_deterministic_and_respects_degrees() {
        let dist = DegreeDist::from_pairs(&[(3, 0.3), (4, 0.3), (5, 0.4)]).unwrap();
        let a = sample_gw_tree(&dist, 4, 11);
        assert_eq!(a, sample_gw_tree(&dist, 4, 11));
        for x in a.vertices() {
            assert!((3..=5).contains(&a.degree(x)));
            if !a.is_boundary(x) {
                let expected = a.degree(x) as usize - usize::from(x != 0);
                assert_eq!(a.children(x).len(), expected);
            }
        }
    }

    #[test]
    fn degree_dist_validation() {
        assert!(DegreeDist::from_pairs(&[(2, 1.0)]).is_err());
        assert!(DegreeDist::from_pairs(&[(3, 0.5)]).is_err());
        assert!(DegreeDist::from_pairs(&[(3, 1.5), (4, -0.5)]).is_err());
        let d: DegreeDist = serde_json::from_str(r#"{"3":0.8,"4":0.2}"#).unwrap();
        assert_eq!(d.q(3), 0.8);
        assert_eq!(d.max_degree(), 4);
    }

    #[test]
    fn frontier_of_root() {
        let t = build_regular_tree(3, 2).unwrap();
        let (f, h) = frontier_sets(&t, &VertexSet::from([0])).unwrap();
        assert_eq!(f, VertexSet::from([0]));
        assert_eq!(h, VertexSet::from([1, 2, 3]));
    }

    #[test]
    fn frontier_root_and_child() {
        let t = build_regular_tree(3, 3).unwrap();
        let c = 1;
        let (f, h) = frontier_sets(&t, &VertexSet::from([0, c])).unwrap();
        assert_eq!(f, VertexSet::from([0, c]));
        let mut expected: Vec<Vertex> = vec![2, 3];
        expected.extend_from_slice(t.children(c));
        assert_eq!(h, expected.into_iter().collect());
    }

    #[test]
    fn frontier_rejects_boundary_and_empty() {
        let t = build_regular_tree(3, 2).unwrap();
        let leaf = t.len() - 1;
        assert!(matches!(frontier_sets(&t, &VertexSet::from([leaf])), Err(Error::TruncationUnsound(_))));
        assert!(frontier_sets(&t, &VertexSet::new()).is_err());
    }

    /// The hand-drawn example with root `x0` (degree 4) whose child `x1`
    /// carries the set `A`.
    #[test]
    fn frontier_hand_example() {
        // ids: 0 x0 | 1 x1, 2 x2, 3 x3, 4 x4 | 5 a, 6 b, 7 y0 |
        // 8,9,10 children of a (10 = e) | 11, 12 children of b (12 = c) |
        // 13..=16 children of y0 | 17, 18 children of e | 19..=21 children of c
        let recs = vec![
            (None, 4, false),
            (Some(0), 4, false),
            (Some(0), 3, true),
            (Some(0), 3, true),
            (Some(0), 3, true),
            (Some(1), 4, false),
            (Some(1), 3, false),
            (Some(1), 5, false),
            (Some(5), 3, true),
            (Some(5), 3, true),
            (Some(5), 3, false),
            (Some(6), 3, true),
            (Some(6), 4, false),
            (Some(7), 3, true),
            (Some(7), 3, true),
            (Some(7), 3, true),
            (Some(7), 3, true),
            (Some(10), 3, true),
            (Some(10), 3, true),
            (Some(12), 3, true),
            (Some(12), 3, true),
            (Some(12), 3, true),
        ];
        let t = Tree::from_records(&recs).unwrap();
        let a = VertexSet::from([1, 5, 7, 10, 12]);
        let (f, h) = frontier_sets(&t, &a).unwrap();
        assert_eq!(f, VertexSet::from([5, 7, 10, 12]));
        assert_eq!(h, VertexSet::from([8, 9, 13, 14, 15, 16, 17, 18, 19, 20, 21]));
        assert!(h.len() >= a.len());
        assert!(h.len() <= (t.max_degree() as usize - 1) * f.len());
    }

    #[test]
    fn text_rejects_malformed() {
        assert!(Tree::from_text("0 - 3\n").is_err());
        assert!(Tree::from_text("0 - 3 1\n2 0 3 1\n").is_err());
        assert!(Tree::from_text("0 - 3 0\n").is_err());
        assert!(Tree::from_text("0 - 3 1\n1 0 3 1\n").is_err());
        assert!(Tree::from_text("").is_err());
    }

    fn brute_force_frontier(t: &Tree, a: &VertexSet) -> (VertexSet, VertexSet) {
        let mut f = VertexSet::new();
        let mut h = VertexSet::new();
        for x in a.iter() {
            for &c in t.children(x) {
                if t.subtree(c).iter().all(|&y| !a.contains(y)) {
                    f.insert(x);
                    h.insert(c);
                }
            }
        }
        (f, h)
    }

    fn arb_tree() -> impl Strategy<Value = Tree> {
        prop_oneof![
            (3u32..=5, 0u32..=4).prop_map(|(d, depth)| build_regular_tree(d, depth).unwrap()),
            (0.0f64..=1.0, 0u32..=4, any::<u64>()).prop_map(|(q, depth, seed)| {
                let dist = DegreeDist::from_pairs(&[(3, q), (5, 1.0 - q)]).unwrap();
                sample_gw_tree(&dist, depth, seed)
            }),
        ]
    }

    proptest! {
        #[test]
        fn text_round_trip(t in arb_tree()) {
            let back = Tree::from_text(&t.to_text()).unwrap();
            prop_assert_eq!(back, t);
        }

        #[test]
        fn frontier_matches_brute_force(t in arb_tree(), bits in any::<u64>()) {
            let interior: Vec<Vertex> = t.vertices().filter(|&x| !t.is_boundary(x)).collect();
            prop_assume!(!interior.is_empty());
            let a: VertexSet = interior.iter().enumerate()
                .filter(|(i, _)| bits >> (i % 64) & 1 == 1)
                .map(|(_, &x)| x)
                .collect();
            prop_assume!(!a.is_empty());
            let fast = frontier_sets(&t, &a).unwrap();
            prop_assert_eq!(fast, brute_force_frontier(&t, &a));
        }
    }
}
