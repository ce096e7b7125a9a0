//! Acceptance suite: one line per criterion, run at the pinned tolerances.
//!
//! Run with `cargo test -p zealot-core --test acceptance`. Numeric arguments
//! select criteria (`-- 4 7`). Criteria listed in `KNOWN_RED` are expected
//! to fail as stated; they are still run and reported, but do not fail the
//! target. Any other failure exits non-zero.

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use zealot_core::cobra::{
    brw_mean_occupancy_root, brw_root_occupancy, cobra_survival_probability, local_survival_frequency,
    tagged_particle_walk,
};
use zealot_core::graphical::{forward_state, sample_event_log};
use zealot_core::harness::{run, ExperimentConfig, Kind, ResultValue};
use zealot_core::rng::{keyed_stream, replicate_seeds};
use zealot_core::thresholds::{
    estimate_pair_hit, loop_count_exact, m_prime0, nu0, nu0_crossing, p_crit, reference_table_comparison,
    REFERENCE_CROSSINGS, REFERENCE_PC_READINGS,
};
use zealot_core::tree::{build_regular_tree, frontier_sets, sample_gw_tree};
use zealot_core::zealot::{drive_from_log, survival_probability};
use zealot_core::{DegreeDist, ModelParams, Tree, TreeSpec, VertexSet};

/// Criteria that cannot hold as stated (analysis in the project notes).
const KNOWN_RED: [u32; 3] = [3, 7, 9];

type Check = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn params(pairs: &[(usize, f64)]) -> ModelParams {
    ModelParams::from_pairs(pairs).unwrap()
}

fn mixed_specs(depth: u32) -> [TreeSpec; 3] {
    [
        TreeSpec::Regular { d: 3, depth },
        TreeSpec::Regular { d: 4, depth },
        TreeSpec::GaltonWatson { dist: DegreeDist::three_four(0.5).unwrap(), depth },
    ]
}

fn duality_runs() -> (u64, u64, u64) {
    // 1000 instances split over the three tree families.
    let p = params(&[(0, 0.15), (1, 0.35), (2, 0.3), (3, 0.2)]);
    let (mut dual, mut add, mut total) = (0, 0, 0);
    for (i, (spec, n)) in mixed_specs(5).into_iter().zip([334u64, 333, 333]).enumerate() {
        let config = ExperimentConfig {
            tree: Some(spec),
            params: Some(p.clone()),
            horizon: Some(1.5),
            replicas: Some(n),
            ..ExperimentConfig::new(Kind::DualityCheck, 1000 + i as u64)
        };
        let out = run(&config).unwrap();
        let count = |m: &str| match out.record(m).unwrap().value {
            ResultValue::Count { passed, .. } => passed,
            _ => unreachable!(),
        };
        dual += count("duality_pass");
        add += count("additivity_pass");
        total += n;
    }
    (dual, add, total)
}

fn c1_duality() -> Outcome {
    let start = Instant::now();
    let (dual, _, total) = duality_runs();
    let secs = start.elapsed().as_secs_f64();
    outcome(dual == total && secs < 60.0, format!("{dual}/{total} in {secs:.1}s"))
}

fn c2_additivity() -> Outcome {
    let (_, add, total) = duality_runs();
    outcome(add == total, format!("{add}/{total}"))
}

fn parent_chain_contains(tree: &Tree, y: usize, c: usize) -> bool {
    let mut v = Some(y);
    while let Some(x) = v {
        if x == c {
            return true;
        }
        v = tree.parent(x);
    }
    false
}

/// Frontier and exterior boundary straight from the definitions.
fn brute_frontier(tree: &Tree, a: &VertexSet) -> (VertexSet, VertexSet) {
    let (mut f, mut h) = (VertexSet::new(), VertexSet::new());
    for x in a.iter() {
        for &c in tree.children(x) {
            if !a.iter().any(|y| parent_chain_contains(tree, y, c)) {
                f.insert(x);
                h.insert(c);
            }
        }
    }
    (f, h)
}

fn c3_frontier() -> Outcome {
    let (mut lower, mut upper, mut root_only) = (0, 0, 0);
    for i in 0..10_000u64 {
        let seed = replicate_seeds(3, i);
        let tree = match i % 3 {
            0 => build_regular_tree(3, 3 + (i % 2) as u32).unwrap(),
            1 => build_regular_tree(4, 3).unwrap(),
            _ => sample_gw_tree(&DegreeDist::three_four(0.5).unwrap(), 4, seed),
        };
        let mut rng = keyed_stream(seed, 9);
        let interior: Vec<usize> = tree.vertices().filter(|&x| !tree.is_boundary(x)).collect();
        let mut a: VertexSet = interior.iter().copied().filter(|_| rand::Rng::random::<f64>(&mut rng) < 0.3).collect();
        if a.is_empty() {
            a.insert(interior[rand::Rng::random_range(&mut rng, 0..interior.len())]);
        }
        let (f, h) = frontier_sets(&tree, &a).unwrap();
        let m = tree.max_degree() as usize;
        lower += usize::from(h.len() < a.len());
        if h.len() > (m - 1) * f.len() {
            upper += 1;
            root_only += usize::from(a == VertexSet::from([tree.root()]));
        }
    }
    // Exhaustive comparison on every tree shape with at most 12 vertices.
    let mut small: Vec<Tree> = vec![build_regular_tree(3, 1).unwrap(), build_regular_tree(3, 2).unwrap()];
    small.push(build_regular_tree(4, 1).unwrap());
    for s in 0..200 {
        let t = sample_gw_tree(&DegreeDist::three_four(0.5).unwrap(), 2, s);
        if t.len() <= 12 && !small.iter().any(|u| u.to_text() == t.to_text()) {
            small.push(t);
        }
    }
    let mut mismatches = 0;
    let mut subsets = 0;
    for tree in &small {
        let interior: Vec<usize> = tree.vertices().filter(|&x| !tree.is_boundary(x)).collect();
        for mask in 1u32..(1 << interior.len()) {
            let a: VertexSet = (0..interior.len()).filter(|i| mask >> i & 1 == 1).map(|i| interior[i]).collect();
            subsets += 1;
            if frontier_sets(tree, &a).unwrap() != brute_frontier(tree, &a) {
                mismatches += 1;
            }
        }
    }
    outcome(
        lower == 0 && upper == 0 && mismatches == 0,
        format!(
            "|H|>=|A| violated {lower}/10000; |H|<=(M-1)|F| violated {upper}/10000 ({root_only} with A = {{root}}); brute-force mismatches {mismatches}/{subsets} over {} trees",
            small.len()
        ),
    )
}

fn c4_pair_hit() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for d in [3u32, 4] {
        for x in 1..=3u32 {
            let e = estimate_pair_hit(d, x, 200.0, 100_000, 40 + (d * 10 + x) as u64).unwrap();
            let want = ((d - 1) as f64).powi(-(x as i32));
            let z = (e.point - want) / e.sigma();
            ok &= z.abs() <= 3.0;
            lines.push(format!("d={d},x={x}: {:.4} vs {want:.4} (z={z:+.2})", e.point));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(ok && secs < 120.0, format!("{}; {secs:.1}s", lines.join("; ")))
}

fn c5_brw_mean() -> Outcome {
    let tree = build_regular_tree(3, 12).unwrap();
    let mut ok = true;
    let mut lines = Vec::new();
    for (i, p) in [params(&[(1, 0.5), (2, 0.5)]), params(&[(0, 0.2), (1, 0.3), (2, 0.5)])].iter().enumerate() {
        for t in [0.5, 1.0] {
            let exact = brw_mean_occupancy_root(3, p, t, 200).unwrap().value;
            let e = brw_root_occupancy(&tree, p, t, 10_000, 50 + i as u64).unwrap();
            let z = (e.point - exact) / e.sigma();
            ok &= z.abs() <= 3.0;
            lines.push(format!("p0={},t={t}: {:.4} vs {exact:.4} (z={z:+.2})", p.p0(), e.point));
        }
    }
    outcome(ok, lines.join("; "))
}

fn c6_nu0_table() -> Outcome {
    let cases = [
        (0.8, 1.6, 2.2, 0.0),
        (0.8, 1.7, 2.014150, 1e-4),
        (0.995, 1.6, 1.037752, 1e-4),
        (0.996, 1.6, 0.982683, 1e-4),
        (0.81, 1.9, 1.030930, 1e-4),
        // Minimisation oracle values (independent scipy minimisation).
        (0.9, 1.8, 1.02444167, 1e-4),
        (0.82, 1.9, 0.98674996, 1e-4),
    ];
    let mut ok = true;
    let mut lines = Vec::new();
    for (q3, mu, want, tol) in cases {
        let got = nu0(&DegreeDist::three_four(q3).unwrap(), mu).unwrap().nu0;
        let pass = if tol == 0.0 { got == want } else { (got - want).abs() <= tol };
        ok &= pass;
        lines.push(format!("({q3},{mu})={got:.6}"));
    }
    let flagged: Vec<String> = reference_table_comparison()
        .unwrap()
        .into_iter()
        .filter(|c| c.discrepancy)
        .map(|c| format!("({},{})", c.q3, c.mu))
        .collect();
    let expected_flags = flagged.contains(&"(0.9,1.8)".to_string()) && flagged.contains(&"(0.82,1.9)".to_string());
    ok &= expected_flags;
    outcome(ok, format!("{}; discrepancy report: {} cells [{}]", lines.join(" "), flagged.len(), flagged.join(" ")))
}

fn c7_crossings() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for (mu, want) in [1.6, 1.7, 1.8, 1.9].into_iter().zip(REFERENCE_CROSSINGS) {
        let got = nu0_crossing(mu, 0.001).unwrap().unwrap();
        let pass = (got - want).abs() <= 0.005 + 1e-12;
        ok &= pass;
        lines.push(format!("mu={mu}: {got:.3} vs {want}{}", if pass { "" } else { " (outside 0.005)" }));
    }
    outcome(ok, lines.join("; "))
}

fn c8_p_crit() -> Outcome {
    // Formula values evaluated independently.
    let formula = [0.8199728, 0.6282812, 0.4260698, 0.2154900];
    let mut ok = true;
    let mut lines = Vec::new();
    for (i, mu) in [1.6, 1.7, 1.8, 1.9].into_iter().enumerate() {
        let pc = p_crit(mu).unwrap();
        let dm = m_prime0(&DegreeDist::three_four(pc).unwrap(), mu).unwrap();
        ok &= (pc - formula[i]).abs() <= 1e-3 && (pc - REFERENCE_PC_READINGS[i]).abs() <= 0.05 && dm.abs() <= 1e-10;
        lines.push(format!("mu={mu}: {pc:.4} (reading {}, m'(0)={dm:.1e})", REFERENCE_PC_READINGS[i]));
    }
    outcome(ok, lines.join("; "))
}

fn c9_loops() -> Outcome {
    let small = loop_count_exact(3, 1).unwrap() == 3u32.into() && loop_count_exact(3, 2).unwrap() == 15u32.into();
    let c: f64 = loop_count_exact(3, 12).unwrap().to_string().parse().unwrap();
    let root = c.powf(1.0 / 24.0);
    let rate = 2.0 * 2f64.sqrt();
    let rel = (root - rate).abs() / rate;
    outcome(
        small && rel <= 0.05,
        format!("M(3,1),M(3,2) exact: {small}; M(3,12)^(1/24) = {root:.4} vs {rate:.4} ({:.1}% off)", rel * 100.0),
    )
}

fn c10_tagged() -> Outcome {
    let sets = [params(&[(1, 0.5), (2, 0.5)]), params(&[(1, 0.2), (2, 0.3), (3, 0.5)]), params(&[(1, 1.0)])];
    let mut ok = true;
    let mut lines = Vec::new();
    for (d, depth) in [(3u32, 12u32), (4, 9)] {
        let tree = build_regular_tree(d, depth).unwrap();
        for (i, p) in sets.iter().enumerate() {
            let seed = 100 + (d as u64) * 10 + i as u64;
            let mut steps = 100_000;
            let w = loop {
                let w = tagged_particle_walk(&tree, p, steps, seed).unwrap();
                if w.events >= 100_000 {
                    break w;
                }
                steps *= 2;
            };
            let q = p.mu() / d as f64;
            let sigma = (q * (1.0 - q) / w.events as f64).sqrt();
            let z = (w.toward_root_frequency() - q) / sigma;
            ok &= z.abs() <= 3.0;
            lines.push(format!("d={d},mu={}: z={z:+.2}", p.mu()));
        }
    }
    outcome(ok, lines.join("; "))
}

fn c11_regimes() -> Outcome {
    let start = Instant::now();
    let spec = TreeSpec::Regular { d: 3, depth: 14 };
    let n = 1000;
    // (a) local die-out regime.
    let weak = params(&[(1, 0.98), (2, 0.02)]);
    let a: Vec<f64> =
        [10.0, 20.0, 40.0].iter().map(|&h| local_survival_frequency(&spec, &weak, h, n, 11).unwrap().point).collect();
    let a_ok = a[0] > a[1] && a[1] > a[2] && a[2] < 0.05;
    // (b) local survival regime.
    let b = local_survival_frequency(&spec, &params(&[(3, 1.0)]), 40.0, n, 12).unwrap().point;
    // (c) extinction regime: margin 3 * 0.75 * 0.1 - 0.5 < 0.
    let c =
        cobra_survival_probability(&spec, &params(&[(0, 0.5), (1, 0.4), (2, 0.1)]), &VertexSet::from([0]), 40.0, n, 13)
            .unwrap()
            .point;
    // (d) survival regime, forward process from a single zealot.
    let d = survival_probability(&spec, &params(&[(2, 1.0)]), &VertexSet::from([0]), 20.0, n, 14).unwrap().point;
    let secs = start.elapsed().as_secs_f64();
    let ok = a_ok && b > 0.5 && c < 0.05 && d > 0.05 && secs < 600.0;
    outcome(ok, format!("(a) {:.3} > {:.3} > {:.3}; (b) {b:.3}; (c) {c:.3}; (d) {d:.3}; {secs:.0}s", a[0], a[1], a[2]))
}

fn c12_bridge() -> Outcome {
    let p = params(&[(0, 0.2), (1, 0.3), (2, 0.3), (3, 0.2)]);
    let mut identical = 0;
    let mut events = 0usize;
    for i in 0..100u64 {
        let seed = replicate_seeds(12, i);
        let tree = match i % 3 {
            0 => build_regular_tree(3, 3).unwrap(),
            1 => build_regular_tree(4, 2).unwrap(),
            _ => sample_gw_tree(&DegreeDist::three_four(0.5).unwrap(), 2, seed),
        };
        assert!(tree.len() <= 40);
        let log = sample_event_log(&tree, &p, 2.0, seed).unwrap();
        let mut rng = keyed_stream(seed, 8);
        let init: VertexSet = tree.vertices().filter(|_| rand::Rng::random::<f64>(&mut rng) < 0.4).collect();
        let mut same = true;
        drive_from_log(&log, &init, 2.0, |t, s| {
            events += 1;
            same &= s.occupied() == forward_state(&log, &init, t).unwrap();
        })
        .unwrap();
        identical += u64::from(same);
    }
    outcome(identical == 100, format!("{identical}/100 identical over {events} event times"))
}

fn main() {
    let criteria: [Check; 12] = [
        (1, "pathwise duality", c1_duality),
        (2, "pathwise additivity", c2_additivity),
        (3, "frontier bounds", c3_frontier),
        (4, "pair hitting probability", c4_pair_hit),
        (5, "BRW mean occupancy", c5_brw_mean),
        (6, "nu(0) table spot checks", c6_nu0_table),
        (7, "nu(0) = 1 crossings", c7_crossings),
        (8, "p_c values", c8_p_crit),
        (9, "loop-count growth", c9_loops),
        (10, "tagged particle law", c10_tagged),
        (11, "regime consistency", c11_regimes),
        (12, "exactness bridge", c12_bridge),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = Vec::new();
    for (id, name, check) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| outcome(false, format!("panicked: {:?}", e.downcast_ref::<String>())));
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_RED.contains(&id);
        let verdict = match (result.pass, known) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as known red)",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected.push(id);
                "FAIL"
            }
        };
        println!("criterion {id:>2} {name:<26} {verdict:<12} [{secs:.1}s] {}", result.detail);
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
