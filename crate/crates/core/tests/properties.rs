use proptest::prelude::*;
use zealot_core::graphical::{forward_state, sample_event_log};
use zealot_core::harness::{run, ExperimentConfig, Kind};
use zealot_core::thresholds::{local_dieout_bound, local_interval, local_survival_bound, m_prime0, m_theta, nu0};
use zealot_core::tree::{build_regular_tree, frontier_sets, sample_gw_tree};
use zealot_core::zealot::survival_probability;
use zealot_core::{DegreeDist, ModelParams, TreeSpec, VertexSet};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let spec = TreeSpec::GaltonWatson { dist: DegreeDist::three_four(0.4).unwrap(), depth: 6 };
    let p = ModelParams::new(vec![0.3, 0.2, 0.5]).unwrap();
    let est = |n| in_pool(n, || survival_probability(&spec, &p, &VertexSet::from([0]), 3.0, 64, 17).unwrap());
    assert_eq!(est(1), est(4));

    let mut config = ExperimentConfig::new(Kind::Cobra, 3);
    config.tree = Some(TreeSpec::Regular { d: 3, depth: 6 });
    config.params = Some(p);
    config.horizon = Some(2.0);
    config.replicas = Some(40);
    let csv = |n| in_pool(n, || run(&config).unwrap().csv);
    assert_eq!(csv(1), csv(3));
}

// The upper bound |H(A)| <= (M-1)|F(A)| needs every frontier site to have
// at most M-1 children. The root has d(root) children, so it fails there.
#[test]
fn frontier_upper_bound_fails_only_at_a_lone_root() {
    let tree = build_regular_tree(3, 3).unwrap();
    let (f, h) = frontier_sets(&tree, &VertexSet::from([0])).unwrap();
    assert_eq!((f.len(), h.len()), (1, 3));
    assert!(h.len() > 2 * f.len());
    let (f, h) = frontier_sets(&tree, &VertexSet::from([0, 1])).unwrap();
    assert!(h.len() <= 2 * f.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frontier_bounds_away_from_lone_root(q3 in 0.0f64..=1.0, seed in any::<u64>(), bits in any::<u64>()) {
        let tree = sample_gw_tree(&DegreeDist::three_four(q3).unwrap(), 3, seed);
        let interior: Vec<usize> = tree.vertices().filter(|&x| !tree.is_boundary(x)).collect();
        let a: VertexSet = interior.iter().enumerate().filter(|(i, _)| bits >> (i % 64) & 1 == 1).map(|(_, &x)| x).collect();
        prop_assume!(!a.is_empty());
        let (f, h) = frontier_sets(&tree, &a).unwrap();
        prop_assert!(h.len() >= a.len());
        prop_assert!(f.is_subset(&a));
        if a != VertexSet::from([0]) {
            prop_assert!(h.len() <= (tree.max_degree() as usize - 1) * f.len());
        }
    }

    #[test]
    fn forward_state_is_monotone_and_absorbing(seed in any::<u64>(), t in 0.0f64..2.0, bits in any::<u32>()) {
        let tree = build_regular_tree(3, 3).unwrap();
        let p = ModelParams::new(vec![0.2, 0.3, 0.5]).unwrap();
        let log = sample_event_log(&tree, &p, 2.0, seed).unwrap();
        let big: VertexSet = tree.vertices().filter(|x| bits >> (x % 32) & 1 == 1).collect();
        let small: VertexSet = big.iter().step_by(2).collect();
        let (s, b) = (forward_state(&log, &small, t).unwrap(), forward_state(&log, &big, t).unwrap());
        prop_assert!(s.is_subset(&b));
        prop_assert!(forward_state(&log, &VertexSet::new(), t).unwrap().is_empty());
    }

    #[test]
    fn local_bounds_are_ordered(d in 3u32..500, p0 in 0.0f64..1.0) {
        let (lo, hi) = local_interval(d).unwrap();
        prop_assert_eq!(lo, local_dieout_bound(d, 0.0).unwrap());
        prop_assert!(lo < hi && hi == local_survival_bound(d).unwrap() && hi < d as f64 / 2.0);
        prop_assert!(local_dieout_bound(d, p0).unwrap() <= lo);
    }

    #[test]
    fn nu0_minimizer_contract(q3 in 0.0f64..=1.0, mu in 0.3f64..2.95) {
        let dist = DegreeDist::three_four(q3).unwrap();
        let r = nu0(&dist, mu).unwrap();
        prop_assert!(r.nu0 <= r.m0 + 1e-12);
        if m_prime0(&dist, mu).unwrap() >= 0.0 {
            prop_assert_eq!(r.minimizer, 0.0);
            prop_assert_eq!(r.nu0, m_theta(&dist, mu, 0.0).unwrap());
        }
    }
}
