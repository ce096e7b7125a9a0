use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use zealot_core::cobra::{simulate_brw, simulate_cobra};
use zealot_core::graphical::{check_duality, sample_event_log};
use zealot_core::thresholds::{loop_count_exact, nu0, p_crit};
use zealot_core::tree::{build_regular_tree, sample_gw_tree};
use zealot_core::zealot::simulate_forward;
use zealot_core::{DegreeDist, ModelParams, VertexSet};

fn trees(c: &mut Criterion) {
    let mut g = c.benchmark_group("tree");
    g.bench_function("regular d=3 depth=14", |b| b.iter(|| build_regular_tree(3, black_box(14)).unwrap()));
    let dist = DegreeDist::three_four(0.5).unwrap();
    g.bench_function("gw {3,4} depth=10", |b| b.iter(|| sample_gw_tree(&dist, 10, black_box(7))));
    g.finish();
}

fn dynamics(c: &mut Criterion) {
    let tree = build_regular_tree(3, 14).unwrap();
    let root = VertexSet::from([0]);
    let mut g = c.benchmark_group("dynamics");
    g.sample_size(20);
    for (name, p) in [("p2=1", vec![0.0, 0.0, 1.0]), ("p3=1", vec![0.0, 0.0, 0.0, 1.0])] {
        let p = ModelParams::new(p).unwrap();
        g.bench_with_input(BenchmarkId::new("forward t=10", name), &p, |b, p| {
            b.iter(|| simulate_forward(&tree, p, &root, 10.0, black_box(1)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("cobra t=10", name), &p, |b, p| {
            b.iter(|| simulate_cobra(&tree, p, &root, 10.0, black_box(1)).unwrap())
        });
    }
    let p = ModelParams::new(vec![0.2, 0.3, 0.5]).unwrap();
    g.bench_function("brw t=2", |b| b.iter(|| simulate_brw(&tree, &p, &root, 2.0, black_box(1)).unwrap()));
    g.finish();
}

fn graphical(c: &mut Criterion) {
    let tree = build_regular_tree(3, 5).unwrap();
    let p = ModelParams::new(vec![0.15, 0.35, 0.3, 0.2]).unwrap();
    let a: VertexSet = tree.vertices().step_by(3).filter(|&x| !tree.is_boundary(x)).collect();
    let b = VertexSet::from([0, 2]);
    let mut g = c.benchmark_group("graphical");
    g.bench_function("sample log depth=5 t=1.5", |bch| {
        bch.iter(|| sample_event_log(&tree, &p, 1.5, black_box(3)).unwrap())
    });
    let log = sample_event_log(&tree, &p, 1.5, 3).unwrap();
    g.bench_function("check duality", |bch| bch.iter(|| check_duality(&log, &a, &b, black_box(0.5))));
    g.finish();
}

fn analytic(c: &mut Criterion) {
    let mut g = c.benchmark_group("thresholds");
    let dist = DegreeDist::three_four(0.9).unwrap();
    g.bench_function("nu0", |b| b.iter(|| nu0(&dist, black_box(1.8)).unwrap()));
    g.bench_function("p_crit", |b| b.iter(|| p_crit(black_box(1.7)).unwrap()));
    g.bench_function("loop count d=3 n=200", |b| b.iter(|| loop_count_exact(3, black_box(200)).unwrap()));
    g.finish();
}

criterion_group!(benches, trees, dynamics, graphical, analytic);
criterion_main!(benches);
