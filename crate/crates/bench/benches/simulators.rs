use criterion::{criterion_group, criterion_main, Criterion};
use modqc_core::cluster::{mc_stabilizer_expectation, ErrorBudget};
use modqc_core::hypercell::{mc_tree_build, HypercellBudget, TreeConfig};
use modqc_core::netsim::{run_link_sim, run_toffoli_pipeline, EluState};
use modqc_core::{ArchLayout, DeviceParams, LinkKind, LinkModel};

fn simulators(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulators");
    g.sample_size(10);
    let budget = ErrorBudget::new(3e-4, 3e-4).unwrap();
    g.bench_function("mc_cluster_1e5", |b| b.iter(|| mc_stabilizer_expectation(&budget, 100_000, 1)));
    let params = DeviceParams::default();
    let link = LinkModel::new(LinkKind::TypeI, &params).unwrap();
    let elu = EluState::new(100, 2, 10).unwrap();
    g.bench_function("link_sim_1e4_pairs", |b| b.iter(|| run_link_sim(&link, &elu, &elu, 10_000, 1)));
    let layout = ArchLayout::musiqc();
    g.bench_function("toffoli_pipeline_16", |b| b.iter(|| run_toffoli_pipeline(16, &layout, &link, 1)));
    let tree = TreeConfig::new(3, 4).unwrap();
    let hb = HypercellBudget::new(3.0 / 32.0, 1.0, 300.0, 1e-3).unwrap();
    g.bench_function("tree_build_1e5", |b| b.iter(|| mc_tree_build(&tree, &hb, 100_000, 1)));
    g.finish();
}

criterion_group!(benches, simulators);
criterion_main!(benches);
