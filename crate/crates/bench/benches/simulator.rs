use std::hint::black_box;
use std::sync::Arc;

use chanborrow_core::metrics::{outage_closed_form, outage_monte_carlo, OutageThreshold};
use chanborrow_core::propagation::{path_loss_db, PropagationParams};
use chanborrow_core::traffic::{generate_events, replay, BorrowPolicy, TrafficProfile};
use chanborrow_core::{
    build_topology, run_scenario, ChannelPool, ScenarioConfig, Strategy, REFERENCE_CELL,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn propagation(c: &mut Criterion) {
    let p = PropagationParams {
        fc_mhz: 1800.0,
        bs_height_m: 100.0,
        mobile_height_m: 5.0,
    };
    c.bench_function("path_loss_db", |b| {
        b.iter(|| path_loss_db(&p, black_box(0.73)).unwrap())
    });
}

fn outage(c: &mut Criterion) {
    let g = OutageThreshold::from_db(9.0).unwrap();
    let interferers = [3e-10, 1e-10, 4e-11, 2e-11, 2e-11, 1e-11];
    c.bench_function("outage_closed_form", |b| {
        b.iter(|| outage_closed_form(&g, black_box(2.8e-9), &interferers).unwrap())
    });
    c.bench_function("outage_monte_carlo_1e5", |b| {
        b.iter(|| outage_monte_carlo(&g, 2.8e-9, &interferers, 100_000, black_box(7)).unwrap())
    });
}

fn traffic_replay(c: &mut Criterion) {
    let cfg = ScenarioConfig::default();
    let topo = Arc::new(build_topology(&cfg.topology_params()).unwrap());
    let profile = TrafficProfile::from_load_factors(&topo, REFERENCE_CELL, 1.5, 0.5, 120.0, 1);
    let events = generate_events(&profile, &topo, 3600.0).unwrap();
    let pool = ChannelPool::new(topo.clone(), 0.5).unwrap();
    let policy = BorrowPolicy {
        reference: REFERENCE_CELL,
        strategy: Strategy::Auto,
        borrow_request: 4,
        neutralize: true,
    };
    c.bench_function("replay_one_hour_auto", |b| {
        b.iter(|| replay(pool.clone(), &events, policy).unwrap())
    });
}

fn scenario(c: &mut Criterion) {
    let cfg = ScenarioConfig {
        monte_carlo_samples: 10_000,
        ..ScenarioConfig::default()
    };
    let mut group = c.benchmark_group("scenario");
    group.sample_size(10);
    group.bench_function("run_scenario_defaults", |b| {
        b.iter(|| run_scenario(black_box(&cfg)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, propagation, outage, traffic_replay, scenario);
criterion_main!(benches);
