use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use hwtm_core::hwdev::MAX_SLOTS;
use hwtm_core::{
    run_scenario, CostModel, CycleStepped, EventDriven, Mode, Scenario, SwTimerTable, TaskId, TaskSpec, TimeManager,
};

const SPAN: u64 = 100_000;

/// Four slots with staggered delays, stepped `SPAN` cycles with acks.
fn drive<D: TimeManager>() -> u64 {
    let mut dev = D::reset(4).unwrap();
    let delays = [997u64, 1_999, 4_001, 9_973];
    for (s, d) in delays.iter().enumerate() {
        dev.task_delay(s, *d).unwrap();
    }
    let mut left = SPAN;
    while let Some(c) = dev.cycles_to_next_expiry().filter(|&c| c <= left) {
        dev.step_cycles(c);
        left -= c;
        for s in dev.get_tasks_to_wake().iter() {
            dev.clear_task(s).unwrap();
            dev.task_delay(s, delays[s]).unwrap();
        }
    }
    dev.step_cycles(left);
    dev.get_time()
}

fn device_engines(c: &mut Criterion) {
    let mut g = c.benchmark_group("device");
    g.throughput(Throughput::Elements(SPAN));
    g.bench_function("event_driven", |b| b.iter(|| black_box(drive::<EventDriven>())));
    g.bench_function("cycle_stepped", |b| b.iter(|| black_box(drive::<CycleStepped>())));
    g.finish();
}

fn master_tick(c: &mut Criterion) {
    let cost = CostModel::default();
    let mut g = c.benchmark_group("master_tick");
    for n in [0usize, 4, 12, MAX_SLOTS] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter_batched(
                || {
                    let mut t = SwTimerTable::new();
                    for i in 0..n as u32 {
                        t.add_timer(TaskId(i), 1 + i as u64 % 3).unwrap();
                    }
                    t
                },
                |mut t| black_box(t.master_tick(&cost)),
                criterion::BatchSize::SmallInput,
            )
        });
    }
    g.finish();
}

fn scenarios(c: &mut Criterion) {
    let tasks: Vec<TaskSpec> = (0..12)
        .map(|i| TaskSpec::periodic(i, 10_000_000 + i as u64 * 1_500_001))
        .collect();
    let sc = Scenario::platform(tasks, 1_000_000_000).unwrap();
    let mut g = c.benchmark_group("run_scenario");
    for mode in [Mode::Software, Mode::Hardware] {
        g.bench_function(mode.as_str(), |b| {
            b.iter(|| black_box(run_scenario(&sc, mode).unwrap().len()))
        });
    }
    g.finish();
}

criterion_group!(benches, device_engines, master_tick, scenarios);
criterion_main!(benches);
