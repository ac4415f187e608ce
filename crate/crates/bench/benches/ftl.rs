use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trimlab_core::experiment::{run, RunConfig};
use trimlab_core::{DeviceGeometry, FtlState, WorkloadSpec};

const WRITES: u64 = 100_000;

fn warm_device(g: DeviceGeometry, rng: &mut ChaCha8Rng) -> FtlState {
    let mut ftl = FtlState::new(g);
    for lba in 0..g.user_lbas() {
        ftl.host_write(lba as _).unwrap();
    }
    for _ in 0..4 * g.user_lbas() {
        ftl.host_write(rng.random_range(0..g.user_lbas()) as _)
            .unwrap();
    }
    ftl
}

fn host_writes(c: &mut Criterion) {
    let mut group = c.benchmark_group("ftl");
    group.throughput(Throughput::Elements(WRITES));
    for sf in [0.1, 0.3] {
        let user = (65536.0 * (1.0 - sf)) as usize;
        let g = DeviceGeometry::new(65536, user, 64, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let warm = warm_device(g, &mut rng);
        group.bench_function(format!("uniform_writes_sf{sf}"), |b| {
            b.iter_batched(
                || (warm.clone(), ChaCha8Rng::seed_from_u64(2)),
                |(mut ftl, mut rng)| {
                    for _ in 0..WRITES {
                        ftl.host_write(rng.random_range(0..user) as _).unwrap();
                    }
                    black_box(ftl.counters().block_erases)
                },
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn trim_run(c: &mut Criterion) {
    let g = DeviceGeometry::new(16384, 14746, 64, 2).unwrap();
    let cfg = RunConfig {
        measure_requests: 200_000,
        ..RunConfig::new(g, WorkloadSpec::Uniform { trim_prob: 0.1 })
    };
    let mut group = c.benchmark_group("experiment");
    group.sample_size(10);
    group.bench_function("uniform_trim_run_t16384", |b| {
        b.iter(|| black_box(run(&cfg).unwrap().measured_wa.mean))
    });
    group.finish();
}

criterion_group!(benches, host_writes, trim_run);
criterion_main!(benches);
