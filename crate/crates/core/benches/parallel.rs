use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use icnet::confocal::{ConfocalConic, NetParams, PeriodicSpec};
use icnet::net::{fill_incircles, verify_net, DEFAULT_TOLERANCE};
use icnet::Execution;
use std::hint::black_box;

fn cells(c: &mut Criterion) {
    let conic = ConfocalConic::elliptic(2.0, 1.0).unwrap();
    let params = NetParams::periodic(
        conic,
        PeriodicSpec {
            n_azimuthal: 128,
            kappa: 0.1,
            psi0v: 0.2,
        },
    )
    .unwrap();
    let net = params.net(0..257, 0..257, Execution::Sequential).unwrap();

    let mut group = c.benchmark_group("net_cells");
    group.sample_size(20);
    for (name, exec) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        group.bench_with_input(
            BenchmarkId::new("fill_incircles", name),
            &exec,
            |b, &exec| b.iter(|| fill_incircles(black_box(net.clone()), DEFAULT_TOLERANCE, exec)),
        );
        group.bench_with_input(BenchmarkId::new("verify_net", name), &exec, |b, &exec| {
            b.iter(|| verify_net(black_box(&net), DEFAULT_TOLERANCE, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, cells);
criterion_main!(benches);
