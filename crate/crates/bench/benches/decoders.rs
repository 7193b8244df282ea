use bibs_bench::fixture;
use bibs_core::decode::{Algorithm, FillProblem};
use bibs_core::DecodeConfig;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn decoders(c: &mut Criterion) {
    let fx = fixture(0.5, 20);
    let mut group = c.benchmark_group("decode_r0.50");
    for algo in ["bs-f", "bs-b", "bibs", "gsn", "rerank-sum"] {
        let algorithm: Algorithm = algo.parse().unwrap();
        group.bench_function(BenchmarkId::from_parameter(algo), |b| {
            b.iter(|| {
                for inst in &fx.instances {
                    let p = FillProblem::new(inst.clone(), &fx.forward, &fx.backward, DecodeConfig::default()).unwrap();
                    std::hint::black_box(algorithm.run(&p, 0).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn bibs_scaling(c: &mut Criterion) {
    let fx = fixture(0.75, 1);
    let inst = &fx.instances[0];
    let mut group = c.benchmark_group("bibs_beam_width");
    for beam in [1, 3, 5, 10] {
        let cfg = DecodeConfig::new(beam, 2).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(beam), &cfg, |b, cfg| {
            b.iter(|| {
                let p = FillProblem::new(inst.clone(), &fx.forward, &fx.backward, cfg.clone()).unwrap();
                std::hint::black_box(Algorithm::Bibs.run(&p, 0).unwrap())
            })
        });
    }
    group.finish();
}

fn oracle_small(c: &mut Criterion) {
    let fx = fixture(0.25, 1);
    let inst = fx.instances[0].clone();
    c.bench_function("oracle_r0.25", |b| {
        b.iter(|| {
            let p = FillProblem::new(inst.clone(), &fx.forward, &fx.backward, DecodeConfig::default()).unwrap();
            std::hint::black_box(Algorithm::Oracle.run(&p, 0).unwrap())
        })
    });
}

criterion_group!(benches, decoders, bibs_scaling, oracle_small);
criterion_main!(benches);
