use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use reltherm_core::bounds::random_feasible_sdp;
use reltherm_core::entropies::{h_hyp, h_max_smooth, h_min_smooth};
use reltherm_core::linalg::{eigh, DensityOperator, DimensionSpec};
use reltherm_core::metrics::fidelity;
use reltherm_core::random::{haar_unitary, random_state};
use reltherm_core::sdp::solve;
use reltherm_core::spin_model::{energy_shell, SpinShellSpec};
use reltherm_core::thermalization::{sample_fraction, therm_distance, ConstraintSubspace};
use reltherm_core::Seed;

fn linalg(c: &mut Criterion) {
    let mut g = c.benchmark_group("linalg");
    for d in [8usize, 32, 64] {
        let rho = random_state(&[d], d, &mut Seed(1).rng()).unwrap();
        let sigma = random_state(&[d], d, &mut Seed(2).rng()).unwrap();
        g.bench_with_input(BenchmarkId::new("eigh", d), &rho, |b, r| b.iter(|| eigh(black_box(r.matrix()))));
        g.bench_with_input(BenchmarkId::new("fidelity", d), &(rho, sigma), |b, (r, s)| {
            b.iter(|| fidelity(black_box(r), black_box(s), false).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("haar_unitary", d), &d, |b, &d| {
            let mut rng = Seed(3).rng();
            b.iter(|| haar_unitary(d, &mut rng))
        });
    }
    let rho = random_state(&[4, 4, 4], 8, &mut Seed(4).rng()).unwrap();
    g.bench_function("partial_trace_4x4x4", |b| b.iter(|| black_box(&rho).partial_trace(&[0, 2]).unwrap()));
    g.finish();
}

fn sdp(c: &mut Criterion) {
    let mut g = c.benchmark_group("sdp");
    g.sample_size(20);
    let problem = random_feasible_sdp(&mut Seed(5).rng());
    g.bench_function("random_feasible", |b| b.iter(|| solve(black_box(&problem)).unwrap()));
    let rho = random_state(&[2, 2], 3, &mut Seed(6).rng()).unwrap();
    g.bench_function("h_min_smooth_2x2", |b| b.iter(|| h_min_smooth(black_box(&rho), 0.05).unwrap()));
    g.bench_function("h_max_smooth_2x2", |b| b.iter(|| h_max_smooth(black_box(&rho), 0.05).unwrap()));
    g.bench_function("h_hyp_2x2", |b| b.iter(|| h_hyp(black_box(&rho), 0.1).unwrap()));
    g.finish();
}

fn thermalization(c: &mut Criterion) {
    let mut g = c.benchmark_group("thermalization");
    g.sample_size(20);
    let omega = ConstraintSubspace::full(2, 16).unwrap();
    let rho = DensityOperator::maximally_mixed(DimensionSpec::single(32).unwrap())
        .tensor(&random_state(&[2], 2, &mut Seed(7).rng()).unwrap());
    let u = haar_unitary(32, &mut Seed(8).rng());
    g.bench_function("therm_distance_32x2", |b| b.iter(|| therm_distance(black_box(&rho), &u, &omega).unwrap()));
    g.bench_function("sample_fraction_32x2_x20", |b| {
        b.iter(|| sample_fraction(black_box(&rho), &omega, 0.3, 20, Seed(9)).unwrap())
    });
    let spec = SpinShellSpec::new(12, 6, 1, 3).unwrap();
    g.bench_function("energy_shell_12_6", |b| b.iter(|| energy_shell(black_box(&spec)).unwrap().pi_s().unwrap()));
    g.finish();
}

criterion_group!(benches, linalg, sdp, thermalization);
criterion_main!(benches);
