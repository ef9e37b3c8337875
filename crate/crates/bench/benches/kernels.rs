use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use hw_core::bounds::make_bound_spec;
use hw_core::linalg::{eigen_decompose, symmetrize};
use hw_core::mc::{default_lambda_grid, default_t_grid, estimate_mgf_grid, simulate_cell, QuadKernel};
use hw_core::verify::Ensemble;
use hw_core::{RngStream, SubGaussianDist};

fn jacobi(c: &mut Criterion) {
    let mut g = c.benchmark_group("jacobi");
    for n in [5, 20, 50] {
        let a = symmetrize(&Ensemble::RandomSymmetric.build(n, 1));
        g.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| b.iter(|| eigen_decompose(a).unwrap()));
    }
    g.finish();
}

fn quad_kernel(c: &mut Criterion) {
    let mut g = c.benchmark_group("quad_kernel");
    for n in [5, 20, 50] {
        let k = QuadKernel::new(&Ensemble::RandomSymmetric.build(n, 2));
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| b.iter(|| k.eval(std::hint::black_box(x))));
    }
    g.finish();
}

fn cell(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate_cell");
    g.sample_size(10);
    let d = SubGaussianDist::gaussian(1.0).unwrap();
    let samples = 1 << 16;
    g.throughput(Throughput::Elements(samples as u64));
    for n in [5, 20] {
        let m = Ensemble::RandomSymmetric.build(n, 3);
        let spec = make_bound_spec(&m, 1.0).unwrap();
        let (ts, ls) = (default_t_grid(&spec, 10), default_lambda_grid(&spec, 8));
        g.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| simulate_cell(&m, &d, RngStream::new(7, 0), samples, &ts, &ls, 0.95, false).unwrap())
        });
    }
    g.finish();
}

fn bootstrap(c: &mut Criterion) {
    let mut g = c.benchmark_group("bootstrap");
    g.sample_size(10);
    let ys: Vec<f64> = (0..1 << 16).map(|i| ((i as f64) * 0.618).sin()).collect();
    g.throughput(Throughput::Elements(ys.len() as u64));
    let lambdas = [0.0, 0.05, 0.1, 0.2];
    g.bench_function("four_lambdas", |b| {
        b.iter(|| estimate_mgf_grid(&ys, &lambdas, 0.95, RngStream::new(9, 1)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, jacobi, quad_kernel, cell, bootstrap);
criterion_main!(benches);
