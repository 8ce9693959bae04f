use criterion::{black_box, criterion_group, criterion_main, Criterion};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use netsync_core::certificate::{certify, hinf_scalar, SweepConfig};
use netsync_core::numerics::{poly_roots, ComplexMatrix, Polynomial, Tolerances};
use netsync_core::oscillator::chua_default;
use netsync_core::presets::case_study_a_netlist;
use netsync_core::reduction::{classify, default_probes, kron_reduce, pseudo_inverse_zero_sum};
use netsync_core::simulator::{integrate, realize_coupling, CoupledSystem, Method, SimOptions};

fn random_complex_laplacian(n: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut l = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = Complex64::new(rng.gen_range(0.2..2.0), rng.gen_range(-1.0..1.0));
            l[(i, j)] = -w;
            l[(j, i)] = -w;
            let di = l[(i, i)];
            let dj = l[(j, j)];
            l[(i, i)] = di + w;
            l[(j, j)] = dj + w;
        }
    }
    l
}

fn bench_kron_reduce(c: &mut Criterion) {
    let tol = Tolerances::default();
    for n in [8usize, 32] {
        let y = ComplexMatrix::from_dmatrix(random_complex_laplacian(n, 7)).unwrap();
        c.bench_function(&format!("kron_reduce_{n}"), |b| {
            b.iter(|| kron_reduce(black_box(&y), n / 2, &tol).unwrap())
        });
    }
}

fn bench_pseudo_inverse(c: &mut Criterion) {
    let tol = Tolerances::default();
    let y = ComplexMatrix::from_dmatrix(random_complex_laplacian(24, 9)).unwrap();
    c.bench_function("pseudo_inverse_24", |b| {
        b.iter(|| pseudo_inverse_zero_sum(black_box(&y), &tol).unwrap())
    });
}

fn bench_poly_roots(c: &mut Criterion) {
    let p = Polynomial::new(vec![1.0, -2.3, 0.7, 3.1, -0.4, 1.9, 0.2, -1.1, 0.9]);
    c.bench_function("poly_roots_deg8", |b| b.iter(|| poly_roots(black_box(&p)).unwrap()));
}

fn bench_hinf_sweep(c: &mut Criterion) {
    let tol = Tolerances::default();
    let osc = chua_default();
    let class = classify(&case_study_a_netlist(false), &default_probes(), &tol).unwrap();
    let cfg = SweepConfig::default();
    c.bench_function("certify_benchmark_network", |b| {
        b.iter(|| certify(black_box(&class), &osc, &cfg).unwrap())
    });
    let h = osc.z_osc.clone();
    c.bench_function("hinf_scalar_zosc", |b| b.iter(|| hinf_scalar(black_box(&h), &cfg).unwrap()));
}

fn bench_simulation(c: &mut Criterion) {
    let tol = Tolerances::default();
    let class = classify(&case_study_a_netlist(false), &default_probes(), &tol).unwrap();
    let coupling = realize_coupling(&class, &tol).unwrap();
    let sys = CoupledSystem::new(class.n, chua_default(), coupling).unwrap();
    let x0 = sys.default_initial_state();
    let opts = SimOptions {
        t_end: 20.0,
        method: Method::Rk45 { rtol: 1e-6, atol: 1e-9 },
        output_points: 201,
        ..Default::default()
    };
    c.bench_function("simulate_coupled_20s", |b| {
        b.iter(|| integrate(black_box(&sys), &x0, &opts).unwrap())
    });
}

criterion_group!(
    benches,
    bench_kron_reduce,
    bench_pseudo_inverse,
    bench_poly_roots,
    bench_hinf_sweep,
    bench_simulation
);
criterion_main!(benches);
