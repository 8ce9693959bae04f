//! Shared helpers for the integration test suites: seeded random netlists and
//! random connected Laplacians.
#![allow(dead_code)] // each test target uses a different subset

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use netsync_core::network::{BranchSpec, Netlist, OscillatorConfig, ShuntSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random series-RLC element values; a positive resistance is always present
/// so no branch resonates exactly on the imaginary axis.
fn random_element(r: &mut ChaCha8Rng) -> (f64, f64, Option<f64>) {
    let kind = r.gen_range(0..4u8);
    let res = r.gen_range(0.1..5.0);
    match kind {
        0 => (res, 0.0, None),
        1 => (res, r.gen_range(0.05..2.0), None),
        2 => (res, 0.0, Some(r.gen_range(0.1..5.0))),
        _ => (res, r.gen_range(0.05..2.0), Some(r.gen_range(0.1..5.0))),
    }
}

/// Random connected netlist: a spanning tree plus extra edges, 4..=10 nodes,
/// 2..=4 boundary nodes, optionally one interior shunt.
pub fn random_netlist(r: &mut ChaCha8Rng, with_shunt: bool) -> Netlist {
    let n = r.gen_range(4..=10usize);
    let nb = r.gen_range(2..=3.min(n - 1));
    let nodes: Vec<String> = (0..n).map(|k| format!("n{k}")).collect();
    let boundary: Vec<String> = (0..nb).map(|k| format!("n{k}")).collect();

    let mut pairs = std::collections::BTreeSet::new();
    let mut branches = Vec::new();
    for k in 1..n {
        let parent = r.gen_range(0..k);
        pairs.insert((parent, k));
    }
    let extra = r.gen_range(0..=n);
    for _ in 0..extra {
        let a = r.gen_range(0..n);
        let b = r.gen_range(0..n);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    for (a, b) in pairs {
        let (res, l, c) = random_element(r);
        branches.push(BranchSpec {
            from: format!("n{a}"),
            to: format!("n{b}"),
            r: res,
            l,
            c,
        });
    }

    let mut shunts = Vec::new();
    if with_shunt && n > nb {
        let node = r.gen_range(nb..n);
        let (res, l, c) = random_element(r);
        shunts.push(ShuntSpec { node: format!("n{node}"), r: res, l, c });
    }

    Netlist::new(nodes, boundary, branches, shunts, OscillatorConfig::chua_default())
        .expect("generated netlist is valid by construction")
}

/// Random connected real Laplacian with positive weights, dims 3..=8.
pub fn random_laplacian(r: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = r.gen_range(3..=8usize);
    let mut w = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let parent = r.gen_range(0..k);
        let v = r.gen_range(0.2..3.0);
        w[(parent, k)] = v;
        w[(k, parent)] = v;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if w[(i, j)] == 0.0 && r.gen_bool(0.4) {
                let v = r.gen_range(0.2..3.0);
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                l[(i, j)] = -w[(i, j)];
                l[(i, i)] += w[(i, j)];
            }
        }
    }
    l
}

/// Random complex symmetric matrix with zero row sums (a complex-weighted
/// connected Laplacian).
pub fn random_complex_laplacian(r: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let mut w = DMatrix::<Complex64>::zeros(n, n);
    for k in 1..n {
        let parent = r.gen_range(0..k);
        let v = Complex64::new(r.gen_range(0.2..2.0), r.gen_range(-1.0..1.0));
        w[(parent, k)] = v;
        w[(k, parent)] = v;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if w[(i, j)].norm() == 0.0 && r.gen_bool(0.4) {
                let v = Complex64::new(r.gen_range(0.2..2.0), r.gen_range(-1.0..1.0));
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    let mut l = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                l[(i, j)] = -w[(i, j)];
                let prev = l[(i, i)];
                l[(i, i)] = prev + w[(i, j)];
            }
        }
    }
    l
}
