use num_complex::Complex64;

use crate::network::{BranchSpec, Netlist, OscillatorConfig, ShuntSpec};
use crate::numerics::{ComplexMatrix, Tolerances};

use super::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn unit_star_matrix() -> ComplexMatrix {
    // 3 boundary + 1 interior, three 1-siemens branches to the center.
    let mut y = ComplexMatrix::zeros(4);
    for i in 0..3 {
        y.set(i, i, c(1.0, 0.0));
        y.set(i, 3, c(-1.0, 0.0));
        y.set(3, i, c(-1.0, 0.0));
    }
    y.set(3, 3, c(3.0, 0.0));
    y
}

#[test]
fn star_delta_reduction() {
    let y = unit_star_matrix();
    let red = kron_reduce(&y, 3, &tol()).unwrap();
    assert_eq!(red.eliminated, vec![3]);
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 2.0 / 3.0 } else { -1.0 / 3.0 };
            assert!((red.y.get(i, j) - c(want, 0.0)).norm() < 1e-14);
        }
    }
}

#[test]
fn empty_elimination_is_identity() {
    let y = unit_star_matrix();
    let red = kron_reduce(&y, 4, &tol()).unwrap();
    assert!(red.eliminated.is_empty());
    assert!(red.y.sub(&y).max_abs() < 1e-15);
}

#[test]
fn singular_interior_reported() {
    // Interior block exactly singular.
    let mut y = ComplexMatrix::zeros(3);
    y.set(0, 0, c(1.0, 0.0));
    y.set(1, 1, c(0.0, 0.0));
    y.set(2, 2, c(0.0, 0.0));
    assert!(matches!(
        kron_reduce(&y, 1, &tol()),
        Err(ReductionError::SingularInterior)
    ));
}

#[test]
fn augment_examples() {
    // Zero-row-sum input: augmentation pads with a zero border.
    let mut y0 = ComplexMatrix::zeros(2);
    y0.set(0, 0, c(1.0, 0.0));
    y0.set(0, 1, c(-1.0, 0.0));
    y0.set(1, 0, c(-1.0, 0.0));
    y0.set(1, 1, c(1.0, 0.0));
    let a0 = augment(&y0);
    assert!(a0.get(0, 2).norm() < 1e-15 && a0.get(2, 2).norm() < 1e-15);

    // Each node: 1 S shunt + 1 S branch.
    let mut y = ComplexMatrix::zeros(2);
    y.set(0, 0, c(2.0, 0.0));
    y.set(0, 1, c(-1.0, 0.0));
    y.set(1, 0, c(-1.0, 0.0));
    y.set(1, 1, c(2.0, 0.0));
    let a = augment(&y);
    assert!((a.get(0, 2) - c(-1.0, 0.0)).norm() < 1e-15);
    assert!((a.get(2, 1) - c(-1.0, 0.0)).norm() < 1e-15);
    assert!((a.get(2, 2) - c(2.0, 0.0)).norm() < 1e-15);
    // Zero row and column sums by construction.
    assert!(a.max_row_sum_abs() < 1e-14);
}

#[test]
fn pseudo_inverse_rank_one_laplacian() {
    // N = 2: Y = [[1,-1],[-1,1]] has dagger (1/4) * same.
    let mut y = ComplexMatrix::zeros(2);
    y.set(0, 0, c(1.0, 0.0));
    y.set(0, 1, c(-1.0, 0.0));
    y.set(1, 0, c(-1.0, 0.0));
    y.set(1, 1, c(1.0, 0.0));
    let dag = pseudo_inverse_zero_sum(&y, &tol()).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let want = if i == j { 0.25 } else { -0.25 };
            assert!((dag.get(i, j) - c(want, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn pseudo_inverse_uniform_gamma() {
    // Y = y * Gamma  =>  Y† = Gamma / (N² y), complex y.
    let n = 5;
    let yval = c(0.7, -1.3);
    let mut y = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let g = if i == j { n as f64 - 1.0 } else { -1.0 };
            y.set(i, j, yval * g);
        }
    }
    let dag = pseudo_inverse_zero_sum(&y, &tol()).unwrap();
    let scale = 1.0 / ((n * n) as f64);
    for i in 0..n {
        for j in 0..n {
            let g = if i == j { n as f64 - 1.0 } else { -1.0 };
            let want = g * scale / yval;
            assert!((dag.get(i, j) - want).norm() < 1e-11, "entry {i},{j}");
        }
    }
}

#[test]
fn pseudo_inverse_rejects_disconnected() {
    // Two disjoint 2-node components: rank N-2.
    let mut y = ComplexMatrix::zeros(4);
    for (a, b) in [(0usize, 1usize), (2, 3)] {
        y.set(a, a, c(1.0, 0.0));
        y.set(b, b, c(1.0, 0.0));
        y.set(a, b, c(-1.0, 0.0));
        y.set(b, a, c(-1.0, 0.0));
    }
    assert!(matches!(
        pseudo_inverse_zero_sum(&y, &tol()),
        Err(ReductionError::RankDeficient)
    ));
}

#[test]
fn effective_impedance_star_and_self() {
    let y = unit_star_matrix();
    let z01 = effective_impedance(&y, 0, 1, &tol()).unwrap();
    assert!((z01 - c(2.0, 0.0)).norm() < 1e-12, "two unit resistors in series: {z01}");
    assert!(effective_impedance(&y, 2, 2, &tol()).unwrap().norm() == 0.0);
}

#[test]
fn effective_impedance_homogeneous_value() {
    let n = 4;
    let yval = c(0.3, 0.9);
    let mut y = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let g = if i == j { n as f64 - 1.0 } else { -1.0 };
            y.set(i, j, yval * g);
        }
    }
    let want = 2.0 / (n as f64 * yval);
    for a in 0..n {
        for b in 0..n {
            if a != b {
                let z = effective_impedance(&y, a, b, &tol()).unwrap();
                assert!((z - want).norm() < 1e-12 * want.norm());
            }
        }
    }
}

#[test]
fn grounded_inverse_entry_examples() {
    let mut y = ComplexMatrix::zeros(2);
    y.set(0, 0, c(1.0, 0.0));
    y.set(0, 1, c(-1.0, 0.0));
    y.set(1, 0, c(-1.0, 0.0));
    y.set(1, 1, c(1.0, 0.0));
    let dag = pseudo_inverse_zero_sum(&y, &tol()).unwrap();
    assert!(grounded_inverse_entry(&dag, 1, 1, 1).norm() < 1e-14);
    // Grounding node 2 (index 1) leaves the 1x1 matrix [[1]]: inverse 1.
    let e = grounded_inverse_entry(&dag, 0, 0, 1);
    assert!((e - c(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn ydagger_from_z_uniform() {
    // Z = z_eff (11^T - I)  =>  Y† = z_eff/(2N) * Gamma.
    let n = 4;
    let zeff = c(1.1, -0.4);
    let mut z = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                z.set(i, j, zeff);
            }
        }
    }
    let dag = ydagger_from_z(&EffectiveImpedanceMatrix::from_matrix(z));
    for i in 0..n {
        for j in 0..n {
            let g = if i == j { n as f64 - 1.0 } else { -1.0 };
            let want = zeff / (2.0 * n as f64) * g;
            assert!((dag.get(i, j) - want).norm() < 1e-12);
        }
    }
}

fn loaded_star(n: usize, r_net: f64, l_net: f64, r_load: f64) -> Netlist {
    let mut nodes: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
    nodes.push("load".into());
    let boundary: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
    let branches = (1..=n)
        .map(|k| BranchSpec { from: k.to_string(), to: "load".into(), r: r_net, l: l_net, c: None })
        .collect();
    let shunts = vec![ShuntSpec { node: "load".into(), r: r_load, l: 0.0, c: None }];
    Netlist::new(nodes, boundary, branches, shunts, OscillatorConfig::chua_default()).unwrap()
}

#[test]
fn homogeneous_params_star_oracle() {
    // Direct Schur complement of the loaded star gives
    // y_shunt = 1/(z_net + N z_load), y_series = z_load/(z_net (z_net + N z_load)).
    let n = 3;
    let (z_net, z_load) = (c(2.0, 0.0), c(5.0, 0.0));
    let z_es = 2.0 * z_net;
    let z_esh = z_net + z_load;
    let (y_series, y_shunt) = homogeneous_params(z_es, Some(z_esh), n, &tol()).unwrap();
    let y_shunt = y_shunt.unwrap();
    let want_shunt = 1.0 / (z_net + n as f64 * z_load);
    let want_series = z_load / (z_net * (z_net + n as f64 * z_load));
    assert!((y_shunt - want_shunt).norm() < 1e-12 * want_shunt.norm());
    assert!((y_series - want_series).norm() < 1e-12 * want_series.norm());

    // Forward round trip.
    let (zs, zsh) = homogeneous_forward(y_series, Some(y_shunt), n);
    assert!((zs - z_es).norm() < 1e-10 * z_es.norm());
    assert!((zsh.unwrap() - z_esh).norm() < 1e-10 * z_esh.norm());
}

#[test]
fn homogeneous_params_no_shunt() {
    // N = 4, z_eff = 2  =>  y_series = 1/4.
    let (ys, ysh) = homogeneous_params(c(2.0, 0.0), None, 4, &tol()).unwrap();
    assert!(ysh.is_none());
    assert!((ys - c(0.25, 0.0)).norm() < 1e-14);
}

#[test]
fn homogeneous_params_guard() {
    // z_es/z_esh = 2N/(N-1) trips the guard: N = 3, z_esh = 1, z_es = 3.
    assert!(matches!(
        homogeneous_params(c(3.0, 0.0), Some(c(1.0, 0.0)), 3, &tol()),
        Err(ReductionError::GuardViolated)
    ));
}

#[test]
fn classify_resistive_star_uniform() {
    let nodes = vec!["1".into(), "2".into(), "3".into(), "c".into()];
    let boundary = vec!["1".into(), "2".into(), "3".into()];
    let branches = (1..=3)
        .map(|k: usize| BranchSpec { from: k.to_string(), to: "c".into(), r: 1.0, l: 0.0, c: None })
        .collect();
    let net = Netlist::new(nodes, boundary, branches, vec![], OscillatorConfig::chua_default()).unwrap();
    let class = classify(&net, &default_probes(), &tol()).unwrap();
    // The reduced star is the complete triangle with equal weights.
    assert_eq!(class.kind, NetworkKind::NoShuntHomogeneous);
    let ys = class.y_series.unwrap();
    let v = ys.eval(c(0.0, 1.0)).unwrap();
    assert!((v - c(1.0 / 3.0, 0.0)).norm() < 1e-10, "reduced weight 1/3: {v}");
}

#[test]
fn classify_mixed_branches_unclassified() {
    // Triangle with R-only, L-only and RL branches: not uniform, not homogeneous.
    let nodes: Vec<String> = vec!["1".into(), "2".into(), "3".into()];
    let boundary = nodes.clone();
    let branches = vec![
        BranchSpec { from: "1".into(), to: "2".into(), r: 1.0, l: 0.0, c: None },
        BranchSpec { from: "2".into(), to: "3".into(), r: 0.0, l: 1.0, c: None },
        BranchSpec { from: "1".into(), to: "3".into(), r: 0.5, l: 0.5, c: None },
    ];
    let net = Netlist::new(nodes, boundary, branches, vec![], OscillatorConfig::chua_default()).unwrap();
    let class = classify(&net, &default_probes(), &tol()).unwrap();
    assert_eq!(class.kind, NetworkKind::Unclassified);
    assert!(class.reason.is_some());
}

#[test]
fn classify_two_port_trivially_homogeneous() {
    // R branch then L branch in a path; N = 2 is homogeneous (single pair).
    let nodes: Vec<String> = vec!["1".into(), "m".into(), "2".into()];
    let boundary = vec!["1".into(), "2".into()];
    let branches = vec![
        BranchSpec { from: "1".into(), to: "m".into(), r: 1.0, l: 0.0, c: None },
        BranchSpec { from: "m".into(), to: "2".into(), r: 0.0, l: 1.0, c: None },
    ];
    let net = Netlist::new(nodes, boundary, branches, vec![], OscillatorConfig::chua_default()).unwrap();
    let class = classify(&net, &default_probes(), &tol()).unwrap();
    assert_eq!(class.kind, NetworkKind::NoShuntHomogeneous);
    // y_series = 1/(1 + s): series combination of the two branches.
    let ys = class.y_series.unwrap();
    for w in [0.1, 1.0, 10.0] {
        let s = c(0.0, w);
        let got = ys.eval(s).unwrap();
        let want = 1.0 / (1.0 + s);
        assert!((got - want).norm() < 1e-9 * want.norm());
    }
}

#[test]
fn classify_loaded_star_shunt_homogeneous() {
    let n = 3;
    let net = loaded_star(n, 2.0, 0.0, 5.0);
    let class = classify(&net, &default_probes(), &tol()).unwrap();
    assert_eq!(class.kind, NetworkKind::ShuntHomogeneous);
    assert_eq!(class.eigenvalues, vec![0.0, 3.0, 3.0]);
    let ys = class.y_series.unwrap().eval(c(0.0, 1.0)).unwrap();
    let ysh = class.y_shunt.unwrap().eval(c(0.0, 1.0)).unwrap();
    // Direct Schur values for the resistive loaded star.
    let want_sh = 1.0 / (2.0 + 3.0 * 5.0);
    let want_se = 5.0 / (2.0 * (2.0 + 3.0 * 5.0));
    assert!((ysh - c(want_sh, 0.0)).norm() < 1e-10);
    assert!((ys - c(want_se, 0.0)).norm() < 1e-10);
    assert!(class.notes.iter().any(|n| n.contains("swaps the series and shunt")));
}

#[test]
fn classify_per_node_shunts_uniform() {
    // Boundary path 1-2-3 with equal R branches; each boundary node hangs an
    // interior node with an identical shunt behind an identical branch. The
    // reduced network is y_shunt I + y_series L_path: shunt_uniform.
    let nodes: Vec<String> = ["1", "2", "3", "i1", "i2", "i3"].iter().map(|s| s.to_string()).collect();
    let boundary: Vec<String> = vec!["1".into(), "2".into(), "3".into()];
    let mut branches = vec![
        BranchSpec { from: "1".into(), to: "2".into(), r: 2.0, l: 0.0, c: None },
        BranchSpec { from: "2".into(), to: "3".into(), r: 2.0, l: 0.0, c: None },
    ];
    for k in 1..=3 {
        branches.push(BranchSpec { from: k.to_string(), to: format!("i{k}"), r: 1.0, l: 0.0, c: None });
    }
    let shunts = (1..=3)
        .map(|k| ShuntSpec { node: format!("i{k}"), r: 4.0, l: 0.0, c: None })
        .collect();
    let net = Netlist::new(nodes, boundary, branches, shunts, OscillatorConfig::chua_default()).unwrap();
    let class = classify(&net, &default_probes(), &tol()).unwrap();
    assert_eq!(class.kind, NetworkKind::ShuntUniform);
    // Reduced shunt: 1 series with 4 -> 1/5 S at every node.
    let ysh = class.y_shunt.unwrap().eval(c(0.0, 1.0)).unwrap();
    assert!((ysh - c(0.2, 0.0)).norm() < 1e-9, "{ysh}");
    // Path Laplacian spectrum: {0, 1, 3} times the 0.5 S branch weight.
    let evs = &class.eigenvalues;
    assert!(evs[0].abs() < 1e-9);
    let ys = class.y_series.unwrap().eval(c(0.0, 1.0)).unwrap();
    // y_series * lambda invariant under the weight normalization.
    let coupling: Vec<f64> = evs.iter().map(|l| (ys * l).re).collect();
    assert!((coupling[1] - 0.5).abs() < 1e-9 && (coupling[2] - 1.5).abs() < 1e-9, "{coupling:?}");
}

#[test]
fn symbolic_and_numeric_reduction_agree() {
    let net = loaded_star(4, 1.0, 0.5, 2.0);
    let adm = crate::network::assemble_admittance(&net).unwrap();
    let sym = kron_reduce_symbolic(&adm, 4).unwrap();
    for w in [0.3, 2.0, 30.0] {
        let s = c(0.0, w);
        let num = kron_reduce(&adm.eval(s).unwrap(), 4, &tol()).unwrap().y;
        let symv = sym.eval(s).unwrap();
        assert!(num.sub(&symv).max_abs() < 1e-10 * num.max_abs().max(1.0));
    }
}

#[test]
fn kron_reduce_uniform_resistive_star() {
    let nodes = vec!["1".into(), "2".into(), "3".into(), "c".into()];
    let boundary = vec!["1".into(), "2".into(), "3".into()];
    let branches = (1..=3)
        .map(|k: usize| BranchSpec { from: k.to_string(), to: "c".into(), r: 1.0, l: 0.0, c: None })
        .collect();
    let net = Netlist::new(nodes, boundary, branches, vec![], OscillatorConfig::chua_default()).unwrap();
    let (y_series, lap) = kron_reduce_uniform(&net, &tol()).unwrap();
    assert!((y_series.eval(c(0.0, 1.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 2.0 / 3.0 } else { -1.0 / 3.0 };
            assert!((lap[(i, j)] - want).abs() < 1e-12);
        }
    }
}

#[test]
fn kron_reduce_uniform_rejects_mixed() {
    let nodes: Vec<String> = vec!["1".into(), "2".into(), "3".into()];
    let boundary = nodes.clone();
    let branches = vec![
        BranchSpec { from: "1".into(), to: "2".into(), r: 1.0, l: 0.0, c: None },
        BranchSpec { from: "2".into(), to: "3".into(), r: 0.0, l: 1.0, c: None },
    ];
    let net = Netlist::new(nodes, boundary, branches, vec![], OscillatorConfig::chua_default()).unwrap();
    assert!(matches!(
        kron_reduce_uniform(&net, &tol()),
        Err(ReductionError::NotUniform(_))
    ));
}
