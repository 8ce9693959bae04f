//! Stock fixtures: the lossless 7-node inductive benchmark network (two
//! parameter sets), the loaded-star homogeneous network, and the unit
//! resistive star.

use crate::network::{BranchSpec, Netlist, OscillatorConfig, ShuntSpec};

/// Inductances (henries) of the 7-node lossless network, keyed by node pair.
/// Boundary nodes are 1-4; interior nodes 5-7. The second parameter set
/// scales every inductance by exactly 4.
pub const CASE_STUDY_A_EDGES: [(u32, u32, f64); 10] = [
    (1, 2, 0.834),
    (1, 5, 0.671),
    (2, 6, 0.277),
    (5, 6, 1.0575),
    (4, 5, 0.3655),
    (4, 6, 1.0245),
    (3, 6, 0.3240),
    (6, 7, 0.4735),
    (3, 7, 0.1875),
    (4, 7, 0.74),
];

/// The lossless inductive benchmark netlist; `weak` selects the 4x-inductance
/// parameter set whose certificate fails.
pub fn case_study_a_netlist(weak: bool) -> Netlist {
    let scale = if weak { 4.0 } else { 1.0 };
    let nodes: Vec<String> = (1..=7).map(|k| k.to_string()).collect();
    let boundary: Vec<String> = (1..=4).map(|k| k.to_string()).collect();
    let branches = CASE_STUDY_A_EDGES
        .iter()
        .map(|&(a, b, l)| BranchSpec {
            from: a.to_string(),
            to: b.to_string(),
            r: 0.0,
            l: l * scale,
            c: None,
        })
        .collect();
    Netlist::new(nodes, boundary, branches, vec![], OscillatorConfig::chua_default())
        .expect("stock netlist is valid")
}

/// Star of `n` circuits behind identical series branches z_net = r_net + s l_net,
/// loaded at the center by a shunt z_load = r_load + s l_load.
pub fn star_with_load_netlist(n: usize, r_net: f64, l_net: f64, r_load: f64, l_load: f64) -> Netlist {
    assert!(n >= 2, "need at least two circuits");
    let mut nodes: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
    nodes.push("load".into());
    let boundary: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
    let branches = (1..=n)
        .map(|k| BranchSpec { from: k.to_string(), to: "load".into(), r: r_net, l: l_net, c: None })
        .collect();
    let shunts = vec![ShuntSpec { node: "load".into(), r: r_load, l: l_load, c: None }];
    Netlist::new(nodes, boundary, branches, shunts, OscillatorConfig::chua_default())
        .expect("stock netlist is valid")
}

/// Unit-conductance star: `n_boundary` spokes of 1 Ω into one interior hub.
pub fn resistive_star_netlist(n_boundary: usize) -> Netlist {
    let mut nodes: Vec<String> = (1..=n_boundary).map(|k| k.to_string()).collect();
    nodes.push("hub".into());
    let boundary: Vec<String> = (1..=n_boundary).map(|k| k.to_string()).collect();
    let branches = (1..=n_boundary)
        .map(|k| BranchSpec { from: k.to_string(), to: "hub".into(), r: 1.0, l: 0.0, c: None })
        .collect();
    Netlist::new(nodes, boundary, branches, vec![], OscillatorConfig::chua_default())
        .expect("stock netlist is valid")
}
