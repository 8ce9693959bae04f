//! Netlist data model, JSON ingestion, and assembly of the
//! frequency-parameterized admittance matrix.
//!
//! Node ids are mapped to dense indices with boundary nodes first, so the
//! Schur partition used by the reduction module is a contiguous block split.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{ComplexMatrix, NumericsError, Polynomial, RationalFunction};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, NetworkError>;

/// Series R-L-C branch between two nodes. `c = None` means no series
/// capacitor (a short in that position), so z(s) = r + s*l [+ 1/(s*c)].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSpec {
    pub from: String,
    pub to: String,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub l: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

/// Shunt R-L-C element from a node to electrical ground.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuntSpec {
    pub node: String,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub l: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscParams {
    pub r: f64,
    pub l: f64,
    pub c_a: f64,
    pub c_b: f64,
    pub slopes: [f64; 3],
    pub breakpoints: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorConfig {
    pub preset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<OscParams>,
}

impl OscillatorConfig {
    pub fn chua_default() -> Self {
        OscillatorConfig { preset: "chua".into(), params: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawNetlist {
    nodes: Vec<String>,
    boundary: Vec<String>,
    #[serde(default)]
    branches: Vec<BranchSpec>,
    #[serde(default)]
    shunts: Vec<ShuntSpec>,
    oscillator: OscillatorConfig,
}

/// Dense-index branch: `a`/`b` index into the boundary-first node order.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub a: usize,
    pub b: usize,
    pub r: f64,
    pub l: f64,
    pub c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shunt {
    pub node: usize,
    pub r: f64,
    pub l: f64,
    pub c: Option<f64>,
}

/// Validated netlist. Nodes are stored boundary-first; `n_boundary` gives the
/// split point, so indices `0..n_boundary` host the nonlinear circuits and
/// the rest are interior.
#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub names: Vec<String>,
    pub n_boundary: usize,
    pub branches: Vec<Branch>,
    pub shunts: Vec<Shunt>,
    pub oscillator: OscillatorConfig,
}

fn element_impedance(r: f64, l: f64, c: Option<f64>) -> Result<RationalFunction> {
    if r < 0.0 || l < 0.0 {
        return Err(NetworkError::Validation("r and l must be >= 0".into()));
    }
    if let Some(cap) = c {
        if cap <= 0.0 {
            return Err(NetworkError::Validation("c must be > 0 when present".into()));
        }
        // r + s*l + 1/(s*c) = (1/c + r*s + l*s^2) / s
        Ok(RationalFunction::new(
            Polynomial::new(vec![1.0 / cap, r, l]),
            Polynomial::s(),
        )?)
    } else {
        if r == 0.0 && l == 0.0 {
            return Err(NetworkError::Validation(
                "element with r = 0, l = 0 and no capacitor has zero impedance".into(),
            ));
        }
        Ok(RationalFunction::from_poly(Polynomial::new(vec![r, l])))
    }
}

impl Branch {
    /// Series impedance z(s) = r + s*l + 1/(s*c).
    pub fn impedance(&self) -> Result<RationalFunction> {
        element_impedance(self.r, self.l, self.c)
    }

    pub fn admittance(&self) -> Result<RationalFunction> {
        Ok(self.impedance()?.reciprocal()?)
    }

    /// Impedance triple (1/c, r, l) used for the uniformity test; orders
    /// s^-1, s^0, s^1.
    pub fn impedance_triple(&self) -> [f64; 3] {
        [self.c.map(|c| 1.0 / c).unwrap_or(0.0), self.r, self.l]
    }
}

impl Shunt {
    pub fn admittance(&self) -> Result<RationalFunction> {
        Ok(element_impedance(self.r, self.l, self.c)?.reciprocal()?)
    }
}

impl Netlist {
    /// Build and validate a netlist from named parts. Nodes are reordered
    /// boundary-first; branch/shunt node references are resolved to indices.
    pub fn new(
        nodes: Vec<String>,
        boundary: Vec<String>,
        branches: Vec<BranchSpec>,
        shunts: Vec<ShuntSpec>,
        oscillator: OscillatorConfig,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(NetworkError::Validation("netlist has no nodes".into()));
        }
        if boundary.is_empty() {
            return Err(NetworkError::Validation("boundary set is empty".into()));
        }
        let node_set: BTreeSet<&String> = nodes.iter().collect();
        if node_set.len() != nodes.len() {
            return Err(NetworkError::Validation("duplicate node id".into()));
        }
        for b in &boundary {
            if !node_set.contains(b) {
                return Err(NetworkError::Validation(format!("boundary node '{b}' not in nodes")));
            }
        }
        let boundary_set: BTreeSet<&String> = boundary.iter().collect();
        if boundary_set.len() != boundary.len() {
            return Err(NetworkError::Validation("duplicate boundary node".into()));
        }

        // Boundary-first ordering: boundary nodes in their given order, then
        // the remaining nodes in netlist order.
        let mut names: Vec<String> = boundary.clone();
        for n in &nodes {
            if !boundary_set.contains(n) {
                names.push(n.clone());
            }
        }
        let index: BTreeMap<&String, usize> = names.iter().enumerate().map(|(i, n)| (n, i)).collect();

        let mut seen_pairs = BTreeSet::new();
        let mut dense_branches = Vec::with_capacity(branches.len());
        for br in &branches {
            let a = *index
                .get(&br.from)
                .ok_or_else(|| NetworkError::Validation(format!("branch references unknown node '{}'", br.from)))?;
            let b = *index
                .get(&br.to)
                .ok_or_else(|| NetworkError::Validation(format!("branch references unknown node '{}'", br.to)))?;
            if a == b {
                return Err(NetworkError::Validation(format!("branch '{}'-'{}' is a self-loop", br.from, br.to)));
            }
            let key = (a.min(b), a.max(b));
            if !seen_pairs.insert(key) {
                return Err(NetworkError::Validation(format!(
                    "duplicate branch between '{}' and '{}': combine parallel branches before parsing",
                    br.from, br.to
                )));
            }
            let dense = Branch { a, b, r: br.r, l: br.l, c: br.c };
            dense.impedance()?;
            dense_branches.push(dense);
        }

        let mut seen_shunts = BTreeSet::new();
        let mut dense_shunts = Vec::with_capacity(shunts.len());
        for sh in &shunts {
            let node = *index
                .get(&sh.node)
                .ok_or_else(|| NetworkError::Validation(format!("shunt references unknown node '{}'", sh.node)))?;
            if node < boundary.len() {
                return Err(NetworkError::Validation(format!(
                    "shunt on boundary node '{}': boundary nodes must not carry passive shunt elements",
                    sh.node
                )));
            }
            if !seen_shunts.insert(node) {
                return Err(NetworkError::Validation(format!("duplicate shunt on node '{}'", sh.node)));
            }
            let dense = Shunt { node, r: sh.r, l: sh.l, c: sh.c };
            dense.admittance()?;
            dense_shunts.push(dense);
        }

        let net = Netlist {
            names,
            n_boundary: boundary.len(),
            branches: dense_branches,
            shunts: dense_shunts,
            oscillator,
        };
        if !net.is_connected() {
            return Err(NetworkError::Validation("graph is not connected over its branches".into()));
        }
        Ok(net)
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    fn is_connected(&self) -> bool {
        let n = self.dim();
        if n == 1 {
            return true;
        }
        let mut adj = vec![Vec::new(); n];
        for b in &self.branches {
            adj[b.a].push(b.b);
            adj[b.b].push(b.a);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(k) = stack.pop() {
            for &j in &adj[k] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Canonical JSON form (boundary-first node order).
    pub fn to_json(&self) -> String {
        let raw = RawNetlist {
            nodes: self.names.clone(),
            boundary: self.names[..self.n_boundary].to_vec(),
            branches: self
                .branches
                .iter()
                .map(|b| BranchSpec {
                    from: self.names[b.a].clone(),
                    to: self.names[b.b].clone(),
                    r: b.r,
                    l: b.l,
                    c: b.c,
                })
                .collect(),
            shunts: self
                .shunts
                .iter()
                .map(|s| ShuntSpec { node: self.names[s.node].clone(), r: s.r, l: s.l, c: s.c })
                .collect(),
            oscillator: self.oscillator.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("netlist serialization cannot fail")
    }
}

/// Parse and validate a netlist from its JSON document.
pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let raw: RawNetlist = serde_json::from_str(text).map_err(|e| NetworkError::Schema(e.to_string()))?;
    Netlist::new(raw.nodes, raw.boundary, raw.branches, raw.shunts, raw.oscillator)
}

/// Admittance matrix with rational-function entries: off-diagonal (m,n) is
/// -y_mn(s), diagonal m is the shunt admittance plus incident branch sums.
#[derive(Debug, Clone)]
pub struct SymbolicAdmittance {
    dim: usize,
    entries: Vec<RationalFunction>,
}

impl SymbolicAdmittance {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &RationalFunction {
        &self.entries[i * self.dim + j]
    }

    pub(crate) fn from_entries(dim: usize, entries: Vec<RationalFunction>) -> Self {
        assert_eq!(entries.len(), dim * dim);
        SymbolicAdmittance { dim, entries }
    }

    /// Sum of the entries of row `i` as a rational function; equals the shunt
    /// admittance attached to that node (the zero function when none).
    pub fn row_sum(&self, i: usize) -> RationalFunction {
        let mut acc = RationalFunction::zero();
        for j in 0..self.dim {
            acc = acc.add(self.entry(i, j));
        }
        acc
    }

    /// Entrywise evaluation at complex `s`.
    pub fn eval(&self, s: Complex64) -> crate::numerics::Result<ComplexMatrix> {
        let mut m = ComplexMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.set(i, j, self.entry(i, j).eval(s)?);
            }
        }
        Ok(m)
    }
}

/// Assemble the admittance matrix of the netlist, entry by entry.
pub fn assemble_admittance(net: &Netlist) -> Result<SymbolicAdmittance> {
    let n = net.dim();
    let mut entries = vec![RationalFunction::zero(); n * n];
    let mut diag = vec![RationalFunction::zero(); n];

    for sh in &net.shunts {
        diag[sh.node] = diag[sh.node].add(&sh.admittance()?);
    }
    for br in &net.branches {
        let y = br.admittance()?;
        diag[br.a] = diag[br.a].add(&y);
        diag[br.b] = diag[br.b].add(&y);
        entries[br.a * n + br.b] = y.neg();
        entries[br.b * n + br.a] = y.neg();
    }
    for (i, d) in diag.into_iter().enumerate() {
        entries[i * n + i] = d;
    }
    Ok(SymbolicAdmittance { dim: n, entries })
}

/// Evaluate a symbolic admittance at `s` (thin wrapper matching the module's
/// operation list; pole errors propagate).
pub fn eval_admittance(y: &SymbolicAdmittance, s: Complex64) -> crate::numerics::Result<ComplexMatrix> {
    y.eval(s)
}
