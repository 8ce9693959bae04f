//! Time-domain integration of N identical oscillators coupled through a
//! realized Kron-reduced network.
//!
//! The integration runs on the reduced network's physical realization, not the
//! original node equations: interior nodes with purely inductive branches
//! would otherwise force differential-algebraic constraints, and the reduction
//! eliminates them exactly for the supported network classes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::numerics::{RationalFunction, Tolerances};
use crate::oscillator::OscillatorModel;
use crate::reduction::NetworkClass;

#[derive(Debug, Error)]
pub enum SimulatorError {
    #[error("unsupported coupling form: {0}")]
    UnsupportedForm(String),

    #[error("state diverged at t = {t:.3} s (|x| reached {norm:.3e})")]
    Divergence { t: f64, norm: f64 },

    #[error("step size underflow at t = {t:.6} s")]
    StepUnderflow { t: f64 },

    #[error("invalid simulation input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, SimulatorError>;

/// Series R-L branch between two boundary nodes, carrying one current state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlBranch {
    pub a: usize,
    pub b: usize,
    pub r: f64,
    pub l: f64,
}

/// Series R-L shunt from a boundary node to ground, carrying one current state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlShunt {
    pub node: usize,
    pub r: f64,
    pub l: f64,
}

/// Physical realization of a reduced coupling network: an algebraic
/// conductance part plus dynamic R-L branches and shunts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Coupling {
    pub conductance: Option<DMatrix<f64>>,
    pub branches: Vec<RlBranch>,
    pub shunts: Vec<RlShunt>,
}

impl Coupling {
    pub fn state_count(&self) -> usize {
        self.branches.len() + self.shunts.len()
    }

    /// Port admittance matrix of the realization at s = jω; must reproduce
    /// the reduced network's matrix (the realization-fidelity invariant).
    pub fn admittance_at(&self, n: usize, omega: f64) -> DMatrix<Complex64> {
        let mut y = DMatrix::<Complex64>::zeros(n, n);
        if let Some(g) = &self.conductance {
            for i in 0..n {
                for j in 0..n {
                    y[(i, j)] += Complex64::new(g[(i, j)], 0.0);
                }
            }
        }
        for br in &self.branches {
            let adm = 1.0 / Complex64::new(br.r, omega * br.l);
            y[(br.a, br.a)] += adm;
            y[(br.b, br.b)] += adm;
            y[(br.a, br.b)] -= adm;
            y[(br.b, br.a)] -= adm;
        }
        for sh in &self.shunts {
            y[(sh.node, sh.node)] += 1.0 / Complex64::new(sh.r, omega * sh.l);
        }
        y
    }
}

/// A rational admittance y(s) restricted to the realizable one-port forms:
/// a nonnegative constant (resistive) or 1/(R + sL) with R, L >= 0.
enum OnePortForm {
    Conductance(f64),
    SeriesRl { r: f64, l: f64 },
}

fn one_port_form(y: &RationalFunction, what: &str, tol: &Tolerances) -> Result<OnePortForm> {
    // Probe-based reconstruction: y is realizable iff 1/y(s) = R + sL, i.e.
    // z(jω) has constant real part R and imaginary part ω L. This is robust
    // to the unreduced rational forms classification produces.
    let probes = [0.013, 0.17, 1.0, 9.3, 87.0];
    let mut rs = Vec::new();
    let mut ls = Vec::new();
    for w in probes {
        let s = Complex64::new(0.0, w);
        let yv = y
            .eval(s)
            .map_err(|_| SimulatorError::UnsupportedForm(format!("{what} has a pole on the sweep axis")))?;
        if yv.norm() < 1e-300 {
            return Err(SimulatorError::UnsupportedForm(format!("{what} vanishes at omega = {w}")));
        }
        let z = 1.0 / yv;
        rs.push(z.re);
        ls.push(z.im / w);
    }
    let r = rs.iter().sum::<f64>() / rs.len() as f64;
    let l = ls.iter().sum::<f64>() / ls.len() as f64;
    let scale = rs
        .iter()
        .map(|x| x.abs())
        .chain(ls.iter().map(|x| x.abs()))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let consistent = rs.iter().all(|x| (x - r).abs() <= 1e-6 * scale.max(r.abs()))
        && ls.iter().all(|x| (x - l).abs() <= 1e-6 * scale.max(l.abs()));
    if !consistent {
        return Err(SimulatorError::UnsupportedForm(format!(
            "{what} is not a constant or series-RL admittance (capacitive or higher-order line)"
        )));
    }
    let l = if l.abs() <= tol.structural_tol.max(1e-12) * scale { 0.0 } else { l };
    if r < -1e-9 * scale || l < 0.0 {
        return Err(SimulatorError::UnsupportedForm(format!(
            "{what} reconstructs to negative R or L (R = {r:.3e}, L = {l:.3e})"
        )));
    }
    if l == 0.0 {
        if r <= 0.0 {
            return Err(SimulatorError::UnsupportedForm(format!("{what} has a zero impedance")));
        }
        Ok(OnePortForm::Conductance(1.0 / r))
    } else {
        Ok(OnePortForm::SeriesRl { r: r.max(0.0), l })
    }
}

/// Turn a classified network into a physical coupling realization: every
/// reduced off-diagonal weight w becomes a branch with R/w-scaled elements,
/// and uniform shunts become per-node R-L shunts.
pub fn realize_coupling(class: &NetworkClass, tol: &Tolerances) -> Result<Coupling> {
    let n = class.n;
    let lap = class.laplacian.as_ref().ok_or_else(|| {
        SimulatorError::UnsupportedForm("unclassified network has no Laplacian to realize".into())
    })?;
    let y_series = class.y_series.as_ref().ok_or_else(|| {
        SimulatorError::UnsupportedForm("classified network lacks a series admittance".into())
    })?;

    let mut coupling = Coupling::default();
    let wscale = lap.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);

    match one_port_form(y_series, "series admittance", tol)? {
        OnePortForm::Conductance(g0) => {
            coupling.conductance = Some(lap.map(|x| x * g0));
        }
        OnePortForm::SeriesRl { r, l } => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let w = -lap[(i, j)];
                    if w.abs() <= 1e-12 * wscale {
                        continue;
                    }
                    if w < 0.0 {
                        return Err(SimulatorError::UnsupportedForm(format!(
                            "reduced branch ({i},{j}) has negative weight {w:.3e}"
                        )));
                    }
                    coupling.branches.push(RlBranch { a: i, b: j, r: r / w, l: l / w });
                }
            }
        }
    }

    if let Some(y_shunt) = &class.y_shunt {
        if !y_shunt.is_zero() {
            match one_port_form(y_shunt, "shunt admittance", tol)? {
                OnePortForm::Conductance(g0) => {
                    let mut g = coupling
                        .conductance
                        .take()
                        .unwrap_or_else(|| DMatrix::<f64>::zeros(n, n));
                    for i in 0..n {
                        g[(i, i)] += g0;
                    }
                    coupling.conductance = Some(g);
                }
                OnePortForm::SeriesRl { r, l } => {
                    for i in 0..n {
                        coupling.shunts.push(RlShunt { node: i, r, l });
                    }
                }
            }
        }
    }
    Ok(coupling)
}

/// N identical oscillators plus the coupling realization. State layout:
/// per-circuit linear states first (circuit-major), then branch currents,
/// then shunt currents.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    pub n: usize,
    pub osc: OscillatorModel,
    pub coupling: Coupling,
}

impl CoupledSystem {
    pub fn new(n: usize, osc: OscillatorModel, coupling: Coupling) -> Result<Self> {
        if n == 0 {
            return Err(SimulatorError::InvalidInput("need at least one circuit".into()));
        }
        if let Some(g) = &coupling.conductance {
            if g.nrows() != n || g.ncols() != n {
                return Err(SimulatorError::InvalidInput(format!(
                    "conductance matrix is {}x{}, expected {n}x{n}",
                    g.nrows(),
                    g.ncols()
                )));
            }
        }
        for br in &coupling.branches {
            if br.a >= n || br.b >= n || br.l <= 0.0 {
                return Err(SimulatorError::InvalidInput("branch index/inductance out of range".into()));
            }
        }
        for sh in &coupling.shunts {
            if sh.node >= n || sh.l <= 0.0 {
                return Err(SimulatorError::InvalidInput("shunt index/inductance out of range".into()));
            }
        }
        Ok(CoupledSystem { n, osc, coupling })
    }

    pub fn circuit_order(&self) -> usize {
        self.osc.linear.order()
    }

    pub fn state_len(&self) -> usize {
        self.n * self.circuit_order() + self.coupling.state_count()
    }

    pub fn state_labels(&self) -> Vec<String> {
        let mut labels = Vec::with_capacity(self.state_len());
        for j in 0..self.n {
            for name in &self.osc.linear.state_labels {
                labels.push(format!("{name}[{}]", j + 1));
            }
        }
        for br in &self.coupling.branches {
            labels.push(format!("i_branch[{}-{}]", br.a + 1, br.b + 1));
        }
        for sh in &self.coupling.shunts {
            labels.push(format!("i_shunt[{}]", sh.node + 1));
        }
        labels
    }

    /// Deterministic spread of initial terminal voltages:
    /// circuit j starts at v = 0.1 + 0.01 (j-1), everything else at zero.
    pub fn default_initial_state(&self) -> DVector<f64> {
        let mut x = DVector::zeros(self.state_len());
        let ns = self.circuit_order();
        for j in 0..self.n {
            x[j * ns] = 0.1 + 0.01 * j as f64;
        }
        x
    }

    pub fn terminal_voltages(&self, x: &DVector<f64>) -> Vec<f64> {
        let ns = self.circuit_order();
        (0..self.n)
            .map(|j| {
                let mut v = 0.0;
                for k in 0..ns {
                    v += self.osc.linear.c[k] * x[j * ns + k];
                }
                v
            })
            .collect()
    }

    pub fn rhs(&self, _t: f64, x: &DVector<f64>, dx: &mut DVector<f64>) {
        let ns = self.circuit_order();
        let n = self.n;
        let v = self.terminal_voltages(x);

        // Net current injected into the coupling network per circuit.
        let mut i_net = vec![0.0f64; n];
        if let Some(g) = &self.coupling.conductance {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += g[(i, j)] * v[j];
                }
                i_net[i] += acc;
            }
        }
        let base = n * ns;
        for (k, br) in self.coupling.branches.iter().enumerate() {
            let ib = x[base + k];
            i_net[br.a] += ib;
            i_net[br.b] -= ib;
            dx[base + k] = ((v[br.a] - v[br.b]) - br.r * ib) / br.l;
        }
        let sbase = base + self.coupling.branches.len();
        for (k, sh) in self.coupling.shunts.iter().enumerate() {
            let is = x[sbase + k];
            i_net[sh.node] += is;
            dx[sbase + k] = (v[sh.node] - sh.r * is) / sh.l;
        }

        // Circuit dynamics: x' = A x + b_inj i + b_g i_g with i_g = -g(v).
        let lin = &self.osc.linear;
        for j in 0..n {
            let i_g = -self.osc.g.eval(v[j]);
            for r in 0..ns {
                let mut acc = 0.0;
                for k in 0..ns {
                    acc += lin.a[(r, k)] * x[j * ns + k];
                }
                dx[j * ns + r] = acc + lin.b_inj[r] * i_net[j] + lin.b_g[r] * i_g;
            }
        }
    }
}

/// Voltage synchronization error ‖Πv‖₂ = ‖v - mean(v)·1‖₂.
pub fn sync_error(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>().sqrt()
}

/// The same quantity through the pairwise identity
/// sqrt((1/2N) Σ_{j,k} (v_j - v_k)²); kept as an independent route.
pub fn sync_error_pairwise(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mut acc = 0.0;
    for &a in v {
        for &b in v {
            acc += (a - b) * (a - b);
        }
    }
    (acc / (2.0 * n)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Rk4 { dt: f64 },
    Rk45 { rtol: f64, atol: f64 },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 { .. } => "rk4",
            Method::Rk45 { .. } => "rk45",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub t_end: f64,
    pub method: Method,
    /// Number of equally spaced output samples, including t = 0.
    pub output_points: usize,
    /// Abort when any state magnitude exceeds this bound.
    pub divergence_limit: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            t_end: 200.0,
            method: Method::Rk45 { rtol: 1e-6, atol: 1e-9 },
            output_points: 2001,
            divergence_limit: 1e6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub voltages: Vec<Vec<f64>>,
    pub sync_error: Vec<f64>,
}

impl Trajectory {
    pub fn csv(&self) -> String {
        let n = self.voltages.first().map(|v| v.len()).unwrap_or(0);
        let mut out = String::from("t");
        for j in 1..=n {
            out.push_str(&format!(",v_{j}"));
        }
        out.push_str(",sync_error\n");
        for (k, t) in self.times.iter().enumerate() {
            out.push_str(&format!("{:.16e}", t));
            for v in &self.voltages[k] {
                out.push_str(&format!(",{:.16e}", v));
            }
            out.push_str(&format!(",{:.16e}\n", self.sync_error[k]));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SyncSummary {
    pub final_error: f64,
    pub initial_error: f64,
    pub synchronized: bool,
    pub threshold: f64,
    pub t_end: f64,
    pub method: String,
    pub max_tail_error: f64,
}

/// Synchronization verdict: the relative error must stay below the threshold
/// over the whole second half of the run (chaotic errors oscillate, a single
/// end-point reading could alias through a transient). Exactly synchronized
/// starts (zero initial error) are judged against an absolute 1e-10 floor.
pub fn assess_sync(traj: &Trajectory, threshold: f64, method: &Method) -> SyncSummary {
    let t_end = traj.times.last().copied().unwrap_or(0.0);
    let initial_error = traj.sync_error.first().copied().unwrap_or(0.0);
    let final_error = traj.sync_error.last().copied().unwrap_or(0.0);
    let half = t_end / 2.0;
    let max_tail_error = traj
        .times
        .iter()
        .zip(traj.sync_error.iter())
        .filter(|(t, _)| **t >= half)
        .map(|(_, e)| *e)
        .fold(0.0f64, f64::max);
    let synchronized = if initial_error <= 1e-12 {
        max_tail_error <= 1e-10
    } else {
        max_tail_error <= threshold * initial_error
    };
    SyncSummary {
        final_error,
        initial_error,
        synchronized,
        threshold,
        t_end,
        method: method.name().into(),
        max_tail_error,
    }
}

// Dormand-Prince 5(4) coefficients.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate the coupled system, sampling the trajectory at
/// `output_points` equally spaced times (steps are clamped to land on them).
pub fn integrate(sys: &CoupledSystem, x0: &DVector<f64>, opts: &SimOptions) -> Result<Trajectory> {
    if x0.len() != sys.state_len() {
        return Err(SimulatorError::InvalidInput(format!(
            "initial state has {} entries, system expects {}",
            x0.len(),
            sys.state_len()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(SimulatorError::InvalidInput("initial state has non-finite entries".into()));
    }
    if !opts.t_end.is_finite() || opts.t_end <= 0.0 {
        return Err(SimulatorError::InvalidInput("t_end must be positive".into()));
    }
    if opts.output_points < 2 {
        return Err(SimulatorError::InvalidInput("need at least 2 output points".into()));
    }

    let out_times: Vec<f64> = (0..opts.output_points)
        .map(|k| opts.t_end * k as f64 / (opts.output_points - 1) as f64)
        .collect();

    match opts.method {
        Method::Rk4 { dt } => integrate_rk4(sys, x0, opts, &out_times, dt),
        Method::Rk45 { rtol, atol } => integrate_rk45(sys, x0, opts, &out_times, rtol, atol),
    }
}

fn record(sys: &CoupledSystem, traj: &mut Trajectory, t: f64, x: &DVector<f64>) {
    let v = sys.terminal_voltages(x);
    traj.times.push(t);
    traj.sync_error.push(sync_error(&v));
    traj.voltages.push(v);
    traj.states.push(x.clone());
}

fn check_divergence(t: f64, x: &DVector<f64>, limit: f64) -> Result<()> {
    let norm = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !norm.is_finite() || norm > limit {
        return Err(SimulatorError::Divergence { t, norm });
    }
    Ok(())
}

fn rk4_step(sys: &CoupledSystem, t: f64, x: &DVector<f64>, h: f64, scratch: &mut [DVector<f64>; 4]) -> DVector<f64> {
    let [k1, k2, k3, k4] = scratch;
    sys.rhs(t, x, k1);
    let x2 = x + &*k1 * (h / 2.0);
    sys.rhs(t + h / 2.0, &x2, k2);
    let x3 = x + &*k2 * (h / 2.0);
    sys.rhs(t + h / 2.0, &x3, k3);
    let x4 = x + &*k3 * h;
    sys.rhs(t + h, &x4, k4);
    x + (&*k1 + &*k2 * 2.0 + &*k3 * 2.0 + &*k4) * (h / 6.0)
}

fn integrate_rk4(
    sys: &CoupledSystem,
    x0: &DVector<f64>,
    opts: &SimOptions,
    out_times: &[f64],
    dt: f64,
) -> Result<Trajectory> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(SimulatorError::InvalidInput("rk4 step must be positive".into()));
    }
    let mut traj = Trajectory { times: vec![], states: vec![], voltages: vec![], sync_error: vec![] };
    let mut x = x0.clone();
    let mut scratch = [
        DVector::zeros(x.len()),
        DVector::zeros(x.len()),
        DVector::zeros(x.len()),
        DVector::zeros(x.len()),
    ];
    record(sys, &mut traj, 0.0, &x);
    for w in out_times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let span = t1 - t0;
        let nsub = (span / dt).ceil().max(1.0) as usize;
        let h = span / nsub as f64;
        let mut t = t0;
        for _ in 0..nsub {
            x = rk4_step(sys, t, &x, h, &mut scratch);
            t += h;
            check_divergence(t, &x, opts.divergence_limit)?;
        }
        record(sys, &mut traj, t1, &x);
    }
    Ok(traj)
}

#[allow(clippy::too_many_arguments)]
fn integrate_rk45(
    sys: &CoupledSystem,
    x0: &DVector<f64>,
    opts: &SimOptions,
    out_times: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Trajectory> {
    if !(rtol.is_finite() && atol.is_finite()) || rtol <= 0.0 || atol <= 0.0 {
        return Err(SimulatorError::InvalidInput("rk45 tolerances must be positive".into()));
    }
    let nstate = x0.len();
    let mut traj = Trajectory { times: vec![], states: vec![], voltages: vec![], sync_error: vec![] };
    let mut x = x0.clone();
    let mut t = 0.0f64;
    let mut h = (opts.t_end / 1e4).clamp(1e-9, 1e-3);
    let mut k: Vec<DVector<f64>> = (0..7).map(|_| DVector::zeros(nstate)).collect();

    record(sys, &mut traj, 0.0, &x);
    let mut next_out = 1usize;
    let max_steps = 50_000_000usize;
    let mut steps = 0usize;

    while next_out < out_times.len() {
        steps += 1;
        if steps > max_steps {
            return Err(SimulatorError::StepUnderflow { t });
        }
        let target = out_times[next_out];
        let mut clamped = false;
        let mut h_try = h;
        if t + h_try >= target {
            h_try = target - t;
            clamped = true;
        }
        if h_try < 1e-14 * t.max(1.0) {
            return Err(SimulatorError::StepUnderflow { t });
        }

        // Seven Dormand-Prince stages; the FSAL reuse is not worth the
        // bookkeeping at these problem sizes.
        sys.rhs(t, &x, &mut k[0]);
        for stage in 1..7 {
            let mut xs = x.clone();
            for (j, kj) in k.iter().take(stage).enumerate() {
                let a = DP_A[stage][j];
                if a != 0.0 {
                    xs += kj * (a * h_try);
                }
            }
            let (head, tail) = k.split_at_mut(stage);
            let _ = head;
            sys.rhs(t + DP_C[stage] * h_try, &xs, &mut tail[0]);
        }

        let mut x5 = x.clone();
        let mut x4 = x.clone();
        for (j, kj) in k.iter().enumerate() {
            if DP_B5[j] != 0.0 {
                x5 += kj * (DP_B5[j] * h_try);
            }
            if DP_B4[j] != 0.0 {
                x4 += kj * (DP_B4[j] * h_try);
            }
        }

        // Scaled RMS error of the embedded pair.
        let mut err_acc = 0.0f64;
        for i in 0..nstate {
            let sc = atol + rtol * x[i].abs().max(x5[i].abs());
            let e = (x5[i] - x4[i]) / sc;
            err_acc += e * e;
        }
        let err = (err_acc / nstate as f64).sqrt();

        if err <= 1.0 {
            t += h_try;
            x = x5;
            check_divergence(t, &x, opts.divergence_limit)?;
            if clamped && (t - target).abs() <= 1e-12 * target.max(1.0) {
                record(sys, &mut traj, target, &x);
                next_out += 1;
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        let h_new = h_try * factor;
        h = if clamped && err <= 1.0 { h.max(h_new).min(5.0 * h) } else { h_new };
    }
    Ok(traj)
}
