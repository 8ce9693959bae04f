//! Nonlinear circuit model: passive linear subsystem (port impedance z_osc)
//! in parallel with a voltage-dependent current source i_g = -g(v), where g is
//! piecewise linear with a finite slope bound. Ships the Chua preset.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::network::{OscParams, OscillatorConfig};
use crate::numerics::{ComplexMatrix, NumericsError, Polynomial, RationalFunction};

#[derive(Debug, Error)]
pub enum OscillatorError {
    #[error("invalid oscillator parameters: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, OscillatorError>;

/// Odd-symmetric continuous piecewise-linear conductance with two positive
/// breakpoints and three slopes (inner, middle, outer).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearConductance {
    breakpoints: [f64; 2],
    slopes: [f64; 3],
}

impl PiecewiseLinearConductance {
    pub fn new(breakpoints: [f64; 2], slopes: [f64; 3]) -> Result<Self> {
        let [p0, p1] = breakpoints;
        if !(p0 > 0.0 && p1 > p0) {
            return Err(OscillatorError::InvalidParams(
                "breakpoints must satisfy 0 < phi_0 < phi_1".into(),
            ));
        }
        if breakpoints.iter().chain(slopes.iter()).any(|x| !x.is_finite()) {
            return Err(OscillatorError::InvalidParams("non-finite g parameter".into()));
        }
        Ok(PiecewiseLinearConductance { breakpoints, slopes })
    }

    pub fn breakpoints(&self) -> [f64; 2] {
        self.breakpoints
    }

    pub fn slopes(&self) -> [f64; 3] {
        self.slopes
    }

    /// g(v); continuity at the breakpoints holds exactly because each segment
    /// accumulates from the previous one.
    pub fn eval(&self, v: f64) -> f64 {
        let [p0, p1] = self.breakpoints;
        let [s0, s1, s2] = self.slopes;
        let a = v.abs();
        let mag = if a <= p0 {
            s0 * a
        } else if a <= p1 {
            s0 * p0 + s1 * (a - p0)
        } else {
            s0 * p0 + s1 * (p1 - p0) + s2 * (a - p1)
        };
        mag * v.signum()
    }

    /// σ = max |slope|, the differential L2 gain bound of the source.
    pub fn slope_bound(&self) -> f64 {
        self.slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }
}

/// State-space realization of the linear subsystem:
/// `x' = A x + b_inj * i + b_g * i_g`, `v = c x`, where `i` is the current the
/// circuit injects into the coupling network and `i_g` the source current.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSubsystem {
    pub a: DMatrix<f64>,
    pub b_inj: DVector<f64>,
    pub b_g: DVector<f64>,
    pub c: RowDVector<f64>,
    pub state_labels: Vec<String>,
}

impl LinearSubsystem {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// Port impedance c (sI - A)^{-1} b_g at complex s: the state-space
    /// route to z_osc, independent of the symbolic derivation.
    pub fn port_impedance(&self, s: Complex64) -> Result<Complex64> {
        let n = self.order();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
            diag - Complex64::new(self.a[(i, j)], 0.0)
        });
        let rhs = DVector::from_fn(n, |i, _| Complex64::new(self.b_g[i], 0.0));
        let x = ComplexMatrix::from_dmatrix(m)?.solve_vector(&rhs)?;
        let mut v = Complex64::new(0.0, 0.0);
        for i in 0..n {
            v += Complex64::new(self.c[i], 0.0) * x[i];
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorModel {
    pub linear: LinearSubsystem,
    pub g: PiecewiseLinearConductance,
    pub z_osc: RationalFunction,
    pub sigma: f64,
}

/// Stock Chua parameter set.
pub const CHUA_R: f64 = 10.0 / 7.0;
pub const CHUA_L: f64 = 1.0 / 7.0;
pub const CHUA_CA: f64 = 1.0 / 9.0;
pub const CHUA_CB: f64 = 1.0;
pub const CHUA_SLOPES: [f64; 3] = [-0.8, -0.5, 0.8];
pub const CHUA_BREAKPOINTS: [f64; 2] = [1.0, 14.0];

/// Build the 3-state Chua realization: states (v_a across C_a at the terminal,
/// v_b across C_b, i_L through L) with
///   C_a v_a' = (v_b - v_a)/R - i + i_g,
///   C_b v_b' = (v_a - v_b)/R - i_L,
///   L   i_L' = v_b.
///
/// z_osc is derived from the topology (C_a parallel to [R in series with
/// (C_b parallel L)]), giving
///   z_osc = (R L C_b s^2 + L s + R) / (R L C_a C_b s^3 + (L C_a + L C_b) s^2 + R C_a s + 1),
/// and is cross-checked at runtime against the state-space port impedance.
/// The widely circulated closed form with a (C_a^2 + L C_b + L C_a) s^2
/// denominator term and an extra s C_a numerator factor is dimensionally
/// inconsistent and is NOT used; see the crate README.
#[allow(clippy::too_many_arguments)]
pub fn chua_preset(
    r: f64,
    l: f64,
    c_a: f64,
    c_b: f64,
    slopes: [f64; 3],
    breakpoints: [f64; 2],
) -> Result<OscillatorModel> {
    if r <= 0.0 || l <= 0.0 || c_a <= 0.0 || c_b <= 0.0 {
        return Err(OscillatorError::InvalidParams(
            "component values R, L, C_a, C_b must be positive".into(),
        ));
    }
    let g = PiecewiseLinearConductance::new(breakpoints, slopes)?;

    let a = DMatrix::from_row_slice(
        3,
        3,
        &[
            -1.0 / (r * c_a),
            1.0 / (r * c_a),
            0.0,
            1.0 / (r * c_b),
            -1.0 / (r * c_b),
            -1.0 / c_b,
            0.0,
            1.0 / l,
            0.0,
        ],
    );
    let b_g = DVector::from_row_slice(&[1.0 / c_a, 0.0, 0.0]);
    let b_inj = DVector::from_row_slice(&[-1.0 / c_a, 0.0, 0.0]);
    let c = RowDVector::from_row_slice(&[1.0, 0.0, 0.0]);
    let linear = LinearSubsystem {
        a,
        b_inj,
        b_g,
        c,
        state_labels: vec!["v_a".into(), "v_b".into(), "i_L".into()],
    };

    // Minimal-degree z_osc from the closed-form topology reduction.
    let z_osc = RationalFunction::new(
        Polynomial::new(vec![r, l, r * l * c_b]),
        Polynomial::new(vec![1.0, r * c_a, l * c_a + l * c_b, r * l * c_a * c_b]),
    )?;

    // Cross-checks against two independent routes: the element-wise parallel
    // combination (unreduced rational arithmetic) and the state-space port
    // impedance of the realization above.
    let z_l = RationalFunction::from_poly(Polynomial::new(vec![0.0, l]));
    let z_cb = RationalFunction::new(Polynomial::one(), Polynomial::new(vec![0.0, c_b]))?;
    let z_ca = RationalFunction::new(Polynomial::one(), Polynomial::new(vec![0.0, c_a]))?;
    let assembled = RationalFunction::constant(r).add(&z_l.parallel(&z_cb)?).parallel(&z_ca)?;
    for w in [0.37, 1.0, 5.11] {
        let sv = Complex64::new(0.0, w);
        let closed = z_osc.eval(sv)?;
        let topo = assembled.eval(sv)?;
        let ss = linear.port_impedance(sv)?;
        let scale = ss.norm().max(1e-300);
        if (closed - topo).norm() > 1e-8 * scale || (closed - ss).norm() > 1e-8 * scale {
            return Err(OscillatorError::InvalidParams(format!(
                "impedance routes disagree at omega = {w}: closed {closed}, assembled {topo}, state-space {ss}"
            )));
        }
    }

    let sigma = g.slope_bound();
    Ok(OscillatorModel { linear, g, z_osc, sigma })
}

/// Chua preset with the stock parameter set.
pub fn chua_default() -> OscillatorModel {
    chua_preset(CHUA_R, CHUA_L, CHUA_CA, CHUA_CB, CHUA_SLOPES, CHUA_BREAKPOINTS)
        .expect("stock Chua parameters are valid")
}

/// Build an oscillator from a netlist's oscillator block. The "chua" preset
/// uses stock parameters unless overridden; "custom" requires explicit
/// parameters (same linear topology, user-supplied g).
pub fn from_config(cfg: &OscillatorConfig) -> Result<OscillatorModel> {
    match cfg.preset.as_str() {
        "chua" => match &cfg.params {
            None => Ok(chua_default()),
            Some(p) => chua_preset(p.r, p.l, p.c_a, p.c_b, p.slopes, p.breakpoints),
        },
        "custom" => {
            let p: &OscParams = cfg.params.as_ref().ok_or_else(|| {
                OscillatorError::InvalidParams("custom preset requires explicit params".into())
            })?;
            chua_preset(p.r, p.l, p.c_a, p.c_b, p.slopes, p.breakpoints)
        }
        other => Err(OscillatorError::InvalidParams(format!("unknown preset '{other}'"))),
    }
}
