//! Small-gain synchronization certificates: scalar loop gains over the
//! Laplacian spectrum, an H-infinity sweep with golden-section refinement, a
//! matrix-norm oracle used by the tests, and the coupling-strength surface.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{poly_roots, ComplexMatrix, NumericsError, RationalFunction};
use crate::oscillator::OscillatorModel;
use crate::reduction::{NetworkClass, NetworkKind, ReductionError};

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("degenerate loop: 1 + a*b is identically zero")]
    DegenerateLoop,

    #[error("unbounded gain: transfer function is improper (numerator degree exceeds denominator degree)")]
    UnboundedGain,

    #[error("network class is unclassified: {0}")]
    Unclassified(String),

    #[error("matrix is not normal or lacks zero row sums: {0}")]
    NotNormal(String),

    #[error("invalid sweep configuration: {0}")]
    InvalidSweep(String),

    #[error(transparent)]
    Numerics(#[from] NumericsError),

    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

pub type Result<T> = std::result::Result<T, CertificateError>;

/// Frequency-sweep configuration for the numeric sup over ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    pub refine_iters: usize,
    pub refine_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            omega_min: 1e-3,
            omega_max: 1e3,
            points: 4000,
            refine_iters: 60,
            refine_tol: 1e-8,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_min > 0.0 && self.omega_max > self.omega_min) {
            return Err(CertificateError::InvalidSweep(
                "need 0 < omega_min < omega_max".into(),
            ));
        }
        if self.points < 100 {
            return Err(CertificateError::InvalidSweep("need at least 100 sweep points".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = (self.omega_min.ln(), self.omega_max.ln());
        (0..self.points)
            .map(|k| (a + (b - a) * k as f64 / (self.points - 1) as f64).exp())
            .collect()
    }
}

/// Scalar linear fractional transformation `F(a, b) = a / (1 + a b)`.
pub fn lft_scalar(a: &RationalFunction, b: &RationalFunction) -> Result<RationalFunction> {
    let num = a.num() * b.den();
    let den = &(a.den() * b.den()) + &(a.num() * b.num());
    if den.is_zero() {
        return Err(CertificateError::DegenerateLoop);
    }
    Ok(RationalFunction::new(num, den)?)
}

/// Equivalent impedance of z_osc in parallel with the shunt: computed as
/// `1/(1/z_osc + y_shunt)` so the shuntless case (y_shunt = 0) degenerates to
/// z_osc itself.
pub fn z_eq(z_osc: &RationalFunction, y_shunt: &RationalFunction) -> Result<RationalFunction> {
    if y_shunt.is_zero() {
        return Ok(z_osc.clone());
    }
    Ok(z_osc.reciprocal()?.add(y_shunt).reciprocal()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Marginal => "marginal",
            Stability::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone)]
pub struct HinfResult {
    pub peak: f64,
    pub omega_star: f64,
    pub stability: Stability,
    /// Peak found at a sweep endpoint: the numeric sup may under-approximate
    /// the true sup over all of ω, so certificates must not claim "pass".
    pub at_boundary: bool,
    /// |Im| of a denominator root sitting on the imaginary axis, if any.
    pub pole_on_axis: Option<f64>,
}

/// Pole verdict after cancelling removable numerator/denominator root pairs
/// (products are never symbolically reduced, so spurious pairs are expected).
fn stability_verdict(h: &RationalFunction) -> Result<(Stability, Option<f64>)> {
    if h.den().degree() == 0 {
        return Ok((Stability::Stable, None));
    }
    let den_roots = poly_roots(h.den())?;
    let num_roots = if h.num().is_zero() || h.num().degree() == 0 {
        Vec::new()
    } else {
        poly_roots(h.num())?
    };
    let mut used = vec![false; num_roots.len()];
    let mut poles = Vec::new();
    'next: for d in den_roots {
        for (k, n) in num_roots.iter().enumerate() {
            if !used[k] && (n - d).norm() <= 1e-7 * d.norm().max(1.0) {
                used[k] = true;
                continue 'next;
            }
        }
        poles.push(d);
    }
    let scale = poles.iter().map(|p| p.norm()).fold(1.0f64, f64::max);
    let thr = 1e-9 * scale;
    let mut verdict = Stability::Stable;
    let mut axis_pole = None;
    for p in &poles {
        if p.re > thr {
            return Ok((Stability::Unstable, None));
        }
        if p.re.abs() <= thr {
            verdict = Stability::Marginal;
            axis_pole = Some(p.im.abs());
        }
    }
    Ok((verdict, axis_pole))
}

fn magnitude_at(h: &RationalFunction, omega: f64) -> Option<f64> {
    h.eval(Complex64::new(0.0, omega)).ok().map(|v| v.norm())
}

/// Peak of |h(jω)| over a log-spaced grid, refined by golden-section search
/// around the grid argmax, plus the pole-stability verdict.
pub fn hinf_scalar(h: &RationalFunction, cfg: &SweepConfig) -> Result<HinfResult> {
    cfg.validate()?;
    if h.is_zero() {
        return Ok(HinfResult {
            peak: 0.0,
            omega_star: 0.0,
            stability: Stability::Stable,
            at_boundary: false,
            pole_on_axis: None,
        });
    }
    if h.num().degree() > h.den().degree() {
        return Err(CertificateError::UnboundedGain);
    }
    let (stability, pole_on_axis) = stability_verdict(h)?;

    if h.num().degree() == 0 && h.den().degree() == 0 {
        // Constant transfer function: the sup is attained everywhere.
        let peak = h.eval(Complex64::new(0.0, 1.0))?.norm();
        return Ok(HinfResult { peak, omega_star: 0.0, stability, at_boundary: false, pole_on_axis });
    }

    let grid = cfg.grid();
    let mut best_k = None;
    let mut best = f64::NEG_INFINITY;
    for (k, &w) in grid.iter().enumerate() {
        if let Some(m) = magnitude_at(h, w) {
            if m > best {
                best = m;
                best_k = Some(k);
            }
        }
    }
    let k = best_k.ok_or_else(|| {
        CertificateError::InvalidSweep("every sweep point sits on a pole".into())
    })?;
    let at_boundary = k == 0 || k == grid.len() - 1;

    // Golden-section refinement in log-frequency inside the bracketing cell;
    // stops once the log-interval shrinks below refine_tol (relative in ω).
    let lo = grid[k.saturating_sub(1)].ln();
    let hi = grid[(k + 1).min(grid.len() - 1)].ln();
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let eval_log = |x: f64| magnitude_at(h, x.exp()).unwrap_or(f64::NEG_INFINITY);
    let mut f1 = eval_log(x1);
    let mut f2 = eval_log(x2);
    let mut peak = best;
    let mut x_star = grid[k].ln();
    for _ in 0..cfg.refine_iters {
        if f1 > peak {
            peak = f1;
            x_star = x1;
        }
        if f2 > peak {
            peak = f2;
            x_star = x2;
        }
        if b - a <= cfg.refine_tol {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = eval_log(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = eval_log(x1);
        }
    }
    if f1 > peak {
        peak = f1;
        x_star = x1;
    }
    if f2 > peak {
        peak = f2;
        x_star = x2;
    }
    Ok(HinfResult { peak, omega_star: x_star.exp(), stability, at_boundary, pole_on_axis })
}

/// One certificate mode: a nonzero Laplacian eigenvalue and its loop gain.
#[derive(Debug, Clone)]
pub struct ModeGain {
    pub lambda: f64,
    pub peak: f64,
    pub omega_star: f64,
    pub stability: Stability,
    pub at_boundary: bool,
    pub pole_on_axis: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Margin below one but a loop pole sits on the imaginary axis.
    Conditional,
    /// Margin below one but the sweep peaked at an endpoint, so the numeric
    /// sup may under-approximate the true one.
    InconclusiveBoundary,
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Pass => 0,
            _ => 1,
        }
    }

    fn json_value(&self) -> serde_json::Value {
        match self {
            Verdict::Pass => serde_json::Value::Bool(true),
            Verdict::Fail => serde_json::Value::Bool(false),
            Verdict::Conditional => serde_json::Value::String("conditional".into()),
            Verdict::InconclusiveBoundary => serde_json::Value::String("inconclusive-boundary".into()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GainReport {
    pub sigma: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub modes: Vec<ModeGain>,
    /// Indices into `modes` that attain the maximal peak within 1e-9 relative.
    pub argmax_modes: Vec<usize>,
    pub warnings: Vec<String>,
}

impl GainReport {
    pub fn pass(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "pass": self.verdict.json_value(),
            "margin": self.margin,
            "sigma": self.sigma,
            "modes": self.modes.iter().map(|m| serde_json::json!({
                "lambda": m.lambda,
                "peak": m.peak,
                "omega_star": m.omega_star,
                "stability": m.stability.as_str(),
            })).collect::<Vec<_>>(),
            "argmax_modes": self.argmax_modes,
            "warnings": self.warnings,
        })
    }
}

/// Nonzero modes to certify: every nonzero eigenvalue for the uniform kinds,
/// the single eigenvalue N for the homogeneous kinds (the complete-graph
/// spectrum is {0, N, ..., N}).
fn certificate_modes(class: &NetworkClass) -> Vec<f64> {
    if class.kind.is_homogeneous() {
        if class.n >= 2 {
            vec![class.n as f64]
        } else {
            vec![]
        }
    } else {
        class
            .eigenvalues
            .iter()
            .copied()
            .filter(|l| *l > 1e-9 * class.eigenvalues.last().copied().unwrap_or(1.0).max(1.0))
            .collect()
    }
}

/// Evaluate the synchronization certificate for a classified network.
pub fn certify(class: &NetworkClass, osc: &OscillatorModel, cfg: &SweepConfig) -> Result<GainReport> {
    cfg.validate()?;
    if class.kind == NetworkKind::Unclassified {
        return Err(CertificateError::Unclassified(
            class.reason.clone().unwrap_or_else(|| "no reason recorded".into()),
        ));
    }
    let front_end = match &class.y_shunt {
        Some(ysh) => z_eq(&osc.z_osc, ysh)?,
        None => osc.z_osc.clone(),
    };
    let modes = certificate_modes(class);
    let mut gains = Vec::with_capacity(modes.len());
    let mut warnings = Vec::new();
    for lambda in modes {
        let y_series = class.y_series.as_ref().ok_or_else(|| {
            CertificateError::Unclassified("classified network lacks a series admittance".into())
        })?;
        let b = y_series.scale(lambda);
        let h = lft_scalar(&front_end, &b)?;
        let res = hinf_scalar(&h, cfg)?;
        if res.at_boundary {
            warnings.push(format!(
                "mode lambda = {lambda}: sweep peak at the grid boundary (omega = {})",
                res.omega_star
            ));
        }
        if let Some(w) = res.pole_on_axis {
            warnings.push(format!("mode lambda = {lambda}: loop pole on the imaginary axis near omega = {w}"));
        }
        if res.stability == Stability::Unstable {
            warnings.push(format!("mode lambda = {lambda}: loop has a pole with positive real part"));
        }
        gains.push(ModeGain {
            lambda,
            peak: res.peak,
            omega_star: res.omega_star,
            stability: res.stability,
            at_boundary: res.at_boundary,
            pole_on_axis: res.pole_on_axis,
        });
    }

    let max_peak = gains.iter().map(|g| g.peak).fold(0.0f64, f64::max);
    let margin = osc.sigma * max_peak;
    let argmax_modes = gains
        .iter()
        .enumerate()
        .filter(|(_, g)| (g.peak - max_peak).abs() <= 1e-9 * max_peak.max(f64::MIN_POSITIVE))
        .map(|(k, _)| k)
        .collect();

    let any_unstable = gains.iter().any(|g| g.stability == Stability::Unstable);
    let any_marginal = gains.iter().any(|g| g.stability == Stability::Marginal);
    let any_boundary = gains.iter().any(|g| g.at_boundary);
    let verdict = if margin >= 1.0 || any_unstable {
        Verdict::Fail
    } else if any_boundary {
        Verdict::InconclusiveBoundary
    } else if any_marginal {
        Verdict::Conditional
    } else {
        Verdict::Pass
    };

    Ok(GainReport { sigma: osc.sigma, margin, verdict, modes: gains, argmax_modes, warnings })
}

/// Orthonormal basis of the subspace orthogonal to the all-ones vector
/// (Helmert construction), as an N x (N-1) real matrix.
fn ones_complement_basis(n: usize) -> DMatrix<f64> {
    let mut v = DMatrix::<f64>::zeros(n, n - 1);
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            v[(i, k - 1)] = 1.0 / norm;
        }
        v[(k, k - 1)] = -(k as f64) / norm;
    }
    v
}

/// Largest singular value of `(I + z Y)^{-1} z` restricted to the subspace
/// orthogonal to the all-ones vector, at a single evaluated frequency.
pub fn matrix_gain_at(y: &DMatrix<Complex64>, z_osc: Complex64, tol: f64) -> Result<f64> {
    let n = y.nrows();
    if n < 2 {
        return Ok(0.0);
    }
    let scale = y.iter().fold(0.0f64, |a, v| a.max(v.norm())).max(f64::MIN_POSITIVE);
    let normal_defect = (y * y.adjoint() - y.adjoint() * y).norm();
    if normal_defect > tol * scale * scale * n as f64 {
        return Err(CertificateError::NotNormal(format!(
            "||YY* - Y*Y|| = {normal_defect:.3e}"
        )));
    }
    let mut max_row_sum = 0.0f64;
    for i in 0..n {
        let rs: Complex64 = (0..n).map(|j| y[(i, j)]).sum();
        max_row_sum = max_row_sum.max(rs.norm());
    }
    if max_row_sum > tol * scale * n as f64 {
        return Err(CertificateError::NotNormal(format!(
            "row sums are not zero (max {max_row_sum:.3e})"
        )));
    }

    let loop_m = DMatrix::<Complex64>::identity(n, n) + y.map(|v| v * z_osc);
    let rhs = DMatrix::<Complex64>::identity(n, n).map(|v| v * z_osc);
    let f = ComplexMatrix::from_dmatrix(loop_m)?.solve_dmatrix(&rhs)?;
    let v = ones_complement_basis(n).map(|x| Complex64::new(x, 0.0));
    let restricted = v.transpose() * f * &v;
    Ok(ComplexMatrix::from_dmatrix(restricted)?.svd_max())
}

/// Sup over the grid of the deflated matrix gain; the independent oracle for
/// the scalar per-mode certificate gains.
pub fn matrix_gain_oracle<F>(y_at: F, z_osc: &RationalFunction, grid: &[f64], tol: f64) -> Result<f64>
where
    F: Fn(f64) -> DMatrix<Complex64>,
{
    let mut sup = 0.0f64;
    for &w in grid {
        let z = z_osc.eval(Complex64::new(0.0, w))?;
        sup = sup.max(matrix_gain_at(&y_at(w), z, tol)?);
    }
    Ok(sup)
}

/// One cell of the coupling-strength surface.
#[derive(Debug, Clone, Copy)]
pub struct XiCell {
    pub r_net: f64,
    pub l_net: f64,
    pub xi: f64,
}

/// ξ(R, L) = σ · sup_ω |z_osc z_net / (z_osc + z_net)| with z_net = R + sL.
/// The homogeneous star certificate collapses to exactly this parallel
/// combination for every circuit count, so `n` only tags the output.
pub fn xi_surface(
    r_grid: &[f64],
    l_grid: &[f64],
    osc: &OscillatorModel,
    _n: usize,
    cfg: &SweepConfig,
) -> Result<Vec<XiCell>> {
    cfg.validate()?;
    if r_grid.is_empty() || l_grid.is_empty() {
        return Err(CertificateError::InvalidSweep("empty surface grid".into()));
    }
    if r_grid.iter().chain(l_grid.iter()).any(|&x| x <= 0.0) {
        return Err(CertificateError::InvalidSweep("surface grid values must be positive".into()));
    }
    let mut cells = Vec::with_capacity(r_grid.len() * l_grid.len());
    for &r in r_grid {
        for &l in l_grid {
            let z_net = RationalFunction::from_poly(crate::numerics::Polynomial::new(vec![r, l]));
            let f = osc.z_osc.parallel(&z_net)?;
            let peak = hinf_scalar(&f, cfg)?.peak;
            cells.push(XiCell { r_net: r, l_net: l, xi: osc.sigma * peak });
        }
    }
    Ok(cells)
}
