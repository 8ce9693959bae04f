//! Kron reduction, augmentation, effective impedances, and network
//! classification for complex-symmetric admittance matrices.

mod classify;

pub use classify::{classify, default_probes, NetworkClass, NetworkKind};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::network::{NetworkError, SymbolicAdmittance};
use crate::numerics::{ComplexMatrix, NumericsError, RationalFunction, Tolerances};

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("interior admittance block is singular (pathological shunt configuration)")]
    SingularInterior,

    #[error("network does not have uniform line characteristics: {0}")]
    NotUniform(String),

    #[error("admittance matrix is rank deficient (disconnected network)")]
    RankDeficient,

    #[error("homogeneous-parameter guard violated: z_eff-series/z_eff-shunt = 2N/(N-1)")]
    GuardViolated,

    #[error("degenerate homogeneous network: {0}")]
    DegenerateHomogeneous(String),

    #[error("matrix does not have zero row sums (max |row sum| {0:.3e})")]
    NotZeroRowSums(f64),

    #[error("symbolic reduction degree cap exceeded (interior too entangled for rational extraction)")]
    DegreeCapExceeded,

    #[error(transparent)]
    Numerics(#[from] NumericsError),

    #[error(transparent)]
    Network(#[from] NetworkError),
}

pub type Result<T> = std::result::Result<T, ReductionError>;

/// Kron-reduced admittance matrix plus a record of what was eliminated.
#[derive(Debug, Clone)]
pub struct KronResult {
    pub y: ComplexMatrix,
    /// Indices (in the input ordering) of the retained boundary nodes.
    pub boundary: Vec<usize>,
    /// Indices of the interior nodes removed by the Schur complement.
    pub eliminated: Vec<usize>,
}

/// Single-shot Schur complement `Y = Y_NN - Y_NI * Y_II^{-1} * Y_NI^T`,
/// eliminating every index at or beyond `n_boundary`.
pub fn kron_reduce(y_a: &ComplexMatrix, n_boundary: usize, tol: &Tolerances) -> Result<KronResult> {
    let dim = y_a.dim();
    assert!(n_boundary >= 1 && n_boundary <= dim, "boundary count out of range");
    if !y_a.is_symmetric(tol.structural_tol) {
        return Err(NumericsError::NotSymmetric {
            defect: y_a.symmetry_defect(),
            tol: tol.structural_tol * y_a.max_abs(),
        }
        .into());
    }
    if n_boundary == dim {
        return Ok(KronResult { y: y_a.clone(), boundary: (0..dim).collect(), eliminated: vec![] });
    }
    let ni = dim - n_boundary;
    let a = y_a.inner().view((0, 0), (n_boundary, n_boundary)).into_owned();
    let b = y_a.inner().view((0, n_boundary), (n_boundary, ni)).into_owned();
    let d = y_a.inner().view((n_boundary, n_boundary), (ni, ni)).into_owned();

    let d = ComplexMatrix::from_dmatrix(d)?;
    let x = d.solve_dmatrix(&b.transpose()).map_err(|e| match e {
        NumericsError::SingularMatrix => ReductionError::SingularInterior,
        other => other.into(),
    })?;
    let reduced = &a - &b * x;
    let result = ComplexMatrix::from_dmatrix(reduced)?;
    // A near-singular interior block shows up as wild amplification of the
    // reduced entries relative to the input scale.
    if result.max_abs() > y_a.max_abs() / tol.structural_tol {
        return Err(ReductionError::SingularInterior);
    }
    Ok(KronResult {
        y: result,
        boundary: (0..n_boundary).collect(),
        eliminated: (n_boundary..dim).collect(),
    })
}

/// Schur complement on a real matrix (used for the uniform-network Laplacian).
pub fn kron_reduce_real(l: &DMatrix<f64>, n_boundary: usize) -> Result<DMatrix<f64>> {
    let dim = l.nrows();
    if n_boundary == dim {
        return Ok(l.clone());
    }
    let ni = dim - n_boundary;
    let a = l.view((0, 0), (n_boundary, n_boundary)).into_owned();
    let b = l.view((0, n_boundary), (n_boundary, ni)).into_owned();
    let d = l.view((n_boundary, n_boundary), (ni, ni)).into_owned();
    let lu = d.lu();
    let x = lu.solve(&b.transpose()).ok_or(ReductionError::SingularInterior)?;
    Ok(&a - &b * x)
}

/// Maximum polynomial degree allowed during symbolic elimination; rational
/// entries are never cancelled, so degrees grow with each eliminated node.
pub const SYMBOLIC_DEGREE_CAP: usize = 64;

/// Kron reduction with rational-function entries, eliminating interior nodes
/// one Gaussian step at a time (the public contract is still the single-shot
/// Schur complement of the trailing block).
pub fn kron_reduce_symbolic(adm: &SymbolicAdmittance, n_boundary: usize) -> Result<SymbolicAdmittance> {
    let dim = adm.dim();
    assert!(n_boundary >= 1 && n_boundary <= dim);
    let mut cur: Vec<Vec<RationalFunction>> = (0..dim)
        .map(|i| (0..dim).map(|j| adm.entry(i, j).clone()).collect())
        .collect();
    let mut size = dim;
    while size > n_boundary {
        let k = size - 1;
        let pivot = cur[k][k].clone();
        if pivot.is_zero() {
            return Err(ReductionError::SingularInterior);
        }
        let mut next: Vec<Vec<RationalFunction>> = Vec::with_capacity(k);
        for i in 0..k {
            let mut row = Vec::with_capacity(k);
            for j in 0..k {
                let corr = cur[i][k].mul(&cur[k][j]).div(&pivot)?;
                let e = cur[i][j].sub(&corr);
                if e.num().degree() > SYMBOLIC_DEGREE_CAP || e.den().degree() > SYMBOLIC_DEGREE_CAP {
                    return Err(ReductionError::DegreeCapExceeded);
                }
                row.push(e);
            }
            next.push(row);
        }
        cur = next;
        size = k;
    }
    let mut entries = Vec::with_capacity(n_boundary * n_boundary);
    for row in cur {
        entries.extend(row);
    }
    Ok(SymbolicAdmittance::from_entries(n_boundary, entries))
}

/// Adjoin electrical ground as an extra node: border entries are the negated
/// shunt admittances (row sums of `y`), the corner is their sum. The result
/// has zero row and column sums.
pub fn augment(y: &ComplexMatrix) -> ComplexMatrix {
    let n = y.dim();
    let mut out = ComplexMatrix::zeros(n + 1);
    let mut corner = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, y.get(i, j));
        }
        let shunt = y.row_sum(i);
        out.set(i, n, -shunt);
        out.set(n, i, -shunt);
        corner += shunt;
    }
    out.set(n, n, corner);
    out
}

/// Moore-Penrose pseudo-inverse of a connected zero-row-sum complex-symmetric
/// matrix via the rank-one shift identity
/// `Y^† = (Y + (δ/N) 11^T)^{-1} - (1/(δN)) 11^T` with δ = 1.
pub fn pseudo_inverse_zero_sum(y: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let n = y.dim();
    let scale = y.max_abs().max(f64::MIN_POSITIVE);
    let rs = y.max_row_sum_abs();
    if rs > tol.structural_tol * scale * n as f64 {
        return Err(ReductionError::NotZeroRowSums(rs));
    }
    let delta = 1.0;
    let shift = Complex64::new(delta / n as f64, 0.0);
    let mut shifted = y.clone();
    for i in 0..n {
        for j in 0..n {
            shifted.set(i, j, shifted.get(i, j) + shift);
        }
    }
    let inv = shifted.inverse().map_err(|_| ReductionError::RankDeficient)?;
    let back = Complex64::new(1.0 / (delta * n as f64), 0.0);
    let mut dag = inv.clone();
    for i in 0..n {
        for j in 0..n {
            dag.set(i, j, dag.get(i, j) - back);
        }
    }
    // Y Y^† must equal the projector; failure means more than one zero
    // eigenvalue, i.e. a disconnected network.
    let prod = y.mul(&dag);
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let pi = if i == j { 1.0 - 1.0 / n as f64 } else { -1.0 / n as f64 };
            defect = defect.max((prod.get(i, j) - Complex64::new(pi, 0.0)).norm());
        }
    }
    if defect > 1e-7 {
        return Err(ReductionError::RankDeficient);
    }
    Ok(dag)
}

fn has_zero_row_sums(y: &ComplexMatrix, tol: &Tolerances) -> bool {
    let scale = y.max_abs();
    scale == 0.0 || y.max_row_sum_abs() <= tol.structural_tol * scale * y.dim() as f64
}

/// Effective impedance `z_nm = (e_n - e_m)^T Y^† (e_n - e_m)`; regular
/// matrices use the plain inverse, singular zero-row-sum ones the
/// rank-one-shift pseudo-inverse.
pub fn effective_impedance(y: &ComplexMatrix, n: usize, m: usize, tol: &Tolerances) -> Result<Complex64> {
    if n == m {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let dag = if has_zero_row_sums(y, tol) {
        pseudo_inverse_zero_sum(y, tol)?
    } else {
        y.inverse().map_err(|_| ReductionError::SingularInterior)?
    };
    Ok(pair_impedance(&dag, n, m))
}

fn pair_impedance(dag: &ComplexMatrix, n: usize, m: usize) -> Complex64 {
    dag.get(n, n) - dag.get(n, m) - dag.get(m, n) + dag.get(m, m)
}

/// Matrix of pairwise effective impedances (zero diagonal, symmetric).
#[derive(Debug, Clone)]
pub struct EffectiveImpedanceMatrix {
    z: ComplexMatrix,
}

impl EffectiveImpedanceMatrix {
    pub fn dim(&self) -> usize {
        self.z.dim()
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.z.get(n, m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.z
    }

    pub fn from_matrix(z: ComplexMatrix) -> Self {
        EffectiveImpedanceMatrix { z }
    }
}

/// All-pairs effective impedances. With `grounded`, the computation runs on
/// the augmented matrix (ground adjoined as the last node), which requires a
/// regular `y`; the augmented matrix of an already-singular `y` has an
/// isolated ground node and is reported as rank deficient.
pub fn effective_impedance_matrix(
    y: &ComplexMatrix,
    grounded: bool,
    tol: &Tolerances,
) -> Result<EffectiveImpedanceMatrix> {
    let work = if grounded { augment(y) } else { y.clone() };
    let dag = if has_zero_row_sums(&work, tol) {
        pseudo_inverse_zero_sum(&work, tol)?
    } else {
        work.inverse().map_err(|_| ReductionError::SingularInterior)?
    };
    let n = work.dim();
    let mut z = ComplexMatrix::zeros(n);
    for a in 0..n {
        for b in (a + 1)..n {
            let v = pair_impedance(&dag, a, b);
            z.set(a, b, v);
            z.set(b, a, v);
        }
    }
    Ok(EffectiveImpedanceMatrix { z })
}

/// Entry of the grounded-reference inverse assembled from the pseudo-inverse:
/// `Ybar^{-1}_nm = Y†_nm - Y†_n,ref - Y†_m,ref + Y†_ref,ref`.
pub fn grounded_inverse_entry(dag: &ComplexMatrix, n: usize, m: usize, reference: usize) -> Complex64 {
    dag.get(n, m) - dag.get(n, reference) - dag.get(m, reference) + dag.get(reference, reference)
}

/// Recover the pseudo-inverse from the effective-impedance matrix:
/// `Y†_nm = -1/2 (z_nm - (1/N) Σ_k (z_nk + z_mk) + (1/N²) Σ_{kl} z_kl)`.
pub fn ydagger_from_z(z: &EffectiveImpedanceMatrix) -> ComplexMatrix {
    let n = z.dim();
    let nf = n as f64;
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    for (a, row_sum) in row_sums.iter_mut().enumerate() {
        for b in 0..n {
            *row_sum += z.get(a, b);
            total += z.get(a, b);
        }
    }
    let mut out = ComplexMatrix::zeros(n);
    for a in 0..n {
        for b in 0..n {
            let v = -0.5 * (z.get(a, b) - (row_sums[a] + row_sums[b]) / nf + total / (nf * nf));
            out.set(a, b, v);
        }
    }
    out
}

/// Invert the forward map between homogeneous-network admittances and
/// effective impedances. Without a shunt, `y_series = 2/(N z_eff)`. With one,
/// the forward pair
/// `z_es = 2/(N y_s + y_sh)`, `z_esh = (y_sh + y_s)/(y_sh (N y_s + y_sh))`
/// inverts to `y_sh = 2/(2N z_esh - (N-1) z_es)` and `y_s = (2/z_es - y_sh)/N`,
/// guarded against `z_es/z_esh = 2N/(N-1)`.
pub fn homogeneous_params(
    z_eff_series: Complex64,
    z_eff_shunt: Option<Complex64>,
    n: usize,
    tol: &Tolerances,
) -> Result<(Complex64, Option<Complex64>)> {
    let nf = n as f64;
    if z_eff_series.norm() == 0.0 {
        return Err(ReductionError::DegenerateHomogeneous("z_eff-series is zero".into()));
    }
    match z_eff_shunt {
        None => Ok((2.0 / (nf * z_eff_series) * Complex64::new(1.0, 0.0), None)),
        Some(z_esh) => {
            if z_esh.norm() == 0.0 {
                return Err(ReductionError::DegenerateHomogeneous("z_eff-shunt is zero".into()));
            }
            let denom = 2.0 * nf * z_esh - (nf - 1.0) * z_eff_series;
            let scale = (2.0 * nf * z_esh.norm()).max((nf - 1.0) * z_eff_series.norm());
            if denom.norm() <= tol.structural_tol * scale {
                return Err(ReductionError::GuardViolated);
            }
            let y_shunt = Complex64::new(2.0, 0.0) / denom;
            let total = Complex64::new(2.0, 0.0) / z_eff_series; // N y_s + y_sh
            let y_series = (total - y_shunt) / nf;
            Ok((y_series, Some(y_shunt)))
        }
    }
}

/// Forward map from uniform reduced admittances to effective impedances,
/// used as the round-trip oracle for `homogeneous_params`.
pub fn homogeneous_forward(
    y_series: Complex64,
    y_shunt: Option<Complex64>,
    n: usize,
) -> (Complex64, Option<Complex64>) {
    let nf = n as f64;
    match y_shunt {
        None => (2.0 / (nf * y_series), None),
        Some(y_sh) => {
            let total = nf * y_series + y_sh;
            let z_es = 2.0 / total;
            let z_esh = (y_sh + y_series) / (y_sh * total);
            (z_es, Some(z_esh))
        }
    }
}

/// Uniform-line reduction: factor the admittance as `y_series(s) * L_A` with a
/// real weighted Laplacian, reduce the Laplacian, and return both parts.
pub fn kron_reduce_uniform(
    net: &crate::network::Netlist,
    tol: &Tolerances,
) -> Result<(RationalFunction, DMatrix<f64>)> {
    if !net.shunts.is_empty() {
        return Err(ReductionError::NotUniform("network has shunt elements".into()));
    }
    let (y_series, weights) = classify::uniform_series_factor(net, tol)?;
    let lap = classify::weighted_laplacian(net, &weights);
    let reduced = kron_reduce_real(&lap, net.n_boundary)?;
    Ok((y_series, reduced))
}

#[cfg(test)]
mod tests;
