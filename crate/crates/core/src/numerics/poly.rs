use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{NumericsError, Result, DEFAULT_NUMERIC_TOL};

/// Real-coefficient polynomial in the Laplace variable `s`, stored in
/// ascending powers: `coeffs[k]` multiplies `s^k`.
///
/// Normalization strips trailing coefficients with magnitude below
/// `DEFAULT_NUMERIC_TOL * max|coeff|`; the zero polynomial is `[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Polynomial { coeffs };
        p.normalize();
        p
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn one() -> Self {
        Polynomial { coeffs: vec![1.0] }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// The monomial `s`.
    pub fn s() -> Self {
        Polynomial { coeffs: vec![0.0, 1.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    fn normalize(&mut self) {
        let max = self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        if max == 0.0 {
            self.coeffs = vec![0.0];
            return;
        }
        let cut = DEFAULT_NUMERIC_TOL * max;
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().abs() <= cut {
            self.coeffs.pop();
        }
        if self.coeffs.len() == 1 && self.coeffs[0].abs() <= cut {
            self.coeffs[0] = 0.0;
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Polynomial::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Evaluate at complex `s`.
    ///
    /// For |s| > 1 this uses reversed-coefficient evaluation at 1/s,
    /// `p(s) = s^n * rev(p)(1/s)`, which keeps the Horner recursion bounded
    /// over the decades-wide frequency sweeps used by the certificates.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.eval_with_scale(s).0
    }

    /// Evaluate and also return the magnitude scale `sum_k |c_k| |s|^k`,
    /// the natural yardstick for "is this value effectively zero".
    pub fn eval_with_scale(&self, s: Complex64) -> (Complex64, f64) {
        let r = s.norm();
        if r <= 1.0 {
            let mut v = Complex64::new(0.0, 0.0);
            let mut m = 0.0f64;
            for &c in self.coeffs.iter().rev() {
                v = v * s + c;
                m = m * r + c.abs();
            }
            (v, m)
        } else {
            let inv = Complex64::new(1.0, 0.0) / s;
            let ri = 1.0 / r;
            let mut v = Complex64::new(0.0, 0.0);
            let mut m = 0.0f64;
            for &c in self.coeffs.iter() {
                v = v * inv + c;
                m = m * ri + c.abs();
            }
            let lead = s.powu(self.degree() as u32);
            (v * lead, m * lead.norm())
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![0.0; n];
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.coeffs.get(k).copied().unwrap_or(0.0) + rhs.coeffs.get(k).copied().unwrap_or(0.0);
        }
        Polynomial::new(out)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![0.0; n];
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.coeffs.get(k).copied().unwrap_or(0.0) - rhs.coeffs.get(k).copied().unwrap_or(0.0);
        }
        Polynomial::new(out)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}*s"),
                _ => format!("{c}*s^{k}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// All complex roots of `p`, via eigenvalues of the (balanced) companion
/// matrix. Roots at the origin are peeled off exactly first.
pub fn poly_roots(p: &Polynomial) -> Result<Vec<Complex64>> {
    if p.is_zero() {
        return Err(NumericsError::DegenerateInput);
    }
    if p.degree() == 0 {
        return Ok(Vec::new());
    }

    // Peel exact origin roots so the companion matrix stays well scaled.
    let mut c: Vec<f64> = p.coeffs().to_vec();
    let mut roots = Vec::new();
    while c.len() > 1 && c[0] == 0.0 {
        roots.push(Complex64::new(0.0, 0.0));
        c.remove(0);
    }
    let n = c.len() - 1;
    if n == 0 {
        return Ok(roots);
    }

    // Monic coefficients a_k of x^n + a_{n-1} x^{n-1} + ... + a_0.
    let lead = c[n];
    let a: Vec<f64> = c[..n].iter().map(|ck| ck / lead).collect();

    // Geometric balancing: substitute s = alpha*x so that the constant and
    // leading coefficients have comparable magnitude.
    let alpha = if a[0] != 0.0 {
        a[0].abs().powf(1.0 / n as f64)
    } else {
        1.0
    };
    let mut scaled = vec![0.0; n];
    for k in 0..n {
        scaled[k] = a[k] / alpha.powi((n - k) as i32);
    }

    let mut comp = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    for k in 0..n {
        comp[(k, n - 1)] = -scaled[k];
    }
    let eig = comp.complex_eigenvalues();
    for e in eig.iter() {
        roots.push(Complex64::new(e.re * alpha, e.im * alpha));
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec())
    }

    #[test]
    fn product_examples() {
        // (1+s)(1-s) = 1 - s^2
        assert_eq!((&p(&[1.0, 1.0]) * &p(&[1.0, -1.0])).coeffs(), &[1.0, 0.0, -1.0]);
        // s + 0 = s
        assert_eq!((&p(&[0.0, 1.0]) + &Polynomial::zero()).coeffs(), &[0.0, 1.0]);
        // (1+2s)(3+s) = 3 + 7s + 2s^2
        assert_eq!((&p(&[1.0, 2.0]) * &p(&[3.0, 1.0])).coeffs(), &[3.0, 7.0, 2.0]);
    }

    #[test]
    fn normalization_strips_trailing_noise() {
        let q = p(&[1.0, 2.0, 1e-18]);
        assert_eq!(q.degree(), 1);
        assert!(Polynomial::new(vec![0.0, 0.0]).is_zero());
    }

    #[test]
    fn roots_simple() {
        let r = poly_roots(&p(&[-1.0, 0.0, 1.0])).unwrap(); // s^2 - 1
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 1.0).abs() < 1e-12 && (re[1] - 1.0).abs() < 1e-12);
        assert!(r.iter().all(|z| z.im.abs() < 1e-12));

        let r = poly_roots(&p(&[1.0, 0.0, 1.0])).unwrap(); // s^2 + 1
        let mut im: Vec<f64> = r.iter().map(|z| z.im).collect();
        im.sort_by(f64::total_cmp);
        assert!((im[0] + 1.0).abs() < 1e-12 && (im[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn roots_reject_zero_poly() {
        assert!(matches!(
            poly_roots(&Polynomial::zero()),
            Err(NumericsError::DegenerateInput)
        ));
    }

    #[test]
    fn stable_eval_large_s() {
        // p(s) = s^6 at |s| = 1e3 must not lose accuracy.
        let q = p(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let s = Complex64::new(0.0, 1e3);
        let v = q.eval(s);
        assert!((v.re + 1e18).abs() / 1e18 < 1e-12, "got {v}");
    }

    fn rebuild_monic(roots: &[Complex64]) -> Vec<f64> {
        let mut acc = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (k, &c) in acc.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            acc = next;
        }
        acc.iter().map(|z| z.re).collect()
    }

    proptest! {
        // eval(a*b) = eval(a)*eval(b) at random complex points.
        #[test]
        fn prop_product_eval(
            ca in prop::collection::vec(-3.0f64..3.0, 1..7),
            cb in prop::collection::vec(-3.0f64..3.0, 1..7),
            re in -2.0f64..2.0,
            im in -2.0f64..2.0,
        ) {
            let a = Polynomial::new(ca);
            let b = Polynomial::new(cb);
            let ab = &a * &b;
            let s = Complex64::new(re, im);
            let lhs = ab.eval(s);
            let rhs = a.eval(s) * b.eval(s);
            let scale = lhs.norm().max(rhs.norm()).max(1e-12);
            prop_assert!((lhs - rhs).norm() <= 1e-9 * scale);
        }

        // poly_roots then reconstruct matches the monic input, degree <= 8.
        #[test]
        fn prop_roots_reconstruct(c in prop::collection::vec(-2.0f64..2.0, 2..9)) {
            let q = Polynomial::new(c);
            prop_assume!(!q.is_zero() && q.degree() >= 1);
            prop_assume!(q.leading().abs() > 1e-3);
            let roots = poly_roots(&q).unwrap();
            prop_assert_eq!(roots.len(), q.degree());
            let rebuilt = rebuild_monic(&roots);
            let monic: Vec<f64> = q.coeffs().iter().map(|x| x / q.leading()).collect();
            let scale = monic.iter().fold(1.0f64, |a, x| a.max(x.abs()));
            for (got, want) in rebuilt.iter().zip(monic.iter()) {
                prop_assert!((got - want).abs() <= 1e-7 * scale,
                    "rebuilt {:?} vs monic {:?}", rebuilt, monic);
            }
        }

        // root residuals: |p(r)| small relative to the local scale.
        #[test]
        fn prop_root_residuals(c in prop::collection::vec(-2.0f64..2.0, 2..9)) {
            let q = Polynomial::new(c);
            prop_assume!(!q.is_zero() && q.degree() >= 1);
            prop_assume!(q.leading().abs() > 1e-3);
            for r in poly_roots(&q).unwrap() {
                let (v, scale) = q.eval_with_scale(r);
                prop_assert!(v.norm() <= 1e-8 * scale.max(1e-30), "residual {} at {}", v.norm(), r);
            }
        }
    }
}
