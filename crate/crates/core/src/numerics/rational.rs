use std::fmt;

use num_complex::Complex64;

use super::poly::Polynomial;
use super::{NumericsError, Result, DEFAULT_NUMERIC_TOL};

/// Ratio of real-coefficient polynomials in `s`.
///
/// Canonical form keeps the denominator monic. Products are NOT symbolically
/// cancelled: exact common-factor detection is numerically fragile, so
/// correctness is defined pointwise by evaluation and pole lists may contain
/// removable pairs (the certificate's stability checker cross-cancels matching
/// root pairs before judging).
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(NumericsError::DivisionByZeroFunction);
        }
        let lead = den.leading();
        Ok(RationalFunction {
            num: num.scale(1.0 / lead),
            den: den.scale(1.0 / lead),
        })
    }

    pub fn from_poly(p: Polynomial) -> Self {
        RationalFunction { num: p, den: Polynomial::one() }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True when numerator and denominator are both constants.
    pub fn is_constant(&self) -> bool {
        self.num.degree() == 0 && self.den.degree() == 0
    }

    pub fn add(&self, rhs: &RationalFunction) -> RationalFunction {
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        let den = &self.den * &rhs.den;
        RationalFunction::new(num, den).expect("product of nonzero denominators is nonzero")
    }

    pub fn sub(&self, rhs: &RationalFunction) -> RationalFunction {
        let num = &(&self.num * &rhs.den) - &(&rhs.num * &self.den);
        let den = &self.den * &rhs.den;
        RationalFunction::new(num, den).expect("product of nonzero denominators is nonzero")
    }

    pub fn mul(&self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction::new(&self.num * &rhs.num, &self.den * &rhs.den)
            .expect("product of nonzero denominators is nonzero")
    }

    pub fn div(&self, rhs: &RationalFunction) -> Result<RationalFunction> {
        if rhs.is_zero() {
            return Err(NumericsError::DivisionByZeroFunction);
        }
        RationalFunction::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    /// Parallel combination `a*b/(a+b)`.
    pub fn parallel(&self, rhs: &RationalFunction) -> Result<RationalFunction> {
        self.mul(rhs).div(&self.add(rhs))
    }

    pub fn reciprocal(&self) -> Result<RationalFunction> {
        if self.is_zero() {
            return Err(NumericsError::DivisionByZeroFunction);
        }
        RationalFunction::new(self.den.clone(), self.num.clone())
    }

    pub fn neg(&self) -> RationalFunction {
        RationalFunction { num: self.num.scale(-1.0), den: self.den.clone() }
    }

    pub fn scale(&self, k: f64) -> RationalFunction {
        RationalFunction { num: self.num.scale(k), den: self.den.clone() }
    }

    /// Evaluate at complex `s`; errors when the denominator magnitude drops
    /// below `numeric_tol` times its coefficient scale at `s` (the sweep must
    /// exclude or refine around that frequency).
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let (nv, _) = self.num.eval_with_scale(s);
        let (dv, dscale) = self.den.eval_with_scale(s);
        if dv.norm() <= DEFAULT_NUMERIC_TOL * dscale.max(f64::MIN_POSITIVE) {
            return Err(NumericsError::EvalNearPole(s));
        }
        Ok(nv / dv)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(num: &[f64], den: &[f64]) -> RationalFunction {
        RationalFunction::new(Polynomial::new(num.to_vec()), Polynomial::new(den.to_vec())).unwrap()
    }

    #[test]
    fn parallel_of_equal_halves() {
        // z = 1/s, parallel(z, z) = z/2
        let z = rf(&[1.0], &[0.0, 1.0]);
        let half = z.parallel(&z).unwrap();
        for w in [0.3, 1.0, 7.0] {
            let s = Complex64::new(0.0, w);
            let got = half.eval(s).unwrap();
            let want = z.eval(s).unwrap() / 2.0;
            assert!((got - want).norm() < 1e-12 * want.norm());
        }
    }

    #[test]
    fn unreduced_product_evaluates_to_one() {
        // (1/(s+1)) * (s+1) stays unreduced but evaluates to 1.
        let a = rf(&[1.0], &[1.0, 1.0]);
        let b = rf(&[1.0, 1.0], &[1.0]);
        let prod = a.mul(&b);
        assert!(prod.num().degree() > 0, "no symbolic cancellation expected");
        for k in 1..=3 {
            let s = Complex64::new(0.0, k as f64);
            let v = prod.eval(s).unwrap();
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-10, "got {v}");
        }
    }

    #[test]
    fn eval_near_pole_errors() {
        let f = rf(&[0.0, 1.0], &[1.0, 0.0, 1.0]); // s/(s^2+1)
        let at_pole = f.eval(Complex64::new(0.0, 1.0));
        assert!(matches!(at_pole, Err(NumericsError::EvalNearPole(_))));
        assert!((f.eval(Complex64::new(0.0, 0.0)).unwrap()).norm() < 1e-15);
        // 1/(s+1) at 0 -> 1
        let g = rf(&[1.0], &[1.0, 1.0]);
        assert!((g.eval(Complex64::new(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn div_by_zero_function() {
        let f = rf(&[1.0], &[1.0, 1.0]);
        assert!(matches!(
            f.div(&RationalFunction::zero()),
            Err(NumericsError::DivisionByZeroFunction)
        ));
    }

    #[test]
    fn denominator_made_monic() {
        let f = rf(&[2.0], &[4.0, 2.0]);
        assert!((f.den().leading() - 1.0).abs() < 1e-15);
        let v = f.eval(Complex64::new(1.0, 0.0)).unwrap();
        assert!((v - Complex64::new(2.0 / 6.0, 0.0)).norm() < 1e-15);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        // Stable-pole rationals: denominator (1 + a1 s)(1 + a2 s), a_i > 0,
        // so imaginary-axis evaluations never sit on a pole.
        fn stable_rf(n0: f64, n1: f64, a1: f64, a2: f64) -> RationalFunction {
            let den = &Polynomial::new(vec![1.0, a1]) * &Polynomial::new(vec![1.0, a2]);
            RationalFunction::new(Polynomial::new(vec![n0, n1]), den).unwrap()
        }

        proptest! {
            #[test]
            fn field_ops_match_pointwise(
                n0 in -3.0f64..3.0, n1 in -3.0f64..3.0,
                m0 in -3.0f64..3.0, m1 in -3.0f64..3.0,
                a1 in 0.1f64..2.0, a2 in 0.1f64..2.0,
                b1 in 0.1f64..2.0, b2 in 0.1f64..2.0,
                w in 0.01f64..50.0,
            ) {
                let f = stable_rf(n0, n1, a1, a2);
                let g = stable_rf(m0, m1, b1, b2);
                let s = Complex64::new(0.0, w);
                let (fv, gv) = (f.eval(s).unwrap(), g.eval(s).unwrap());
                let scale = fv.norm().max(gv.norm()).max(1.0);
                prop_assert!((f.add(&g).eval(s).unwrap() - (fv + gv)).norm() <= 1e-9 * scale);
                prop_assert!((f.mul(&g).eval(s).unwrap() - fv * gv).norm() <= 1e-9 * scale * scale);
                prop_assume!(gv.norm() > 1e-6);
                prop_assert!((f.div(&g).unwrap().eval(s).unwrap() - fv / gv).norm() <= 1e-7 * scale / gv.norm().min(1.0));
            }

            #[test]
            fn parallel_is_symmetric(
                n0 in 0.1f64..3.0, m0 in 0.1f64..3.0,
                a1 in 0.1f64..2.0, b1 in 0.1f64..2.0,
                w in 0.01f64..50.0,
            ) {
                let f = stable_rf(n0, 0.0, a1, 0.3);
                let g = stable_rf(m0, 0.0, b1, 0.7);
                let s = Complex64::new(0.0, w);
                let fg = f.parallel(&g).unwrap().eval(s).unwrap();
                let gf = g.parallel(&f).unwrap().eval(s).unwrap();
                prop_assert!((fg - gf).norm() <= 1e-10 * fg.norm().max(1e-12));
            }
        }
    }
}
