//! Radial PML stretching with constant absorption and the coefficient fields
//! of the truncated problem `-div(A grad u) - B k^2 u = f`.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Wave number and PML geometry: physical radius `r_inner` (R), truncation
/// radius `r_outer` (R-hat), and absorption strength `sigma0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PmlParams {
    pub k: f64,
    pub r_inner: f64,
    pub r_outer: f64,
    pub sigma0: f64,
}

/// Outcome of checking `kR >= 1` and `k sigma0 L >= max(2kR + sqrt(3) kL, 10)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssumptionReport {
    pub kr: f64,
    pub absorption: f64,
    pub absorption_required: f64,
    pub kr_ok: bool,
    pub absorption_ok: bool,
}

impl AssumptionReport {
    pub fn holds(&self) -> bool {
        self.kr_ok && self.absorption_ok
    }
}

impl PmlParams {
    pub fn new(k: f64, r_inner: f64, r_outer: f64, sigma0: f64) -> Result<Self> {
        let finite = [k, r_inner, r_outer, sigma0].iter().all(|v| v.is_finite());
        if !finite || k <= 0.0 || r_inner <= 0.0 || r_outer <= r_inner || sigma0 < 0.0 {
            return Err(Error::Config(format!(
                "PML parameters need k > 0, R-hat > R > 0, sigma0 >= 0 (got k={k}, R={r_inner}, R-hat={r_outer}, sigma0={sigma0})"
            )));
        }
        Ok(Self { k, r_inner, r_outer, sigma0 })
    }

    /// sigma0 = 5 and L = R = 1.
    pub fn standard(k: f64) -> Self {
        Self { k, r_inner: 1.0, r_outer: 2.0, sigma0: 5.0 }
    }

    pub fn with_k(self, k: f64) -> Self {
        Self { k, ..self }
    }

    pub fn thickness(&self) -> f64 {
        self.r_outer - self.r_inner
    }

    pub fn check_assumptions(&self) -> AssumptionReport {
        let kr = self.k * self.r_inner;
        let kl = self.k * self.thickness();
        let absorption = self.k * self.sigma0 * self.thickness();
        let absorption_required = (2.0 * kr + 3f64.sqrt() * kl).max(10.0);
        AssumptionReport {
            kr,
            absorption,
            absorption_required,
            kr_ok: kr >= 1.0,
            absorption_ok: absorption >= absorption_required,
        }
    }

    /// `(sigma, delta)` at radius r.
    pub fn sigma_delta(&self, r: f64) -> (f64, f64) {
        if r <= self.r_inner {
            (0.0, 0.0)
        } else {
            (self.sigma0, self.sigma0 * (r - self.r_inner) / r)
        }
    }

    /// `(alpha, beta, r_tilde)` with alpha = 1 + i sigma, beta = 1 + i delta
    /// and the stretched radius r_tilde = r beta.
    pub fn alpha_beta(&self, r: f64) -> (Complex64, Complex64, Complex64) {
        let (sigma, delta) = self.sigma_delta(r);
        let beta = Complex64::new(1.0, delta);
        (Complex64::new(1.0, sigma), beta, beta * r)
    }

    /// Odd extension of the stretching to the line: x-tilde(-x) = -x-tilde(x).
    pub fn stretch_1d(&self, x: f64) -> Complex64 {
        let r = x.abs();
        let s = if r <= self.r_inner {
            Complex64::new(r, 0.0)
        } else {
            Complex64::new(r, self.sigma0 * (r - self.r_inner))
        };
        if x < 0.0 {
            -s
        } else {
            s
        }
    }

    pub fn coeff_a_2d(&self, x: [f64; 2]) -> CoeffMatrix2 {
        let r = x[0].hypot(x[1]);
        if r <= self.r_inner {
            return CoeffMatrix2::identity();
        }
        let (alpha, beta, _) = self.alpha_beta(r);
        let d_rad = beta / alpha;
        let d_ang = alpha / beta;
        let (c, s) = (x[0] / r, x[1] / r);
        CoeffMatrix2 {
            a11: d_rad * (c * c) + d_ang * (s * s),
            a12: (d_rad - d_ang) * (c * s),
            a22: d_rad * (s * s) + d_ang * (c * c),
        }
    }

    pub fn coeff_b_2d(&self, x: [f64; 2]) -> Complex64 {
        let r = x[0].hypot(x[1]);
        if r <= self.r_inner {
            return ONE;
        }
        let (alpha, beta, _) = self.alpha_beta(r);
        alpha * beta
    }

    /// `(A, B) = (1/alpha, alpha)` at |x|.
    pub fn coeff_1d(&self, x: f64) -> (Complex64, Complex64) {
        let (alpha, _, _) = self.alpha_beta(x.abs());
        (alpha.inv(), alpha)
    }
}

/// Complex symmetric 2x2 coefficient matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoeffMatrix2 {
    pub a11: Complex64,
    pub a12: Complex64,
    pub a22: Complex64,
}

impl CoeffMatrix2 {
    pub fn identity() -> Self {
        Self { a11: ONE, a12: ZERO, a22: ONE }
    }

    pub fn det(&self) -> Complex64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn apply(&self, v: [f64; 2]) -> [Complex64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a12 * v[0] + self.a22 * v[1]]
    }

    /// `w^T A v` for real vectors.
    pub fn bilinear(&self, w: [f64; 2], v: [f64; 2]) -> Complex64 {
        self.a11 * (w[0] * v[0]) + self.a12 * (w[0] * v[1] + w[1] * v[0]) + self.a22 * (w[1] * v[1])
    }

    pub fn to_array(&self) -> [[Complex64; 2]; 2] {
        [[self.a11, self.a12], [self.a12, self.a22]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> PmlParams {
        PmlParams::standard(8.0)
    }

    fn near(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn sigma_delta_values() {
        assert_eq!(p().sigma_delta(0.5), (0.0, 0.0));
        let (s, d) = p().sigma_delta(1.5);
        assert_eq!(s, 5.0);
        assert!((d - 5.0 / 3.0).abs() < 1e-15);
        let (_, d) = p().sigma_delta(1e6);
        assert!((d - 5.0).abs() < 1e-5);
    }

    #[test]
    fn alpha_beta_values() {
        let (a, b, rt) = p().alpha_beta(0.7);
        assert_eq!((a, b, rt), (ONE, ONE, Complex64::new(0.7, 0.0)));
        let (a, b, rt) = p().alpha_beta(2.0);
        assert!(near(a, Complex64::new(1.0, 5.0), 1e-15));
        assert!(near(b, Complex64::new(1.0, 2.5), 1e-15));
        assert!(near(rt, Complex64::new(2.0, 5.0), 1e-14));
        for r in [1.1, 1.5, 1.99] {
            let (_, _, rt) = p().alpha_beta(r);
            assert!((rt.im - 5.0 * (r - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn a_matrix_values() {
        assert_eq!(p().coeff_a_2d([0.3, -0.4]), CoeffMatrix2::identity());
        assert_eq!(p().coeff_a_2d([0.0, 0.0]), CoeffMatrix2::identity());
        let a = p().coeff_a_2d([1.5, 0.0]);
        let alpha = Complex64::new(1.0, 5.0);
        let beta = Complex64::new(1.0, 5.0 / 3.0);
        assert!(near(a.a11, beta / alpha, 1e-15));
        assert!(near(a.a22, alpha / beta, 1e-15));
        assert!(a.a12.norm() < 1e-15);
    }

    #[test]
    fn b_values() {
        assert_eq!(p().coeff_b_2d([0.1, 0.2]), ONE);
        let b = p().coeff_b_2d([1.5, 0.0]);
        assert!(near(b, Complex64::new(-22.0 / 3.0, 20.0 / 3.0), 1e-13));
        let b = p().coeff_b_2d([1.0 + 1e-9, 0.0]);
        assert!(near(b, Complex64::new(1.0, 5.0), 1e-7));
    }

    #[test]
    fn one_dimensional_coefficients() {
        assert_eq!(p().coeff_1d(-0.9), (ONE, ONE));
        let (a, b) = p().coeff_1d(1.5);
        assert!(near(a, Complex64::new(1.0, 5.0).inv(), 1e-15));
        assert!(near(b, Complex64::new(1.0, 5.0), 1e-15));
    }

    #[test]
    fn assumption_report() {
        let rep = PmlParams::standard(8.0).check_assumptions();
        assert!(rep.holds());
        let weak = PmlParams::new(8.0, 1.0, 2.0, 1.0).unwrap().check_assumptions();
        assert!(weak.kr_ok && !weak.absorption_ok);
        assert!(!PmlParams::standard(0.5).check_assumptions().kr_ok);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PmlParams::new(1.0, 1.0, 1.0, 5.0).is_err());
        assert!(PmlParams::new(-1.0, 1.0, 2.0, 5.0).is_err());
        assert!(PmlParams::new(1.0, 1.0, 2.0, -5.0).is_err());
    }

    proptest! {
        #[test]
        fn a_has_unit_determinant_and_is_symmetric(x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let a = p().coeff_a_2d([x, y]);
            prop_assert!((a.det() - ONE).norm() < 1e-13);
            let m = a.to_array();
            prop_assert_eq!(m[0][1], m[1][0]);
        }

        #[test]
        fn a_is_rotation_equivariant(x in -2.0f64..2.0, y in -2.0f64..2.0, t in 0.0f64..6.3) {
            let (c, s) = (t.cos(), t.sin());
            let q = [[c, -s], [s, c]];
            let qx = [c * x - s * y, s * x + c * y];
            let lhs = p().coeff_a_2d(qx).to_array();
            let a = p().coeff_a_2d([x, y]).to_array();
            for i in 0..2 {
                for j in 0..2 {
                    let mut rhs = ZERO;
                    for k in 0..2 {
                        for l in 0..2 {
                            rhs += a[k][l] * (q[i][k] * q[j][l]);
                        }
                    }
                    prop_assert!((lhs[i][j] - rhs).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn one_d_product_is_one(x in -2.0f64..2.0) {
            let (a, b) = p().coeff_1d(x);
            prop_assert!((a * b - ONE).norm() < 1e-14);
        }

        #[test]
        fn stretch_is_odd(x in 0.0f64..2.0) {
            prop_assert_eq!(p().stretch_1d(-x), -p().stretch_1d(x));
        }
    }
}
