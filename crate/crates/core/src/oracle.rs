//! Reference solutions: the closed-form free-space solution for `f = 1` on
//! the unit disk, the closed-form 1D truncated PML solution, the free-space
//! Fourier mode, and a resolved radial FEM for one mode of the 2D truncated
//! PML problem.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linsolve::{self, ComplexSparseMatrix};
use crate::pml::PmlParams;
use crate::quadrature::{integrate, integrate_with_breaks, GAUSS3};
use crate::specialfun::{hankel1_unchecked, j_unchecked, BesselOrder};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Absolute tolerance of every oracle integral.
pub const ORACLE_QUAD_TOL: f64 = 1e-12;

/// Free-space solution for `f = 1` on the unit disk: `(u, du/dr)` at radius r.
pub fn exact_solution_disk(k: f64, r: f64) -> (Complex64, Complex64) {
    debug_assert!(k > 0.0 && r >= 0.0);
    let c = I * (PI / (2.0 * k));
    if r < 1.0 {
        let h1k = hankel1_unchecked(1, k);
        let u = c * h1k * j_unchecked(0, k * r) - 1.0 / (k * k);
        let du = -c * h1k * (k * j_unchecked(1, k * r));
        (u, du)
    } else {
        let j1k = j_unchecked(1, k);
        let u = c * j1k * hankel1_unchecked(0, k * r);
        let du = -c * j1k * k * hankel1_unchecked(1, k * r);
        (u, du)
    }
}

/// [`exact_solution_disk`] at a point: value and Cartesian gradient.
pub fn exact_solution_disk_xy(k: f64, x: [f64; 2]) -> (Complex64, [Complex64; 2]) {
    let r = x[0].hypot(x[1]);
    let (u, du) = exact_solution_disk(k, r);
    if r == 0.0 {
        return (u, [ZERO; 2]);
    }
    (u, [du * (x[0] / r), du * (x[1] / r)])
}

/// Closed-form solution of the 1D truncated PML problem
/// `-(u'/alpha)' - alpha k^2 u = f` on `(-R-hat, R-hat)`, `u(+-R-hat) = 0`.
pub struct Pml1dExact<F> {
    params: PmlParams,
    f: F,
    j1: Complex64,
    j2: Complex64,
    d1: Complex64,
    d2: Complex64,
}

impl<F: Fn(f64) -> Complex64> Pml1dExact<F> {
    pub fn new(params: PmlParams, f: F) -> Result<Self> {
        let rh = params.r_outer;
        let k = params.k;
        let breaks = [-params.r_inner, 0.0, params.r_inner];
        let p = params;
        let j1 = integrate_with_breaks(|t| (-I * k * p.stretch_1d(t)).exp() * f(t), -rh, rh, &breaks, ORACLE_QUAD_TOL)?;
        let j2 = integrate_with_breaks(|t| (I * k * p.stretch_1d(t)).exp() * f(t), -rh, rh, &breaks, ORACLE_QUAD_TOL)?;
        // boundary conditions at +-R-hat fix D1, D2
        let a2 = (I * k * params.stretch_1d(rh) * 2.0).exp();
        let den = a2 - a2.inv();
        let c = (I * 2.0 * k).inv();
        let d1 = c * (a2 * j2 - j1) / den;
        let d2 = c * (a2 * j1 - j2) / den;
        Ok(Self { params, f, j1, j2, d1, d2 })
    }

    fn combine(&self, x: f64, left_minus: Complex64, right_plus: Complex64) -> Complex64 {
        // left_minus = int_{-R-hat}^x e^{-ik t~} f, right_plus = int_x^{R-hat} e^{ik t~} f
        let k = self.params.k;
        let xt = self.params.stretch_1d(x);
        let em = (-I * k * xt).exp();
        let ep = (I * k * xt).exp();
        let c = -(I * 2.0 * k).inv();
        c * (em * right_plus + ep * left_minus) + self.d1 * em + self.d2 * ep
    }

    fn breaks(&self) -> [f64; 3] {
        [-self.params.r_inner, 0.0, self.params.r_inner]
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        let rh = self.params.r_outer;
        if !(-rh..=rh).contains(&x) {
            return Err(Error::Domain(x, "pml_1d_exact"));
        }
        let (k, p, f) = (self.params.k, self.params, &self.f);
        let left = integrate_with_breaks(|t| (-I * k * p.stretch_1d(t)).exp() * f(t), -rh, x, &self.breaks(), ORACLE_QUAD_TOL)?;
        let right = integrate_with_breaks(|t| (I * k * p.stretch_1d(t)).exp() * f(t), x, rh, &self.breaks(), ORACLE_QUAD_TOL)?;
        Ok(self.combine(x, left, right))
    }

    /// Values at sorted points, sharing the integrals between neighbours.
    pub fn eval_sorted(&self, xs: &[f64]) -> Result<Vec<Complex64>> {
        if let Some(i) = xs.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::UnsortedNodes(i + 1));
        }
        let rh = self.params.r_outer;
        if let Some(&x) = xs.iter().find(|x| !(-rh..=rh).contains(*x)) {
            return Err(Error::Domain(x, "pml_1d_exact"));
        }
        let (k, p, f) = (self.params.k, self.params, &self.f);
        let breaks = self.breaks();
        let cell = |sign: f64, a: f64, b: f64| {
            integrate_with_breaks(|t| (I * (sign * k) * p.stretch_1d(t)).exp() * f(t), a, b, &breaks, ORACLE_QUAD_TOL)
        };
        // forward sums for the left integral, backward sums for the right one:
        // J2 minus a forward sum cancels badly against e^{-ik x~} near R-hat
        let mut left = Vec::with_capacity(xs.len());
        let (mut acc, mut prev) = (ZERO, -rh);
        for &x in xs {
            acc += cell(-1.0, prev, x)?;
            left.push(acc);
            prev = x;
        }
        let mut right = vec![ZERO; xs.len()];
        let (mut acc, mut prev) = (ZERO, rh);
        for (i, &x) in xs.iter().enumerate().rev() {
            acc += cell(1.0, x, prev)?;
            right[i] = acc;
            prev = x;
        }
        let out = xs.iter().enumerate().map(|(i, &x)| self.combine(x, left[i], right[i])).collect();
        Ok(out)
    }

    pub fn moments(&self) -> (Complex64, Complex64) {
        (self.j1, self.j2)
    }
}

/// One-shot evaluation of the 1D closed form at x.
pub fn pml_1d_exact<F: Fn(f64) -> Complex64>(params: &PmlParams, f: F, x: f64) -> Result<Complex64> {
    Pml1dExact::new(*params, f)?.eval(x)
}

/// Complex radial profile on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub values: Vec<Complex64>,
    pub derivatives: Vec<Complex64>,
}

impl RadialProfile {
    pub fn new(r: Vec<f64>, values: Vec<Complex64>, derivatives: Vec<Complex64>) -> Result<Self> {
        if values.len() != r.len() || derivatives.len() != r.len() {
            return Err(Error::DimensionMismatch { expected: r.len(), got: values.len().min(derivatives.len()) });
        }
        if let Some(i) = r.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::UnsortedNodes(i + 1));
        }
        Ok(Self { r, values, derivatives })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Piecewise-linear value at r (clamped to the grid ends).
    pub fn interpolate(&self, r: f64) -> Complex64 {
        Self::lerp(&self.r, &self.values, r)
    }

    /// Piecewise-linear interpolation of the nodal derivatives.
    pub fn interpolate_derivative(&self, r: f64) -> Complex64 {
        Self::lerp(&self.r, &self.derivatives, r)
    }

    /// Value and Cartesian gradient of the radially symmetric field at x.
    pub fn eval_xy(&self, x: [f64; 2]) -> (Complex64, [Complex64; 2]) {
        let r = x[0].hypot(x[1]);
        let u = self.interpolate(r);
        if r == 0.0 {
            return (u, [ZERO; 2]);
        }
        let du = self.interpolate_derivative(r);
        (u, [du * (x[0] / r), du * (x[1] / r)])
    }

    fn lerp(grid: &[f64], v: &[Complex64], r: f64) -> Complex64 {
        let n = grid.len();
        if r <= grid[0] {
            return v[0];
        }
        if r >= grid[n - 1] {
            return v[n - 1];
        }
        let i = grid.partition_point(|&x| x <= r) - 1;
        let t = (r - grid[i]) / (grid[i + 1] - grid[i]);
        v[i] * (1.0 - t) + v[i + 1] * t
    }

    /// `sqrt(2 pi int_lo^hi r |u|^2 dr)` of the piecewise-linear profile.
    pub fn weighted_l2(&self, lo: f64, hi: f64) -> f64 {
        self.weighted_l2_of(lo, hi, |i| self.values[i])
    }

    /// Weighted L2 norm of `self - other` over `[lo, hi]`, with `other`
    /// interpolated onto this grid.
    pub fn weighted_l2_distance(&self, other: &RadialProfile, lo: f64, hi: f64) -> f64 {
        let diff: Vec<Complex64> = self.r.iter().zip(&self.values).map(|(&r, &v)| v - other.interpolate(r)).collect();
        self.weighted_l2_of(lo, hi, |i| diff[i])
    }

    fn weighted_l2_of(&self, lo: f64, hi: f64, value: impl Fn(usize) -> Complex64) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.r.len().saturating_sub(1) {
            let (a, b) = (self.r[i], self.r[i + 1]);
            if a < lo - 1e-14 || b > hi + 1e-14 {
                continue;
            }
            let (ua, ub) = (value(i), value(i + 1));
            for &(s, w) in &GAUSS3 {
                let t = 0.5 * (1.0 + s);
                let r = a + (b - a) * t;
                let u = ua * (1.0 - t) + ub * t;
                sum += 0.5 * (b - a) * w * r * u.norm_sqr();
            }
        }
        (2.0 * PI * sum).sqrt()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,re,im,dre,dim\n");
        for i in 0..self.r.len() {
            let (v, d) = (self.values[i], self.derivatives[i]);
            let _ = writeln!(s, "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", self.r[i], v.re, v.im, d.re, d.im);
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Free-space Fourier mode n for a source mode `f_n` supported in `[0, support)`,
/// evaluated on `grid` (sorted, inside `[0, support]`).
pub fn exact_mode_free_space<F: Fn(f64) -> Complex64>(
    k: f64,
    n: i64,
    f: F,
    support: f64,
    grid: &[f64],
) -> Result<RadialProfile> {
    let order = BesselOrder::new(n)?.magnitude();
    if grid.is_empty() {
        return RadialProfile::new(Vec::new(), Vec::new(), Vec::new());
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::UnsortedNodes(i + 1));
    }
    if grid[0] < 0.0 || *grid.last().expect("non-empty") > support * (1.0 + 1e-14) {
        return Err(Error::Domain(grid[0], "exact_mode_free_space grid"));
    }
    let jf = |t: f64| f(t) * (j_unchecked(order, k * t) * t);
    let hf = |t: f64| f(t) * hankel1_unchecked(order, k * t) * t;

    // inner[i] = int_0^{r_i} J f t, outer[i] = int_{r_i}^{support} H f t
    let m = grid.len();
    let mut inner = vec![ZERO; m];
    let mut acc = integrate(jf, 0.0, grid[0], ORACLE_QUAD_TOL)?;
    inner[0] = acc;
    for i in 1..m {
        acc += integrate(jf, grid[i - 1], grid[i], ORACLE_QUAD_TOL)?;
        inner[i] = acc;
    }
    let mut outer = vec![ZERO; m];
    let mut acc = integrate(hf, grid[m - 1], support, ORACLE_QUAD_TOL)?;
    outer[m - 1] = acc;
    for i in (0..m - 1).rev() {
        if grid[i] == 0.0 && order >= 2 {
            break; // not integrable at 0, and the J_n factor vanishes there
        }
        acc += integrate(hf, grid[i], grid[i + 1], ORACLE_QUAD_TOL)?;
        outer[i] = acc;
    }

    let c = I * (PI / 2.0);
    let jn_prime = |x: f64| {
        let lower = if order == 0 { -j_unchecked(1, x) } else { j_unchecked(order - 1, x) };
        0.5 * (lower - j_unchecked(order + 1, x))
    };
    let hn_prime = |x: f64| {
        let lower = if order == 0 { -hankel1_unchecked(1, x) } else { hankel1_unchecked(order - 1, x) };
        0.5 * (lower - hankel1_unchecked(order + 1, x))
    };
    let mut values = Vec::with_capacity(m);
    let mut derivatives = Vec::with_capacity(m);
    for i in 0..m {
        let r = grid[i];
        if r == 0.0 {
            // J_n(0) = delta_{n0}, J_n'(0) = delta_{n1} / 2, and H_n(kr) int_0^r -> 0
            let v = if order == 0 { c * outer[i] } else { ZERO };
            let d = if order == 1 { c * (0.5 * k) * outer[i] } else { ZERO };
            values.push(v);
            derivatives.push(d);
            continue;
        }
        let x = k * r;
        values.push(c * (j_unchecked(order, x) * outer[i] + hankel1_unchecked(order, x) * inner[i]));
        derivatives.push(c * k * (jn_prime(x) * outer[i] + hn_prime(x) * inner[i]));
    }
    RadialProfile::new(grid.to_vec(), values, derivatives)
}

/// Nested radial grid: `m_in` uniform cells on `[0, R]` and `m_out` cells on
/// `[R, R-hat]` graded by `s -> (s + s^2) / 2`, twice as fine at `r = R`.
pub fn radial_grid(params: &PmlParams, m_in: usize, m_out: usize) -> Vec<f64> {
    let (r0, l) = (params.r_inner, params.thickness());
    let mut grid = Vec::with_capacity(m_in + m_out + 1);
    for i in 0..=m_in {
        grid.push(r0 * i as f64 / m_in as f64);
    }
    for i in 1..=m_out {
        let s = i as f64 / m_out as f64;
        grid.push(r0 + l * 0.5 * (s + s * s));
    }
    *grid.last_mut().expect("non-empty") = params.r_outer;
    grid
}

/// Split of M cells between the physical interval and the layer.
pub fn radial_split(params: &PmlParams, m: usize) -> (usize, usize) {
    let m_in = ((m as f64 * params.r_inner / params.r_outer).round() as usize).clamp(1, m - 1);
    (m_in, m - m_in)
}

/// Minimum number of radial cells accepted by [`radial_mode_reference`].
pub const RADIAL_MIN_CELLS: usize = 2000;

/// Mode n of the 2D truncated PML problem by P1 FEM in r with weight r on
/// M cells.
pub fn radial_mode_reference<F: Fn(f64) -> Complex64>(params: &PmlParams, n: i64, f: F, m: usize) -> Result<RadialProfile> {
    if m < RADIAL_MIN_CELLS {
        return Err(Error::Config(format!("radial reference needs at least {RADIAL_MIN_CELLS} cells (got {m})")));
    }
    let (m_in, m_out) = radial_split(params, m);
    radial_mode_on_grid(params, n, &f, &radial_grid(params, m_in, m_out))
}

/// Richardson combination `(4 u_2M - u_M) / 3` on the M-cell grid nodes.
pub fn radial_mode_reference_extrapolated<F: Fn(f64) -> Complex64>(
    params: &PmlParams,
    n: i64,
    f: F,
    m: usize,
) -> Result<RadialProfile> {
    let coarse = radial_mode_reference(params, n, &f, m)?;
    let (m_in, m_out) = radial_split(params, m);
    let fine = radial_mode_on_grid(params, n, &f, &radial_grid(params, 2 * m_in, 2 * m_out))?;
    let combine = |c: &[Complex64], f: &[Complex64]| -> Vec<Complex64> {
        c.iter().enumerate().map(|(i, &u)| (f[2 * i] * 4.0 - u) / 3.0).collect()
    };
    let values = combine(&coarse.values, &fine.values);
    let derivatives = combine(&coarse.derivatives, &fine.derivatives);
    RadialProfile::new(coarse.r, values, derivatives)
}

/// Radial FEM on an explicit grid from 0 to R-hat containing R.
pub fn radial_mode_on_grid<F: Fn(f64) -> Complex64>(params: &PmlParams, n: i64, f: &F, grid: &[f64]) -> Result<RadialProfile> {
    let order = BesselOrder::new(n)?.magnitude();
    if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::UnsortedNodes(i + 1));
    }
    let nn = grid.len();
    let k2 = params.k * params.k;
    let n2 = (order * order) as f64;
    let mut trip = Vec::with_capacity(4 * nn);
    let mut load = vec![ZERO; nn];
    for c in 0..nn - 1 {
        let (a, b) = (grid[c], grid[c + 1]);
        let h = b - a;
        let mut stiff = ZERO;
        let mut mass = [[ZERO; 2]; 2];
        for &(s, w) in &GAUSS3 {
            let r = 0.5 * (a + b) + 0.5 * h * s;
            let (alpha, beta, _) = params.alpha_beta(r);
            let jw = 0.5 * h * w;
            let phi = [0.5 * (1.0 - s), 0.5 * (1.0 + s)];
            stiff += beta / alpha * (r * jw / (h * h));
            let zeroth = alpha * n2 / (beta * r) - alpha * beta * (k2 * r);
            let fr = f(r) * (r * jw);
            for i in 0..2 {
                for j in 0..2 {
                    mass[i][j] += zeroth * (jw * phi[i] * phi[j]);
                }
                load[c + i] += fr * phi[i];
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                let sign = if i == j { 1.0 } else { -1.0 };
                trip.push((c + i, c + j, stiff * sign + mass[i][j]));
            }
        }
    }
    let full = ComplexSparseMatrix::from_triplets(nn, &trip);
    // u(R-hat) = 0; u(0) = 0 unless n = 0
    let first = usize::from(order != 0);
    let index: Vec<Option<usize>> = (0..nn).map(|i| (i >= first && i < nn - 1).then(|| i - first)).collect();
    let dim = nn - 1 - first;
    let matrix = full.restrict(&index, dim);
    let rhs: Vec<Complex64> = (first..nn - 1).map(|i| load[i]).collect();
    let (x, _) = linsolve::solve(&matrix, &rhs)?;
    let mut values = vec![ZERO; nn];
    values[first..nn - 1].copy_from_slice(&x);
    let derivatives = nodal_slopes(grid, &values);
    RadialProfile::new(grid.to_vec(), values, derivatives)
}

/// Average of the adjacent cell slopes, one-sided at the ends.
fn nodal_slopes(grid: &[f64], values: &[Complex64]) -> Vec<Complex64> {
    let m = grid.len();
    let slope = |c: usize| (values[c + 1] - values[c]) / (grid[c + 1] - grid[c]);
    (0..m)
        .map(|i| match i {
            0 => slope(0),
            _ if i == m - 1 => slope(m - 2),
            _ => (slope(i - 1) + slope(i)) * 0.5,
        })
        .collect()
}
