//! Bessel functions J_n, Y_n and the Hankel function H_n^(1) of integer order
//! for real, nonnegative arguments.
//!
//! Evaluation regimes for J_n:
//!
//! * ascending power series while `x^2/4 <= n + 1` (terms decrease monotonically),
//! * Hankel's large-argument expansion once it converges to full precision,
//! * Miller's backward recurrence normalized by `J_0 + 2 sum J_2k = 1` otherwise.
//!
//! Y_0 and Y_1 come from their logarithmic series for small x, from Neumann
//! series over the Miller sequence in the middle range, and from the asymptotic
//! expansion for large x. Higher orders follow by forward recurrence, which is
//! stable for the dominant solution.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported integer order.
pub const MAX_ORDER: u32 = 200;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments at or above this use the asymptotic expansion for Y_0 and Y_1.
const ASYMPTOTIC_MIN_X: f64 = 25.0;
/// Y_0/Y_1 logarithmic series is used below this argument.
const Y_SERIES_MAX_X: f64 = 2.0;

/// Integer Bessel order, stored as magnitude plus the reflection sign
/// `(-1)^n` that applies to negative orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BesselOrder {
    n: u32,
    negative: bool,
}

impl BesselOrder {
    pub fn new(n: i64) -> Result<Self> {
        if n.unsigned_abs() > MAX_ORDER as u64 {
            return Err(Error::OrderOutOfRange(n));
        }
        Ok(Self {
            n: n.unsigned_abs() as u32,
            negative: n < 0,
        })
    }

    pub fn magnitude(self) -> u32 {
        self.n
    }

    /// Factor relating `C_{-n}` to `C_n` for C = J, Y.
    fn reflection(self) -> f64 {
        if self.negative && self.n % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Bessel function of the first kind J_n(x), x >= 0.
pub fn bessel_j(n: i64, x: f64) -> Result<f64> {
    let order = BesselOrder::new(n)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(x, "bessel_j"));
    }
    Ok(order.reflection() * j_unchecked(order.magnitude(), x))
}

/// Bessel function of the second kind Y_n(x), x > 0.
///
/// Orders large enough to overflow at small x return `-inf`.
pub fn bessel_y(n: i64, x: f64) -> Result<f64> {
    let order = BesselOrder::new(n)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(x, "bessel_y"));
    }
    Ok(order.reflection() * y_unchecked(order.magnitude(), x))
}

/// Hankel function of the first kind H_n^(1)(x) = J_n(x) + i Y_n(x), x > 0.
pub fn hankel1(n: i64, x: f64) -> Result<Complex64> {
    Ok(Complex64::new(bessel_j(n, x)?, bessel_y(n, x)?))
}

pub(crate) fn j_unchecked(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if 0.25 * x * x <= (n + 1) as f64 {
        return j_series(n, x);
    }
    if x >= ASYMPTOTIC_MIN_X {
        if let Some((p, q)) = hankel_expansion(n, x) {
            let (_, cos_w, sin_w) = phase(n, x);
            return (FRAC_2_PI / x).sqrt() * (p * cos_w - q * sin_w);
        }
    }
    miller_sequence(n, x)[n as usize]
}

pub(crate) fn y_unchecked(n: u32, x: f64) -> f64 {
    let (y0, y1) = y01(x);
    if n == 0 {
        return y0;
    }
    let (mut prev, mut cur) = (y0, y1);
    for k in 1..n {
        let next = (2.0 * k as f64 / x) * cur - prev;
        prev = cur;
        cur = next;
        if !cur.is_finite() {
            return f64::NEG_INFINITY;
        }
    }
    cur
}

pub(crate) fn hankel1_unchecked(n: u32, x: f64) -> Complex64 {
    Complex64::new(j_unchecked(n, x), y_unchecked(n, x))
}

/// Ascending series `(x/2)^n sum (-x^2/4)^m / (m! (n+m)!)`.
fn j_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut prefactor = 1.0;
    for j in 1..=n {
        prefactor *= half / j as f64;
    }
    if prefactor == 0.0 {
        return 0.0;
    }
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        term *= q / (m as f64 * (n + m) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    prefactor * sum
}

/// Normalized Miller backward recurrence. Returns J_0..=J_top for some
/// `top >= n`, where `top` is the starting index of the recurrence.
fn miller_sequence(n: u32, x: f64) -> Vec<f64> {
    let base = (n as f64).max(x);
    let mut top = (base + 30.0 + 6.0 * base.sqrt()).ceil() as usize;
    top += top % 2;
    let mut vals = vec![0.0; top + 2];
    vals[top] = 1e-30;
    const BIG: f64 = 1e250;
    for k in (1..=top).rev() {
        let next = (2.0 * k as f64 / x) * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if next.abs() > BIG {
            for v in &mut vals[k - 1..=top] {
                *v /= BIG;
            }
        }
    }
    // J_0 + 2 (J_2 + J_4 + ...) = 1
    let mut norm = vals[0];
    let mut k = 2;
    while k <= top {
        norm += 2.0 * vals[k];
        k += 2;
    }
    vals.truncate(top + 1);
    for v in &mut vals {
        *v /= norm;
    }
    vals
}

/// cos/sin of `x - (2n+1) pi / 4` without forming the subtraction, so the
/// phase keeps full relative accuracy for large x.
fn phase(n: u32, x: f64) -> (f64, f64, f64) {
    let (sx, cx) = x.sin_cos();
    // c = m pi/4 with m odd; cos c and sin c are +-1/sqrt(2)
    let m = (2 * n as u64 + 1) % 8;
    let (cc, sc) = match m {
        1 => (1.0, 1.0),
        3 => (-1.0, 1.0),
        5 => (-1.0, -1.0),
        _ => (1.0, -1.0),
    };
    let cos_w = FRAC_1_SQRT_2 * (cx * cc + sx * sc);
    let sin_w = FRAC_1_SQRT_2 * (sx * cc - cx * sc);
    (m as f64, cos_w, sin_w)
}

/// Hankel's expansion `(P, Q)` for integer order n. `None` when the series
/// does not reach full double precision before diverging.
fn hankel_expansion(n: u32, x: f64) -> Option<(f64, f64)> {
    let mu = 4.0 * (n as f64) * (n as f64);
    let turn = 0.5 * (mu.sqrt() + 1.0);
    let mut term = 1.0f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut largest = 1.0f64;
    for k in 1..400u32 {
        let odd = (2 * k - 1) as f64;
        let prev = term.abs();
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        largest = largest.max(term.abs());
        if term == 0.0 || term.abs() < 1e-17 {
            return (largest < 10.0).then_some((p, q));
        }
        if k as f64 > turn && term.abs() >= prev {
            return None;
        }
    }
    None
}

fn y01(x: f64) -> (f64, f64) {
    if x < Y_SERIES_MAX_X {
        y01_series(x)
    } else if x < ASYMPTOTIC_MIN_X {
        y01_neumann(x)
    } else {
        let (p0, q0) = hankel_expansion(0, x).expect("order 0 expansion converges for x >= 25");
        let (p1, q1) = hankel_expansion(1, x).expect("order 1 expansion converges for x >= 25");
        let amp = (FRAC_2_PI / x).sqrt();
        let (_, c0, s0) = phase(0, x);
        let (_, c1, s1) = phase(1, x);
        (amp * (p0 * s0 + q0 * c0), amp * (p1 * s1 + q1 * c1))
    }
}

fn y01_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let log_term = (0.5 * x).ln();
    let j0 = j_series(0, x);
    let j1 = j_series(1, x);

    // Y_0: (2/pi) [ (ln(x/2) + gamma) J_0 + sum_{m>=1} (-1)^{m+1} H_m q^m / (m!)^2 ]
    let mut s0 = 0.0;
    let mut base = 1.0;
    let mut harmonic = 0.0;
    for m in 1..60 {
        base *= q / (m as f64 * m as f64);
        harmonic += 1.0 / m as f64;
        let t = if m % 2 == 1 { base * harmonic } else { -base * harmonic };
        s0 += t;
        if t.abs() < 1e-18 * s0.abs() {
            break;
        }
    }
    let y0 = FRAC_2_PI * ((log_term + EULER_GAMMA) * j0 + s0);

    // Y_1: -2/(pi x) + (2/pi) ln(x/2) J_1
    //      - (1/pi) (x/2) sum_{m>=0} (-q)^m (psi(m+1) + psi(m+2)) / (m! (m+1)!)
    let mut s1 = 0.0;
    let mut base = 1.0;
    let mut h_m = 0.0;
    for m in 0..60 {
        if m > 0 {
            base *= -q / (m as f64 * (m + 1) as f64);
            h_m += 1.0 / m as f64;
        }
        let h_m1 = h_m + 1.0 / (m + 1) as f64;
        let t = base * (h_m + h_m1 - 2.0 * EULER_GAMMA);
        s1 += t;
        if m > 2 && t.abs() < 1e-18 * s1.abs().max(1e-300) {
            break;
        }
    }
    let y1 = -FRAC_2_PI / x + FRAC_2_PI * log_term * j1 - (0.5 * x / PI) * s1;
    (y0, y1)
}

fn y01_neumann(x: f64) -> (f64, f64) {
    let j = miller_sequence(1, x);
    let log_term = (0.5 * x).ln() + EULER_GAMMA;

    // (pi/2) Y_0 = (ln(x/2) + gamma) J_0 - 2 sum_{k>=1} (-1)^k J_2k / k
    let mut s0 = 0.0;
    let mut k = 1;
    while 2 * k < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        k += 1;
    }
    let y0 = FRAC_2_PI * (log_term * j[0] - 2.0 * s0);

    // (pi/2) Y_1 = (ln(x/2) + gamma - 1) J_1 - J_0 / x
    //              - sum_{k>=1} (-1)^k (2k+1)/(k(k+1)) J_{2k+1}
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        s1 += sign * (2.0 * kf + 1.0) / (kf * (kf + 1.0)) * j[2 * k + 1];
        k += 1;
    }
    let y1 = FRAC_2_PI * ((log_term - 1.0) * j[1] - j[0] / x - s1);
    (y0, y1)
}
