//! Bessel/Hankel accuracy against an independent double-double series oracle
//! and the identities used by the reference solutions.

use std::f64::consts::PI;

use helmpml::specialfun::{bessel_j, bessel_y, hankel1};
use proptest::prelude::*;

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    #[allow(clippy::approx_constant)]
    const PI: Dd = Dd { hi: 3.141592653589793, lo: 1.2246467991473532e-16 };
    const GAMMA: Dd = Dd { hi: 0.5772156649015329, lo: -4.942915152430645e-18 };

    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        let e = (a - (s - bb)) + (b - bb);
        Dd { hi: s, lo: e }
    }

    fn norm(hi: f64, lo: f64) -> Dd {
        let s = hi + lo;
        Dd { hi: s, lo: lo - (s - hi) }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        Dd::norm(s.hi, s.lo + self.lo + o.lo)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::norm(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::from(q2)));
        let q3 = r.hi / o.hi;
        Dd::from(q1).add(Dd::from(q2)).add(Dd::from(q3))
    }

    fn abs(self) -> f64 {
        self.hi.abs()
    }
}

/// J_n(x) from the ascending series in double-double arithmetic.
fn oracle_j(n: u32, x: f64) -> f64 {
    let half = Dd::from(0.5 * x);
    let mut pre = Dd::ONE;
    for j in 1..=n {
        pre = pre.mul(half).div(Dd::from(j as f64));
    }
    let q = half.mul(half).neg();
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let mut biggest = 1.0f64;
    for m in 1..400u32 {
        term = term.mul(q).div(Dd::from(m as f64 * (n + m) as f64));
        sum = sum.add(term);
        biggest = biggest.max(term.abs());
        if term.abs() < 1e-34 * biggest {
            break;
        }
    }
    pre.mul(sum).hi
}

fn oracle_j_dd(n: u32, x: f64) -> Dd {
    // Re-run with the Dd result kept for the Y oracle.
    let half = Dd::from(0.5 * x);
    let mut pre = Dd::ONE;
    for j in 1..=n {
        pre = pre.mul(half).div(Dd::from(j as f64));
    }
    let q = half.mul(half).neg();
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    for m in 1..400u32 {
        term = term.mul(q).div(Dd::from(m as f64 * (n + m) as f64));
        sum = sum.add(term);
        if term.abs() < 1e-40 {
            break;
        }
    }
    pre.mul(sum)
}

/// Y_0 and Y_1 from their logarithmic series, then forward recurrence.
fn oracle_y(n: u32, x: f64) -> f64 {
    let half = Dd::from(0.5 * x);
    let q = half.mul(half);
    let log = Dd::from((0.5 * x).ln());
    let two_over_pi = Dd::from(2.0).div(Dd::PI);

    let j0 = oracle_j_dd(0, x);
    let j1 = oracle_j_dd(1, x);

    let mut s0 = Dd::ZERO;
    let mut base = Dd::ONE;
    let mut h = Dd::ZERO;
    for m in 1..400u32 {
        base = base.mul(q).div(Dd::from((m as f64) * (m as f64)));
        h = h.add(Dd::ONE.div(Dd::from(m as f64)));
        let t = base.mul(h);
        s0 = if m % 2 == 1 { s0.add(t) } else { s0.sub(t) };
        if t.abs() < 1e-40 {
            break;
        }
    }
    let y0 = two_over_pi.mul(log.add(Dd::GAMMA).mul(j0).add(s0));

    let mut s1 = Dd::ZERO;
    let mut base = Dd::ONE;
    let mut hm = Dd::ZERO;
    for m in 0..400u32 {
        if m > 0 {
            base = base.mul(q).div(Dd::from(m as f64 * (m + 1) as f64));
            hm = hm.add(Dd::ONE.div(Dd::from(m as f64)));
        }
        let hm1 = hm.add(Dd::ONE.div(Dd::from((m + 1) as f64)));
        let psi_sum = hm.add(hm1).sub(Dd::GAMMA).sub(Dd::GAMMA);
        let t = base.mul(psi_sum);
        s1 = if m % 2 == 0 { s1.add(t) } else { s1.sub(t) };
        if m > 2 && t.abs() < 1e-40 {
            break;
        }
    }
    let y1 = two_over_pi
        .div(Dd::from(x))
        .neg()
        .add(two_over_pi.mul(log).mul(j1))
        .sub(half.div(Dd::PI).mul(s1));

    if n == 0 {
        return y0.hi;
    }
    let (mut prev, mut cur) = (y0, y1);
    for k in 1..n {
        let next = Dd::from(2.0 * k as f64).div(Dd::from(x)).mul(cur).sub(prev);
        prev = cur;
        cur = next;
        if !cur.hi.is_finite() {
            return f64::NEG_INFINITY;
        }
    }
    cur.hi
}

fn log_grid(a: f64, b: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Scale for error measurement: the value itself, or the oscillation
/// envelope past the turning point where zeros make pure relative error
/// meaningless.
fn scale(n: u32, x: f64, value: f64) -> f64 {
    let env = if x >= n as f64 { (2.0 / (PI * x)).sqrt() } else { 0.0 };
    value.abs().max(env)
}

#[test]
fn j_matches_double_double_series_on_log_grid() {
    let grid = log_grid(1e-8, 40.0, 200);
    let mut worst = 0.0f64;
    for n in 0..=200u32 {
        for &x in &grid {
            let want = oracle_j(n, x);
            if want.abs() < 1e-280 {
                continue;
            }
            let got = bessel_j(n as i64, x).unwrap();
            let err = (got - want).abs() / scale(n, x, want);
            worst = worst.max(err);
            assert!(err <= 1e-12, "J_{n}({x}): got {got:e}, want {want:e}, err {err:e}");
        }
    }
    println!("worst scaled J error: {worst:e}");
}

#[test]
fn y_matches_double_double_series_on_log_grid() {
    let grid = log_grid(1e-4, 40.0, 200);
    let mut worst = 0.0f64;
    for n in 0..=200u32 {
        for &x in &grid {
            let want = oracle_y(n, x);
            if !want.is_finite() || want.abs() > 1e290 {
                continue;
            }
            let got = bessel_y(n as i64, x).unwrap();
            let err = (got - want).abs() / scale(n, x, want);
            worst = worst.max(err);
            assert!(err <= 1e-10, "Y_{n}({x}): got {got:e}, want {want:e}, err {err:e}");
        }
    }
    println!("worst scaled Y error: {worst:e}");
}

#[test]
fn first_zero_of_j0_from_oracle_bisection() {
    let (mut a, mut b) = (2.0, 3.0);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if oracle_j(0, a).signum() == oracle_j(0, m).signum() {
            a = m;
        } else {
            b = m;
        }
    }
    assert!((a - 2.404825557695773).abs() < 1e-14);
    assert!(bessel_j(0, a).unwrap().abs() < 1e-10);
}

#[test]
fn oracle_reproduces_frozen_values() {
    assert!((oracle_j(0, 1.0) - 0.7651976865579666).abs() < 1e-16);
    assert!((oracle_y(0, 1.0) - 0.08825696421567696).abs() < 1e-16);
    assert!((oracle_y(1, 1.0) + 0.7812128213002887).abs() < 1e-16);
}

/// High-precision values for large arguments, beyond the reach of the
/// series oracle: (n, x, J_n(x), Y_n(x)).
const LARGE_ARGUMENT: &[(u32, f64, f64, f64)] = &[
    (0, 50.0, 0.055812327669251815005, -0.098064995470077079029),
    (1, 123.4, -0.0068509998856543724112, 0.071499539392064844158),
    (3, 1000.0, -0.0048274208252039478996, 0.024765269345790948847),
    (10, 77.7, 0.050442297340982964265, -0.075613478846403183212),
    (20, 300.0, -0.0064811516887627689586, -0.045659489850058205604),
    (50, 60.0, -0.13798273148535212047, 0.0086417699626744902868),
    (50, 2000.0, 0.0038217563362749020416, -0.017429961938776477588),
    (100, 150.0, -0.015359526118405390629, 0.073876071245019868315),
    (150, 9999.5, 0.0078895941739158192604, 0.0011944155231437806681),
    (200, 10000.0, -0.00036340052342683507369, -0.0079713645903919378069),
    (200, 250.0, -0.0059021679152339692719, 0.064874115156168023098),
    (7, 5000.0, 0.0091492157035509845891, -0.0066042358092698393724),
    (0, 10000.0, -0.0070961603533888014773, 0.0036478055589866058867),
    (1, 3333.3, 0.0090614755606404955203, 0.010434438590483597515),
];

#[test]
fn large_argument_values() {
    for &(n, x, j, y) in LARGE_ARGUMENT {
        let env = (2.0 / (PI * x)).sqrt();
        let gj = bessel_j(n as i64, x).unwrap();
        let gy = bessel_y(n as i64, x).unwrap();
        assert!((gj - j).abs() <= 1e-12 * env.max(j.abs()), "J_{n}({x}) = {gj:e} vs {j:e}");
        assert!((gy - y).abs() <= 1e-10 * env.max(y.abs()), "Y_{n}({x}) = {gy:e} vs {y:e}");
    }
}

#[test]
fn wronskian_on_log_grid() {
    for n in 0..=20i64 {
        for x in log_grid(0.1, 100.0, 50) {
            let w = bessel_j(n + 1, x).unwrap() * bessel_y(n, x).unwrap()
                - bessel_j(n, x).unwrap() * bessel_y(n + 1, x).unwrap();
            let want = 2.0 / (PI * x);
            assert!((w - want).abs() <= 1e-10 * want, "n={n} x={x}: {w:e} vs {want:e}");
        }
    }
}

#[test]
fn three_term_recurrence() {
    for n in 1..=60i64 {
        for x in log_grid(0.05, 500.0, 60) {
            let lhs = bessel_j(n - 1, x).unwrap() + bessel_j(n + 1, x).unwrap();
            let rhs = 2.0 * n as f64 / x * bessel_j(n, x).unwrap();
            let scale = lhs.abs().max(rhs.abs()).max(scale(n as u32, x, 0.0));
            if scale < 1e-280 {
                continue;
            }
            assert!((lhs - rhs).abs() <= 1e-9 * scale, "n={n} x={x}");
        }
    }
}

#[test]
fn j_bounded_by_one() {
    for n in 0..=30i64 {
        for x in log_grid(1e-3, 1e3, 120) {
            assert!(bessel_j(n, x).unwrap().abs() <= 1.0);
        }
    }
}

#[test]
fn hankel_modulus_monotone() {
    let xs = log_grid(0.05, 200.0, 80);
    for n in 0..=10i64 {
        let mods: Vec<f64> = xs.iter().map(|&x| hankel1(n, x).unwrap().norm()).collect();
        for w in mods.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-13), "n={n}");
        }
    }
}

#[test]
fn h0_asymptotic_bound() {
    let bound = PI / 8.0 * (PI / 8.0).exp();
    for x in log_grid(1.0, 1000.0, 400) {
        let h = hankel1(0, x).unwrap().norm();
        let dev = (h * (PI * x / 2.0).sqrt() - 1.0).abs();
        assert!(dev <= bound, "x={x}: {dev}");
    }
}

proptest! {
    #[test]
    fn wronskian_random(n in 0i64..=150, x in 0.5f64..2000.0) {
        let w = bessel_j(n + 1, x).unwrap() * bessel_y(n, x).unwrap()
            - bessel_j(n, x).unwrap() * bessel_y(n + 1, x).unwrap();
        let want = 2.0 / (PI * x);
        prop_assume!(w.is_finite());
        prop_assert!((w - want).abs() <= 1e-9 * want);
    }
}
