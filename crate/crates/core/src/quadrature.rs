//! Triangle rules (symmetric Dunavant families), Gauss-Legendre on an
//! interval, and adaptive Gauss-Kronrod for complex integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Point in barycentric coordinates with a weight normalized to sum 1 over
/// the rule; multiply by the element area to integrate.
#[derive(Clone, Copy, Debug)]
pub struct BaryPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub degree: u32,
    pub points: Vec<BaryPoint>,
}

fn orbit3(weight: f64, a: f64, b: f64, out: &mut Vec<BaryPoint>) {
    // (a, b, b) and its rotations
    for bary in [[a, b, b], [b, a, b], [b, b, a]] {
        out.push(BaryPoint { bary, weight });
    }
}

fn orbit6(weight: f64, a: f64, b: f64, c: f64, out: &mut Vec<BaryPoint>) {
    for bary in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        out.push(BaryPoint { bary, weight });
    }
}

impl TriangleRule {
    /// 6 points, exact for degree 4.
    pub fn degree4() -> Self {
        let mut points = Vec::with_capacity(6);
        orbit3(0.223381589678011, 0.108103018168070, 0.445948490915965, &mut points);
        orbit3(0.109951743655322, 0.816847572980459, 0.091576213509771, &mut points);
        Self { degree: 4, points }
    }

    /// 12 points, exact for degree 6.
    pub fn degree6() -> Self {
        let mut points = Vec::with_capacity(12);
        orbit3(0.116786275726379, 0.501426509658179, 0.249286745170910, &mut points);
        orbit3(0.050844906370207, 0.873821971016996, 0.063089014491502, &mut points);
        orbit6(
            0.082851075618374,
            0.053145049844817,
            0.310352451033784,
            0.636502499121399,
            &mut points,
        );
        Self { degree: 6, points }
    }

    /// 16 points, exact for degree 8.
    pub fn degree8() -> Self {
        let third = 1.0 / 3.0;
        let mut points = vec![BaryPoint {
            bary: [third, third, third],
            weight: 0.144315607677787,
        }];
        orbit3(0.095091634267285, 0.081414823414554, 0.459292588292723, &mut points);
        orbit3(0.103217370534718, 0.658861384496480, 0.170569307751760, &mut points);
        orbit3(0.032458497623198, 0.898905543365938, 0.050547228317031, &mut points);
        orbit6(
            0.027230314174435,
            0.008394777409958,
            0.263112829634638,
            0.728492392955404,
            &mut points,
        );
        Self { degree: 8, points }
    }

    pub fn by_degree(degree: u32) -> Option<Self> {
        match degree {
            4 => Some(Self::degree4()),
            6 => Some(Self::degree6()),
            8 => Some(Self::degree8()),
            _ => None,
        }
    }
}

/// Three-point Gauss-Legendre nodes and weights on [-1, 1].
pub const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7/K15 pair on [a, b]: (Kronrod estimate, |K - G|).
pub fn gauss_kronrod15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).norm())
}

/// Globally adaptive G7/K15: repeatedly bisects the panel with the largest
/// error estimate until the summed estimate is below `abs_tol`.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<Complex64> {
    const MAX_PANELS: usize = 4000;
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    struct Panel {
        lo: f64,
        hi: f64,
        value: Complex64,
        err: f64,
    }
    let (value, err) = gauss_kronrod15(&f, a, b);
    let mut panels = vec![Panel { lo: a, hi: b, value, err }];
    let mut total_err = err;
    loop {
        let total: Complex64 = panels.iter().map(|p| p.value).sum();
        if total_err <= abs_tol.max(1e-15 * total.norm()) {
            panels.sort_by(|p, q| p.lo.total_cmp(&q.lo));
            return Ok(panels.iter().map(|p| p.value).sum());
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Quadrature { a, b, estimate: total_err });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        if mid <= p.lo || mid >= p.hi {
            return Err(Error::Quadrature { a: p.lo, b: p.hi, estimate: p.err });
        }
        let (lv, le) = gauss_kronrod15(&f, p.lo, mid);
        let (rv, re) = gauss_kronrod15(&f, mid, p.hi);
        total_err += le + re - p.err;
        panels.push(Panel { lo: p.lo, hi: mid, value: lv, err: le });
        panels.push(Panel { lo: mid, hi: p.hi, value: rv, err: re });
    }
}

/// [`integrate`] over [a, b] split at the given interior breakpoints
/// (discontinuities of the integrand).
pub fn integrate_with_breaks<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
) -> Result<Complex64> {
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&t| t > lo && t < hi).collect();
    cuts.sort_by(f64::total_cmp);
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);
    let pieces = (edges.len() - 1) as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for w in edges.windows(2) {
        sum += integrate(&f, w[0], w[1], abs_tol / pieces)?;
    }
    Ok(sum * sign)
}
