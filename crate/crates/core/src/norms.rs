//! L2, H1-seminorm and energy norms of P1 fields, errors against reference
//! functions, and nodal interpolation.

use num_complex::Complex64;

use crate::assembly::{assemble_matrix, ElementGeometry, FormWeights};
use crate::error::{Error, Result};
use crate::geometry::{Mesh, RegionSel};
use crate::linsolve::ComplexSparseMatrix;
use crate::pml::PmlParams;
use crate::quadrature::TriangleRule;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Reference value and Cartesian gradient at a point.
pub type Reference<'a> = dyn Fn([f64; 2]) -> (Complex64, [Complex64; 2]) + Sync + 'a;

fn element_gradient(geo: &ElementGeometry, vals: [Complex64; 3]) -> [Complex64; 2] {
    let mut g = [ZERO; 2];
    for a in 0..3 {
        g[0] += vals[a] * geo.grads[a][0];
        g[1] += vals[a] * geo.grads[a][1];
    }
    g
}

fn element_values(nodal: &[Complex64], tri: [usize; 3]) -> [Complex64; 3] {
    [nodal[tri[0]], nodal[tri[1]], nodal[tri[2]]]
}

/// `(||u||_L2, |u|_H1)` of a nodal P1 field over the selected triangles.
pub fn field_norms(mesh: &Mesh, nodal: &[Complex64], region: RegionSel) -> (f64, f64) {
    let rule = TriangleRule::degree4();
    let (mut l2, mut h1) = (0.0, 0.0);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if !region.contains(mesh.triangle_region[t]) {
            continue;
        }
        let geo = ElementGeometry::of(mesh, t);
        let vals = element_values(nodal, *tri);
        let g = element_gradient(&geo, vals);
        h1 += geo.area * (g[0].norm_sqr() + g[1].norm_sqr());
        for q in &rule.points {
            let u = vals[0] * q.bary[0] + vals[1] * q.bary[1] + vals[2] * q.bary[2];
            l2 += geo.area * q.weight * u.norm_sqr();
        }
    }
    (l2.sqrt(), h1.sqrt())
}

/// Matrices of the energy norm `|||v|||^2 = Re a(v, v) + 2 k^2 ||v||^2` on D,
/// with `a` the unstabilized sesquilinear form.
#[derive(Clone, Debug)]
pub struct EnergyForm {
    pub a_form: ComplexSparseMatrix,
    pub mass: ComplexSparseMatrix,
    pub k: f64,
}

impl EnergyForm {
    pub fn new(mesh: &Mesh, params: &PmlParams) -> Self {
        let rule = TriangleRule::degree4();
        let a_form = assemble_matrix(mesh, params, FormWeights::helmholtz(params.k, ZERO), &rule);
        let mass = assemble_matrix(mesh, params, FormWeights::only_mass_plain(), &rule);
        Self { a_form, mass, k: params.k }
    }

    /// Radicand of the energy norm for nodal values over all vertices.
    pub fn squared(&self, nodal: &[Complex64]) -> f64 {
        // entries are a(phi_j, phi_i), so a(v, v) = v^H A v
        let a = self.a_form.form(nodal, nodal);
        let m = self.mass.form(nodal, nodal);
        a.re + 2.0 * self.k * self.k * m.re
    }

    pub fn norm(&self, nodal: &[Complex64]) -> Result<f64> {
        let s = self.squared(nodal);
        let scale = self.k * self.k * self.mass.form(nodal, nodal).re.abs();
        if s < -1e-12 * scale {
            return Err(Error::NegativeEnergy(s));
        }
        Ok(s.max(0.0).sqrt())
    }
}

/// One-shot energy norm.
pub fn energy_norm(mesh: &Mesh, params: &PmlParams, nodal: &[Complex64]) -> Result<f64> {
    EnergyForm::new(mesh, params).norm(nodal)
}

/// Errors of a P1 field against a reference over a region.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub region: RegionSel,
    pub l2_error: f64,
    pub h1_semi_error: f64,
    /// `sqrt(|e|_1^2 + k^2 ||e||^2)`, the energy norm where A = I and B = 1.
    pub energy_error: f64,
    pub reference_l2: f64,
    pub reference_h1_semi: f64,
    pub reference_energy: f64,
    pub rel_l2: Option<f64>,
    pub rel_h1_semi: Option<f64>,
    pub rel_energy: Option<f64>,
}

fn relative(err: f64, reference: f64) -> Option<f64> {
    (reference > 0.0).then(|| err / reference)
}

/// Errors and reference norms by the degree-6 rule over the region.
pub fn error_vs_reference(mesh: &Mesh, nodal: &[Complex64], reference: &Reference<'_>, region: RegionSel, k: f64) -> ErrorReport {
    error_vs_reference_with(mesh, nodal, reference, region, k, &TriangleRule::degree6())
}

pub fn error_vs_reference_with(
    mesh: &Mesh,
    nodal: &[Complex64],
    reference: &Reference<'_>,
    region: RegionSel,
    k: f64,
    rule: &TriangleRule,
) -> ErrorReport {
    let (mut el2, mut eh1, mut rl2, mut rh1) = (0.0, 0.0, 0.0, 0.0);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if !region.contains(mesh.triangle_region[t]) {
            continue;
        }
        let geo = ElementGeometry::of(mesh, t);
        let vals = element_values(nodal, *tri);
        let g = element_gradient(&geo, vals);
        for q in &rule.points {
            let x = geo.map(q.bary);
            let (u, du) = reference(x);
            let uh = vals[0] * q.bary[0] + vals[1] * q.bary[1] + vals[2] * q.bary[2];
            let w = geo.area * q.weight;
            el2 += w * (uh - u).norm_sqr();
            eh1 += w * ((g[0] - du[0]).norm_sqr() + (g[1] - du[1]).norm_sqr());
            rl2 += w * u.norm_sqr();
            rh1 += w * (du[0].norm_sqr() + du[1].norm_sqr());
        }
    }
    let k2 = k * k;
    let energy = (eh1 + k2 * el2).sqrt();
    let ref_energy = (rh1 + k2 * rl2).sqrt();
    let (el2, eh1, rl2, rh1) = (el2.sqrt(), eh1.sqrt(), rl2.sqrt(), rh1.sqrt());
    ErrorReport {
        region,
        l2_error: el2,
        h1_semi_error: eh1,
        energy_error: energy,
        reference_l2: rl2,
        reference_h1_semi: rh1,
        reference_energy: ref_energy,
        rel_l2: relative(el2, rl2),
        rel_h1_semi: relative(eh1, rh1),
        rel_energy: relative(energy, ref_energy),
    }
}

/// Vertex values of `f`, boundary vertices included.
pub fn interpolate(mesh: &Mesh, f: impl Fn([f64; 2]) -> Complex64) -> Vec<Complex64> {
    mesh.vertices.iter().map(|&x| f(x)).collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).0
}

/// `(slope, intercept)` of the least-squares line.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
