//! P1 assembly of the truncated PML problem and its CIP stabilization.
//!
//! The sesquilinear form is
//! `a_h(u, v) = (A grad u, grad v) - k^2 (B u, v) + sum_e gamma h_e <[du/dn], [dv/dn]>_e`
//! with the penalty sum restricted to interior edges of the physical disk.
//! Basis functions are real, so the assembled matrix is complex symmetric.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Mesh, Region, VertexFlag};
use crate::linsolve::{self, ComplexSparseMatrix, SolveReport};
use crate::pml::PmlParams;
use crate::quadrature::{TriangleRule, GAUSS3};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Right-hand side of the Helmholtz problem.
#[derive(Clone)]
pub enum Source {
    /// `f = value` on the physical disk, zero in the layer.
    ConstantOnPhysical(Complex64),
    /// `f(x) = profile(|x|)` everywhere.
    Radial(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
}

impl Default for Source {
    fn default() -> Self {
        Source::ConstantOnPhysical(Complex64::new(1.0, 0.0))
    }
}

impl std::fmt::Debug for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::ConstantOnPhysical(v) => write!(f, "ConstantOnPhysical({v})"),
            Source::Radial(_) => write!(f, "Radial(..)"),
        }
    }
}

/// Mesh vertex <-> degree of freedom; outer-boundary vertices carry none.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    pub vertex_to_dof: Vec<Option<usize>>,
    pub dof_to_vertex: Vec<usize>,
}

impl DofMap {
    pub fn from_mesh(mesh: &Mesh) -> Self {
        let mut vertex_to_dof = vec![None; mesh.num_vertices()];
        let mut dof_to_vertex = Vec::new();
        for (v, flag) in mesh.vertex_flags.iter().enumerate() {
            if *flag == VertexFlag::Interior {
                vertex_to_dof[v] = Some(dof_to_vertex.len());
                dof_to_vertex.push(v);
            }
        }
        Self { vertex_to_dof, dof_to_vertex }
    }

    pub fn len(&self) -> usize {
        self.dof_to_vertex.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dof_to_vertex.is_empty()
    }

    /// Nodal values with zeros on the outer boundary.
    pub fn expand(&self, dofs: &[Complex64]) -> Vec<Complex64> {
        let mut nodal = vec![ZERO; self.vertex_to_dof.len()];
        for (d, &v) in self.dof_to_vertex.iter().enumerate() {
            nodal[v] = dofs[d];
        }
        nodal
    }

    pub fn restrict(&self, nodal: &[Complex64]) -> Vec<Complex64> {
        self.dof_to_vertex.iter().map(|&v| nodal[v]).collect()
    }
}

/// Coefficients of the bilinear pieces combined into one matrix.
#[derive(Clone, Copy, Debug, Default)]
pub struct FormWeights {
    /// times `(A grad u, grad v)`
    pub stiffness: Complex64,
    /// times `(B u, v)`
    pub mass_b: Complex64,
    /// times `(u, v)`
    pub mass_plain: Complex64,
    /// times `sum_e h_e <[du/dn], [dv/dn]>` over physical interior edges
    pub penalty: Complex64,
}

impl FormWeights {
    /// `a_h` with wave number k and penalty gamma.
    pub fn helmholtz(k: f64, gamma: Complex64) -> Self {
        Self {
            stiffness: Complex64::new(1.0, 0.0),
            mass_b: Complex64::new(-k * k, 0.0),
            mass_plain: ZERO,
            penalty: gamma,
        }
    }

    pub fn only_stiffness() -> Self {
        Self { stiffness: Complex64::new(1.0, 0.0), ..Self::default() }
    }

    pub fn only_mass_b() -> Self {
        Self { mass_b: Complex64::new(1.0, 0.0), ..Self::default() }
    }

    pub fn only_mass_plain() -> Self {
        Self { mass_plain: Complex64::new(1.0, 0.0), ..Self::default() }
    }

    pub fn only_penalty() -> Self {
        Self { penalty: Complex64::new(1.0, 0.0), ..Self::default() }
    }
}

/// Per-element constant data of a straight P1 triangle.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry {
    pub points: [[f64; 2]; 3],
    pub area: f64,
    /// Gradients of the barycentric coordinates.
    pub grads: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(points: [[f64; 2]; 3]) -> Self {
        let [p0, p1, p2] = points;
        let twice = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
        let mut grads = [[0.0; 2]; 3];
        for i in 0..3 {
            let pj = points[(i + 1) % 3];
            let pk = points[(i + 2) % 3];
            grads[i] = [(pj[1] - pk[1]) / twice, (pk[0] - pj[0]) / twice];
        }
        Self { points, area: 0.5 * twice, grads }
    }

    pub fn of(mesh: &Mesh, t: usize) -> Self {
        Self::new(mesh.triangle_points(t))
    }

    pub fn map(&self, bary: [f64; 3]) -> [f64; 2] {
        let [p0, p1, p2] = self.points;
        [
            bary[0] * p0[0] + bary[1] * p1[0] + bary[2] * p2[0],
            bary[0] * p0[1] + bary[1] * p1[1] + bary[2] * p2[1],
        ]
    }
}

/// Full (pre-Dirichlet) matrix over all mesh vertices.
pub fn assemble_matrix(mesh: &Mesh, params: &PmlParams, weights: FormWeights, rule: &TriangleRule) -> ComplexSparseMatrix {
    let nv = mesh.num_vertices();
    let mut trip: Vec<(usize, usize, Complex64)> = Vec::with_capacity(9 * mesh.num_triangles());
    let need_elements = weights.stiffness != ZERO || weights.mass_b != ZERO || weights.mass_plain != ZERO;
    if need_elements {
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let local = element_matrix(&ElementGeometry::of(mesh, t), params, weights, rule);
            for a in 0..3 {
                for b in 0..3 {
                    trip.push((tri[a], tri[b], local[a][b]));
                }
            }
        }
    }
    if weights.penalty != ZERO {
        for (verts, local) in penalty_blocks(mesh) {
            for a in 0..4 {
                for b in 0..4 {
                    trip.push((verts[a], verts[b], weights.penalty * local[a][b]));
                }
            }
        }
    }
    ComplexSparseMatrix::from_triplets(nv, &trip)
}

fn element_matrix(geo: &ElementGeometry, params: &PmlParams, w: FormWeights, rule: &TriangleRule) -> [[Complex64; 3]; 3] {
    let mut out = [[ZERO; 3]; 3];
    let mut a_avg = [[ZERO; 2]; 2];
    for q in &rule.points {
        let x = geo.map(q.bary);
        if w.stiffness != ZERO {
            let a = params.coeff_a_2d(x).to_array();
            for i in 0..2 {
                for j in 0..2 {
                    a_avg[i][j] += a[i][j] * q.weight;
                }
            }
        }
        let mass_coeff = if w.mass_b != ZERO { w.mass_b * params.coeff_b_2d(x) } else { ZERO } + w.mass_plain;
        if mass_coeff != ZERO {
            let scaled = mass_coeff * (q.weight * geo.area);
            for a in 0..3 {
                for b in 0..3 {
                    out[a][b] += scaled * (q.bary[a] * q.bary[b]);
                }
            }
        }
    }
    if w.stiffness != ZERO {
        let g = geo.grads;
        for a in 0..3 {
            for b in 0..3 {
                let mut s = ZERO;
                for i in 0..2 {
                    for j in 0..2 {
                        s += a_avg[i][j] * (g[a][i] * g[b][j]);
                    }
                }
                out[a][b] += w.stiffness * s * geo.area;
            }
        }
    }
    out
}

/// Unit-penalty blocks `h_e |e| [grad phi_a . n][grad phi_b . n]` over the
/// four vertices of each pair of physical triangles sharing an edge.
pub fn penalty_blocks(mesh: &Mesh) -> Vec<([usize; 4], [[f64; 4]; 4])> {
    let set = mesh.interior_edges_in_region(Region::Physical);
    let mut out = Vec::with_capacity(set.len());
    for e in &set.edges {
        let t1 = mesh.triangles[e.first];
        let t2 = mesh.triangles[e.second];
        let g1 = ElementGeometry::of(mesh, e.first).grads;
        let g2 = ElementGeometry::of(mesh, e.second).grads;
        let edge_verts = mesh.edges[e.edge].v;
        let opp1 = *t1.iter().find(|v| !edge_verts.contains(v)).expect("opposite vertex");
        let opp2 = *t2.iter().find(|v| !edge_verts.contains(v)).expect("opposite vertex");
        let verts = [edge_verts[0], edge_verts[1], opp1, opp2];
        let mut jump = [0.0; 4];
        for (slot, &v) in verts.iter().enumerate() {
            let dn = |tri: [usize; 3], g: [[f64; 2]; 3]| {
                tri.iter()
                    .position(|&w| w == v)
                    .map_or(0.0, |i| g[i][0] * e.normal[0] + g[i][1] * e.normal[1])
            };
            jump[slot] = dn(t1, g1) - dn(t2, g2);
        }
        let scale = e.length * e.length;
        let mut local = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                local[a][b] = scale * jump[a] * jump[b];
            }
        }
        out.push((verts, local));
    }
    out
}

/// `(f, phi_i)` over all vertices.
pub fn assemble_load(mesh: &Mesh, source: &Source, rule: &TriangleRule) -> Vec<Complex64> {
    let mut load = vec![ZERO; mesh.num_vertices()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let geo = ElementGeometry::of(mesh, t);
        match source {
            Source::ConstantOnPhysical(value) => {
                if mesh.triangle_region[t] != Region::Physical {
                    continue;
                }
                // int phi_a = area / 3 exactly; the rule reproduces it
                for q in &rule.points {
                    for a in 0..3 {
                        load[tri[a]] += value * (q.weight * geo.area * q.bary[a]);
                    }
                }
            }
            Source::Radial(profile) => {
                for q in &rule.points {
                    let x = geo.map(q.bary);
                    let f = profile(x[0].hypot(x[1]));
                    for a in 0..3 {
                        load[tri[a]] += f * (q.weight * geo.area * q.bary[a]);
                    }
                }
            }
        }
    }
    load
}

/// Removes outer-boundary rows and columns (homogeneous Dirichlet data).
pub fn apply_dirichlet(matrix: &ComplexSparseMatrix, load: &[Complex64], dofs: &DofMap) -> (ComplexSparseMatrix, Vec<Complex64>) {
    (matrix.restrict(&dofs.vertex_to_dof, dofs.len()), dofs.restrict(load))
}

/// Reduced CIP-FEM system.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: ComplexSparseMatrix,
    pub load: Vec<Complex64>,
    pub dofs: DofMap,
    pub params: PmlParams,
    pub gamma: Complex64,
}

pub fn assemble_system(mesh: &Mesh, params: &PmlParams, gamma: Complex64, source: &Source) -> Result<LinearSystem> {
    assemble_system_with(mesh, params, gamma, source, &TriangleRule::degree4())
}

pub fn assemble_system_with(
    mesh: &Mesh,
    params: &PmlParams,
    gamma: Complex64,
    source: &Source,
    rule: &TriangleRule,
) -> Result<LinearSystem> {
    mesh.validate()?;
    let full = assemble_matrix(mesh, params, FormWeights::helmholtz(params.k, gamma), rule);
    if full.iter().any(|(_, _, v)| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::InvalidMesh("non-finite coefficient during assembly".into()));
    }
    let load = assemble_load(mesh, source, rule);
    let dofs = DofMap::from_mesh(mesh);
    let (matrix, load) = apply_dirichlet(&full, &load, &dofs);
    Ok(LinearSystem { matrix, load, dofs, params: *params, gamma })
}

/// Discrete solution with its nodal expansion.
#[derive(Clone, Debug)]
pub struct FemSolution {
    pub dofs: Vec<Complex64>,
    /// One value per mesh vertex, zero on the outer boundary.
    pub nodal: Vec<Complex64>,
    pub params: PmlParams,
    pub gamma: Complex64,
    pub report: SolveReport,
}

impl LinearSystem {
    pub fn solve(&self) -> Result<FemSolution> {
        self.solve_with(linsolve::Backend::Auto)
    }

    pub fn solve_with(&self, backend: linsolve::Backend) -> Result<FemSolution> {
        let (dofs, report) = linsolve::solve_with(&self.matrix, &self.load, backend)?;
        if dofs.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NearSingular { step: 0, pivot: 0.0, threshold: linsolve::PIVOT_TOLERANCE });
        }
        let nodal = self.dofs.expand(&dofs);
        Ok(FemSolution { dofs, nodal, params: self.params, gamma: self.gamma, report })
    }
}

/// Tridiagonal system of the 1D truncated PML problem on `[-R-hat, R-hat]`.
#[derive(Clone, Debug)]
pub struct System1d {
    pub matrix: ComplexSparseMatrix,
    pub load: Vec<Complex64>,
    pub nodes: Vec<f64>,
}

impl System1d {
    /// Nodal solution including the two zero boundary values.
    pub fn solve(&self) -> Result<(Vec<Complex64>, SolveReport)> {
        let (x, rep) = linsolve::solve(&self.matrix, &self.load)?;
        let mut full = Vec::with_capacity(x.len() + 2);
        full.push(ZERO);
        full.extend(x);
        full.push(ZERO);
        Ok((full, rep))
    }
}

/// P1 assembly of `-(u'/alpha)' - alpha k^2 u = f` with three-point Gauss
/// per cell and Dirichlet conditions at both ends.
pub fn assemble_1d(params: &PmlParams, nodes: &[f64], f: &dyn Fn(f64) -> Complex64) -> Result<System1d> {
    if nodes.len() < 3 {
        return Err(Error::Config("1D mesh needs at least three nodes".into()));
    }
    if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::UnsortedNodes(i + 1));
    }
    let rh = params.r_outer;
    let tol = 1e-12 * rh;
    let first = nodes[0];
    let last = *nodes.last().expect("non-empty");
    if (first + rh).abs() > tol || (last - rh).abs() > tol {
        return Err(Error::Config(format!("1D nodes must span [-{rh}, {rh}]")));
    }
    for target in [-params.r_inner, params.r_inner] {
        if !nodes.iter().any(|&x| (x - target).abs() <= tol) {
            return Err(Error::Config(format!("1D nodes must include the interface point {target}")));
        }
    }
    let n = nodes.len();
    let k2 = params.k * params.k;
    let mut trip = Vec::with_capacity(4 * n);
    let mut load = vec![ZERO; n];
    for c in 0..n - 1 {
        let (xa, xb) = (nodes[c], nodes[c + 1]);
        let h = xb - xa;
        let mut k_loc = ZERO;
        let mut m_loc = [[ZERO; 2]; 2];
        for &(s, w) in &GAUSS3 {
            let x = 0.5 * (xa + xb) + 0.5 * h * s;
            let (a, b) = params.coeff_1d(x);
            let phi = [0.5 * (1.0 - s), 0.5 * (1.0 + s)];
            let jw = 0.5 * h * w;
            k_loc += a * (jw / (h * h));
            for i in 0..2 {
                for j in 0..2 {
                    m_loc[i][j] += b * (jw * phi[i] * phi[j]);
                }
                load[c + i] += f(x) * (jw * phi[i]);
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                let sign = if i == j { 1.0 } else { -1.0 };
                trip.push((c + i, c + j, k_loc * sign - m_loc[i][j] * k2));
            }
        }
    }
    let full = ComplexSparseMatrix::from_triplets(n, &trip);
    let index: Vec<Option<usize>> = (0..n).map(|i| (i > 0 && i < n - 1).then(|| i - 1)).collect();
    let matrix = full.restrict(&index, n - 2);
    let load = load[1..n - 1].to_vec();
    Ok(System1d { matrix, load, nodes: nodes.to_vec() })
}

/// Uniform grid on `[-R-hat, R-hat]` with `cells` cells; `cells` is rounded
/// up so that the points `+-R` fall on nodes when R/R-hat is rational with a
/// small denominator.
pub fn uniform_nodes_1d(params: &PmlParams, cells: usize) -> Vec<f64> {
    let rh = params.r_outer;
    let mut nodes: Vec<f64> = (0..=cells).map(|i| -rh + 2.0 * rh * i as f64 / cells as f64).collect();
    for node in nodes.iter_mut() {
        for target in [-params.r_inner, params.r_inner, -rh, rh] {
            if (*node - target).abs() < 1e-9 * rh {
                *node = target;
            }
        }
    }
    nodes
}
