//! Polar-structured triangulations of the disk B(R-hat) that conform to the
//! interface circle r = R, with edge adjacency for jump-penalty assembly.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    /// r < R
    Physical,
    /// R < r < R-hat
    Layer,
}

/// Region selector for integrals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionSel {
    Physical,
    Layer,
    All,
}

impl RegionSel {
    pub fn contains(self, region: Region) -> bool {
        match self {
            RegionSel::All => true,
            RegionSel::Physical => region == Region::Physical,
            RegionSel::Layer => region == Region::Layer,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexFlag {
    Interior,
    OuterBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    /// Endpoints, smaller index first.
    pub v: [usize; 2],
    pub left: usize,
    /// `None` on the outer boundary.
    pub right: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    pub vertex_flags: Vec<VertexFlag>,
    pub triangle_region: Vec<Region>,
    /// Edge indices of each triangle.
    pub triangle_edges: Vec<[usize; 3]>,
    pub h_max: f64,
    pub h_min: f64,
    /// Degrees.
    pub min_angle: f64,
    /// Radii of the interface and outer circle when generated as a disk mesh.
    pub radii: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionCounts {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshQuality {
    pub h_max: f64,
    pub h_min: f64,
    pub min_angle: f64,
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub physical: RegionCounts,
    pub layer: RegionCounts,
}

/// Interior edge with both neighbours in one region.
#[derive(Clone, Copy, Debug)]
pub struct RegionEdge {
    pub edge: usize,
    /// Unit normal pointing from `first` into `second`.
    pub normal: [f64; 2],
    pub length: f64,
    pub first: usize,
    pub second: usize,
}

#[derive(Clone, Debug)]
pub struct EdgeSet {
    pub region: Region,
    pub edges: Vec<RegionEdge>,
}

impl EdgeSet {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Twice the signed area.
fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    cross(sub(b, a), sub(c, a))
}

impl Mesh {
    /// Builds adjacency and quality data for an arbitrary triangle soup.
    /// Vertex flags are taken as given; run [`Mesh::validate`] afterwards.
    pub fn from_raw(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        triangle_region: Vec<Region>,
        vertex_flags: Vec<VertexFlag>,
    ) -> Result<Self> {
        if triangle_region.len() != triangles.len() || vertex_flags.len() != vertices.len() {
            return Err(Error::InvalidMesh("per-triangle or per-vertex arrays have the wrong length".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
        }
        let (edges, triangle_edges) = build_edges(&triangles)?;
        let mut mesh = Self {
            vertices,
            triangles,
            edges,
            vertex_flags,
            triangle_region,
            triangle_edges,
            h_max: 0.0,
            h_min: 0.0,
            min_angle: 0.0,
            radii: None,
        };
        mesh.update_quality();
        Ok(mesh)
    }

    fn update_quality(&mut self) {
        let mut h_max = 0.0f64;
        let mut h_min = f64::INFINITY;
        let mut min_angle = 180.0f64;
        for tri in &self.triangles {
            let p = tri.map(|v| self.vertices[v]);
            let lens = [dist(p[1], p[2]), dist(p[2], p[0]), dist(p[0], p[1])];
            let diam = lens.iter().cloned().fold(0.0, f64::max);
            h_max = h_max.max(diam);
            h_min = h_min.min(diam);
            for i in 0..3 {
                let (a, b, c) = (lens[i], lens[(i + 1) % 3], lens[(i + 2) % 3]);
                let cosv = ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0);
                let ang = cosv.acos().to_degrees();
                if ang.is_finite() {
                    min_angle = min_angle.min(ang);
                } else {
                    min_angle = 0.0;
                }
            }
        }
        self.h_max = h_max;
        self.h_min = if h_min.is_finite() { h_min } else { 0.0 };
        self.min_angle = min_angle;
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [[f64; 2]; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * orient(a, b, c)
    }

    pub fn total_area(&self, sel: RegionSel) -> f64 {
        (0..self.num_triangles())
            .filter(|&t| sel.contains(self.triangle_region[t]))
            .map(|t| self.triangle_area(t))
            .sum()
    }

    /// Topological and orientation checks valid for any disk-like mesh.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.num_triangles() {
            let area = self.triangle_area(t);
            if !(area > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} has non-positive signed area {area:e}"
                )));
            }
        }
        let euler = self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64;
        if euler != 1 {
            return Err(Error::InvalidMesh(format!("Euler characteristic V-E+T = {euler}, expected 1")));
        }
        let mut seen = vec![0u8; self.triangles.len()];
        for e in &self.edges {
            seen[e.left] += 1;
            if let Some(r) = e.right {
                seen[r] += 1;
            }
        }
        if let Some(t) = seen.iter().position(|&c| c != 3) {
            return Err(Error::InvalidMesh(format!("triangle {t} appears in {} edge records", seen[t])));
        }
        Ok(())
    }

    /// [`Mesh::validate`] plus the disk-specific invariants: boundary and
    /// interface vertices on their circles, single-region triangles, and a
    /// minimum angle of 20 degrees.
    pub fn validate_disk(&self, r_inner: f64, r_outer: f64) -> Result<()> {
        self.validate()?;
        for (v, (&p, &flag)) in self.vertices.iter().zip(&self.vertex_flags).enumerate() {
            let r = p[0].hypot(p[1]);
            if flag == VertexFlag::OuterBoundary && (r - r_outer).abs() > 1e-12 * r_outer {
                return Err(Error::InvalidMesh(format!("boundary vertex {v} at radius {r}, expected {r_outer}")));
            }
        }
        let mut on_boundary = vec![false; self.vertices.len()];
        for e in self.edges.iter().filter(|e| e.right.is_none()) {
            on_boundary[e.v[0]] = true;
            on_boundary[e.v[1]] = true;
        }
        for (v, &b) in on_boundary.iter().enumerate() {
            if b != (self.vertex_flags[v] == VertexFlag::OuterBoundary) {
                return Err(Error::InvalidMesh(format!("vertex {v} boundary flag disagrees with topology")));
            }
        }
        let tol = 1e-12 * r_inner;
        for (t, tri) in self.triangles.iter().enumerate() {
            let radii = tri.map(|v| self.vertices[v][0].hypot(self.vertices[v][1]));
            let ok = match self.triangle_region[t] {
                Region::Physical => radii.iter().all(|&r| r <= r_inner + tol),
                Region::Layer => radii.iter().all(|&r| r >= r_inner - tol && r <= r_outer * (1.0 + 1e-12)),
            };
            if !ok {
                return Err(Error::InvalidMesh(format!("triangle {t} straddles the interface r = {r_inner}")));
            }
        }
        // interface vertices: shared by both regions
        let mut touches = vec![(false, false); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                match self.triangle_region[t] {
                    Region::Physical => touches[v].0 = true,
                    Region::Layer => touches[v].1 = true,
                }
            }
        }
        for (v, &(a, b)) in touches.iter().enumerate() {
            let r = self.vertices[v][0].hypot(self.vertices[v][1]);
            if a && b && (r - r_inner).abs() > tol {
                return Err(Error::InvalidMesh(format!("interface vertex {v} at radius {r}, expected {r_inner}")));
            }
        }
        if self.min_angle < 20.0 {
            return Err(Error::InvalidMesh(format!("minimum angle {:.2} deg below 20", self.min_angle)));
        }
        Ok(())
    }

    pub fn quality(&self) -> MeshQuality {
        let count = |region: Region| {
            let tris: Vec<usize> = (0..self.num_triangles())
                .filter(|&t| self.triangle_region[t] == region)
                .collect();
            let mut verts = vec![false; self.vertices.len()];
            for &t in &tris {
                for &v in &self.triangles[t] {
                    verts[v] = true;
                }
            }
            let edges = self
                .edges
                .iter()
                .filter(|e| {
                    self.triangle_region[e.left] == region
                        || e.right.is_some_and(|r| self.triangle_region[r] == region)
                })
                .count();
            RegionCounts {
                vertices: verts.iter().filter(|&&b| b).count(),
                edges,
                triangles: tris.len(),
            }
        };
        MeshQuality {
            h_max: self.h_max,
            h_min: self.h_min,
            min_angle: self.min_angle,
            vertices: self.vertices.len(),
            edges: self.edges.len(),
            triangles: self.triangles.len(),
            physical: count(Region::Physical),
            layer: count(Region::Layer),
        }
    }

    /// Interior edges whose two neighbours both lie in `region`.
    pub fn interior_edges_in_region(&self, region: Region) -> EdgeSet {
        let mut edges = Vec::new();
        for (idx, e) in self.edges.iter().enumerate() {
            let Some(right) = e.right else { continue };
            if self.triangle_region[e.left] != region || self.triangle_region[right] != region {
                continue;
            }
            let p0 = self.vertices[e.v[0]];
            let p1 = self.vertices[e.v[1]];
            let t = sub(p1, p0);
            let length = t[0].hypot(t[1]);
            let mut normal = [t[1] / length, -t[0] / length];
            let opposite = self.triangles[e.left]
                .iter()
                .copied()
                .find(|v| !e.v.contains(v))
                .expect("triangle has a vertex off the edge");
            let to_opp = sub(self.vertices[opposite], p0);
            if normal[0] * to_opp[0] + normal[1] * to_opp[1] > 0.0 {
                normal = [-normal[0], -normal[1]];
            }
            edges.push(RegionEdge {
                edge: idx,
                normal,
                length,
                first: e.left,
                second: right,
            });
        }
        EdgeSet { region, edges }
    }

    /// Plain-text dump: a `vertices` table (x, y, flag) followed by a
    /// `triangles` table (v0, v1, v2, region).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# helmpml mesh v1");
        let _ = writeln!(out, "vertices {}", self.vertices.len());
        for (p, f) in self.vertices.iter().zip(&self.vertex_flags) {
            let flag = match f {
                VertexFlag::Interior => "interior",
                VertexFlag::OuterBoundary => "boundary",
            };
            let _ = writeln!(out, "{:.17e} {:.17e} {flag}", p[0], p[1]);
        }
        let _ = writeln!(out, "triangles {}", self.triangles.len());
        for (t, r) in self.triangles.iter().zip(&self.triangle_region) {
            let region = match r {
                Region::Physical => "physical",
                Region::Layer => "layer",
            };
            let _ = writeln!(out, "{} {} {} {region}", t[0], t[1], t[2]);
        }
        out
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_text().as_bytes())?;
        Ok(())
    }
}

fn build_edges(triangles: &[[usize; 3]]) -> Result<(Vec<Edge>, Vec<[usize; 3]>)> {
    let mut map: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 3 / 2 + 8);
    let mut tri_edges = vec![[usize::MAX; 3]; triangles.len()];
    for (t, tri) in triangles.iter().enumerate() {
        for i in 0..3 {
            let a = tri[(i + 1) % 3];
            let b = tri[(i + 2) % 3];
            let key = (a.min(b), a.max(b));
            if key.0 == key.1 {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats vertex {a}")));
            }
            let idx = match map.get(&key) {
                Some(&idx) => {
                    let e = &mut edges[idx];
                    if e.right.is_some() {
                        return Err(Error::InvalidMesh(format!("edge {key:?} shared by more than two triangles")));
                    }
                    e.right = Some(t);
                    idx
                }
                None => {
                    let idx = edges.len();
                    map.insert(key, idx);
                    edges.push(Edge {
                        v: [key.0, key.1],
                        left: t,
                        right: None,
                    });
                    idx
                }
            };
            tri_edges[t][i] = idx;
        }
    }
    Ok((edges, tri_edges))
}

/// Concentric-ring triangulation of B(r_outer) with the circle r_inner as a
/// ring. Ring i carries about `6 r_i / dr` nodes, giving the hexagonal
/// pattern in the physical disk. `h_target` bounds the longest edge.
pub fn build_disk_mesh(r_inner: f64, r_outer: f64, h_target: f64) -> Result<Mesh> {
    // ring-zipping diagonals run about 1.25x the ring spacing / (sqrt(3)/2)
    let mut spacing = 0.8 * h_target * 3f64.sqrt() / 2.0;
    for _ in 0..4 {
        let mesh = build_rings(r_inner, r_outer, h_target, spacing)?;
        if mesh.h_max <= h_target * (1.0 + 1e-12) {
            return Ok(mesh);
        }
        spacing *= 0.98 * h_target / mesh.h_max;
    }
    Err(Error::MeshParams(format!("could not reach h_max <= {h_target}")))
}

fn build_rings(r_inner: f64, r_outer: f64, h_target: f64, spacing: f64) -> Result<Mesh> {
    if !(r_inner > 0.0 && r_outer > r_inner && h_target > 0.0) {
        return Err(Error::MeshParams(format!(
            "need R-hat > R > 0 and h > 0 (got R={r_inner}, R-hat={r_outer}, h={h_target})"
        )));
    }
    if h_target > 0.5 * r_inner {
        return Err(Error::MeshParams(format!(
            "h_target {h_target} too coarse to resolve r = {r_inner} (need h <= R/2)"
        )));
    }
    let inner_rings = (r_inner / spacing).ceil() as usize;
    let dr = r_inner / inner_rings as f64;
    let outer_rings = ((r_outer - r_inner) / spacing).ceil().max(1.0) as usize;
    let dr_layer = (r_outer - r_inner) / outer_rings as f64;

    let mut radii = Vec::with_capacity(inner_rings + outer_rings + 1);
    radii.push(0.0);
    for i in 1..=inner_rings {
        radii.push(if i == inner_rings { r_inner } else { i as f64 * dr });
    }
    for j in 1..=outer_rings {
        radii.push(if j == outer_rings { r_outer } else { r_inner + j as f64 * dr_layer });
    }
    let counts: Vec<usize> = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| if i == 0 { 1 } else { 6 * ((r / dr).round() as usize).max(1) })
        .collect();
    if counts[inner_rings] < 8 {
        return Err(Error::MeshParams(format!(
            "only {} vertices on r = {r_inner}",
            counts[inner_rings]
        )));
    }

    let mut vertices = Vec::new();
    let mut ring_start = Vec::with_capacity(radii.len());
    for (&r, &n) in radii.iter().zip(&counts) {
        ring_start.push(vertices.len());
        if n == 1 {
            vertices.push([0.0, 0.0]);
            continue;
        }
        for j in 0..n {
            let th = 2.0 * PI * j as f64 / n as f64;
            vertices.push([r * th.cos(), r * th.sin()]);
        }
    }
    let last = radii.len() - 1;
    let mut flags = vec![VertexFlag::Interior; vertices.len()];
    for f in flags.iter_mut().skip(ring_start[last]) {
        *f = VertexFlag::OuterBoundary;
    }

    let mut triangles = Vec::new();
    let mut regions = Vec::new();
    for ring in 1..radii.len() {
        let region = if ring <= inner_rings { Region::Physical } else { Region::Layer };
        let inner: Vec<usize> = (0..counts[ring - 1]).map(|j| ring_start[ring - 1] + j).collect();
        let outer: Vec<usize> = (0..counts[ring]).map(|j| ring_start[ring] + j).collect();
        for tri in zip_rings(&vertices, &inner, &outer) {
            triangles.push(tri);
            regions.push(region);
        }
    }

    let mut mesh = Mesh::from_raw(vertices, triangles, regions, flags)?;
    mesh.radii = Some((r_inner, r_outer));
    mesh.validate_disk(r_inner, r_outer)?;
    Ok(mesh)
}

/// Triangulates the annular strip between two rings of nodes (both listed
/// by increasing angle from 0) by walking around and always closing the
/// shorter diagonal.
fn zip_rings(vertices: &[[f64; 2]], inner: &[usize], outer: &[usize]) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(inner.len() + outer.len());
    let ccw = |a: usize, b: usize, c: usize| {
        if orient(vertices[a], vertices[b], vertices[c]) > 0.0 {
            [a, b, c]
        } else {
            [a, c, b]
        }
    };
    if inner.len() == 1 {
        let c = inner[0];
        for j in 0..outer.len() {
            out.push(ccw(c, outer[j], outer[(j + 1) % outer.len()]));
        }
        return out;
    }
    let (m, n) = (inner.len(), outer.len());
    let (mut i, mut j) = (0usize, 0usize);
    while i < m || j < n {
        let a = inner[i % m];
        let b = outer[j % n];
        let advance_outer = if i == m {
            true
        } else if j == n {
            false
        } else {
            let a_next = inner[(i + 1) % m];
            let b_next = outer[(j + 1) % n];
            let d_outer = dist(vertices[a], vertices[b_next]);
            let d_inner = dist(vertices[b], vertices[a_next]);
            d_outer <= d_inner
        };
        if advance_outer {
            out.push(ccw(a, b, outer[(j + 1) % n]));
            j += 1;
        } else {
            out.push(ccw(a, b, inner[(i + 1) % m]));
            i += 1;
        }
    }
    out
}
