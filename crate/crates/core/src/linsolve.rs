//! Sparse complex matrices and direct solvers.
//!
//! Two factorization backends share one entry point:
//! reverse Cuthill-McKee reordering followed by banded LU with partial
//! pivoting, and faer's sparse LU for systems whose band would not fit.
//! Every solve is certified by an explicit residual matvec.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::time::Instant;

use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pivots below this fraction of the largest initial row magnitude are
/// reported as near-singular.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// Banded factorization is chosen while `n * kl * (kl + ku)` stays below this.
const BANDED_WORK_LIMIT: f64 = 5e7;

/// Compressed sparse row matrix with complex entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl ComplexSparseMatrix {
    /// Sums duplicate (row, col) entries. The result does not depend on the
    /// order of the triplets beyond floating-point summation order of
    /// duplicates, which follows input order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, Complex64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![ZERO; triplets.len()];
        let mut next = counts.clone();
        for &(i, j, v) in triplets {
            let slot = next[i];
            cols[slot] = j;
            vals[slot] = v;
            next[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for i in 0..n {
            let (lo, hi) = (counts[i], counts[i + 1]);
            order.clear();
            order.extend(lo..hi);
            // stable sort keeps duplicate summation in input order
            order.sort_by_key(|&s| cols[s]);
            let mut last: Option<usize> = None;
            for &s in &order {
                if last == Some(cols[s]) {
                    *values.last_mut().expect("entry exists") += vals[s];
                } else {
                    col_idx.push(cols[s]);
                    values.push(vals[s]);
                    last = Some(cols[s]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect();
        Self::from_triplets(n, &t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(p) => self.values[lo + p],
            Err(_) => ZERO,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `y^H M x`.
    pub fn form(&self, y: &[Complex64], x: &[Complex64]) -> Complex64 {
        (0..self.n)
            .map(|i| y[i].conj() * self.row(i).map(|(j, v)| v * x[j]).sum::<Complex64>())
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |M_ij - M_ji|` (no conjugation).
    pub fn symmetry_defect(&self) -> f64 {
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i)).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_complex_symmetric(&self, rel_tol: f64) -> bool {
        self.symmetry_defect() <= rel_tol * self.max_abs()
    }

    /// Linear combination `sum c_i M_i` of matrices with the same dimension.
    pub fn combine(terms: &[(Complex64, &ComplexSparseMatrix)]) -> Self {
        let n = terms.first().map_or(0, |t| t.1.n);
        let mut trip = Vec::new();
        for &(c, m) in terms {
            assert_eq!(m.n, n, "combined matrices must share a dimension");
            trip.extend(m.iter().map(|(i, j, v)| (i, j, c * v)));
        }
        Self::from_triplets(n, &trip)
    }

    /// Keeps rows/columns listed in `keep` (old index -> new index or None).
    pub fn restrict(&self, new_index: &[Option<usize>], new_dim: usize) -> Self {
        let mut trip = Vec::with_capacity(self.nnz());
        for (i, j, v) in self.iter() {
            if let (Some(a), Some(b)) = (new_index[i], new_index[j]) {
                trip.push((a, b, v));
            }
        }
        Self::from_triplets(new_dim, &trip)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n);
        for (i, j, v) in self.iter() {
            d[(i, j)] += v;
        }
        d
    }

    /// One `i j re im` line per stored entry, preceded by a dimension header.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::with_capacity(self.nnz() * 48);
        let _ = writeln!(out, "% n={} nnz={}", self.n, self.nnz());
        for (i, j, v) in self.iter() {
            let _ = writeln!(out, "{i} {j} {:.17e} {:.17e}", v.re, v.im);
        }
        out
    }

    fn row_max_abs(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).map(|(j, _)| j).filter(move |&j| j != i)
    }
}

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&v| v * c).collect() }
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Reverse Cuthill-McKee permutation: `perm[new] = old`.
pub fn reverse_cuthill_mckee(m: &ComplexSparseMatrix) -> Vec<usize> {
    let n = m.dim();
    let degree: Vec<usize> = (0..n).map(|i| m.neighbors(i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(m, seed, &degree);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        let mut nbrs = Vec::new();
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            nbrs.extend(m.neighbors(v).filter(|&u| !visited[u]));
            nbrs.sort_by_key(|&u| (degree[u], u));
            for &u in &nbrs {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// Start vertex of a long BFS level structure (George-Liu heuristic).
fn pseudo_peripheral(m: &ComplexSparseMatrix, seed: usize, degree: &[usize]) -> usize {
    let mut current = seed;
    let mut ecc = 0usize;
    for _ in 0..8 {
        let levels = bfs_levels(m, current);
        let depth = *levels.iter().filter_map(|l| l.as_ref()).max().unwrap_or(&0);
        if depth <= ecc && ecc > 0 {
            break;
        }
        ecc = depth;
        let next = levels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(depth))
            .min_by_key(|(i, _)| (degree[*i], *i))
            .map(|(i, _)| i)
            .unwrap_or(current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn bfs_levels(m: &ComplexSparseMatrix, start: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; m.dim()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let l = level[v].expect("queued vertices have a level");
        for u in m.neighbors(v) {
            if level[u].is_none() {
                level[u] = Some(l + 1);
                queue.push_back(u);
            }
        }
    }
    level
}

/// `(lower, upper)` bandwidth of the matrix under `perm[new] = old`.
pub fn bandwidth(m: &ComplexSparseMatrix, perm: Option<&[usize]>) -> (usize, usize) {
    let n = m.dim();
    let inv: Vec<usize> = match perm {
        Some(p) => {
            let mut inv = vec![0; n];
            for (new, &old) in p.iter().enumerate() {
                inv[old] = new;
            }
            inv
        }
        None => (0..n).collect(),
    };
    let mut lo = 0;
    let mut up = 0;
    for (i, j, _) in m.iter() {
        let (a, b) = (inv[i], inv[j]);
        if a > b {
            lo = lo.max(a - b);
        } else {
            up = up.max(b - a);
        }
    }
    (lo, up)
}

/// Banded LU with partial pivoting (row interchanges within the band).
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    width: usize,
    /// Row i stores columns i-kl ..= i+kl+ku.
    rows: Vec<Complex64>,
    multipliers: Vec<Complex64>,
    pivots: Vec<usize>,
    pub min_pivot_ratio: f64,
    pub growth: f64,
}

impl BandedLu {
    fn slot(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    /// Factors `m` (already permuted) with lower/upper bandwidth `kl`, `ku`.
    pub fn factor(m: &ComplexSparseMatrix, kl: usize, ku: usize) -> Result<Self> {
        let n = m.dim();
        let width = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            width,
            rows: vec![ZERO; n * width],
            multipliers: vec![ZERO; n * kl.max(1)],
            pivots: vec![0; n],
            min_pivot_ratio: f64::INFINITY,
            growth: 1.0,
        };
        for (i, j, v) in m.iter() {
            if j + kl < i || j > i + ku {
                return Err(Error::DimensionMismatch { expected: kl.max(ku), got: i.abs_diff(j) });
            }
            let s = lu.slot(i, j);
            lu.rows[s] += v;
        }
        let scale = m.row_max_abs();
        let threshold = PIVOT_TOLERANCE * scale;
        let upper = kl + ku;
        let mut tmp_k = vec![ZERO; upper + 1];
        let mut tmp_r = vec![ZERO; upper + 1];
        let mut umax = 0.0f64;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut best = k;
            let mut best_abs = lu.rows[lu.slot(k, k)].norm();
            for r in k + 1..=last {
                let a = lu.rows[lu.slot(r, k)].norm();
                if a > best_abs {
                    best = r;
                    best_abs = a;
                }
            }
            lu.pivots[k] = best;
            if scale > 0.0 {
                lu.min_pivot_ratio = lu.min_pivot_ratio.min(best_abs / scale);
            }
            if !(best_abs >= threshold) || best_abs == 0.0 {
                return Err(Error::NearSingular { step: k, pivot: best_abs, threshold });
            }
            let col_end = (k + upper).min(n - 1);
            if best != k {
                for j in k..=col_end {
                    tmp_k[j - k] = lu.rows[lu.slot(k, j)];
                    tmp_r[j - k] = if j <= best + upper { lu.rows[lu.slot(best, j)] } else { ZERO };
                }
                for j in k..=col_end {
                    let sk = lu.slot(k, j);
                    lu.rows[sk] = tmp_r[j - k];
                    if j <= best + upper {
                        let sr = lu.slot(best, j);
                        lu.rows[sr] = tmp_k[j - k];
                    }
                }
            }
            let pivot = lu.rows[lu.slot(k, k)];
            for r in k + 1..=last {
                let sr = lu.slot(r, k);
                let factor = lu.rows[sr] / pivot;
                lu.rows[sr] = ZERO;
                lu.multipliers[k * kl.max(1) + (r - k - 1)] = factor;
                if factor == ZERO {
                    continue;
                }
                for j in k + 1..=col_end {
                    let pk = lu.rows[lu.slot(k, j)];
                    if pk != ZERO {
                        let s = lu.slot(r, j);
                        lu.rows[s] -= factor * pk;
                    }
                }
            }
            for j in k..=col_end {
                umax = umax.max(lu.rows[lu.slot(k, j)].norm());
            }
        }
        let amax = m.max_abs();
        lu.growth = if amax > 0.0 { umax / amax } else { 1.0 };
        Ok(lu)
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let kl = self.kl;
        let upper = self.width - kl - 1;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let last = (k + kl).min(n.saturating_sub(1));
            for r in k + 1..=last {
                let f = self.multipliers[k * kl.max(1) + (r - k - 1)];
                let xk = x[k];
                x[r] -= f * xk;
            }
        }
        for k in (0..n).rev() {
            let col_end = (k + upper).min(n - 1);
            let mut s = x[k];
            for j in k + 1..=col_end {
                s -= self.rows[self.slot(k, j)] * x[j];
            }
            x[k] = s / self.rows[self.slot(k, k)];
        }
        x
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Choose by estimated banded work.
    Auto,
    Banded,
    SparseLu,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    /// `||M x - b|| / ||b||` from an explicit matvec.
    pub relative_residual: f64,
    pub backend: Backend,
    /// RCM bandwidth (lower, upper) and natural-order bandwidth.
    pub bandwidth: Option<(usize, usize)>,
    pub natural_bandwidth: Option<(usize, usize)>,
    /// Stored band entries of the banded factors.
    pub fill: usize,
    pub pivot_growth: Option<f64>,
    pub min_pivot_ratio: Option<f64>,
    pub seconds: f64,
}

/// Solves `M x = b` and certifies the residual.
pub fn solve(m: &ComplexSparseMatrix, b: &[Complex64]) -> Result<(Vec<Complex64>, SolveReport)> {
    solve_with(m, b, Backend::Auto)
}

pub fn solve_with(m: &ComplexSparseMatrix, b: &[Complex64], backend: Backend) -> Result<(Vec<Complex64>, SolveReport)> {
    let n = m.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let start = Instant::now();
    if n == 0 {
        return Ok((
            Vec::new(),
            SolveReport {
                relative_residual: 0.0,
                backend: Backend::Banded,
                bandwidth: Some((0, 0)),
                natural_bandwidth: Some((0, 0)),
                fill: 0,
                pivot_growth: None,
                min_pivot_ratio: None,
                seconds: 0.0,
            },
        ));
    }
    let natural = bandwidth(m, None);
    let perm = reverse_cuthill_mckee(m);
    let (kl, ku) = bandwidth(m, Some(&perm));
    let work = n as f64 * kl as f64 * (kl + ku) as f64;
    let chosen = match backend {
        Backend::Auto if work <= BANDED_WORK_LIMIT => Backend::Banded,
        Backend::Auto => Backend::SparseLu,
        other => other,
    };

    let (x, fill, growth, min_pivot) = match chosen {
        Backend::Banded => {
            let mut inv = vec![0usize; n];
            for (new, &old) in perm.iter().enumerate() {
                inv[old] = new;
            }
            let permuted = m.restrict(&inv.iter().map(|&v| Some(v)).collect::<Vec<_>>(), n);
            let lu = BandedLu::factor(&permuted, kl, ku)?;
            let pb: Vec<Complex64> = perm.iter().map(|&old| b[old]).collect();
            let py = lu.solve(&pb);
            let mut x = vec![ZERO; n];
            for (new, &old) in perm.iter().enumerate() {
                x[old] = py[new];
            }
            (x, n * (2 * kl + ku + 1), Some(lu.growth), Some(lu.min_pivot_ratio))
        }
        _ => (sparse_lu_solve(m, b)?, m.nnz(), None, None),
    };

    let r: Vec<Complex64> = m.matvec(&x).iter().zip(b).map(|(a, c)| a - c).collect();
    let bn = norm2(b);
    let relative_residual = if bn > 0.0 { norm2(&r) / bn } else { norm2(&r) };
    Ok((
        x,
        SolveReport {
            relative_residual,
            backend: chosen,
            bandwidth: Some((kl, ku)),
            natural_bandwidth: Some(natural),
            fill,
            pivot_growth: growth,
            min_pivot_ratio: min_pivot,
            seconds: start.elapsed().as_secs_f64(),
        },
    ))
}

fn sparse_lu_solve(m: &ComplexSparseMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = m.dim();
    let trip: Vec<Triplet<usize, usize, Complex64>> = m.iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let lu = a.sp_lu().map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let rhs = Col::<Complex64>::from_fn(n, |i| b[i]);
    use faer::linalg::solvers::Solve;
    let x = lu.solve(&rhs);
    let out: Vec<Complex64> = (0..n).map(|i| x[i]).collect();
    if out.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NearSingular { step: 0, pivot: 0.0, threshold: PIVOT_TOLERANCE });
    }
    Ok(out)
}

/// Cholesky factor L (lower, row-major) with `E = L L^H`.
fn cholesky(e: &DenseMatrix) -> Result<DenseMatrix> {
    let n = e.dim();
    let mut l = DenseMatrix::zeros(n);
    for j in 0..n {
        let mut d = e[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite(j));
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = e[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L X = B` in place for lower-triangular L, column by column.
fn forward_substitute(l: &DenseMatrix, b: &mut DenseMatrix) {
    let n = l.dim();
    for c in 0..n {
        for i in 0..n {
            let mut s = b[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * b[(k, c)];
            }
            b[(i, c)] = s / l[(i, i)];
        }
    }
}

/// Smallest singular value of `E^{-1/2} A E^{-1/2}` for Hermitian positive
/// definite E, i.e. the inf-sup constant of A in the E inner product.
pub fn dense_min_singular_pencil(a: &DenseMatrix, e: &DenseMatrix) -> Result<f64> {
    let n = a.dim();
    if e.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: e.dim() });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let l = cholesky(e)?;
    // X = L^{-1} A, then C = X L^{-H} = (L^{-1} X^H)^H
    let mut x = a.clone();
    forward_substitute(&l, &mut x);
    let mut xh = x.adjoint();
    forward_substitute(&l, &mut xh);
    let c = Mat::<Complex64>::from_fn(n, n, |i, j| xh[(j, i)].conj());
    let sv = c
        .singular_values()
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    Ok(sv.into_iter().fold(f64::INFINITY, f64::min))
}
