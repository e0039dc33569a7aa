//! Study runners: FEM/CIP-FEM convergence and fixed-kh sweeps against the
//! closed-form disk solution, the discrete inf-sup constant, PML truncation
//! decay and L2 stability from the radial reference.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{PenaltyMode, StudyConfig, StudyKind, MAX_DOFS, MAX_INFSUP_DOFS};
use super::output::{num, opt, Chart, Series, Table, FEM_HEADER};
use super::penalty_gamma;
use crate::assembly::{self, assemble_matrix, DofMap, FormWeights, Source};
use crate::error::{Error, Result};
use crate::geometry::{build_disk_mesh, Mesh, RegionSel};
use crate::linsolve::{dense_min_singular_pencil, DenseMatrix};
use crate::norms::{error_vs_reference_with, interpolate, linear_fit};
use crate::oracle::{
    exact_mode_free_space, exact_solution_disk_xy, radial_grid, radial_mode_reference,
    radial_mode_reference_extrapolated, radial_split,
};
use crate::pml::PmlParams;
use crate::quadrature::TriangleRule;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest wave number of the 2D FEM studies unless `allow_large` is set.
pub const MAX_K: f64 = 64.0;

/// One FEM or CIP-FEM solve at (k, h).
#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    /// `<study>/<method>`, method `fem` or `cip`.
    pub study: String,
    pub k: f64,
    pub h: f64,
    pub n: usize,
    pub gamma: Complex64,
    pub rel_h1: Option<f64>,
    pub rel_h1_interp: Option<f64>,
    pub rel_l2: Option<f64>,
    pub residual: Option<f64>,
    pub assemble_s: f64,
    pub solve_s: f64,
    /// Solver failure message; error columns stay empty.
    pub failure: Option<String>,
}

impl StudyRow {
    pub fn method(&self) -> &str {
        self.study.rsplit('/').next().unwrap_or("")
    }

    fn cells(&self) -> Vec<String> {
        let study = match &self.failure {
            Some(_) => format!("{}!failed", self.study),
            None => self.study.clone(),
        };
        vec![
            study,
            num(self.k),
            num(self.h),
            self.n.to_string(),
            num(self.gamma.re),
            num(self.gamma.im),
            opt(self.rel_h1),
            opt(self.rel_h1_interp),
            opt(self.rel_l2),
            opt(self.residual),
            num(self.assemble_s),
            num(self.solve_s),
        ]
    }
}

/// Methods solved at a point: FEM always, CIP-FEM unless the penalty is zero.
pub fn methods_for(penalty: PenaltyMode, k: f64, h: f64) -> Vec<(&'static str, Complex64)> {
    let mut m = vec![("fem", ZERO)];
    match penalty {
        PenaltyMode::Zero => {}
        PenaltyMode::Dispersion => m.push(("cip", penalty_gamma(k * h))),
        PenaltyMode::Custom(g) => m.push(("cip", g)),
    }
    m
}

fn check_point(cfg: &StudyConfig, k: f64, h: f64) -> Result<()> {
    if k > MAX_K && !cfg.allow_large {
        return Err(Error::Config(format!("k = {k} exceeds {MAX_K}; set allow_large = true to run it")));
    }
    if h > 0.5 * cfg.r_inner {
        return Err(Error::Config(format!("h = {h} too coarse for R = {} (need h <= R/2)", cfg.r_inner)));
    }
    Ok(())
}

fn rule(degree: u32) -> TriangleRule {
    TriangleRule::by_degree(degree).expect("validated rule degree")
}

fn tag(v: f64) -> String {
    format!("{v:.6}").trim_end_matches('0').trim_end_matches('.').replace('.', "p")
}

/// Builds the mesh at (k, h), solves every method, and measures relative
/// errors on the physical disk against the closed-form solution.
pub fn run_fem_point(cfg: &StudyConfig, study: &str, k: f64, h: f64) -> Result<Vec<StudyRow>> {
    check_point(cfg, k, h)?;
    let params = cfg.params(k)?;
    let mesh = build_disk_mesh(cfg.r_inner, cfg.r_outer, h)?;
    if cfg.validate_mesh {
        mesh.validate_disk(cfg.r_inner, cfg.r_outer)?;
        let q = mesh.quality();
        eprintln!(
            "mesh k={k} h={h}: {} vertices, {} triangles, h_max {:.4e}, min angle {:.1} deg",
            mesh.num_vertices(),
            mesh.num_triangles(),
            q.h_max,
            q.min_angle
        );
    }
    let dofs = DofMap::from_mesh(&mesh).len();
    if dofs > MAX_DOFS && !cfg.allow_large {
        return Err(Error::Config(format!("{dofs} unknowns exceed the cap {MAX_DOFS}; set allow_large = true")));
    }
    let err_rule = rule(cfg.error_quad_degree);
    let reference = move |x: [f64; 2]| exact_solution_disk_xy(k, x);
    let interp = interpolate(&mesh, |x| reference(x).0);
    let interp_err = error_vs_reference_with(&mesh, &interp, &reference, RegionSel::Physical, k, &err_rule);

    let mut rows = Vec::new();
    for (method, gamma) in methods_for(cfg.penalty, k, h) {
        if gamma.im > 0.0 {
            eprintln!("warning: penalty {gamma} has positive imaginary part");
        }
        let mut row = StudyRow {
            study: format!("{study}/{method}"),
            k,
            h,
            n: dofs,
            gamma,
            rel_h1: None,
            rel_h1_interp: interp_err.rel_h1_semi,
            rel_l2: None,
            residual: None,
            assemble_s: 0.0,
            solve_s: 0.0,
            failure: None,
        };
        let t = Instant::now();
        let sys = assembly::assemble_system_with(&mesh, &params, gamma, &Source::default(), &rule(cfg.quad_degree))?;
        row.assemble_s = t.elapsed().as_secs_f64();
        if cfg.export_matrix {
            let name = format!("matrix_{method}_k{}_h{}.txt", tag(k), tag(h));
            std::fs::create_dir_all(&cfg.out_dir)?;
            std::fs::write(cfg.out_dir.join(name), sys.matrix.to_coordinate_text())?;
        }
        let t = Instant::now();
        match sys.solve() {
            Ok(sol) => {
                row.solve_s = t.elapsed().as_secs_f64();
                let e = error_vs_reference_with(&mesh, &sol.nodal, &reference, RegionSel::Physical, k, &err_rule);
                row.rel_h1 = e.rel_h1_semi;
                row.rel_l2 = e.rel_l2;
                row.residual = Some(sol.report.relative_residual);
            }
            Err(err @ (Error::NearSingular { .. } | Error::Factorization(_))) => {
                row.solve_s = t.elapsed().as_secs_f64();
                row.failure = Some(err.to_string());
            }
            Err(other) => return Err(other),
        }
        rows.push(row);
    }
    Ok(rows)
}

fn sort_rows(rows: &mut [StudyRow]) {
    rows.sort_by(|a, b| {
        a.k.total_cmp(&b.k)
            .then(b.h.total_cmp(&a.h))
            .then_with(|| a.study.cmp(&b.study))
    });
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    // one factorization per job; jobs share the bounded pool
    faer::set_global_parallelism(faer::Par::Seq);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(f))
}

fn run_fem_jobs(cfg: &StudyConfig, study: &str, jobs: &[(f64, f64)]) -> Result<Vec<StudyRow>> {
    for &(k, h) in jobs {
        check_point(cfg, k, h)?;
    }
    let results: Vec<Result<Vec<StudyRow>>> =
        in_pool(cfg.threads, || jobs.par_iter().map(|&(k, h)| run_fem_point(cfg, study, k, h)).collect())?;
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    sort_rows(&mut rows);
    Ok(rows)
}

pub fn fem_table(rows: &[StudyRow]) -> Table {
    let mut t = Table::new(&FEM_HEADER);
    for r in rows {
        t.push(r.cells());
    }
    t
}

/// Relative H1 error curves per (k, method) plus the interpolation curve.
fn fem_chart(title: &str, rows: &[StudyRow], x_of: impl Fn(&StudyRow) -> f64, x_label: &str, group_by_k: bool) -> Chart {
    let mut series: Vec<Series> = Vec::new();
    let mut add = |label: String, x: f64, y: Option<f64>| {
        let Some(y) = y else { return };
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => {
                if !s.points.iter().any(|p| p.0 == x) {
                    s.points.push((x, y));
                }
            }
            None => series.push(Series { label, points: vec![(x, y)] }),
        }
    };
    for r in rows {
        let group = if group_by_k { format!("k={}", r.k) } else { format!("kh={}", (r.k * r.h * 1e6).round() / 1e6) };
        add(format!("{group} {}", r.method()), x_of(r), r.rel_h1);
        add(format!("{group} interp"), x_of(r), r.rel_h1_interp);
    }
    for s in &mut series {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    Chart { title: title.into(), x_label: x_label.into(), y_label: "relative H1 error".into(), log_x: true, series }
}

pub fn run_convergence_study(cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    let jobs: Vec<(f64, f64)> = cfg.k_list.iter().flat_map(|&k| cfg.h_list.iter().map(move |&h| (k, h))).collect();
    run_fem_jobs(cfg, "convergence", &jobs)
}

pub fn run_fixed_kh_study(cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    let jobs: Vec<(f64, f64)> = cfg.kh_list.iter().flat_map(|&kh| cfg.k_list.iter().map(move |&k| (k, kh / k))).collect();
    run_fem_jobs(cfg, "fixed_kh", &jobs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfsupRow {
    pub k: f64,
    pub h: f64,
    pub n: usize,
    pub mu: f64,
}

/// Discrete inf-sup constant of the unstabilized form in the energy norm.
pub fn infsup_point(params: &PmlParams, mesh: &Mesh) -> Result<InfsupRow> {
    let dofs = DofMap::from_mesh(mesh);
    if dofs.len() > MAX_INFSUP_DOFS {
        return Err(Error::Config(format!("{} unknowns exceed the dense inf-sup cap {MAX_INFSUP_DOFS}", dofs.len())));
    }
    let r = TriangleRule::degree4();
    let k = params.k;
    let restrict = |w: FormWeights| assemble_matrix(mesh, params, w, &r).restrict(&dofs.vertex_to_dof, dofs.len()).to_dense();
    let a = restrict(FormWeights::helmholtz(k, ZERO));
    let m = restrict(FormWeights::only_mass_plain());
    let n = dofs.len();
    let e = DenseMatrix::from_fn(n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5 + m[(i, j)] * (2.0 * k * k));
    let mu = dense_min_singular_pencil(&a, &e)?;
    Ok(InfsupRow { k, h: mesh.h_max, n, mu })
}

pub fn run_infsup_study(cfg: &StudyConfig) -> Result<Vec<InfsupRow>> {
    let mesh = build_disk_mesh(cfg.r_inner, cfg.r_outer, cfg.infsup_h)?;
    let params: Vec<PmlParams> = cfg.k_list.iter().map(|&k| cfg.params(k)).collect::<Result<_>>()?;
    let results: Vec<Result<InfsupRow>> = in_pool(cfg.threads, || params.par_iter().map(|p| infsup_point(p, &mesh)).collect())?;
    let mut rows: Vec<InfsupRow> = results.into_iter().collect::<Result<_>>()?;
    for r in &mut rows {
        r.h = cfg.infsup_h;
    }
    rows.sort_by(|a, b| a.k.total_cmp(&b.k));
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruncationStatus {
    /// Used in the rate fit.
    Fit,
    /// No absorbing layer; outside the fit.
    NoLayer,
    /// At or below the reference's discretization floor; the sweep stops here.
    Floor,
}

impl TruncationStatus {
    fn name(self) -> &'static str {
        match self {
            TruncationStatus::Fit => "fit",
            TruncationStatus::NoLayer => "no_layer",
            TruncationStatus::Floor => "floor",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncationRow {
    pub k: f64,
    pub sigma0: f64,
    /// `2 k sigma0 L (1 - R^2 / (R-hat^2 + sigma0^2 L^2))^{1/2}`
    pub exponent: f64,
    pub error: f64,
    pub rel_error: f64,
    pub floor: f64,
    pub status: TruncationStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncationFit {
    pub k: f64,
    /// Slope of `ln error` against the exponent; None when fewer than two
    /// rows sit above the floor.
    pub slope: Option<f64>,
    pub points: usize,
}

pub fn truncation_exponent(params: &PmlParams) -> f64 {
    let (r, rh, l, s) = (params.r_inner, params.r_outer, params.thickness(), params.sigma0);
    2.0 * params.k * s * l * (1.0 - r * r / (rh * rh + s * s * l * l)).sqrt()
}

fn unit_disk_source(r_inner: f64) -> impl Fn(f64) -> Complex64 + Copy {
    move |r: f64| Complex64::new(if r < r_inner { 1.0 } else { 0.0 }, 0.0)
}

/// Mode-0 truncation error on `(0, R)` for each absorption in the sweep.
pub fn run_truncation_study(cfg: &StudyConfig) -> Result<(Vec<TruncationRow>, Vec<TruncationFit>)> {
    let m = cfg.radial_cells;
    if m < 2 * crate::oracle::RADIAL_MIN_CELLS {
        return Err(Error::Config(format!(
            "truncation study needs radial_cells >= {} for its floor estimate",
            2 * crate::oracle::RADIAL_MIN_CELLS
        )));
    }
    let mut sigmas = cfg.sigma0_list.clone();
    sigmas.sort_by(f64::total_cmp);
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &k in &cfg.k_list {
        let base = PmlParams::new(k, cfg.r_inner, cfg.r_outer, 0.0)?;
        let f = unit_disk_source(cfg.r_inner);
        let (m_in, _) = radial_split(&base, m);
        let grid = radial_grid(&base, m_in, m - m_in);
        let free = exact_mode_free_space(k, 0, |_| Complex64::new(1.0, 0.0), cfg.r_inner, &grid[..=m_in])?;
        let free_norm = free.weighted_l2(0.0, cfg.r_inner);
        let mut fit_x = Vec::new();
        let mut fit_y = Vec::new();
        for &sigma0 in &sigmas {
            let p = PmlParams::new(k, cfg.r_inner, cfg.r_outer, sigma0)?;
            let fine = radial_mode_reference_extrapolated(&p, 0, f, m)?;
            let coarse = radial_mode_reference_extrapolated(&p, 0, f, m / 2)?;
            let error = free.weighted_l2_distance(&fine, 0.0, cfg.r_inner);
            let floor = coarse.weighted_l2_distance(&fine, 0.0, cfg.r_inner);
            let status = if sigma0 == 0.0 {
                TruncationStatus::NoLayer
            } else if error > floor {
                TruncationStatus::Fit
            } else {
                TruncationStatus::Floor
            };
            let exponent = truncation_exponent(&p);
            rows.push(TruncationRow { k, sigma0, exponent, error, rel_error: error / free_norm, floor, status });
            match status {
                TruncationStatus::Fit => {
                    fit_x.push(exponent);
                    fit_y.push(error.ln());
                }
                TruncationStatus::Floor => break,
                TruncationStatus::NoLayer => {}
            }
        }
        let slope = (fit_x.len() >= 2).then(|| linear_fit(&fit_x, &fit_y).0);
        fits.push(TruncationFit { k, slope, points: fit_x.len() });
    }
    Ok((rows, fits))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityRow {
    pub k: f64,
    pub cells: usize,
    pub norm_u: f64,
    pub norm_f: f64,
    pub ratio: f64,
}

/// `k ||u||_{L2(D)} / ||f||_{L2(D)}` for `f = scale` on the physical disk.
pub fn stability_point(params: &PmlParams, scale: f64, cells: usize) -> Result<StabilityRow> {
    let ind = unit_disk_source(params.r_inner);
    let prof = radial_mode_reference(params, 0, |r| ind(r) * scale, cells)?;
    let norm_u = prof.weighted_l2(0.0, params.r_outer);
    let norm_f = scale.abs() * PI.sqrt() * params.r_inner;
    Ok(StabilityRow { k: params.k, cells, norm_u, norm_f, ratio: params.k * norm_u / norm_f })
}

pub fn run_stability_study(cfg: &StudyConfig) -> Result<Vec<StabilityRow>> {
    let params: Vec<PmlParams> = cfg.k_list.iter().map(|&k| cfg.params(k)).collect::<Result<_>>()?;
    let results: Vec<Result<StabilityRow>> =
        in_pool(cfg.threads, || params.par_iter().map(|p| stability_point(p, 1.0, cfg.radial_cells)).collect())?;
    let mut rows: Vec<StabilityRow> = results.into_iter().collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.k.total_cmp(&b.k));
    Ok(rows)
}

/// Table, chart and summary lines of a finished study.
#[derive(Clone, Debug)]
pub struct StudyOutput {
    pub kind: StudyKind,
    pub table: Table,
    pub chart: Chart,
    pub notes: Vec<String>,
    /// Rows whose solve failed.
    pub failures: usize,
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyOutput> {
    cfg.validate()?;
    let kind = cfg.kind;
    let mut notes = Vec::new();
    let (table, chart, failures) = match kind {
        StudyKind::Convergence | StudyKind::FixedKh => {
            let rows = if kind == StudyKind::Convergence { run_convergence_study(cfg)? } else { run_fixed_kh_study(cfg)? };
            let failures = rows.iter().filter(|r| r.failure.is_some()).count();
            for r in rows.iter().filter(|r| r.failure.is_some()) {
                notes.push(format!("{} k={} h={}: {}", r.study, r.k, r.h, r.failure.as_deref().unwrap_or("")));
            }
            let chart = if kind == StudyKind::Convergence {
                fem_chart("Relative H1 error vs 1/h", &rows, |r| 1.0 / r.h, "1/h", true)
            } else {
                fem_chart("Relative H1 error at fixed kh", &rows, |r| r.k, "k", false)
            };
            (fem_table(&rows), chart, failures)
        }
        StudyKind::Infsup => {
            let rows = run_infsup_study(cfg)?;
            let mut t = Table::new(&["study", "k", "h", "N", "mu", "k_mu"]);
            for r in &rows {
                t.push(vec!["infsup".into(), num(r.k), num(r.h), r.n.to_string(), num(r.mu), num(r.k * r.mu)]);
            }
            let chart = Chart {
                title: "Discrete inf-sup constant".into(),
                x_label: "k".into(),
                y_label: "mu_h".into(),
                log_x: true,
                series: vec![
                    Series { label: "mu_h".into(), points: rows.iter().map(|r| (r.k, r.mu)).collect() },
                    Series { label: "k mu_h".into(), points: rows.iter().map(|r| (r.k, r.k * r.mu)).collect() },
                ],
            };
            (t, chart, 0)
        }
        StudyKind::Truncation => {
            let (rows, fits) = run_truncation_study(cfg)?;
            let mut t = Table::new(&["study", "k", "sigma0", "exponent", "error", "rel_error", "floor", "status"]);
            for r in &rows {
                t.push(vec![
                    "truncation".into(),
                    num(r.k),
                    num(r.sigma0),
                    num(r.exponent),
                    num(r.error),
                    num(r.rel_error),
                    num(r.floor),
                    r.status.name().into(),
                ]);
            }
            for f in &fits {
                notes.push(match f.slope {
                    Some(s) => format!("k={}: fitted slope {s:.4} over {} points", f.k, f.points),
                    None => format!("k={}: INCONCLUSIVE, fewer than two points above the discretization floor", f.k),
                });
            }
            let series = fits
                .iter()
                .map(|f| Series {
                    label: format!("k={}", f.k),
                    points: rows.iter().filter(|r| r.k == f.k && r.sigma0 > 0.0).map(|r| (r.exponent, r.error)).collect(),
                })
                .collect();
            let chart = Chart {
                title: "PML truncation error on (0, R)".into(),
                x_label: "2 k sigma0 L (1 - R^2/(R-hat^2 + sigma0^2 L^2))^(1/2)".into(),
                y_label: "weighted L2 error".into(),
                log_x: false,
                series,
            };
            (t, chart, 0)
        }
        StudyKind::Stability => {
            let rows = run_stability_study(cfg)?;
            let mut t = Table::new(&["study", "k", "M", "norm_u", "norm_f", "ratio"]);
            for r in &rows {
                t.push(vec!["stability".into(), num(r.k), r.cells.to_string(), num(r.norm_u), num(r.norm_f), num(r.ratio)]);
            }
            let chart = Chart {
                title: "k ||u|| / ||f||".into(),
                x_label: "k".into(),
                y_label: "ratio".into(),
                log_x: true,
                series: vec![Series { label: "ratio".into(), points: rows.iter().map(|r| (r.k, r.ratio)).collect() }],
            };
            (t, chart, 0)
        }
    };
    Ok(StudyOutput { kind, table, chart, notes, failures })
}

/// Writes `study.csv`, `study.svg` and `config-echo.cfg` into the output directory.
pub fn write_outputs(cfg: &StudyConfig, out: &StudyOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    out.table.write(&dir.join("study.csv"))?;
    out.chart.write(&dir.join("study.svg"))?;
    std::fs::write(dir.join("config-echo.cfg"), cfg.echo())?;
    Ok(())
}
