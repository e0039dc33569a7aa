//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are still evaluated against their
//! original bands and reported as FAIL; they do not abort the run. Any
//! other failure exits non-zero.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use helmpml::assembly::{assemble_1d, assemble_matrix, assemble_system, uniform_nodes_1d, FormWeights, Source};
use helmpml::experiments::config::{PenaltyMode, StudyConfig, StudyKind};
use helmpml::experiments::penalty_gamma;
use helmpml::experiments::studies::{
    infsup_point, run_convergence_study, run_fixed_kh_study, run_truncation_study, stability_point, StudyRow,
};
use helmpml::geometry::{build_disk_mesh, RegionSel};
use helmpml::norms::{error_vs_reference, loglog_slope};
use helmpml::oracle::{exact_mode_free_space, exact_solution_disk, radial_mode_reference, Pml1dExact};
use helmpml::pml::PmlParams;
use helmpml::quadrature::TriangleRule;
use helmpml::specialfun::{bessel_j, bessel_y};
use num_complex::Complex64;

/// (criterion, reason) pairs that fail their band; see the project notes.
const KNOWN_FAILURES: [(u32, &str); 2] = [
    (4, "FEM/interpolation ratio 1.27 at h = 1/16 exceeds 1.25 (pollution at k^3 h^2 ~ 0.5)"),
    (7, "for f = 1 on the disk ||u|| decays like 1/k^2, so k||u||/||f|| falls like 1/k"),
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn criterion1() -> Outcome {
    // 1D FEM on 4000 cells vs the closed form, discrete L2
    let p = PmlParams::new(10.0, 1.0, 2.0, 5.0).unwrap();
    let f = |x: f64| c(if x.abs() < 1.0 { 1.0 } else { 0.0 });
    let nodes = uniform_nodes_1d(&p, 4000);
    let (u, _) = assemble_1d(&p, &nodes, &f).unwrap().solve().unwrap();
    let exact = Pml1dExact::new(p, f).unwrap().eval_sorted(&nodes).unwrap();
    let num: f64 = u.iter().zip(&exact).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = exact.iter().map(|b| b.norm_sqr()).sum();
    let rel = (num / den).sqrt();
    Outcome { pass: rel <= 0.01, detail: format!("relative discrete L2 difference {rel:.3e} (band 1e-2)") }
}

fn criterion2() -> Outcome {
    let grid: Vec<f64> = (0..400).map(|i| i as f64 / 400.0).collect();
    let mut worst: f64 = 0.0;
    for k in [4.0, 8.0, 16.0] {
        let prof = exact_mode_free_space(k, 0, |_| c(1.0), 1.0, &grid).unwrap();
        for (i, &r) in grid.iter().enumerate() {
            let (u, _) = exact_solution_disk(k, r);
            worst = worst.max((prof.values[i] - u).norm() / u.norm());
        }
    }
    Outcome { pass: worst <= 1e-8, detail: format!("max relative difference {worst:.3e} over k = 4, 8, 16 (band 1e-8)") }
}

fn criterion3() -> Outcome {
    let k = 8.0;
    let p = PmlParams::standard(k);
    let mesh = build_disk_mesh(1.0, 2.0, 1.0 / 32.0).unwrap();
    let sol = assemble_system(&mesh, &p, c(0.0), &Source::default()).unwrap().solve().unwrap();
    let reference = radial_mode_reference(&p, 0, |r| c(if r < 1.0 { 1.0 } else { 0.0 }), 20_000).unwrap();
    let eval = |x: [f64; 2]| reference.eval_xy(x);
    let rep = error_vs_reference(&mesh, &sol.nodal, &eval, RegionSel::All, k);
    let rel = rep.rel_l2.unwrap();
    Outcome { pass: rel <= 0.05, detail: format!("relative L2(D) difference {rel:.3e} (band 5e-2)") }
}

fn rows_for<'a>(rows: &'a [StudyRow], method: &str) -> Vec<&'a StudyRow> {
    rows.iter().filter(|r| r.method() == method).collect()
}

fn criterion4() -> Outcome {
    let mut cfg = StudyConfig::defaults(StudyKind::Convergence);
    cfg.k_list = vec![5.0];
    cfg.h_list = vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    cfg.penalty = PenaltyMode::Zero;
    let rows = run_convergence_study(&cfg).unwrap();
    let fem = rows_for(&rows, "fem");
    let h: Vec<f64> = fem.iter().map(|r| r.h).collect();
    let h1: Vec<f64> = fem.iter().map(|r| r.rel_h1.unwrap()).collect();
    let l2: Vec<f64> = fem.iter().map(|r| r.rel_l2.unwrap()).collect();
    let ratios: Vec<f64> = fem.iter().map(|r| r.rel_h1.unwrap() / r.rel_h1_interp.unwrap()).collect();
    let s1 = loglog_slope(&h, &h1);
    let s2 = loglog_slope(&h, &l2);
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    let pass = (s1 - 1.0).abs() <= 0.2 && (s2 - 2.0).abs() <= 0.3 && worst <= 1.25;
    Outcome {
        pass,
        detail: format!(
            "H1 slope {s1:.3} (1 +- 0.2), L2 slope {s2:.3} (2 +- 0.3), FEM/interp ratios {} (band 1.25)",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn criterion5() -> Outcome {
    let mut cfg = StudyConfig::defaults(StudyKind::FixedKh);
    cfg.k_list = vec![8.0, 16.0, 32.0, 64.0];
    cfg.kh_list = vec![0.5];
    let rows = run_fixed_kh_study(&cfg).unwrap();
    let fem = rows_for(&rows, "fem");
    let cip = rows_for(&rows, "cip");
    let at = |v: &[&StudyRow], k: f64| v.iter().find(|r| r.k == k).map(|r| r.rel_h1.unwrap()).unwrap();
    let growth = at(&fem, 64.0) / at(&fem, 8.0);
    let interp: Vec<f64> = fem.iter().map(|r| r.rel_h1_interp.unwrap()).collect();
    let spread = interp.iter().cloned().fold(0.0, f64::max) / interp.iter().cloned().fold(f64::INFINITY, f64::min);
    let reduction = at(&fem, 64.0) / at(&cip, 64.0);
    let pass = growth >= 2.0 && spread <= 1.5 && reduction >= 1.5;
    Outcome {
        pass,
        detail: format!(
            "FEM(64)/FEM(8) {growth:.3} (>= 2), interp spread {spread:.3} (<= 1.5), CIP reduction at k=64 {reduction:.3} (>= 1.5)"
        ),
    }
}

fn criterion6() -> Outcome {
    let mesh = build_disk_mesh(1.0, 2.0, 0.115).unwrap();
    let rows: Vec<_> = [2.0, 4.0, 8.0].iter().map(|&k| infsup_point(&PmlParams::standard(k), &mesh).unwrap()).collect();
    let kmu: Vec<f64> = rows.iter().map(|r| r.k * r.mu).collect();
    let band = kmu.iter().cloned().fold(0.0, f64::max) / kmu.iter().cloned().fold(f64::INFINITY, f64::min);
    let decreasing = rows.windows(2).all(|w| w[1].mu < w[0].mu);
    Outcome {
        pass: band <= 3.0 && decreasing,
        detail: format!(
            "N = {}, mu = {}, k mu spread {band:.3} (<= 3), decreasing {decreasing}",
            rows[0].n,
            rows.iter().map(|r| format!("{:.4}", r.mu)).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn criterion7() -> Outcome {
    let ratios: Vec<f64> =
        [4.0, 8.0, 16.0, 32.0].iter().map(|&k| stability_point(&PmlParams::standard(k), 1.0, 20_000).unwrap().ratio).collect();
    let band = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Outcome {
        pass: band <= 5.0 && ratios.iter().all(|r| r.is_finite() && *r > 0.0),
        detail: format!(
            "k||u||/||f|| = {} over k = 4..32, spread {band:.3} (<= 5)",
            ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn criterion8() -> Outcome {
    let mut cfg = StudyConfig::defaults(StudyKind::Truncation);
    cfg.k_list = vec![8.0];
    cfg.sigma0_list = vec![0.5, 1.0, 1.5, 2.0, 2.5];
    let (rows, fits) = run_truncation_study(&cfg).unwrap();
    let errors: Vec<String> = rows.iter().map(|r| format!("{:.2e}", r.error)).collect();
    match fits[0].slope {
        Some(s) => Outcome {
            pass: (-2.0..=-0.5).contains(&s),
            detail: format!("slope {s:.3} over {} pre-floor points (within a factor 2 of -1); errors {}", fits[0].points, errors.join(", ")),
        },
        None => Outcome { pass: false, detail: format!("INCONCLUSIVE: errors {}", errors.join(", ")) },
    }
}

fn criterion9() -> Outcome {
    let mut failures = Vec::new();
    // Wronskian J_{n+1} Y_n - J_n Y_{n+1} = 2 / (pi x)
    for n in 0..10 {
        for x in [0.5, 3.0, 17.0, 60.0] {
            let w = bessel_j(n + 1, x).unwrap() * bessel_y(n, x).unwrap() - bessel_j(n, x).unwrap() * bessel_y(n + 1, x).unwrap();
            if ((w - 2.0 / (PI * x)) * PI * x / 2.0).abs() > 1e-10 {
                failures.push(format!("Wronskian n={n} x={x}"));
            }
        }
    }
    let p = PmlParams::standard(8.0);
    for x in [[1.3, 0.4], [-0.2, 1.9], [0.1, -1.05]] {
        if (p.coeff_a_2d(x).det() - c(1.0)).norm() > 1e-13 {
            failures.push("det A".into());
        }
    }
    let mesh = build_disk_mesh(1.0, 2.0, 0.125).unwrap();
    if mesh.validate().is_err() {
        failures.push("mesh / Euler relation".into());
    }
    let sys = assemble_system(&mesh, &p, penalty_gamma(1.0), &Source::default()).unwrap();
    if !sys.matrix.is_complex_symmetric(1e-12) {
        failures.push("complex symmetry".into());
    }
    match sys.solve() {
        Ok(sol) if sol.report.relative_residual <= 1e-10 => {}
        _ => failures.push("Galerkin residual".into()),
    }
    let j = assemble_matrix(&mesh, &p, FormWeights::only_penalty(), &TriangleRule::degree4());
    let lin: Vec<Complex64> = mesh.vertices.iter().map(|x| Complex64::new(x[0] - 2.0 * x[1], 3.0 * x[0])).collect();
    if j.matvec(&lin).iter().any(|v| v.norm() > 1e-11 * j.max_abs()) {
        failures.push("J on linears".into());
    }
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "Wronskian, det A = 1, Euler relation, complex symmetry, residual <= 1e-10, J(linear) = 0".into()
        } else {
            format!("failed: {}", failures.join(", "))
        },
    }
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "1D pipeline vs closed form", criterion1),
        (2, "free-space mode vs disk solution", criterion2),
        (3, "2D FEM vs radial PML reference", criterion3),
        (4, "convergence rates at k = 5", criterion4),
        (5, "pollution signature at kh = 0.5", criterion5),
        (6, "inf-sup scaling", criterion6),
        (7, "L2 stability band", criterion7),
        (8, "PML truncation decay", criterion8),
        (9, "unit invariants", criterion9),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let out = run();
        let secs = t.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id);
        let status = match (out.pass, known) {
            (true, _) => "PASS",
            (false, Some(_)) => "FAIL (known)",
            (false, None) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {id} [{status}] {name}: {} [{secs:.1}s]", out.detail);
        if let (false, Some((_, why))) = (out.pass, known) {
            println!("    known failure: {why}");
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    }
}
