//! Sparse/banded solvers against dense Gaussian elimination, RCM, and the
//! inf-sup pencil against power iteration.

use helmpml::linsolve::{
    bandwidth, dense_min_singular_pencil, reverse_cuthill_mckee, solve_with, Backend, ComplexSparseMatrix, DenseMatrix,
};
use num_complex::Complex64 as C;
use rand::{rngs::StdRng, Rng, SeedableRng};

/// Dense GE with partial pivoting, written independently of the library.
fn dense_solve(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> Vec<C> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            for j in col..n {
                let t = a[col][j];
                a[i][j] -= f * t;
            }
            let t = b[col];
            b[i] -= f * t;
        }
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let s: C = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

fn random_sparse(n: usize, seed: u64) -> (ComplexSparseMatrix, Vec<Vec<C>>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut dense = vec![vec![C::new(0.0, 0.0); n]; n];
    let mut trip = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let near = (i as i64 - j as i64).abs() <= 3;
            if i == j || (near && rng.gen_bool(0.7)) || rng.gen_bool(0.02) {
                let v = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) + if i == j { C::new(2.0, 0.5) } else { C::new(0.0, 0.0) };
                dense[i][j] = v;
                trip.push((i, j, v));
            }
        }
    }
    (ComplexSparseMatrix::from_triplets(n, &trip), dense)
}

#[test]
fn backends_match_dense_elimination() {
    for seed in 0..4 {
        let (m, dense) = random_sparse(50, seed);
        let mut rng = StdRng::seed_from_u64(100 + seed);
        let b: Vec<C> = (0..50).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let x_ref = dense_solve(dense, b.clone());
        for backend in [Backend::Banded, Backend::SparseLu, Backend::Auto] {
            let (x, rep) = solve_with(&m, &b, backend).unwrap();
            let err: f64 = x.iter().zip(&x_ref).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let scale = x_ref.iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(err <= 1e-10 * scale, "seed {seed} {backend:?}: {err}");
            assert!(rep.relative_residual <= 1e-12);
        }
    }
}

#[test]
fn rcm_is_a_permutation_that_narrows_a_shuffled_band() {
    let n = 200;
    let mut rng = StdRng::seed_from_u64(7);
    let mut shuffle: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        shuffle.swap(i, rng.gen_range(0..=i));
    }
    let mut trip = Vec::new();
    for i in 0..n {
        for d in 0..=2 {
            if i + d < n {
                trip.push((shuffle[i], shuffle[i + d], C::new(1.0, 0.0)));
                trip.push((shuffle[i + d], shuffle[i], C::new(1.0, 0.0)));
            }
        }
    }
    let m = ComplexSparseMatrix::from_triplets(n, &trip);
    let perm = reverse_cuthill_mckee(&m);
    let mut seen = perm.clone();
    seen.sort_unstable();
    assert_eq!(seen, (0..n).collect::<Vec<_>>());
    let (nl, _) = bandwidth(&m, None);
    let (pl, pu) = bandwidth(&m, Some(&perm));
    assert!(pl <= 4 && pu <= 4, "rcm bandwidth {pl},{pu}");
    assert!(nl > 20);
}

#[test]
fn pencil_matches_power_iteration() {
    // sigma_min of E^{-1/2} A E^{-1/2} with diagonal E: inverse power
    // iteration on (B^H B) where B is formed by hand.
    let a = [
        [C::new(2.0, 1.0), C::new(0.5, 0.0), C::new(0.0, -0.3)],
        [C::new(0.5, 0.0), C::new(-1.0, 0.2), C::new(0.4, 0.1)],
        [C::new(0.0, -0.3), C::new(0.4, 0.1), C::new(0.7, -0.5)],
    ];
    let e = [1.0, 4.0, 0.25];
    let am = DenseMatrix::from_fn(3, |i, j| a[i][j]);
    let em = DenseMatrix::from_fn(3, |i, j| if i == j { C::new(e[i], 0.0) } else { C::new(0.0, 0.0) });
    let mu = dense_min_singular_pencil(&am, &em).unwrap();

    let b: Vec<Vec<C>> = (0..3).map(|i| (0..3).map(|j| a[i][j] / (e[i] * e[j]).sqrt()).collect()).collect();
    let bhb: Vec<Vec<C>> =
        (0..3).map(|i| (0..3).map(|j| (0..3).map(|k| b[k][i].conj() * b[k][j]).sum()).collect()).collect();
    let mut v = vec![C::new(1.0, 0.0), C::new(0.3, 0.1), C::new(-0.2, 0.5)];
    let mut lambda = 0.0;
    for _ in 0..500 {
        let w = dense_solve(bhb.clone(), v.clone());
        let nw = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        lambda = nv / nw;
        v = w.iter().map(|z| z / nw).collect();
    }
    assert!((mu - lambda.sqrt()).abs() <= 1e-10 * mu, "{mu} vs {}", lambda.sqrt());
}
