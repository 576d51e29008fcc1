//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use eigenmatrix_core::{CMatrix, CVector, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| random_complex(rng))
}

/// Modified Gram–Schmidt on the columns of a random matrix.
pub fn random_orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    let mut q = random_matrix(rng, rows, cols);
    for k in 0..cols {
        for j in 0..k {
            let proj = q.column(j).dotc(&q.column(k));
            let qj = q.column(j).into_owned();
            let mut col = q.column_mut(k);
            col -= qj * proj;
        }
        let n = q.column(k).norm();
        q.column_mut(k).unscale_mut(n);
    }
    q
}

/// `U diag(σ) V*` with random orthonormal factors.
pub fn matrix_with_spectrum(rng: &mut ChaCha8Rng, rows: usize, sigma: &[f64]) -> CMatrix {
    let n = sigma.len();
    let u = random_orthonormal(rng, rows, n);
    let v = random_orthonormal(rng, n, n);
    let mut us = u;
    for (k, &s) in sigma.iter().enumerate() {
        us.column_mut(k).scale_mut(s);
    }
    us * v.adjoint()
}

/// Gaussian elimination with partial pivoting; square systems only.
pub fn dense_solve(a: &CMatrix, b: &CVector) -> CVector {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[(i, k)].norm().total_cmp(&m[(j, k)].norm()))
            .unwrap();
        m.swap_rows(k, p);
        x.swap_rows(k, p);
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            for j in k..n {
                let mkj = m[(k, j)];
                m[(i, j)] -= f * mkj;
            }
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= m[(k, j)] * x[j];
        }
        x[k] = s / m[(k, k)];
    }
    x
}

/// Least squares through the normal equations, as a dense oracle.
pub fn normal_equation_solve(a: &CMatrix, b: &CVector) -> CVector {
    dense_solve(&(a.adjoint() * a), &(a.adjoint() * b))
}

/// `G diag(w) [1, x, …, xˡ]` row by row: column `k` is `Σ_j w_j x_j^k G[:, j]`.
pub fn structured_krylov(g: &CMatrix, w: &[Complex64], x: &[Complex64], l: usize) -> CMatrix {
    let mut a = CMatrix::zeros(g.nrows(), l + 1);
    for k in 0..=l {
        for j in 0..x.len() {
            let coef = w[j] * x[j].powu(k as u32);
            for r in 0..g.nrows() {
                a[(r, k)] += g[(r, j)] * coef;
            }
        }
    }
    a
}

/// Largest pairwise gap under the best one-to-one matching, by brute force.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    fn go(a: &[Complex64], b: &[Complex64], used: &mut [bool], k: usize, acc: f64) -> f64 {
        if k == a.len() {
            return acc;
        }
        let mut best = f64::INFINITY;
        for i in 0..b.len() {
            if !used[i] {
                used[i] = true;
                best = best.min(go(a, b, used, k + 1, acc.max((a[k] - b[i]).norm())));
                used[i] = false;
            }
        }
        best
    }
    assert_eq!(a.len(), b.len());
    go(a, b, &mut vec![false; b.len()], 0, 0.0)
}

pub fn rel_err(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn rel_err_vec(a: &CVector, b: &CVector) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
