//! SVD-based solvers for the ill-conditioned system `Ĝ v = ũ`.
//!
//! Everything here works from a thin SVD `Ĝ = U diag(σ) V*`:
//!
//! * truncated pseudo-inverse: `v = Σ_{σ_i ≥ tol} σ_i⁻¹ (u_i* ũ) v_i`
//! * Tikhonov: `v_γ = Σ_i σ_i / (σ_i² + γ²) (u_i* ũ) v_i`, the minimizer of
//!   `‖Ĝv − ũ‖² + γ²‖v‖²`
//! * L-curve: the `γ` maximizing the curvature of
//!   `(log ‖Ĝv_γ − ũ‖, log ‖v_γ‖)`.

use alloc::vec::Vec;

use num_complex::Complex64;
// Shadowed by inherent methods whenever std is in the crate graph.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{CMatrix, CVector, Error, Result};

/// Thin singular value decomposition with singular values in nonincreasing
/// order. Only strictly positive singular values are retained.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    /// `rows × r`, orthonormal columns.
    pub left_vectors: CMatrix,
    pub singular_values: Vec<f64>,
    /// `cols × r`, orthonormal columns.
    pub right_vectors: CMatrix,
    shape: (usize, usize),
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// `σ_max / σ_min` over the retained values (infinite when nothing is retained).
    pub fn condition_number(&self) -> f64 {
        match (self.singular_values.first(), self.singular_values.last()) {
            (Some(hi), Some(lo)) => hi / lo,
            _ => f64::INFINITY,
        }
    }

    /// Number of singular values strictly above `rel_tol · σ_max`.
    pub fn rank_above(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.sigma_max();
        self.singular_values.iter().filter(|&&s| s > cut).count()
    }

    /// `U diag(σ) V*`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.left_vectors.clone();
        for (mut col, &s) in us.column_iter_mut().zip(&self.singular_values) {
            col.scale_mut(s);
        }
        us * self.right_vectors.adjoint()
    }

    /// Coefficients `U* b`.
    fn project(&self, rhs: &CVector) -> Result<CVector> {
        if rhs.len() != self.shape.0 {
            return Err(Error::SizeMismatch {
                expected: self.shape.0,
                found: rhs.len(),
            });
        }
        Ok(self.left_vectors.ad_mul(rhs))
    }

    /// `V c` for a coefficient vector over the retained singular directions.
    fn expand(&self, coeffs: &CVector) -> CVector {
        &self.right_vectors * coeffs
    }
}

pub fn compute_svd(matrix: &CMatrix) -> Result<SvdFactors> {
    let shape = matrix.shape();
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries"));
    }
    let min_dim = shape.0.min(shape.1);
    if min_dim == 0 {
        return Ok(SvdFactors {
            left_vectors: CMatrix::zeros(shape.0, 0),
            singular_values: Vec::new(),
            right_vectors: CMatrix::zeros(shape.1, 0),
            shape,
        });
    }
    // nalgebra's complex bidiagonal SVD can return orthogonal but wrong
    // factors, so use one-sided Jacobi on the taller orientation instead.
    let (u, sigma, v) = if shape.0 >= shape.1 {
        one_sided_jacobi(matrix.clone())?
    } else {
        let (u, sigma, v) = one_sided_jacobi(matrix.adjoint())?;
        (v, sigma, u)
    };
    let mut order: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > 0.0).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));

    let singular_values = order.iter().map(|&i| sigma[i]).collect();
    let left_vectors = CMatrix::from_fn(shape.0, order.len(), |r, k| u[(r, order[k])]);
    let right_vectors = CMatrix::from_fn(shape.1, order.len(), |r, k| v[(r, order[k])]);
    Ok(SvdFactors {
        left_vectors,
        singular_values,
        right_vectors,
        shape,
    })
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// Hestenes rotations on a tall `m × n` matrix until all column pairs are
/// numerically orthogonal. Returns `(U, σ, V)` unsorted.
fn one_sided_jacobi(mut w: CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    let (m, n) = w.shape();
    let mut v = CMatrix::identity(n, n);
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotating against e^{-iφ} w_q reduces to a real symmetric 2×2.
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut w, &mut v] {
                    for r in 0..mat.nrows() {
                        let a = mat[(r, p)];
                        let b = mat[(r, q)] * phase;
                        mat[(r, p)] = a * c - b * s;
                        mat[(r, q)] = a * s + b * c;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure);
    }
    let sigma: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut u = CMatrix::zeros(m, n);
    for j in 0..n {
        if sigma[j] > 0.0 {
            u.set_column(j, &(w.column(j) / Complex64::new(sigma[j], 0.0)));
        }
    }
    Ok((u, sigma, v))
}

/// Minimum-norm solution restricted to singular directions with `σ_i ≥ tol`.
pub fn truncated_pinv_apply(factors: &SvdFactors, tol: f64, rhs: &CVector) -> Result<CVector> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("pseudo-inverse threshold must be positive"));
    }
    let beta = factors.project(rhs)?;
    let kept = factors.singular_values.iter().take_while(|&&s| s >= tol).count();
    if kept == 0 {
        return Err(Error::AllTruncated { tol });
    }
    let coeffs = CVector::from_fn(factors.rank(), |i, _| {
        if i < kept {
            beta[i] / factors.singular_values[i]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(factors.expand(&coeffs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TikhonovSolution {
    pub v_gamma: CVector,
    pub gamma: f64,
    /// `‖Ĝ v_γ − ũ‖₂`
    pub residual_norm: f64,
    /// `‖v_γ‖₂`
    pub solution_norm: f64,
}

pub fn tikhonov_solve(factors: &SvdFactors, rhs: &CVector, gamma: f64) -> Result<TikhonovSolution> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter("regularization parameter must be positive"));
    }
    let beta = factors.project(rhs)?;
    let g2 = gamma * gamma;
    let coeffs = CVector::from_fn(factors.rank(), |i, _| {
        let s = factors.singular_values[i];
        beta[i] * (s / (s * s + g2))
    });
    let v_gamma = factors.expand(&coeffs);
    let fitted = CVector::from_fn(factors.rank(), |i, _| coeffs[i] * factors.singular_values[i]);
    let residual_norm = (&factors.left_vectors * fitted - rhs).norm();
    let solution_norm = v_gamma.norm();
    Ok(TikhonovSolution {
        v_gamma,
        gamma,
        residual_norm,
        solution_norm,
    })
}

/// One point of the L-curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LCurvePoint {
    pub gamma: f64,
    pub residual_norm: f64,
    pub solution_norm: f64,
    /// Signed curvature of `(log ‖r‖, log ‖v‖)`; positive at the corner.
    pub curvature: f64,
}

/// Why a parameter choice is not a regular interior L-curve corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionFlag {
    /// The curvature maximum sits on the end of the search grid.
    FlatCurve,
    /// `‖ũ‖ = 0`; the zero vector is returned with `γ = σ_1`.
    ZeroRhs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterChoice {
    pub solution: TikhonovSolution,
    pub flag: Option<SelectionFlag>,
}

/// Chooses a regularization parameter and returns the matching solution.
pub trait ParameterSelector {
    fn select(&self, factors: &SvdFactors, rhs: &CVector) -> Result<ParameterChoice>;
}

pub const DEFAULT_LCURVE_GRID: usize = 200;
/// Lower end of the `γ` grid relative to `σ_1`.
pub const LCURVE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LCurve {
    pub grid_size: usize,
}

impl Default for LCurve {
    fn default() -> Self {
        Self {
            grid_size: DEFAULT_LCURVE_GRID,
        }
    }
}

impl ParameterSelector for LCurve {
    fn select(&self, factors: &SvdFactors, rhs: &CVector) -> Result<ParameterChoice> {
        lcurve_select(factors, rhs, self.grid_size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedGamma(pub f64);

impl ParameterSelector for FixedGamma {
    fn select(&self, factors: &SvdFactors, rhs: &CVector) -> Result<ParameterChoice> {
        Ok(ParameterChoice {
            solution: tikhonov_solve(factors, rhs, self.0)?,
            flag: None,
        })
    }
}

/// Precomputed spectral data for evaluating the L-curve at any `γ`.
struct LCurveModel<'a> {
    sigma: &'a [f64],
    /// `|u_i* ũ|²`
    power: Vec<f64>,
    /// `‖(I − UU*) ũ‖²`
    perp: f64,
}

impl<'a> LCurveModel<'a> {
    fn new(factors: &'a SvdFactors, rhs: &CVector) -> Result<Self> {
        let beta = factors.project(rhs)?;
        let power: Vec<f64> = beta.iter().map(|b| b.norm_sqr()).collect();
        let perp = (&factors.left_vectors * &beta - rhs).norm_squared();
        Ok(Self {
            sigma: &factors.singular_values,
            power,
            perp,
        })
    }

    /// `(‖r‖, ‖v‖, κ)` at `γ = e^t`, with analytic derivatives in `t`.
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let g2 = (2.0 * t).exp();
        let (mut rho, mut rho1, mut rho2) = (self.perp, 0.0, 0.0);
        let (mut eta, mut eta1, mut eta2) = (0.0, 0.0, 0.0);
        for (&s, &b) in self.sigma.iter().zip(&self.power) {
            let s2 = s * s;
            let den = s2 + g2;
            let f = s2 / den;
            let q = g2 / den;
            let q2f = q * q * f;
            rho += q * q * b;
            rho1 += 4.0 * q2f * b;
            rho2 += 8.0 * q2f * (2.0 * f - q) * b;
            // f²/σ² written without dividing by σ
            let f2_s2 = s2 / (den * den);
            eta += f2_s2 * b;
            eta1 -= 4.0 * q * f2_s2 * b;
            eta2 -= 8.0 * q * f2_s2 * (f - 2.0 * q) * b;
        }
        let x1 = rho1 / (2.0 * rho);
        let x2 = (rho2 * rho - rho1 * rho1) / (2.0 * rho * rho);
        let y1 = eta1 / (2.0 * eta);
        let y2 = (eta2 * eta - eta1 * eta1) / (2.0 * eta * eta);
        let speed = x1 * x1 + y1 * y1;
        let kappa = if speed > 0.0 {
            (x1 * y2 - x2 * y1) / (speed * speed.sqrt())
        } else {
            0.0
        };
        (rho.sqrt(), eta.sqrt(), if kappa.is_finite() { kappa } else { f64::NEG_INFINITY })
    }
}

/// Search interval `[max(σ_r, 10⁻¹²σ_1), σ_1]` for the L-curve.
pub fn lcurve_range(factors: &SvdFactors) -> (f64, f64) {
    let hi = factors.sigma_max();
    let lo = factors
        .singular_values
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(LCURVE_FLOOR * hi);
    (lo, hi)
}

/// Log-spaced grid over [`lcurve_range`].
pub fn lcurve_grid(factors: &SvdFactors, grid_size: usize) -> Vec<f64> {
    let (lo, hi) = lcurve_range(factors);
    let (a, b) = (lo.ln(), hi.ln());
    (0..grid_size)
        .map(|k| {
            if k + 1 == grid_size {
                hi
            } else if k == 0 {
                lo
            } else {
                (a + (b - a) * k as f64 / (grid_size - 1) as f64).exp()
            }
        })
        .collect()
}

/// L-curve samples at the given parameters.
pub fn lcurve_points(factors: &SvdFactors, rhs: &CVector, gammas: &[f64]) -> Result<Vec<LCurvePoint>> {
    let model = LCurveModel::new(factors, rhs)?;
    Ok(gammas
        .iter()
        .map(|&gamma| {
            let (residual_norm, solution_norm, curvature) = model.eval(gamma.ln());
            LCurvePoint {
                gamma,
                residual_norm,
                solution_norm,
                curvature,
            }
        })
        .collect())
}

/// Tikhonov solution at the L-curve corner.
pub fn lcurve_select(factors: &SvdFactors, rhs: &CVector, grid_size: usize) -> Result<ParameterChoice> {
    if factors.rank() < 2 {
        return Err(Error::InvalidParameter("L-curve needs at least two singular values"));
    }
    if grid_size < 16 {
        return Err(Error::InvalidParameter("L-curve grid needs at least 16 points"));
    }
    if rhs.len() != factors.shape().0 {
        return Err(Error::SizeMismatch {
            expected: factors.shape().0,
            found: rhs.len(),
        });
    }
    let sigma_1 = factors.sigma_max();
    if rhs.iter().all(|z| z.norm_sqr() == 0.0) {
        return Ok(ParameterChoice {
            solution: tikhonov_solve(factors, rhs, sigma_1)?,
            flag: Some(SelectionFlag::ZeroRhs),
        });
    }

    let model = LCurveModel::new(factors, rhs)?;
    let grid = lcurve_grid(factors, grid_size);
    let (lo, hi) = lcurve_range(factors);
    if hi <= lo * (1.0 + 1e-12) {
        return Ok(ParameterChoice {
            solution: tikhonov_solve(factors, rhs, sigma_1)?,
            flag: Some(SelectionFlag::FlatCurve),
        });
    }
    let logs: Vec<f64> = grid.iter().map(|g| g.ln()).collect();
    let curvature: Vec<f64> = logs.iter().map(|&t| model.eval(t).2).collect();
    let best = curvature
        .iter()
        .enumerate()
        .fold(0, |best, (k, &c)| if c > curvature[best] { k } else { best });

    if best == 0 || best + 1 == grid.len() {
        return Ok(ParameterChoice {
            solution: tikhonov_solve(factors, rhs, grid[best])?,
            flag: Some(SelectionFlag::FlatCurve),
        });
    }

    let refined = golden_section_max(|t| model.eval(t).2, logs[best - 1], logs[best + 1]);
    let t = if model.eval(refined).2 >= curvature[best] {
        refined
    } else {
        logs[best]
    };
    Ok(ParameterChoice {
        solution: tikhonov_solve(factors, rhs, t.exp().clamp(lo, hi))?,
        flag: None,
    })
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if (b - a).abs() < 1e-10 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn diag(values: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(values.len(), values.iter().map(|&v| c(v))))
    }

    #[test]
    fn svd_of_diagonals() {
        assert_eq!(compute_svd(&CMatrix::identity(3, 3)).unwrap().singular_values, vec![1.0; 3]);
        let f = compute_svd(&diag(&[1.0, 3.0, 2.0])).unwrap();
        for (s, e) in f.singular_values.iter().zip([3.0, 2.0, 1.0]) {
            assert!((s - e).abs() < 1e-15);
        }
        let f = compute_svd(&CMatrix::zeros(3, 2)).unwrap();
        assert_eq!(f.rank(), 0);
        assert!(compute_svd(&CMatrix::from_element(2, 2, c(f64::NAN))).is_err());
    }

    #[test]
    fn pinv_on_identity_and_truncation() {
        let f = compute_svd(&CMatrix::identity(3, 3)).unwrap();
        let b = CVector::from_vec(vec![c(1.0), Complex64::new(2.0, -1.0), c(-3.0)]);
        assert!((truncated_pinv_apply(&f, 0.5, &b).unwrap() - &b).norm() < 1e-15);

        let f = compute_svd(&diag(&[1.0, 1e-6])).unwrap();
        let x = truncated_pinv_apply(&f, 1e-3, &CVector::from_vec(vec![c(1.0), c(1.0)])).unwrap();
        assert!((x[0] - c(1.0)).norm() < 1e-15 && x[1].norm() < 1e-15);

        assert_eq!(
            truncated_pinv_apply(&f, 2.0, &CVector::from_vec(vec![c(1.0), c(1.0)])),
            Err(Error::AllTruncated { tol: 2.0 })
        );
        assert!(truncated_pinv_apply(&f, 0.0, &CVector::zeros(2)).is_err());
        assert!(matches!(
            truncated_pinv_apply(&f, 0.1, &CVector::zeros(3)),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn tikhonov_on_identity() {
        let f = compute_svd(&CMatrix::identity(4, 4)).unwrap();
        let b = CVector::from_fn(4, |i, _| Complex64::new(i as f64, 1.0));
        let g = 0.7;
        let sol = tikhonov_solve(&f, &b, g).unwrap();
        assert!((sol.v_gamma - &b / c(1.0 + g * g)).norm() < 1e-15);
        assert!(tikhonov_solve(&f, &b, 0.0).is_err());
        assert!(tikhonov_solve(&f, &b, -1.0).is_err());
    }

    #[test]
    fn lcurve_preconditions() {
        let f = compute_svd(&diag(&[2.0, 1.0])).unwrap();
        let b = CVector::from_vec(vec![c(1.0), c(1.0)]);
        assert!(lcurve_select(&f, &b, 8).is_err());
        let single = compute_svd(&diag(&[2.0])).unwrap();
        assert!(lcurve_select(&single, &CVector::from_vec(vec![c(1.0)]), 32).is_err());

        let zero = lcurve_select(&f, &CVector::zeros(2), 32).unwrap();
        assert_eq!(zero.flag, Some(SelectionFlag::ZeroRhs));
        assert_eq!(zero.solution.gamma, 2.0);
        assert_eq!(zero.solution.v_gamma.norm(), 0.0);
    }

    #[test]
    fn lcurve_on_equal_singular_values_is_flat() {
        let f = compute_svd(&CMatrix::identity(3, 3)).unwrap();
        let b = CVector::from_vec(vec![c(1.0), c(2.0), c(3.0)]);
        let choice = lcurve_select(&f, &b, 32).unwrap();
        assert_eq!(choice.flag, Some(SelectionFlag::FlatCurve));
    }

    #[test]
    fn grid_endpoints() {
        let f = compute_svd(&diag(&[10.0, 1.0, 1e-20])).unwrap();
        let grid = lcurve_grid(&f, 50);
        assert_eq!(grid[0], 10.0 * LCURVE_FLOOR);
        assert_eq!(grid[49], 10.0);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }
}
