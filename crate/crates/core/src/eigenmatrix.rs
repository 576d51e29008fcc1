//! The recovery pipeline.
//!
//! 1. Build the column-normalized collocation matrix `Ĝ` and `Λ = diag(a_t)`.
//! 2. Either form `M = Ĝ Λ Ĝ†` with a thresholded pseudo-inverse, or solve
//!    `Ĝ v = ũ` by Tikhonov regularization.
//! 3. Assemble `A = [ũ, Mũ, …, Mˡũ]` (or `[ũ, ĜΛv, …, ĜΛˡv]`) and read the
//!    spike locations off the rank-`n_x` right singular subspace (ESPRIT).
//! 4. Fit the weights by least squares against the recovered kernel columns.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::linalg::Schur;
use num_complex::Complex64;

use crate::kernels::{
    build_collocation_system, CollocationNodes, CollocationSystem, Kernel, Observations,
    SampleSet,
};
use crate::regularization::{
    compute_svd, truncated_pinv_apply, FixedGamma, LCurve, ParameterSelector, SelectionFlag,
    SvdFactors, DEFAULT_LCURVE_GRID,
};
use crate::{CMatrix, CVector, Error, Result};

/// Pseudo-inverse threshold as a multiple of `‖Ĝ‖_F`.
pub const DEFAULT_TOL_FACTOR: f64 = 1e-4;
/// The alternative threshold used for low-noise data.
pub const FINE_TOL_FACTOR: f64 = 1e-8;
/// `σ_{n_x}(A) / σ_1(A)` below this makes ESPRIT fail.
pub const KRYLOV_RANK_FLOOR: f64 = 1e-13;
/// `cond(V₋*)` above this is reported as an ill-conditioned shift.
pub const SHIFT_CONDITION_LIMIT: f64 = 1e8;
/// Relative singular value cut for the weight least-squares problem.
pub const WEIGHT_RCOND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Original method: `M = Ĝ Λ Ĝ†` with `Ĝ†` truncated at `tol_factor · ‖Ĝ‖_F`.
    OriginalPinv { tol_factor: f64 },
    /// `M`-free method with the Tikhonov parameter chosen on the L-curve.
    RegularizedLCurve { grid_size: usize },
    /// `M`-free method with a fixed Tikhonov parameter.
    RegularizedFixedGamma { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    OriginalPinv,
    RegularizedLCurve,
    RegularizedFixedGamma,
}

impl Variant {
    pub const fn name(self) -> &'static str {
        match self {
            Variant::OriginalPinv => "pinv",
            Variant::RegularizedLCurve => "lcurve",
            Variant::RegularizedFixedGamma => "fixed-gamma",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "pinv" => Some(Variant::OriginalPinv),
            "lcurve" => Some(Variant::RegularizedLCurve),
            "fixed-gamma" => Some(Variant::RegularizedFixedGamma),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Method {
    pub fn variant(&self) -> Variant {
        match self {
            Method::OriginalPinv { .. } => Variant::OriginalPinv,
            Method::RegularizedLCurve { .. } => Variant::RegularizedLCurve,
            Method::RegularizedFixedGamma { .. } => Variant::RegularizedFixedGamma,
        }
    }

    pub const fn pinv() -> Self {
        Method::OriginalPinv {
            tol_factor: DEFAULT_TOL_FACTOR,
        }
    }

    pub const fn lcurve() -> Self {
        Method::RegularizedLCurve {
            grid_size: DEFAULT_LCURVE_GRID,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    /// The Krylov matrix has `l + 1` columns.
    pub l: usize,
    /// Number of spikes, assumed known.
    pub n_x: usize,
}

impl MethodConfig {
    /// Uses the default `l = 2 n_x + 2`.
    pub fn new(method: Method, n_x: usize) -> Self {
        Self {
            method,
            l: default_krylov_depth(n_x),
            n_x,
        }
    }

    pub fn with_l(mut self, l: usize) -> Self {
        self.l = l;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x == 0 {
            return Err(Error::InvalidParameter("n_x must be positive"));
        }
        if self.l <= self.n_x {
            return Err(Error::InvalidParameter("Krylov depth l must exceed n_x"));
        }
        match self.method {
            Method::OriginalPinv { tol_factor } if !(tol_factor > 0.0) => {
                Err(Error::InvalidParameter("tol_factor must be positive"))
            }
            Method::RegularizedFixedGamma { gamma } if !(gamma > 0.0) => {
                Err(Error::InvalidParameter("gamma must be positive"))
            }
            _ => Ok(()),
        }
    }
}

pub const fn default_krylov_depth(n_x: usize) -> usize {
    2 * n_x + 2
}

/// `M = Ĝ Λ Ĝ†_tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenmatrixOperator {
    pub m: CMatrix,
    pub tol: f64,
    /// Singular values of `Ĝ` kept by the threshold.
    pub retained_rank: usize,
}

impl EigenmatrixOperator {
    pub fn apply(&self, x: &CVector) -> CVector {
        &self.m * x
    }
}

pub fn build_eigenmatrix(system: &CollocationSystem, tol: f64) -> Result<EigenmatrixOperator> {
    let factors = compute_svd(&system.g_hat)?;
    build_eigenmatrix_from(system, &factors, tol)
}

/// [`build_eigenmatrix`] with a precomputed SVD of `Ĝ`.
pub fn build_eigenmatrix_from(
    system: &CollocationSystem,
    factors: &SvdFactors,
    tol: f64,
) -> Result<EigenmatrixOperator> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("pseudo-inverse threshold must be positive"));
    }
    let kept = factors.singular_values.iter().take_while(|&&s| s >= tol).count();
    if kept == 0 {
        return Err(Error::AllTruncated { tol });
    }
    // Ĝ† = V_k Σ_k⁻¹ U_k*, so M = (Ĝ Λ V_k Σ_k⁻¹) U_k*.
    let mut inner = factors.right_vectors.columns(0, kept).into_owned();
    for (mut col, &s) in inner.column_iter_mut().zip(&factors.singular_values) {
        col.unscale_mut(s);
    }
    let mut g_lambda = system.g_hat.clone();
    for (mut col, &a) in g_lambda.column_iter_mut().zip(&system.nodes) {
        col *= a;
    }
    let m = (g_lambda * inner) * factors.left_vectors.columns(0, kept).adjoint();
    Ok(EigenmatrixOperator {
        m,
        tol,
        retained_rank: kept,
    })
}

/// `A`, with `l + 1` columns; column 0 is the observation vector.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovMatrix {
    pub columns: CMatrix,
}

impl KrylovMatrix {
    pub fn depth(&self) -> usize {
        self.columns.ncols() - 1
    }
}

/// `[ũ, Mũ, …, Mˡũ]` by repeated matrix-vector products.
pub fn krylov_original(op: &EigenmatrixOperator, u_noisy: &CVector, l: usize) -> Result<KrylovMatrix> {
    if l == 0 {
        return Err(Error::InvalidParameter("Krylov depth must be at least 1"));
    }
    if u_noisy.len() != op.m.ncols() {
        return Err(Error::SizeMismatch {
            expected: op.m.ncols(),
            found: u_noisy.len(),
        });
    }
    let mut columns = CMatrix::zeros(u_noisy.len(), l + 1);
    columns.set_column(0, u_noisy);
    let mut current = u_noisy.clone();
    for k in 1..=l {
        current = op.apply(&current);
        columns.set_column(k, &current);
    }
    Ok(KrylovMatrix { columns })
}

/// `[ũ, ĜΛv, …, ĜΛˡv]`, applying the diagonal powers entrywise to `v`.
pub fn krylov_regularized(
    system: &CollocationSystem,
    v: &CVector,
    u_noisy: &CVector,
    l: usize,
) -> Result<KrylovMatrix> {
    if l == 0 {
        return Err(Error::InvalidParameter("Krylov depth must be at least 1"));
    }
    if v.len() != system.n_nodes() {
        return Err(Error::SizeMismatch {
            expected: system.n_nodes(),
            found: v.len(),
        });
    }
    if u_noisy.len() != system.n_samples() {
        return Err(Error::SizeMismatch {
            expected: system.n_samples(),
            found: u_noisy.len(),
        });
    }
    let mut columns = CMatrix::zeros(u_noisy.len(), l + 1);
    columns.set_column(0, u_noisy);
    let mut weighted = v.clone();
    for k in 1..=l {
        weighted.iter_mut().zip(&system.nodes).for_each(|(w, a)| *w *= a);
        columns.set_column(k, &(&system.g_hat * &weighted));
    }
    Ok(KrylovMatrix { columns })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EspritOutput {
    pub locations: Vec<Complex64>,
    /// `cond(V₋*)`.
    pub cond_v_minus: f64,
    /// `σ_{n_x}(A) / σ_{n_x+1}(A)`, infinite when `A` has exactly `n_x` nonzero singular values.
    pub svd_gap: f64,
    /// `cond(V₋*)` exceeded [`SHIFT_CONDITION_LIMIT`].
    pub ill_conditioned_shift: bool,
}

/// Eigenvalues of `V₊*(V₋*)†` from the rank-`n_x` right singular subspace of `A`.
pub fn esprit_extract(a: &KrylovMatrix, n_x: usize) -> Result<EspritOutput> {
    let (rows, cols) = a.columns.shape();
    if n_x == 0 {
        return Err(Error::InvalidParameter("n_x must be positive"));
    }
    if rows < n_x || cols < n_x + 1 {
        return Err(Error::InvalidParameter("Krylov matrix too small for the spike count"));
    }
    let factors = compute_svd(&a.columns)?;
    let sigma = &factors.singular_values;
    let ratio = if factors.rank() >= n_x {
        sigma[n_x - 1] / sigma[0]
    } else {
        0.0
    };
    if !(ratio >= KRYLOV_RANK_FLOOR) {
        return Err(Error::RankDeficient { n_x, ratio });
    }
    let svd_gap = sigma
        .get(n_x)
        .map_or(f64::INFINITY, |&next| sigma[n_x - 1] / next);

    // V* restricted to the leading n_x right singular vectors: n_x × (l + 1).
    let v_star = factors.right_vectors.columns(0, n_x).adjoint();
    let l = cols - 1;
    let v_minus = v_star.columns(0, l).into_owned();
    let v_plus = v_star.columns(1, l).into_owned();

    // T V₋* = V₊*  ⇔  (V₋*)ᴴ Tᴴ = (V₊*)ᴴ, a small l × n_x least-squares problem.
    let shift_factors = compute_svd(&v_minus.adjoint())?;
    let cond_v_minus = if shift_factors.rank() == n_x {
        shift_factors.condition_number()
    } else {
        f64::INFINITY
    };
    let rhs = v_plus.adjoint();
    let mut t_adj = CMatrix::zeros(n_x, n_x);
    for k in 0..n_x {
        let col = rhs.column(k).into_owned();
        let tol = shift_factors.sigma_max() * f64::EPSILON * l as f64;
        let sol = truncated_pinv_apply(&shift_factors, tol.max(f64::MIN_POSITIVE), &col)?;
        t_adj.set_column(k, &sol);
    }
    let locations = eigenvalues(t_adj.adjoint())?;
    Ok(EspritOutput {
        locations,
        cond_v_minus,
        svd_gap,
        ill_conditioned_shift: !(cond_v_minus <= SHIFT_CONDITION_LIMIT),
    })
}

/// Eigenvalues of a small dense complex matrix via the complex Schur form.
pub fn eigenvalues(m: CMatrix) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n == 1 {
        return Ok(alloc::vec![m[(0, 0)]]);
    }
    let schur = Schur::try_new(m, f64::EPSILON, 1000 * n).ok_or(Error::EigenFailure)?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Minimum-norm least squares `G̃ w̃ = ũ` with `G̃[j][k] = g(s_j, x̃_k)`.
pub fn recover_weights(
    kernel: &Kernel,
    samples: &SampleSet,
    locations: &[Complex64],
    u_noisy: &CVector,
) -> Result<Vec<Complex64>> {
    if u_noisy.len() != samples.len() {
        return Err(Error::SizeMismatch {
            expected: samples.len(),
            found: u_noisy.len(),
        });
    }
    let mut design = CMatrix::zeros(samples.len(), locations.len());
    for (k, &x) in locations.iter().enumerate() {
        for (j, &s) in samples.points.iter().enumerate() {
            design[(j, k)] = kernel.eval(s, x)?;
        }
    }
    let factors = compute_svd(&design)?;
    if factors.rank() == 0 {
        return Err(Error::DegenerateDesign);
    }
    let tol = WEIGHT_RCOND * factors.sigma_max();
    Ok(truncated_pinv_apply(&factors, tol, u_noisy)?.iter().copied().collect())
}

/// Pipeline stage, attached to errors from [`recover`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Collocation,
    Eigenmatrix,
    ParameterSelection,
    Krylov,
    Esprit,
    Weights,
}

impl Stage {
    pub const fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Collocation => "collocation",
            Stage::Eigenmatrix => "eigenmatrix",
            Stage::ParameterSelection => "parameter-selection",
            Stage::Krylov => "krylov",
            Stage::Esprit => "esprit",
            Stage::Weights => "weights",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct RecoveryError {
    pub stage: Stage,
    pub source: Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> core::result::Result<T, RecoveryError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> core::result::Result<T, RecoveryError> {
        self.map_err(|source| RecoveryError { stage, source })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Eigenvalues exactly as ESPRIT returned them.
    pub raw_locations: Vec<Complex64>,
    pub cond_v_minus: f64,
    pub svd_gap: f64,
    pub ill_conditioned_shift: bool,
    /// Singular values of `Ĝ` at or above `tol` (pinv) or `γ` (Tikhonov).
    pub collocation_rank: usize,
    /// Numerical rank of `A` above [`KRYLOV_RANK_FLOOR`].
    pub krylov_rank: usize,
    pub selection_flag: Option<SelectionFlag>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub variant: Variant,
    /// Projected into the parameter space (real part, clamped, for interval domains).
    pub locations: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    /// Threshold `tol` for pinv, `γ` for the regularized variants.
    pub gamma_or_tol: f64,
    pub diagnostics: Diagnostics,
}

/// Collocation system plus the SVD of `Ĝ`; shared by every recovery on the
/// same sample set.
#[derive(Debug, Clone)]
pub struct PreparedSystem {
    pub kernel: Kernel,
    pub samples: SampleSet,
    pub system: CollocationSystem,
    pub factors: SvdFactors,
    pub frobenius_norm: f64,
}

impl PreparedSystem {
    pub fn new(kernel: &Kernel, samples: &SampleSet, nodes: &CollocationNodes) -> Result<Self> {
        let system = build_collocation_system(kernel, samples, nodes)?;
        let factors = compute_svd(&system.g_hat)?;
        let frobenius_norm = system.g_hat.norm();
        Ok(Self {
            kernel: *kernel,
            samples: samples.clone(),
            system,
            factors,
            frobenius_norm,
        })
    }

    pub fn recover(
        &self,
        config: &MethodConfig,
        obs: &Observations,
    ) -> core::result::Result<RecoveryResult, RecoveryError> {
        config.validate().at(Stage::Config)?;
        let u = CVector::from_column_slice(&obs.noisy);
        if u.len() != self.system.n_samples() {
            return Err(Error::SizeMismatch {
                expected: self.system.n_samples(),
                found: u.len(),
            })
            .at(Stage::Config);
        }

        let (krylov, gamma_or_tol, collocation_rank, selection_flag) = match config.method {
            Method::OriginalPinv { tol_factor } => {
                let tol = tol_factor * self.frobenius_norm;
                let op = build_eigenmatrix_from(&self.system, &self.factors, tol)
                    .at(Stage::Eigenmatrix)?;
                let a = krylov_original(&op, &u, config.l).at(Stage::Krylov)?;
                (a, tol, op.retained_rank, None)
            }
            Method::RegularizedLCurve { grid_size } => {
                let choice = LCurve { grid_size }
                    .select(&self.factors, &u)
                    .at(Stage::ParameterSelection)?;
                self.regularized_krylov(config, &u, choice)?
            }
            Method::RegularizedFixedGamma { gamma } => {
                let choice = FixedGamma(gamma)
                    .select(&self.factors, &u)
                    .at(Stage::ParameterSelection)?;
                self.regularized_krylov(config, &u, choice)?
            }
        };

        let krylov_rank = compute_svd(&krylov.columns)
            .map(|f| f.rank_above(KRYLOV_RANK_FLOOR))
            .unwrap_or(0);
        let esprit = esprit_extract(&krylov, config.n_x).at(Stage::Esprit)?;
        let domain = self.kernel.domain;
        let locations: Vec<Complex64> =
            esprit.locations.iter().map(|&z| domain.project(z)).collect();
        let weights =
            recover_weights(&self.kernel, &self.samples, &locations, &u).at(Stage::Weights)?;
        Ok(RecoveryResult {
            variant: config.method.variant(),
            locations,
            weights,
            gamma_or_tol,
            diagnostics: Diagnostics {
                raw_locations: esprit.locations,
                cond_v_minus: esprit.cond_v_minus,
                svd_gap: esprit.svd_gap,
                ill_conditioned_shift: esprit.ill_conditioned_shift,
                collocation_rank,
                krylov_rank,
                selection_flag,
            },
        })
    }

    fn regularized_krylov(
        &self,
        config: &MethodConfig,
        u: &CVector,
        choice: crate::regularization::ParameterChoice,
    ) -> core::result::Result<(KrylovMatrix, f64, usize, Option<SelectionFlag>), RecoveryError> {
        let gamma = choice.solution.gamma;
        let a = krylov_regularized(&self.system, &choice.solution.v_gamma, u, config.l)
            .at(Stage::Krylov)?;
        let rank = self.factors.singular_values.iter().filter(|&&s| s >= gamma).count();
        Ok((a, gamma, rank, choice.flag))
    }
}

/// Runs the full pipeline for one observation vector.
pub fn recover(
    config: &MethodConfig,
    kernel: &Kernel,
    samples: &SampleSet,
    nodes: &CollocationNodes,
    obs: &Observations,
) -> core::result::Result<RecoveryResult, RecoveryError> {
    config.validate().at(Stage::Config)?;
    let prepared = PreparedSystem::new(kernel, samples, nodes).at(Stage::Collocation)?;
    prepared.recover(config, obs)
}
