//! Kernels, grids, observation synthesis and the noise model.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
// Shadowed by inherent methods whenever std is in the crate graph.
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::rng::{stream_rng, Stream};
use crate::{CMatrix, Error, Result};

/// The closed-form kernels `g(s, x)` supported by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `1/(s − x)` on the unit disk (rational approximation).
    Rational,
    /// `1/(s − x)` on a real interval (spectral function estimation).
    SpectralRational,
    /// `exp(iπ s x)`.
    Fourier,
    /// `x exp(−s x)`.
    Laplace,
    /// `1/(1 + 4(s − x)²)`.
    CauchySquared,
}

/// Parameter space `X` that the spike locations live in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParameterDomain {
    UnitDisk,
    Interval { lo: f64, hi: f64 },
}

impl ParameterDomain {
    pub fn is_real(&self) -> bool {
        matches!(self, ParameterDomain::Interval { .. })
    }

    /// Closed-set membership, with an absolute slack `eps`.
    pub fn contains(&self, z: Complex64, eps: f64) -> bool {
        match *self {
            ParameterDomain::UnitDisk => z.norm() <= 1.0 + eps,
            ParameterDomain::Interval { lo, hi } => {
                z.im.abs() <= eps && z.re >= lo - eps && z.re <= hi + eps
            }
        }
    }

    /// Maps a raw eigenvalue into `X`: real part clamped to the interval for
    /// real domains, identity for the disk.
    pub fn project(&self, z: Complex64) -> Complex64 {
        match *self {
            ParameterDomain::UnitDisk => z,
            ParameterDomain::Interval { lo, hi } => {
                let re = if z.re.is_nan() { z.re } else { z.re.clamp(lo, hi) };
                Complex64::new(re, 0.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub kind: KernelKind,
    pub domain: ParameterDomain,
}

impl Kernel {
    pub const fn new(kind: KernelKind, domain: ParameterDomain) -> Self {
        Self { kind, domain }
    }

    pub fn eval(&self, s: Complex64, x: Complex64) -> Result<Complex64> {
        eval_kernel(self, s, x)
    }
}

/// Evaluates `g(s, x)` for the kernel's kind.
pub fn eval_kernel(kernel: &Kernel, s: Complex64, x: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    match kernel.kind {
        KernelKind::Rational | KernelKind::SpectralRational => {
            let d = s - x;
            if d == Complex64::new(0.0, 0.0) {
                return Err(Error::Domain { s, x });
            }
            Ok(one / d)
        }
        KernelKind::Fourier => Ok((Complex64::new(0.0, PI) * s * x).exp()),
        KernelKind::Laplace => Ok(x * (-s * x).exp()),
        KernelKind::CauchySquared => {
            let d = s - x;
            let den = one + d * d * 4.0;
            if den == Complex64::new(0.0, 0.0) {
                return Err(Error::Domain { s, x });
            }
            Ok(one / den)
        }
    }
}

/// Ground-truth (or recovered) spike signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeSignal {
    locations: Vec<Complex64>,
    weights: Vec<Complex64>,
}

impl SpikeSignal {
    /// Fails unless both vectors are nonempty, equally long, and the
    /// locations are pairwise distinct.
    pub fn new(locations: Vec<Complex64>, weights: Vec<Complex64>) -> Result<Self> {
        if locations.is_empty() {
            return Err(Error::InvalidParameter("spike signal needs at least one spike"));
        }
        if locations.len() != weights.len() {
            return Err(Error::SizeMismatch {
                expected: locations.len(),
                found: weights.len(),
            });
        }
        for (i, a) in locations.iter().enumerate() {
            if locations[i + 1..].iter().any(|b| a == b) {
                return Err(Error::InvalidParameter("spike locations must be distinct"));
            }
        }
        Ok(Self { locations, weights })
    }

    /// Spikes at `locations` with unit weights.
    pub fn unit_weights(locations: Vec<Complex64>) -> Result<Self> {
        let weights = alloc::vec![Complex64::new(1.0, 0.0); locations.len()];
        Self::new(locations, weights)
    }

    pub fn locations(&self) -> &[Complex64] {
        &self.locations
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// Same locations, weights multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            locations: self.locations.clone(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }
}

/// Sampling locations `s_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub points: Vec<Complex64>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Collocation nodes `a_t` in the parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationNodes {
    pub nodes: Vec<Complex64>,
}

impl CollocationNodes {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `a_t = exp(2πi t / n)`, `t = 0, …, n − 1`.
pub fn uniform_circle_nodes(n_a: usize) -> CollocationNodes {
    assert!(n_a >= 1, "need at least one node");
    let nodes = (0..n_a)
        .map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / n_a as f64))
        .collect();
    CollocationNodes { nodes }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChebyshevKind {
    /// Roots of `T_n`; no endpoints.
    #[default]
    First,
    /// Extrema of `T_{n−1}`; includes both endpoints.
    Second,
}

/// First-kind Chebyshev points mapped onto `[lo, hi]`.
pub fn chebyshev_nodes(n_a: usize, lo: f64, hi: f64) -> CollocationNodes {
    chebyshev_nodes_of_kind(ChebyshevKind::First, n_a, lo, hi)
}

pub fn chebyshev_nodes_of_kind(
    kind: ChebyshevKind,
    n_a: usize,
    lo: f64,
    hi: f64,
) -> CollocationNodes {
    assert!(n_a >= 1, "need at least one node");
    assert!(lo < hi, "empty interval");
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let reference = |t: usize| -> f64 {
        match kind {
            ChebyshevKind::First => {
                ((2 * t + 1) as f64 * PI / (2 * n_a) as f64).cos()
            }
            ChebyshevKind::Second if n_a == 1 => 0.0,
            ChebyshevKind::Second => (t as f64 * PI / (n_a - 1) as f64).cos(),
        }
    };
    let nodes = (0..n_a)
        .map(|t| Complex64::new(mid + half * reference(t), 0.0))
        .collect();
    CollocationNodes { nodes }
}

/// How a preset draws its sample locations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleLaw {
    /// `r e^{iθ}` with `r ~ U[r_min, r_max]`, `θ ~ U[0, 2π)`.
    Annulus { count: usize, r_min: f64, r_max: f64 },
    /// Deterministic fermionic Matsubara points `±(2j − 1)πi/β`, `j = 1, …, half_count`.
    Matsubara { half_count: usize, beta: f64 },
    /// Real points `~ U[lo, hi]`.
    UniformInterval { count: usize, lo: f64, hi: f64 },
}

impl SampleLaw {
    pub fn count(&self) -> usize {
        match *self {
            SampleLaw::Annulus { count, .. } | SampleLaw::UniformInterval { count, .. } => count,
            SampleLaw::Matsubara { half_count, .. } => 2 * half_count,
        }
    }

    /// Draws the sample set. Only the random laws consume `seed`.
    pub fn generate(&self, seed: u64) -> SampleSet {
        let mut rng = stream_rng(seed, Stream::Samples);
        let points = match *self {
            SampleLaw::Annulus { count, r_min, r_max } => (0..count)
                .map(|_| {
                    let r = r_min + (r_max - r_min) * rng.random::<f64>();
                    let theta = 2.0 * PI * rng.random::<f64>();
                    Complex64::from_polar(r, theta)
                })
                .collect(),
            SampleLaw::Matsubara { half_count, beta } => {
                let positive = (1..=half_count)
                    .map(|j| Complex64::new(0.0, (2 * j - 1) as f64 * PI / beta));
                let negative = (1..=half_count)
                    .map(|j| Complex64::new(0.0, -((2 * j - 1) as f64) * PI / beta));
                positive.chain(negative).collect()
            }
            SampleLaw::UniformInterval { count, lo, hi } => (0..count)
                .map(|_| Complex64::new(lo + (hi - lo) * rng.random::<f64>(), 0.0))
                .collect(),
        };
        SampleSet { points }
    }
}

/// Exact observations `u_j = Σ_k w_k g(s_j, x_k)`.
pub fn synthesize(
    kernel: &Kernel,
    signal: &SpikeSignal,
    samples: &SampleSet,
) -> Result<Vec<Complex64>> {
    samples
        .points
        .iter()
        .map(|&s| {
            signal
                .locations()
                .iter()
                .zip(signal.weights())
                .try_fold(Complex64::new(0.0, 0.0), |acc, (&x, &w)| {
                    Ok(acc + w * kernel.eval(s, x)?)
                })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub exact: Vec<Complex64>,
    pub noisy: Vec<Complex64>,
    pub sigma: f64,
    pub seed: u64,
}

impl Observations {
    pub fn noise_free(exact: Vec<Complex64>) -> Self {
        Self {
            noisy: exact.clone(),
            exact,
            sigma: 0.0,
            seed: 0,
        }
    }
}

/// Multiplicative noise `ũ_j = u_j (1 + σ Z_j)` with real `Z_j ~ N(0, 1)`.
///
/// The `Z` draw depends only on `seed`, so the same seed at two noise levels
/// gives proportional perturbations.
pub fn add_noise(u: &[Complex64], sigma: f64, seed: u64) -> Result<Observations> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter("noise level must be finite and nonnegative"));
    }
    let mut rng = stream_rng(seed, Stream::Noise);
    let noisy = u
        .iter()
        .map(|&uj| {
            let z: f64 = rng.sample(StandardNormal);
            uj * (1.0 + sigma * z)
        })
        .collect();
    Ok(Observations {
        exact: u.to_vec(),
        noisy,
        sigma,
        seed,
    })
}

/// `G = [g(s_j, a_t)]`, its column-normalized form `Ĝ`, and `Λ = diag(a_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSystem {
    pub g: CMatrix,
    pub g_hat: CMatrix,
    pub column_norms: Vec<f64>,
    pub nodes: Vec<Complex64>,
}

impl CollocationSystem {
    pub fn n_samples(&self) -> usize {
        self.g_hat.nrows()
    }

    pub fn n_nodes(&self) -> usize {
        self.g_hat.ncols()
    }
}

pub fn build_collocation_system(
    kernel: &Kernel,
    samples: &SampleSet,
    nodes: &CollocationNodes,
) -> Result<CollocationSystem> {
    let (n_s, n_a) = (samples.len(), nodes.len());
    let mut g = CMatrix::zeros(n_s, n_a);
    for (t, &a) in nodes.nodes.iter().enumerate() {
        for (j, &s) in samples.points.iter().enumerate() {
            g[(j, t)] = kernel.eval(s, a)?;
        }
    }
    let mut g_hat = g.clone();
    let mut column_norms = Vec::with_capacity(n_a);
    for (t, mut col) in g_hat.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(Error::DegenerateColumn(t));
        }
        col.unscale_mut(norm);
        column_norms.push(norm);
    }
    Ok(CollocationSystem {
        g,
        g_hat,
        column_norms,
        nodes: nodes.nodes.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn kernel(kind: KernelKind) -> Kernel {
        Kernel::new(kind, ParameterDomain::Interval { lo: -1.0, hi: 1.0 })
    }

    #[test]
    fn kernel_values() {
        let k = Kernel::new(KernelKind::Rational, ParameterDomain::UnitDisk);
        assert_eq!(k.eval(c(2.0, 0.0), c(0.0, 0.0)).unwrap(), c(0.5, 0.0));
        assert_eq!(
            kernel(KernelKind::Fourier).eval(c(0.0, 0.0), c(0.5, 0.0)).unwrap(),
            c(1.0, 0.0)
        );
        assert_eq!(
            kernel(KernelKind::Laplace).eval(c(0.0, 0.0), c(2.0, 0.0)).unwrap(),
            c(2.0, 0.0)
        );
        assert_eq!(
            kernel(KernelKind::CauchySquared).eval(c(0.3, 0.0), c(0.3, 0.0)).unwrap(),
            c(1.0, 0.0)
        );
    }

    #[test]
    fn pole_is_a_domain_error() {
        for kind in [KernelKind::Rational, KernelKind::SpectralRational] {
            let err = kernel(kind).eval(c(0.2, 0.0), c(0.2, 0.0)).unwrap_err();
            assert!(matches!(err, Error::Domain { .. }));
        }
    }

    #[test]
    fn circle_nodes() {
        let n = uniform_circle_nodes(4).nodes;
        let expect = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (a, b) in n.iter().zip(expect) {
            assert!((a - b).norm() < 1e-15);
        }
        assert_eq!(uniform_circle_nodes(1).nodes, vec![c(1.0, 0.0)]);

        let n = uniform_circle_nodes(32).nodes;
        for w in n.windows(2) {
            assert!((w[0].norm() - 1.0).abs() < 1e-15);
            let gap = (w[1] / w[0]).arg();
            assert!((gap - PI / 16.0).abs() < 1e-14);
        }
    }

    #[test]
    fn chebyshev_points() {
        let n = chebyshev_nodes(1, -1.0, 1.0).nodes;
        assert!(n[0].norm() < 1e-16);
        let n = chebyshev_nodes(2, -1.0, 1.0).nodes;
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((n[0].re - h).abs() < 1e-15 && (n[1].re + h).abs() < 1e-15);

        let n = chebyshev_nodes(32, 0.1, 2.1).nodes;
        assert_eq!(n.len(), 32);
        assert!(n.iter().all(|a| a.re > 0.1 && a.re < 2.1 && a.im == 0.0));

        let n = chebyshev_nodes_of_kind(ChebyshevKind::Second, 5, 0.0, 1.0).nodes;
        assert!((n[0].re - 1.0).abs() < 1e-15 && n[4].re.abs() < 1e-15);
    }

    #[test]
    fn matsubara_points_are_deterministic() {
        let law = SampleLaw::Matsubara { half_count: 128, beta: 100.0 };
        let a = law.generate(1);
        assert_eq!(a, law.generate(2));
        assert_eq!(a.len(), 256);
        assert!((a.points[0] - c(0.0, PI / 100.0)).norm() < 1e-18);
        assert!((a.points[128] - c(0.0, -PI / 100.0)).norm() < 1e-18);
    }

    #[test]
    fn annulus_moduli() {
        let law = SampleLaw::Annulus { count: 40, r_min: 1.2, r_max: 2.2 };
        for seed in 0..20 {
            let s = law.generate(seed);
            assert_eq!(s.len(), 40);
            assert!(s.points.iter().all(|p| (1.2..=2.2).contains(&p.norm())));
        }
    }

    #[test]
    fn synthesis_of_trivial_signals() {
        let k = kernel(KernelKind::Fourier);
        let samples = SampleLaw::UniformInterval { count: 10, lo: -5.0, hi: 5.0 }.generate(3);
        let one = SpikeSignal::unit_weights(vec![c(0.4, 0.0)]).unwrap();
        let u = synthesize(&k, &one, &samples).unwrap();
        for (uj, s) in u.iter().zip(&samples.points) {
            assert_eq!(*uj, k.eval(*s, c(0.4, 0.0)).unwrap());
        }
        let zero = SpikeSignal::new(vec![c(0.4, 0.0), c(0.1, 0.0)], vec![c(0.0, 0.0); 2]).unwrap();
        assert!(synthesize(&k, &zero, &samples).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn spike_signal_validation() {
        assert!(SpikeSignal::unit_weights(vec![]).is_err());
        assert!(SpikeSignal::unit_weights(vec![c(0.1, 0.0), c(0.1, 0.0)]).is_err());
        assert!(matches!(
            SpikeSignal::new(vec![c(0.1, 0.0)], vec![]),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn noise_free_is_bit_exact() {
        let u = vec![c(1.5, -2.0), c(-0.0, 3.25), c(1e-300, 7.0)];
        let obs = add_noise(&u, 0.0, 99).unwrap();
        assert_eq!(obs.noisy, u);
        let a = add_noise(&u, 0.1, 5).unwrap();
        let b = add_noise(&u, 0.1, 5).unwrap();
        assert_eq!(a, b);
        assert!(add_noise(&u, -1.0, 5).is_err());
        assert!(add_noise(&u, f64::NAN, 5).is_err());
    }

    #[test]
    fn collocation_1x1() {
        let k = kernel(KernelKind::Fourier);
        let sys = build_collocation_system(
            &k,
            &SampleSet { points: vec![c(0.0, 0.0)] },
            &CollocationNodes { nodes: vec![c(0.3, 0.0)] },
        )
        .unwrap();
        assert_eq!(sys.g[(0, 0)], c(1.0, 0.0));
        assert_eq!(sys.g_hat[(0, 0)], c(1.0, 0.0));
    }

    #[test]
    fn collocation_errors() {
        let k = kernel(KernelKind::SpectralRational);
        let pole = build_collocation_system(
            &k,
            &SampleSet { points: vec![c(0.5, 0.0)] },
            &CollocationNodes { nodes: vec![c(0.5, 0.0)] },
        );
        assert!(matches!(pole, Err(Error::Domain { .. })));

        let k = kernel(KernelKind::Laplace);
        let zero = build_collocation_system(
            &k,
            &SampleSet { points: vec![c(1.0, 0.0), c(2.0, 0.0)] },
            &CollocationNodes { nodes: vec![c(0.0, 0.0), c(0.5, 0.0)] },
        );
        assert_eq!(zero, Err(Error::DegenerateColumn(0)));
    }

    #[test]
    fn projection() {
        let d = ParameterDomain::Interval { lo: 0.1, hi: 2.1 };
        assert_eq!(d.project(c(3.0, 0.2)), c(2.1, 0.0));
        assert_eq!(d.project(c(0.5, -0.2)), c(0.5, 0.0));
        assert_eq!(ParameterDomain::UnitDisk.project(c(0.5, -0.2)), c(0.5, -0.2));
    }
}
