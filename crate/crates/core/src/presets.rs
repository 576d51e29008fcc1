//! The five benchmark problems.
//!
//! | preset        | kernel              | X            | samples                          | n_s | n_a |
//! |---------------|---------------------|--------------|----------------------------------|-----|-----|
//! | rational      | `1/(s − x)`         | unit disk    | annulus `1.2 ≤ |s| ≤ 2.2`         | 40  | 32 (circle) |
//! | spectral      | `1/(s − x)`         | `[−1, 1]`    | Matsubara `±(2j − 1)πi/β`        | 256 | 32 (Chebyshev) |
//! | fourier       | `exp(iπ s x)`       | `[−1, 1]`    | uniform `[−5, 5]`                | 128 | 32 (Chebyshev) |
//! | laplace       | `x exp(−s x)`       | `[0.1, 2.1]` | uniform `[0, 10]`                | 100 | 32 (Chebyshev) |
//! | deconv        | `1/(1 + 4(s − x)²)` | `[−1, 1]`    | uniform `[−5, 5]`                | 128 | 32 (Chebyshev) |
//!
//! All truth weights are one. The random sample sets are drawn once per
//! preset from [`ExperimentPreset::sample_seed`]; sweeps vary only the noise.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::kernels::{
    chebyshev_nodes_of_kind, uniform_circle_nodes, ChebyshevKind, CollocationNodes, Kernel,
    KernelKind, ParameterDomain, SampleLaw, SampleSet, SpikeSignal,
};
use crate::{Error, Result};

/// Default inverse temperature for the Matsubara grid.
pub const DEFAULT_BETA: f64 = 40.0;
/// Seed of the fixed sample set each preset uses.
pub const DEFAULT_SAMPLE_SEED: u64 = 2024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PresetId {
    Rational,
    Spectral,
    Fourier,
    Laplace,
    Deconvolution,
}

impl PresetId {
    pub const ALL: [PresetId; 5] = [
        PresetId::Rational,
        PresetId::Spectral,
        PresetId::Fourier,
        PresetId::Laplace,
        PresetId::Deconvolution,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            PresetId::Rational => "rational",
            PresetId::Spectral => "spectral",
            PresetId::Fourier => "fourier",
            PresetId::Laplace => "laplace",
            PresetId::Deconvolution => "deconv",
        }
    }
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// How the collocation nodes are laid out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeLaw {
    UnitCircle,
    Chebyshev { kind: ChebyshevKind, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub id: PresetId,
    pub kernel: Kernel,
    pub truth: SpikeSignal,
    pub n_a: usize,
    pub sample_law: SampleLaw,
    pub node_law: NodeLaw,
    pub sigma_list: Vec<f64>,
    pub sample_seed: u64,
}

impl ExperimentPreset {
    pub fn n_s(&self) -> usize {
        self.sample_law.count()
    }

    pub fn n_x(&self) -> usize {
        self.truth.len()
    }

    /// Inverse temperature, for the spectral preset.
    pub fn beta(&self) -> Option<f64> {
        match self.sample_law {
            SampleLaw::Matsubara { beta, .. } => Some(beta),
            _ => None,
        }
    }

    pub fn set_beta(&mut self, new_beta: f64) {
        if let SampleLaw::Matsubara { beta, .. } = &mut self.sample_law {
            *beta = new_beta;
        }
    }

    /// Changes the sample count; the Matsubara grid needs an even count.
    pub fn set_n_s(&mut self, n_s: usize) {
        match &mut self.sample_law {
            SampleLaw::Annulus { count, .. } | SampleLaw::UniformInterval { count, .. } => {
                *count = n_s
            }
            SampleLaw::Matsubara { half_count, .. } => *half_count = n_s / 2,
        }
    }

    pub fn samples(&self) -> SampleSet {
        self.sample_law.generate(self.sample_seed)
    }

    pub fn nodes(&self) -> CollocationNodes {
        match self.node_law {
            NodeLaw::UnitCircle => uniform_circle_nodes(self.n_a),
            NodeLaw::Chebyshev { kind, lo, hi } => chebyshev_nodes_of_kind(kind, self.n_a, lo, hi),
        }
    }
}

fn real(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

fn interval_preset(
    id: PresetId,
    kind: KernelKind,
    (lo, hi): (f64, f64),
    truth: &[f64],
    sample_law: SampleLaw,
    sigma_list: Vec<f64>,
) -> ExperimentPreset {
    ExperimentPreset {
        id,
        kernel: Kernel::new(kind, ParameterDomain::Interval { lo, hi }),
        truth: SpikeSignal::unit_weights(real(truth)).expect("preset spikes are distinct"),
        n_a: 32,
        sample_law,
        node_law: NodeLaw::Chebyshev {
            kind: ChebyshevKind::First,
            lo,
            hi,
        },
        sigma_list,
        sample_seed: DEFAULT_SAMPLE_SEED,
    }
}

pub fn load_preset(id: PresetId) -> ExperimentPreset {
    let default_sigmas = vec![1e-1, 1e-2, 1e-3];
    match id {
        PresetId::Rational => {
            let truth = [0.2, 0.5, 0.8, 1.0]
                .iter()
                .map(|&f| Complex64::from_polar(0.9, 2.0 * PI * f))
                .collect();
            ExperimentPreset {
                id,
                kernel: Kernel::new(KernelKind::Rational, ParameterDomain::UnitDisk),
                truth: SpikeSignal::unit_weights(truth).expect("preset spikes are distinct"),
                n_a: 32,
                sample_law: SampleLaw::Annulus {
                    count: 40,
                    r_min: 1.2,
                    r_max: 2.2,
                },
                node_law: NodeLaw::UnitCircle,
                sigma_list: default_sigmas,
                sample_seed: DEFAULT_SAMPLE_SEED,
            }
        }
        PresetId::Spectral => interval_preset(
            id,
            KernelKind::SpectralRational,
            (-1.0, 1.0),
            &[-0.9, -0.2, 0.2, 0.9],
            SampleLaw::Matsubara {
                half_count: 128,
                beta: DEFAULT_BETA,
            },
            default_sigmas,
        ),
        PresetId::Fourier => interval_preset(
            id,
            KernelKind::Fourier,
            (-1.0, 1.0),
            &[-0.9, 0.0, 0.5, 0.9],
            SampleLaw::UniformInterval {
                count: 128,
                lo: -5.0,
                hi: 5.0,
            },
            default_sigmas,
        ),
        PresetId::Laplace => interval_preset(
            id,
            KernelKind::Laplace,
            (0.1, 2.1),
            &[0.2, 1.1, 1.6, 2.0],
            SampleLaw::UniformInterval {
                count: 100,
                lo: 0.0,
                hi: 10.0,
            },
            vec![5e-2, 5e-3, 5e-4],
        ),
        PresetId::Deconvolution => interval_preset(
            id,
            KernelKind::CauchySquared,
            (-1.0, 1.0),
            &[-0.9, 0.0, 0.5, 0.9],
            SampleLaw::UniformInterval {
                count: 128,
                lo: -5.0,
                hi: 5.0,
            },
            default_sigmas,
        ),
    }
}

/// Sample set of a preset's default law drawn with `rng_seed`.
pub fn generate_samples(preset: PresetId, rng_seed: u64) -> SampleSet {
    load_preset(preset).sample_law.generate(rng_seed)
}
