//! TOML overrides for presets and methods.
//!
//! ```toml
//! sigma_list = [0.1, 0.01]
//! l = 8
//! tol_factor = 1e-8
//!
//! [preset.spectral]
//! beta = 30.0
//! ```
//!
//! Top-level keys apply to every preset; a `[preset.<name>]` table applies on
//! top for that preset; command-line flags apply last.

use std::collections::BTreeMap;
use std::path::Path;

use eigenmatrix_core::eigenmatrix::{default_krylov_depth, Method, MethodConfig, Variant};
use eigenmatrix_core::presets::{ExperimentPreset, PresetId};
use eigenmatrix_core::regularization::DEFAULT_LCURVE_GRID;
use serde::Deserialize;

use crate::error::{ExperimentError, Result};

pub const DEFAULT_SEED_COUNT: usize = 20;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub n_s: Option<usize>,
    pub n_a: Option<usize>,
    pub beta: Option<f64>,
    pub sigma_list: Option<Vec<f64>>,
    pub sample_seed: Option<u64>,
    pub l: Option<usize>,
    pub tol_factor: Option<f64>,
    pub gamma: Option<f64>,
    pub grid_size: Option<usize>,
    /// Seeds `0..seeds`.
    pub seeds: Option<usize>,
    pub seed_list: Option<Vec<u64>>,
}

impl Overrides {
    /// Fields set in `higher` win.
    pub fn merged_with(&self, higher: &Overrides) -> Overrides {
        macro_rules! pick {
            ($($f:ident),*) => { Overrides { $($f: higher.$f.clone().or_else(|| self.$f.clone())),* } };
        }
        let mut out = pick!(
            n_s, n_a, beta, sigma_list, sample_seed, l, tol_factor, gamma, grid_size, seeds,
            seed_list
        );
        // A seed count in the higher layer replaces an inherited explicit list, and vice versa.
        if higher.seeds.is_some() && higher.seed_list.is_none() {
            out.seed_list = None;
        }
        if higher.seed_list.is_some() && higher.seeds.is_none() {
            out.seeds = None;
        }
        out
    }

    pub fn apply_to_preset(&self, preset: &mut ExperimentPreset) -> Result<()> {
        if let Some(n_s) = self.n_s {
            if n_s == 0 {
                return Err(ExperimentError::Config("n_s must be positive".into()));
            }
            preset.set_n_s(n_s);
        }
        if let Some(n_a) = self.n_a {
            if n_a == 0 {
                return Err(ExperimentError::Config("n_a must be positive".into()));
            }
            preset.n_a = n_a;
        }
        if let Some(beta) = self.beta {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(ExperimentError::Config("beta must be positive".into()));
            }
            preset.set_beta(beta);
        }
        if let Some(sigmas) = &self.sigma_list {
            if sigmas.is_empty() || sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
                return Err(ExperimentError::Config(
                    "sigma_list must be nonempty and nonnegative".into(),
                ));
            }
            preset.sigma_list = sigmas.clone();
        }
        if let Some(seed) = self.sample_seed {
            preset.sample_seed = seed;
        }
        Ok(())
    }

    pub fn method_config(&self, variant: Variant, n_x: usize) -> Result<MethodConfig> {
        let method = match variant {
            Variant::OriginalPinv => Method::OriginalPinv {
                tol_factor: self.tol_factor.unwrap_or(eigenmatrix_core::eigenmatrix::DEFAULT_TOL_FACTOR),
            },
            Variant::RegularizedLCurve => Method::RegularizedLCurve {
                grid_size: self.grid_size.unwrap_or(DEFAULT_LCURVE_GRID),
            },
            Variant::RegularizedFixedGamma => Method::RegularizedFixedGamma {
                gamma: self.gamma.ok_or_else(|| {
                    ExperimentError::Config("fixed-gamma needs a gamma value".into())
                })?,
            },
        };
        let config = MethodConfig::new(method, n_x).with_l(self.l.unwrap_or(default_krylov_depth(n_x)));
        config
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        if let Method::RegularizedLCurve { grid_size } = method {
            if grid_size < 16 {
                return Err(ExperimentError::Config("grid_size must be at least 16".into()));
            }
        }
        Ok(config)
    }

    pub fn seeds(&self) -> Vec<u64> {
        match (&self.seed_list, self.seeds) {
            (Some(list), _) => list.clone(),
            (None, Some(n)) => (0..n as u64).collect(),
            (None, None) => (0..DEFAULT_SEED_COUNT as u64).collect(),
        }
    }
}

/// Parsed config file: global overrides plus per-preset tables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub global: Overrides,
    pub presets: BTreeMap<PresetId, Overrides>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| ExperimentError::Config(e.to_string()))?;
        let mut presets = BTreeMap::new();
        if let Some(section) = table.remove("preset") {
            let section = match section {
                toml::Value::Table(t) => t,
                _ => return Err(ExperimentError::Config("`preset` must be a table".into())),
            };
            for (name, value) in section {
                let id: PresetId = name.parse()?;
                let o: Overrides = value
                    .try_into()
                    .map_err(|e: toml::de::Error| ExperimentError::Config(format!("[preset.{name}]: {e}")))?;
                presets.insert(id, o);
            }
        }
        let global: Overrides = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ExperimentError::Config(e.to_string()))?;
        Ok(Self { global, presets })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        Self::parse(&text)
    }

    /// Global, then preset table, then `cli`.
    pub fn resolve(&self, id: PresetId, cli: &Overrides) -> Overrides {
        let preset = self.presets.get(&id).cloned().unwrap_or_default();
        self.global.merged_with(&preset).merged_with(cli)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use eigenmatrix_core::presets::load_preset;

    #[test]
    fn layered_overrides() {
        let file = ConfigFile::parse(
            "sigma_list = [0.5]\nl = 8\nseeds = 3\n[preset.spectral]\nbeta = 30.0\nl = 9\n",
        )
        .unwrap();
        let cli = Overrides {
            l: Some(11),
            ..Overrides::default()
        };
        let spectral = file.resolve(PresetId::Spectral, &cli);
        assert_eq!((spectral.l, spectral.beta), (Some(11), Some(30.0)));
        let fourier = file.resolve(PresetId::Fourier, &Overrides::default());
        assert_eq!((fourier.l, fourier.beta), (Some(8), None));
        assert_eq!(fourier.seeds(), vec![0, 1, 2]);

        let mut p = load_preset(PresetId::Spectral);
        spectral.apply_to_preset(&mut p).unwrap();
        assert_eq!((p.beta(), p.sigma_list.clone()), (Some(30.0), vec![0.5]));
        assert_eq!(spectral.method_config(Variant::RegularizedLCurve, 4).unwrap().l, 11);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ConfigFile::parse("bogus = 1").is_err());
        assert!(ConfigFile::parse("[preset.poisson]\nl = 3").is_err());
        let o = Overrides {
            sigma_list: Some(vec![-1.0]),
            ..Overrides::default()
        };
        assert!(o.apply_to_preset(&mut load_preset(PresetId::Fourier)).is_err());
        assert!(Overrides::default().method_config(Variant::RegularizedFixedGamma, 4).is_err());
        let shallow = Overrides {
            l: Some(4),
            ..Overrides::default()
        };
        assert!(shallow.method_config(Variant::OriginalPinv, 4).is_err());
    }

    #[test]
    fn seed_sources() {
        assert_eq!(Overrides::default().seeds().len(), DEFAULT_SEED_COUNT);
        let base = Overrides {
            seed_list: Some(vec![7, 9]),
            ..Overrides::default()
        };
        assert_eq!(base.seeds(), vec![7, 9]);
        let count = Overrides {
            seeds: Some(2),
            ..Overrides::default()
        };
        assert_eq!(base.merged_with(&count).seeds(), vec![0, 1]);
    }
}
