//! Noise sweeps over seeds with shared noise per `(σ, seed)` cell.

use std::time::Instant;

use eigenmatrix_core::eigenmatrix::{MethodConfig, PreparedSystem, RecoveryError, RecoveryResult};
use eigenmatrix_core::kernels::{add_noise, synthesize, Observations};
use eigenmatrix_core::metrics::match_and_error;
use eigenmatrix_core::presets::ExperimentPreset;
use eigenmatrix_core::regularization::SelectionFlag;
use rayon::prelude::*;

use crate::error::{ExperimentError, Result};
use crate::record::{digest, RunRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepOptions {
    /// Record per-run wall time. Off by default because it breaks byte-identical output.
    pub timing: bool,
}

pub fn run_sweep(
    preset: &ExperimentPreset,
    methods: &[MethodConfig],
    seeds: &[u64],
) -> Result<Vec<RunRecord>> {
    run_sweep_with(preset, methods, seeds, SweepOptions::default())
}

/// One record per `(σ, seed, method)`, sorted by `(σ, seed, method order)`.
pub fn run_sweep_with(
    preset: &ExperimentPreset,
    methods: &[MethodConfig],
    seeds: &[u64],
    options: SweepOptions,
) -> Result<Vec<RunRecord>> {
    if methods.is_empty() {
        return Err(ExperimentError::Config("no methods to run".into()));
    }
    if seeds.is_empty() {
        return Err(ExperimentError::Config("no seeds to run".into()));
    }
    if preset.sigma_list.iter().any(|s| !(*s >= 0.0)) {
        return Err(ExperimentError::Config("noise levels must be nonnegative".into()));
    }
    let samples = preset.samples();
    let prepared = PreparedSystem::new(&preset.kernel, &samples, &preset.nodes())?;
    let exact = synthesize(&preset.kernel, &preset.truth, &samples)?;

    let cells: Vec<(usize, f64, u64)> = preset
        .sigma_list
        .iter()
        .enumerate()
        .flat_map(|(i, &sigma)| seeds.iter().map(move |&seed| (i, sigma, seed)))
        .collect();

    let mut keyed: Vec<((f64, u64, usize), RunRecord)> = cells
        .par_iter()
        .map(|&(_, sigma, seed)| {
            let obs = add_noise(&exact, sigma, seed)?;
            Ok(methods
                .iter()
                .enumerate()
                .map(|(m, config)| {
                    let record = run_one(preset, &prepared, config, &obs, options);
                    ((sigma, seed, m), record)
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    keyed.sort_by(|(a, _), (b, _)| {
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    Ok(keyed.into_iter().map(|(_, r)| r).collect())
}

/// Runs one method on one observation draw; failures become part of the record.
pub fn run_one(
    preset: &ExperimentPreset,
    prepared: &PreparedSystem,
    config: &MethodConfig,
    obs: &Observations,
    options: SweepOptions,
) -> RunRecord {
    let start = Instant::now();
    let outcome = prepared.recover(config, obs);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let mut record = RunRecord {
        preset: preset.id.name().to_string(),
        method: config.method.variant().name().to_string(),
        sigma: obs.sigma,
        seed: obs.seed,
        location_error: None,
        weight_error: None,
        gamma_or_tol: None,
        cond_v_minus: None,
        svd_gap: None,
        wall_time_ms: options.timing.then_some(elapsed),
        l: config.l,
        selection_flag: None,
        ill_conditioned_shift: false,
        collocation_rank: None,
        krylov_rank: None,
        input_digest: digest(&obs.noisy),
        locations: Vec::new(),
        weights: Vec::new(),
        raw_locations: Vec::new(),
        truth_matching: Vec::new(),
        failure: None,
    };
    match outcome.map(|r| fill(&mut record, preset, r)) {
        Ok(Ok(())) => {}
        Ok(Err(e)) => record.failure = Some(format!("metrics: {e}")),
        Err(RecoveryError { stage, source }) => {
            record.failure = Some(format!("{stage}: {source}"));
        }
    }
    record
}

fn fill(
    record: &mut RunRecord,
    preset: &ExperimentPreset,
    result: RecoveryResult,
) -> eigenmatrix_core::Result<()> {
    let pair = match_and_error(&preset.truth, &result)?;
    let d = &result.diagnostics;
    record.location_error = Some(pair.location_error);
    record.weight_error = Some(pair.weight_error);
    record.gamma_or_tol = Some(result.gamma_or_tol);
    record.cond_v_minus = Some(d.cond_v_minus);
    record.svd_gap = Some(d.svd_gap);
    record.selection_flag = d.selection_flag.map(|f| flag_name(f).to_string());
    record.ill_conditioned_shift = d.ill_conditioned_shift;
    record.collocation_rank = Some(d.collocation_rank);
    record.krylov_rank = Some(d.krylov_rank);
    record.raw_locations = d.raw_locations.clone();
    record.truth_matching = pair.matching;
    record.locations = result.locations;
    record.weights = result.weights;
    Ok(())
}

pub fn flag_name(flag: SelectionFlag) -> &'static str {
    match flag {
        SelectionFlag::FlatCurve => "flat-curve",
        SelectionFlag::ZeroRhs => "zero-rhs",
    }
}

/// Median and quartiles of one `(preset, method, σ)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub preset: String,
    pub method: String,
    pub sigma: f64,
    pub runs: usize,
    pub failures: usize,
    pub flagged: usize,
    pub location_median: f64,
    pub location_q1: f64,
    pub location_q3: f64,
    pub weight_median: f64,
}

/// Groups records in first-appearance order. Failed runs count as infinite error.
pub fn summarize(records: &[RunRecord]) -> Vec<Summary> {
    let mut keys: Vec<(String, String, f64)> = Vec::new();
    for r in records {
        let key = (r.preset.clone(), r.method.clone(), r.sigma);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(preset, method, sigma)| {
            let group: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.preset == preset && r.method == method && r.sigma == sigma)
                .collect();
            let loc: Vec<f64> = group
                .iter()
                .map(|r| r.location_error.unwrap_or(f64::INFINITY))
                .collect();
            let wt: Vec<f64> = group
                .iter()
                .map(|r| r.weight_error.unwrap_or(f64::INFINITY))
                .collect();
            Summary {
                runs: group.len(),
                failures: group.iter().filter(|r| r.failed()).count(),
                flagged: group.iter().filter(|r| r.selection_flag.is_some()).count(),
                location_median: quantile(&loc, 0.5),
                location_q1: quantile(&loc, 0.25),
                location_q3: quantile(&loc, 0.75),
                weight_median: quantile(&wt, 0.5),
                preset,
                method,
                sigma,
            }
        })
        .collect()
}

/// Linear-interpolation quantile; NaN for an empty slice.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    if lo == hi || v[lo] == v[hi] {
        v[lo]
    } else {
        v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.25), 2.0);
        assert_eq!(quantile(&[1.0, f64::INFINITY], 0.0), 1.0);
        assert!(quantile(&[], 0.5).is_nan());
    }
}
