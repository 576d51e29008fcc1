//! The `recover` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use eigenmatrix_core::eigenmatrix::Variant;
use eigenmatrix_core::presets::{load_preset, PresetId};
use eigenmatrix_core::rng::GENERATOR_NAME;

use crate::config::{ConfigFile, Overrides};
use crate::error::{ExperimentError, Result};
use crate::record::{format_float, RunRecord};
use crate::report::{emit_report, Format};
use crate::sweep::{run_sweep_with, summarize, SweepOptions};

/// Exit status when every run succeeded.
pub const EXIT_OK: i32 = 0;
/// Exit status for usage, configuration and IO errors.
pub const EXIT_USAGE: i32 = 1;
/// Exit status when the sweep completed but at least one run failed.
pub const EXIT_RUN_FAILED: i32 = 2;

/// Eigenmatrix sparse recovery over benchmark presets and noise levels.
#[derive(Debug, Parser)]
#[command(name = "recover", version)]
pub struct Args {
    /// Preset to run (rational, spectral, fourier, laplace, deconv or all). Repeatable.
    #[arg(long = "preset", required = true)]
    pub presets: Vec<String>,
    /// Method (pinv, lcurve, fixed-gamma). Repeatable; defaults to pinv and lcurve.
    #[arg(long = "method")]
    pub methods: Vec<String>,
    /// Noise level replacing the preset list. Repeatable.
    #[arg(long = "sigma")]
    pub sigmas: Vec<f64>,
    /// Run seeds 0..N.
    #[arg(long, conflicts_with_all = ["seed_list", "single_seed"])]
    pub seeds: Option<usize>,
    /// Comma-separated noise seeds.
    #[arg(long, value_delimiter = ',', conflicts_with = "single_seed")]
    pub seed_list: Option<Vec<u64>>,
    /// Run a single noise seed.
    #[arg(long)]
    pub single_seed: Option<u64>,
    /// Krylov depth; the Krylov matrix has l + 1 columns.
    #[arg(long)]
    pub l: Option<usize>,
    /// Pseudo-inverse threshold relative to the Frobenius norm.
    #[arg(long)]
    pub tol_factor: Option<f64>,
    /// Tikhonov parameter for fixed-gamma.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Spectral preset decay rate.
    #[arg(long)]
    pub beta: Option<f64>,
    /// L-curve grid size.
    #[arg(long)]
    pub grid_size: Option<usize>,
    /// Seed for the sample locations.
    #[arg(long)]
    pub sample_seed: Option<u64>,
    /// TOML file with preset and method overrides.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Output format (csv, json, plotdata).
    #[arg(long, default_value = "csv")]
    pub format: String,
    /// Record wall time per run. The output is then no longer reproducible.
    #[arg(long)]
    pub timing: bool,
}

impl Args {
    fn overrides(&self) -> Overrides {
        Overrides {
            beta: self.beta,
            sigma_list: (!self.sigmas.is_empty()).then(|| self.sigmas.clone()),
            sample_seed: self.sample_seed,
            l: self.l,
            tol_factor: self.tol_factor,
            gamma: self.gamma,
            grid_size: self.grid_size,
            seeds: self.seeds,
            seed_list: self
                .seed_list
                .clone()
                .or_else(|| self.single_seed.map(|s| vec![s])),
            ..Overrides::default()
        }
    }

    fn preset_ids(&self) -> Result<Vec<PresetId>> {
        let mut ids = Vec::new();
        for name in &self.presets {
            let batch = if name == "all" {
                PresetId::ALL.to_vec()
            } else {
                vec![name.parse()?]
            };
            for id in batch {
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
        }
        Ok(ids)
    }

    fn variants(&self) -> Result<Vec<Variant>> {
        if self.methods.is_empty() {
            return Ok(vec![Variant::OriginalPinv, Variant::RegularizedLCurve]);
        }
        let mut out = Vec::new();
        for name in &self.methods {
            let v = Variant::from_name(name)
                .ok_or_else(|| ExperimentError::Config(format!("unknown method {name:?}")))?;
            if !out.contains(&v) {
                out.push(v);
            }
        }
        Ok(out)
    }
}

/// Runs the command and returns the process exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    match execute(&args, stdout) {
        Ok(records) if records.iter().any(RunRecord::failed) => EXIT_RUN_FAILED,
        Ok(_) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Runs every requested preset and writes the report. Returns all records.
pub fn execute(args: &Args, stdout: &mut dyn Write) -> Result<Vec<RunRecord>> {
    let format: Format = args.format.parse()?;
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let cli = args.overrides();
    let ids = args.preset_ids()?;
    let variants = args.variants()?;

    let mut records = Vec::new();
    for id in ids {
        let o = file.resolve(id, &cli);
        let mut preset = load_preset(id);
        o.apply_to_preset(&mut preset)?;
        let configs = variants
            .iter()
            .map(|&v| o.method_config(v, preset.n_x()))
            .collect::<Result<Vec<_>>>()?;
        let seeds = o.seeds();
        if seeds.is_empty() {
            return Err(ExperimentError::Config("no seeds to run".into()));
        }
        records.extend(run_sweep_with(
            &preset,
            &configs,
            &seeds,
            SweepOptions {
                timing: args.timing,
            },
        )?);
    }
    let written = emit_report(&records, format, &args.out)?;
    print_summary(&records, stdout).map_err(|e| ExperimentError::io("<stdout>", e))?;
    for path in written {
        writeln!(stdout, "wrote {}", path.display()).map_err(|e| ExperimentError::io("<stdout>", e))?;
    }
    Ok(records)
}

fn print_summary(records: &[RunRecord], out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "noise generator: {GENERATOR_NAME}")?;
    writeln!(
        out,
        "{:<8} {:<12} {:>10} {:>5} {:>5} {:>5} {:>12} {:>12} {:>12} {:>12}",
        "preset", "method", "sigma", "runs", "fail", "flag", "loc_median", "loc_q1", "loc_q3", "wt_median"
    )?;
    for s in summarize(records) {
        writeln!(
            out,
            "{:<8} {:<12} {:>10} {:>5} {:>5} {:>5} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            s.preset,
            s.method,
            format_float(s.sigma),
            s.runs,
            s.failures,
            s.flagged,
            s.location_median,
            s.location_q1,
            s.location_q3,
            s.weight_median
        )?;
    }
    Ok(())
}
