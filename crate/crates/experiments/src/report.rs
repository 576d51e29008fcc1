//! CSV, JSON and plot-data reports.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use eigenmatrix_core::presets::{load_preset, PresetId};
use eigenmatrix_core::rng::GENERATOR_NAME;

use crate::error::{ExperimentError, Result};
use crate::record::{format_float, RunRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Json,
    PlotData,
}

impl Format {
    pub const fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::PlotData => "plotdata",
        }
    }
}

impl FromStr for Format {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self> {
        [Format::Csv, Format::Json, Format::PlotData]
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown format {s:?}")))
    }
}

pub const CSV_FILE: &str = "records.csv";
pub const JSON_FILE: &str = "records.json";
pub const PLOT_DIR: &str = "plotdata";

/// Writes the report under `dir` and returns the files written.
pub fn emit_report(records: &[RunRecord], format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(ExperimentError::Config("no records to report".into()));
    }
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    match format {
        Format::Csv => {
            let path = dir.join(CSV_FILE);
            let mut buf = Vec::new();
            write_csv(records, &mut buf)?;
            write_file(&path, &buf)?;
            Ok(vec![path])
        }
        Format::Json => {
            let path = dir.join(JSON_FILE);
            let mut text = serde_json::to_string_pretty(records)?;
            text.push('\n');
            write_file(&path, text.as_bytes())?;
            Ok(vec![path])
        }
        Format::PlotData => write_plot_data(records, &dir.join(PLOT_DIR)),
    }
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RunRecord::csv_header())?;
    for r in records {
        w.write_record(r.to_csv_fields())?;
    }
    w.flush().map_err(|e| ExperimentError::io("<csv>", e))?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(RunRecord::csv_header()) {
        return Err(ExperimentError::Parse("unexpected CSV header".into()));
    }
    reader
        .records()
        .map(|row| {
            let row = row?;
            RunRecord::from_csv_fields(&row.iter().collect::<Vec<_>>())
        })
        .collect()
}

pub fn read_json(text: &str) -> Result<Vec<RunRecord>> {
    Ok(serde_json::from_str(text)?)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| ExperimentError::io(path, e))
}

/// File stem for one `(method, σ)` series.
pub fn series_stem(method: &str, sigma: f64) -> String {
    format!("{method}_sigma{}", format_float(sigma))
}

/// Per preset: `truth.dat`, one `<method>_sigma<σ>.dat` per series with a
/// gnuplot index block per seed, and a `plot.gp` script.
fn write_plot_data(records: &[RunRecord], root: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut presets: Vec<&str> = Vec::new();
    for r in records {
        if !presets.contains(&r.preset.as_str()) {
            presets.push(&r.preset);
        }
    }
    for name in presets {
        let id: PresetId = name.parse()?;
        let dir = root.join(name);
        fs::create_dir_all(&dir).map_err(|e| ExperimentError::io(&dir, e))?;

        let truth = load_preset(id).truth;
        let mut text = format!("# {name} truth spikes\n# re im weight_re weight_im\n");
        for (x, w) in truth.locations().iter().zip(truth.weights()) {
            let _ = writeln!(text, "{:?} {:?} {:?} {:?}", x.re, x.im, w.re, w.im);
        }
        let path = dir.join("truth.dat");
        write_file(&path, text.as_bytes())?;
        written.push(path);

        let mut series: Vec<(String, f64)> = Vec::new();
        for r in records.iter().filter(|r| r.preset == name) {
            if !series.iter().any(|(m, s)| *m == r.method && *s == r.sigma) {
                series.push((r.method.clone(), r.sigma));
            }
        }
        let mut script = format!(
            "# gnuplot script for {name}; noise generator {GENERATOR_NAME}\nset key outside\n"
        );
        for (method, sigma) in &series {
            let stem = series_stem(method, *sigma);
            let mut text = format!(
                "# {name} {method} sigma={}\n# re im weight_re weight_im; one index block per seed\n",
                format_float(*sigma)
            );
            let mut first = true;
            for r in records
                .iter()
                .filter(|r| r.preset == name && r.method == *method && r.sigma == *sigma)
            {
                if !first {
                    text.push_str("\n\n");
                }
                first = false;
                let _ = writeln!(text, "# seed {}", r.seed);
                if let Some(f) = &r.failure {
                    let _ = writeln!(text, "# failed: {f}");
                }
                for (x, w) in r.locations.iter().zip(&r.weights) {
                    let _ = writeln!(text, "{:?} {:?} {:?} {:?}", x.re, x.im, w.re, w.im);
                }
            }
            let path = dir.join(format!("{stem}.dat"));
            write_file(&path, text.as_bytes())?;
            written.push(path);
            let _ = writeln!(
                script,
                "set title '{name} {method} sigma={}'\nplot '{stem}.dat' using 1:2 title 'recovered', \
                 'truth.dat' using 1:2 with points pt 7 title 'truth'\npause -1",
                format_float(*sigma)
            );
        }
        let path = dir.join("plot.gp");
        write_file(&path, script.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
