//! One row of a sweep and its lossless text encodings.
//!
//! Floats are written in shortest round-trip form (`{:?}`), so `inf`, `NaN`
//! and subnormals survive. Complex numbers are written as `re+imi`.

use eigenmatrix_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, Result};

/// The ten leading CSV columns, in order.
pub const CSV_COLUMNS: [&str; 10] = [
    "preset",
    "method",
    "sigma",
    "seed",
    "location_error",
    "weight_error",
    "gamma_or_tol",
    "condV_minus",
    "svd_gap",
    "wall_time_ms",
];

/// Columns appended after [`CSV_COLUMNS`].
pub const CSV_EXTRA_COLUMNS: [&str; 11] = [
    "l",
    "selection_flag",
    "ill_conditioned_shift",
    "collocation_rank",
    "krylov_rank",
    "input_digest",
    "locations",
    "weights",
    "raw_locations",
    "truth_matching",
    "failure",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub preset: String,
    pub method: String,
    pub sigma: f64,
    pub seed: u64,
    #[serde(with = "opt_float")]
    pub location_error: Option<f64>,
    #[serde(with = "opt_float")]
    pub weight_error: Option<f64>,
    #[serde(with = "opt_float")]
    pub gamma_or_tol: Option<f64>,
    #[serde(with = "opt_float")]
    pub cond_v_minus: Option<f64>,
    #[serde(with = "opt_float")]
    pub svd_gap: Option<f64>,
    /// Only filled when timing is requested, so default output stays reproducible.
    #[serde(with = "opt_float")]
    pub wall_time_ms: Option<f64>,
    pub l: usize,
    pub selection_flag: Option<String>,
    pub ill_conditioned_shift: bool,
    pub collocation_rank: Option<usize>,
    pub krylov_rank: Option<usize>,
    /// FNV-1a digest of the noisy observation bits this run consumed.
    pub input_digest: String,
    #[serde(with = "complex_list")]
    pub locations: Vec<Complex64>,
    #[serde(with = "complex_list")]
    pub weights: Vec<Complex64>,
    #[serde(with = "complex_list")]
    pub raw_locations: Vec<Complex64>,
    /// `truth_matching[k]` is the recovered spike matched to truth spike `k`.
    pub truth_matching: Vec<usize>,
    /// `"<stage>: <message>"` when the pipeline failed.
    pub failure: Option<String>,
}

impl RunRecord {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    pub fn csv_header() -> Vec<&'static str> {
        CSV_COLUMNS.iter().chain(CSV_EXTRA_COLUMNS.iter()).copied().collect()
    }

    pub fn to_csv_fields(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        let opt_usize = |v: Option<usize>| v.map(|n| n.to_string()).unwrap_or_default();
        vec![
            self.preset.clone(),
            self.method.clone(),
            format_float(self.sigma),
            self.seed.to_string(),
            opt(self.location_error),
            opt(self.weight_error),
            opt(self.gamma_or_tol),
            opt(self.cond_v_minus),
            opt(self.svd_gap),
            opt(self.wall_time_ms),
            self.l.to_string(),
            self.selection_flag.clone().unwrap_or_default(),
            self.ill_conditioned_shift.to_string(),
            opt_usize(self.collocation_rank),
            opt_usize(self.krylov_rank),
            self.input_digest.clone(),
            join_complex(&self.locations),
            join_complex(&self.weights),
            join_complex(&self.raw_locations),
            self.truth_matching
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(";"),
            self.failure.clone().unwrap_or_default(),
        ]
    }

    pub fn from_csv_fields(fields: &[&str]) -> Result<Self> {
        let expected = CSV_COLUMNS.len() + CSV_EXTRA_COLUMNS.len();
        if fields.len() != expected {
            return Err(ExperimentError::Parse(format!(
                "expected {expected} fields, found {}",
                fields.len()
            )));
        }
        let opt = |s: &str| (!s.is_empty()).then(|| parse_float(s)).transpose();
        let opt_usize = |s: &str| (!s.is_empty()).then(|| parse_usize(s)).transpose();
        let opt_text = |s: &str| (!s.is_empty()).then(|| s.to_string());
        Ok(Self {
            preset: fields[0].to_string(),
            method: fields[1].to_string(),
            sigma: parse_float(fields[2])?,
            seed: fields[3]
                .parse()
                .map_err(|_| ExperimentError::Parse(format!("bad seed {:?}", fields[3])))?,
            location_error: opt(fields[4])?,
            weight_error: opt(fields[5])?,
            gamma_or_tol: opt(fields[6])?,
            cond_v_minus: opt(fields[7])?,
            svd_gap: opt(fields[8])?,
            wall_time_ms: opt(fields[9])?,
            l: parse_usize(fields[10])?,
            selection_flag: opt_text(fields[11]),
            ill_conditioned_shift: fields[12]
                .parse()
                .map_err(|_| ExperimentError::Parse(format!("bad flag {:?}", fields[12])))?,
            collocation_rank: opt_usize(fields[13])?,
            krylov_rank: opt_usize(fields[14])?,
            input_digest: fields[15].to_string(),
            locations: split_complex(fields[16])?,
            weights: split_complex(fields[17])?,
            raw_locations: split_complex(fields[18])?,
            truth_matching: if fields[19].is_empty() {
                Vec::new()
            } else {
                fields[19].split(';').map(parse_usize).collect::<Result<_>>()?
            },
            failure: opt_text(fields[20]),
        })
    }
}

/// Shortest text that parses back to the same bits.
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}

pub fn parse_float(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| ExperimentError::Parse(format!("bad number {s:?}")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| ExperimentError::Parse(format!("bad count {s:?}")))
}

/// `re+imi`, e.g. `0.5-0.25i`.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() && !z.im.is_nan() { '-' } else { '+' };
    format!("{}{}{}i", format_float(z.re), sign, format_float(z.im.abs()))
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || ExperimentError::Parse(format!("bad complex number {s:?}"));
    let body = s.strip_suffix('i').ok_or_else(bad)?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re = parse_float(&body[..split])?;
    let im = parse_float(&body[split..]).or_else(|_| {
        // "+NaN" and "+inf" are not accepted by `str::parse` with a leading plus.
        parse_float(body[split..].trim_start_matches('+'))
    })?;
    Ok(Complex64::new(re, im))
}

fn join_complex(values: &[Complex64]) -> String {
    values.iter().map(|&z| format_complex(z)).collect::<Vec<_>>().join(";")
}

fn split_complex(s: &str) -> Result<Vec<Complex64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(parse_complex).collect()
}

/// 64-bit FNV-1a over the IEEE bits of a complex vector.
pub fn digest(values: &[Complex64]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for z in values {
        for part in [z.re, z.im] {
            for byte in part.to_bits().to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
    }
    format!("{h:016x}")
}

/// Finite floats as JSON numbers, everything else as strings.
mod opt_float {
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(x) if x.is_finite() => s.serialize_some(x),
            Some(x) => s.serialize_some(&super::format_float(*x)),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Number(x)) => Ok(Some(x)),
            Some(Repr::Text(t)) => super::parse_float(&t).map(Some).map_err(de::Error::custom),
        }
    }
}

mod complex_list {
    use eigenmatrix_core::Complex64;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|&z| super::format_complex(z)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| super::parse_complex(t).map_err(de::Error::custom))
            .collect()
    }
}
