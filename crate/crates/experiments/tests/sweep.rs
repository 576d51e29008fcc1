use eigenmatrix_core::eigenmatrix::{Method, MethodConfig};
use eigenmatrix_core::presets::{load_preset, PresetId};
use eigenmatrix_experiments::report::{read_csv, read_json, write_csv, CSV_FILE, JSON_FILE, PLOT_DIR};
use eigenmatrix_experiments::sweep::quantile;
use eigenmatrix_experiments::{emit_report, run_sweep, summarize, Format, RunRecord};

fn default_methods(n_x: usize) -> Vec<MethodConfig> {
    vec![
        MethodConfig::new(Method::pinv(), n_x),
        MethodConfig::new(Method::lcurve(), n_x),
    ]
}

fn rational_records(seeds: u64) -> Vec<RunRecord> {
    let preset = load_preset(PresetId::Rational);
    let seeds: Vec<u64> = (0..seeds).collect();
    run_sweep(&preset, &default_methods(preset.n_x()), &seeds).unwrap()
}

#[test]
fn sweep_covers_every_cell_in_canonical_order() {
    let records = rational_records(20);
    assert_eq!(records.len(), 2 * 3 * 20);
    let mut expected = Vec::new();
    let mut sigmas = load_preset(PresetId::Rational).sigma_list;
    sigmas.sort_by(f64::total_cmp);
    for &sigma in &sigmas {
        for seed in 0..20 {
            for method in ["pinv", "lcurve"] {
                expected.push((sigma, seed, method));
            }
        }
    }
    let got: Vec<_> = records
        .iter()
        .map(|r| (r.sigma, r.seed, r.method.as_str()))
        .collect();
    assert_eq!(got, expected);
    assert!(records.iter().all(|r| !r.failed() && r.wall_time_ms.is_none()));
}

#[test]
fn methods_share_each_noise_draw() {
    let records = rational_records(5);
    for pair in records.chunks(2) {
        assert_eq!((pair[0].sigma, pair[0].seed), (pair[1].sigma, pair[1].seed));
        assert_eq!(pair[0].input_digest, pair[1].input_digest);
    }
    let mut digests: Vec<&str> = records.iter().map(|r| r.input_digest.as_str()).collect();
    digests.sort();
    digests.dedup();
    assert_eq!(digests.len(), 3 * 5);
}

#[test]
fn regularized_median_beats_pinv_at_the_highest_noise() {
    let records = rational_records(20);
    let summary = summarize(&records);
    let median = |method: &str| {
        summary
            .iter()
            .find(|s| s.method == method && s.sigma == 0.1)
            .unwrap()
            .location_median
    };
    assert!(median("lcurve") < median("pinv"), "{} vs {}", median("lcurve"), median("pinv"));
}

#[test]
fn summary_matches_a_direct_median() {
    let records = rational_records(7);
    for s in summarize(&records) {
        let mut errs: Vec<f64> = records
            .iter()
            .filter(|r| r.method == s.method && r.sigma == s.sigma)
            .map(|r| r.location_error.unwrap())
            .collect();
        errs.sort_by(f64::total_cmp);
        assert_eq!(s.runs, 7);
        assert_eq!(s.location_median, errs[3]);
        assert_eq!(s.location_median, quantile(&errs, 0.5));
    }
}

#[test]
fn single_record_csv_is_header_plus_one_row() {
    let records = rational_records(1);
    let mut buf = Vec::new();
    write_csv(&records[..1], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with(
        "preset,method,sigma,seed,location_error,weight_error,gamma_or_tol,condV_minus,svd_gap,wall_time_ms,"
    ));
}

#[test]
fn csv_and_json_round_trip_losslessly() {
    let mut records = rational_records(3);
    records[0].wall_time_ms = Some(f64::INFINITY);
    records[1].cond_v_minus = Some(f64::NAN);
    records[2].failure = Some("esprit: a \"quoted\", comma".into());
    records[2].selection_flag = Some("flat-curve".into());

    let mut buf = Vec::new();
    write_csv(&records, &mut buf).unwrap();
    let back = read_csv(buf.as_slice()).unwrap();
    let json = serde_json::to_string(&records).unwrap();
    let back_json = read_json(&json).unwrap();

    for restored in [&back, &back_json] {
        assert_eq!(restored.len(), records.len());
        for (a, b) in records.iter().zip(restored.iter()) {
            assert_eq!(bits(a), bits(b));
        }
    }
}

/// Field-by-field comparison that treats NaN as equal to itself.
fn bits(r: &RunRecord) -> String {
    let mut r = r.clone();
    if r.cond_v_minus.is_some_and(f64::is_nan) {
        r.cond_v_minus = Some(-12345.0);
    }
    format!("{r:?}")
}

#[test]
fn reports_land_in_the_output_directory() {
    let records = rational_records(2);
    let dir = tempfile::tempdir().unwrap();
    let csv = emit_report(&records, Format::Csv, dir.path()).unwrap();
    assert_eq!(csv, vec![dir.path().join(CSV_FILE)]);
    let json = emit_report(&records, Format::Json, dir.path()).unwrap();
    let text = std::fs::read_to_string(&json[0]).unwrap();
    assert_eq!(json[0], dir.path().join(JSON_FILE));
    assert_eq!(read_json(&text).unwrap().len(), records.len());

    let plot = emit_report(&records, Format::PlotData, dir.path()).unwrap();
    let root = dir.path().join(PLOT_DIR).join("rational");
    // truth + (2 methods × 3 σ) series + script
    assert_eq!(plot.len(), 1 + 6 + 1);
    let truth = std::fs::read_to_string(root.join("truth.dat")).unwrap();
    let points: Vec<(f64, f64)> = truth
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let v: Vec<f64> = l.split(' ').map(|t| t.parse().unwrap()).collect();
            (v[0], v[1])
        })
        .collect();
    assert_eq!(points.len(), 4);
    for (re, im) in points {
        assert!((re.hypot(im) - 0.9).abs() < 1e-12);
    }
    let series = std::fs::read_to_string(root.join("lcurve_sigma0.1.dat")).unwrap();
    assert_eq!(series.matches("# seed").count(), 2);
    assert_eq!(series.matches("\n\n\n").count(), 1);
    assert!(std::fs::read_to_string(root.join("plot.gp"))
        .unwrap()
        .contains(eigenmatrix_core::rng::GENERATOR_NAME));
}

#[test]
fn empty_inputs_are_rejected() {
    let preset = load_preset(PresetId::Rational);
    assert!(run_sweep(&preset, &[], &[0]).is_err());
    assert!(run_sweep(&preset, &default_methods(4), &[]).is_err());
    let dir = tempfile::tempdir().unwrap();
    assert!(emit_report(&[], Format::Csv, dir.path()).is_err());
}
