//! End-to-end tests of the `dcqo` binary: expected gate counts, determinism,
//! metric recomputability, scan shapes, and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_dcqo")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON document")
}

fn stdout_of(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

/// Drops fields that legitimately differ between identical runs.
fn strip_timing(mut doc: Value) -> Value {
    if let Some(obj) = doc.as_object_mut() {
        obj.remove("wall_time_s");
    }
    doc
}

#[test]
fn three_city_tour_run_reports_published_gate_count() {
    let tsp = data("tsp3.json");
    let doc = run_ok(&[
        "solve",
        "--tsp",
        tsp.to_str().unwrap(),
        "--alg",
        "dcqo",
        "--steps",
        "2",
        "--time",
        "0.2",
        "--cutoff",
        "0.1",
    ]);
    assert_eq!(doc["gate_counts"]["cx_lowered"]["two_qubit"], 36);
    assert_eq!(doc["gate_counts"]["ms_lowered"]["two_qubit"], 36);
    assert_eq!(doc["ground_degeneracy"], 6);
    // Every optimal outcome is a decodable tour and clears twice the uniform
    // baseline of 1/512.
    let ground_rows: Vec<&Value> = doc["top_outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|row| (row["energy"].as_f64().unwrap() - 3.0).abs() < 1e-9)
        .collect();
    assert_eq!(ground_rows.len(), 6);
    for row in ground_rows {
        assert!(row["tour"].is_array(), "optimal outcome decodes to a tour");
        assert!((row["tour_length"].as_f64().unwrap() - 3.0).abs() < 1e-9);
        assert!(row["probability"].as_f64().unwrap() >= 2.0 / 512.0);
    }
}

#[test]
fn text_program_source_runs_with_the_annealing_plus_gauge_circuit() {
    let qubo = data("triangle.qubo");
    let doc = run_ok(&[
        "solve",
        "--qubo",
        qubo.to_str().unwrap(),
        "--alg",
        "dcqo-full",
        "--steps",
        "4",
        "--time",
        "0.5",
    ]);
    assert_eq!(doc["ground_energy"], -1.0);
    assert_eq!(doc["ground_degeneracy"], 3);
    // The three single-bit optima (variable k set → packed index 2^k).
    let optima: Vec<u64> = doc["top_outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|row| (row["energy"].as_f64().unwrap() + 1.0).abs() < 1e-9)
        .map(|row| row["index"].as_u64().unwrap())
        .collect();
    let mut sorted = optima.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, [1, 2, 4]);
}

#[test]
fn identical_flag_sets_reproduce_identical_results() {
    let args = [
        "solve",
        "--random-spin-glass",
        "10",
        "--seed",
        "7",
        "--alg",
        "dqa",
        "--time",
        "10",
        "--steps",
        "64",
        "--shots",
        "0",
    ];
    let a = strip_timing(run_ok(&args));
    let b = strip_timing(run_ok(&args));
    assert!(a["success_probability"].is_number(), "SP field present");
    assert_eq!(a, b, "same flags, same result");
}

#[test]
fn sampled_runs_reproduce_with_the_same_shot_seed() {
    let args = [
        "solve",
        "--dense-qubo",
        "6",
        "--seed",
        "2",
        "--alg",
        "dqa",
        "--steps",
        "4",
        "--time",
        "1.0",
        "--shots",
        "4096",
        "--shot-seed",
        "9",
    ];
    let a = strip_timing(run_ok(&args));
    let b = strip_timing(run_ok(&args));
    assert_eq!(a, b);
    let mass: f64 = a["distribution"]["probs"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_f64().unwrap())
        .sum();
    assert!((mass - 1.0).abs() < 1e-12, "sampled mass {mass}");
}

#[test]
fn warm_started_ansatz_reports_published_gate_count() {
    let doc = run_ok(&[
        "solve",
        "--dense-qubo",
        "16",
        "--seed",
        "1",
        "--alg",
        "hdcqo",
        "--variant",
        "two-param",
        "--layers",
        "1",
        "--warm",
    ]);
    assert_eq!(doc["gate_counts"]["cx_lowered"]["two_qubit"], 240);
    let opt = &doc["optimizer"];
    assert!(opt.is_object(), "variational run echoes its optimizer record");
    assert!(!opt["cost_trace"].as_array().unwrap().is_empty());
    assert!(opt["best_cost"].as_f64().unwrap() <= opt["cost_trace"][0].as_f64().unwrap());
}

#[test]
fn quality_metrics_recompute_from_the_persisted_output() {
    let doc = run_ok(&[
        "solve",
        "--random-spin-glass",
        "6",
        "--seed",
        "3",
        "--alg",
        "dqa",
        "--steps",
        "8",
        "--time",
        "2.0",
    ]);
    let model: dcqo_core::IsingModel = serde_json::from_value(doc["model"].clone()).unwrap();
    let dist: dcqo_core::OutcomeDistribution =
        serde_json::from_value(doc["distribution"].clone()).unwrap();

    let ground = dcqo_core::brute_force_solve(&model).unwrap();
    assert_eq!(ground.energy, doc["ground_energy"].as_f64().unwrap());

    let sp = dcqo_core::success_probability(&dist, &ground);
    assert!((sp - doc["success_probability"].as_f64().unwrap()).abs() < 1e-12);

    let ar = dcqo_core::approximation_ratio_with_ground(&dist, &model, ground.energy).unwrap();
    assert!((ar - doc["approximation_ratio"].as_f64().unwrap()).abs() < 1e-12);

    let mean = dist.mean_energy(&model).unwrap();
    assert!((mean - doc["mean_energy"].as_f64().unwrap()).abs() < 1e-12);
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .expect("csv header")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

#[test]
fn scan_covers_the_grid_and_gauge_only_rows_are_time_independent() {
    let csv = stdout_of(&[
        "regime-scan",
        "--random-spin-glass",
        "10",
        "--seed",
        "7",
        "--steps",
        "20",
        "--t-min",
        "0.005",
        "--t-max",
        "10",
        "--points",
        "5",
    ]);
    let (header, rows) = parse_csv(&csv);
    assert_eq!(header, ["time", "variant", "success_probability"]);
    assert_eq!(rows.len(), 15, "5 times x 3 variants");

    let sp_of = |variant: &str| -> Vec<f64> {
        rows.iter()
            .filter(|r| r[1] == variant)
            .map(|r| r[2].parse().unwrap())
            .collect()
    };
    let cd = sp_of("cd-only");
    assert!(
        cd.iter().all(|&v| v == cd[0]),
        "gauge-only success probability is the same at every time: {cd:?}"
    );
    let anneal = sp_of("anneal");
    assert!(
        anneal.last().unwrap() >= anneal.first().unwrap(),
        "annealing improves with more time: {anneal:?}"
    );
}

#[test]
fn scan_with_a_single_point_emits_one_row_per_variant() {
    let csv = stdout_of(&[
        "regime-scan",
        "--random-spin-glass",
        "6",
        "--seed",
        "3",
        "--steps",
        "4",
        "--t-min",
        "0.25",
        "--t-max",
        "10",
        "--points",
        "1",
    ]);
    let (_, rows) = parse_csv(&csv);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[0] == "0.25"), "single grid point");
    let variants: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(variants, ["anneal", "full", "cd-only"]);
}

#[test]
fn comparison_rejects_an_empty_algorithm_list() {
    let out = run(&["compare", "--dense-qubo", "8", "--seeds", "0", "--algorithms"]);
    assert_eq!(out.status.code(), Some(2), "empty list is a usage error");
    let out = run(&["compare", "--dense-qubo", "8", "--seeds", "0"]);
    assert_eq!(out.status.code(), Some(2), "missing list is a usage error");
}

#[test]
fn comparison_tables_are_deterministic_given_the_seeds() {
    let args = [
        "compare",
        "--dense-qubo",
        "10",
        "--seeds",
        "0,1",
        "--algorithms",
        "dqa,dcqo,qaoa",
        "--steps",
        "2",
        "--time",
        "0.7",
        "--layers",
        "1",
    ];
    let a = stdout_of(&args);
    let b = stdout_of(&args);
    assert_eq!(a, b, "identical seeds give identical tables");
}

#[test]
fn gauge_circuit_beats_annealing_at_a_matched_gate_budget() {
    let csv = stdout_of(&[
        "compare",
        "--dense-qubo",
        "16",
        "--seeds",
        "0,1,2,3,4,5,6,7,8,9",
        "--algorithms",
        "dqa,dcqo",
        "--steps",
        "6",
        "--time",
        "1.0",
    ]);
    let (header, rows) = parse_csv(&csv);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (alg, cx, sp, seed) = (
        col("algorithm"),
        col("two_qubit_cx"),
        col("success_probability"),
        col("seed"),
    );

    // Matched budgets: every row compiles to the same CX count.
    assert!(rows.iter().all(|r| r[cx] == "1440"), "same budget per row");

    let sp_by = |want: &str, s: &str| -> f64 {
        rows.iter()
            .find(|r| r[alg] == want && r[seed] == s)
            .unwrap()[sp]
            .parse()
            .unwrap()
    };
    let wins = (0..10)
        .filter(|i| {
            let s = i.to_string();
            sp_by("dcqo", &s) > sp_by("dqa", &s)
        })
        .count();
    assert!(wins >= 6, "gauge circuit wins {wins}/10 instances");
}

#[test]
fn neighborhood_search_solves_the_tour_and_rejects_spin_models() {
    let tsp = data("tsp4.json");
    let doc = run_ok(&[
        "lns",
        "--tsp",
        tsp.to_str().unwrap(),
        "--group-size",
        "16",
        "--max-sweeps",
        "20",
    ]);
    assert!((doc["value"].as_f64().unwrap() - 3.9).abs() < 1e-9);
    assert_eq!(doc["tour"].as_array().unwrap().len(), 4);
    let trace = doc["trace"].as_array().unwrap();
    assert!(
        trace
            .windows(2)
            .all(|w| w[1].as_f64().unwrap() <= w[0].as_f64().unwrap() + 1e-12),
        "trace never regresses"
    );

    let out = run(&["lns", "--random-spin-glass", "6"]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "spin models have no binary program to decompose"
    );
}

#[test]
fn exit_codes_distinguish_usage_from_domain_errors() {
    let out = run(&["solve", "--dense-qubo", "4", "--alg", "nope"]);
    assert_eq!(out.status.code(), Some(2), "unknown algorithm");

    let out = run(&[
        "solve",
        "--random-spin-glass",
        "30",
        "--alg",
        "dqa",
        "--steps",
        "2",
        "--time",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(1), "register too wide to simulate");
    let err: Value =
        serde_json::from_slice(&out.stderr).expect("domain errors are structured JSON");
    assert!(err["error"].is_string());

    let out = run(&[
        "solve",
        "--tsp",
        "/nonexistent/instance.json",
        "--alg",
        "dqa",
    ]);
    assert_eq!(out.status.code(), Some(1), "missing file is a domain error");
}

#[test]
fn results_persist_atomically_to_the_requested_path() {
    let dir = std::env::temp_dir().join(format!("dcqo-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("run.json");
    let doc = run(&[
        "solve",
        "--dense-qubo",
        "4",
        "--seed",
        "0",
        "--alg",
        "dqa",
        "--steps",
        "2",
        "--time",
        "1.0",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(doc.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let parsed: Value = serde_json::from_str(&text).unwrap();
    // Dense 4-variable program: 6 couplings x 2 steps x 2 CX each.
    assert_eq!(parsed["gate_counts"]["cx_lowered"]["two_qubit"], 24);
    // No temp files left behind.
    let leftovers: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains("tmp"))
        .collect();
    assert!(leftovers.is_empty(), "temp files cleaned up: {leftovers:?}");
    std::fs::remove_dir_all(&dir).ok();
}
