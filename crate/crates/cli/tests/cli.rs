//! End-to-end checks of the command-line surface: exit codes, diagnostics,
//! file formats, and determinism of the emitted artifacts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_poa-pricing"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const COUPLED_PAIR: &str = r#"{"n":2,"a":[1.0,1.0],"b":[[-1.0,0.5],[0.5,-1.0]]}"#;

#[test]
fn validate_accepts_valid_instance() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "instance.json", COUPLED_PAIR);
    let output = run(&["validate", "--input", input.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    assert!(stdout(&output).contains("mu=0.5"));
}

#[test]
fn validate_reports_positive_own_effect_with_index() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "bad.json",
        r#"{"n":2,"a":[1.0,1.0],"b":[[-1.0,0.0],[0.0,0.5]]}"#,
    );
    let output = run(&["validate", "--input", input.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("NonNegativeOwnEffect at i=1"));
}

#[test]
fn validate_reports_dominance_violation() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "bad.json",
        r#"{"n":2,"a":[1.0,1.0],"b":[[-1.0,1.2],[1.2,-1.0]]}"#,
    );
    let output = run(&["validate", "--input", input.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("DominanceViolated at i=0"));
}

#[test]
fn validate_uses_exit_one_for_io_and_parse_failures() {
    let output = run(&["validate", "--input", "/nonexistent/instance.json"]);
    assert_eq!(output.status.code(), Some(1));

    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "broken.json", "{not json");
    let output = run(&["validate", "--input", input.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn analyze_document_round_trips_bit_for_bit() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "instance.json", COUPLED_PAIR);
    let doc_path = dir.path().join("doc.json");
    let output = run(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--output",
        doc_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));

    let text = std::fs::read_to_string(&doc_path).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["poa"]["mu"], 0.5);
    let poa_of_a = value["poa"]["poa_of_a"].as_f64().unwrap();
    assert!((poa_of_a - 8.0 / 9.0).abs() < 1e-9);

    // Re-reading and re-serializing reproduces the document exactly.
    let reparsed: poa_pricing_doc::AnalysisDocument = serde_json::from_str(&text).unwrap();
    let mut again = serde_json::to_string_pretty(&reparsed).unwrap();
    again.push('\n');
    assert_eq!(text, again);
}

// The document type lives in the binary crate; re-declare the JSON shape we
// guarantee so the round-trip check stays independent of internals.
mod poa_pricing_doc {
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    pub struct AnalysisDocument {
        pub tool: String,
        pub version: String,
        pub timestamp: u64,
        pub instance_path: String,
        pub instance: poa_pricing::InstanceJson,
        pub intercept: Vec<f64>,
        pub profile: poa_pricing::DominanceProfile,
        pub equilibrium: poa_pricing::EquilibriumPair,
        pub poa: poa_pricing::PoaReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        pub oracles: Option<Vec<poa_pricing::oracle::OracleResult>>,
    }
}

#[test]
fn analyze_honors_intercept_override() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "instance.json", COUPLED_PAIR);
    let intercept = write(dir.path(), "a.json", "[2.0, 2.0]");
    let doc_path = dir.path().join("doc.json");
    let output = run(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--intercept",
        intercept.to_str().unwrap(),
        "--output",
        doc_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&doc_path).unwrap()).unwrap();
    // Doubling the intercept quadruples the optimal revenue.
    let r_star = value["equilibrium"]["r_star"].as_f64().unwrap();
    assert!((r_star - 4.0).abs() < 1e-9);
    // The ratio is scale invariant.
    let poa_of_a = value["poa"]["poa_of_a"].as_f64().unwrap();
    assert!((poa_of_a - 8.0 / 9.0).abs() < 1e-9);
}

#[test]
fn analyze_rejects_zero_intercept_override() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "instance.json", COUPLED_PAIR);
    let intercept = write(dir.path(), "zero.json", "[0.0, 0.0]");
    let output = run(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--intercept",
        intercept.to_str().unwrap(),
        "--output",
        dir.path().join("doc.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("ZeroIntercept"));
}

#[test]
fn analyze_emits_flat_csv() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "instance.json", COUPLED_PAIR);
    let doc_path = dir.path().join("doc.csv");
    let output = run(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--output",
        doc_path.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let text = std::fs::read_to_string(&doc_path).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("\npoa_min,"));
    assert!(text.contains("\np_ne_1,"));
}

#[test]
fn analyze_decoupled_instance_reports_unit_ratios() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "diag.json",
        r#"{"n":3,"a":[1.0,2.0,0.5],"b":[[-1.0,0.0,0.0],[0.0,-2.0,0.0],[0.0,0.0,-0.5]]}"#,
    );
    let doc_path = dir.path().join("doc.json");
    let output = run(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--output",
        doc_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&doc_path).unwrap()).unwrap();
    for field in ["poa_of_a", "poa_min", "poa_max", "mu_bound", "exact_poa_min"] {
        let v = value["poa"][field].as_f64().unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{field} = {v}");
    }
}

#[test]
fn analyze_accepts_zero_intercept_instances() {
    // A zero baseline is a valid market; only the ratio at that intercept
    // is undefined, so the field is omitted.
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "zero.json",
        r#"{"n":2,"a":[0.0,0.0],"b":[[-1.0,0.5],[0.5,-1.0]]}"#,
    );
    let doc_path = dir.path().join("doc.json");
    let output = run(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--output",
        doc_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&doc_path).unwrap()).unwrap();
    assert!(value["poa"]["poa_of_a"].is_null());
    assert_eq!(value["equilibrium"]["r_star"].as_f64().unwrap(), 0.0);
    let poa_min = value["poa"]["poa_min"].as_f64().unwrap();
    assert!((poa_min - 8.0 / 9.0).abs() < 1e-9);
}

#[test]
fn analyze_with_verify_runs_oracles() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "instance.json", COUPLED_PAIR);
    let doc_path = dir.path().join("doc.json");
    let output = bin()
        .args([
            "analyze",
            "--input",
            input.to_str().unwrap(),
            "--output",
            doc_path.to_str().unwrap(),
            "--verify",
            "--samples",
            "200",
            "--seed",
            "7",
        ])
        .env("POA_PRICING_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&doc_path).unwrap()).unwrap();
    let oracles = value["oracles"].as_array().unwrap();
    assert_eq!(oracles.len(), 3);
    for oracle in oracles {
        assert_eq!(oracle["passed"], true);
    }
}

#[test]
fn verify_results_do_not_depend_on_thread_cap() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "instance.json", COUPLED_PAIR);
    let run_with_threads = |threads: &str, name: &str| {
        let doc_path = dir.path().join(name);
        let output = bin()
            .args([
                "analyze",
                "--input",
                input.to_str().unwrap(),
                "--output",
                doc_path.to_str().unwrap(),
                "--verify",
                "--samples",
                "100",
            ])
            .env("POA_PRICING_THREADS", threads)
            .env("SOURCE_DATE_EPOCH", "0")
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
        std::fs::read(doc_path).unwrap()
    };
    assert_eq!(run_with_threads("1", "serial.json"), run_with_threads("3", "parallel.json"));
}

#[test]
fn curve_rejects_bad_ranges() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("curve.csv");
    for args in [
        ["--mu-min", "0.5", "--mu-max", "0.2"],
        ["--mu-min", "0.0", "--mu-max", "1.0"],
        ["--mu-min", "-0.1", "--mu-max", "0.5"],
    ] {
        let output = run(&[
            "curve",
            args[0],
            args[1],
            args[2],
            args[3],
            "--steps",
            "5",
            "--output",
            out.to_str().unwrap(),
        ]);
        assert_eq!(output.status.code(), Some(2), "{args:?}");
    }
    let output = run(&[
        "curve",
        "--mu-min",
        "0",
        "--mu-max",
        "0.5",
        "--steps",
        "1",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn curve_values_parse_back_exactly() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("curve.csv");
    let output = run(&[
        "curve",
        "--mu-min",
        "0",
        "--mu-max",
        "0.5",
        "--steps",
        "11",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("mu,bound"));
    assert_eq!(lines.next(), Some("0,1"));
    // The row at mu = 0.5 recovers 4(1-mu)/(2-mu)^2 bit for bit.
    let row = text
        .lines()
        .find(|l| l.starts_with("0.5,"))
        .expect("midpoint row");
    let bound: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(bound, 4.0 * 0.5 / (1.5 * 1.5));
}

#[test]
fn generate_star_has_expected_hub_row() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("star.json");
    let output = run(&[
        "generate",
        "--model",
        "star",
        "--n",
        "5",
        "--rho",
        "0.15",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let row0: Vec<f64> = value["b"][0]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let off_sum: f64 = row0[1..].iter().sum();
    assert!((off_sum - 0.6).abs() < 1e-15);
}

#[test]
fn generate_rejects_invalid_specs() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bad.json");
    let output = run(&[
        "generate",
        "--model",
        "symmetric",
        "--n",
        "3",
        "--rho",
        "0.6",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("SpecInvalid"));

    let output = run(&[
        "generate",
        "--model",
        "random",
        "--n",
        "3",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn simulate_best_response_reaches_equilibrium() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "instance.json", COUPLED_PAIR);
    let out = dir.path().join("trajectory.csv");
    let output = run(&[
        "simulate",
        "--input",
        input.to_str().unwrap(),
        "--dynamic",
        "br",
        "--eps",
        "1e-10",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    assert!(stdout(&output).contains("converged=true"));

    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("step,dist_to_ne,revenue,p_0,p_1\n"));
    let last = text.lines().last().unwrap();
    let fields: Vec<f64> = last.split(',').map(|v| v.parse().unwrap()).collect();
    assert!((fields[3] - 2.0 / 3.0).abs() < 1e-4);
    assert!((fields[4] - 2.0 / 3.0).abs() < 1e-4);
}

#[test]
fn simulate_gradient_play_on_decoupled_market() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "diag.json",
        r#"{"n":2,"a":[1.0,1.0],"b":[[-1.0,0.0],[0.0,-1.0]]}"#,
    );
    let out = dir.path().join("trajectory.csv");
    let output = run(&[
        "simulate",
        "--input",
        input.to_str().unwrap(),
        "--dynamic",
        "gd",
        "--eta",
        "0.25",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    assert!(stdout(&output).contains("converged=true"));
}

#[test]
fn simulate_rejects_oversized_step_reporting_the_bound() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "instance.json", COUPLED_PAIR);
    let output = run(&[
        "simulate",
        "--input",
        input.to_str().unwrap(),
        "--dynamic",
        "gd",
        "--eta",
        "5.0",
        "--output",
        dir.path().join("t.csv").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    // eta_max = 1 / (2 * 1 * 1.5) for this instance.
    let err = stderr(&output);
    assert!(err.contains("StepSizeTooLarge"), "{err}");
    assert!(err.contains("0.3333333333333333"), "{err}");
}

#[test]
fn simulate_signals_non_convergence_with_exit_four() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "instance.json", COUPLED_PAIR);
    let out = dir.path().join("trajectory.csv");
    let output = run(&[
        "simulate",
        "--input",
        input.to_str().unwrap(),
        "--dynamic",
        "br",
        "--max-iters",
        "2",
        "--eps",
        "1e-15",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(4));
    // The partial trajectory is still written.
    assert!(out.exists());
}

#[test]
fn simulate_accepts_custom_start() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "instance.json", COUPLED_PAIR);
    let start = write(dir.path(), "p0.json", "[5.0, -5.0]");
    let out = dir.path().join("trajectory.csv");
    let output = run(&[
        "simulate",
        "--input",
        input.to_str().unwrap(),
        "--dynamic",
        "br",
        "--p0",
        start.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let text = std::fs::read_to_string(&out).unwrap();
    let first = text.lines().nth(1).unwrap();
    assert!(first.starts_with("0,"));
    assert!(first.ends_with(",5,-5"));
}
