//! End-to-end tests for the `qdb` binary: golden stdout for the worked
//! example, machine formats, artifact emission, determinism, and the
//! exit-code contract (0 success, 2 validation, 3 fit failure).

use std::io::Write;
use std::process::{Command, Output};

fn qdb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdb"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

#[test]
fn predict_prints_the_worked_example_table() {
    let output = qdb(&["predict", "--h1", "-0.1376", "--h2", "0.2033", "--p-b1", "0.17"]);
    assert!(output.status.success());
    let expected = "\
m1: A·G=0.0414 U·G=0.0567 W·G=0.0720 A·B=0.3846 U·B=0.2767 W·B=0.1688
m2: A·U=0.4259 U·U=0.3333 W·U=0.2407
E_d1=2.7026  E_d2=3.5398  gamma=0.2365
P(A|G)=0.4100  P(A|B)=0.6300
P_T=0.5926  P(A)=0.6715  Int=0.0788
";
    assert_eq!(stdout_of(&output), expected);
}

#[test]
fn predict_json_is_machine_readable_with_full_precision() {
    let output = qdb(&[
        "predict", "--h1", "-0.1376", "--h2", "0.2033", "--p-b1", "0.17", "--format", "json",
    ]);
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert!((value["p_total"].as_f64().unwrap() - 0.5926147468020586).abs() < 1e-12);
    assert!((value["p_unknown"].as_f64().unwrap() - 0.6714512702900919).abs() < 1e-12);
    assert_eq!(value["sign"], 1);
    assert_eq!(value["clamped"], false);
    assert!((value["m1"]["A·B"].as_f64().unwrap() - 0.3846).abs() < 5e-4);
}

#[test]
fn predict_accepts_the_negative_sign_token() {
    let output = qdb(&[
        "predict", "--h1", "-0.1376", "--h2", "0.2033", "--p-b1", "0.17", "--sign", "-",
        "--format", "json",
    ]);
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(value["sign"], -1);
    assert!(value["interference"].as_f64().unwrap() < 0.0);
    assert!((value["p_unknown"].as_f64().unwrap() - 0.5137782233140252).abs() < 1e-9);
}

#[test]
fn outputs_are_byte_deterministic() {
    let args = ["compare", "--builtin", "--format", "json"];
    let first = qdb(&args);
    let second = qdb(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn fit_recovers_the_worked_parameters() {
    let output = qdb(&["fit", "--target-b1", "0.41", "--target-b2", "0.63"]);
    assert!(output.status.success());
    assert_eq!(stdout_of(&output), "h1=-0.1376\nh2=0.2033\n");
}

#[test]
fn fit_failure_exits_3_with_a_fit_error_line() {
    let output = qdb(&["fit", "--target-b1", "0.10", "--target-b2", "0.63"]);
    assert_eq!(output.status.code(), Some(3));
    let stderr = stderr_of(&output);
    assert!(stderr.starts_with("error[fit]: "), "stderr was {stderr:?}");
    assert_eq!(stderr.lines().count(), 1);
}

#[test]
fn validation_failure_exits_2_with_a_validation_error_line() {
    let output = qdb(&["predict", "--h1", "-0.1376", "--h2", "0.2033", "--p-b1", "1.5"]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = stderr_of(&output);
    assert!(stderr.starts_with("error[validation]: "), "stderr was {stderr:?}");
    assert_eq!(stderr.lines().count(), 1);
}

#[test]
fn unknown_arguments_exit_2() {
    let output = qdb(&["predict", "--nonsense", "1"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn version_flag_reports_the_package_version() {
    let output = qdb(&["--version"]);
    assert!(output.status.success());
    assert_eq!(
        stdout_of(&output).trim(),
        format!("qdb {}", env!("CARGO_PKG_VERSION"))
    );
}

#[test]
fn compare_writes_report_and_chart_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let chart_path = dir.path().join("chart.csv");
    let output = qdb(&[
        "compare",
        "--builtin",
        "--out",
        report_path.to_str().unwrap(),
        "--chart",
        chart_path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert!(stdout_of(&output).is_empty());

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 12);
    assert_eq!(report["meta"]["sign"], 1);
    assert!(report["aggregate"]["markov"]["mean_abs_error"].is_f64());

    let chart = std::fs::read_to_string(&chart_path).unwrap();
    let lines: Vec<&str> = chart.lines().collect();
    assert_eq!(lines[0], "dataset,observed,markov,qdb,bae");
    assert_eq!(lines.len(), 7, "one data line per narrow row");
    assert!(lines[1].starts_with("townsend2000,0.690000,0.592600,"));
}

#[test]
fn reproduce_reads_csv_datasets_and_prints_a_table() {
    let mut file = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
    writeln!(file, "dataset,face_type,p_g,p_a_given_g,p_b,p_a_given_b,p_t,p_a").unwrap();
    writeln!(file, "townsend2000,N,0.17,0.41,0.83,0.63,0.59,0.69").unwrap();
    file.flush().unwrap();

    let output = qdb(&["reproduce", "--data", file.path().to_str().unwrap()]);
    assert!(output.status.success());
    let stdout = stdout_of(&output);
    assert!(stdout.contains("townsend2000"));
    assert!(stdout.contains("0.5926"));
    assert!(stdout.contains("0.6714"));
}

#[test]
fn reproduce_rejects_malformed_datasets_with_exit_2() {
    let mut file = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
    writeln!(file, "wrong,header").unwrap();
    file.flush().unwrap();

    let output = qdb(&["reproduce", "--data", file.path().to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).starts_with("error[validation]: "));

    let output = qdb(&["reproduce", "--data", "/nonexistent/rows.csv"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn entropy_reports_deng_and_pignistic_shannon() {
    let mut file = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
    let third = 1.0 / 3.0;
    let doc = serde_json::json!({
        "frame": ["a", "b"],
        "masses": [
            { "set": ["a"], "mass": third },
            { "set": ["b"], "mass": third },
            { "set": ["a", "b"], "mass": third },
        ],
    });
    write!(file, "{doc}").unwrap();
    file.flush().unwrap();

    let output = qdb(&["entropy", "--bpa", file.path().to_str().unwrap()]);
    assert!(output.status.success());
    assert_eq!(
        stdout_of(&output),
        "deng_entropy=2.1133\nshannon_pignistic=1.0000\n"
    );

    let output = qdb(&[
        "entropy", "--bpa", file.path().to_str().unwrap(), "--format", "json",
    ]);
    let value: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert!((value["deng_entropy"].as_f64().unwrap() - 2.1133).abs() < 1e-3);
}

#[test]
fn entropy_rejects_invalid_bpas_with_exit_2() {
    let mut file = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
    let doc = serde_json::json!({
        "frame": ["a", "b"],
        "masses": [ { "set": ["a"], "mass": 0.5 } ],
    });
    write!(file, "{doc}").unwrap();
    file.flush().unwrap();

    let output = qdb(&["entropy", "--bpa", file.path().to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).starts_with("error[validation]: "));
}
