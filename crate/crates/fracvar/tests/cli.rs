//! End-to-end tests of the installed binary: exit codes, output schemas,
//! and determinism, exercised through std::process.

use std::path::Path;
use std::process::{Command, Output};

fn fracvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracvar"))
        .args(args)
        .output()
        .expect("binary is runnable")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("process not killed by signal")
}

fn summary_field(summary: &str, key: &str) -> String {
    let prefix = format!("{key}=");
    summary
        .split_whitespace()
        .find_map(|field| field.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("missing {key} in `{summary}`"))
        .to_string()
}

const EXAMPLE1_CONFIG: &str = r#"{
    "alpha": 0.5, "a": 0.0, "b": 1.0, "xa": 0.0, "xb": 1.0,
    "lagrangian": "(dax - 2/gamma(2.5)*t^1.5)^2",
    "exact": "t^2"
}"#;

#[test]
fn solve_example1_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ex1.csv");
    let output = fracvar(&[
        "solve",
        "--example",
        "1",
        "--n",
        "30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_of(&output));

    let summary = stdout_of(&output);
    assert_eq!(summary.lines().count(), 1);
    assert_eq!(summary_field(&summary, "path"), "linear");
    let error: f64 = summary_field(&summary, "E").parse().unwrap();
    assert!(
        (error - 0.0065).abs() <= 0.1 * 0.0065,
        "summary E = {error} is not within 10% of 0.0065"
    );
    let residual: f64 = summary_field(&summary, "residual").parse().unwrap();
    assert!(residual <= 1e-10);
    let seconds: f64 = summary_field(&summary, "T").parse().unwrap();
    assert!(seconds >= 0.0);

    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "i,t,x,exact,abs_err");
    assert_eq!(lines.len(), 32, "header plus 31 node rows");
    assert!(csv.ends_with('\n') && !csv.ends_with("\n\n"));
    let last: Vec<&str> = lines[31].split(',').collect();
    assert_eq!(last[0], "30");
    let x_final: f64 = last[2].parse().unwrap();
    assert_eq!(x_final, 1.0, "right boundary value is pinned");
}

#[test]
fn solve_rejects_small_n() {
    let output = fracvar(&["solve", "--example", "1", "--n", "2"]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr_of(&output).contains("at least 3"));
}

#[test]
fn solve_requires_exactly_one_source() {
    let output = fracvar(&["solve", "--n", "10"]);
    assert_eq!(exit_code(&output), 2);

    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("p.json");
    std::fs::write(&config, EXAMPLE1_CONFIG).unwrap();
    let output = fracvar(&[
        "solve",
        "--example",
        "1",
        "--problem",
        config.to_str().unwrap(),
        "--n",
        "10",
    ]);
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn solve_rejects_out_of_range_example_and_bad_path_flag() {
    let output = fracvar(&["solve", "--example", "4", "--n", "10"]);
    assert_eq!(exit_code(&output), 2);
    let output = fracvar(&["solve", "--example", "1", "--n", "10", "--force-path", "magic"]);
    assert_eq!(exit_code(&output), 2);
    let output = fracvar(&["solve", "--example", "1", "--n", "10", "--tol", "-1"]);
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn solve_forced_linear_on_nonaffine_problem_exits_3() {
    let output = fracvar(&[
        "solve",
        "--example",
        "3",
        "--n",
        "10",
        "--force-path",
        "linear",
    ]);
    assert_eq!(exit_code(&output), 3);
    assert!(!stderr_of(&output).is_empty());
}

#[test]
fn solve_unreachable_tolerance_exits_3_with_residual() {
    let output = fracvar(&[
        "solve",
        "--example",
        "3",
        "--n",
        "10",
        "--tol",
        "1e-30",
    ]);
    assert_eq!(exit_code(&output), 3);
    let stderr = stderr_of(&output);
    assert!(
        stderr.contains("residual"),
        "non-convergence message must carry the final residual: {stderr}"
    );
}

fn write_config(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_config_errors_exit_4_with_positions() {
    let dir = tempfile::tempdir().unwrap();

    let path = write_config(dir.path(), "truncated.json", "{\"alpha\": 0.5,");
    let output = fracvar(&["solve", "--problem", &path, "--n", "10"]);
    assert_eq!(exit_code(&output), 4);
    assert!(stderr_of(&output).contains("line"));

    let bad_expression = EXAMPLE1_CONFIG.replace("t^1.5)^2", "t^1.5)^");
    let path = write_config(dir.path(), "badexpr.json", &bad_expression);
    let output = fracvar(&["solve", "--problem", &path, "--n", "10"]);
    assert_eq!(exit_code(&output), 4);
    assert!(stderr_of(&output).contains("offset"));

    let bad_boundary = EXAMPLE1_CONFIG.replace("\"t^2\"", "\"t^2 + 0.001\"");
    let path = write_config(dir.path(), "badboundary.json", &bad_boundary);
    let output = fracvar(&["solve", "--problem", &path, "--n", "10"]);
    assert_eq!(exit_code(&output), 4);
    assert!(stderr_of(&output).contains("boundary mismatch"));

    let unknown_field = EXAMPLE1_CONFIG.replace("\"alpha\"", "\"aleph\"");
    let path = write_config(dir.path(), "unknown.json", &unknown_field);
    let output = fracvar(&["solve", "--problem", &path, "--n", "10"]);
    assert_eq!(exit_code(&output), 4);

    let output = fracvar(&["solve", "--problem", "/nonexistent/p.json", "--n", "10"]);
    assert_eq!(exit_code(&output), 4);
}

#[test]
fn solve_config_file_matches_built_in() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "ex1.json", EXAMPLE1_CONFIG);
    let from_config = fracvar(&["solve", "--problem", &path, "--n", "10"]);
    assert_eq!(exit_code(&from_config), 0, "stderr: {}", stderr_of(&from_config));
    let from_built_in = fracvar(&["solve", "--example", "1", "--n", "10"]);
    assert_eq!(exit_code(&from_built_in), 0);
    let config_error: f64 = summary_field(&stdout_of(&from_config), "E").parse().unwrap();
    let built_in_error: f64 = summary_field(&stdout_of(&from_built_in), "E")
        .parse()
        .unwrap();
    assert!(
        (config_error - built_in_error).abs() <= 1e-6,
        "config E = {config_error} vs built-in E = {built_in_error}"
    );
}

#[test]
fn solve_csv_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    for out in [&first, &second] {
        let output = fracvar(&[
            "solve",
            "--example",
            "2",
            "--n",
            "12",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&output), 0);
    }
    let first_bytes = std::fs::read(&first).unwrap();
    let second_bytes = std::fs::read(&second).unwrap();
    assert_eq!(first_bytes, second_bytes, "CSV output must be byte-identical");
}

#[test]
fn solve_json_output_is_deterministic_up_to_timing() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    for out in [&first, &second] {
        let output = fracvar(&[
            "solve",
            "--example",
            "1",
            "--n",
            "12",
            "--format",
            "json",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&output), 0);
    }
    let mut first_doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let mut second_doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&second).unwrap()).unwrap();
    assert_eq!(first_doc["path"], "linear");
    assert_eq!(first_doc["rows"].as_array().unwrap().len(), 13);
    assert!(first_doc["rows"][3]["exact"].is_number());
    first_doc["wall_seconds"] = 0.0.into();
    second_doc["wall_seconds"] = 0.0.into();
    assert_eq!(first_doc, second_doc, "JSON output must match except timing");
}

#[test]
fn weights_prints_index_weight_and_partial_sum() {
    let output = fracvar(&["weights", "--alpha", "0.5", "--count", "2"]);
    assert_eq!(exit_code(&output), 0);
    let stdout = stdout_of(&output);
    let rows: Vec<Vec<f64>> = stdout
        .lines()
        .map(|line| {
            line.split_whitespace()
                .map(|field| field.parse().unwrap())
                .collect()
        })
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0], vec![0.0, 1.0, 1.0]);
    assert_eq!(rows[1], vec![1.0, -0.5, 0.5]);
    assert_eq!(rows[2], vec![2.0, -0.125, 0.375]);
}

#[test]
fn weights_count_zero_prints_single_line() {
    let output = fracvar(&["weights", "--alpha", "0.5", "--count", "0"]);
    assert_eq!(exit_code(&output), 0);
    let stdout = stdout_of(&output);
    assert_eq!(stdout.lines().count(), 1);
    assert!(stdout.starts_with("0 1.0000000000000000e0"));
}

#[test]
fn weights_rejects_alpha_outside_unit_interval() {
    let output = fracvar(&["weights", "--alpha", "1.5", "--count", "5"]);
    assert_eq!(exit_code(&output), 2);
    let output = fracvar(&["weights", "--alpha", "0", "--count", "5"]);
    assert_eq!(exit_code(&output), 2);
}

fn last_csv_row(stdout: &str) -> Vec<f64> {
    stdout
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|field| field.parse().unwrap())
        .collect()
}

#[test]
fn deriv_left_tabulates_monomial_with_error_column() {
    let output = fracvar(&[
        "deriv", "--alpha", "0.5", "--monomial", "2", "--n", "256", "--side", "left",
    ]);
    assert_eq!(exit_code(&output), 0);
    let stdout = stdout_of(&output);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "t,approx,exact,abs_err");
    assert_eq!(lines.len(), 258, "header plus 257 nodes");
    let last = last_csv_row(&stdout);
    assert_eq!(last[0], 1.0);
    assert!(last[3] < 0.01, "error at t = 1 is {}", last[3]);
}

#[test]
fn deriv_error_halves_when_n_doubles() {
    let error_at_one = |n: &str| {
        let output = fracvar(&["deriv", "--alpha", "0.5", "--monomial", "2", "--n", n]);
        assert_eq!(exit_code(&output), 0);
        last_csv_row(&stdout_of(&output))[3]
    };
    let coarse = error_at_one("64");
    let fine = error_at_one("128");
    let ratio = coarse / fine;
    assert!(
        (1.5..=2.5).contains(&ratio),
        "doubling n gave error ratio {ratio}"
    );
}

#[test]
fn deriv_constant_tracks_analytic_derivative() {
    let output = fracvar(&["deriv", "--alpha", "0.5", "--monomial", "0", "--n", "256"]);
    assert_eq!(exit_code(&output), 0);
    let last = last_csv_row(&stdout_of(&output));
    let exact = last[2];
    assert!((exact - 0.5641895835477563).abs() <= 1e-12);
    assert!(last[3] / exact < 0.05, "relative error {}", last[3] / exact);
}

#[test]
fn deriv_right_and_shifted_sides() {
    let output = fracvar(&[
        "deriv", "--alpha", "0.5", "--monomial", "1", "--n", "8", "--side", "right",
    ]);
    assert_eq!(exit_code(&output), 0);
    let stdout = stdout_of(&output);
    assert_eq!(stdout.lines().next().unwrap(), "t,approx");
    assert_eq!(stdout.lines().count(), 10);

    let output = fracvar(&[
        "deriv", "--alpha", "0.5", "--monomial", "1", "--n", "8", "--side", "shifted",
    ]);
    assert_eq!(exit_code(&output), 0);
    assert_eq!(stdout_of(&output).lines().count(), 9);
}

#[test]
fn deriv_rejects_bad_flags() {
    let output = fracvar(&["deriv", "--alpha", "1.5", "--monomial", "2", "--n", "8"]);
    assert_eq!(exit_code(&output), 2);
    let output = fracvar(&["deriv", "--alpha", "0.5", "--monomial", "-1", "--n", "8"]);
    assert_eq!(exit_code(&output), 2);
    let output = fracvar(&["deriv", "--alpha", "0.5", "--monomial", "2", "--n", "1"]);
    assert_eq!(exit_code(&output), 2);
    let output = fracvar(&[
        "deriv", "--alpha", "0.5", "--monomial", "2", "--n", "8", "--side", "up",
    ]);
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn benchmark_single_row_markdown() {
    let output = fracvar(&["benchmark", "--rows", "3:5", "--format", "md"]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    let row = stdout
        .lines()
        .find(|line| line.starts_with("| 3 | 5 |"))
        .expect("table row present");
    let cells: Vec<&str> = row.split('|').map(str::trim).collect();
    let error: f64 = cells[4].parse().unwrap();
    assert!(
        (error - 1.4787).abs() <= 0.1 * 1.4787,
        "row error {error} is not within 10% of 1.4787"
    );
}

#[test]
fn benchmark_errors_decrease_with_more_mesh_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    let output = fracvar(&[
        "benchmark",
        "--rows",
        "1:5,1:10,1:30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0);
    let table = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "example,n,T,E,ref_E,rel_dev");
    assert_eq!(lines.len(), 4);
    let errors: Vec<f64> = lines[1..]
        .iter()
        .map(|line| line.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert!(errors[1] < errors[0] && errors[2] < errors[1], "errors {errors:?}");
}

#[test]
fn benchmark_parallel_matches_sequential() {
    let sequential = fracvar(&["benchmark", "--rows", "1:5,2:5"]);
    let parallel = fracvar(&["benchmark", "--rows", "1:5,2:5", "--parallel"]);
    assert_eq!(exit_code(&sequential), 0);
    assert_eq!(exit_code(&parallel), 0);
    let errors = |stdout: &str| -> Vec<String> {
        stdout
            .lines()
            .skip(1)
            .map(|line| line.split(',').nth(3).unwrap().to_string())
            .collect()
    };
    assert_eq!(
        errors(&stdout_of(&sequential)),
        errors(&stdout_of(&parallel)),
        "parallel run must reproduce sequential errors exactly"
    );
}

#[test]
fn benchmark_rejects_bad_row_specs() {
    for spec in ["", "15", "4:5", "1:3", "1:x"] {
        let output = fracvar(&["benchmark", "--rows", spec]);
        assert_eq!(exit_code(&output), 2, "spec `{spec}` must be rejected");
    }
}

#[test]
fn help_and_version_exit_cleanly() {
    let output = fracvar(&["--help"]);
    assert_eq!(exit_code(&output), 0);
    assert!(stdout_of(&output).contains("solve"));
    let output = fracvar(&["--version"]);
    assert_eq!(exit_code(&output), 0);
    let output = fracvar(&[]);
    assert_eq!(exit_code(&output), 2);
}
