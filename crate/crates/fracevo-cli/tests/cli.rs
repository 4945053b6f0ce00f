//! Black-box tests against the compiled binary: exit codes, output grammar,
//! determinism across thread counts, and the frozen kernel value.

use std::process::{Command, Output};

fn fracevo(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracevo"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("FRACEVO_THREADS", n),
        None => cmd.env_remove("FRACEVO_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn usage_errors_name_the_flag_and_exit_2() {
    let out = fracevo(
        &["kernel", "--weight", "constant", "--t", "1", "--bogus", "3"],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--bogus"));

    let out = fracevo(
        &["solve", "--weight", "discrete:0.5,0.7:1.0", "--t", "1"],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--weight"));
}

#[test]
fn help_exits_zero() {
    let out = fracevo(&["--help"], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).contains("kernel"));
}

#[test]
fn kernel_csv_carries_frozen_value() {
    // k1 for the half-order weight at t = 1 is 1/sqrt(pi).
    let out = fracevo(
        &["kernel", "--weight", "discrete:0.5", "--which", "k1", "--t", "1"],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("t,value"), "{text}");
    assert!(
        text.contains("1.00000000000000e0,5.64189583547756e-1"),
        "{text}"
    );
}

#[test]
fn output_is_byte_identical_across_thread_counts() {
    let args = [
        "solve",
        "--weight",
        "discrete:0.7,0.2:1.5",
        "--generator",
        "laplacian1d:8:1",
        "--t",
        "0.1:2:6",
        "--method",
        "resolvent",
    ];
    let one = fracevo(&args, Some("1"));
    let four = fracevo(&args, Some("4"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);

    let kargs = ["kernel", "--weight", "constant", "--which", "k2", "--t", "0.1:10:9:log"];
    let a = fracevo(&kargs, Some("1"));
    let b = fracevo(&kargs, Some("4"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_format_parses_with_named_columns() {
    let out = fracevo(
        &[
            "density", "--weight", "constant", "--kind", "rl", "--t", "1", "--tau", "0:6:13",
            "--format", "json",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).expect("valid json");
    let columns: Vec<&str> = v["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(columns, ["t", "tau", "phi"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 13);
}

#[test]
fn verify_convolution_reports_pass() {
    let out = fracevo(&["verify", "--suite", "convolution", "--weight", "constant"], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).contains("PASS"));
}

#[test]
fn zero_generator_rows_stay_at_initial_state() {
    let out = fracevo(
        &["solve", "--weight", "discrete:0.5", "--generator", "scalar:0", "--t", "0.5:2:4"],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    for line in stdout_of(&out).lines() {
        if line.starts_with('#') || line.starts_with("t,") {
            continue;
        }
        let u: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((u - 1.0).abs() < 1e-10, "{line}");
    }
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let path = std::env::temp_dir().join(format!("fracevo_cli_test_{}.csv", std::process::id()));
    let path_str = path.to_str().unwrap();
    let args = ["coeffs", "--weight", "discrete:0.5", "--s", "2", "--n", "6"];
    let direct = fracevo(&args, None);
    let mut with_out: Vec<&str> = args.to_vec();
    with_out.extend_from_slice(&["--out", path_str]);
    let redirected = fracevo(&with_out, None);
    assert_eq!(redirected.status.code(), Some(0));
    let written = std::fs::read(&path).expect("output file exists");
    std::fs::remove_file(&path).ok();
    assert_eq!(written, direct.stdout);
}
