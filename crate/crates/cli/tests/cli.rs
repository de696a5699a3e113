#![allow(clippy::excessive_precision)]

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maser-tur"))
        .args(args)
        .env_remove("MASER_TUR_OUT")
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const FIG2: [&str; 12] = [
    "eval",
    "--model",
    "I",
    "--gamma-h",
    "0.1",
    "--gamma-c",
    "2",
    "--nh",
    "5",
    "--nc",
    "0.027",
    "--lambda",
];

#[test]
fn eval_writes_one_row_with_q() {
    let mut args = FIG2.to_vec();
    args.push("0.2");
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    let q: f64 = row[header.iter().position(|h| *h == "q").unwrap()]
        .parse()
        .unwrap();
    assert!((q - 3.3510808704699651).abs() < 1e-12);
    assert!(text.starts_with("# command: maser-tur eval"));
    assert!(text.contains("# version: ") && text.contains("# timestamp: unset"));
}

#[test]
fn eval_at_threshold_is_degenerate() {
    let o = run(&[
        "eval",
        "--model",
        "I",
        "--gamma-h",
        "0.1",
        "--gamma-c",
        "2",
        "--nh",
        "3",
        "--nc",
        "3",
        "--lambda",
        "0.2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degenerate: zero current at threshold"));
}

#[test]
fn eval_rejects_out_of_range_p() {
    let o = run(&[
        "eval",
        "--model",
        "NIC",
        "--gamma-h",
        "0.3",
        "--gamma-c",
        "0.03",
        "--nh",
        "6",
        "--nc",
        "3",
        "--lambda",
        "0.2",
        "--p",
        "1.5",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("--p") && e.contains("[-1, 1]"), "{e}");
}

#[test]
fn eval_reports_missing_flags_as_invalid_input() {
    let o = run(&["eval", "--model", "I"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--gamma-h"));
    assert_eq!(run(&["eval", "--model", "V"]).status.code(), Some(1));
}

#[test]
fn eval_json_and_degenerate_kernel() {
    let o = run(&[
        "eval",
        "--model",
        "NIC",
        "--gamma-h",
        "0.3",
        "--gamma-c",
        "0.03",
        "--nh",
        "6",
        "--nc",
        "3",
        "--lambda",
        "0.2",
        "--p",
        "-1",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("\"metadata\"") && text.contains("\"q\""));
    let o = run(&[
        "eval",
        "--model",
        "NIC",
        "--gamma-h",
        "0.3",
        "--gamma-c",
        "0.03",
        "--nh",
        "6",
        "--nc",
        "3",
        "--lambda",
        "0.2",
        "--p",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# Model I operating point\nmodel = I\ngamma_h = 0.1\ngamma-c = 2\nnh = 5\nnc = 0.027\nlambda = 0.9\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = stdout(&run(&["eval", "--config", cfg]));
    let mut args = FIG2.to_vec();
    args.push("0.9");
    let from_flags = stdout(&run(&args));
    let row = |s: &str| s.lines().last().unwrap().to_string();
    assert_eq!(row(&from_file), row(&from_flags));
    let overridden = stdout(&run(&["eval", "--config", cfg, "--lambda", "0.2"]));
    assert!(row(&overridden).contains(",2.0000000000000001e-1,"));
    let o = run(&[
        "eval",
        "--config",
        dir.path().join("missing.cfg").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(String::from)
        .collect()
}

#[test]
fn fig2_writes_curves_and_reliability() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["figure", "fig2", "--points", "40", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in [
        "fig2_q_model_i",
        "fig2_q_model_ii",
        "fig2_reliability_model_i",
        "fig2_reliability_model_ii",
    ] {
        let p = dir.path().join(format!("{name}.csv"));
        assert_eq!(data_rows(&p).len(), 40, "{name}");
    }
    let head = fs::read_to_string(dir.path().join("fig2_q_model_i.csv")).unwrap();
    assert!(head.contains("# gamma_c: 2.0000000000000000e0"));
    assert!(head.contains("\nlambda,status,current,variance,sigma,q,reliability\n"));
}

#[test]
fn fig5_writes_three_p_curves() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "figure",
        "fig5",
        "--points",
        "21",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for lam in ["1", "0.5", "0.15"] {
        let rows = data_rows(&dir.path().join(format!("fig5_q_nic_lambda_{lam}.csv")));
        assert_eq!(rows.len(), 21);
        assert!(rows[0].starts_with("-1.0000000000000000e0,ok,"));
        assert!(rows[20].contains(",degenerate-kernel,"));
    }
}

#[test]
fn fig4_writes_reference_and_three_p_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "figure",
        "fig4",
        "--points",
        "10",
        "--format",
        "json",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in [
        "fig4_q_model_i",
        "fig4_q_nic_p_m0.945",
        "fig4_q_nic_p_0",
        "fig4_q_nic_p_0.7",
    ] {
        let text = fs::read_to_string(dir.path().join(format!("{name}.json"))).unwrap();
        assert!(text.contains("\"points\""), "{name}");
    }
}

#[test]
fn fig3_is_reproducible_and_records_the_p_law() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&[
            "figure",
            "fig3",
            "--samples",
            "1000",
            "--seed",
            "7",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in [
        "fig3_histogram_model_i.csv",
        "fig3_histogram_model_ii.csv",
        "fig3_histogram_nic.csv",
    ] {
        let x = fs::read(a.path().join(name)).unwrap();
        assert_eq!(x, fs::read(b.path().join(name)).unwrap(), "{name}");
        let rows = data_rows(&a.path().join(name));
        let total: u64 = rows
            .iter()
            .map(|r| r.rsplit(',').next().unwrap().parse::<u64>().unwrap())
            .sum();
        let text = String::from_utf8(x).unwrap();
        let meta = |key: &str| {
            text.lines()
                .find_map(|l| l.strip_prefix(&format!("# {key}: ")))
                .unwrap()
                .to_string()
        };
        assert_eq!(total, meta("histogrammed").parse::<u64>().unwrap());
        let excluded: u64 = match meta("excluded").as_str() {
            "none" => 0,
            list => list
                .split(';')
                .map(|e| e.split('=').nth(1).unwrap().parse::<u64>().unwrap())
                .sum(),
        };
        assert_eq!(total + excluded, 1000);
        assert_eq!(meta("seed"), "7");
    }
    let nic = fs::read_to_string(a.path().join("fig3_histogram_nic.csv")).unwrap();
    assert!(nic.contains("# p_law: uniform on [-0.999, 0.999]"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_maser-tur"))
        .args([
            "sweep",
            "--model",
            "II",
            "--samples",
            "200",
            "--fix",
            "lambda=0.3",
        ])
        .env("MASER_TUR_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("sweep_histogram_model_ii.csv")).unwrap();
    assert!(text.contains("# fixed_lambda: 2.9999999999999999e-1"));
}

#[test]
fn workers_do_not_change_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let go = |d: &tempfile::TempDir, w: &str| {
        let o = run(&[
            "--workers",
            w,
            "sweep",
            "--model",
            "NIC",
            "--samples",
            "500",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read(d.path().join("sweep_histogram_nic.csv")).unwrap()
    };
    assert_eq!(go(&a, "1"), go(&b, "2"));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let v = run(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn validate_reports_checks_and_discrepancies() {
    let o = run(&["validate", "--draws", "30"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}\n{}", stderr(&o));
    assert!(
        text.contains("scaling-invariance: PASS (max |ΔQ| < 1e−8"),
        "{text}"
    );
    assert!(text.contains("qpop-lower-bound: PASS (min ≥ 2"), "{text}");
    assert!(text.contains("[quarantined]"));
    assert!(text.contains("closed-form discrepancy report"));
    assert!(!text.contains("trajectory-agreement"));
    let o = run(&["validate", "--draws", "30", "--format", "json"]);
    assert!(stdout(&o).contains("\"quarantined\": true"));
}
