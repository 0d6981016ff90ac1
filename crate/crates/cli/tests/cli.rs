//! End-to-end tests of the `hetnet` binary: format pinning, header
//! reproducibility, exit codes, and the analytic-vs-simulator cross-check.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_hetnet")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(body.as_bytes()).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

const SINGLE_RAYLEIGH: &str = r#"
[network]
alpha = 4.0
tau = 1.0
noise_psd = 0.0
bandwidth = 1.0

[[network.tiers]]
density = 1e-5
power = 1.0
fading = { kappa = 1e-12, mu = 1.0, m = 1e7, mean_power = 1.0 }
shadowing = { law = "none" }

[sim]
drops = 2000
seed = 7
mode = "equivalent_density"
"#;

#[test]
fn golden_rate_csv_is_pinned() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "net.toml", SINGLE_RAYLEIGH);
    let out = run(&["rate", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let golden = include_str!("golden/rate.csv");
    assert_eq!(text, golden, "rate CSV drifted from the pinned golden file");
}

#[test]
fn csv_format_contract() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "net.toml", SINGLE_RAYLEIGH);
    let out = run(&["rate", "--config", cfg.to_str().unwrap()]);
    let text = stdout(&out);
    let mut data_rows = 0;
    for line in text.lines() {
        if line.starts_with('#') {
            continue;
        }
        data_rows += 1;
        assert!(!line.contains(';'), "CSV must be comma-separated");
        for field in line.split(',') {
            let v: f64 = field.parse().expect("numeric field with '.' decimal");
            assert!(v.is_finite());
        }
    }
    assert_eq!(data_rows, 1, "rate emits a single data row");
    assert!(text.contains("# columns: kappa,mu,m,sigma_l,rate_nats,err_est"));
    assert!(text.contains("# seed: 7"));
    assert!(text.contains("# invocation: "));
}

#[test]
fn output_replays_from_its_own_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "net.toml", SINGLE_RAYLEIGH);
    let out_file = dir.path().join("outage.csv");
    let out = run(&[
        "outage",
        "--config",
        cfg.to_str().unwrap(),
        "--thresholds-db",
        "-3,0,3",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let original = std::fs::read_to_string(&out_file).unwrap();
    // No config file, no flags: everything must come from the header.
    let replay = run(&["replay", out_file.to_str().unwrap()]);
    assert!(replay.status.success(), "stderr: {}", stderr(&replay));
    assert_eq!(stdout(&replay), original, "replay must reproduce the file");
}

#[test]
fn json_lines_round_trip_and_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "net.toml", SINGLE_RAYLEIGH);
    let out_file = dir.path().join("moments.jsonl");
    let out = run(&[
        "moments",
        "--config",
        cfg.to_str().unwrap(),
        "--orders",
        "0.1,0.3",
        "--format",
        "json-lines",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&out_file).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "header + 2 rows");
    for line in &lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.is_object());
    }
    let row: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
    assert!(row["r"].as_f64().unwrap() > 0.0);
    assert!(row["value"].as_f64().unwrap() >= 1.0);
    // json-lines files carry the invocation too
    let replay = run(&["replay", out_file.to_str().unwrap()]);
    assert!(replay.status.success(), "stderr: {}", stderr(&replay));
    assert_eq!(stdout(&replay), text);
}

#[test]
fn exit_2_on_malformed_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[network\nalpha = ");
    let out = run(&["rate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("config parse error"));
}

#[test]
fn exit_2_names_offending_parameter() {
    let bad = SINGLE_RAYLEIGH.replace("density = 1e-5", "density = -1e-5");
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &bad);
    let out = run(&["rate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("density"),
        "message must name the parameter: {}",
        stderr(&out)
    );
}

#[test]
fn exit_2_on_bad_sweep_path() {
    let body = format!(
        "{SINGLE_RAYLEIGH}\n[sweep]\nmetric = \"rate\"\npath = \"tiers[0].fading.nonsense\"\ngrid = [1.0, 2.0]\n"
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "net.toml", &body);
    let out = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("tiers[0].fading.nonsense"),
        "message must name the path: {}",
        stderr(&out)
    );
}

#[test]
fn exit_3_on_numeric_nonconvergence() {
    // Non-integer μ and m deny the gamma-mixture fallback, and κ this large
    // keeps the Laguerre tail far above the acceptance threshold.
    let slow = SINGLE_RAYLEIGH.replace(
        "kappa = 1e-12, mu = 1.0, m = 1e7",
        "kappa = 30.0, mu = 2.5, m = 1.3",
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "net.toml", &slow);
    let out = run(&["rate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
}

#[test]
fn sweep_rows_follow_grid_order() {
    let body = format!(
        "{SINGLE_RAYLEIGH}\n[sweep]\nmetric = \"outage:0.0\"\npath = \"tiers[0].fading.mu\"\ngrid = [3.0, 1.0, 2.0]\n"
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "net.toml", &body);
    let out = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let firsts: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(firsts, vec![3.0, 1.0, 2.0]);
}

#[test]
fn validate_is_green_on_rayleigh_single_tier() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "net.toml", SINGLE_RAYLEIGH);
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows.len() >= 6, "rate + 4 outage + association checks");
    for row in rows {
        assert!(row.ends_with(",pass"), "check failed: {row}");
    }
}

#[test]
fn simulate_writes_seventeen_digit_drop_log() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "net.toml", SINGLE_RAYLEIGH);
    let log = dir.path().join("drops.ndjson");
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--metric",
        "outage:1.0",
        "--drops",
        "100",
        "--log",
        log.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&log).unwrap();
    assert_eq!(text.lines().count(), 100);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert!(first["sinr"].as_f64().unwrap() > 0.0);
    // fixed scientific notation with 16 digits after the decimal point
    assert!(text.lines().next().unwrap().contains("e"));
    let sinr_field = text
        .lines()
        .next()
        .unwrap()
        .split("\"sinr\":")
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .to_string();
    let mantissa = sinr_field.split('e').next().unwrap();
    let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
    assert_eq!(digits, 17, "17 significant digits, got '{sinr_field}'");
}

#[test]
fn seed_flag_changes_simulation_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "net.toml", SINGLE_RAYLEIGH);
    let a = stdout(&run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--drops",
        "1000",
        "--seed",
        "1",
    ]));
    let b = stdout(&run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--drops",
        "1000",
        "--seed",
        "1",
    ]));
    let c = stdout(&run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--drops",
        "1000",
        "--seed",
        "2",
    ]));
    assert_eq!(a, b, "same seed must be bit-identical");
    assert_ne!(a, c, "different seed must differ");
    assert!(a.contains("# seed: 1") && c.contains("# seed: 2"));
}

#[test]
fn shipped_example_config_loads() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/two_tier.toml");
    let out = run(&["coeffs", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    // C_0 = 1 always
    let first_row = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(first_row, "0,1e0");
}
