//! End-to-end tests of the `chbell` binary: exit codes, file formats,
//! config-file precedence, and the result cache.

use std::path::Path;
use std::process::Command;

fn chbell() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chbell"));
    cmd.env_remove("CHBELL_CACHE_DIR");
    cmd.env_remove("CHBELL_VERIFY_TAMPER");
    cmd
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    let status = chbell().args(["curve", "--strategy", "bogus"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2));

    let status = chbell().args(["curve"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2), "missing --strategy");

    let status = chbell().args(["analytic", "--eta", "0.60"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2), "eta below the floor");

    let status = chbell().args(["nonsense"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2));

    let status = chbell()
        .args(["curve", "--strategy", "hardy,maxq", "--format", "csv"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2), "multiple strategies need svg");

    let status = chbell()
        .args(["curve", "--strategy", "maxq", "--samples", "0"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2), "zero samples");

    let status = chbell()
        .args(["table1", "--kmax-coarse", "64", "--kmax", "32"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2), "inverted exponent bounds");
}

#[test]
fn help_exits_0() {
    let out = chbell().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("curve"));
}

#[test]
fn io_errors_exit_3() {
    let out = chbell()
        .args([
            "curve",
            "--strategy",
            "hardy",
            "--ratios",
            "0.5:0.5:1",
            "--out",
            "/nonexistent-dir/x.csv",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn tampered_verify_exits_1() {
    let out = chbell()
        .args(["verify"])
        .env("CHBELL_VERIFY_TAMPER", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("FAIL"));
}

#[test]
fn curve_csv_has_exact_header_and_parses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("hardy.csv");
    let status = chbell()
        .args(["curve", "--strategy", "hardy", "--ratios", "0.1:0.9:9"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = read(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "ratio,q,eta_crit,phi1,phi2,phi3,phi4,nu1,nu2,nu3,nu4,k1,k2,k3,k4"
    );
    assert_eq!(lines.count(), 9);

    // Recompute q from the emitted angles: must match the q column exactly
    // at the printed precision.
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let ratio: f64 = cells[0].parse().unwrap();
        let q: f64 = cells[1].parse().unwrap();
        let angles: Vec<f64> = (3..11).map(|i| cells[i].parse().unwrap()).collect();
        let state = chbell::SchmidtState::from_ratio(ratio).unwrap();
        let config = chbell::MeasurementConfig::from_angles(&[
            angles[0], angles[1], angles[2], angles[3], angles[4], angles[5], angles[6], angles[7],
        ]);
        let fresh = chbell::chmetrics::ch_q(&state, &config).q;
        assert!((fresh - q).abs() < 1e-12, "ratio {ratio}: {fresh} vs {q}");
    }
}

#[test]
fn json_mirror_matches_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let json = dir.path().join("c.json");
    let base = ["curve", "--strategy", "k", "--k", "1,4,4,1", "--ratios", "0.2:0.8:4"];
    assert!(chbell().args(base).arg("--out").arg(&csv).status().unwrap().success());
    assert!(chbell()
        .args(base)
        .args(["--format", "json"])
        .arg("--out")
        .arg(&json)
        .status()
        .unwrap()
        .success());
    let rows: serde_json::Value = serde_json::from_str(&read(&json)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let csv_text = read(&csv);
    let first = csv_text.lines().nth(1).unwrap();
    let cells: Vec<&str> = first.split(',').collect();
    assert_eq!(rows[0]["ratio"].as_f64().unwrap(), cells[0].parse::<f64>().unwrap());
    assert_eq!(rows[0]["q"].as_f64().unwrap(), cells[1].parse::<f64>().unwrap());
    assert_eq!(rows[0]["k"][0].as_u64().unwrap(), 1);
}

#[test]
fn svg_plot_with_multiple_strategies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plot.svg");
    let status = chbell()
        .args([
            "curve",
            "--strategy",
            "hardy,nm",
            "--n",
            "3",
            "--m",
            "10",
            "--metric",
            "eta",
            "--ratios",
            "0.1:0.9:9",
        ])
        .arg("--out")
        .arg(&out)
        .args(["--format", "svg"])
        .status()
        .unwrap();
    assert!(status.success());
    let svg = read(&out);
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains("threshold efficiency"));
    // Companion data files, one per strategy.
    assert!(dir.path().join("plot-hardy.csv").exists());
    assert!(dir.path().join("plot-nm-3-10-.csv").exists() || {
        // the sanitized label trims trailing dashes
        dir.path().join("plot-nm-3-10.csv").exists()
    });
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        "# curve defaults\nstrategy = hardy\nratios = 0.2:0.8:4\nformat = csv\n",
    )
    .unwrap();
    let out_a = dir.path().join("a.csv");
    let status = chbell()
        .args(["curve"])
        .arg("--config")
        .arg(&conf)
        .arg("--out")
        .arg(&out_a)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(read(&out_a).lines().count(), 5);

    // Flag overrides the file's grid.
    let out_b = dir.path().join("b.csv");
    let status = chbell()
        .args(["curve", "--ratios", "0.3:0.7:2"])
        .arg("--config")
        .arg(&conf)
        .arg("--out")
        .arg(&out_b)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(read(&out_b).lines().count(), 3);
}

#[test]
fn cache_returns_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let fresh = dir.path().join("fresh.csv");
    let cached = dir.path().join("cached.csv");
    let args = ["curve", "--strategy", "maxq", "--ratios", "0.5:0.9:3", "--samples", "80", "--seed", "3"];
    assert!(chbell()
        .args(args)
        .arg("--out")
        .arg(&fresh)
        .env("CHBELL_CACHE_DIR", &cache)
        .status()
        .unwrap()
        .success());
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);
    assert!(chbell()
        .args(args)
        .arg("--out")
        .arg(&cached)
        .env("CHBELL_CACHE_DIR", &cache)
        .status()
        .unwrap()
        .success());
    assert_eq!(read(&fresh), read(&cached));

    // And the cached payload matches a cache-free computation bit for bit.
    let free = dir.path().join("free.csv");
    assert!(chbell().args(args).arg("--out").arg(&free).status().unwrap().success());
    assert_eq!(read(&fresh), read(&free));
}

#[test]
fn analytic_rows_monotone_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("an.csv");
    let status = chbell()
        .args(["analytic", "--eta", "0.70:1.0:13"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = read(&out);
    assert_eq!(text.lines().next().unwrap(), "eta,t_star,lambda1,ratio");
    let mut last = f64::NEG_INFINITY;
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let lambda: f64 = cells[2].parse().unwrap();
        assert!(lambda > last);
        last = lambda;
    }
}

#[test]
fn verify_json_report_is_machine_readable() {
    let out = chbell().args(["verify", "--format", "json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
    assert!(report["checks"].as_array().unwrap().len() >= 25);
    for check in report["checks"].as_array().unwrap() {
        assert!(check["residual"].is_number());
        assert!(check["tolerance"].is_number());
    }
}
