//! End-to-end CLI checks: exit-code contract (0 success, 1 analysis error,
//! 2 usage error), deterministic outputs, and CSV format guarantees.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_filterbench"))
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("filterbench_cli_{name}"))
}

fn write_tmp(name: &str, contents: &str) -> PathBuf {
    let path = tmp(name);
    fs::write(&path, contents).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

const RC_NETLIST: &str =
    "V1 1 0 DC 1 AC 1\nR1 1 2 1k\nC1 2 0 1u\n.ac dec 20 1 100k\n.tran 10u 10m\n.probe 2\n";

#[test]
fn check_exit_codes() {
    let good = write_tmp("check_good.cir", RC_NETLIST);
    let out = bin().arg("check").arg(&good).output().unwrap();
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty(), "clean check should print nothing");

    let dup = write_tmp("check_dup.cir", "V1 1 0 DC 1\nR1 1 0 1k\nr1 1 0 2k\n");
    let out = bin().arg("check").arg(&dup).output().unwrap();
    assert_eq!(code(&out), 1);

    let out = bin()
        .arg("check")
        .arg(tmp("definitely_missing.cir"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    let syntax = write_tmp("check_syntax.cir", "V1 1 0 DC 1\nR1 1 0 -5\n");
    let out = bin().arg("check").arg(&syntax).output().unwrap();
    assert_eq!(code(&out), 2);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "stderr: {err}");
}

#[test]
fn ac_csv_hits_analytic_corner() {
    let netlist = write_tmp("ac_rc.cir", RC_NETLIST);
    let out_csv = tmp("ac_rc.csv");
    let out = bin()
        .arg("ac")
        .arg(&netlist)
        .arg("--out")
        .arg(&out_csv)
        .args([
            "--fstart",
            "1",
            "--fstop",
            "159.15494309189535",
            "--ppd",
            "10",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(&out_csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "freq_hz,mag_db,phase_deg");
    let last = lines.last().unwrap();
    let cols: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
    assert!((cols[0] - 159.15494309189535).abs() < 1e-6);
    assert!((cols[1] + 3.0103).abs() < 1e-3, "mag at corner {}", cols[1]);
    assert!((cols[2] + 45.0).abs() < 0.01, "phase at corner {}", cols[2]);
}

#[test]
fn ac_missing_probe_is_analysis_error() {
    let netlist = write_tmp(
        "ac_noprobe.cir",
        "V1 1 0 DC 1 AC 1\nR1 1 2 1k\nC1 2 0 1u\n.ac dec 10 1 1e5\n",
    );
    let out = bin()
        .arg("ac")
        .arg(&netlist)
        .arg("--out")
        .arg(tmp("ac_noprobe.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("probe"), "stderr: {err}");
}

#[test]
fn ac_no_ac_source_is_analysis_error() {
    let netlist = write_tmp(
        "ac_nosrc.cir",
        "V1 1 0 DC 1\nR1 1 2 1k\nC1 2 0 1u\n.ac dec 10 1 1e5\n.probe 2\n",
    );
    let out = bin()
        .arg("ac")
        .arg(&netlist)
        .arg("--out")
        .arg(tmp("ac_nosrc.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn tran_csv_has_63_percent_point() {
    let netlist = write_tmp("tran_rc.cir", RC_NETLIST);
    let out_csv = tmp("tran_rc.csv");
    let out = bin()
        .arg("tran")
        .arg(&netlist)
        .arg("--out")
        .arg(&out_csv)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(&out_csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "time_s,v_2");
    let row = lines
        .map(|l| {
            let cols: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
            cols
        })
        .min_by(|a, b| (a[0] - 1e-3).abs().total_cmp(&(b[0] - 1e-3).abs()))
        .unwrap();
    assert!((row[1] - 0.6321).abs() < 5e-4, "v(tau) = {}", row[1]);
}

#[test]
fn tran_bad_dt_rejected_at_parse() {
    let netlist = write_tmp("tran_bad.cir", "V1 1 0 DC 1\nR1 1 0 1k\n.tran 0 1\n");
    let out = bin()
        .arg("tran")
        .arg(&netlist)
        .arg("--out")
        .arg(tmp("tran_bad.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn hysteresis_flag_validation_and_areas() {
    let out = bin()
        .args(["hysteresis", "--amplitude", "0", "--out"])
        .arg(tmp("hyst_bad.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    let out = bin()
        .args(["hysteresis", "--freq", "1,10,100", "--out"])
        .arg(tmp("hyst.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let report = String::from_utf8(out.stdout).unwrap();
    let areas: Vec<f64> = report
        .lines()
        .filter(|l| l.starts_with("loop_area"))
        .map(|l| l.split(':').nth(1).unwrap().trim().parse().unwrap())
        .collect();
    assert_eq!(areas.len(), 3);
    assert!(areas[0] > areas[1] && areas[1] > areas[2], "{areas:?}");
    assert!(report.contains("memristance_within_bounds: true"));
    let csv = fs::read_to_string(tmp("hyst.csv")).unwrap();
    assert!(csv.starts_with("t_s,v_V,i_A\n"));
}

#[test]
fn tf_exit_paths() {
    // Flat unit transfer function: no cutoff, analysis error.
    let out = bin()
        .args(["tf", "--num", "1", "--den", "1", "--out"])
        .arg(tmp("tf_unit.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("NoCutoffFound"), "stderr: {err}");

    // First-order pole: cutoff matches the analytic corner.
    let out = bin()
        .args([
            "tf",
            "--num",
            "1",
            "--den",
            "1,0.00159154943091895",
            "--out",
        ])
        .arg(tmp("tf_first.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let report = String::from_utf8(out.stdout).unwrap();
    let fc: f64 = report
        .lines()
        .find(|l| l.starts_with("cutoff_hz:"))
        .unwrap()
        .split(':')
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((fc - 100.0).abs() < 1e-2, "fc = {fc}");

    // Missing coefficient flags: usage error.
    let out = bin()
        .args(["tf", "--num", "1", "--out"])
        .arg(tmp("tf_missing.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn outputs_are_deterministic() {
    let run = |tag: &str| {
        let out_csv = tmp(&format!("det_{tag}.csv"));
        let out = bin()
            .args(["tf", "--builtin", "gaussian4", "--out"])
            .arg(&out_csv)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
        (out.stdout, fs::read(&out_csv).unwrap())
    };
    let (stdout_a, csv_a) = run("a");
    let (stdout_b, csv_b) = run("b");
    assert_eq!(csv_a, csv_b, "CSV bytes differ between identical runs");
    // Reports differ only in the CSV path we chose; compare the rest.
    let strip = |s: &[u8]| {
        String::from_utf8(s.to_vec())
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("csv:"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&stdout_a), strip(&stdout_b));
}

#[test]
fn sallen_key_paths() {
    let poles = write_tmp(
        "poles_ok.txt",
        "# bessel pairs\n1117.443089 0.505991\n1151.137731 0.559609\n1227.229090 0.710852\n1375.217249 1.225669\n",
    );
    let plain_csv = tmp("sk_plain.csv");
    let out = bin()
        .args(["sallen-key", "--poles"])
        .arg(&poles)
        .arg("--out")
        .arg(&plain_csv)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = String::from_utf8(out.stdout).unwrap();
    let slope: f64 = report
        .lines()
        .find(|l| l.starts_with("top_decade_slope"))
        .unwrap()
        .split(':')
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((slope + 160.0).abs() < 8.0, "slope {slope}");

    // Substitution leaves the CSV byte-identical.
    let sub_csv = tmp("sk_sub.csv");
    let out = bin()
        .args(["sallen-key", "--memristor", "--poles"])
        .arg(&poles)
        .arg("--out")
        .arg(&sub_csv)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(&plain_csv).unwrap(), fs::read(&sub_csv).unwrap());

    // Empty pole table: usage error.
    let empty = write_tmp("poles_empty.txt", "# nothing here\n");
    let out = bin()
        .args(["sallen-key", "--poles"])
        .arg(&empty)
        .arg("--out")
        .arg(tmp("sk_empty.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    // Substitution out of range: analysis error naming the resistor.
    let out = bin()
        .args(["sallen-key", "--memristor", "--c2", "1e-9", "--poles"])
        .arg(&poles)
        .arg("--out")
        .arg(tmp("sk_range.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("RA1"), "stderr: {err}");
}

#[test]
fn fit_paths() {
    // Default run reproduces the embedded fit and exports the dataset.
    let export = tmp("fit_export.csv");
    let out = bin()
        .args(["fit", "--export"])
        .arg(&export)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("slope: -9.0866"), "report: {report}");
    assert!(report.contains("intercept: 38.7580"));
    let exported = fs::read_to_string(&export).unwrap();
    assert!(exported.starts_with("freq_khz,mag_db\n"));
    assert_eq!(exported.lines().count(), 21);

    // Feeding the export back reproduces the same fit.
    let out = bin().args(["fit", "--csv"]).arg(&export).output().unwrap();
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("slope: -9.0866"));

    // Exact two-point fit.
    let e = std::f64::consts::E;
    let two = write_tmp(
        "fit_two.csv",
        &format!("freq_khz,mag_db\n{e},0\n{},-1\n", e * e),
    );
    let out = bin().args(["fit", "--csv"]).arg(&two).output().unwrap();
    assert_eq!(code(&out), 0);
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("slope: -1.0000"), "{report}");
    assert!(report.contains("intercept: 1.0000"));

    // Single point: analysis error.
    let one = write_tmp("fit_one.csv", "freq_khz,mag_db\n1.0,0.0\n");
    let out = bin().args(["fit", "--csv"]).arg(&one).output().unwrap();
    assert_eq!(code(&out), 1);

    // Malformed CSV: usage error.
    let bad = write_tmp("fit_bad.csv", "wrong,header\n1,2\n");
    let out = bin().args(["fit", "--csv"]).arg(&bad).output().unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn builtin_ladder_runs_and_reports_peak() {
    let out_csv = tmp("ladder.csv");
    let out = bin()
        .args(["ac", "--builtin", "ladder", "--out"])
        .arg(&out_csv)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("peak_hz"), "report: {report}");
    assert!(report.contains("cutoff_hz"));
    let csv = fs::read_to_string(&out_csv).unwrap();
    assert!(csv.starts_with("freq_hz,mag_db,phase_deg\n"));
    // Low-pass shape: final magnitude far below the first row's.
    let rows: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(rows.last().unwrap() < &(rows[0] - 40.0));
}
