//! The `randcert` binary: exit codes, printed certificates and sweep CSVs.

use std::process::Command;

use randcert::guessing::Mode;
use randcert::quantum::NoiseKind;
use randcert::sweep::{run_sweep, CSV_HEADER};

fn randcert(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_randcert"))
        .args(args)
        .output()
        .unwrap()
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("randcert-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn show_dual_prints_verified_certificate() {
    let out = randcert(&[
        "certify",
        "--noise",
        "white",
        "--param",
        "1.0",
        "--case",
        "2",
        "--show-dual",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().filter(|l| l.starts_with("dual ")).count(),
        9,
        "{text}"
    );
    assert!(text.contains("certificate verified"), "{text}");
}

#[test]
fn out_of_range_param_is_usage_error() {
    let out = randcert(&[
        "certify", "--noise", "white", "--param", "-0.1", "--case", "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(
        randcert(&["certify", "--noise", "white", "--param", "0.5", "--case", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        randcert(&["certify", "--noise", "pink", "--param", "0.5", "--case", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn unwritable_export_is_io_error() {
    let out = randcert(&[
        "export",
        "--noise",
        "white",
        "--param",
        "0.9",
        "--case",
        "2",
        "--out",
        "/nonexistent/dir/x.dat-s",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn export_writes_file() {
    let path = tmp("w09c2.dat-s");
    let out = randcert(&[
        "export",
        "--noise",
        "white",
        "--param",
        "0.9",
        "--case",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("internal objective 0.74617"));
    let back = randcert::sdp::sdpa::import_sdpa(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(back.blocks.len(), 4);
}

#[test]
fn case3_beats_case2_from_cli() {
    let hmin = |case: &str| {
        let out = randcert(&[
            "certify",
            "--noise",
            "dephasing",
            "--param",
            "0.6",
            "--case",
            case,
        ]);
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        let line = text
            .lines()
            .find(|l| l.starts_with("hmin_bits"))
            .unwrap()
            .to_string();
        line.split_whitespace()
            .nth(1)
            .unwrap()
            .parse::<f64>()
            .unwrap()
    };
    assert!(hmin("3") >= hmin("2"));
}

#[test]
fn sweep_csv_is_deterministic() {
    let a = tmp("a.csv");
    let b = tmp("b.csv");
    for (path, jobs) in [(&a, "1"), (&b, "3")] {
        let out = randcert(&[
            "sweep",
            "--noise",
            "white",
            "--cases",
            "1,2",
            "--grid",
            "0.6:0.1:0.9",
            "--out",
            path.to_str().unwrap(),
            "--jobs",
            jobs,
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    assert_eq!(text.lines().count(), 1 + 4 * 2);
    let ratios = std::fs::read_to_string(a.with_file_name("a_ratios.csv")).unwrap();
    assert_eq!(ratios.lines().count(), 1 + 4);
}

#[test]
fn sweep_rows_at_anchor_points() {
    let rows = run_sweep(
        NoiseKind::White,
        &"0:0.5:0.5".parse().unwrap(),
        &[Mode::ChshOnly],
        1,
    );
    assert!(rows.iter().all(|r| r.hmin_bits.abs() < 1e-4));

    let rows = run_sweep(NoiseKind::White, &"1:0.1:1".parse().unwrap(), &Mode::ALL, 1);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!((r.hmin_bits - 1.2284).abs() < 1e-3, "{r:?}");
        assert!((r.hmin_bits + r.guessing_upper.log2()).abs() < 1e-12);
    }

    let rows = run_sweep(
        NoiseKind::Dephasing,
        &"0:0.1:0".parse().unwrap(),
        &Mode::ALL,
        1,
    );
    assert!(rows.iter().all(|r| r.hmin_bits.abs() < 1e-4), "{rows:?}");
}
