//! Integration tests for the `slit-tomo` binary: exit codes, determinism,
//! and the simulate -> reconstruct round trips.

use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64 as C64;
use slit_tomo::fixtures::reference_geometry_intermediate;
use slit_tomo::optics::AmplitudeModel;
use slit_tomo::quantum::{DensityMatrix, PureState};
use slit_tomo::tomo::octahedral_points;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slit-tomo"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn validate_passes_and_prints_published_values() {
    let out = run(&["validate"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("0.961"), "{text}");
    assert!(text.contains("0.824"), "{text}");
    assert!(text.contains("all checks passed"), "{text}");
}

#[test]
fn fidelity_of_bundled_matrices() {
    let out = run(&["fidelity", "--state", "reference-pauli"]);
    assert_eq!(out.status.code(), Some(0));
    let f: f64 = stdout(&out).trim().parse().unwrap();
    assert!((f - 0.961).abs() < 0.002, "fidelity {f}");
}

#[test]
fn simulate_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for (path, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let out = run(&[
            "simulate",
            "--state",
            "psi-slits",
            "--arm-b-x",
            "100um",
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    }
    let (ta, tb, tc) = (
        std::fs::read_to_string(&a).unwrap(),
        std::fs::read_to_string(&b).unwrap(),
        std::fs::read_to_string(&c).unwrap(),
    );
    assert_eq!(ta, tb);
    assert_ne!(ta, tc);
}

fn write_density(path: &Path, rho: &DensityMatrix) {
    slit_tomo::io::write_density(path, rho).unwrap();
}

#[test]
fn simulate_then_pattern_reconstruct_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let state_path = dir.path().join("state.dat");
    let scan_path = dir.path().join("scan.csv");
    let sq = 1.0 / 2.0_f64.sqrt();
    let psi = PureState::from_slice(&[C64::new(sq, 0.0), C64::new(0.0, sq)]);
    write_density(&state_path, &DensityMatrix::from_pure(&psi));

    let out = run(&[
        "simulate",
        "--state",
        state_path.to_str().unwrap(),
        "--shots",
        "200000",
        "--window",
        "1.4mm",
        "--step",
        "4um",
        // The closed-form inversion assumes a point detector; the top-hat
        // convolution of a finite slit dilutes the fringes.
        "--detector-width",
        "1um",
        "--out",
        scan_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));

    let out = run(&[
        "reconstruct",
        "pattern",
        "--scan",
        scan_path.to_str().unwrap(),
        "--target",
        state_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    let fid_line = text
        .lines()
        .find(|l| l.starts_with("fidelity vs"))
        .expect("fidelity line");
    let f: f64 = fid_line.rsplit('=').next().unwrap().trim().parse().unwrap();
    assert!(f > 0.98, "round-trip fidelity {f}");
}

#[test]
fn simulate_then_scan_reconstruct_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = reference_geometry_intermediate();
    let points = octahedral_points(&g, AmplitudeModel::Sinc).unwrap();
    let mut scan_args: Vec<String> = vec!["reconstruct".into(), "scan".into(), "--scans".into()];
    for (i, &x_b) in points.iter().enumerate() {
        let path = dir.path().join(format!("scan{i}.csv"));
        let out = run(&[
            "simulate",
            "--state",
            "psi-slits",
            // `=` keeps clap from reading a negative position as a flag.
            &format!("--arm-b-x={x_b}m"),
            "--shots",
            "20000",
            "--seed",
            &i.to_string(),
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        scan_args.push(path.to_str().unwrap().into());
    }
    scan_args.push("--poisson-weighted".into());
    scan_args.push("--target".into());
    scan_args.push("psi-slits".into());
    let out = bin().args(&scan_args).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    let fid_line = text
        .lines()
        .find(|l| l.starts_with("fidelity vs"))
        .expect("fidelity line");
    let f: f64 = fid_line.rsplit('=').next().unwrap().trim().parse().unwrap();
    // Equal shots per scan lose the relative flux, which costs fidelity for
    // an entangled input; this guards the plumbing, not the statistics.
    assert!(f > 0.75, "pipeline fidelity {f}");
}

#[test]
fn trajectory_prints_csv() {
    let out = run(&["trajectory"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x_m,bx,by,bz,azimuth_unwrapped"));
    assert!(lines.count() > 50);
}

#[test]
fn usage_and_config_errors_exit_2() {
    // Bare number without a length unit.
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("x.csv");
    let out = run(&[
        "simulate",
        "--z",
        "1.8",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Geometry file missing a required key.
    let geom = dir.path().join("geom.cfg");
    std::fs::write(&geom, "lambda = 810nm\nslit_width = 40um\n").unwrap();
    let out = run(&["trajectory", "--geometry", geom.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // Nonexistent input file.
    let out = run(&["reconstruct", "pattern", "--scan", "/nonexistent.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_1() {
    // A scan window too narrow for the pattern inversion.
    let dir = tempfile::tempdir().unwrap();
    let scan_path = dir.path().join("narrow.csv");
    let state_path = dir.path().join("state.dat");
    write_density(&state_path, &DensityMatrix::maximally_mixed(2));
    let out = run(&[
        "simulate",
        "--state",
        state_path.to_str().unwrap(),
        "--window",
        "400um",
        "--out",
        scan_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let out = run(&[
        "reconstruct",
        "pattern",
        "--scan",
        scan_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // Two-qubit state without an arm-B position.
    let out_path = dir.path().join("y.csv");
    let out = run(&[
        "simulate",
        "--state",
        "psi-slits",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
