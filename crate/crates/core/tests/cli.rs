use std::fs;
use std::process::{Command, Output};

use bwtunnel::cli::MatrixReport;
use bwtunnel::resonance::{ResonanceRoot, SetLabel};
use bwtunnel::scattering::TransmissionGrid;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bwtunnel"))
        .args(args)
        .output()
        .expect("spawn bwtunnel")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn csv_column(text: &str, col: usize) -> Vec<f64> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn scan_alpha_csv_layout() {
    let text = stdout(&["scan-alpha", "--model", "plus", "--steps", "4000"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,k,T,log10T"));
    assert_eq!(text.lines().count(), 4001);
    let alphas = csv_column(&text, 0);
    assert_eq!(alphas[0], -40.0);
    assert_eq!(*alphas.last().unwrap(), 40.0);
    assert!(csv_column(&text, 1).iter().all(|k| *k == 1.0));
}

#[test]
fn scan_alpha_plus_has_eight_maxima() {
    // four total-transmission peaks, three partial ones and the trivial one
    let text = stdout(&["scan-alpha", "--model", "plus", "--k", "1", "--eps", "0.1", "--steps", "4000"]);
    let t = csv_column(&text, 2);
    let maxima = (1..t.len() - 1)
        .filter(|&i| t[i] > t[i - 1] && t[i] >= t[i + 1])
        .count();
    assert_eq!(maxima, 8);
}

#[test]
fn resonances_json_round_trip() {
    let text = stdout(&["resonances", "--model", "plus", "--b", "3", "--sigma", "1"]);
    let roots: Vec<ResonanceRoot> = serde_json::from_str(&text).unwrap();
    let again = bwtunnel::format::to_json_string(&roots).unwrap();
    assert_eq!(again.trim(), text.trim());
    assert!(roots.windows(2).all(|w| w[0].alpha <= w[1].alpha));
    assert_eq!(roots.iter().filter(|r| r.set_label == SetLabel::SigmaPlus).count(), 5);
    assert_eq!(roots.iter().filter(|r| r.set_label == SetLabel::SigmaPrime).count(), 3);
}

#[test]
fn matrix_free_propagation() {
    let text = stdout(&["matrix", "--model", "minus", "--alpha", "0", "--k", "1", "--eps", "0.1", "--b", "3"]);
    let r: MatrixReport = serde_json::from_str(&text).unwrap();
    assert!(r.det_error < 1e-12);
    assert!(r.closed_form_max_rel_diff < 1e-12);
    let w = 0.8; // 2(c1 + c2) eps
    assert!((r.product.m11.re - f64::cos(w)).abs() < 1e-12);
    assert!((r.product.m12.re - f64::sin(w)).abs() < 1e-12);
    assert_eq!(r.transmission, 1.0);
}

#[test]
fn matrix_raw_geometry() {
    let text = stdout(&["matrix", "--model", "plus", "--alpha", "2", "--raw", "1,0.5,3,0.25", "--k", "2"]);
    let r: MatrixReport = serde_json::from_str(&text).unwrap();
    assert_eq!((r.geometry.h, r.geometry.l, r.geometry.d, r.geometry.r), (1.0, 0.5, 3.0, 0.25));
    assert!(r.closed_form_max_rel_diff < 1e-12);
}

#[test]
fn grid_json_matches_csv() {
    let base = ["grid", "--model", "minus", "--sigma", "0", "--alpha-steps", "5", "--k-steps", "4"];
    let csv = stdout(&base);
    let json = stdout(&[&base[..], &["--format", "json"]].concat());
    let g: TransmissionGrid = serde_json::from_str(&json).unwrap();
    assert_eq!(g.alphas.len(), 5);
    assert_eq!(g.ks.len(), 4);
    let t = csv_column(&csv, 2);
    let flat: Vec<f64> = g.values.iter().flatten().copied().collect();
    for (a, b) in t.iter().zip(&flat) {
        assert!((a - b).abs() <= 1e-11 * b.abs().max(1e-300));
    }
}

#[test]
fn converge_csv() {
    let text = stdout(&["converge", "--alpha", "2.2826", "--eps-list", "0.2,0.1,0.05"]);
    assert_eq!(text.lines().next(), Some("eps,alpha_peak,T_peak,alpha_drift"));
    let drift = csv_column(&text, 3);
    assert_eq!(drift.len(), 3);
    assert!(drift[2] < drift[0]);
}

#[test]
fn classify_partial_point() {
    let text = stdout(&["classify", "--model", "plus", "--alpha", "26.87", "--match-tol", "0.01"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["kind_label"]["type"], "PartialTransmission");
    let t = v["kind_label"]["t_limit"].as_f64().unwrap();
    assert!(t > 0.0 && t < 1e-8);
}

#[test]
fn repeated_runs_are_identical() {
    for args in [
        &["scan-alpha", "--model", "minus", "--steps", "300"][..],
        &["resonances", "--model", "minus", "--sigma", "0.5"][..],
        &["converge", "--alpha", "8.77", "--model", "minus"][..],
    ] {
        assert_eq!(run(args).stdout, run(args).stdout, "{args:?}");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("bwtunnel-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("scan.csv");
    let out = run(&["scan-alpha", "--steps", "11", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text, stdout(&["scan-alpha", "--steps", "11"]));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_and_override() {
    let dir = std::env::temp_dir().join(format!("bwtunnel-cfg-it-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cfg.json");
    fs::write(&path, r#"{"model": "minus", "steps": 21, "k": 2}"#).unwrap();
    let from_cfg = stdout(&["scan-alpha", "--config", path.to_str().unwrap(), "--k", "0.5"]);
    let direct = stdout(&["scan-alpha", "--model", "minus", "--steps", "21", "--k", "0.5"]);
    assert_eq!(from_cfg, direct);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["scan-alpha", "--steps", "1"][..],
        &["scan-alpha", "--k", "-1"][..],
        &["grid", "--k-min", "0"][..],
        &["resonances", "--sigma", "-0.5"][..],
        &["converge", "--alpha", "1", "--eps-list", "0.1,0.1"][..],
        &["classify", "--alpha", "50"][..],
        &["matrix"][..],
        &["nonsense"][..],
        &[][..],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn help_exits_0_and_lists_defaults() {
    let text = stdout(&["grid", "--help"]);
    assert!(text.contains("[default: 0.01]"));
    assert!(text.contains("hbar^2/2m = 1"));
}

#[test]
fn computation_errors_exit_1() {
    // no crest anywhere in a window far from every resonance
    let out = run(&["converge", "--alpha", "10", "--radius", "0.001", "--eps-list", "0.02"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
