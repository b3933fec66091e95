use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn ovf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ovf")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const PARAMS: &str = "l_mm = 5.0\nalpha_deg = 30.0\nn_units = 5\n";

fn scenario(width: f64) -> String {
    format!(
        "left_surface = \"ovf-medium\"\nright_surface = \"ovf-medium\"\n\n[object]\nshape = \"square\"\nwidth = {width}\n\n[jitter]\ntranslation_mm = 0.0\nrotation_deg = 0.0\n"
    )
}

#[test]
fn design_sweep_writes_grid() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = ovf(&["design", "sweep", "--alpha-min", "0.2", "--alpha-max", "0.6", "--l-min", "3", "--l-max", "8", "--steps", "5", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("alpha_rad,l_mm,delta_h_mm"));
    assert_eq!(text.lines().count(), 26);
}

#[test]
fn design_sweep_rejects_reversed_bounds() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = ovf(&["design", "sweep", "--alpha-min", "0.6", "--alpha-max", "0.2", "--l-min", "3", "--l-max", "8", "--steps", "5", "--out", s(&out)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn design_report_prints_thicknesses() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "p.toml", PARAMS);
    let o = ovf(&["design", "report", "--params", s(&params)]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for key in ["h_HF", "h_LF", "delta_h", "fold_travel", "peak_force"] {
        assert!(text.contains(key), "{key} missing from {text}");
    }
}

#[test]
fn missing_params_file_is_io_error() {
    let o = ovf(&["design", "report", "--params", "/nonexistent/p.toml"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn malformed_params_are_validation_errors() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "p.toml", "l_mm = \"five\"\n");
    assert_eq!(code(&ovf(&["design", "report", "--params", s(&params)])), 1);
    let bad = write(&dir, "q.toml", "l_mm = 5.0\nalpha_deg = 120.0\nn_units = 5\n");
    assert_eq!(code(&ovf(&["design", "report", "--params", s(&bad)])), 1);
}

#[test]
fn unknown_flags_are_validation_errors() {
    assert_eq!(code(&ovf(&["design", "sweep", "--bogus"])), 1);
    assert_eq!(code(&ovf(&["sim", "run", "--plan", "spin"])), 1);
}

#[test]
fn profile_emit_svg_and_csv() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "p.toml", PARAMS);
    let svg = dir.path().join("hf.svg");
    let o = ovf(&["profile", "emit", "--params", s(&params), "--mode", "hf", "--format", "svg", "--out", s(&svg)]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("<line"));

    let csv = dir.path().join("lf.csv");
    let o = ovf(&["profile", "emit", "--params", s(&params), "--mode", "lf", "--format", "csv", "--out", s(&csv)]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("x_mm,y_mm,label"));
    assert!(text.lines().count() > 10);
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "p.toml", PARAMS);
    let out = dir.path().join("missing").join("x.csv");
    let o = ovf(&["profile", "emit", "--params", s(&params), "--mode", "hf", "--format", "csv", "--out", s(&out)]);
    assert_eq!(code(&o), 3);
}

#[test]
fn sim_run_writes_trajectory() {
    let dir = TempDir::new().unwrap();
    let sc = write(&dir, "s.toml", &scenario(50.0));
    let out = dir.path().join("traj.csv");
    let o = ovf(&["sim", "run", "--scenario", s(&sc), "--plan", "translate", "--direction", "distal", "--cycles", "1", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().count() > 10);
    assert!(String::from_utf8(o.stdout).unwrap().contains("translation"));
}

#[test]
fn sim_run_reports_failed_grasp_as_jam() {
    let dir = TempDir::new().unwrap();
    let sc = write(&dir, "s.toml", &scenario(95.0));
    let out = dir.path().join("traj.csv");
    let o = ovf(&["sim", "run", "--scenario", s(&sc), "--plan", "rotate", "--direction", "clockwise", "--cycles", "1", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sim_run_rejects_mismatched_direction() {
    let dir = TempDir::new().unwrap();
    let sc = write(&dir, "s.toml", &scenario(50.0));
    let out = dir.path().join("traj.csv");
    let o = ovf(&["sim", "run", "--scenario", s(&sc), "--plan", "translate", "--direction", "clockwise", "--cycles", "1", "--out", s(&out)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn bench_run_writes_one_row_per_cell() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "b.toml",
        "surfaces = [\"constant-lf\", \"ovf-medium\"]\ntrials = 1\nplans = [\"translate\"]\n\n[[objects]]\nshape = \"square\"\nwidth = 50.0\n",
    );
    let out = dir.path().join("bench.csv");
    let o = ovf(&["bench", "run", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
}
