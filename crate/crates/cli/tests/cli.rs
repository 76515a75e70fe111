use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use superscar_core::gaussian_wavepacket::{SemiclassicalParams, TimeWindow};
use superscar_core::linear_flow::UnitDirection;
use superscar_core::spectral_width::spectral_width_report;
use superscar_core::surface_geometry::Vec2;
use superscar_core::surface_quasimode::{FieldKind, SampledField};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_superscar"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, surface: &str, body: &str) -> PathBuf {
    let path = dir.join("c.toml");
    let text = format!("surface = \"{}\"\n{body}output_dir = \"out\"\n", configs().join(surface).display());
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "torus10.json",
        "x0 = [5.0, 5.0]\nxi0 = [1.0, 0.0]\neps = 0.05\nhbar = [0.05, 0.04, 0.03]\nmomentum = false\n",
    );
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = dir.path().join("out/sweep.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "hbar,T,lambda,norm_sq,defect_sq,width,width_times_T");
    assert_eq!(lines.count(), 3);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);

    let fit = run(&["fit", csv.to_str().unwrap(), "--x", "lambda", "--y", "width"]);
    assert!(fit.status.success());
    let fit: serde_json::Value = serde_json::from_str(&stdout(&fit)).unwrap();
    let a = fit["exponent"].as_f64().unwrap();
    let b = manifest["width_fit"]["exponent"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
}

#[test]
fn failing_rows_give_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "lshape.json",
        "x0 = [0.5, 0.5]\nxi0 = [1.0, 1.0]\neps = 0.05\nhbar = [0.05, 0.04]\nmomentum = false\n",
    );
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let text = std::fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn bad_input_is_an_error() {
    assert_eq!(run(&["fit", "/nonexistent.csv"]).status.code(), Some(2));
    assert!(!run(&["flow", "trace", "--x0", "1"]).status.success());
    assert!(!run(&["spectral", "sweep", "--hbar-grid", "0.1", "--window", "box"]).status.success());
}

#[test]
fn spectral_sweep_matches_library() {
    let o = run(&["spectral", "sweep", "--hbar-grid", "0.05,0.02", "--epsilon", "0.05", "--window", "bump"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let (h, t) = (r[0], r[1]);
        assert!((t - h.powf(0.85)).abs() <= 1e-15 * t);
        let p = SemiclassicalParams::new(h, 0.05, Vec2::zeros(), UnitDirection::horizontal()).unwrap();
        let rep = spectral_width_report(&p, &TimeWindow::bump(t).unwrap()).unwrap();
        assert_eq!(r[5], rep.width);
        assert_eq!(r[6], rep.width_times_t);
    }
}

#[test]
fn flow_subcommands_emit_json() {
    let l = configs().join("lshape.json");
    let l = l.to_str().unwrap();
    let o = run(&["flow", "trace", "--surface", l, "--x0", "0.3,0.2", "--dir", "0.7,0.8", "--length", "10"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["terminal"]["kind"], "hit_singularity");

    let o = run(&["flow", "cylinder", "--surface", l, "--x0", "0.5,1.5", "--dir", "-1,0", "--max-length", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["length"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let o = run(&["flow", "search", "--surface", l, "--x0", "0.5,1.5", "--bound", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["direction"], serde_json::json!([1.0, 0.0]));
}

#[test]
fn field_round_trip_through_measure() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("f.bin");
    let torus = configs().join("torus10.json");
    let common = ["--surface", torus.to_str().unwrap(), "--x0", "5,5", "--xi0", "1,0", "--hbar", "0.05"];
    let mut args = vec!["surface-quasimode", "eval"];
    args.extend(common);
    args.extend(["--out", field.to_str().unwrap()]);
    assert!(run(&args).status.success());
    let f = SampledField::read(&field).unwrap();
    assert_eq!(f.header.kind, FieldKind::Value);
    assert_eq!(f.header.hbar, 0.05);

    let o = run(&["measure", "momentum", field.to_str().unwrap(), "--threshold", "0"]);
    assert!(o.status.success());
    let total: f64 = stdout(&o).lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9, "{total}");

    let o = run(&["measure", "weyl", field.to_str().unwrap(), "--xi0", "1,0"]);
    let text = stdout(&o);
    let one = text.lines().find(|l| l.starts_with("const(1)")).unwrap();
    assert!(one.split(',').nth(3).unwrap().parse::<f64>().unwrap() < 1e-12);

    let mut args = vec!["surface-quasimode", "norms"];
    args.extend(common);
    let v: serde_json::Value = serde_json::from_str(&stdout(&run(&args))).unwrap();
    let (s, e) = (v["surface"]["norm_sq"].as_f64().unwrap(), v["euclidean"]["norm_sq"].as_f64().unwrap());
    assert!((s / e - 1.0).abs() < 1e-3);
}

#[test]
fn fold_reports_four_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("fold.bin");
    let o = run(&[
        "measure",
        "fold",
        "--vertices",
        "0,0;1,0;1,1;0,1",
        "--x0",
        "0.5,0.001",
        "--xi0",
        "2,1",
        "--hbar",
        "0.02",
        "--field-out",
        field.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let masses: Vec<f64> = stdout(&o).lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(masses.len(), 4);
    assert!(masses.iter().all(|m| (m - 0.25).abs() < 0.025), "{masses:?}");
    assert_eq!(SampledField::read(&field).unwrap().header.kind, FieldKind::Folded);
}
