use std::path::{Path, PathBuf};

use proptest::prelude::*;
use superscar_core::exec::Execution;
use superscar_core::experiment_runner::{
    csv_rows, fit_columns, read_csv, run_sweep, to_json_string, write_csv, write_results, CsvRow, DirectionSpec,
    ExperimentConfig, RunnerError, SweepResult, CSV_COLUMNS,
};
use superscar_core::linear_flow::BudgetConstraint;
use superscar_core::surface_geometry::{SurfaceFile, TranslationSurface};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn torus_config(out: &Path, hbar: Vec<f64>) -> ExperimentConfig {
    let text = format!(
        r#"
surface = "{}"
x0 = [5.0, 5.0]
xi0 = [1.0, 0.0]
eps = 0.05
hbar = {:?}
output_dir = "{}"
"#,
        configs_dir().join("torus10.json").display(),
        hbar,
        out.display()
    );
    ExperimentConfig::from_toml_str(&text).unwrap()
}

#[test]
fn config_defaults_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let c = torus_config(dir.path(), vec![0.04, 0.02, 0.01]);
    assert_eq!(c.polygon, 0);
    assert_eq!(c.t_constant, 1.0);
    assert!((c.t_exponent() - 0.85).abs() < 1e-15);
    assert_eq!(c.points_per_wavelength, 16.0);
    assert_eq!(c.execution, Execution::Parallel);

    let base = "surface = \"s.json\"\nx0 = [0.5, 0.5]\neps = 0.05\noutput_dir = \"o\"\n";
    let with = |extra: &str| ExperimentConfig::from_toml_str(&format!("{base}{extra}"));
    assert!(with("xi0 = \"auto\"\nhbar = [0.1, 0.05]\n").unwrap().xi0.is_auto());
    for bad in [
        "xi0 = \"north\"\nhbar = [0.1, 0.05]\n",
        "xi0 = [1.0, 0.0]\nhbar = [0.05, 0.1]\n",
        "xi0 = [1.0, 0.0]\nhbar = [0.1, 0.1]\n",
        "xi0 = [1.0, 0.0]\nhbar = []\n",
        "xi0 = [1.0, 0.0]\nhbar = [1.5]\n",
        "xi0 = [0.0, 0.0]\nhbar = [0.1]\n",
        "xi0 = [1.0, 0.0]\nhbar = [0.1]\nunknown_key = 3\n",
        "xi0 = [1.0, 0.0]\nhbar = [0.1]\nwindow = \"box\"\n",
    ] {
        assert!(matches!(with(bad), Err(RunnerError::Config(_))), "{bad}");
    }
}

#[test]
fn config_paths_resolve_against_file() {
    let c = ExperimentConfig::from_path(&configs_dir().join("sweep.toml")).unwrap();
    assert!(Path::new(&c.surface).is_file(), "{}", c.surface);
    assert_eq!(c.hbar, vec![0.04, 0.02, 0.01, 0.005]);
    assert_eq!(c.xi0, DirectionSpec::Vector([1.0, 0.0]));
}

#[test]
fn config_hash_tracks_content() {
    let dir = tempfile::tempdir().unwrap();
    let a = torus_config(dir.path(), vec![0.04, 0.02, 0.01]);
    let b = torus_config(dir.path(), vec![0.04, 0.02, 0.01]);
    let c = torus_config(dir.path(), vec![0.04, 0.02, 0.011]);
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), c.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn shipped_surfaces_match_builtins() {
    for (file, builtin) in
        [("torus10.json", TranslationSurface::square_torus(10.0)), ("lshape.json", TranslationSurface::l_surface())]
    {
        let text = std::fs::read_to_string(configs_dir().join(file)).unwrap();
        let loaded = SurfaceFile::from_json(&text).unwrap();
        let expect = SurfaceFile::from_surface(&builtin);
        assert_eq!(loaded.polygons, expect.polygons, "{file}");
        assert_eq!(loaded.identifications, expect.identifications, "{file}");
        let s = loaded.build().unwrap();
        assert_eq!(s.total_area, builtin.total_area);
    }
}

#[test]
fn torus_sweep_writes_rows_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let c = torus_config(dir.path(), vec![0.05, 0.04, 0.03]);
    let r = run_sweep(&c).unwrap();
    assert!(r.all_ok(), "{:?}", r.rows.iter().filter_map(|r| r.error()).collect::<Vec<_>>());
    assert_eq!(r.rows.len(), 3);
    for row in &r.rows {
        let d = row.data().unwrap();
        assert!((d.surface.norm_sq / d.euclidean.norm_sq - 1.0).abs() < 1e-3);
        assert!((d.lambda - row.hbar.powi(-2)).abs() < 1e-9 * d.lambda);
        assert!(d.momentum.as_ref().unwrap().localization_mass > 0.99);
    }
    assert!(r.width_fit.is_some());

    let files = write_results(&r, dir.path()).unwrap();
    let rows = read_csv(std::fs::File::open(&files.csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows, csv_rows(&r));
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&files.manifest).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"], c.hash());
    assert_eq!(manifest["config"], c.to_json_value());
    let fit = fit_columns(std::fs::File::open(&files.csv).unwrap(), "lambda", "width").unwrap();
    assert!((fit.exponent - r.width_fit.unwrap().exponent).abs() < 1e-12);
}

#[test]
fn sweep_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = torus_config(dir.path(), vec![0.05, 0.04, 0.03]);
    c.momentum = false;
    let a = run_sweep(&c).unwrap();
    let b = run_sweep(&c).unwrap();
    let (da, db) = (dir.path().join("a"), dir.path().join("b"));
    let fa = write_results(&a, &da).unwrap();
    let fb = write_results(&b, &db).unwrap();
    assert_eq!(std::fs::read(&fa.csv).unwrap(), std::fs::read(&fb.csv).unwrap());
    assert_eq!(std::fs::read(&fa.manifest).unwrap(), std::fs::read(&fb.manifest).unwrap());

    c.execution = Execution::Sequential;
    let s = run_sweep(&c).unwrap();
    assert_eq!(csv_rows(&s), csv_rows(&a));
}

/// `(1,1)` from the centre of the lower-left square runs into the cone point at `(1, 1)`.
#[test]
fn cone_aimed_rows_record_errors() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "surface = \"{}\"\nx0 = [0.5, 0.5]\nxi0 = [1.0, 1.0]\neps = 0.05\nhbar = [0.05, 0.04, 0.03]\noutput_dir = \"{}\"\n",
        configs_dir().join("lshape.json").display(),
        dir.path().display()
    );
    let c = ExperimentConfig::from_toml_str(&text).unwrap();
    let r = run_sweep(&c).unwrap();
    assert_eq!(r.rows.len(), 3);
    assert!(r.rows.iter().all(|row| row.error().is_some()));
    assert!(!r.all_ok());
    assert!(r.width_fit.is_none());
    let files = write_results(&r, dir.path()).unwrap();
    let text = std::fs::read_to_string(files.csv).unwrap();
    assert_eq!(text.trim_end(), CSV_COLUMNS.join(","));
}

/// `t_constant = 0.1` keeps the time-scale term binding; with `T = ℏL/4` the tube wraps the unit cylinder.
#[test]
fn auto_direction_picks_shortest_cylinder() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "surface = \"{}\"\nx0 = [0.5, 1.5]\nxi0 = \"auto\"\neps = 0.05\nhbar = [0.05]\nt_constant = 0.1\nmomentum = false\noutput_dir = \"{}\"\n",
        configs_dir().join("lshape.json").display(),
        dir.path().display()
    );
    let c = ExperimentConfig::from_toml_str(&text).unwrap();
    let r = run_sweep(&c).unwrap();
    assert_eq!(r.xi0, [1.0, 0.0]);
    assert!(r.rows[0].error().is_none(), "{:?}", r.rows[0].error());
    let d = r.rows[0].data().unwrap();
    assert!((d.cylinder_length - 1.0).abs() < 1e-9);
    assert_eq!(d.binding, BudgetConstraint::TimeScale);

    let mut wrapped = c.clone();
    wrapped.t_constant = 1.0;
    let r = run_sweep(&wrapped).unwrap();
    assert!(r.rows[0].error().unwrap().contains("not certified"), "{:?}", r.rows[0].error());
}

#[test]
fn missing_surface_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = torus_config(dir.path(), vec![0.05]);
    c.surface = dir.path().join("nope.json").display().to_string();
    assert!(matches!(run_sweep(&c), Err(RunnerError::Io(_))));
}

#[test]
fn empty_results_give_header_only_csv() {
    let mut buf = Vec::new();
    write_csv(&[], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "hbar,T,lambda,norm_sq,defect_sq,width,width_times_T\n");
}

#[test]
fn manifest_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = torus_config(dir.path(), vec![0.05]);
    c.momentum = false;
    let r = run_sweep(&c).unwrap();
    let text = to_json_string(&r).unwrap();
    let back: SweepResult = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
    assert!(text.contains(&format!("{:.16e}", r.rows[0].hbar)));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |x| x.is_finite()), -1e3f64..1e3]
}

proptest! {
    #[test]
    fn csv_round_trips(rows in prop::collection::vec(prop::array::uniform7(finite()), 0..6)) {
        let rows: Vec<CsvRow> = rows
            .iter()
            .map(|v| CsvRow { hbar: v[0], t: v[1], lambda: v[2], norm_sq: v[3], defect_sq: v[4], width: v[5], width_times_t: v[6] })
            .collect();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        prop_assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    }
}
