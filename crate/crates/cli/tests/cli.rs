use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use archmark_core::mesh::testing::height_field;
use archmark_core::mesh::write_binary_stl;
use archmark_core::pipeline::LandmarkReport;
use tempfile::TempDir;

fn archmark(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_archmark")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a spec and renders it to STL; returns the STL and truth paths.
fn synth(dir: &TempDir, name: &str, spec: &str) -> (PathBuf, PathBuf) {
    let spec_path = dir.path().join(format!("{name}.spec.json"));
    fs::write(&spec_path, spec).unwrap();
    let stl = dir.path().join(format!("{name}.stl"));
    let truth = dir.path().join(format!("{name}.truth.json"));
    let out = archmark(&["synth", path(&spec_path), "--out", path(&stl), "--truth", path(&truth)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    (stl, truth)
}

#[test]
fn synth_then_run_writes_report_and_ply() {
    let dir = TempDir::new().unwrap();
    let (stl, _) = synth(&dir, "lower", r#"{"jaw_kind":"adult-lower","seed":1}"#);
    let json = dir.path().join("lower.json");
    let ply = dir.path().join("lower.ply");
    let out = archmark(&["run", path(&stl), "--jaw", "adult-lower", "--out", path(&json), "--ply", path(&ply)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = LandmarkReport::from_json(&fs::read_to_string(&json).unwrap()).unwrap();
    assert!(report.stage_failure.is_none());
    assert_eq!(report.teeth.len(), 14);
    assert_eq!(report.model_id, "lower.stl");
    let bytes = fs::read(&ply).unwrap();
    assert!(bytes.starts_with(b"ply\nformat binary_little_endian 1.0\n"));
}

#[test]
fn report_goes_to_stdout_without_out() {
    let dir = TempDir::new().unwrap();
    let (stl, _) = synth(&dir, "upper", r#"{"jaw_kind":"deciduous-upper","seed":4}"#);
    let out = archmark(&["run", path(&stl), "--jaw", "deciduous-upper", "--no-landmarks"]);
    assert_eq!(code(&out), 0);
    let report = LandmarkReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(report.teeth.len(), 10);
    assert!(report.teeth.iter().all(|t| t.landmarks.is_empty()));
}

#[test]
fn same_input_same_bytes() {
    let dir = TempDir::new().unwrap();
    let (stl, _) = synth(&dir, "m", r#"{"jaw_kind":"adult-upper","seed":2,"split":["UL6"]}"#);
    let a = archmark(&["run", path(&stl), "--jaw", "adult-upper"]);
    let b = archmark(&["--threads", "1", "run", path(&stl), "--jaw", "adult-upper"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn batch_mode_needs_out_dir_and_fills_it() {
    let dir = TempDir::new().unwrap();
    let (a, _) = synth(&dir, "a", r#"{"jaw_kind":"adult-lower","seed":1}"#);
    let (b, _) = synth(&dir, "b", r#"{"jaw_kind":"adult-lower","seed":11,"missing":["LR5"]}"#);
    let out = archmark(&["run", path(&a), path(&b), "--jaw", "adult-lower"]);
    assert_eq!(code(&out), 1);
    let results = dir.path().join("results");
    let out = archmark(&["run", path(&a), path(&b), "--jaw", "adult-lower", "--out-dir", path(&results)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for stem in ["a", "b"] {
        assert!(results.join(format!("{stem}.json")).is_file());
        assert!(results.join(format!("{stem}.ply")).is_file());
    }
}

#[test]
fn unreadable_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.stl");
    fs::write(&empty, b"").unwrap();
    assert_eq!(code(&archmark(&["run", path(&empty), "--jaw", "adult-lower"])), 2);
    let junk = dir.path().join("junk.stl");
    fs::write(&junk, vec![7u8; 300]).unwrap();
    assert_eq!(code(&archmark(&["run", path(&junk), "--jaw", "adult-lower"])), 2);
    let missing = dir.path().join("nope.stl");
    assert_eq!(code(&archmark(&["run", path(&missing), "--jaw", "adult-lower"])), 2);
}

#[test]
fn flat_plate_fails_orientation() {
    let dir = TempDir::new().unwrap();
    let plate = dir.path().join("plate.stl");
    fs::write(&plate, write_binary_stl(&height_field(20, 20, 1.0, |_, _| 0.0).to_soup())).unwrap();
    let json = dir.path().join("plate.json");
    let out = archmark(&["run", path(&plate), "--jaw", "adult-upper", "--out", path(&json)]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let report = LandmarkReport::from_json(&fs::read_to_string(&json).unwrap()).unwrap();
    assert!(report.stage_failure.is_some());
    assert!(report.teeth.is_empty());
}

#[test]
fn toothless_surface_fails_segmentation() {
    let dir = TempDir::new().unwrap();
    let hill = dir.path().join("hill.stl");
    let mesh = height_field(60, 40, 0.5, |x, y| 4.0 - 0.01 * ((x - 15.0).powi(2) + 3.0 * (y - 10.0).powi(2)));
    fs::write(&hill, write_binary_stl(&mesh.to_soup())).unwrap();
    let out = archmark(&["run", path(&hill), "--jaw", "adult-lower"]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_database_exits_5() {
    let dir = TempDir::new().unwrap();
    let (stl, _) = synth(&dir, "m", r#"{"jaw_kind":"adult-lower","seed":1}"#);
    let db = dir.path().join("db.json");
    fs::write(&db, "{\"schema_version\": 1}").unwrap();
    assert_eq!(code(&archmark(&["run", path(&stl), "--jaw", "adult-lower", "--db", path(&db)])), 5);
}

#[test]
fn invalid_settings_are_rejected() {
    let dir = TempDir::new().unwrap();
    let (stl, _) = synth(&dir, "m", r#"{"jaw_kind":"adult-lower","seed":1}"#);
    let out = archmark(&["run", path(&stl), "--jaw", "adult-lower", "--fussiness", "-1"]);
    assert_ne!(code(&out), 0);
    let out = archmark(&["run", path(&stl), "--jaw", "martian"]);
    assert_ne!(code(&out), 0);
}

#[test]
fn train_from_reports_builds_a_usable_database() {
    let dir = TempDir::new().unwrap();
    let mut reports = Vec::new();
    for (i, seed) in [1, 3, 5, 7, 9].iter().enumerate() {
        let spec = format!(r#"{{"jaw_kind":"adult-lower","seed":{seed},"split":["LL6","LR6"]}}"#);
        let (stl, _) = synth(&dir, &format!("t{i}"), &spec);
        let json = dir.path().join(format!("t{i}.json"));
        let out = archmark(&["run", path(&stl), "--jaw", "adult-lower", "--out", path(&json), "--no-landmarks"]);
        assert_eq!(code(&out), 0);
        reports.push(json.to_str().unwrap().to_string());
    }
    let db = dir.path().join("db.json");
    let mut args = vec!["train"];
    args.extend(reports.iter().map(String::as_str));
    args.extend(["--jaw", "adult-lower", "--out", path(&db)]);
    let out = archmark(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&db).unwrap();
    assert!(text.contains("\"LR6.0\""));

    let mismatch = archmark(&["train", &reports[0], "--jaw", "adult-upper", "--out", path(&db)]);
    assert_ne!(code(&mismatch), 0);
}

#[test]
fn ascii_synth_round_trips() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("s.json");
    fs::write(&spec, r#"{"jaw_kind":"deciduous-lower","seed":3}"#).unwrap();
    let stl = dir.path().join("s.stl");
    let out = archmark(&["synth", path(&spec), "--out", path(&stl), "--ascii", "--seed", "3"]);
    assert_eq!(code(&out), 0);
    assert!(fs::read(&stl).unwrap().starts_with(b"solid"));
    let out = archmark(&["run", path(&stl), "--jaw", "deciduous-lower"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}
