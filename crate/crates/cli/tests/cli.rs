//! End-to-end runs of the `exobasin` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn exobasin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exobasin")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn classify_reports_three_critical_points() {
    let v = json_of(&exobasin(&["classify", "--k", "0.81", "--w", "0.63"]));
    assert_eq!(v["critical_points"].as_array().unwrap().len(), 3);
    assert!(v["slice"].is_object());
}

#[test]
fn quadratic_and_abc_inputs_are_accepted() {
    let v = json_of(&exobasin(&["classify", "--quadratic", "--c", "-1"]));
    assert!(v["slice"].is_null());
    let v = json_of(&exobasin(&["fixed-points", "--a", "1.719727", "--b", "0.3142117", "--c", "-3.121092,0"]));
    assert!(v["newton"].is_object());
}

#[test]
fn exit_codes_follow_the_error_class() {
    // k = 1 collapses the slice.
    assert_eq!(exobasin(&["classify", "--k", "1", "--w", "1"]).status.code(), Some(2));
    assert_eq!(exobasin(&["classify", "--k", "0.8"]).status.code(), Some(2));
    assert_eq!(exobasin(&["--jobs", "0", "classify", "--k", "0.8", "--w", "1"]).status.code(), Some(2));
    // No sign change inside the bracket.
    let out = exobasin(&["solve-event", "--k", "0.85", "--event", "fixed-u", "--bracket", "1.0", "1.1"]);
    assert_eq!(out.status.code(), Some(3));
    // Not a Cantor map: the published exotic map keeps a critical point bounded.
    let out = exobasin(&["verify-shift", "--a", "1.719727", "--b", "0.3142117", "--c", "-3.121092", "--depth", "4"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn solve_event_finds_the_leave_mc3_boundary() {
    let v = json_of(&exobasin(&["solve-event", "--k", "0.85", "--event", "leave-mc3", "--bracket", "1.85", "1.88"]));
    let w = v["w"].as_f64().unwrap();
    assert!((w - 1.868735).abs() < 1e-5, "{w}");
    let b = v["bracket"].as_array().unwrap();
    assert!(b[1].as_f64().unwrap() - b[0].as_f64().unwrap() < 1e-6);
}

#[test]
fn config_file_supplies_values_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", r#"{"map": {"k": 0.81, "w": 0.63}, "max_iter": 500}"#);
    let v = json_of(&exobasin(&["--config", &cfg, "classify"]));
    assert!((v["map"]["a"][0].as_f64().unwrap() - 0.81 * 0.63).abs() < 1e-12);
    let v = json_of(&exobasin(&["--config", &cfg, "classify", "--k", "0.81", "--w", "1.37"]));
    assert!((v["map"]["a"][0].as_f64().unwrap() - 0.81 * 1.37).abs() < 1e-12);
    let ev = write(dir.path(), "ev.json", r#"{"k": 0.85, "event": "leave-mc3", "bracket": [1.85, 1.88]}"#);
    let v = json_of(&exobasin(&["--config", &ev, "solve-event"]));
    assert!((v["w"].as_f64().unwrap() - 1.868735).abs() < 1e-5);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"map": {"k": 0.81, "w": 0.63}, "colour": "red"}"#);
    let out = exobasin(&["--config", &cfg, "classify"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn scan_csv_has_one_row_per_cell() {
    let out = exobasin(&["scan", "--k-range", "0.84", "0.86", "--w-range", "1.5", "1.9", "--nk", "3", "--nw", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,w,u_fate,v_fate,color,u_period,v_period,undecided"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r.split(',').count() == 8));
}

#[test]
fn render_julia_writes_ppm_and_label_raster() {
    let dir = tempfile::tempdir().unwrap();
    let ppm = dir.path().join("j.ppm");
    let mask = dir.path().join("j.u8");
    let out = exobasin(&[
        "render-julia", "--k", "0.81", "--w", "1.37", "--resolution", "64", "--window", "-2", "2", "-1", "1",
        "--out", ppm.to_str().unwrap(), "--mask-out", mask.to_str().unwrap(),
    ]);
    let v = json_of(&out);
    assert_eq!((v["width"].as_u64(), v["height"].as_u64()), (Some(64), Some(32)));
    let bytes = std::fs::read(&ppm).unwrap();
    let header = b"P6\n64 32\n255\n";
    assert!(bytes.starts_with(header));
    assert_eq!(bytes.len(), header.len() + 64 * 32 * 3);
    assert_eq!(std::fs::read(&mask).unwrap().len(), 64 * 32);
    let side: Value = serde_json::from_slice(&std::fs::read(dir.path().join("j.u8.json")).unwrap()).unwrap();
    assert_eq!(side["format"], "u8");
    assert_eq!(side["width"], 64);
    assert_eq!(side["window"]["im_max"], 1.0);
}

#[test]
fn render_julia_default_name_uses_the_slice_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_exobasin"))
        .args(["render-julia", "--k", "0.81", "--w", "1.51545", "--resolution", "32"])
        .env("EXOBASIN_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("julia_k0.81_w1.51545_32.ppm").exists());
}

#[test]
fn green_raster_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let raster = dir.path().join("g.f32");
    let v = json_of(&exobasin(&[
        "potential", "--k", "0.81", "--w", "1.37", "--window", "-2", "2", "-2", "2", "--resolution", "16",
        "--z", "3", "0", "--green-raster", raster.to_str().unwrap(),
    ]));
    assert!(v["green"]["value"]["value"].as_f64().unwrap() > 0.0);
    let data = std::fs::read(&raster).unwrap();
    assert_eq!(data.len(), 16 * 16 * 4);
    let corner = f32::from_le_bytes(data[..4].try_into().unwrap());
    assert!(corner > 0.0, "corner {corner}");
    let side: Value = serde_json::from_slice(&std::fs::read(dir.path().join("g.f32.json")).unwrap()).unwrap();
    assert_eq!(side["format"], "f32le");
}

#[test]
fn exotic_verdict_on_the_published_map() {
    let v = json_of(&exobasin(&["exotic", "--k", "0.8598635", "--w", "2.0", "--resolution", "256"]));
    assert_eq!(v["is_exotic"], true);
}
