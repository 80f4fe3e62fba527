use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fppm::image::Image;
use fppm::metrics::LOG_HEADER;
use fppm::scenes;

fn fppm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fppm")).args(args).output().unwrap()
}

fn scene_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenes")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bundled_scene_files_match_the_builders() {
    let files = [
        ("cornell", scenes::cornell(128)),
        ("caustic", scenes::caustic(64)),
        ("textured_spot", scenes::textured_spot(64)),
        ("uniform_plane", scenes::uniform_plane(64)),
        ("step_plane", scenes::step_plane(64)),
        ("furnace", scenes::furnace(32)),
    ];
    for (name, text) in files {
        let on_disk = std::fs::read_to_string(scene_dir().join(format!("{name}.scn"))).unwrap();
        assert_eq!(on_disk, text, "scenes/{name}.scn is stale");
    }
}

#[test]
fn render_writes_image_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("plane.scn");
    std::fs::write(&scene, scenes::uniform_plane(8)).unwrap();
    let out = dir.path().join("out.pfm");
    let log = dir.path().join("log.csv");
    let aux = dir.path().join("aux_");
    let o = fppm(&[
        "render", "--scene", s(&scene), "--algo", "fppm", "--iters", "4", "--seed", "1", "--out", s(&out),
        "--log", s(&log), "--aux-prefix", s(&aux), "--threads", "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let img = Image::read_pfm(&out).unwrap();
    assert_eq!((img.width, img.height), (8, 8));
    let text = std::fs::read_to_string(&log).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iteration,seconds,mse,mean_radius,vm_share"));
    assert_eq!(LOG_HEADER.join(","), "iteration,seconds,mse,mean_radius,vm_share");
    assert_eq!(lines.count(), 4);
    for suffix in ["preview.png", "radius.pfm", "radius.png", "vm_share.pfm"] {
        assert!(dir.path().join(format!("aux_{suffix}")).exists(), "{suffix}");
    }
}

#[test]
fn reference_fills_the_mse_column_and_mse_command_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let scene_path = dir.path().join("plane.scn");
    let text = scenes::uniform_plane(8);
    std::fs::write(&scene_path, &text).unwrap();
    let reference = dir.path().join("ref.pfm");
    scenes::spot_plane_reference(&scenes::build(&text).unwrap(), 4).write_pfm(&reference).unwrap();
    let out = dir.path().join("out.pfm");
    let log = dir.path().join("log.csv");
    let o = fppm(&[
        "render", "--scene", s(&scene_path), "--algo", "pt", "--iters", "12", "--seed", "3", "--out", s(&out),
        "--log", s(&log), "--ref", s(&reference),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let last = std::fs::read_to_string(&log).unwrap().lines().last().unwrap().to_string();
    let logged: f64 = last.split(',').nth(2).unwrap().parse().unwrap();

    let o = fppm(&["mse", s(&out), s(&reference)]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1);
    let printed: f64 = stdout.trim().parse().unwrap();
    assert!(printed.is_finite() && printed >= 0.0);
    assert!((printed - logged).abs() <= 1e-9 * printed.max(1e-12), "{printed} vs {logged}");

    let o = fppm(&["slope", s(&log), "2", "12"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let slope: f64 = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
    assert!(slope.is_finite());
}

#[test]
fn log_without_reference_has_nan_mse() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.pfm");
    let log = dir.path().join("l.csv");
    let scene = scene_dir().join("furnace.scn");
    let o = fppm(&[
        "render", "--scene", s(&scene), "--algo", "sppm", "--iters", "2", "--seed", "1", "--out", s(&out), "--log",
        s(&log), "--max-depth", "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&log).unwrap();
    assert!(text.lines().nth(1).unwrap().split(',').nth(2) == Some("nan"), "{text}");
}

#[test]
fn unknown_algorithm_prints_usage() {
    let o = fppm(&["render", "--scene", "x.scn", "--algo", "bogus", "--iters", "1", "--seed", "1", "--out", "x.pfm"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("Usage"), "{err}");
    assert!(err.contains("bogus"), "{err}");
}

#[test]
fn missing_scene_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.pfm");
    let o = fppm(&["render", "--scene", "/nonexistent.scn", "--algo", "pt", "--iters", "1", "--seed", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonexistent"));
}

#[test]
fn mse_rejects_mismatched_images() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.pfm");
    let b = dir.path().join("b.pfm");
    Image::new(2, 2).write_pfm(&a).unwrap();
    Image::new(3, 2).write_pfm(&b).unwrap();
    let o = fppm(&["mse", s(&a), s(&b)]);
    assert!(!o.status.success());
}
