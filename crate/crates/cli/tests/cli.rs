use std::fs;
use std::path::Path;
use std::process::Command;

fn ptorsion(cfg: &Path, out: &Path, extra: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_ptorsion"))
        .arg("--config")
        .arg(cfg)
        .arg("--out-dir")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into_owned())
}

fn write_cfg(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("run.cfg");
    fs::write(&p, body).unwrap();
    p
}

const DISK: &str = "shape = disk\nshape.radius = 1\np = 2\neta = 4\nresolution = 24\n";

#[test]
fn disk_run_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), DISK);
    let out = tmp.path().join("out");
    let (code, stdout) = ptorsion(&cfg, &out, &[]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("PASS ridge_elastic"));
    for f in ["fields.csv", "free_boundary.csv", "ridge.csv", "report.json", "timing.json", "overlay.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let fields = fs::read_to_string(out.join("fields.csv")).unwrap();
    assert_eq!(fields.lines().next(), Some("x,y,u,d_p,region"));
    let fb = fs::read_to_string(out.join("free_boundary.csv")).unwrap();
    assert_eq!(fb.lines().next(), Some("arc,t,delta,x,y"));
    assert!(fb.lines().count() > 1);

    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let nx = report["grid"]["nx"].as_u64().unwrap();
    let ny = report["grid"]["ny"].as_u64().unwrap();
    assert_eq!(fields.lines().count() - 1, (nx * ny) as usize);
    let radius = report["free_boundary"]["fb_radius"].as_f64().unwrap();
    assert!((radius - 0.5).abs() < 2.0 / 24.0, "{radius}");

    let svg = fs::read_to_string(out.join("overlay.svg")).unwrap();
    assert!(svg.contains(r#"viewBox="0 0 1000 1000""#));
}

#[test]
fn elastic_disk_has_empty_free_boundary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), DISK);
    let out = tmp.path().join("out");
    let (code, _) = ptorsion(&cfg, &out, &["--eta", "1", "--svg", "off"]);
    assert_eq!(code, 0);
    let fb = fs::read_to_string(out.join("free_boundary.csv")).unwrap();
    assert_eq!(fb, "arc,t,delta,x,y\n");
    assert!(!out.join("overlay.svg").exists());
}

#[test]
fn repeated_runs_are_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "shape = square\nshape.side = 2\np = 3\neta = 6\nresolution = 32\n");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(ptorsion(&cfg, &a, &[]).0, 0);
    assert_eq!(ptorsion(&cfg, &b, &[]).0, 0);
    for f in ["fields.csv", "free_boundary.csv", "ridge.csv", "report.json", "overlay.svg"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    let bad = write_cfg(tmp.path(), "shape = disk\nshape.radius = 1\neta = 4\nresolution = 8\n");
    assert_eq!(ptorsion(&bad, &out, &[]).0, 4);
    let cfg = write_cfg(tmp.path(), DISK);
    assert_eq!(ptorsion(&cfg, &out, &["--checks", "nonsense"]).0, 4);
    assert_eq!(ptorsion(&cfg, &out, &["--p", "1"]).0, 4);
    assert_eq!(ptorsion(&tmp.path().join("missing.cfg"), &out, &[]).0, 4);

    let slow = write_cfg(tmp.path(), &format!("{DISK}max_iters = 5\n"));
    assert_eq!(ptorsion(&slow, &out, &[]).0, 3);
    let partial = fs::read_to_string(out.join("report.json")).unwrap();
    assert!(partial.contains("solver_failed"));

    // a contact tolerance this coarse labels the ridge plastic
    let loose = write_cfg(tmp.path(), &format!("{DISK}contact_tol = 0.5\n"));
    let (code, stdout) = ptorsion(&loose, &out, &["--checks", "ridge_elastic"]);
    assert_eq!(code, 2, "{stdout}");
    assert!(stdout.contains("FAIL ridge_elastic"));
}

#[test]
fn validate_only_reports_the_reentrant_corner() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "shape = lshape\nshape.size = 2\nshape.cut = 1\neta = 6\nresolution = 16\n");
    let o = Command::new(env!("CARGO_BIN_EXE_ptorsion")).arg("--config").arg(&cfg).arg("--validate-only").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.matches("strict reentrant corner at (1, 1)").count(), 1, "{err}");
    assert!(err.contains("(0, -1)") && err.contains("(-1, 0)"));
}
