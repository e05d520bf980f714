use std::path::Path;
use std::process::{Command, Output};

fn radshock(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radshock"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("RADSHOCK_OUT")
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn check_hamer_passes() {
    let d = tempfile::tempdir().unwrap();
    let o = radshock(&["check", "--epsilon", "0.2"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&d.path().join("structure_report.json"));
    assert!(rep["kawashima_theta"].as_f64().unwrap() > 0.0);
    assert!(d.path().join("config_echo.json").exists());
}

#[test]
fn check_uncoupled_names_s2() {
    let d = tempfile::tempdir().unwrap();
    let o = radshock(&["check", "--model", "hamer_uncoupled"], d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("S2"));
    let rep = json(&d.path().join("structure_report.json"));
    let s2 = rep["entries"].as_array().unwrap().iter().find(|e| e["hypothesis"] == "S2").unwrap();
    assert_eq!(s2["pass"], false);
}

#[test]
fn precedence_flags_over_file_over_defaults() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    std::fs::write(&cfg, "epsilon = 0.1\nseed = 7\ncontour_R = 0.5\n").unwrap();
    let o = radshock(&["check", "--config", cfg.to_str().unwrap(), "--epsilon", "0.2"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let echo = json(&d.path().join("config_echo.json"));
    assert_eq!(echo["epsilon"].as_f64(), Some(0.2));
    assert_eq!(echo["seed"].as_u64(), Some(7));
    assert_eq!(echo["contour_R"].as_f64(), Some(0.5));
    // derived default follows the resolved epsilon
    assert!((echo["contour_r"].as_f64().unwrap() - 4e-4).abs() < 1e-18);
}

#[test]
fn unknown_config_key_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.toml");
    std::fs::write(&cfg, "epsilon = 0.2\nepsilonn = 0.1\n").unwrap();
    let o = radshock(&["check", "--config", cfg.to_str().unwrap()], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilonn"));
}

#[test]
fn unknown_model_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(radshock(&["check", "--model", "navier"], d.path()).status.code(), Some(2));
}

#[test]
fn env_var_sets_output_root() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_radshock"))
        .arg("check")
        .env("RADSHOCK_OUT", d.path().join("envroot"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(d.path().join("envroot/config_echo.json").exists());
}

#[test]
fn profile_outputs_are_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let a = d.path().join("a");
    let b = d.path().join("b");
    assert_eq!(radshock(&["profile"], &a).status.code(), Some(0));
    assert_eq!(radshock(&["profile"], &b).status.code(), Some(0));
    // second run in the same directory reads the cached profile
    assert_eq!(radshock(&["profile"], &a).status.code(), Some(0));
    for f in ["profile.csv", "profile_meta.json"] {
        let x = std::fs::read(a.join(f)).unwrap();
        let y = std::fs::read(b.join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
    let csv = std::fs::read_to_string(a.join("profile.csv")).unwrap();
    assert!(csv.starts_with("x,U1,Q,P,a_p\n"));
    let meta = json(&a.join("profile_meta.json"));
    assert!(meta["first_integral_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn resolvent_kernel_csv() {
    let d = tempfile::tempdir().unwrap();
    let o = radshock(&["resolvent", "--lambda-re", "4e-5", "--y", "-1", "--epsilon", "0.2"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("resolvent.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("x,re_G11,im_G11,"));
    assert_eq!(lines.count(), 201);
    let meta = json(&d.path().join("resolvent_meta.json"));
    assert!(meta["jump_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn evans_certifies_hamer() {
    let d = tempfile::tempdir().unwrap();
    let o = radshock(&["evans", "--epsilon", "0.2", "--samples", "256"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&d.path().join("winding_report.json"));
    for k in ["winding_minus", "winding_plus", "r", "R", "samples", "refinements", "dD0"] {
        assert!(rep.get(k).is_some(), "{k}");
    }
    assert_eq!(rep["winding_minus"], 0);
    assert_eq!(rep["dD0"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(d.path().join("evans_contour.csv")).unwrap();
    assert!(csv.starts_with("re_lambda,im_lambda,re_D,im_D,log_scale,side\n"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",minus") || l.ends_with(",plus")));
}

#[test]
fn evolve_short_run() {
    let d = tempfile::tempdir().unwrap();
    let args = ["evolve", "--t-end", "30", "--nodes", "1001", "--half-width", "50", "--center", "-20", "--width", "3"];
    let o = radshock(&args, d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("evolve.csv")).unwrap();
    assert!(csv.starts_with("t,L2,Linf,q_W1p,alpha,alpha_dot\n"));
    let rep = json(&d.path().join("decay_report.json"));
    assert!(rep["e2"]["exponent"].is_number());
    let bad = radshock(&["evolve", "--center", "-300"], d.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn help_documents_exit_codes() {
    let o = Command::new(env!("CARGO_BIN_EXE_radshock")).arg("--help").output().unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    for k in ["check", "profile", "evans", "resolvent", "green", "evolve", "--contour-R", "Exit codes"] {
        assert!(text.contains(k), "{k}");
    }
}
