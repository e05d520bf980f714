use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use radshock::evans::{winding, EvansOptions, EvansSolver};
use radshock::evolve::{run_decay, DecayOptions, Perturbation};
use radshock::greenfn::{green_report, GreenOptions};
use radshock::io::{csv_string, to_json, write_csv, write_json};
use radshock::model::check_structure;
use radshock::profile::{solve_profile, Profile};
use radshock::spectral::SpectralFrame;

use crate::config::RunConfig;

#[derive(Debug)]
pub enum CmdError {
    /// bad configuration or arguments (exit 2)
    Usage(String),
    /// a numerical module failed (exit 3)
    Module(radshock::Error),
    /// output could not be written (exit 4)
    Io(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Usage(_) => 2,
            CmdError::Module(_) => 3,
            CmdError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Usage(s) => write!(f, "{s}"),
            CmdError::Module(e) => write!(f, "{e}"),
            CmdError::Io(s) => write!(f, "{s}"),
        }
    }
}

impl From<radshock::Error> for CmdError {
    fn from(e: radshock::Error) -> Self {
        CmdError::Module(e)
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e.to_string())
    }
}

type CmdResult = Result<bool, CmdError>;

fn ensure_dir(p: &Path) -> Result<(), CmdError> {
    fs::create_dir_all(p).map_err(|e| CmdError::Io(format!("cannot create {}: {e}", p.display())))
}

fn write(path: PathBuf, text: String) -> Result<(), CmdError> {
    fs::write(&path, text).map_err(|e| CmdError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn echo_config(cfg: &RunConfig) -> Result<(), CmdError> {
    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    write(dir.join("config_echo.json"), to_json(cfg))
}

/// Profile for the configured shock, cached under `<out>/.cache` by a hash
/// of the inputs that determine it.
pub fn load_profile(cfg: &RunConfig) -> Result<Profile, CmdError> {
    let model = cfg.model_system().map_err(CmdError::Usage)?;
    let shock = cfg.shock(&model).map_err(CmdError::Usage)?;
    let key = to_json(&(&model, &shock, cfg.tol, env!("CARGO_PKG_VERSION")));
    let hash: String = Sha256::digest(key.as_bytes()).iter().take(12).map(|b| format!("{b:02x}")).collect();
    let cache = cfg.out_dir().join(".cache");
    let path = cache.join(format!("profile-{hash}.json"));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(p) = serde_json::from_str::<Profile>(&text) {
            return Ok(p);
        }
    }
    let p = solve_profile(&model, &shock, None, cfg.tol)?;
    ensure_dir(&cache)?;
    write(path, serde_json::to_string(&p).map_err(|e| CmdError::Io(e.to_string()))?)?;
    Ok(p)
}

fn solver(cfg: &RunConfig) -> Result<EvansSolver, CmdError> {
    let p = load_profile(cfg)?;
    Ok(EvansSolver::new(SpectralFrame::new(p)?, &EvansOptions::default())?)
}

pub fn check(cfg: &RunConfig) -> CmdResult {
    let model = cfg.model_system().map_err(CmdError::Usage)?;
    let shock = cfg.shock(&model).map_err(CmdError::Usage)?;
    let rep = check_structure(&model, &shock, cfg.seed)?;
    write_json(&cfg.out_dir().join("structure_report.json"), &rep)?;
    let fails = rep.failures();
    if !fails.is_empty() {
        eprintln!("failed: {}", fails.join(", "));
    } else if !rep.all_pass() {
        eprintln!("no compensator with theta > 0 (best {})", rep.kawashima_theta);
    }
    Ok(rep.all_pass())
}

pub fn profile(cfg: &RunConfig) -> CmdResult {
    let p = load_profile(cfg)?;
    let (header, rows) = p.csv_rows();
    let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let dir = cfg.out_dir();
    write_csv(&dir.join("profile.csv"), &h, &rows)?;
    let meta = serde_json::json!({
        "epsilon": p.epsilon(),
        "eta": p.eta,
        "eta_fit": p.eta_fit,
        "half_length": p.half_length,
        "x0": p.x0,
        "sonic_index": p.sonic_index,
        "sonic_state": p.sonic_state(),
        "sonic_slope": p.sonic_slope(),
        "first_integral_residual": p.first_integral_residual(),
        "far_field_error": p.far_field_error(),
        "u_minus": p.shock.u_minus,
        "u_plus": p.shock.u_plus,
        "nodes": p.grid.len(),
    });
    write_json(&dir.join("profile_meta.json"), &meta)?;
    Ok(true)
}

pub fn evans(cfg: &RunConfig) -> CmdResult {
    let s = solver(cfg)?;
    let rep = winding(&s, cfg.contour_r, cfg.contour_big_r, cfg.samples)?;
    let dir = cfg.out_dir();
    let mut text = String::from("re_lambda,im_lambda,re_D,im_D,log_scale,side\n");
    for (a, b, c, d, e, side) in rep.csv_rows() {
        let nums: Vec<String> = [a, b, c, d, e].iter().map(|v| radshock::io::fmt_f64(*v)).collect();
        text.push_str(&nums.join(","));
        text.push(',');
        text.push_str(side);
        text.push('\n');
    }
    write(dir.join("evans_contour.csv"), text)?;
    write_json(&dir.join("winding_report.json"), &rep)?;
    eprintln!(
        "winding {} on the semi-annulus, {} on |lambda| = r, |dD(0)| = {:e} (threshold {:e})",
        rep.winding_minus, rep.circle_winding_minus, rep.dd0_abs, rep.threshold
    );
    Ok(rep.certified)
}

fn x_grid(cfg: &RunConfig) -> Vec<f64> {
    let n = cfg.x_nodes;
    (0..n).map(|i| cfg.x_min + (cfg.x_max - cfg.x_min) * i as f64 / (n - 1) as f64).collect()
}

pub fn resolvent(cfg: &RunConfig) -> CmdResult {
    let s = solver(cfg)?;
    let xs = x_grid(cfg);
    let k = s.resolvent_kernel(Complex64::new(cfg.lambda_re, cfg.lambda_im), cfg.y, &xs)?;
    let d = k.dim;
    let mut header = vec!["x".to_string()];
    for i in 0..d {
        for j in 0..d {
            header.push(format!("re_G{}{}", i + 1, j + 1));
            header.push(format!("im_G{}{}", i + 1, j + 1));
        }
    }
    let rows: Vec<Vec<f64>> = (0..xs.len())
        .map(|i| {
            let mut r = vec![xs[i]];
            for e in 0..d * d {
                r.push(k.re_values[i][e]);
                r.push(k.im_values[i][e]);
            }
            r
        })
        .collect();
    let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let dir = cfg.out_dir();
    write_csv(&dir.join("resolvent.csv"), &h, &rows)?;
    let meta = serde_json::json!({
        "lambda": [k.re_lambda, k.im_lambda],
        "y": k.y,
        "dim": d,
        "jump_error": k.jump_error,
        "sonic_mismatch": k.sonic_mismatch,
        "c_plus": k.c_plus,
        "c_kp": k.c_kp,
        "c_minus": k.c_minus,
    });
    write_json(&dir.join("resolvent_meta.json"), &meta)?;
    Ok(true)
}

pub fn green(cfg: &RunConfig) -> CmdResult {
    let s = solver(cfg)?;
    let mut o = GreenOptions::standard(cfg.epsilon);
    o.xs = x_grid(cfg);
    o.ts = cfg.green_ts.clone();
    o.ys = cfg.green_ys.clone();
    o.r = cfg.contour_r;
    o.big_r = cfg.contour_big_r;
    o.samples = cfg.samples;
    let rep = green_report(&s, &o)?;
    let dir = cfg.out_dir();
    let rows: Vec<Vec<f64>> = rep.samples_grid.iter().map(|g| vec![g.x, g.y, g.t, g.gi, g.e]).collect();
    write(dir.join("green.csv"), csv_string(&["x", "y", "t", "GI", "E"], &rows))?;
    let env: Vec<Vec<f64>> = rep.envelopes.iter().map(|e| vec![e.y, e.t, e.center, e.c, e.m]).collect();
    write(dir.join("green_envelopes.csv"), csv_string(&["y", "t", "center", "C", "M"], &env))?;
    write_json(&dir.join("green_report.json"), &rep)?;
    Ok(true)
}

pub fn evolve(cfg: &RunConfig) -> CmdResult {
    let p = load_profile(cfg)?;
    let pert = Perturbation { amplitude: cfg.amplitude, center: cfg.center, width: cfg.width };
    let o = DecayOptions {
        half_width: cfg.half_width,
        nodes: cfg.nodes,
        t_end: cfg.t_end,
        output_every: cfg.output_every,
        fit_window: [cfg.fit_t0, cfg.fit_t1],
        ..DecayOptions::default()
    };
    if pert.center.abs() + pert.width >= o.half_width {
        return Err(CmdError::Usage("perturbation support must lie inside the domain".into()));
    }
    let rep = run_decay(&p, &pert, &o)?;
    let rows: Vec<Vec<f64>> = rep.csv_rows().iter().map(|r| r.to_vec()).collect();
    let dir = cfg.out_dir();
    write_csv(&dir.join("evolve.csv"), &["t", "L2", "Linf", "q_W1p", "alpha", "alpha_dot"], &rows)?;
    write_json(&dir.join("decay_report.json"), &rep)?;
    eprintln!(
        "e2 {:.4} einf {:.4} alpha_dot {:.4}",
        rep.e2.exponent, rep.einf.exponent, rep.alpha_dot_exponent.exponent
    );
    Ok(true)
}
