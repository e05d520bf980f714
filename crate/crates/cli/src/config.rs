use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use radshock::model::{ModelSystem, ShockTriple};

/// Keys accepted in the config file; every one of them can also be set by
/// a flag. Unknown keys are an error.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub model: Option<String>,
    pub gamma: Option<f64>,
    pub coupling: Option<f64>,
    pub custom_f: Option<Vec<f64>>,
    pub custom_g: Option<Vec<f64>>,
    pub custom_l: Option<f64>,
    pub epsilon: Option<f64>,
    pub out: Option<String>,
    pub contour_r: Option<f64>,
    #[serde(rename = "contour_R")]
    pub contour_big_r: Option<f64>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub lambda_re: Option<f64>,
    pub lambda_im: Option<f64>,
    pub y: Option<f64>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub x_nodes: Option<usize>,
    pub green_ts: Option<Vec<f64>>,
    pub green_ys: Option<Vec<f64>>,
    pub amplitude: Option<f64>,
    pub center: Option<f64>,
    pub width: Option<f64>,
    pub t_end: Option<f64>,
    pub nodes: Option<usize>,
    pub half_width: Option<f64>,
    pub output_every: Option<f64>,
    pub fit_t0: Option<f64>,
    pub fit_t1: Option<f64>,
}

/// Fully resolved configuration, echoed to `config_echo.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub model: String,
    pub gamma: f64,
    pub coupling: f64,
    pub custom_f: Vec<f64>,
    pub custom_g: Vec<f64>,
    pub custom_l: f64,
    pub epsilon: f64,
    pub out: String,
    pub contour_r: f64,
    #[serde(rename = "contour_R")]
    pub contour_big_r: f64,
    pub samples: usize,
    pub tol: f64,
    pub threads: usize,
    pub seed: u64,
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub y: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub x_nodes: usize,
    pub green_ts: Vec<f64>,
    pub green_ys: Vec<f64>,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    pub t_end: f64,
    pub nodes: usize,
    pub half_width: f64,
    pub output_every: f64,
    pub fit_t0: f64,
    pub fit_t1: f64,
}

pub const DEFAULT_OUT: &str = "radshock_out";

pub fn read_file(path: &Path) -> Result<Overrides, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
}

impl RunConfig {
    /// defaults < file < flags
    pub fn resolve(
        command: &str,
        file: &Overrides,
        flags: &Overrides,
        env_out: Option<String>,
    ) -> Result<Self, String> {
        macro_rules! pick {
            ($f:ident, $d:expr) => {
                flags.$f.clone().or_else(|| file.$f.clone()).unwrap_or_else(|| $d)
            };
        }
        let epsilon = pick!(epsilon, 0.2);
        if !(epsilon > 0.0) {
            return Err(format!("epsilon must be positive, got {epsilon}"));
        }
        let samples_default = match command {
            "green" => 128,
            _ => 256,
        };
        let t_end = pick!(t_end, 400.0);
        let x_default = if command == "green" { 60.0 } else { 20.0 };
        let c = RunConfig {
            command: command.to_string(),
            model: pick!(model, "hamer".to_string()),
            gamma: pick!(gamma, 5.0 / 3.0),
            coupling: pick!(coupling, 1.0),
            custom_f: pick!(custom_f, vec![0.0, 0.0, 0.5]),
            custom_g: pick!(custom_g, vec![0.0, 1.0]),
            custom_l: pick!(custom_l, 1.0),
            epsilon,
            out: pick!(out, env_out.clone().unwrap_or_else(|| DEFAULT_OUT.to_string())),
            contour_r: pick!(contour_r, 1e-2 * epsilon * epsilon),
            contour_big_r: pick!(contour_big_r, 2.0 * epsilon),
            samples: pick!(samples, samples_default),
            tol: pick!(tol, 1e-12),
            threads: pick!(threads, 0),
            seed: pick!(seed, 42),
            lambda_re: pick!(lambda_re, 1e-3 * epsilon * epsilon),
            lambda_im: pick!(lambda_im, 0.0),
            y: pick!(y, -1.0),
            x_min: pick!(x_min, -x_default),
            x_max: pick!(x_max, x_default),
            x_nodes: pick!(x_nodes, 201),
            green_ts: pick!(green_ts, vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]),
            green_ys: pick!(green_ys, vec![-10.0, -5.0, -2.0, 2.0, 5.0]),
            amplitude: pick!(amplitude, 0.02),
            center: pick!(center, -100.0),
            width: pick!(width, 5.0),
            t_end,
            nodes: pick!(nodes, 8001),
            half_width: pick!(half_width, 200.0),
            output_every: pick!(output_every, 2.0),
            fit_t0: pick!(fit_t0, 20.0),
            fit_t1: pick!(fit_t1, t_end),
        };
        if c.samples < 16 {
            return Err(format!("samples must be at least 16, got {}", c.samples));
        }
        if c.x_nodes < 2 || c.nodes < 3 {
            return Err("grids need at least 3 nodes".into());
        }
        Ok(c)
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(&self.out)
    }

    pub fn model_system(&self) -> Result<ModelSystem, String> {
        match self.model.as_str() {
            "hamer" => Ok(ModelSystem::hamer_with_coupling(self.coupling)),
            "hamer_uncoupled" => Ok(ModelSystem::hamer_uncoupled()),
            "euler_rad" => Ok(ModelSystem::euler_rad(self.gamma)),
            "custom" => Ok(ModelSystem::custom(self.custom_f.clone(), self.custom_g.clone(), self.custom_l)),
            other => Err(format!("unknown model '{other}' (expected hamer, hamer_uncoupled, euler_rad, custom)")),
        }
    }

    pub fn shock(&self, model: &ModelSystem) -> Result<ShockTriple, String> {
        match self.model.as_str() {
            "euler_rad" => ShockTriple::euler(model, self.epsilon).map_err(|e| e.to_string()),
            _ => Ok(ShockTriple::hamer(self.epsilon)),
        }
    }
}
