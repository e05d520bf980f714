mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};

const EXIT_HELP: &str = "\
Exit codes:
  0  success (check: every hypothesis holds; evans: winding 0 on the
     semi-annulus, 1 on the small circle and |dD(0)| above threshold)
  1  the computed result is negative (a hypothesis fails, or evans is not
     certified)
  2  invalid configuration or arguments
  3  a numerical module failed (profile, Evans, resolvent, simulation)
  4  output could not be written

Outputs go to --out, else $RADSHOCK_OUT, else ./radshock_out.
Every run writes config_echo.json with the resolved configuration.";

#[derive(Parser, Debug)]
#[command(name = "radshock", version, about = "Stability of radiative shock profiles", after_help = EXIT_HELP)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML config file (unknown keys are rejected)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// hamer | hamer_uncoupled | euler_rad | custom
    #[arg(long, global = true)]
    model: Option<String>,
    /// shock amplitude |u+ - u-|
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// output directory
    #[arg(long, global = true)]
    out: Option<String>,
    /// inner contour radius (default 1e-2 eps^2)
    #[arg(long = "contour-r", global = true)]
    contour_r: Option<f64>,
    /// outer contour radius (default 2 eps)
    #[arg(long = "contour-R", global = true)]
    contour_big_r: Option<f64>,
    /// contour samples
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// profile tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// worker threads (0 = all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check the structural hypotheses and find a compensator
    Check,
    /// Solve the traveling wave
    Profile,
    /// Winding numbers of the Evans functions
    Evans,
    /// Resolvent kernel at one lambda and source point
    Resolvent {
        #[arg(long = "lambda-re", allow_hyphen_values = true)]
        lambda_re: Option<f64>,
        #[arg(long = "lambda-im", allow_hyphen_values = true)]
        lambda_im: Option<f64>,
        /// source point
        #[arg(long, allow_hyphen_values = true)]
        y: Option<f64>,
    },
    /// Low-frequency Green function and envelope fits
    Green,
    /// Nonlinear simulation and decay-rate fits
    Evolve {
        #[arg(long)]
        amplitude: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        center: Option<f64>,
        #[arg(long)]
        width: Option<f64>,
        /// final time
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        /// grid nodes
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long = "half-width")]
        half_width: Option<f64>,
    },
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Check => "check",
            Cmd::Profile => "profile",
            Cmd::Evans => "evans",
            Cmd::Resolvent { .. } => "resolvent",
            Cmd::Green => "green",
            Cmd::Evolve { .. } => "evolve",
        }
    }
}

fn flag_overrides(cli: &Cli) -> Overrides {
    let c = &cli.common;
    let mut o = Overrides {
        model: c.model.clone(),
        epsilon: c.epsilon,
        out: c.out.clone(),
        contour_r: c.contour_r,
        contour_big_r: c.contour_big_r,
        samples: c.samples,
        tol: c.tol,
        threads: c.threads,
        seed: c.seed,
        ..Overrides::default()
    };
    match &cli.cmd {
        Cmd::Resolvent { lambda_re, lambda_im, y } => {
            o.lambda_re = *lambda_re;
            o.lambda_im = *lambda_im;
            o.y = *y;
        }
        Cmd::Evolve { amplitude, center, width, t_end, nodes, half_width } => {
            o.amplitude = *amplitude;
            o.center = *center;
            o.width = *width;
            o.t_end = *t_end;
            o.nodes = *nodes;
            o.half_width = *half_width;
        }
        _ => {}
    }
    o
}

fn run(cli: &Cli) -> Result<bool, commands::CmdError> {
    use commands::CmdError;
    let file = match &cli.common.config {
        Some(p) => config::read_file(p).map_err(CmdError::Usage)?,
        None => Overrides::default(),
    };
    let env_out = std::env::var("RADSHOCK_OUT").ok().filter(|s| !s.is_empty());
    let cfg = RunConfig::resolve(cli.cmd.name(), &file, &flag_overrides(cli), env_out).map_err(CmdError::Usage)?;
    if cfg.threads > 0 {
        // only fails if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    commands::echo_config(&cfg)?;
    match cli.cmd {
        Cmd::Check => commands::check(&cfg),
        Cmd::Profile => commands::profile(&cfg),
        Cmd::Evans => commands::evans(&cfg),
        Cmd::Resolvent { .. } => commands::resolvent(&cfg),
        Cmd::Green => commands::green(&cfg),
        Cmd::Evolve { .. } => commands::evolve(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
