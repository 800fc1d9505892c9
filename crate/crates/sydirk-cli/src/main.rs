//! Command-line driver: tableau classification, trajectory runs
//! (full-space, descended, or both with deviation reporting), and
//! convergence studies.
//!
//! Exit codes: 0 success, 2 stage solver non-convergence, 3 degenerate
//! spectrum, 4 configuration error.

mod config;
mod runner;

use clap::{Parser, Subcommand};
use config::{
    build_method, build_system, load_tableau, weights_for_mode, ConfigError, ConvergenceConfig,
    RunConfig,
};
use serde::Serialize;
use std::io::Write;
use std::process::ExitCode;
use sydirk::error::Error;
use sydirk::tableau::{classify, DEFAULT_CLASS_TOL};

#[derive(Parser)]
#[command(
    name = "sydirk",
    about = "Structure-preserving integrators on quadratically projected variables",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a tableau: coefficient condition residuals, stage ordering,
    /// and method class.
    Classify {
        /// Built-in tableau name or path to a tableau JSON document.
        #[arg(long)]
        tableau: String,
        /// Residual and structural tolerance.
        #[arg(long, default_value_t = DEFAULT_CLASS_TOL)]
        tol: f64,
    },
    /// Integrate a trajectory described by a JSON config and write a CSV
    /// record.
    Run {
        #[arg(long)]
        config: String,
        /// Override the config's output path.
        #[arg(long)]
        output: Option<String>,
        /// Override the config's initial-condition seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Append full state columns to every CSV row.
        #[arg(long)]
        dump_states: bool,
    },
    /// Step-halving convergence study against a fine reference run.
    Convergence {
        #[arg(long)]
        config: String,
        #[arg(long)]
        output: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

enum CliError {
    Config(String),
    Engine(Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Engine(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 4,
            CliError::Io(_) => 4,
            CliError::Engine(e) => match e.root() {
                Error::NonConvergence { .. } => 2,
                Error::DegenerateSpectrum(_) => 3,
                _ => 1,
            },
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Classify { tableau, tol } => cmd_classify(&tableau, tol),
        Command::Run {
            config,
            output,
            seed,
            dump_states,
        } => cmd_run(&config, output, seed, dump_states),
        Command::Convergence {
            config,
            output,
            seed,
        } => cmd_convergence(&config, output, seed),
    }
}

#[derive(Serialize)]
struct ClassificationDoc {
    class: String,
    symplectic_residual: f64,
    projectable_residual: f64,
    /// 1-indexed stage order, absent when the ordering relation is cyclic.
    dirk_permutation: Option<Vec<usize>>,
}

fn cmd_classify(spec: &str, tol: f64) -> Result<(), CliError> {
    if !(tol > 0.0) {
        return Err(CliError::Config("tolerance must be positive".into()));
    }
    let tableau = load_tableau(spec)?;
    let c = classify(&tableau, tol).map_err(CliError::Engine)?;
    let perm_display = match &c.dirk_permutation {
        Some(p) => p
            .iter()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(","),
        None => "none".into(),
    };
    println!(
        "class: {}\nsymplectic_residual: {}\nprojectable_residual: {}\ndirk_permutation: {}",
        c.class,
        runner::format_value(c.symplectic_residual),
        runner::format_value(c.projectable_residual),
        perm_display
    );
    let doc = ClassificationDoc {
        class: c.class.to_string(),
        symplectic_residual: c.symplectic_residual,
        projectable_residual: c.projectable_residual,
        dirk_permutation: c
            .dirk_permutation
            .map(|p| p.iter().map(|i| i + 1).collect()),
    };
    println!("{}", serde_json::to_string(&doc).expect("serializable"));
    Ok(())
}

fn cmd_run(
    config_path: &str,
    output: Option<String>,
    seed: Option<u64>,
    dump_states: bool,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| CliError::Config(format!("reading `{config_path}`: {e}")))?;
    let mut cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("parsing `{config_path}`: {e}")))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if dump_states {
        cfg.dump_states = true;
    }
    if let Some(o) = output {
        cfg.output = Some(o);
    }
    if !(cfg.h > 0.0 && cfg.h.is_finite()) {
        return Err(CliError::Config("step size h must be positive".into()));
    }
    cfg.solver
        .validate()
        .map_err(|_| CliError::Config("invalid solver settings".into()))?;

    let sys = build_system(&cfg.system)?;
    let (tableau, weights) = build_method(&cfg.method)?;
    let weights = weights_for_mode(cfg.mode, &tableau, &weights)?;

    let outcome = runner::run_trajectory(&cfg, sys.as_ref(), &tableau, weights.as_deref());

    match &cfg.output {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            runner::write_csv(&outcome, &mut file)?;
            file.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            match runner::write_csv(&outcome, &mut lock) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => return Ok(()),
                other => other?,
            }
        }
    }

    match outcome.abort {
        Some(e) => Err(CliError::Engine(e)),
        None => Ok(()),
    }
}

fn cmd_convergence(
    config_path: &str,
    output: Option<String>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| CliError::Config(format!("reading `{config_path}`: {e}")))?;
    let mut cfg: ConvergenceConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("parsing `{config_path}`: {e}")))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = output {
        cfg.output = Some(o);
    }
    if cfg.levels < 3 {
        return Err(CliError::Config(
            "a convergence study needs at least 3 levels".into(),
        ));
    }
    if !(cfg.h0 > 0.0) || !(cfg.t_end > 0.0) {
        return Err(CliError::Config("h0 and t_end must be positive".into()));
    }
    let steps0 = (cfg.t_end / cfg.h0).round();
    if steps0 < 1.0 || (steps0 * cfg.h0 - cfg.t_end).abs() > 1e-9 * cfg.t_end {
        return Err(CliError::Config(
            "t_end must be an integer multiple of h0".into(),
        ));
    }

    let sys = build_system(&cfg.system)?;
    let (tableau, weights) = build_method(&cfg.method)?;
    let weights = weights_for_mode(cfg.mode, &tableau, &weights)?;

    let outcome = runner::run_convergence(&cfg, sys.as_ref(), &tableau, weights.as_deref())
        .map_err(CliError::Engine)?;

    if let Some(path) = &cfg.output {
        let mut file = std::fs::File::create(path)?;
        runner::write_convergence(&outcome, &mut file)?;
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match runner::write_convergence(&outcome, &mut lock) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}
