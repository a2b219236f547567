//! Configuration-driven experiment runner for `ccmin`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration,
//! 3 non-convergence or numerical failure.

pub mod config;
pub mod tasks;

use std::path::{Path, PathBuf};

use ccmin::energy::catalog;
use ccmin::energy::Family;
use ccmin::Error;

pub use config::{ConfigError, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable consulted for the output directory.
pub const OUT_DIR_ENV: &str = "CCMIN_OUT_DIR";

/// Command-line settings that override the config file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
}

/// Output directory: command line, then config, then environment, then `out`.
pub fn resolve_out_dir(cli: Option<&Path>, cfg: Option<&Path>) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| cfg.map(Path::to_path_buf))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidGrid(_)
        | Error::UnsupportedGrid(_)
        | Error::InvalidParameter(_)
        | Error::InvalidProblem(_)
        | Error::UnknownEntry(_) => EXIT_CONFIG,
        Error::Io(_) | Error::Parse(_) => EXIT_IO,
        _ => EXIT_NUMERICAL,
    }
}

/// Loads, validates and runs one experiment, printing a summary line on
/// stdout and diagnostics on stderr. Returns the process exit code.
pub fn run(config_path: &Path, opts: &RunOptions) -> i32 {
    let mut overrides = opts.overrides.clone();
    if let Some(s) = opts.seed {
        overrides.push(format!("solver.seed={s}"));
    }
    let cfg = match config::load(config_path, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let out_dir = resolve_out_dir(opts.out_dir.as_deref(), cfg.out_dir.as_deref());
    let exp = match config::validate(&cfg, out_dir) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = std::fs::create_dir_all(&exp.out_dir) {
        eprintln!("error: cannot create {}: {e}", exp.out_dir.display());
        return EXIT_IO;
    }
    match tasks::run(&exp) {
        Ok(out) => {
            println!("{}", out.summary);
            if out.converged {
                EXIT_OK
            } else {
                eprintln!(
                    "error: {} did not converge (outputs in {})",
                    exp.task.name(),
                    exp.out_dir.display()
                );
                EXIT_NUMERICAL
            }
        }
        Err(e) => {
            eprintln!("error: {}: {e}", exp.task.name());
            exit_code(&e)
        }
    }
}

/// Catalog listing plus the accepted families and task kinds.
pub fn listing() -> String {
    let families: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
    format!(
        "{}\nFamilies: {}\nTasks: {}\n",
        catalog::listing().trim_end(),
        families.join(", "),
        config::TASKS.join(", ")
    )
}
