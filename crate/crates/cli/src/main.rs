use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

#[derive(Parser, Debug)]
#[command(
    name = "ccmin",
    version,
    about = "Run constrained-minimization experiments from a TOML or JSON config"
)]
struct Cli {
    /// Experiment config (.toml, or .json)
    #[arg(long, required_unless_present = "list")]
    config: Option<PathBuf>,
    /// Output directory; overrides `out_dir` and CCMIN_OUT_DIR
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config entry, e.g. --set task.c=2.5 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads for parallel sweeps
    #[arg(long)]
    threads: Option<usize>,
    /// Solver seed; overrides solver.seed
    #[arg(long)]
    seed: Option<u64>,
    /// Print the built-in catalogs and exit
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        print!("{}", ccmin_cli::listing());
        return ExitCode::SUCCESS;
    }
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(ccmin_cli::EXIT_CONFIG as u8);
        }
    }
    let opts = ccmin_cli::RunOptions {
        out_dir: cli.out,
        overrides: cli.set,
        seed: cli.seed,
    };
    let config = cli.config.expect("clap enforces --config");
    ExitCode::from(ccmin_cli::run(&config, &opts) as u8)
}
