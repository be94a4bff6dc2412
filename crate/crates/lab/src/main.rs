use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use semilab::config::ExperimentConfig;
use semilab::suite::{run_suite, Scale};
use semilab::{exit, oracle, output, run};

#[derive(Parser)]
#[command(name = "lab", version, about = "Recurrence, entropy and hitting experiments for random circle maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config.
    Run {
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the acceptance suite.
    Verify {
        /// Reduced sample sizes.
        #[arg(long)]
        quick: bool,
    },
    /// Exact-rational spot checks.
    #[command(subcommand)]
    Oracle(OracleOp),
}

#[derive(Subcommand)]
enum OracleOp {
    /// Image of a rational point under a word, first symbol first.
    #[command(alias = "word_eval")]
    WordEval {
        #[arg(long)]
        system: String,
        #[arg(long)]
        word: String,
        #[arg(long)]
        x: String,
    },
    /// Fixed points of the composition along a word.
    #[command(alias = "periodic_points")]
    PeriodicPoints {
        #[arg(long)]
        system: String,
        #[arg(long)]
        word: String,
    },
    /// Shortest return time of a set along the periodic sequence `omega omega ...`.
    #[command(alias = "set_return_time")]
    SetReturnTime {
        #[arg(long)]
        system: String,
        #[arg(long)]
        omega: String,
        /// Arcs like `0..1/4;1/2..5/8`.
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 64)]
        n_max: u64,
    },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn run_experiment(path: PathBuf, seed: Option<u64>, out: Option<PathBuf>, workers: Option<usize>) -> ExitCode {
    let mut cfg = match ExperimentConfig::from_path(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return code(exit::CONFIG);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.out = Some(o);
    }
    let validated = match cfg.validate() {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error: {e}");
            return code(exit::CONFIG);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start workers: {e}");
            return code(exit::RUNTIME);
        }
    };
    let outcome = match pool.install(|| run::run(&validated)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{} failed: {e}", cfg.experiment);
            return code(exit::RUNTIME);
        }
    };
    let dir = cfg.out.clone().unwrap_or_else(|| output::default_dir(&cfg));
    if let Err(e) = output::write_all(&dir, &cfg, &outcome) {
        eprintln!("cannot write {}: {e}", dir.display());
        return code(exit::RUNTIME);
    }
    println!("{} digest {} -> {}", cfg.experiment, cfg.digest(), dir.display());
    for a in &outcome.aggregates {
        match a.half_width {
            Some(h) => println!("  {} = {:.6} ± {:.6} (n = {})", a.metric, a.value, h, a.count),
            None => println!("  {} = {:.6}", a.metric, a.value),
        }
    }
    for c in &outcome.checks {
        println!("{}", c.verdict());
    }
    code(if outcome.passed() { exit::OK } else { exit::FAILED })
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            seed,
            out,
            workers,
        } => run_experiment(config, seed, out, workers),
        Command::Verify { quick } => {
            let scale = if quick { Scale::Quick } else { Scale::Full };
            let verdicts = run_suite(scale, |v| println!("{}", v.line()));
            let failed = verdicts.iter().filter(|v| !v.passed).count();
            println!("{} of {} criteria passed", verdicts.len() - failed, verdicts.len());
            code(if failed == 0 { exit::OK } else { exit::FAILED })
        }
        Command::Oracle(op) => {
            let result = match op {
                OracleOp::WordEval { system, word, x } => oracle::word_eval(&system, &word, &x),
                OracleOp::PeriodicPoints { system, word } => oracle::periodic_points(&system, &word),
                OracleOp::SetReturnTime {
                    system,
                    omega,
                    set,
                    n_max,
                } => oracle::set_return(&system, &omega, &set, n_max),
            };
            match result {
                Ok(s) => {
                    println!("{s}");
                    code(exit::OK)
                }
                Err(e) => {
                    eprintln!("{e}");
                    code(exit::CONFIG)
                }
            }
        }
    }
}
