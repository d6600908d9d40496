use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tarl_cli::compare::compare_dirs;
use tarl_cli::runner::run_training;
use tarl_cli::theory::{run_theory, write_theory_csv, TheoryGrid};
use tarl_cli::{load_config, CliError, Result};
use tarl_core::envs::{value_iteration, EnvName};

#[derive(Parser)]
#[command(name = "tarl", version, about = "Target-aligned replay experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every seed of a run config.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Run only this seed instead of the configured list.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Compare evaluation curves of two run directories.
    Compare {
        baseline: PathBuf,
        treatment: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the sign model on a (λ, c) grid and the approximation bound.
    Theory {
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Where to write theory_results.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Exact solvers for the tabular environments.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand)]
enum OracleCommand {
    ValueIteration {
        #[arg(long)]
        env: EnvName,
    },
}

fn train(config: PathBuf, seed_override: Option<u64>) -> Result<()> {
    let mut config = load_config(&config)?;
    if let Some(seed) = seed_override {
        config.seeds = vec![seed];
    }
    let outcomes = run_training(&config)?;
    let mut violations = Vec::new();
    for o in &outcomes {
        println!(
            "seed {}: final eval {}, {} gradient steps",
            o.seed,
            o.final_eval().map_or("n/a".to_string(), |s| format!("{s:.4}")),
            o.gradient_steps
        );
        if o.dominance_violations > 0 {
            violations.push(format!("seed {}: {} selection-dominance violations", o.seed, o.dominance_violations));
        }
    }
    println!("wrote {}", config.output_dir.display());
    if !violations.is_empty() {
        return Err(CliError::Invariant(violations.join("; ")));
    }
    Ok(())
}

fn theory(grid: Option<PathBuf>, out: PathBuf) -> Result<()> {
    let grid = match grid {
        Some(path) => TheoryGrid::load(&path)?,
        None => TheoryGrid::default(),
    };
    let report = run_theory(&grid)?;
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let path = out.join("theory_results.csv");
    write_theory_csv(&path, &report.cells)?;
    println!(
        "{} cells, bound held on {}/{} triples; wrote {}",
        report.cells.len(),
        report.bound.satisfying,
        report.bound.checked,
        path.display()
    );
    let failures = report.failures();
    if !failures.is_empty() {
        return Err(CliError::Invariant(failures.join("; ")));
    }
    Ok(())
}

fn oracle(env: EnvName) -> Result<()> {
    let mdp = env.tabular()?;
    let gamma = env.make().spec().gamma;
    let q = value_iteration(&mdp, gamma, 1e-12)?;
    println!("env {env}, gamma {gamma}");
    println!("sweeps {}, bellman residual {:e}", q.sweeps, q.residual);
    println!("V*(start) = {}", q.state_value(mdp.start_state()));
    for s in 0..q.n_states() {
        println!("state {s}: V* = {:.12} greedy action {}", q.state_value(s), q.greedy_action(s));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train { config, seed_override } => train(config, seed_override),
        Command::Compare { baseline, treatment, out } => compare_dirs(&baseline, &treatment, &out).map(|cmp| {
            println!(
                "baseline median final {:.4} (IQR {:.4}); treatment median final {:.4} (IQR {:.4})",
                cmp.baseline.median_final, cmp.baseline.iqr_final, cmp.treatment.median_final, cmp.treatment.iqr_final
            );
        }),
        Command::Theory { grid, out } => theory(grid, out),
        Command::Oracle(OracleCommand::ValueIteration { env }) => oracle(env),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
