use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lottery_cli::output::{write_benchmark, write_compare, write_lp, write_solve};
use lottery_cli::run::{self, Summary};
use lottery_cli::{load_config, preset, CliError, Overrides, RunConfig};
use lottery_lp::write_mps;

#[derive(Parser)]
#[command(name = "lottery", version, about = "Optimal lotteries by Lagrangian iteration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the iteration and write trajectory, lottery and certificate.
    Solve(Common),
    /// Time the hidden-effort example over a ladder of action grids.
    Benchmark(Common),
    /// Solve and cross-check against the discretized LP.
    Compare(Common),
    /// Write the discretized LP in MPS format.
    Lp(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped configuration: example1, judd25, tiny or convex.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of iterations N.
    #[arg(long)]
    iters: Option<usize>,
    /// Lottery window as START:END, 1-based and inclusive.
    #[arg(long)]
    window: Option<String>,
}

impl Common {
    fn config(&self, fallback: Option<&str>) -> Result<RunConfig, CliError> {
        let mut cfg = match (&self.config, &self.preset, fallback) {
            (Some(path), _, _) => load_config(path)?,
            (None, Some(name), _) => preset(name)?,
            (None, None, Some(name)) => preset(name)?,
            (None, None, None) => return Err(CliError::Config("pass --config PATH or --preset NAME".into())),
        };
        cfg.apply(&Overrides { iters: self.iters, window: self.window.clone(), out: self.out.clone() });
        Ok(cfg)
    }
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn print_summary(o: &run::SolveOutcome) {
    let r = &o.lottery.eps_report;
    println!("objective {:.6}  min V {:.6}  eps {:.3e}", o.lottery.objective, o.log.min_dual_value(), r.certified_eps);
    match &o.summary {
        Summary::MoralHazard { action_marginal } => {
            for (a, p) in action_marginal.iter().filter(|(_, p)| *p >= 1e-3) {
                println!("  a = {a:.4}  p = {p:.4}");
            }
        }
        Summary::Taxation { welfare, .. } => {
            println!(
                "  first-best c = {:.4}  lottery loss = {:.3}%",
                welfare.first_best_consumption, welfare.lottery_loss
            );
            if let Some(d) = welfare.deterministic_loss {
                println!("  deterministic loss = {d:.3}%");
            }
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(c) => {
            let cfg = c.config(None)?;
            let outcome = run::solve(&cfg)?;
            print_summary(&outcome);
            print_files(&write_solve(&outcome, &cfg.out_dir())?);
        }
        Command::Compare(c) => {
            let cfg = c.config(None)?;
            let (outcome, report) = run::compare(&cfg)?;
            print_summary(&outcome);
            let g = &report.gap;
            println!(
                "LP optimum {:.6}  |LP - min V| {:.3e}  |LP - lottery| {:.3e}  action TV {:.3e}",
                g.lp_optimum, g.dual_gap, g.objective_gap, g.action_marginal_distance
            );
            let dir = cfg.out_dir();
            let mut files = write_solve(&outcome, &dir)?;
            files.push(write_compare(&outcome.hash, &report, &dir)?);
            print_files(&files);
        }
        Command::Lp(c) => {
            let cfg = c.config(None)?;
            let lp = run::build_lp(&cfg)?;
            let s = lp.lp.size();
            println!("{} variables, {} equalities, {} inequalities", s.variables, s.equalities, s.inequalities);
            print_files(&[write_lp(&cfg.hash(), &write_mps(&lp.lp), &cfg.out_dir())?]);
        }
        Command::Benchmark(c) => {
            let cfg = c.config(Some("example1"))?;
            let rows = run::benchmark(&cfg)?;
            for r in &rows {
                println!("da {:<8} N {:<6} {:>10.4}s  P(low) {:.4}", r.da, r.iterations, r.wall_seconds, r.p_low);
            }
            print_files(&[write_benchmark(&cfg.hash(), &rows, &cfg.out_dir())?]);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
