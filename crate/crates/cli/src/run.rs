//! Command implementations. Each returns in-memory results; writing files is
//! left to [`crate::output`].

use std::time::Instant;

use lottery_core::{
    construct_lottery, run_iteration_loop_with, FocInnerSolver, GridInnerSolver, InnerSolver, IterateLog, LogDetail,
    LoopOptions, LotteryProblem, LotterySolution, MultiplierState,
};
use lottery_lp::{simplex_solve, LpSize, LpStatus};
use lottery_models::lp_build::{consumption_grid, mh_lp_size};
use lottery_models::taxation::{marginals, tax_to_problem, JUDD25_DETERMINISTIC};
use lottery_models::welfare::{equivalent_drain, first_best};
use lottery_models::{
    build_mh_lp, compare_oracle, GapReport, LpBuildOptions, MhLp, MoralHazardModel, TaxEconomy, TypeMarginal,
};
use serde::{Deserialize, Serialize};

use crate::config::{InnerChoice, Resolved, ResolvedModel, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxWelfare {
    pub first_best_consumption: f64,
    pub first_best_output: f64,
    /// Welfare loss of the lottery, percent of first-best output.
    pub lottery_loss: f64,
    /// Loss of the published deterministic optimum; only for the 25-type
    /// economy at its default labor bound.
    pub deterministic_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Summary {
    MoralHazard {
        /// `(action, probability)` for actions carrying mass.
        action_marginal: Vec<(f64, f64)>,
    },
    Taxation {
        types: Vec<TypeMarginal>,
        welfare: TaxWelfare,
    },
}

pub struct SolveOutcome {
    pub hash: String,
    pub resolved: Resolved,
    pub problem: LotteryProblem,
    pub log: IterateLog,
    pub lottery: LotterySolution,
    pub summary: Summary,
}

fn solver_err(e: impl std::fmt::Display) -> CliError {
    CliError::Solver(e.to_string())
}

pub fn solve(cfg: &RunConfig) -> Result<SolveOutcome, CliError> {
    let resolved = cfg.resolve()?;
    let r = &resolved;
    let (problem, log, lottery, summary) = match &r.model {
        ResolvedModel::MoralHazard(model) => {
            let (problem, spec) = model.to_problem()?;
            let inner: Box<dyn InnerSolver> = match &r.inner {
                InnerChoice::Foc => Box::new(FocInnerSolver::new(spec)),
                InnerChoice::Grid { points } => Box::new(
                    GridInnerSolver::new(problem.bounds(), points).map_err(|e| CliError::Config(e.to_string()))?,
                ),
            };
            let init = MultiplierState::uniform(&problem, r.initial.resource, r.initial.incentive);
            let log = run_iteration_loop_with(&problem, init, &r.schedule, r.n_iters, &*inner, LoopOptions::default())
                .map_err(solver_err)?;
            let lottery = construct_lottery(&problem, &log, r.window, r.cluster_tol).map_err(solver_err)?;
            let marginal = lottery.action_marginal(model.num_actions());
            let action_marginal =
                marginal.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(a, p)| (model.actions[a], *p)).collect();
            (problem, log, lottery, Summary::MoralHazard { action_marginal })
        }
        ResolvedModel::Taxation { economy, mode } => {
            let (problem, inner) = tax_to_problem(economy, *mode)?;
            let m = problem.num_pooled();
            let mut lambda = vec![r.initial.incentive; m];
            lambda[m - 1] = r.initial.resource;
            let init = MultiplierState::from_parts(&problem, lambda, vec![]).map_err(solver_err)?;
            let opts = LoopOptions { detail: LogDetail::Summary, snapshot_every: None };
            let log =
                run_iteration_loop_with(&problem, init, &r.schedule, r.n_iters, &inner, opts).map_err(solver_err)?;
            let lottery = construct_lottery(&problem, &log, r.window, r.cluster_tol).map_err(solver_err)?;
            let types = marginals(economy, &lottery, r.cluster_tol.max(0.02));
            let welfare = tax_welfare(economy, lottery.objective)?;
            (problem, log, lottery, Summary::Taxation { types, welfare })
        }
    };
    Ok(SolveOutcome { hash: cfg.hash(), resolved, problem, log, lottery, summary })
}

fn tax_welfare(economy: &TaxEconomy, u_lottery: f64) -> Result<TaxWelfare, CliError> {
    let fb = first_best(economy, 0.0)?;
    let loss = |u: f64| -> Result<f64, CliError> { Ok(100.0 * equivalent_drain(economy, u)? / fb.output) };
    let deterministic_loss =
        if *economy == TaxEconomy::judd25() { Some(loss(economy.welfare(&JUDD25_DETERMINISTIC))?) } else { None };
    Ok(TaxWelfare {
        first_best_consumption: fb.c,
        first_best_output: fb.output,
        lottery_loss: loss(u_lottery)?,
        deterministic_loss,
    })
}

fn mh_model(cfg: &RunConfig, command: &str) -> Result<MoralHazardModel, CliError> {
    match cfg.resolve()?.model {
        ResolvedModel::MoralHazard(m) => Ok(m),
        ResolvedModel::Taxation { .. } => {
            Err(CliError::Config(format!("`{command}` is available for moral hazard models only")))
        }
    }
}

/// Builds the LP over the oracle consumption grid, refusing oversized ones.
pub fn build_lp(cfg: &RunConfig) -> Result<MhLp, CliError> {
    let model = mh_model(cfg, "lp")?;
    let oracle = cfg.oracle_or_default();
    let options = LpBuildOptions { max_nonzeros: oracle.max_nonzeros, ..LpBuildOptions::default() };
    Ok(build_mh_lp(&model, oracle.c_step, options)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub lp_size: LpSize,
    pub lp_pivots: usize,
    pub gap: GapReport,
}

pub fn compare(cfg: &RunConfig) -> Result<(SolveOutcome, CompareReport), CliError> {
    let lp = build_lp(cfg)?;
    let outcome = solve(cfg)?;
    let sol = simplex_solve(&lp.lp);
    if sol.status != LpStatus::Optimal {
        return Err(CliError::Solver(format!("LP oracle ended with status {:?}", sol.status)));
    }
    let marginal = lp.action_marginal(&sol.x);
    let gap = compare_oracle(&outcome.log, &outcome.lottery, lp.num_actions, &sol, &marginal);
    let report = CompareReport { lp_size: lp.lp.size(), lp_pivots: sol.pivots, gap };
    Ok((outcome, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub da: f64,
    pub actions: usize,
    pub iterations: usize,
    pub wall_seconds: f64,
    pub lp_size: LpSize,
    /// Present when the oracle is enabled and the LP fits under the cap.
    pub lp_seconds: Option<f64>,
    /// Probability of the lowest action in the lottery.
    pub p_low: f64,
}

/// Times the iteration at each grid step with `N = round(100 / da)` and the
/// default step schedule for that step, keeping the fastest of the repeats.
pub fn benchmark(cfg: &RunConfig) -> Result<Vec<BenchRow>, CliError> {
    let base = mh_model(cfg, "benchmark")?.params;
    let oracle = cfg.oracle_or_default();
    let grid_points = consumption_grid(base.c_min, base.c_max, oracle.c_step)?.len();
    let mut rows = Vec::new();
    for da in cfg.ladder() {
        let mut rung = cfg.clone();
        let mut params = base.clone();
        params.da = da;
        rung.model = crate::config::ModelConfig::MoralHazard(params);
        rung.schedule = None;
        rung.n_iters = None;
        rung.window = None;
        rung.inner = InnerChoice::Foc;
        let mut best = f64::INFINITY;
        let mut outcome = None;
        for _ in 0..cfg.benchmark_repeats.max(1) {
            let t = Instant::now();
            let o = solve(&rung)?;
            best = best.min(t.elapsed().as_secs_f64());
            outcome = Some(o);
        }
        let outcome = outcome.expect("at least one repeat");
        let actions = outcome.problem.num_actions();
        let lp_size = mh_lp_size(actions, grid_points);
        let lp_seconds = match cfg.oracle {
            Some(o) if lp_size.nonzeros <= o.max_nonzeros => {
                let lp = build_lp(&rung)?;
                let t = Instant::now();
                let sol = simplex_solve(&lp.lp);
                let secs = t.elapsed().as_secs_f64();
                (sol.status == LpStatus::Optimal).then_some(secs)
            }
            _ => None,
        };
        let p_low = outcome.lottery.atoms.iter().filter(|a| a.action == 0).map(|a| a.probability).sum();
        rows.push(BenchRow {
            da,
            actions,
            iterations: outcome.resolved.n_iters,
            wall_seconds: best,
            lp_size,
            lp_seconds,
            p_low,
        });
    }
    Ok(rows)
}
