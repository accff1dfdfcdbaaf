//! Finite lottery LPs over a consumption grid.

use lottery_core::{GridInnerSolver, IterateLog, LotteryProblem, LotterySolution};
use lottery_lp::{LpInstance, LpSize, LpSolution, LpStatus, SparseRow};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::moral_hazard::MoralHazardModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpBuildOptions {
    /// Refuse instances with more nonzeros than this.
    pub max_nonzeros: usize,
    /// Multiply incentive rows by the model's scalers.
    pub scale_ic_rows: bool,
}

impl Default for LpBuildOptions {
    fn default() -> Self {
        Self { max_nonzeros: 2_000_000, scale_ic_rows: false }
    }
}

/// Moral-hazard LP with variables `pi(c, q, a)` at index
/// `(a * 2 + q) * |C| + i`.
#[derive(Debug, Clone)]
pub struct MhLp {
    pub lp: LpInstance,
    pub c_grid: Vec<f64>,
    pub num_actions: usize,
}

impl MhLp {
    pub fn index(&self, ci: usize, q: usize, a: usize) -> usize {
        (a * 2 + q) * self.c_grid.len() + ci
    }

    /// Total mass per action in an LP solution.
    pub fn action_marginal(&self, x: &[f64]) -> Vec<f64> {
        let block = 2 * self.c_grid.len();
        (0..self.num_actions).map(|a| x[a * block..(a + 1) * block].iter().sum()).collect()
    }

    /// Mean consumption in output state `q` conditional on action `a`.
    pub fn conditional_consumption(&self, x: &[f64], a: usize, q: usize) -> Option<f64> {
        let mass: f64 = (0..self.c_grid.len()).map(|i| x[self.index(i, q, a)]).sum();
        (mass > 1e-12)
            .then(|| (0..self.c_grid.len()).map(|i| x[self.index(i, q, a)] * self.c_grid[i]).sum::<f64>() / mass)
    }
}

/// Evenly spaced grid on `[lo, hi]`; `step` must divide the range.
pub fn consumption_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, ModelError> {
    let cells = (hi - lo) / step;
    if !(step > 0.0) || !cells.is_finite() || (cells - cells.round()).abs() > 1e-9 {
        return Err(ModelError::Invalid(format!("step {step} does not divide [{lo}, {hi}]")));
    }
    let n = cells.round() as usize;
    Ok((0..=n).map(|i| if i == n { hi } else { lo + i as f64 * step }).collect())
}

/// Dimensions of the moral-hazard LP without building it.
pub fn mh_lp_size(num_actions: usize, grid_points: usize) -> LpSize {
    let variables = grid_points * 2 * num_actions;
    let ic = num_actions * num_actions.saturating_sub(1);
    // normalization, resource, two coinciding rows, and the incentive rows of
    // the variable's own action
    let per_var = 4 + num_actions.saturating_sub(1);
    LpSize { variables, equalities: 2 * num_actions + 1, inequalities: 1 + ic, nonzeros: variables * per_var }
}

pub fn build_mh_lp(model: &MoralHazardModel, c_step: f64, options: LpBuildOptions) -> Result<MhLp, ModelError> {
    let p = &model.params;
    let c_grid = consumption_grid(p.c_min, p.c_max, c_step)?;
    let n = model.num_actions();
    let nc = c_grid.len();
    let size = mh_lp_size(n, nc);
    if size.nonzeros > options.max_nonzeros {
        return Err(ModelError::SizeCap { size, cap: options.max_nonzeros });
    }
    let v: Vec<f64> = c_grid.iter().map(|&c| c.powf(p.alpha)).collect();
    let mut objective = vec![0.0; size.variables];
    let mut labels = Vec::with_capacity(size.variables);
    let out = MhLp { lp: LpInstance::new("mhlp", vec![], vec![]), c_grid: c_grid.clone(), num_actions: n };
    for a in 0..n {
        for q in 0..2 {
            for (i, &c) in c_grid.iter().enumerate() {
                objective[out.index(i, q, a)] = v[i] + model.leisure(a);
                labels.push(format!("pi(c={c},q={},a={})", p.outputs[q], model.actions[a]));
            }
        }
    }
    let mut lp = LpInstance::new("mhlp", objective, labels);
    for a in 0..n {
        for qbar in 0..2 {
            let pq = model.prob(a, qbar);
            let mut entries = Vec::with_capacity(2 * nc);
            for q in 0..2 {
                let coef = if q == qbar { 1.0 - pq } else { -pq };
                entries.extend((0..nc).map(|i| (out.index(i, q, a), coef)));
            }
            lp.add_equality(SparseRow::new(
                format!("coincide(q={},a={})", p.outputs[qbar], model.actions[a]),
                entries,
                0.0,
            ));
        }
    }
    lp.add_equality(SparseRow::new("normalization", (0..size.variables).map(|j| (j, 1.0)).collect(), 1.0));
    let mut resource = Vec::with_capacity(size.variables);
    for a in 0..n {
        for q in 0..2 {
            resource.extend((0..nc).map(|i| (out.index(i, q, a), c_grid[i] - p.outputs[q])));
        }
    }
    lp.add_inequality(SparseRow::new("resource", resource, 0.0));
    for a in 0..n {
        for j in 0..n.saturating_sub(1) {
            let dev = MoralHazardModel::deviation(a, j);
            let s = if options.scale_ic_rows { model.scaler(a, dev) } else { 1.0 };
            let mut entries = Vec::with_capacity(2 * nc);
            for q in 0..2 {
                let (pa, pd) = (model.prob(a, q), model.prob(dev, q));
                let ratio = if pa > 0.0 { pd / pa } else { 0.0 };
                for (i, vi) in v.iter().enumerate() {
                    let coef = ratio * (vi + model.leisure(dev)) - (vi + model.leisure(a));
                    entries.push((out.index(i, q, a), s * coef));
                }
            }
            lp.add_inequality(SparseRow::new(
                format!("ic(a={},dev={})", model.actions[a], model.actions[dev]),
                entries,
                0.0,
            ));
        }
    }
    debug_assert_eq!(lp.size(), size);
    Ok(MhLp { lp, ..out })
}

/// Generic lottery LP over `A x grid`: variables `pi(a, c)` at
/// `a * |grid| + i`, pooled rows in expectation, per-action rows weighted by
/// each action's own mass.
pub fn build_grid_lp(
    problem: &LotteryProblem,
    grid: &GridInnerSolver,
    options: LpBuildOptions,
) -> Result<LpInstance, ModelError> {
    let (n, k) = (problem.num_actions(), grid.len());
    let (m, l) = (problem.num_pooled(), problem.num_per_action());
    let variables = n * k;
    let size = LpSize { variables, equalities: 1, inequalities: m + n * l, nonzeros: variables * (1 + m + l) };
    if size.nonzeros > options.max_nonzeros {
        return Err(ModelError::SizeCap { size, cap: options.max_nonzeros });
    }
    let mut objective = Vec::with_capacity(variables);
    let mut labels = Vec::with_capacity(variables);
    let mut pooled: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(variables); m];
    let mut per_action: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(k); n * l];
    for a in 0..n {
        for (i, c) in grid.points().enumerate() {
            let col = a * k + i;
            let e = problem.evaluate(a, c).map_err(|e| ModelError::Invalid(e.to_string()))?;
            objective.push(e.payoff);
            labels.push(format!("pi(a={a},c={c:?})"));
            for (row, g) in pooled.iter_mut().zip(&e.pooled) {
                row.push((col, *g));
            }
            for (j, h) in e.per_action.iter().enumerate() {
                per_action[a * l + j].push((col, *h));
            }
        }
    }
    let mut lp = LpInstance::new("gridlp", objective, labels);
    lp.add_equality(SparseRow::new("normalization", (0..variables).map(|j| (j, 1.0)).collect(), 1.0));
    for (i, row) in pooled.into_iter().enumerate() {
        lp.add_inequality(SparseRow::new(format!("g{i}"), row, 0.0));
    }
    for (idx, row) in per_action.into_iter().enumerate() {
        lp.add_inequality(SparseRow::new(format!("h{}(a={})", idx % l.max(1), idx / l.max(1)), row, 0.0));
    }
    Ok(lp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub lp_status: LpStatus,
    pub lp_optimum: f64,
    pub min_dual_value: f64,
    pub lottery_objective: f64,
    /// `|LP optimum - min_k V|`.
    pub dual_gap: f64,
    /// `|LP optimum - lottery objective|`.
    pub objective_gap: f64,
    /// `min_k V - LP optimum`, nonnegative up to rounding by weak duality.
    pub weak_duality_margin: f64,
    /// Total-variation distance between the action marginals.
    pub action_marginal_distance: f64,
    pub lp_action_marginal: Vec<f64>,
    pub lottery_action_marginal: Vec<f64>,
}

/// Compares a Lagrangian run against an LP solved on the same discretization.
pub fn compare_oracle(
    log: &IterateLog,
    lottery: &LotterySolution,
    num_actions: usize,
    lp: &LpSolution,
    lp_action_marginal: &[f64],
) -> GapReport {
    let min_dual_value = log.min_dual_value();
    let lottery_action_marginal = lottery.action_marginal(num_actions);
    let action_marginal_distance =
        0.5 * lottery_action_marginal.iter().zip(lp_action_marginal).map(|(a, b)| (a - b).abs()).sum::<f64>();
    GapReport {
        lp_status: lp.status,
        lp_optimum: lp.objective,
        min_dual_value,
        lottery_objective: lottery.objective,
        dual_gap: (lp.objective - min_dual_value).abs(),
        objective_gap: (lp.objective - lottery.objective).abs(),
        weak_duality_margin: min_dual_value - lp.objective,
        action_marginal_distance,
        lp_action_marginal: lp_action_marginal.to_vec(),
        lottery_action_marginal,
    }
}
