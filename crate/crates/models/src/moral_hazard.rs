//! Static moral hazard: the principal offers a lottery over effort levels and
//! output-contingent consumption; the agent's effort is hidden, so each
//! recommended action must beat every deviation in expectation.

use std::sync::Arc;

use lottery_core::{
    construct_lottery, run_iteration_loop, ConcaveTransform, ConsumptionBox, FocInnerSolver, IterateLog,
    LotteryProblem, LotterySolution, MultiplierState, PowerTransform, ProblemFns, SeparableSpec, StepSchedule, Window,
};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Per-`(deviation, action)` weight on incentive rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IcScaling {
    None,
    /// Scaler `|a - a_hat|^(-power)`, used in both the Lagrangian and the
    /// multiplier update, so the effective step on the unscaled multiplier
    /// is `|a - a_hat|^(-2 power)`.
    InverseDistance {
        power: f64,
    },
}

impl Default for IcScaling {
    fn default() -> Self {
        IcScaling::InverseDistance { power: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MoralHazardParams {
    pub a_lo: f64,
    pub a_hi: f64,
    pub da: f64,
    /// Output levels, low then high.
    pub outputs: [f64; 2],
    pub c_min: f64,
    pub c_max: f64,
    /// `v(c) = c^alpha`.
    pub alpha: f64,
    /// `w(a) = kappa (a_bar - a)^beta`.
    pub kappa: f64,
    pub a_bar: f64,
    pub beta: f64,
    /// Exponent in the output technology.
    pub tech_exponent: f64,
    pub ic_scaling: IcScaling,
}

impl Default for MoralHazardParams {
    fn default() -> Self {
        Self {
            a_lo: 0.05,
            a_hi: 1.95,
            da: 0.025,
            outputs: [0.5, 1.5],
            c_min: 0.0,
            c_max: 2.0,
            alpha: 0.5,
            kappa: 0.8,
            a_bar: 2.0,
            beta: 0.5,
            tech_exponent: 0.2,
            ic_scaling: IcScaling::default(),
        }
    }
}

impl MoralHazardParams {
    pub fn with_da(da: f64) -> Self {
        Self { da, ..Self::default() }
    }

    /// `a_i = a_lo + i da` up to `a_hi` (inclusive, up to rounding).
    pub fn action_grid(&self) -> Result<Vec<f64>, ModelError> {
        if !(self.da > 0.0 && self.a_hi >= self.a_lo) {
            return Err(ModelError::Invalid(format!("action grid {}:{}:{} is empty", self.a_lo, self.da, self.a_hi)));
        }
        let n = ((self.a_hi - self.a_lo) / self.da + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|i| self.a_lo + i as f64 * self.da).collect())
    }
}

/// Probability of the high output: `(1 - (1 - a)^e) / 2` below one and
/// `(1 + (a - 1)^e) / 2` from one up.
pub fn high_output_probability(a: f64, e: f64) -> f64 {
    if a < 1.0 {
        (1.0 - (1.0 - a).powf(e)) / 2.0
    } else {
        (1.0 + (a - 1.0).powf(e)) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoralHazardModel {
    pub params: MoralHazardParams,
    pub actions: Vec<f64>,
    /// `p(q | a)` stored at `a * 2 + q`.
    prob: Vec<f64>,
}

impl MoralHazardModel {
    pub fn new(params: MoralHazardParams) -> Result<Self, ModelError> {
        let actions = params.action_grid()?;
        Self::with_actions(params, actions)
    }

    pub fn with_actions(params: MoralHazardParams, actions: Vec<f64>) -> Result<Self, ModelError> {
        let p = &params;
        if !(p.alpha > 0.0 && p.alpha < 1.0) {
            return Err(ModelError::Invalid(format!("alpha {} outside (0, 1)", p.alpha)));
        }
        if !(p.c_min >= 0.0 && p.c_max > p.c_min && p.c_max.is_finite()) {
            return Err(ModelError::Invalid(format!("consumption bounds [{}, {}]", p.c_min, p.c_max)));
        }
        if !(p.tech_exponent > 0.0) || !(p.outputs[0] < p.outputs[1]) {
            return Err(ModelError::Invalid("output technology".into()));
        }
        if let IcScaling::InverseDistance { power } = p.ic_scaling {
            if !(power.is_finite() && power >= 0.0) {
                return Err(ModelError::Invalid(format!("ic scaling power {power}")));
            }
        }
        if actions.is_empty() {
            return Err(ModelError::Invalid("no actions".into()));
        }
        for &a in &actions {
            if !((0.0..=2.0).contains(&a) && a < p.a_bar) {
                return Err(ModelError::Invalid(format!("action {a} outside the technology domain")));
            }
        }
        let prob = build_prob_table(&actions, p.tech_exponent);
        Ok(Self { params, actions, prob })
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn prob(&self, a: usize, q: usize) -> f64 {
        self.prob[2 * a + q]
    }

    /// Disutility-side term `w(a)`.
    pub fn leisure(&self, a: usize) -> f64 {
        let p = &self.params;
        p.kappa * (p.a_bar - self.actions[a]).powf(p.beta)
    }

    /// Deviation `a_hat` addressed by constraint `j` at action `a`.
    pub fn deviation(a: usize, j: usize) -> usize {
        if j < a {
            j
        } else {
            j + 1
        }
    }

    pub fn scaler(&self, a: usize, a_hat: usize) -> f64 {
        match self.params.ic_scaling {
            IcScaling::None => 1.0,
            IcScaling::InverseDistance { power } => (self.actions[a] - self.actions[a_hat]).abs().powf(-power),
        }
    }

    /// Lottery problem with `c = (c(q_low), c(q_high))`, one resource row and
    /// `|A| - 1` incentive rows per action.
    pub fn to_problem(&self) -> Result<(LotteryProblem, MhSpec), ModelError> {
        let n = self.num_actions();
        let l = n.saturating_sub(1);
        let fns = MhFns::new(self);
        let bounds = ConsumptionBox::uniform(2, self.params.c_min, self.params.c_max)?;
        let actions = self.actions.iter().map(|&a| vec![a]).collect();
        let mut problem = LotteryProblem::new(actions, bounds, 1, l, Arc::new(fns.clone()))?;
        if !matches!(self.params.ic_scaling, IcScaling::None) && l > 0 {
            let mut scalers = Vec::with_capacity(n * l);
            for a in 0..n {
                for j in 0..l {
                    scalers.push(self.scaler(a, Self::deviation(a, j)));
                }
            }
            problem = problem.with_scalers(scalers)?;
        }
        Ok((problem, MhSpec { fns, v: PowerTransform { alpha: self.params.alpha } }))
    }
}

/// `p(q | a)` for the two-output technology, stored at `a * 2 + q`.
pub fn build_prob_table(actions: &[f64], exponent: f64) -> Vec<f64> {
    actions
        .iter()
        .flat_map(|&a| {
            let hi = high_output_probability(a, exponent);
            [1.0 - hi, hi]
        })
        .collect()
}

/// Callback data shared by the problem and its separable description.
#[derive(Debug, Clone)]
pub struct MhFns {
    prob: Vec<f64>,
    leisure: Vec<f64>,
    outputs: [f64; 2],
    alpha: f64,
}

impl MhFns {
    fn new(m: &MoralHazardModel) -> Self {
        Self {
            prob: m.prob.clone(),
            leisure: (0..m.num_actions()).map(|a| m.leisure(a)).collect(),
            outputs: m.params.outputs,
            alpha: m.params.alpha,
        }
    }

    fn v(&self, c: f64) -> f64 {
        if self.alpha == 0.5 {
            c.sqrt()
        } else {
            c.powf(self.alpha)
        }
    }

    fn expected_utility(&self, a: usize, v: [f64; 2]) -> f64 {
        self.prob[2 * a] * v[0] + self.prob[2 * a + 1] * v[1] + self.leisure[a]
    }
}

impl ProblemFns for MhFns {
    fn payoff(&self, a: usize, c: &[f64]) -> f64 {
        self.expected_utility(a, [self.v(c[0]), self.v(c[1])])
    }

    fn pooled(&self, a: usize, c: &[f64], out: &mut [f64]) {
        out[0] = self.prob[2 * a] * (c[0] - self.outputs[0]) + self.prob[2 * a + 1] * (c[1] - self.outputs[1]);
    }

    fn per_action(&self, a: usize, c: &[f64], out: &mut [f64]) {
        let v = [self.v(c[0]), self.v(c[1])];
        let own = self.expected_utility(a, v);
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.expected_utility(MoralHazardModel::deviation(a, j), v) - own;
        }
    }
}

/// Separable form: `u_q(a) = p(q|a)`, `v_{j,q}(a) = p(q|a_hat) - p(q|a)`.
#[derive(Debug, Clone)]
pub struct MhSpec {
    fns: MhFns,
    v: PowerTransform,
}

impl MhSpec {
    /// `A(a, q, gamma)` as used by the FOC solver, unscaled multipliers.
    pub fn incentive_weight(&self, a: usize, q: usize, gamma: &[f64]) -> f64 {
        let p = &self.fns.prob;
        let mut out = p[2 * a + q];
        for (j, y) in gamma.iter().enumerate() {
            let h = MoralHazardModel::deviation(a, j);
            out -= y * (p[2 * h + q] - p[2 * a + q]);
        }
        out
    }
}

impl SeparableSpec for MhSpec {
    fn dim(&self) -> usize {
        2
    }

    fn transform(&self, _r: usize) -> &dyn ConcaveTransform {
        &self.v
    }

    fn payoff_constant(&self, a: usize) -> f64 {
        self.fns.leisure[a]
    }

    fn payoff_weight(&self, a: usize, r: usize) -> f64 {
        self.fns.prob[2 * a + r]
    }

    fn per_action_constant(&self, j: usize, a: usize) -> f64 {
        self.fns.leisure[MoralHazardModel::deviation(a, j)] - self.fns.leisure[a]
    }

    fn per_action_weight(&self, j: usize, a: usize, r: usize) -> f64 {
        let h = MoralHazardModel::deviation(a, j);
        self.fns.prob[2 * h + r] - self.fns.prob[2 * a + r]
    }

    fn pooled_slope(&self, _i: usize, a: usize, r: usize, _c: f64) -> f64 {
        self.fns.prob[2 * a + r]
    }
}

/// Run settings for the hidden-effort example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Example1 {
    pub model: MoralHazardParams,
    pub lambda0: f64,
    pub gamma0: f64,
    /// Defaults to `mu_k = (k + 1/da^2)^(-0.8)`.
    pub schedule: Option<StepSchedule>,
    /// Defaults to `round(100 / da)`.
    pub n_iters: Option<usize>,
    /// Defaults to iterations `round(0.95 N)..=N`.
    pub window: Option<Window>,
    pub cluster_tol: f64,
}

impl Default for Example1 {
    fn default() -> Self {
        Self {
            model: MoralHazardParams::default(),
            lambda0: 0.5,
            gamma0: 0.0,
            schedule: None,
            n_iters: None,
            window: None,
            cluster_tol: 1e-2,
        }
    }
}

impl Example1 {
    pub fn with_da(da: f64) -> Self {
        Self { model: MoralHazardParams::with_da(da), ..Self::default() }
    }

    pub fn iterations(&self) -> usize {
        self.n_iters.unwrap_or_else(|| (100.0 / self.model.da).round() as usize)
    }

    pub fn step_schedule(&self) -> Result<StepSchedule, ModelError> {
        match self.schedule {
            Some(s) => Ok(s),
            None => Ok(StepSchedule::new(1.0, 1.0 / (self.model.da * self.model.da), 0.8)?),
        }
    }

    pub fn lottery_window(&self) -> Window {
        let n = self.iterations();
        self.window.unwrap_or_else(|| Window::new(((0.95 * n as f64).round() as usize).max(1), n))
    }
}

#[derive(Debug, Clone)]
pub struct MhSolution {
    pub model: MoralHazardModel,
    pub problem: LotteryProblem,
    pub log: IterateLog,
    pub lottery: LotterySolution,
}

impl MhSolution {
    /// Probability mass of each action value.
    pub fn action_probabilities(&self) -> Vec<(f64, f64)> {
        let marg = self.lottery.action_marginal(self.model.num_actions());
        self.model.actions.iter().copied().zip(marg).filter(|(_, p)| *p > 0.0).collect()
    }

    pub fn probability_of(&self, action: f64) -> f64 {
        self.action_probabilities().iter().filter(|(a, _)| (a - action).abs() < 1e-9).map(|(_, p)| p).sum()
    }
}

/// Lagrangian iteration with the FOC inner solver.
pub fn solve_example1(settings: &Example1) -> Result<MhSolution, ModelError> {
    let model = MoralHazardModel::new(settings.model.clone())?;
    let (problem, spec) = model.to_problem()?;
    let schedule = settings.step_schedule()?;
    let init = MultiplierState::uniform(&problem, settings.lambda0, settings.gamma0);
    let solver = FocInnerSolver::new(spec);
    let log = run_iteration_loop(&problem, init, &schedule, settings.iterations(), &solver)?;
    let lottery = construct_lottery(&problem, &log, settings.lottery_window(), settings.cluster_tol)?;
    Ok(MhSolution { model, problem, log, lottery })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn technology_values() {
        assert_eq!(high_output_probability(1.0, 0.2), 0.5);
        let expected = (1.0 - 0.95f64.powf(0.2)) / 2.0;
        assert!((high_output_probability(0.05, 0.2) - expected).abs() < 1e-15);
        assert!((expected - 0.0051031).abs() < 5e-7);
    }

    #[test]
    fn default_grid_has_77_actions() {
        let m = MoralHazardModel::new(MoralHazardParams::default()).unwrap();
        assert_eq!(m.num_actions(), 77);
        assert!((m.actions[76] - 1.95).abs() < 1e-12);
        for a in 0..77 {
            assert!((m.prob(a, 0) + m.prob(a, 1) - 1.0).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&m.prob(a, 1)));
        }
    }

    #[test]
    fn deviation_index_skips_the_action_itself() {
        assert_eq!(MoralHazardModel::deviation(3, 2), 2);
        assert_eq!(MoralHazardModel::deviation(3, 3), 4);
        assert_eq!(MoralHazardModel::deviation(0, 0), 1);
    }

    #[test]
    fn example1_defaults() {
        let e = Example1::default();
        assert_eq!(e.iterations(), 4000);
        assert_eq!(e.lottery_window(), Window::new(3800, 4000));
        assert!((e.step_schedule().unwrap().step(1) - 1601f64.powf(-0.8)).abs() < 1e-15);
    }
}
