#![allow(dead_code)]

use std::sync::Arc;

use lottery_core::{ConcaveTransform, ConsumptionBox, LotteryProblem, PowerTransform, ProblemFns, SeparableSpec};

/// `f = c` on `[0, 1]` with the single pooled constraint `c - 0.5 <= 0`.
pub fn toy() -> LotteryProblem {
    LotteryProblem::builder(vec![vec![0.0]], ConsumptionBox::uniform(1, 0.0, 1.0).unwrap())
        .payoff(|_, c| c[0])
        .pooled(|_, c| c[0] - 0.5)
        .build()
        .unwrap()
}

/// Two-state separable instance: three actions with state weights `p(a)`,
/// payoff `sum_r p_r(a) sqrt(c_r) - a`, a resource row
/// `sum_r p_r(a)(c_r - q_r)` and a participation row
/// `0.3 - sum_r p_r(a) sqrt(c_r)` per action.
pub struct Sep {
    pub probs: Vec<[f64; 2]>,
    pub costs: Vec<f64>,
    pub q: [f64; 2],
    pub w: PowerTransform,
}

impl Sep {
    pub fn new() -> Self {
        Self {
            probs: vec![[0.8, 0.2], [0.5, 0.5], [0.2, 0.8]],
            costs: vec![0.0, 0.1, 0.25],
            q: [0.5, 1.5],
            w: PowerTransform::sqrt(),
        }
    }
}

impl ProblemFns for Sep {
    fn payoff(&self, a: usize, c: &[f64]) -> f64 {
        let p = self.probs[a];
        p[0] * c[0].sqrt() + p[1] * c[1].sqrt() - self.costs[a]
    }

    fn pooled(&self, a: usize, c: &[f64], out: &mut [f64]) {
        let p = self.probs[a];
        out[0] = p[0] * (c[0] - self.q[0]) + p[1] * (c[1] - self.q[1]);
    }

    fn per_action(&self, a: usize, c: &[f64], out: &mut [f64]) {
        let p = self.probs[a];
        out[0] = 0.3 - p[0] * c[0].sqrt() - p[1] * c[1].sqrt();
    }
}

impl SeparableSpec for Sep {
    fn dim(&self) -> usize {
        2
    }

    fn transform(&self, _r: usize) -> &dyn ConcaveTransform {
        &self.w
    }

    fn payoff_constant(&self, a: usize) -> f64 {
        -self.costs[a]
    }

    fn payoff_weight(&self, a: usize, r: usize) -> f64 {
        self.probs[a][r]
    }

    fn per_action_constant(&self, _j: usize, _a: usize) -> f64 {
        0.3
    }

    fn per_action_weight(&self, _j: usize, a: usize, r: usize) -> f64 {
        -self.probs[a][r]
    }

    fn pooled_slope(&self, _i: usize, a: usize, r: usize, _c: f64) -> f64 {
        self.probs[a][r]
    }
}

pub fn sep_problem(upper: f64) -> LotteryProblem {
    let sep = Sep::new();
    let actions = sep.costs.iter().map(|&c| vec![c]).collect();
    LotteryProblem::new(actions, ConsumptionBox::uniform(2, 0.0, upper).unwrap(), 1, 1, Arc::new(sep)).unwrap()
}
