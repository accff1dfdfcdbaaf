use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{EvalError, ProblemError};
use crate::lagrangian::lagrangian_from;
use crate::multipliers::MultiplierState;

/// Per-coordinate closed interval `[lower_r, upper_r]`.
///
/// Upper bounds may be `+inf`; only the FOC inner solver accepts such boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsumptionBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ConsumptionBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ProblemError> {
        if lower.len() != upper.len() {
            return Err(ProblemError::BoundLength(lower.len(), upper.len()));
        }
        if lower.is_empty() {
            return Err(ProblemError::EmptyBox);
        }
        for (r, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || hi.is_nan() || lo >= hi {
                return Err(ProblemError::BadInterval { coord: r, lower: lo, upper: hi });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self, ProblemError> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.upper.iter().all(|u| u.is_finite())
    }

    pub fn contains(&self, c: &[f64]) -> bool {
        c.len() == self.dim()
            && c.iter().zip(self.lower.iter().zip(&self.upper)).all(|(&x, (&lo, &hi))| x >= lo && x <= hi)
    }

    pub fn clamp(&self, r: usize, x: f64) -> f64 {
        x.max(self.lower[r]).min(self.upper[r])
    }
}

/// Callbacks of a lottery problem, addressed by action index.
///
/// Implementations must return finite values on every action and every point
/// of the consumption box.
pub trait ProblemFns: Send + Sync {
    fn payoff(&self, action: usize, c: &[f64]) -> f64;
    /// Writes `g_i(a, c)` for all pooled constraints.
    fn pooled(&self, action: usize, c: &[f64], out: &mut [f64]);
    /// Writes the unscaled `h_j(a, c)` for all per-action constraints.
    fn per_action(&self, action: usize, c: &[f64], out: &mut [f64]);
}

/// Payoff and constraint values at one `(a, c)` with scalers already applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub payoff: f64,
    pub pooled: Vec<f64>,
    pub per_action: Vec<f64>,
}

impl Evaluation {
    pub fn for_problem(problem: &LotteryProblem) -> Self {
        Self { payoff: 0.0, pooled: vec![0.0; problem.num_pooled()], per_action: vec![0.0; problem.num_per_action()] }
    }
}

#[derive(Clone)]
pub struct LotteryProblem {
    actions: Vec<Vec<f64>>,
    bounds: ConsumptionBox,
    num_pooled: usize,
    num_per_action: usize,
    scalers: Option<Vec<f64>>,
    fns: Arc<dyn ProblemFns>,
}

impl fmt::Debug for LotteryProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LotteryProblem")
            .field("actions", &self.actions.len())
            .field("dim", &self.bounds.dim())
            .field("num_pooled", &self.num_pooled)
            .field("num_per_action", &self.num_per_action)
            .field("scaled", &self.scalers.is_some())
            .finish()
    }
}

impl LotteryProblem {
    pub fn new(
        actions: Vec<Vec<f64>>,
        bounds: ConsumptionBox,
        num_pooled: usize,
        num_per_action: usize,
        fns: Arc<dyn ProblemFns>,
    ) -> Result<Self, ProblemError> {
        if actions.is_empty() {
            return Err(ProblemError::NoActions);
        }
        let dim = actions[0].len();
        for (i, a) in actions.iter().enumerate() {
            if a.len() != dim {
                return Err(ProblemError::ActionDimension(i, a.len(), dim));
            }
        }
        let mut order: Vec<usize> = (0..actions.len()).collect();
        order.sort_by(|&i, &j| lex_cmp(&actions[i], &actions[j]).then(i.cmp(&j)));
        for w in order.windows(2) {
            if actions[w[0]] == actions[w[1]] {
                return Err(ProblemError::DuplicateAction(w[0].min(w[1]), w[0].max(w[1])));
            }
        }
        Ok(Self { actions, bounds, num_pooled, num_per_action, scalers: None, fns })
    }

    /// Starts a problem from plain closures over `(action point, c)`.
    pub fn builder(actions: Vec<Vec<f64>>, bounds: ConsumptionBox) -> ProblemBuilder {
        ProblemBuilder { actions, bounds, payoff: None, pooled: Vec::new(), per_action: Vec::new() }
    }

    /// Attaches positive scalers for `h_j` at action `a`, stored at `a * l + j`.
    pub fn with_scalers(mut self, scalers: Vec<f64>) -> Result<Self, ProblemError> {
        let expected = self.num_per_action * self.actions.len();
        if scalers.len() != expected {
            return Err(ProblemError::ScalerLength { expected, got: scalers.len() });
        }
        if let Some(i) = scalers.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(ProblemError::BadScaler(i));
        }
        self.scalers = Some(scalers);
        Ok(self)
    }

    pub fn actions(&self) -> &[Vec<f64>] {
        &self.actions
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn bounds(&self) -> &ConsumptionBox {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn num_pooled(&self) -> usize {
        self.num_pooled
    }

    pub fn num_per_action(&self) -> usize {
        self.num_per_action
    }

    pub fn scalers(&self) -> Option<&[f64]> {
        self.scalers.as_deref()
    }

    pub fn scaler(&self, j: usize, action: usize) -> f64 {
        match &self.scalers {
            Some(s) => s[action * self.num_per_action + j],
            None => 1.0,
        }
    }

    pub fn fns(&self) -> &dyn ProblemFns {
        self.fns.as_ref()
    }

    pub fn payoff(&self, action: usize, c: &[f64]) -> f64 {
        self.fns.payoff(action, c)
    }

    /// Fills `out` with payoff, pooled values and scaled per-action values.
    pub fn evaluate_into(&self, action: usize, c: &[f64], out: &mut Evaluation) -> Result<(), EvalError> {
        if action >= self.actions.len() {
            return Err(EvalError::InvalidAction(action));
        }
        if !self.bounds.contains(c) {
            return Err(EvalError::OutOfBox { action, consumption: c.to_vec() });
        }
        self.evaluate_unchecked(action, c, out);
        let non_finite = |what| EvalError::NonFinite { what, action, consumption: c.to_vec() };
        if !out.payoff.is_finite() {
            return Err(non_finite("payoff"));
        }
        if !out.pooled.iter().all(|v| v.is_finite()) {
            return Err(non_finite("pooled constraint"));
        }
        if !out.per_action.iter().all(|v| v.is_finite()) {
            return Err(non_finite("per-action constraint"));
        }
        Ok(())
    }

    pub fn evaluate(&self, action: usize, c: &[f64]) -> Result<Evaluation, EvalError> {
        let mut out = Evaluation::for_problem(self);
        self.evaluate_into(action, c, &mut out)?;
        Ok(out)
    }

    /// Lagrangian at `(action, c)` without box checks. Pass `rows_active =
    /// false` only when the action's `gamma` column is zero; the per-action
    /// rows are then skipped.
    pub(crate) fn lagrangian_unchecked(
        &self,
        action: usize,
        c: &[f64],
        mult: &MultiplierState,
        rows_active: bool,
        scratch: &mut Evaluation,
    ) -> f64 {
        if !rows_active {
            scratch.payoff = self.fns.payoff(action, c);
            self.fns.pooled(action, c, &mut scratch.pooled);
            let pooled: f64 = mult.lambda.iter().zip(&scratch.pooled).map(|(l, g)| l * g).sum();
            scratch.payoff - pooled
        } else {
            self.evaluate_unchecked(action, c, scratch);
            lagrangian_from(scratch, action, mult)
        }
    }

    pub(crate) fn evaluate_unchecked(&self, action: usize, c: &[f64], out: &mut Evaluation) {
        out.payoff = self.fns.payoff(action, c);
        self.fns.pooled(action, c, &mut out.pooled);
        self.fns.per_action(action, c, &mut out.per_action);
        if let Some(s) = &self.scalers {
            let l = self.num_per_action;
            for (h, s) in out.per_action.iter_mut().zip(&s[action * l..(action + 1) * l]) {
                *h *= s;
            }
        }
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

type PointFn = Box<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Builds a [`LotteryProblem`] from closures `(action point, c) -> value`.
pub struct ProblemBuilder {
    actions: Vec<Vec<f64>>,
    bounds: ConsumptionBox,
    payoff: Option<PointFn>,
    pooled: Vec<PointFn>,
    per_action: Vec<PointFn>,
}

impl ProblemBuilder {
    pub fn payoff(mut self, f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.payoff = Some(Box::new(f));
        self
    }

    pub fn pooled(mut self, g: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.pooled.push(Box::new(g));
        self
    }

    pub fn per_action(mut self, h: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.per_action.push(Box::new(h));
        self
    }

    pub fn build(self) -> Result<LotteryProblem, ProblemError> {
        let payoff = self.payoff.ok_or(ProblemError::MissingPayoff)?;
        let (m, l) = (self.pooled.len(), self.per_action.len());
        let fns = ClosureFns { points: self.actions.clone(), payoff, pooled: self.pooled, per_action: self.per_action };
        LotteryProblem::new(self.actions, self.bounds, m, l, Arc::new(fns))
    }
}

struct ClosureFns {
    points: Vec<Vec<f64>>,
    payoff: PointFn,
    pooled: Vec<PointFn>,
    per_action: Vec<PointFn>,
}

impl ProblemFns for ClosureFns {
    fn payoff(&self, action: usize, c: &[f64]) -> f64 {
        (self.payoff)(&self.points[action], c)
    }

    fn pooled(&self, action: usize, c: &[f64], out: &mut [f64]) {
        for (o, g) in out.iter_mut().zip(&self.pooled) {
            *o = g(&self.points[action], c);
        }
    }

    fn per_action(&self, action: usize, c: &[f64], out: &mut [f64]) {
        for (o, h) in out.iter_mut().zip(&self.per_action) {
            *o = h(&self.points[action], c);
        }
    }
}
