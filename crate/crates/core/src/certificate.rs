use serde::{Deserialize, Serialize};

use crate::error::LotteryError;
use crate::iteration::IterateLog;
use crate::lottery::LotterySolution;
use crate::problem::{Evaluation, LotteryProblem};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpsOptimalityReport {
    pub objective: f64,
    /// `E[g_i]` per pooled constraint.
    pub expected_pooled: Vec<f64>,
    /// `max_i E[g_i]`, zero without pooled constraints.
    pub max_g_violation: f64,
    /// Max over `(j, a)` of `E[h_j | a]`; actions without mass count as zero.
    pub max_h_violation: f64,
    /// `min_k V(lambda^k, gamma^k)` over the whole log.
    pub dual_upper_bound: f64,
    pub duality_gap_bound: f64,
    pub certified_eps: f64,
    /// `(lambda_i^{N+1} - lambda_i^1) / sum_k mu^k` per pooled constraint,
    /// present when the window covers the whole log.
    pub feasibility_bounds: Option<Vec<f64>>,
}

impl EpsOptimalityReport {
    /// Largest `E[g_i] - bound_i`, when the analytic bounds are available.
    pub fn bound_excess(&self) -> Option<f64> {
        self.feasibility_bounds
            .as_ref()
            .map(|b| self.expected_pooled.iter().zip(b).map(|(g, b)| g - b).fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Expected violations, objective and duality gap of `lottery`.
pub fn certify_eps(
    problem: &LotteryProblem,
    lottery: &LotterySolution,
    log: &IterateLog,
) -> Result<EpsOptimalityReport, LotteryError> {
    let (m, l, n) = (problem.num_pooled(), problem.num_per_action(), problem.num_actions());
    let mut expected_pooled = vec![0.0; m];
    let mut cond = vec![0.0; l * n];
    let mut mass = vec![0.0; n];
    let mut objective = 0.0;
    let mut eval = Evaluation::for_problem(problem);
    for (i, atom) in lottery.atoms.iter().enumerate() {
        if atom.action >= n || !(atom.probability > 0.0) {
            return Err(LotteryError::BadAtom(i));
        }
        problem.evaluate_into(atom.action, &atom.consumption, &mut eval)?;
        let p = atom.probability;
        objective += p * eval.payoff;
        for (e, g) in expected_pooled.iter_mut().zip(&eval.pooled) {
            *e += p * g;
        }
        for (e, h) in cond[atom.action * l..(atom.action + 1) * l].iter_mut().zip(&eval.per_action) {
            *e += p * h;
        }
        mass[atom.action] += p;
    }
    let max_g_violation = if m == 0 { 0.0 } else { expected_pooled.iter().copied().fold(f64::NEG_INFINITY, f64::max) };
    let mut max_h_violation = if l == 0 { 0.0 } else { f64::NEG_INFINITY };
    for a in 0..n {
        for j in 0..l {
            let v = if mass[a] > 0.0 { cond[a * l + j] / mass[a] } else { 0.0 };
            max_h_violation = max_h_violation.max(v);
        }
    }
    let dual_upper_bound = log.min_dual_value();
    let duality_gap_bound = dual_upper_bound - objective;
    let certified_eps = max_g_violation.max(max_h_violation).max(duality_gap_bound);
    let feasibility_bounds = lottery.window.is_full(log.len()).then(|| {
        let total = log.step_sum();
        log.final_state
            .lambda
            .iter()
            .zip(&log.initial_state.lambda)
            .map(|(last, first)| (last - first) / total)
            .collect()
    });
    Ok(EpsOptimalityReport {
        objective,
        expected_pooled,
        max_g_violation,
        max_h_violation,
        dual_upper_bound,
        duality_gap_bound,
        certified_eps,
        feasibility_bounds,
    })
}
