use std::fmt;
use std::sync::Mutex;

use crate::error::{EvalError, InnerError};
use crate::inner::{Argmax, InnerSolver};
use crate::multipliers::MultiplierState;
use crate::problem::{Evaluation, LotteryProblem, ProblemFns};

const BISECTION_TOL: f64 = 1e-10;
const BISECTION_CAP: usize = 200;

/// Strictly increasing, strictly concave scalar transform `w_r`.
pub trait ConcaveTransform: Send + Sync + fmt::Debug {
    fn value(&self, c: f64) -> f64;
    fn derivative(&self, c: f64) -> f64;
    /// Inverse of the derivative, defined for `x > 0`.
    fn derivative_inverse(&self, x: f64) -> f64;
}

/// `w(c) = c^alpha` with `alpha` in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTransform {
    pub alpha: f64,
}

impl PowerTransform {
    pub fn new(alpha: f64) -> Option<Self> {
        (alpha > 0.0 && alpha < 1.0).then_some(Self { alpha })
    }

    pub fn sqrt() -> Self {
        Self { alpha: 0.5 }
    }
}

impl ConcaveTransform for PowerTransform {
    fn value(&self, c: f64) -> f64 {
        if self.alpha == 0.5 {
            c.sqrt()
        } else {
            c.powf(self.alpha)
        }
    }

    fn derivative(&self, c: f64) -> f64 {
        self.alpha * c.powf(self.alpha - 1.0)
    }

    fn derivative_inverse(&self, x: f64) -> f64 {
        if self.alpha == 0.5 {
            1.0 / (4.0 * x * x)
        } else {
            (x / self.alpha).powf(1.0 / (self.alpha - 1.0))
        }
    }
}

/// `w(c) = ln(c + shift)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogTransform {
    pub shift: f64,
}

impl ConcaveTransform for LogTransform {
    fn value(&self, c: f64) -> f64 {
        (c + self.shift).ln()
    }

    fn derivative(&self, c: f64) -> f64 {
        1.0 / (c + self.shift)
    }

    fn derivative_inverse(&self, x: f64) -> f64 {
        1.0 / x - self.shift
    }
}

/// Coordinate-separable structure of a lottery problem:
///
/// `f(a, c) = u0(a) + sum_r u_r(a) w_r(c_r)`,
/// `h_j(a, c) = v_{j,0}(a) + sum_r v_{j,r}(a) w_r(c_r)` (before scaling),
/// and pooled constraints separable across coordinates.
pub trait SeparableSpec: Send + Sync {
    fn dim(&self) -> usize;
    fn transform(&self, r: usize) -> &dyn ConcaveTransform;
    fn payoff_constant(&self, action: usize) -> f64;
    fn payoff_weight(&self, action: usize, r: usize) -> f64;
    fn per_action_constant(&self, j: usize, action: usize) -> f64;
    fn per_action_weight(&self, j: usize, action: usize, r: usize) -> f64;
    /// True when every `g_i` is affine in `c`; `pooled_slope` then ignores `c_r`.
    fn linear_g(&self) -> bool {
        true
    }
    /// Partial derivative of `g_i` in `c_r`, which may depend on `c_r` only.
    fn pooled_slope(&self, i: usize, action: usize, r: usize, c_r: f64) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpecIssue {
    Dimension { spec: usize, problem: usize },
    NotIncreasing { coord: usize, at: f64 },
    NotConcave { coord: usize, at: f64 },
    InverseMismatch { coord: usize, at: f64, got: f64 },
    PayoffMismatch { action: usize, expected: f64, got: f64 },
    PerActionMismatch { j: usize, action: usize, expected: f64, got: f64 },
}

/// `sum_j gamma_j s_j v_{j,r}` per coordinate and `sum_j gamma_j s_j k_j`
/// for one `gamma` column, with the column they were computed from.
#[derive(Debug, Clone)]
struct ColumnTerms {
    gamma: Vec<f64>,
    weights: Vec<f64>,
    constant: f64,
}

/// Column aggregates from the previous call. Between subgradient steps only
/// one column moves, so most entries are reused.
#[derive(Debug, Default)]
struct TermCache {
    problem: (usize, usize),
    columns: Vec<Option<ColumnTerms>>,
}

/// Bitwise slice equality, compared as bytes so it runs as one `memcmp`.
fn same_bits(a: &[f64], b: &[f64]) -> bool {
    fn bytes(x: &[f64]) -> &[u8] {
        // SAFETY: f64 has no padding or invalid bit patterns, u8 has
        // alignment 1, and the length covers exactly the same memory.
        unsafe { std::slice::from_raw_parts(x.as_ptr().cast::<u8>(), std::mem::size_of_val(x)) }
    }
    bytes(a) == bytes(b)
}

/// Consumption-only FOC maximizer for separable problems.
pub struct FocInnerSolver<S> {
    spec: S,
    cache: Mutex<TermCache>,
}

impl<S: SeparableSpec> FocInnerSolver<S> {
    pub fn new(spec: S) -> Self {
        Self { spec, cache: Mutex::default() }
    }

    pub fn spec(&self) -> &S {
        &self.spec
    }

    /// Spot checks the spec against `problem` on sampled points.
    pub fn validate(&self, problem: &LotteryProblem) -> Result<(), SpecIssue> {
        let spec = &self.spec;
        let d = problem.dim();
        if spec.dim() != d {
            return Err(SpecIssue::Dimension { spec: spec.dim(), problem: d });
        }
        let fractions = [0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95];
        let sample = |r: usize, t: f64| {
            let (lo, hi) = (problem.bounds().lower()[r], problem.bounds().upper()[r]);
            if hi.is_finite() {
                lo + t * (hi - lo)
            } else {
                lo + 10.0 * t
            }
        };
        for r in 0..d {
            let w = spec.transform(r);
            let mut prev = f64::INFINITY;
            for &t in &fractions {
                let c = sample(r, t);
                let dw = w.derivative(c);
                if !(dw > 0.0) {
                    return Err(SpecIssue::NotIncreasing { coord: r, at: c });
                }
                if !(dw < prev) {
                    return Err(SpecIssue::NotConcave { coord: r, at: c });
                }
                prev = dw;
                let back = w.derivative_inverse(dw);
                if (back - c).abs() > 1e-10 * c.abs().max(1.0) {
                    return Err(SpecIssue::InverseMismatch { coord: r, at: c, got: back });
                }
            }
        }
        let fns = problem.fns();
        let mut h = vec![0.0; problem.num_per_action()];
        for a in 0..problem.num_actions() {
            for (s, &t) in fractions.iter().enumerate() {
                let c: Vec<f64> =
                    (0..d).map(|r| sample(r, fractions[(s + 3 * r) % fractions.len()] * 0.5 + t * 0.5)).collect();
                let wc: Vec<f64> = (0..d).map(|r| spec.transform(r).value(c[r])).collect();
                let f = spec.payoff_constant(a) + (0..d).map(|r| spec.payoff_weight(a, r) * wc[r]).sum::<f64>();
                let got = fns.payoff(a, &c);
                if (f - got).abs() > 1e-9 * f.abs().max(1.0) {
                    return Err(SpecIssue::PayoffMismatch { action: a, expected: f, got });
                }
                fns.per_action(a, &c, &mut h);
                for (j, &got) in h.iter().enumerate() {
                    let expected = spec.per_action_constant(j, a)
                        + (0..d).map(|r| spec.per_action_weight(j, a, r) * wc[r]).sum::<f64>();
                    if (expected - got).abs() > 1e-9 * expected.abs().max(1.0) {
                        return Err(SpecIssue::PerActionMismatch { j, action: a, expected, got });
                    }
                }
            }
        }
        Ok(())
    }

    fn column_terms(&self, problem: &LotteryProblem, gamma: &[f64], action: usize) -> ColumnTerms {
        let spec = &self.spec;
        let mut weights = vec![0.0; spec.dim()];
        let mut constant = 0.0;
        for (j, &y) in gamma.iter().enumerate() {
            if y != 0.0 {
                let ys = y * problem.scaler(j, action);
                constant += ys * spec.per_action_constant(j, action);
                for (r, w) in weights.iter_mut().enumerate() {
                    *w += ys * spec.per_action_weight(j, action, r);
                }
            }
        }
        ColumnTerms { gamma: gamma.to_vec(), weights, constant }
    }

    /// Maximizing consumption for a fixed action, written into `c`.
    pub fn consumption_for(
        &self,
        problem: &LotteryProblem,
        mult: &MultiplierState,
        action: usize,
        c: &mut [f64],
    ) -> Result<(), InnerError> {
        let terms = self.column_terms(problem, mult.gamma_column(action), action);
        self.consumption_with(problem, mult, action, &terms.weights, c)
    }

    fn consumption_with(
        &self,
        problem: &LotteryProblem,
        mult: &MultiplierState,
        action: usize,
        incentive: &[f64],
        c: &mut [f64],
    ) -> Result<(), InnerError> {
        let spec = &self.spec;
        for (r, cr) in c.iter_mut().enumerate() {
            let coef_a = spec.payoff_weight(action, r) - incentive[r];
            let lo = problem.bounds().lower()[r];
            let hi = problem.bounds().upper()[r];
            *cr = if spec.linear_g() {
                let coef_b: f64 =
                    mult.lambda.iter().enumerate().map(|(i, &l)| l * spec.pooled_slope(i, action, r, lo)).sum();
                self.closed_form(r, coef_a, coef_b, lo, hi).ok_or(InnerError::DualUnbounded { action, coord: r })?
            } else {
                self.bisect(mult, action, r, coef_a, lo, hi).ok_or(InnerError::DualUnbounded { action, coord: r })?
            };
        }
        Ok(())
    }

    /// Maximizer of `A w(c) - B c` on `[lo, hi]`, or `None` when unbounded.
    fn closed_form(&self, r: usize, coef_a: f64, coef_b: f64, lo: f64, hi: f64) -> Option<f64> {
        let w = self.spec.transform(r);
        if coef_a > 0.0 && coef_b > 0.0 {
            return Some(w.derivative_inverse(coef_b / coef_a).max(lo).min(hi));
        }
        if coef_a <= 0.0 && coef_b >= 0.0 {
            return Some(lo);
        }
        if !hi.is_finite() {
            return None;
        }
        if coef_a >= 0.0 {
            // increasing in c
            return Some(hi);
        }
        // convex in c: compare the endpoints
        let phi = |c: f64| coef_a * w.value(c) - coef_b * c;
        Some(if phi(hi) > phi(lo) { hi } else { lo })
    }

    /// Root of the FOC residual `A w'(c) - sum_i lambda_i dg_i/dc_r` by bisection.
    /// The residual is decreasing when each `g_i` is convex in `c_r`.
    fn bisect(&self, mult: &MultiplierState, action: usize, r: usize, coef_a: f64, lo: f64, hi: f64) -> Option<f64> {
        let spec = &self.spec;
        let w = spec.transform(r);
        let residual = |c: f64| {
            let slope: f64 = mult.lambda.iter().enumerate().map(|(i, &l)| l * spec.pooled_slope(i, action, r, c)).sum();
            coef_a * w.derivative(c) - slope
        };
        if coef_a <= 0.0 {
            return Some(lo);
        }
        if residual(lo) <= 0.0 {
            return Some(lo);
        }
        let mut upper = hi;
        if !upper.is_finite() {
            upper = lo.abs().max(1.0);
            let mut grown = 0;
            while residual(upper) > 0.0 {
                upper *= 2.0;
                grown += 1;
                if grown > BISECTION_CAP {
                    return None;
                }
            }
        } else if residual(upper) >= 0.0 {
            return Some(upper);
        }
        let (mut a, mut b) = (lo, upper);
        for _ in 0..BISECTION_CAP {
            if b - a <= BISECTION_TOL {
                break;
            }
            let mid = 0.5 * (a + b);
            if residual(mid) > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        Some(0.5 * (a + b))
    }
}

impl<S: SeparableSpec> InnerSolver for FocInnerSolver<S> {
    fn argmax(&self, problem: &LotteryProblem, mult: &MultiplierState) -> Result<Argmax, InnerError> {
        if self.spec.dim() != problem.dim() {
            return Err(InnerError::Incompatible(format!(
                "separable spec of dimension {} for a {}-dimensional box",
                self.spec.dim(),
                problem.dim()
            )));
        }
        let key = (
            problem.fns() as *const dyn ProblemFns as *const () as usize,
            problem.scalers().map_or(0, |s| s.as_ptr() as usize),
        );
        let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        if cache.problem != key || cache.columns.len() != problem.num_actions() {
            cache.problem = key;
            cache.columns = vec![None; problem.num_actions()];
        }
        let fns = problem.fns();
        let mut pooled = vec![0.0; problem.num_pooled()];
        let mut c = vec![0.0; problem.dim()];
        let mut best: Option<Argmax> = None;
        for a in 0..problem.num_actions() {
            let gamma = mult.gamma_column(a);
            let slot = &mut cache.columns[a];
            if slot.as_ref().is_none_or(|t| !same_bits(&t.gamma, gamma)) {
                *slot = Some(self.column_terms(problem, gamma, a));
            }
            let terms = slot.as_ref().expect("filled above");
            self.consumption_with(problem, mult, a, &terms.weights, &mut c)?;
            fns.pooled(a, &c, &mut pooled);
            let incentive: f64 = terms.constant
                + terms.weights.iter().enumerate().map(|(r, w)| w * self.spec.transform(r).value(c[r])).sum::<f64>();
            let v = fns.payoff(a, &c) - mult.lambda.iter().zip(&pooled).map(|(l, g)| l * g).sum::<f64>() - incentive;
            if !v.is_finite() {
                let mut eval = Evaluation::for_problem(problem);
                problem.evaluate_into(a, &c, &mut eval)?;
                return Err(EvalError::NonFinite { what: "lagrangian", action: a, consumption: c }.into());
            }
            if best.as_ref().is_none_or(|b| v > b.value) {
                best = Some(Argmax { action: a, consumption: c.clone(), value: v });
            }
        }
        Ok(best.expect("action set is nonempty"))
    }
}
