use crate::error::{EvalError, InnerError, ProblemError};
use crate::inner::{Argmax, InnerSolver};
use crate::multipliers::MultiplierState;
use crate::problem::{ConsumptionBox, Evaluation, LotteryProblem};

/// Exhaustive search over a tensor grid of the consumption box.
///
/// Points are stored flattened in lexicographic order (first coordinate
/// slowest), so scanning actions in index order and points in storage order
/// with a strict comparison realizes the tie-break.
#[derive(Debug, Clone, PartialEq)]
pub struct GridInnerSolver {
    axes: Vec<Vec<f64>>,
    points: Vec<f64>,
}

impl GridInnerSolver {
    /// Evenly spaced grid with `counts[r]` points on coordinate `r`, endpoints
    /// included. A count of one places the point at the lower bound.
    pub fn new(bounds: &ConsumptionBox, counts: &[usize]) -> Result<Self, ProblemError> {
        if counts.len() != bounds.dim() {
            return Err(ProblemError::BoundLength(counts.len(), bounds.dim()));
        }
        let mut axes = Vec::with_capacity(counts.len());
        for (r, &n) in counts.iter().enumerate() {
            let (lo, hi) = (bounds.lower()[r], bounds.upper()[r]);
            if n == 0 || !hi.is_finite() {
                return Err(ProblemError::BadInterval { coord: r, lower: lo, upper: hi });
            }
            let axis = if n == 1 {
                vec![lo]
            } else {
                let h = (hi - lo) / (n - 1) as f64;
                (0..n).map(|i| if i == n - 1 { hi } else { lo + h * i as f64 }).collect()
            };
            axes.push(axis);
        }
        Ok(Self::from_axes(axes))
    }

    /// Grid from explicit, strictly increasing axes.
    pub fn from_axes(axes: Vec<Vec<f64>>) -> Self {
        let dim = axes.len();
        let total: usize = axes.iter().map(Vec::len).product();
        let mut points = Vec::with_capacity(total * dim);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            points.extend(idx.iter().enumerate().map(|(r, &i)| axes[r][i]));
            for r in (0..dim).rev() {
                idx[r] += 1;
                if idx[r] < axes[r].len() {
                    break;
                }
                idx[r] = 0;
            }
        }
        Self { axes, points }
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        if self.axes.is_empty() {
            0
        } else {
            self.points.len() / self.axes.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.points[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim().max(1))
    }
}

impl InnerSolver for GridInnerSolver {
    fn argmax(&self, problem: &LotteryProblem, mult: &MultiplierState) -> Result<Argmax, InnerError> {
        if self.dim() != problem.dim() || self.is_empty() {
            return Err(InnerError::Incompatible(format!(
                "grid of dimension {} with {} points for a {}-dimensional box",
                self.dim(),
                self.len(),
                problem.dim()
            )));
        }
        if !self.points().all(|c| problem.bounds().contains(c)) {
            return Err(InnerError::Incompatible("grid point outside the consumption box".into()));
        }
        let mut eval = Evaluation::for_problem(problem);
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..problem.num_actions() {
            let active = mult.column_is_active(a);
            for (i, c) in self.points().enumerate() {
                let v = problem.lagrangian_unchecked(a, c, mult, active, &mut eval);
                if !v.is_finite() {
                    problem.evaluate_into(a, c, &mut eval)?;
                    return Err(EvalError::NonFinite { what: "lagrangian", action: a, consumption: c.to_vec() }.into());
                }
                if best.is_none_or(|(_, _, b)| v > b) {
                    best = Some((a, i, v));
                }
            }
        }
        let (action, i, value) = best.expect("grid and action set are nonempty");
        Ok(Argmax { action, consumption: self.point(i).to_vec(), value })
    }
}
