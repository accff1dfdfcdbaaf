use serde::{Deserialize, Serialize};

use crate::instance::LpInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivot cap reached before termination.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective at `x`; meaningful when optimal.
    pub objective: f64,
    pub x: Vec<f64>,
    pub pivots: usize,
    /// Equality rows found linearly dependent and dropped after phase one.
    pub redundant_rows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexOptions {
    pub max_pivots: usize,
    /// Pivot and reduced-cost tolerance.
    pub tol: f64,
    /// Phase-one objective above which the instance is declared infeasible.
    pub feasibility_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_pivots: 1_000_000, tol: 1e-9, feasibility_tol: 1e-7 }
    }
}

pub fn simplex_solve(lp: &LpInstance) -> LpSolution {
    simplex_solve_with(lp, SimplexOptions::default())
}

/// Dense tableau with a basis; the last column holds the right-hand side.
struct Tableau {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    active: Vec<bool>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, r: usize, j: usize) -> f64 {
        self.data[r * self.width() + j]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize, z: &mut [f64]) {
        let w = self.width();
        let inv = 1.0 / self.at(pr, pc);
        for v in &mut self.data[pr * w..(pr + 1) * w] {
            *v *= inv;
        }
        self.data[pr * w + pc] = 1.0;
        let pivot_row: Vec<(usize, f64)> =
            self.data[pr * w..(pr + 1) * w].iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
        for r in 0..self.rows {
            if r == pr || !self.active[r] {
                continue;
            }
            let f = self.data[r * w + pc];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[r * w..(r + 1) * w];
            for &(j, v) in &pivot_row {
                row[j] -= f * v;
            }
            row[pc] = 0.0;
        }
        let f = z[pc];
        if f != 0.0 {
            for &(j, v) in &pivot_row {
                z[j] -= f * v;
            }
            z[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Reduced costs `c_B B^-1 A - c` for the cost vector `cost`, with the
    /// objective value in the last slot.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut z: Vec<f64> = cost.iter().map(|c| -c).chain(std::iter::once(0.0)).collect();
        for r in 0..self.rows {
            if !self.active[r] {
                continue;
            }
            let cb = cost[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            let w = self.width();
            for (zj, v) in z.iter_mut().zip(&self.data[r * w..(r + 1) * w]) {
                *zj += cb * v;
            }
        }
        z
    }

    /// Runs Bland's rule over columns with `allowed[j]`; returns the status
    /// (`None` when optimal).
    fn optimize(
        &mut self,
        z: &mut [f64],
        allowed: &[bool],
        opts: &SimplexOptions,
        pivots: &mut usize,
    ) -> Option<LpStatus> {
        loop {
            let entering = (0..self.cols).find(|&j| allowed[j] && z[j] < -opts.tol);
            let pc = entering?;
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                if !self.active[r] {
                    continue;
                }
                let a = self.at(r, pc);
                if a > opts.tol {
                    let ratio = self.rhs(r) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-12 || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((pr, _)) = leave else { return Some(LpStatus::Unbounded) };
            if *pivots >= opts.max_pivots {
                return Some(LpStatus::Stalled);
            }
            self.pivot(pr, pc, z);
            *pivots += 1;
        }
    }
}

/// Two-phase simplex. Columns are laid out as structural variables, then one
/// slack per inequality, then artificials for rows the slacks cannot seed.
pub fn simplex_solve_with(lp: &LpInstance, opts: SimplexOptions) -> LpSolution {
    let n = lp.num_vars();
    let n_eq = lp.equalities.len();
    let n_in = lp.inequalities.len();
    let rows = n_eq + n_in;

    // rows whose initial basic variable is a slack: inequalities with rhs >= 0
    let needs_art: Vec<bool> = (0..rows).map(|r| r < n_eq || lp.inequalities[r - n_eq].rhs < 0.0).collect();
    let n_art = needs_art.iter().filter(|&&b| b).count();
    let cols = n + n_in + n_art;
    let width = cols + 1;
    let mut data = vec![0.0; rows * width];
    let mut basis = vec![0; rows];
    let mut art = n + n_in;
    for (r, row) in lp.rows().enumerate() {
        let sign = if row.rhs < 0.0 { -1.0 } else { 1.0 };
        let line = &mut data[r * width..(r + 1) * width];
        for &(j, a) in &row.entries {
            line[j] += sign * a;
        }
        if r >= n_eq {
            line[n + r - n_eq] = sign;
        }
        line[cols] = sign * row.rhs;
        if needs_art[r] {
            line[art] = 1.0;
            basis[r] = art;
            art += 1;
        } else {
            basis[r] = n + r - n_eq;
        }
    }
    let mut t = Tableau { rows, cols, data, basis, active: vec![true; rows] };
    let mut pivots = 0;
    let is_art = |j: usize| j >= n + n_in;

    let finish = |t: &Tableau, status: LpStatus, pivots: usize| {
        let mut x = vec![0.0; n];
        for r in 0..t.rows {
            if t.active[r] && t.basis[r] < n {
                x[t.basis[r]] = t.rhs(r).max(0.0);
            }
        }
        let redundant_rows = t.active.iter().filter(|a| !**a).count();
        LpSolution { status, objective: lp.objective_value(&x), x, pivots, redundant_rows }
    };

    if n_art > 0 {
        let phase1: Vec<f64> = (0..cols).map(|j| if is_art(j) { -1.0 } else { 0.0 }).collect();
        let mut z = t.reduced_costs(&phase1);
        let allowed = vec![true; cols];
        if let Some(status) = t.optimize(&mut z, &allowed, &opts, &mut pivots) {
            // phase one is bounded below by zero, so only the cap can stop it
            return finish(&t, status, pivots);
        }
        if -z[cols] > opts.feasibility_tol {
            return finish(&t, LpStatus::Infeasible, pivots);
        }
        // drive remaining artificials out of the basis or drop their rows
        for r in 0..rows {
            if !is_art(t.basis[r]) {
                continue;
            }
            let pc = (0..n + n_in).find(|&j| t.at(r, j).abs() > opts.tol);
            match pc {
                Some(pc) => {
                    t.pivot(r, pc, &mut z);
                    pivots += 1;
                }
                None => t.active[r] = false,
            }
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&lp.objective);
    let mut z = t.reduced_costs(&cost);
    let allowed: Vec<bool> = (0..cols).map(|j| !is_art(j)).collect();
    let status = t.optimize(&mut z, &allowed, &opts, &mut pivots).unwrap_or(LpStatus::Optimal);
    finish(&t, status, pivots)
}
