//! Mirrleesian income taxation with types differing in productivity `w` and
//! Frisch elasticity `eta`. Utility is `log c - psi (y / w)^p / p` with
//! `p = 1 / eta + 1`. The planner picks one `(c_h, y_h)` per type; with a
//! single action every row is a pooled constraint.

use std::sync::Arc;

use lottery_core::{
    cluster_values, construct_lottery, run_iteration_loop_with, Argmax, ConsumptionBox, Evaluation, InnerError,
    InnerSolver, IterateLog, LogDetail, LoopOptions, LotteryProblem, LotterySolution, MultiplierState, ProblemFns,
    StepSchedule, Window,
};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

const SCAN_POINTS: usize = 512;
const GOLDEN_ITERS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaxType {
    pub w: f64,
    pub eta: f64,
    pub psi: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxEconomy {
    pub types: Vec<TaxType>,
    /// Consumption floor, strictly positive.
    pub c_min: f64,
    pub c_max: f64,
    /// Output bound per type is `ell_max * w`.
    pub ell_max: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcMode {
    /// Every ordered pair of distinct types.
    #[default]
    Full,
    /// Only pairs `(h, h')` with `eta_h >= eta_h'`.
    Partial,
}

pub const JUDD_W: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];
pub const JUDD_ETA: [f64; 5] = [1.0, 1.0 / 2.0, 1.0 / 3.0, 1.0 / 5.0, 1.0 / 8.0];

impl TaxEconomy {
    /// Uniform weights over the given `(w, eta)` pairs with `psi = 1`.
    pub fn from_pairs(pairs: &[(f64, f64)], c_min: f64, c_max: f64, ell_max: f64) -> Self {
        let omega = 1.0 / pairs.len() as f64;
        let types = pairs.iter().map(|&(w, eta)| TaxType { w, eta, psi: 1.0, omega }).collect();
        Self { types, c_min, c_max, ell_max }
    }

    /// Five productivities by five elasticities, productivity-major.
    pub fn judd25() -> Self {
        let pairs: Vec<(f64, f64)> = JUDD_W.iter().flat_map(|&w| JUDD_ETA.iter().map(move |&e| (w, e))).collect();
        Self::from_pairs(&pairs, 0.01, 20.0, 1.2)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.types.is_empty() {
            return Err(ModelError::Invalid("economy has no types".into()));
        }
        for (h, t) in self.types.iter().enumerate() {
            if !(t.w > 0.0 && t.eta > 0.0 && t.psi > 0.0 && t.omega > 0.0) {
                return Err(ModelError::Invalid(format!("type {h} has a nonpositive parameter")));
            }
        }
        let total: f64 = self.types.iter().map(|t| t.omega).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(ModelError::Invalid(format!("type weights sum to {total}")));
        }
        if !(self.c_min > 0.0 && self.c_max > self.c_min && self.c_max.is_finite()) {
            return Err(ModelError::Invalid(format!("consumption bounds [{}, {}]", self.c_min, self.c_max)));
        }
        if !(self.ell_max > 0.0 && self.ell_max.is_finite()) {
            return Err(ModelError::Invalid(format!("labor bound {}", self.ell_max)));
        }
        Ok(())
    }

    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    pub fn exponent(&self, h: usize) -> f64 {
        1.0 / self.types[h].eta + 1.0
    }

    /// `psi / (w^p p)`, so that disutility is `psi_tilde y^p`.
    pub fn psi_tilde(&self, h: usize) -> f64 {
        let t = &self.types[h];
        let p = self.exponent(h);
        t.psi / (t.w.powf(p) * p)
    }

    pub fn utility(&self, h: usize, c: f64, y: f64) -> f64 {
        c.ln() - self.psi_tilde(h) * power(y, self.exponent(h))
    }

    pub fn y_max(&self, h: usize) -> f64 {
        self.ell_max * self.types[h].w
    }

    /// Ordered incentive pairs `(h, h')`: type `h` must not prefer the bundle
    /// of `h'`.
    pub fn ic_pairs(&self, mode: IcMode) -> Vec<(usize, usize)> {
        let n = self.num_types();
        let mut out = Vec::new();
        for h in 0..n {
            for k in 0..n {
                if h != k && (mode == IcMode::Full || self.types[h].eta >= self.types[k].eta) {
                    out.push((h, k));
                }
            }
        }
        out
    }

    /// Weighted welfare `sum_h omega_h u_h(c_h, y_h)` of a deterministic
    /// allocation.
    pub fn welfare(&self, allocation: &[(f64, f64)]) -> f64 {
        allocation.iter().enumerate().map(|(h, &(c, y))| self.types[h].omega * self.utility(h, c, y)).sum()
    }
}

/// `y^p`, using integer powers when `p` is integral.
fn power(y: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= 64.0 {
        y.powi(p as i32)
    } else {
        y.powf(p)
    }
}

/// Shared evaluation data: distinct exponents and per-type lookups.
#[derive(Debug, Clone)]
struct TaxData {
    omega: Vec<f64>,
    psi_tilde: Vec<f64>,
    /// Index into `exponents` per type.
    kind: Vec<usize>,
    exponents: Vec<f64>,
    pairs: Vec<(usize, usize)>,
}

impl TaxData {
    fn new(econ: &TaxEconomy, mode: IcMode) -> Self {
        let n = econ.num_types();
        let mut exponents: Vec<f64> = Vec::new();
        let mut kind = Vec::with_capacity(n);
        for h in 0..n {
            let p = econ.exponent(h);
            let k = match exponents.iter().position(|&e| e == p) {
                Some(k) => k,
                None => {
                    exponents.push(p);
                    exponents.len() - 1
                }
            };
            kind.push(k);
        }
        Self {
            omega: econ.types.iter().map(|t| t.omega).collect(),
            psi_tilde: (0..n).map(|h| econ.psi_tilde(h)).collect(),
            kind,
            exponents,
            pairs: econ.ic_pairs(mode),
        }
    }

    fn n(&self) -> usize {
        self.omega.len()
    }

    /// `y_h^{p_k}` for every type and distinct exponent, `h`-major.
    fn powers(&self, x: &[f64]) -> Vec<f64> {
        let kk = self.exponents.len();
        let mut out = vec![0.0; self.n() * kk];
        for h in 0..self.n() {
            for (k, &p) in self.exponents.iter().enumerate() {
                out[h * kk + k] = power(x[2 * h + 1], p);
            }
        }
        out
    }
}

impl ProblemFns for TaxData {
    fn payoff(&self, _a: usize, x: &[f64]) -> f64 {
        (0..self.n())
            .map(|h| {
                self.omega[h] * (x[2 * h].ln() - self.psi_tilde[h] * power(x[2 * h + 1], self.exponents[self.kind[h]]))
            })
            .sum()
    }

    fn pooled(&self, _a: usize, x: &[f64], out: &mut [f64]) {
        let kk = self.exponents.len();
        let pw = self.powers(x);
        let u = |h: usize, k: usize| x[2 * k].ln() - self.psi_tilde[h] * pw[k * kk + self.kind[h]];
        for (o, &(h, k)) in out.iter_mut().zip(&self.pairs) {
            *o = u(h, k) - u(h, h);
        }
        out[self.pairs.len()] = (0..self.n()).map(|h| self.omega[h] * (x[2 * h] - x[2 * h + 1])).sum();
    }

    fn per_action(&self, _a: usize, _x: &[f64], _out: &mut [f64]) {}
}

/// Lottery problem over interleaved `(c_0, y_0, c_1, y_1, ...)` with the
/// incentive rows of `mode` followed by the resource row.
pub fn tax_to_problem(econ: &TaxEconomy, mode: IcMode) -> Result<(LotteryProblem, TaxInnerSolver), ModelError> {
    econ.validate()?;
    let data = TaxData::new(econ, mode);
    let n = econ.num_types();
    let mut lower = Vec::with_capacity(2 * n);
    let mut upper = Vec::with_capacity(2 * n);
    for h in 0..n {
        lower.extend([econ.c_min, 0.0]);
        upper.extend([econ.c_max, econ.y_max(h)]);
    }
    let bounds = ConsumptionBox::new(lower, upper)?;
    let m = data.pairs.len() + 1;
    let problem = LotteryProblem::new(vec![vec![0.0]], bounds, m, 0, Arc::new(data.clone()))?;
    Ok((problem, TaxInnerSolver::new(econ, data)))
}

/// Per-type maximizer of the decomposed Lagrangian.
#[derive(Debug, Clone)]
pub struct TaxInnerSolver {
    data: TaxData,
    c_bounds: (f64, f64),
    y_max: Vec<f64>,
    /// Rows `(h, h')` owned by type `h`.
    own_rows: Vec<Vec<usize>>,
    /// Rows `(h', h)` in which type `h`'s bundle is the mimicked one.
    mimic_rows: Vec<Vec<(usize, usize)>>,
    /// Scan grid powers, `[h][point][exponent]`.
    scan: Vec<Vec<f64>>,
}

impl TaxInnerSolver {
    fn new(econ: &TaxEconomy, data: TaxData) -> Self {
        let n = econ.num_types();
        let mut own_rows = vec![Vec::new(); n];
        let mut mimic_rows = vec![Vec::new(); n];
        for (row, &(h, k)) in data.pairs.iter().enumerate() {
            own_rows[h].push(row);
            mimic_rows[k].push((row, h));
        }
        let y_max: Vec<f64> = (0..n).map(|h| econ.y_max(h)).collect();
        let kk = data.exponents.len();
        let scan = (0..n)
            .map(|h| {
                let mut v = Vec::with_capacity(SCAN_POINTS * kk);
                for i in 0..SCAN_POINTS {
                    let y = scan_point(y_max[h], i);
                    v.extend(data.exponents.iter().map(|&p| power(y, p)));
                }
                v
            })
            .collect();
        Self { data, c_bounds: (econ.c_min, econ.c_max), y_max, own_rows, mimic_rows, scan }
    }

    /// Maximizer `(c_h, y_h)` of type `h`'s share of the Lagrangian.
    pub fn type_argmax(&self, h: usize, lambda: &[f64]) -> (f64, f64) {
        let d = &self.data;
        let gamma = lambda[d.pairs.len()];
        let own: f64 = self.own_rows[h].iter().map(|&r| lambda[r]).sum();
        let mimic: f64 = self.mimic_rows[h].iter().map(|&(r, _)| lambda[r]).sum();
        let log_coef = d.omega[h] + own - mimic;
        let (lo, hi) = self.c_bounds;
        let c = if log_coef <= 0.0 {
            lo
        } else if gamma > 0.0 {
            (log_coef / (gamma * d.omega[h])).clamp(lo, hi)
        } else {
            hi
        };

        let kk = d.exponents.len();
        let mut coef = vec![0.0; kk];
        coef[d.kind[h]] -= (d.omega[h] + own) * d.psi_tilde[h];
        for &(r, k) in &self.mimic_rows[h] {
            coef[d.kind[k]] += lambda[r] * d.psi_tilde[k];
        }
        let linear = gamma * d.omega[h];
        let phi = |y: f64| -> f64 {
            let mut v = linear * y;
            for (k, &a) in coef.iter().enumerate() {
                if a != 0.0 {
                    v += a * power(y, d.exponents[k]);
                }
            }
            v
        };
        let table = &self.scan[h];
        let mut best = (0usize, f64::NEG_INFINITY);
        for i in 0..SCAN_POINTS {
            let row = &table[i * kk..(i + 1) * kk];
            let v = linear * scan_point(self.y_max[h], i) + coef.iter().zip(row).map(|(a, p)| a * p).sum::<f64>();
            if v > best.1 {
                best = (i, v);
            }
        }
        let (i, scan_value) = best;
        let a = scan_point(self.y_max[h], i.saturating_sub(1));
        let b = scan_point(self.y_max[h], (i + 1).min(SCAN_POINTS - 1));
        let y_scan = scan_point(self.y_max[h], i);
        let y_refined = golden_max(&phi, a, b);
        let y = if phi(y_refined) > scan_value { y_refined } else { y_scan };
        (c, y)
    }
}

fn scan_point(y_max: f64, i: usize) -> f64 {
    if i == SCAN_POINTS - 1 {
        y_max
    } else {
        y_max * i as f64 / (SCAN_POINTS - 1) as f64
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERS {
        if b - a <= 1e-13 * b.abs().max(1.0) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

impl InnerSolver for TaxInnerSolver {
    fn argmax(&self, problem: &LotteryProblem, mult: &MultiplierState) -> Result<Argmax, InnerError> {
        let n = self.data.n();
        if problem.dim() != 2 * n || mult.lambda.len() != self.data.pairs.len() + 1 {
            return Err(InnerError::Incompatible("taxation solver built for a different economy".into()));
        }
        let mut x = vec![0.0; 2 * n];
        for h in 0..n {
            let (c, y) = self.type_argmax(h, &mult.lambda);
            x[2 * h] = c;
            x[2 * h + 1] = y;
        }
        let mut eval = Evaluation::for_problem(problem);
        problem.evaluate_into(0, &x, &mut eval)?;
        let value = lottery_core::lagrangian::lagrangian_from(&eval, 0, mult);
        Ok(Argmax { action: 0, consumption: x, value })
    }
}

/// Iteration settings for a taxation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaxRun {
    pub mode: IcMode,
    pub schedule: StepSchedule,
    pub n_iters: usize,
    /// Defaults to the last 5% of iterations.
    pub window: Option<Window>,
    pub cluster_tol: f64,
    /// Initial multiplier on every incentive row.
    pub ic_lambda0: f64,
    /// Initial multiplier on the resource row.
    pub resource_lambda0: f64,
}

impl Default for TaxRun {
    fn default() -> Self {
        Self {
            mode: IcMode::Full,
            schedule: StepSchedule::new(0.05, 0.0, 0.51).expect("valid default schedule"),
            n_iters: 100_000,
            window: None,
            cluster_tol: 1e-2,
            ic_lambda0: 0.0,
            resource_lambda0: 0.5,
        }
    }
}

/// Per-type summary of a lottery: mean consumption and clustered marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeMarginal {
    pub w: f64,
    pub eta: f64,
    pub c_mean: f64,
    pub c_clusters: Vec<(f64, f64)>,
    pub y_clusters: Vec<(f64, f64)>,
}

impl TypeMarginal {
    /// Mass of the heaviest cluster in either coordinate.
    pub fn concentration(&self) -> f64 {
        let top = |v: &[(f64, f64)]| v.iter().map(|c| c.1).fold(0.0, f64::max);
        top(&self.c_clusters).min(top(&self.y_clusters))
    }
}

#[derive(Debug, Clone)]
pub struct TaxSolution {
    pub problem: LotteryProblem,
    pub log: IterateLog,
    pub lottery: LotterySolution,
    pub marginals: Vec<TypeMarginal>,
}

pub fn marginals(econ: &TaxEconomy, lottery: &LotterySolution, tol: f64) -> Vec<TypeMarginal> {
    (0..econ.num_types())
        .map(|h| {
            let cs = lottery.coordinate_marginal(2 * h);
            let ys = lottery.coordinate_marginal(2 * h + 1);
            TypeMarginal {
                w: econ.types[h].w,
                eta: econ.types[h].eta,
                c_mean: cs.iter().map(|(c, p)| c * p).sum(),
                c_clusters: cluster_values(&cs, tol),
                y_clusters: cluster_values(&ys, tol),
            }
        })
        .collect()
}

pub fn solve_tax(econ: &TaxEconomy, run: &TaxRun) -> Result<TaxSolution, ModelError> {
    let (problem, solver) = tax_to_problem(econ, run.mode)?;
    let m = problem.num_pooled();
    let mut lambda = vec![run.ic_lambda0; m];
    lambda[m - 1] = run.resource_lambda0;
    let init = MultiplierState::from_parts(&problem, lambda, vec![])?;
    let opts = LoopOptions { detail: LogDetail::Summary, snapshot_every: None };
    let log = run_iteration_loop_with(&problem, init, &run.schedule, run.n_iters, &solver, opts)?;
    let window = run.window.unwrap_or_else(|| Window::default_for(run.n_iters));
    let lottery = construct_lottery(&problem, &log, window, run.cluster_tol)?;
    let marginals = marginals(econ, &lottery, run.cluster_tol.max(0.02));
    Ok(TaxSolution { problem, log, lottery, marginals })
}

/// Published deterministic optimum for the 25-type economy at
/// `ell_max = 1.2`, as `(c, y)` in productivity-major order.
pub const JUDD25_DETERMINISTIC: [(f64, f64); 25] = [
    (1.68, 0.42),
    (1.77, 0.62),
    (1.79, 0.65),
    (1.83, 0.77),
    (1.86, 0.86),
    (1.86, 0.86),
    (2.03, 1.39),
    (2.07, 1.50),
    (2.16, 1.74),
    (2.20, 1.83),
    (2.20, 1.83),
    (2.47, 2.49),
    (2.47, 2.49),
    (2.55, 2.68),
    (2.62, 2.85),
    (3.36, 4.00),
    (3.36, 4.00),
    (3.36, 4.00),
    (3.36, 4.00),
    (3.36, 4.00),
    (4.87, 5.87),
    (4.49, 5.56),
    (4.34, 5.43),
    (4.11, 5.24),
    (4.00, 5.14),
];
