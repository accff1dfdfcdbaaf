mod common;

use std::sync::Arc;

use common::{sep_problem, Sep};
use lottery_core::inner::foc::SpecIssue;
use lottery_core::*;

/// One action, one coordinate: `f = u sqrt(c)`, `h = v sqrt(c) + v0`,
/// `g = c^power - 1`.
#[derive(Clone)]
struct Single {
    u: f64,
    v: f64,
    v0: f64,
    power: f64,
    linear: bool,
    w: PowerTransform,
}

impl Single {
    fn new(u: f64, v: f64) -> Self {
        Self { u, v, v0: -0.1, power: 1.0, linear: true, w: PowerTransform::sqrt() }
    }
}

impl ProblemFns for Single {
    fn payoff(&self, _a: usize, c: &[f64]) -> f64 {
        self.u * c[0].sqrt()
    }
    fn pooled(&self, _a: usize, c: &[f64], out: &mut [f64]) {
        out[0] = c[0].powf(self.power) - 1.0;
    }
    fn per_action(&self, _a: usize, c: &[f64], out: &mut [f64]) {
        out[0] = self.v * c[0].sqrt() + self.v0;
    }
}

impl SeparableSpec for Single {
    fn dim(&self) -> usize {
        1
    }
    fn transform(&self, _r: usize) -> &dyn ConcaveTransform {
        &self.w
    }
    fn payoff_constant(&self, _a: usize) -> f64 {
        0.0
    }
    fn payoff_weight(&self, _a: usize, _r: usize) -> f64 {
        self.u
    }
    fn per_action_constant(&self, _j: usize, _a: usize) -> f64 {
        self.v0
    }
    fn per_action_weight(&self, _j: usize, _a: usize, _r: usize) -> f64 {
        self.v
    }
    fn linear_g(&self) -> bool {
        self.linear
    }
    fn pooled_slope(&self, _i: usize, _a: usize, _r: usize, c: f64) -> f64 {
        self.power * c.powf(self.power - 1.0)
    }
}

fn single_problem(s: &Single, upper: f64) -> LotteryProblem {
    LotteryProblem::new(
        vec![vec![0.0]],
        ConsumptionBox::new(vec![0.0], vec![upper]).unwrap(),
        1,
        1,
        Arc::new(s.clone()),
    )
    .unwrap()
}

fn state(p: &LotteryProblem, lambda: f64, gamma: f64) -> MultiplierState {
    MultiplierState::uniform(p, lambda, gamma)
}

#[test]
fn sqrt_inverse_is_closed_form() {
    let w = PowerTransform::sqrt();
    assert_eq!(w.derivative_inverse(0.5), 1.0);
    let general = PowerTransform::new(0.5000000001).unwrap();
    assert!((general.derivative_inverse(0.5) - 1.0).abs() < 1e-8);
    assert!(PowerTransform::new(1.0).is_none());
}

#[test]
fn ratio_one_half_gives_unit_consumption() {
    let p = sep_problem(2.0);
    let foc = FocInnerSolver::new(Sep::new());
    let mut c = [0.0; 2];
    foc.consumption_for(&p, &state(&p, 0.5, 0.0), 1, &mut c).unwrap();
    assert_eq!(c, [1.0, 1.0]);
}

#[test]
fn nonpositive_a_goes_to_the_floor() {
    let s = Single::new(1.0, 2.0);
    let p = single_problem(&s, 4.0);
    let foc = FocInnerSolver::new(s);
    let arg = foc.argmax(&p, &state(&p, 0.5, 1.0)).unwrap();
    assert_eq!(arg.consumption, vec![0.0]);
    let arg = foc.argmax(&p, &state(&p, 0.5, 0.5)).unwrap();
    assert_eq!(arg.consumption, vec![0.0]);
}

#[test]
fn consumption_is_clipped_into_the_box() {
    let s = Single::new(1.0, 0.0);
    let p = single_problem(&s, 0.5);
    let foc = FocInnerSolver::new(s);
    // unclipped maximizer is 1 / (4 lambda^2) = 25
    let arg = foc.argmax(&p, &state(&p, 0.1, 0.0)).unwrap();
    assert_eq!(arg.consumption, vec![0.5]);
}

#[test]
fn zero_lambda_hits_the_cap_or_reports_unboundedness() {
    let s = Single::new(1.0, 0.0);
    let foc = FocInnerSolver::new(s.clone());
    let bounded = single_problem(&s, 3.0);
    assert_eq!(foc.argmax(&bounded, &state(&bounded, 0.0, 0.0)).unwrap().consumption, vec![3.0]);
    let open = single_problem(&s, f64::INFINITY);
    let err = foc.argmax(&open, &state(&open, 0.0, 0.0)).unwrap_err();
    assert_eq!(err, InnerError::DualUnbounded { action: 0, coord: 0 });
    let arg = foc.argmax(&open, &state(&open, 0.25, 0.0)).unwrap();
    assert_eq!(arg.consumption, vec![4.0]);
}

#[test]
fn bisection_matches_the_closed_form() {
    let mut s = Single::new(1.0, -0.5);
    let p = single_problem(&s, 10.0);
    let closed = FocInnerSolver::new(s.clone()).argmax(&p, &state(&p, 0.7, 0.3)).unwrap();
    s.linear = false;
    let bisected = FocInnerSolver::new(s).argmax(&p, &state(&p, 0.7, 0.3)).unwrap();
    assert!((closed.consumption[0] - bisected.consumption[0]).abs() < 1e-9);
}

#[test]
fn bisection_solves_a_convex_constraint() {
    // f = sqrt(c), g = c^2 - 1: 1 / (2 sqrt c) = 2 lambda c gives c = (4 lambda)^(-2/3)
    let mut s = Single::new(1.0, 0.0);
    s.power = 2.0;
    s.linear = false;
    for upper in [10.0, f64::INFINITY] {
        let p = single_problem(&s, upper);
        let foc = FocInnerSolver::new(s.clone());
        let c = foc.argmax(&p, &state(&p, 0.3, 0.0)).unwrap().consumption[0];
        assert!((c - (1.2f64).powf(-2.0 / 3.0)).abs() < 1e-9, "{c}");
    }
}

#[test]
fn spec_validation_catches_mismatches() {
    let p = sep_problem(2.0);
    assert_eq!(FocInnerSolver::new(Sep::new()).validate(&p), Ok(()));
    let mut wrong = Sep::new();
    wrong.costs[2] = 0.3;
    assert!(matches!(FocInnerSolver::new(wrong).validate(&p), Err(SpecIssue::PayoffMismatch { action: 2, .. })));
    let s = Single::new(1.0, 0.0);
    assert!(matches!(FocInnerSolver::new(s).validate(&p), Err(SpecIssue::Dimension { spec: 1, problem: 2 })));
}

#[test]
fn foc_agrees_with_a_fine_grid() {
    let p = sep_problem(2.0);
    let foc = FocInnerSolver::new(Sep::new());
    let grid = GridInnerSolver::new(p.bounds(), &[2001, 2001]).unwrap();
    for (lambda, gamma) in [(0.3, 0.0), (0.8, 0.4), (1.5, 0.1), (0.45, 2.0)] {
        let m = MultiplierState::uniform(&p, lambda, gamma);
        let a = foc.argmax(&p, &m).unwrap();
        let b = grid.argmax(&p, &m).unwrap();
        assert!(a.value >= b.value - 1e-12, "grid beats the FOC solution");
        assert!(a.value - b.value <= 5e-4, "{} vs {}", a.value, b.value);
    }
}

#[test]
fn reused_solver_matches_a_fresh_one() {
    let p = sep_problem(2.0);
    let q = sep_problem(3.0);
    let reused = FocInnerSolver::new(Sep::new());
    let mut m = MultiplierState::uniform(&p, 0.6, 0.2);
    for k in 0..12 {
        let problem = if k % 5 == 4 { &q } else { &p };
        let col = m.gamma_column_mut(k % 3);
        col[k % col.len()] += 0.15;
        let a = reused.argmax(problem, &m).unwrap();
        let b = FocInnerSolver::new(Sep::new()).argmax(problem, &m).unwrap();
        assert_eq!(a, b);
    }
}
