mod common;

use common::{sep_problem, Sep};
use lottery_core::*;
use proptest::prelude::*;

fn mult(p: &LotteryProblem, lambda: f64, gamma: &[f64]) -> MultiplierState {
    MultiplierState::from_parts(p, vec![lambda], gamma.to_vec()).unwrap()
}

/// `<m2 - m1, (g, h_a)>` for the constraint values at the maximizer of `m1`.
fn pairing(p: &LotteryProblem, arg: &Argmax, m1: &MultiplierState, m2: &MultiplierState) -> f64 {
    let e = p.evaluate(arg.action, &arg.consumption).unwrap();
    let mut s: f64 = m2.lambda.iter().zip(&m1.lambda).zip(&e.pooled).map(|((b, a), g)| (b - a) * g).sum();
    let (g2, g1) = (m2.gamma_column(arg.action), m1.gamma_column(arg.action));
    s += g2.iter().zip(g1).zip(&e.per_action).map(|((b, a), h)| (b - a) * h).sum::<f64>();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_is_midpoint_convex(l1 in 0.0..3.0f64, l2 in 0.0..3.0f64,
                               g1 in prop::collection::vec(0.0..2.0f64, 3),
                               g2 in prop::collection::vec(0.0..2.0f64, 3)) {
        let p = sep_problem(2.0);
        let grid = GridInnerSolver::new(p.bounds(), &[21, 21]).unwrap();
        let (m1, m2) = (mult(&p, l1, &g1), mult(&p, l2, &g2));
        let v1 = dual_value(&p, &m1, &grid).unwrap().value;
        let v2 = dual_value(&p, &m2, &grid).unwrap().value;
        let vm = dual_value(&p, &m1.midpoint(&m2), &grid).unwrap().value;
        prop_assert!(vm <= 0.5 * (v1 + v2) + 1e-9);
    }

    #[test]
    fn constraint_values_are_negative_subgradients(l1 in 0.05..3.0f64, l2 in 0.05..3.0f64,
                                                   g1 in prop::collection::vec(0.0..2.0f64, 3),
                                                   g2 in prop::collection::vec(0.0..2.0f64, 3)) {
        let p = sep_problem(2.0);
        let foc = FocInnerSolver::new(Sep::new());
        let (m1, m2) = (mult(&p, l1, &g1), mult(&p, l2, &g2));
        let a1 = dual_value(&p, &m1, &foc).unwrap();
        let v2 = dual_value(&p, &m2, &foc).unwrap().value;
        prop_assert!(v2 >= a1.value - pairing(&p, &a1, &m1, &m2) - 1e-9);
    }

    #[test]
    fn foc_consumption_is_a_boxed_local_max(lambda in 0.05..3.0f64,
                                            gamma in prop::collection::vec(0.0..2.0f64, 3)) {
        let p = sep_problem(2.0);
        let foc = FocInnerSolver::new(Sep::new());
        let m = mult(&p, lambda, &gamma);
        for a in 0..p.num_actions() {
            let mut c = vec![0.0; 2];
            foc.consumption_for(&p, &m, a, &mut c).unwrap();
            prop_assert!(p.bounds().contains(&c));
            let base = eval_lagrangian(&p, a, &c, &m).unwrap();
            for r in 0..2 {
                for d in [-1e-4, 1e-4] {
                    let mut q = c.clone();
                    q[r] = p.bounds().clamp(r, q[r] + d);
                    prop_assert!(eval_lagrangian(&p, a, &q, &m).unwrap() <= base + 1e-12);
                }
            }
        }
    }

    #[test]
    fn multipliers_stay_projected(lambda in 0.0..2.0f64, s in 0.1..5.0f64, p_exp in 0.51..1.0f64) {
        let p = sep_problem(2.0);
        let foc = FocInnerSolver::new(Sep::new());
        let schedule = StepSchedule::new(s, 10.0, p_exp).unwrap();
        let init = MultiplierState::uniform(&p, lambda.max(0.05), 0.0);
        let log = run_iteration_loop(&p, init, &schedule, 200, &foc).unwrap();
        prop_assert!(log.final_state.is_projected());
        let lot = construct_lottery(&p, &log, Window::full(200), 0.0).unwrap();
        let bounds = lot.eps_report.feasibility_bounds.clone().unwrap();
        for (g, b) in lot.eps_report.expected_pooled.iter().zip(&bounds) {
            prop_assert!(*g <= b + 1e-10);
        }
        let total: f64 = lot.atoms.iter().map(|a| a.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(lot.atoms.iter().all(|a| a.probability > 0.0 && p.bounds().contains(&a.consumption)));
    }
}
