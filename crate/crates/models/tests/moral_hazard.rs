use lottery_core::{
    dual_value, eval_lagrangian, FocInnerSolver, GridInnerSolver, InnerSolver, LotteryProblem, MultiplierState,
};
use lottery_models::moral_hazard::{high_output_probability, solve_example1};
use lottery_models::{Example1, IcScaling, MoralHazardModel, MoralHazardParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(problem: &LotteryProblem, rng: &mut ChaCha8Rng, lambda_max: f64, gamma_max: f64) -> MultiplierState {
    let mut m = MultiplierState::zeros(problem);
    m.lambda[0] = rng.gen_range(0.0..lambda_max);
    for g in m.gamma.iter_mut() {
        // Sparse columns, like the iterates.
        if rng.gen_bool(0.3) {
            *g = rng.gen_range(0.0..gamma_max);
        }
    }
    m
}

#[test]
fn example1_action_lottery() {
    let sol = solve_example1(&Example1::default()).unwrap();
    let p_low = sol.probability_of(0.05);
    assert!((0.08..=0.11).contains(&p_low), "P(0.05) = {p_low}");
    let low: Vec<_> = sol.lottery.atoms.iter().filter(|a| a.action == 0).collect();
    assert_eq!(low.len(), 1);
    for c in &low[0].consumption {
        assert!((c - 1.20).abs() <= 0.03, "{c}");
    }
    let high = sol
        .lottery
        .atoms
        .iter()
        .filter(|a| a.action != 0)
        .max_by(|a, b| a.probability.total_cmp(&b.probability))
        .unwrap();
    assert!((sol.model.actions[high.action] - 1.075).abs() < 1e-9);
    assert!((high.consumption[0] - 0.545).abs() <= 0.03);
    assert!((high.consumption[1] - 1.40).abs() <= 0.03);
}

#[test]
fn example1_low_action_contract_is_full_insurance() {
    let sol = solve_example1(&Example1::default()).unwrap();
    let low = sol.lottery.atoms.iter().find(|a| a.action == 0).unwrap();
    assert!((low.consumption[0] - low.consumption[1]).abs() < 1e-9);
}

#[test]
fn technology_is_increasing_in_effort() {
    let mut last = 0.0;
    for i in 0..=190 {
        let a = 0.05 + 0.01 * i as f64;
        let p = high_output_probability(a, 0.2);
        assert!(p >= last && (0.0..=1.0).contains(&p));
        last = p;
    }
}

#[test]
fn unscaled_and_scaled_problems_share_the_feasible_set() {
    let scaled = MoralHazardModel::new(MoralHazardParams::with_da(0.2)).unwrap();
    let plain =
        MoralHazardModel::new(MoralHazardParams { ic_scaling: IcScaling::None, ..MoralHazardParams::with_da(0.2) })
            .unwrap();
    let (ps, _) = scaled.to_problem().unwrap();
    let (pp, _) = plain.to_problem().unwrap();
    let c = [0.7, 1.3];
    for a in 0..scaled.num_actions() {
        let es = ps.evaluate(a, &c).unwrap();
        let ep = pp.evaluate(a, &c).unwrap();
        for (j, (hs, hp)) in es.per_action.iter().zip(&ep.per_action).enumerate() {
            assert_eq!(hs.signum(), hp.signum());
            let d = (scaled.actions[a] - scaled.actions[MoralHazardModel::deviation(a, j)]).abs();
            assert!((hs * d - hp).abs() < 1e-12);
        }
    }
}

/// The Lagrangian is additive across the two output states, so a joint grid
/// maximum is the sum of per-coordinate scan maxima.
fn separable_grid_value(problem: &LotteryProblem, mult: &MultiplierState, points: usize) -> f64 {
    let (lo, hi) = (problem.bounds().lower()[0], problem.bounds().upper()[0]);
    let axis: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let mut best = f64::NEG_INFINITY;
    for a in 0..problem.num_actions() {
        let base = eval_lagrangian(problem, a, &[lo, lo], mult).unwrap();
        let mut total = base;
        for r in 0..2 {
            let mut top = f64::NEG_INFINITY;
            for &x in &axis {
                let mut c = [lo, lo];
                c[r] = x;
                top = top.max(eval_lagrangian(problem, a, &c, mult).unwrap() - base);
            }
            total += top;
        }
        best = best.max(total);
    }
    best
}

#[test]
fn foc_matches_fine_grid() {
    let model = MoralHazardModel::new(MoralHazardParams::with_da(0.475)).unwrap();
    assert_eq!(model.num_actions(), 5);
    let (problem, spec) = model.to_problem().unwrap();
    let foc = FocInnerSolver::new(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let mult = random_state(&problem, &mut rng, 2.0, 1.0);
        let exact = foc.argmax(&problem, &mult).unwrap();
        let grid = separable_grid_value(&problem, &mult, 2001);
        assert!(exact.value >= grid - 1e-12, "{} < {}", exact.value, grid);
        assert!(exact.value - grid <= 5e-4, "{} vs {}", exact.value, grid);
    }
}

#[test]
fn separable_scan_agrees_with_joint_grid() {
    let model = MoralHazardModel::new(MoralHazardParams::with_da(0.475)).unwrap();
    let (problem, _) = model.to_problem().unwrap();
    let grid = GridInnerSolver::new(problem.bounds(), &[101, 101]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..5 {
        let mult = random_state(&problem, &mut rng, 2.0, 1.0);
        let joint = grid.argmax(&problem, &mult).unwrap().value;
        assert!((joint - separable_grid_value(&problem, &mult, 101)).abs() < 1e-12);
    }
}

fn subgradient_dot(
    problem: &LotteryProblem,
    at: &MultiplierState,
    action: usize,
    c: &[f64],
    to: &MultiplierState,
) -> f64 {
    let e = problem.evaluate(action, c).unwrap();
    let mut dot = 0.0;
    for (i, g) in e.pooled.iter().enumerate() {
        dot -= g * (to.lambda[i] - at.lambda[i]);
    }
    for (j, h) in e.per_action.iter().enumerate() {
        dot -= h * (to.gamma_at(j, action) - at.gamma_at(j, action));
    }
    dot
}

#[test]
fn example1_dual_is_convex_with_valid_subgradients() {
    let model = MoralHazardModel::new(MoralHazardParams::default()).unwrap();
    let (problem, spec) = model.to_problem().unwrap();
    let foc = FocInnerSolver::new(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let x = random_state(&problem, &mut rng, 2.0, 0.05);
        let y = random_state(&problem, &mut rng, 2.0, 0.05);
        let vx = dual_value(&problem, &x, &foc).unwrap();
        let vy = dual_value(&problem, &y, &foc).unwrap();
        let vm = dual_value(&problem, &x.midpoint(&y), &foc).unwrap();
        assert!(vm.value <= 0.5 * (vx.value + vy.value) + 1e-9);
        let lin = vx.value + subgradient_dot(&problem, &x, vx.action, &vx.consumption, &y);
        assert!(vy.value >= lin - 1e-9, "{} < {}", vy.value, lin);
    }
}
