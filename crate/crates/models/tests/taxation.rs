use lottery_core::{InnerSolver, MultiplierState, StepSchedule};
use lottery_models::taxation::{golden_max, solve_tax, tax_to_problem, JUDD25_DETERMINISTIC};
use lottery_models::{first_best, welfare_account, IcMode, TaxEconomy, TaxRun};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn equal_eta() -> TaxEconomy {
    TaxEconomy::from_pairs(&[(1.0, 0.5), (2.0, 0.5), (3.0, 0.5), (4.0, 0.5), (5.0, 0.5)], 0.01, 20.0, 1.2)
}

fn mild(ell_max: f64) -> TaxEconomy {
    TaxEconomy::from_pairs(&[(1.0, 1.0), (3.0, 1.0), (1.0, 0.5), (3.0, 0.5)], 0.01, 20.0, ell_max)
}

#[test]
fn single_type_closed_form() {
    for (w, eta) in [(1.0, 1.0), (2.0, 0.5), (3.0, 0.2), (5.0, 0.125)] {
        let econ = TaxEconomy::from_pairs(&[(w, eta)], 0.01, 20.0, 1.2);
        let (problem, solver) = tax_to_problem(&econ, IcMode::Full).unwrap();
        let mult = MultiplierState::from_parts(&problem, vec![1.0], vec![]).unwrap();
        let x = solver.argmax(&problem, &mult).unwrap().consumption;
        assert!((x[0] - 1.0).abs() < 1e-12);
        // psi_tilde p y^(p-1) = 1
        let p = 1.0 / eta + 1.0;
        let interior = (1.0 / (econ.psi_tilde(0) * p)).powf(1.0 / (p - 1.0));
        let expected = interior.min(econ.y_max(0));
        assert!((x[1] - expected).abs() < 1e-7, "w {w}: {} vs {expected}", x[1]);
        let phi = |y: f64| y - econ.psi_tilde(0) * y.powf(p);
        let ymax = econ.y_max(0);
        let scan = (0..=1_000_000).map(|i| ymax * i as f64 / 1e6).max_by(|a, b| phi(*a).total_cmp(&phi(*b))).unwrap();
        assert!((x[1] - scan).abs() <= 2.0 * ymax / 1e6);
    }
}

#[test]
fn per_type_argmax_beats_a_fine_scan() {
    let econ = TaxEconomy::judd25();
    let (problem, solver) = tax_to_problem(&econ, IcMode::Full).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = problem.num_pooled();
    for _ in 0..20 {
        let mut lambda: Vec<f64> =
            (0..m).map(|_| if rng.gen_bool(0.05) { rng.gen_range(0.0..0.1) } else { 0.0 }).collect();
        lambda[m - 1] = rng.gen_range(0.1..1.0);
        let mult = MultiplierState::from_parts(&problem, lambda, vec![]).unwrap();
        let best = solver.argmax(&problem, &mult).unwrap();
        for h in [0, 7, 12, 24] {
            for (dc, dy) in [(0.01, 0.0), (-0.01, 0.0), (0.0, 0.01), (0.0, -0.01)] {
                let mut x = best.consumption.clone();
                x[2 * h] = problem.bounds().clamp(2 * h, x[2 * h] + dc);
                x[2 * h + 1] = problem.bounds().clamp(2 * h + 1, x[2 * h + 1] + dy);
                let v = lottery_core::eval_lagrangian(&problem, 0, &x, &mult).unwrap();
                assert!(v <= best.value + 1e-10);
            }
        }
    }
}

#[test]
fn golden_section_on_a_flat_top() {
    let y = golden_max(&|y: f64| -(y - 1.0).abs(), 0.0, 3.0);
    assert!((y - 1.0).abs() < 1e-8);
}

#[test]
fn first_best_consumption() {
    let fb = first_best(&TaxEconomy::judd25(), 0.0).unwrap();
    assert!((fb.c - 3.17).abs() <= 0.02, "{}", fb.c);
}

#[test]
fn deterministic_benchmark_loss_band() {
    let econ = TaxEconomy::judd25();
    let u = econ.welfare(&JUDD25_DETERMINISTIC);
    let acct = welfare_account(&econ, u, u).unwrap();
    assert!((acct.loss_deterministic - 7.53).abs() <= 0.3, "{}", acct.loss_deterministic);
}

fn assert_degenerate(econ: &TaxEconomy, mode: IcMode) {
    let run = TaxRun { mode, n_iters: 20_000, ..TaxRun::default() };
    let sol = solve_tax(econ, &run).unwrap();
    for m in &sol.marginals {
        assert!(m.concentration() >= 0.999, "type ({}, {}): {:?}", m.w, m.eta, m.y_clusters);
    }
}

#[test]
fn equal_eta_economy_has_no_lotteries() {
    assert_degenerate(&equal_eta(), IcMode::Full);
}

#[test]
fn partial_incentive_rows_give_no_lotteries() {
    assert_degenerate(&TaxEconomy::judd25(), IcMode::Partial);
}

#[test]
fn welfare_is_monotone_in_the_labor_bound() {
    let mut last = f64::NEG_INFINITY;
    for ell in [1.2, 2.4, 4.8] {
        let run =
            TaxRun { n_iters: 200_000, schedule: StepSchedule::new(0.05, 0.0, 0.51).unwrap(), ..TaxRun::default() };
        let sol = solve_tax(&mild(ell), &run).unwrap();
        let u = sol.lottery.objective;
        assert!(u >= last - 1e-3, "l_max {ell}: {u} < {last}");
        last = u;
    }
}

#[test]
fn reported_lottery_is_nearly_feasible() {
    let run = TaxRun { n_iters: 50_000, ..TaxRun::default() };
    let sol = solve_tax(&mild(1.2), &run).unwrap();
    let report = &sol.lottery.eps_report;
    let resource = *report.expected_pooled.last().unwrap();
    assert!(resource <= 1e-2);
    assert!(report.expected_pooled.iter().all(|&g| g <= 1e-2));
}
