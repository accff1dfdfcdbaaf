//! First-best benchmark and welfare-loss accounting for the tax economy.
//!
//! The first best with a resource drain `m` equalizes consumption at `1 / g`
//! and sets `y_h = w_h (g w_h)^eta_h`, where `g` clears
//! `1 / g = sum_h omega_h y_h - m`. The output bound is not imposed.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::taxation::TaxEconomy;

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstBest {
    pub m: f64,
    /// Shadow value of resources.
    pub gamma: f64,
    pub c: f64,
    pub y: Vec<f64>,
    pub output: f64,
    pub welfare: f64,
}

fn outputs(econ: &TaxEconomy, gamma: f64) -> Vec<f64> {
    econ.types.iter().map(|t| t.w * (gamma * t.w).powf(t.eta)).collect()
}

fn mean_output(econ: &TaxEconomy, y: &[f64]) -> f64 {
    econ.types.iter().zip(y).map(|(t, y)| t.omega * y).sum()
}

pub fn first_best(econ: &TaxEconomy, m: f64) -> Result<FirstBest, ModelError> {
    econ.validate()?;
    let excess = |g: f64| 1.0 / g - mean_output(econ, &outputs(econ, g)) + m;
    let (mut lo, mut hi) = (1.0, 1.0);
    while excess(lo) <= 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(ModelError::Root(format!("no first best with drain {m}")));
        }
    }
    while excess(hi) >= 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(ModelError::Root(format!("no first best with drain {m}")));
        }
    }
    while hi - lo > TOL * hi {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gamma = 0.5 * (lo + hi);
    let y = outputs(econ, gamma);
    let c = 1.0 / gamma;
    let welfare = (0..econ.num_types()).map(|h| econ.types[h].omega * econ.utility(h, c, y[h])).sum();
    let output = mean_output(econ, &y);
    Ok(FirstBest { m, gamma, c, y, output, welfare })
}

/// Resource drain at which the first best delivers `target` welfare.
pub fn equivalent_drain(econ: &TaxEconomy, target: f64) -> Result<f64, ModelError> {
    let base = first_best(econ, 0.0)?;
    if target > base.welfare + 1e-12 {
        return Err(ModelError::AboveFirstBest { target, first_best: base.welfare });
    }
    let (mut lo, mut hi) = (0.0, base.output * 0.5);
    while first_best(econ, hi)?.welfare > target {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-8 * base.output {
        let mid = 0.5 * (lo + hi);
        if first_best(econ, mid)?.welfare > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Welfare losses of a lottery and a deterministic allocation, each as the
/// equivalent resource drain over first-best output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelfareAccount {
    pub first_best_welfare: f64,
    pub first_best_output: f64,
    pub u_lottery: f64,
    pub u_deterministic: f64,
    pub m_lottery: f64,
    pub m_deterministic: f64,
    /// Loss of the lottery allocation, in percent.
    pub loss_lottery: f64,
    pub loss_deterministic: f64,
    pub reduction: f64,
}

pub fn welfare_account(econ: &TaxEconomy, u_lottery: f64, u_deterministic: f64) -> Result<WelfareAccount, ModelError> {
    let base = first_best(econ, 0.0)?;
    let m_lottery = equivalent_drain(econ, u_lottery)?;
    let m_deterministic = equivalent_drain(econ, u_deterministic)?;
    let loss_lottery = 100.0 * m_lottery / base.output;
    let loss_deterministic = 100.0 * m_deterministic / base.output;
    Ok(WelfareAccount {
        first_best_welfare: base.welfare,
        first_best_output: base.output,
        u_lottery,
        u_deterministic,
        m_lottery,
        m_deterministic,
        loss_lottery,
        loss_deterministic,
        reduction: loss_deterministic - loss_lottery,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxation::JUDD25_DETERMINISTIC;

    #[test]
    fn first_best_clears_resources() {
        let econ = TaxEconomy::judd25();
        for m in [0.0, 0.1, 0.5] {
            let fb = first_best(&econ, m).unwrap();
            assert!((fb.c - (fb.output - m)).abs() < 1e-9);
        }
    }

    #[test]
    fn drain_inverts_first_best() {
        let econ = TaxEconomy::judd25();
        let fb = first_best(&econ, 0.2).unwrap();
        let m = equivalent_drain(&econ, fb.welfare).unwrap();
        assert!((m - 0.2).abs() < 1e-6);
        assert!(matches!(equivalent_drain(&econ, fb.welfare + 1.0), Err(ModelError::AboveFirstBest { .. })));
    }

    #[test]
    fn deterministic_benchmark_loss() {
        let econ = TaxEconomy::judd25();
        let u = econ.welfare(&JUDD25_DETERMINISTIC);
        let acct = welfare_account(&econ, u, u).unwrap();
        assert!((acct.loss_deterministic - 7.64).abs() < 0.05);
    }
}
