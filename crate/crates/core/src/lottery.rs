use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::certificate::{certify_eps, EpsOptimalityReport};
use crate::error::LotteryError;
use crate::iteration::IterateLog;
use crate::problem::LotteryProblem;

/// Inclusive 1-based range of iterations `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn full(n: usize) -> Self {
        Self { start: 1, end: n }
    }

    /// The last `ceil(fraction * n)` iterations (at least one).
    pub fn tail(n: usize, fraction: f64) -> Self {
        let len = ((fraction * n as f64).ceil() as usize).clamp(1, n.max(1));
        Self { start: n + 1 - len, end: n }
    }

    /// Default reporting window: the last 5% of iterations.
    pub fn default_for(n: usize) -> Self {
        Self::tail(n, 0.05)
    }

    pub fn len(&self) -> usize {
        (self.end + 1).saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_full(&self, n: usize) -> bool {
        self.start == 1 && self.end == n
    }

    pub fn check(&self, n: usize) -> Result<(), LotteryError> {
        if self.start < 1 || self.start > self.end || self.end > n {
            return Err(LotteryError::BadWindow { start: self.start, end: self.end, n });
        }
        Ok(())
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected START:END, got {s:?}"))?;
        let start = a.trim().parse().map_err(|e| format!("bad window start {a:?}: {e}"))?;
        let end = b.trim().parse().map_err(|e| format!("bad window end {b:?}: {e}"))?;
        Ok(Self { start, end })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub action: usize,
    pub consumption: Vec<f64>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LotterySolution {
    pub atoms: Vec<Atom>,
    pub window: Window,
    pub cluster_tol: f64,
    pub objective: f64,
    pub eps_report: EpsOptimalityReport,
}

impl LotterySolution {
    /// Total probability per action index.
    pub fn action_marginal(&self, num_actions: usize) -> Vec<f64> {
        let mut out = vec![0.0; num_actions];
        for atom in &self.atoms {
            out[atom.action] += atom.probability;
        }
        out
    }

    /// Expectation of `f` over the atoms.
    pub fn expectation(&self, f: impl Fn(&Atom) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.probability * f(a)).sum()
    }

    /// `(value, weight)` pairs of consumption coordinate `r`.
    pub fn coordinate_marginal(&self, r: usize) -> Vec<(f64, f64)> {
        self.atoms.iter().map(|a| (a.consumption[r], a.probability)).collect()
    }
}

struct Cluster {
    action: usize,
    seed: Vec<f64>,
    weighted: Vec<f64>,
    weight: f64,
    uniform: bool,
}

/// Lottery from the iterates in `window`, weighted by step size.
///
/// Iterates sharing an action whose consumption lies within `cluster_tol` (max
/// norm, strict) of a cluster's first member are merged into that cluster at
/// the probability-weighted mean; identical iterates always merge.
pub fn construct_lottery(
    problem: &LotteryProblem,
    log: &IterateLog,
    window: Window,
    cluster_tol: f64,
) -> Result<LotterySolution, LotteryError> {
    window.check(log.len())?;
    if !(cluster_tol >= 0.0) {
        return Err(LotteryError::BadTolerance(cluster_tol));
    }
    let records = &log.records[window.start - 1..window.end];
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut exact: HashMap<(usize, Vec<u64>), usize> = HashMap::new();
    let mut by_action: HashMap<usize, Vec<usize>> = HashMap::new();
    for rec in records {
        let key = (rec.action, rec.consumption.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        let found = exact.get(&key).copied().or_else(|| {
            if cluster_tol == 0.0 {
                return None;
            }
            by_action.get(&rec.action).and_then(|ids| {
                ids.iter().rev().copied().find(|&id| within(&clusters[id].seed, &rec.consumption, cluster_tol))
            })
        });
        let id = match found {
            Some(id) => id,
            None => {
                clusters.push(Cluster {
                    action: rec.action,
                    seed: rec.consumption.clone(),
                    weighted: vec![0.0; rec.consumption.len()],
                    weight: 0.0,
                    uniform: true,
                });
                let id = clusters.len() - 1;
                by_action.entry(rec.action).or_default().push(id);
                id
            }
        };
        exact.entry(key).or_insert(id);
        let cl = &mut clusters[id];
        cl.weight += rec.step;
        cl.uniform &= cl.seed == rec.consumption;
        for (w, x) in cl.weighted.iter_mut().zip(&rec.consumption) {
            *w += rec.step * x;
        }
    }
    let total: f64 = clusters.iter().map(|c| c.weight).sum();
    let mut atoms: Vec<Atom> = clusters
        .into_iter()
        .map(|cl| {
            let consumption = if cl.uniform {
                cl.seed
            } else {
                let mut c: Vec<f64> = cl.weighted.iter().map(|w| w / cl.weight).collect();
                for (r, x) in c.iter_mut().enumerate() {
                    *x = problem.bounds().clamp(r, *x);
                }
                c
            };
            Atom { action: cl.action, consumption, probability: cl.weight / total }
        })
        .collect();
    sort_atoms(&mut atoms);
    normalize(&mut atoms);
    finish(problem, log, atoms, window, cluster_tol)
}

/// Rebuilds the certificate for a lottery whose atoms are already known.
pub(crate) fn finish(
    problem: &LotteryProblem,
    log: &IterateLog,
    atoms: Vec<Atom>,
    window: Window,
    cluster_tol: f64,
) -> Result<LotterySolution, LotteryError> {
    let mut lottery =
        LotterySolution { atoms, window, cluster_tol, objective: 0.0, eps_report: EpsOptimalityReport::default() };
    let report = certify_eps(problem, &lottery, log)?;
    lottery.objective = report.objective;
    lottery.eps_report = report;
    Ok(lottery)
}

/// Max-norm distance below `tol`, stopping at the first coordinate that fails.
fn within(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
}

fn sort_atoms(atoms: &mut [Atom]) {
    atoms.sort_by(|a, b| {
        b.probability.total_cmp(&a.probability).then(a.action.cmp(&b.action)).then_with(|| {
            a.consumption
                .iter()
                .zip(&b.consumption)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
}

fn normalize(atoms: &mut [Atom]) {
    let total: f64 = atoms.iter().map(|a| a.probability).sum();
    for a in atoms.iter_mut() {
        a.probability /= total;
    }
}

/// Groups weighted scalar values into clusters separated by gaps of at least
/// `tol`, returning `(weighted mean, total weight)` sorted by value.
pub fn cluster_values(values: &[(f64, f64)], tol: f64) -> Vec<(f64, f64)> {
    let mut sorted: Vec<(f64, f64)> = values.iter().copied().filter(|(_, w)| *w > 0.0).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64, f64)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (x, w) in sorted {
        match out.last_mut() {
            Some(cur) if x - last < tol => {
                cur.0 += w * x;
                cur.1 += w;
            }
            _ => out.push((w * x, w, 0.0)),
        }
        last = x;
    }
    out.into_iter().map(|(s, w, _)| (s / w, w)).collect()
}
