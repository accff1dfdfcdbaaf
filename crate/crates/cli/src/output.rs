//! Artifact files. Every file starts with, or contains, the config hash.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use lottery_core::{EpsOptimalityReport, IterateLog, LotterySolution, RunningBounds, Window};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::run::{BenchRow, CompareReport, SolveOutcome, Summary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LotteryFile {
    pub config_hash: String,
    /// Action points indexed by the atoms' `action`.
    pub actions: Vec<Vec<f64>>,
    pub lottery: LotterySolution,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub config_hash: String,
    pub iterations: usize,
    pub window: Window,
    pub step_sum: f64,
    pub min_dual_value: f64,
    pub running_bounds: RunningBounds,
    pub report: EpsOptimalityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareFile {
    pub config_hash: String,
    #[serde(flatten)]
    pub report: CompareReport,
}

fn write(path: PathBuf, contents: &[u8]) -> Result<PathBuf, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
    }
    fs::write(&path, contents).map_err(|source| CliError::Write { path: path.clone(), source })?;
    Ok(path)
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("artifact serializes");
    v.push(b'\n');
    v
}

/// Trajectory rows every `stride` iterations plus the last one. The
/// multiplier path is rebuilt from the logged constraint values when the log
/// carries them and there are at most eight pooled rows.
pub fn trajectory_csv(hash: &str, log: &IterateLog, actions: &[Vec<f64>], stride: usize) -> String {
    let dim = log.records.first().map_or(0, |r| r.consumption.len());
    let m = log.initial_state.lambda.len();
    let with_lambda = m <= 8 && log.records.iter().all(|r| r.pooled.len() == m);
    let mut out = String::new();
    let _ = writeln!(out, "# config_sha256={hash}");
    out.push_str("k,action_index");
    for i in 0..actions.first().map_or(0, Vec::len) {
        let _ = write!(out, ",action_{i}");
    }
    for r in 0..dim {
        let _ = write!(out, ",c_{r}");
    }
    if with_lambda {
        for i in 0..m {
            let _ = write!(out, ",lambda_{i}");
        }
    }
    out.push_str(",step,dual_value,max_abs_g,max_abs_h\n");
    let mut lambda = log.initial_state.lambda.clone();
    let n = log.records.len();
    for rec in &log.records {
        if (rec.k - 1) % stride == 0 || rec.k == n {
            let _ = write!(out, "{},{}", rec.k, rec.action);
            for x in &actions[rec.action] {
                let _ = write!(out, ",{x}");
            }
            for x in &rec.consumption {
                let _ = write!(out, ",{x}");
            }
            if with_lambda {
                for l in &lambda {
                    let _ = write!(out, ",{l}");
                }
            }
            let _ = writeln!(out, ",{},{},{},{}", rec.step, rec.dual_value, rec.max_abs_pooled, rec.max_abs_per_action);
        }
        if with_lambda {
            for (l, g) in lambda.iter_mut().zip(&rec.pooled) {
                *l = (*l + rec.step * g).max(0.0);
            }
        }
    }
    out
}

pub fn write_solve(o: &SolveOutcome, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let actions = o.problem.actions().to_vec();
    let traj = trajectory_csv(&o.hash, &o.log, &actions, o.resolved.stride);
    let lottery =
        LotteryFile { config_hash: o.hash.clone(), actions, lottery: o.lottery.clone(), summary: o.summary.clone() };
    let cert = CertificateFile {
        config_hash: o.hash.clone(),
        iterations: o.log.len(),
        window: o.lottery.window,
        step_sum: o.log.step_sum(),
        min_dual_value: o.log.min_dual_value(),
        running_bounds: o.log.running_bounds,
        report: o.lottery.eps_report.clone(),
    };
    Ok(vec![
        write(dir.join("trajectory.csv"), traj.as_bytes())?,
        write(dir.join("lottery.json"), &json(&lottery))?,
        write(dir.join("certificate.json"), &json(&cert))?,
    ])
}

pub fn write_compare(hash: &str, report: &CompareReport, dir: &Path) -> Result<PathBuf, CliError> {
    write(dir.join("compare.json"), &json(&CompareFile { config_hash: hash.to_string(), report: report.clone() }))
}

pub fn write_lp(hash: &str, mps: &str, dir: &Path) -> Result<PathBuf, CliError> {
    write(dir.join("lp.mps"), format!("* config_sha256={hash}\n{mps}").as_bytes())
}

pub fn benchmark_csv(hash: &str, rows: &[BenchRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# config_sha256={hash}");
    out.push_str(
        "da,actions,iterations,wall_seconds,lp_vars,lp_equalities,lp_inequalities,lp_nonzeros,lp_seconds,p_low\n",
    );
    for r in rows {
        let lp = r.lp_seconds.map(|s| s.to_string()).unwrap_or_default();
        let s = &r.lp_size;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{lp},{}",
            r.da,
            r.actions,
            r.iterations,
            r.wall_seconds,
            s.variables,
            s.equalities,
            s.inequalities,
            s.nonzeros,
            r.p_low
        );
    }
    out
}

pub fn write_benchmark(hash: &str, rows: &[BenchRow], dir: &Path) -> Result<PathBuf, CliError> {
    write(dir.join("benchmark.csv"), benchmark_csv(hash, rows).as_bytes())
}
