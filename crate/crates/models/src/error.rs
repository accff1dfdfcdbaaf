use lottery_core::{LoopError, LotteryError, ProblemError};
use lottery_lp::LpSize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    Lottery(#[from] LotteryError),
    #[error(
        "LP has {} variables, {} equalities, {} inequalities and {} nonzeros, above the cap of {cap} nonzeros",
        size.variables, size.equalities, size.inequalities, size.nonzeros
    )]
    SizeCap { size: LpSize, cap: usize },
    #[error("welfare {target} exceeds the first-best level {first_best}")]
    AboveFirstBest { target: f64, first_best: f64 },
    #[error("root search failed: {0}")]
    Root(String),
}
