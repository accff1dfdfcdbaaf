use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("action set is empty")]
    NoActions,
    #[error("action {0} has dimension {1}, expected {2}")]
    ActionDimension(usize, usize, usize),
    #[error("actions {0} and {1} are identical")]
    DuplicateAction(usize, usize),
    #[error("consumption box needs at least one coordinate")]
    EmptyBox,
    #[error("box bounds have lengths {0} and {1}")]
    BoundLength(usize, usize),
    #[error("coordinate {coord}: lower bound {lower} must be finite and below upper bound {upper}")]
    BadInterval { coord: usize, lower: f64, upper: f64 },
    #[error("problem has no payoff")]
    MissingPayoff,
    #[error("expected {expected} constraint scalers, got {got}")]
    ScalerLength { expected: usize, got: usize },
    #[error("constraint scaler at index {0} is not a positive finite number")]
    BadScaler(usize),
    #[error("step schedule exponent {0} outside (0.5, 1]")]
    ScheduleExponent(f64),
    #[error("step schedule scale {0} must be positive and finite")]
    ScheduleScale(f64),
    #[error("step schedule offset {0} must be nonnegative and finite")]
    ScheduleOffset(f64),
    #[error("multiplier shape ({lambda}, {gamma}) does not match problem ({m}, {l}x{n})")]
    MultiplierShape { lambda: usize, gamma: usize, m: usize, l: usize, n: usize },
    #[error("multiplier entries must be finite and nonnegative")]
    NegativeMultiplier,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("action index {0} out of range")]
    InvalidAction(usize),
    #[error("consumption {consumption:?} outside the box (action {action})")]
    OutOfBox { action: usize, consumption: Vec<f64> },
    #[error("non-finite {what} at action {action}, consumption {consumption:?}")]
    NonFinite { what: &'static str, action: usize, consumption: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InnerError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("dual unbounded direction at action {action}, coordinate {coord}: raise the pooled multipliers")]
    DualUnbounded { action: usize, coord: usize },
    #[error("inner solver incompatible with problem: {0}")]
    Incompatible(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoopError {
    #[error("iteration count must be at least 1")]
    NoIterations,
    #[error("iteration {k}: {source}")]
    Inner { k: usize, source: InnerError },
    #[error("iteration {k}: multiplier update produced a non-finite value")]
    NonFiniteMultiplier { k: usize },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LotteryError {
    #[error("window {start}..={end} is empty or outside 1..={n}")]
    BadWindow { start: usize, end: usize, n: usize },
    #[error("cluster tolerance {0} must be nonnegative")]
    BadTolerance(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("lottery atom {0} is inconsistent with the problem")]
    BadAtom(usize),
}
