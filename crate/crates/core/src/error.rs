use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate coordinate {0}")]
    DuplicateCoordinate(i64),
    #[error("malformed token {token:?} at position {pos}")]
    Malformed { pos: usize, token: String },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("exact mode refused: n = {n} exceeds cap {cap}")]
    ExactCap { n: u64, cap: u64 },
    #[error("row width {width} exceeds bitmask cap {cap}")]
    WidthCap { width: usize, cap: usize },
    #[error("unbalanced graph: {even} vertices in one class, {odd} in the other")]
    Unbalanced { even: usize, odd: usize },
    #[error("kernel pole: {0}")]
    Pole(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("planner stuck at {0}")]
    Planner(String),
    #[error("clusters overlap: {0}")]
    Overlap(String),
    #[error("constant check failed: {0}")]
    Constant(String),
    #[error("schedule: {0}")]
    Schedule(String),
}

pub type Result<T> = std::result::Result<T, Error>;
