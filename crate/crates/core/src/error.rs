use thiserror::Error;

/// Errors raised by validation, codecs, samplers and experiments.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degree sequence has no nodes")]
    EmptySequence,
    #[error("not a forest degree sequence: c(s) = {c} (need c(s) >= 1)")]
    NotAForest { c: i64 },
    #[error("infeasible degree sequence request: {0}")]
    Infeasible(String),
    #[error("invalid lattice path: {0}")]
    InvalidPath(String),
    #[error("degree sequence does not code a walk: total increment {0} is not negative")]
    NotAWalk(i64),
    #[error("malformed bridge: {0}")]
    MalformedBridge(String),
    #[error("malformed forest: {0}")]
    MalformedForest(String),
    #[error("enumeration cap exceeded: n = {n} > cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("simulation time cap {t_cap} exceeded before reaching level -{level}")]
    TimeCapExceeded { t_cap: f64, level: f64 },
    #[error("instance too large for brute force: {size} points (cap {cap})")]
    TooLarge { size: usize, cap: usize },
    #[error("argument out of domain: {0}")]
    DomainError(String),
    #[error("empty sample")]
    EmptySample,
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
