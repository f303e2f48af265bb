use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset has zero total weight")]
    ZeroWeight,

    #[error("training set is not linearly separable (best margin {margin:e})")]
    Inseparable { margin: f64 },

    #[error("party {0} cannot send a message to itself")]
    SelfSend(usize),

    #[error("unknown party {0}")]
    UnknownParty(usize),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex did not converge within {0} pivots")]
    PivotLimit(usize),

    #[error("box is unbounded in coordinate {0}; supply a width explicitly")]
    UnboundedBox(usize),

    #[error("objective guess {z} is infeasible for the soft constraint set")]
    GuessInfeasible { z: f64 },

    #[error("search range [{lo}, {hi}] contains no feasible objective value")]
    BracketExhausted { lo: f64, hi: f64 },

    #[error("working store of {actual} words exceeds the declared {declared}")]
    StoreOverflow { declared: usize, actual: usize },

    #[error("pass budget of {passes} exhausted with {violated} violated constraints (target {target})")]
    PassBudgetExhausted { passes: usize, violated: usize, target: usize },

    #[error("rejection sampling drew {draws} candidates for {target} points; margin too large for the mixture")]
    RejectionLimit { draws: usize, target: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown protocol `{0}`")]
    UnknownProtocol(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("manifest: {0}")]
    Manifest(String),
}
