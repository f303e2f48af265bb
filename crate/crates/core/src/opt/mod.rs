//! Linear programming and distributed optimization.

pub mod lp;
pub mod multipass;
pub mod mwu_lp;
pub mod simplex;
pub mod stream;

pub use lp::{lp_width, simplex_solve, Constraint, LinearProgram, LpSolution};
pub use mwu_lp::{lp_binary_search, mwu_lp_solve, two_party_lp, MwuLpConfig, MwuLpSolution, MwuLpState};
pub use multipass::{multipass_lp_violate, MultipassConfig, MultipassLp, MultipassOutcome, MultipassResult, MultipassStatus};
pub use stream::{run_monolithic, stream_to_distributed, StreamAdapterConfig, StreamRun, StreamingAlgorithm};
