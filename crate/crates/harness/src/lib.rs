//! Experiment runner behind the `optbeam` command line.

pub mod compare;
pub mod make_model;
pub mod model;
pub mod records;
pub mod runspec;
pub mod tune;
pub mod verify;

pub use compare::{cmd_compare, CompareRow};
pub use make_model::cmd_make_model;
pub use model::load_model;
pub use records::{cmd_decode, DecodeRecord};
pub use runspec::RunSpec;
pub use tune::{cmd_tune, TuneRow};
pub use verify::{cmd_verify, VerifyOptions, VerifySummary};

/// Fixed six-decimal rendering used in every CSV cell.
pub fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}
