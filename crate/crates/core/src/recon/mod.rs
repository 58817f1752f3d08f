//! The querier side: reconstruction algorithms that issue all queries
//! through the round scheduler.

pub mod path;
pub mod relative;

use thiserror::Error;

use crate::oracle::OracleError;

#[derive(Debug, Error)]
pub enum ReconError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    /// The oracle is assumed exact; any structural violation is fatal
    /// rather than repaired.
    #[error("inconsistent oracle answers: {0}")]
    Inconsistent(String),
}
