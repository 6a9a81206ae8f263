//! Experiment driver for `laminar-core`: growth-exponent runs with CSV/JSON
//! output, seeded lemma verification suites, and the incremental-count demo.

pub mod demo;
pub mod growth;
pub mod lemmas;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Error, Debug)]
pub enum HarnessError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] laminar_core::models::ModelError),
    #[error(transparent)]
    Core(#[from] laminar_core::Error),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Process exit code: 1 for failed checks, 2 for usage and I/O
    /// problems, 3 for exceeded resource caps.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) | HarnessError::Io { .. } | HarnessError::Model(_) => 2,
            HarnessError::Core(laminar_core::Error::Resource(_)) => 3,
            HarnessError::Core(laminar_core::Error::Domain(_)) => 2,
            HarnessError::Core(_) => 1,
            HarnessError::Csv(_) => 2,
        }
    }
}

/// Seed for one unit of work, derived from a master seed and a path of
/// indices (size, trial, ...). Distinct paths give unrelated streams.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    // splitmix64 finalizer over the running state
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    path.iter().fold(mix(master), |acc, &p| mix(acc ^ mix(p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(7, &[8, 0]);
        assert_eq!(a, derive_seed(7, &[8, 0]));
        assert_ne!(a, derive_seed(7, &[8, 1]));
        assert_ne!(a, derive_seed(7, &[0, 8]));
        assert_ne!(a, derive_seed(8, &[8, 0]));
    }
}
