// SPDX-License-Identifier: Apache-2.0

//! Corpus loading, pass pipelines, target invocation, outcome
//! classification and the fuzzing loop.

use std::path::PathBuf;

pub mod classify;
pub mod corpus;
pub mod fuzz;
pub mod passes;
pub mod report;
pub mod target;

pub use classify::{classify, classify_outcome, Category, FuzzOutcome, RawResult};
pub use corpus::{load_corpus, split_test_cases, Corpus, Seed};
pub use fuzz::{iteration_rng, Budget, FuzzConfig, Fuzzer, IterationEvent};
pub use passes::{select_passes, PassInvocation, PassRegistry, PassSelection, Pipeline};
pub use report::FuzzReport;
pub use target::{SpawnError, Target, BUILTIN_REFERENCE};

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error("no parseable test cases under {}", .0.display())]
    EmptyCorpus(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("pass file line {line}: {message}")]
    PassFile { line: usize, message: String },
    #[error(transparent)]
    Spawn(#[from] SpawnError),
    #[error("invalid configuration: {0}")]
    Config(String),
}
