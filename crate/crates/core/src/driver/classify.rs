// SPDX-License-Identifier: Apache-2.0

//! Sorting target results into outcome categories.

use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use serde::Serialize;

use super::passes::Pipeline;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Category {
    Valid,
    DialectSpecific,
    GeneralMlir,
    InvalidOptions,
    Crash,
}

impl Category {
    pub const ALL: [Category; 5] =
        [Category::Valid, Category::DialectSpecific, Category::GeneralMlir, Category::InvalidOptions, Category::Crash];

    pub fn name(self) -> &'static str {
        match self {
            Category::Valid => "valid",
            Category::DialectSpecific => "dialect-specific",
            Category::GeneralMlir => "general-mlir",
            Category::InvalidOptions => "invalid-options",
            Category::Crash => "crash",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What came back from one target invocation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawResult {
    pub exit_code: Option<i32>,
    /// Terminating signal, if the process was killed by one.
    pub signal: Option<i32>,
    pub timed_out: bool,
    pub stdout: String,
    pub stderr: String,
    pub duration: Duration,
}

impl RawResult {
    pub fn abnormal(&self) -> bool {
        self.timed_out || self.signal.is_some() || self.exit_code.is_none()
    }

    pub fn status(&self) -> String {
        if self.timed_out {
            "timeout".to_string()
        } else if let Some(s) = self.signal {
            format!("signal {s}")
        } else if let Some(c) = self.exit_code {
            format!("exit {c}")
        } else {
            "unknown".to_string()
        }
    }
}

pub const INVALID_OPTION_PATTERNS: [&str; 2] = ["no such option", "Unknown command line argument"];

pub const GENERAL_MLIR_PATTERNS: [&str; 6] = [
    "use of undeclared SSA value",
    "redefinition of SSA value",
    "undefined symbol",
    "syntax error",
    "operands present, but expected",
    "results but was provided",
];

/// One classified invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzOutcome {
    pub category: Category,
    pub exit_status: String,
    pub diagnostic_text: String,
    pub test_case_path: Option<PathBuf>,
    pub pass_pipeline: Pipeline,
}

/// Crash on abnormal termination, valid on exit 0, otherwise the first
/// diagnostic rule that matches, defaulting to dialect-specific.
pub fn classify(raw: &RawResult) -> Category {
    if raw.abnormal() {
        Category::Crash
    } else if raw.exit_code == Some(0) {
        Category::Valid
    } else if INVALID_OPTION_PATTERNS.iter().any(|p| raw.stderr.contains(p)) {
        Category::InvalidOptions
    } else if GENERAL_MLIR_PATTERNS.iter().any(|p| raw.stderr.contains(p)) {
        Category::GeneralMlir
    } else {
        Category::DialectSpecific
    }
}

pub fn classify_outcome(raw: &RawResult, pipeline: &Pipeline) -> FuzzOutcome {
    FuzzOutcome {
        category: classify(raw),
        exit_status: raw.status(),
        diagnostic_text: raw.stderr.clone(),
        test_case_path: None,
        pass_pipeline: pipeline.clone(),
    }
}
