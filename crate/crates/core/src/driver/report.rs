// SPDX-License-Identifier: Apache-2.0

//! Run summaries. Reports hold counts and coverage only, never timings, so
//! equal configurations give byte-identical files.

use std::fmt::Write as _;

use serde::Serialize;

use super::classify::Category;
use super::corpus::Corpus;
use super::fuzz::{tally, Budget, FuzzConfig, IterationEvent};
use super::target::Target;
use crate::coverage::CoverageReport;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EventCounts {
    pub no_eligible_node: u64,
    pub no_site: u64,
    pub illegal_graft: u64,
    pub prefiltered: u64,
    pub executed: u64,
    /// Executed mutants that break def-use rules (only possible with
    /// parameterization off).
    pub executed_with_violations: u64,
}

impl EventCounts {
    pub fn total(&self) -> u64 {
        self.no_eligible_node + self.no_site + self.illegal_graft + self.prefiltered + self.executed
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OutcomeCounts {
    pub valid: u64,
    pub dialect_specific: u64,
    pub general_mlir: u64,
    pub invalid_options: u64,
    pub crash: u64,
}

impl OutcomeCounts {
    pub fn add(&mut self, c: Category) {
        *self.slot(c) += 1;
    }

    pub fn get(&self, c: Category) -> u64 {
        match c {
            Category::Valid => self.valid,
            Category::DialectSpecific => self.dialect_specific,
            Category::GeneralMlir => self.general_mlir,
            Category::InvalidOptions => self.invalid_options,
            Category::Crash => self.crash,
        }
    }

    fn slot(&mut self, c: Category) -> &mut u64 {
        match c {
            Category::Valid => &mut self.valid,
            Category::DialectSpecific => &mut self.dialect_specific,
            Category::GeneralMlir => &mut self.general_mlir,
            Category::InvalidOptions => &mut self.invalid_options,
            Category::Crash => &mut self.crash,
        }
    }

    pub fn total(&self) -> u64 {
        Category::ALL.iter().map(|&c| self.get(c)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSettings {
    pub rng_seed: u64,
    pub target: String,
    pub budget: String,
    pub passes_per_pipeline: usize,
    pub k: usize,
    pub l: usize,
    pub r: usize,
    pub parameterization: bool,
    pub pass_selection: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub files: usize,
    pub seeds: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzReport {
    pub settings: RunSettings,
    pub corpus: CorpusStats,
    pub iterations: u64,
    pub events: EventCounts,
    pub outcomes: OutcomeCounts,
    /// Mutants known to break generic MLIR rules: flagged by the def-use
    /// check (in either mode) or reported as such by the target.
    pub generic_violations: u64,
    /// `generic_violations` over all mutants produced.
    pub general_mlir_fraction: f64,
    pub coverage: CoverageReport,
    /// Persisted crash reproducers, relative to the output directory.
    pub crashes: Vec<String>,
}

impl FuzzReport {
    pub fn new(config: &FuzzConfig, corpus: &Corpus, target: &Target) -> Self {
        let budget = match config.budget {
            Budget::Iterations(n) => format!("{n} iterations"),
            Budget::Time(d) => format!("{} s", d.as_secs_f64()),
        };
        FuzzReport {
            settings: RunSettings {
                rng_seed: config.rng_seed,
                target: target.describe(),
                budget,
                passes_per_pipeline: config.passes_per_pipeline,
                k: config.match_config.k,
                l: config.match_config.l,
                r: config.match_config.r,
                parameterization: config.parameterization,
                pass_selection: config.pass_selection.to_string(),
            },
            corpus: CorpusStats { files: corpus.files, seeds: corpus.len(), skipped: corpus.skipped },
            iterations: 0,
            events: EventCounts::default(),
            outcomes: OutcomeCounts::default(),
            generic_violations: 0,
            general_mlir_fraction: 0.0,
            coverage: CoverageReport::default(),
            crashes: Vec::new(),
        }
    }

    pub fn record(&mut self, index: u64, event: &IterationEvent) {
        self.iterations += 1;
        tally(&mut self.events, &mut self.outcomes, event);
        match event {
            IterationEvent::PreFiltered => self.generic_violations += 1,
            IterationEvent::Executed { outcome, violations, .. }
                if *violations > 0 || outcome.category == Category::GeneralMlir =>
            {
                self.generic_violations += 1
            }
            _ => {}
        }
        if let IterationEvent::Executed { outcome, coverage, .. } = event {
            self.coverage.merge(coverage);
            if outcome.category == Category::Crash {
                self.crashes.push(format!("crashes/{index:06}.mlir"));
            }
        }
        self.general_mlir_fraction = self.compute_fraction();
    }

    pub fn finish(&mut self) {
        self.general_mlir_fraction = self.compute_fraction();
    }

    /// Mutants produced, whether or not they reached the target.
    pub fn mutants(&self) -> u64 {
        self.events.prefiltered + self.events.executed
    }

    fn compute_fraction(&self) -> f64 {
        let mutants = self.mutants();
        if mutants == 0 {
            0.0
        } else {
            self.generic_violations as f64 / mutants as f64
        }
    }

    pub fn progress_line(&self) -> String {
        format!(
            "{} iterations: {} executed, {} valid, {} crash, {} dialects, {} control pairs, {} data pairs",
            self.iterations,
            self.events.executed,
            self.outcomes.valid,
            self.outcomes.crash,
            self.coverage.dialects.len(),
            self.coverage.control_pairs.len(),
            self.coverage.data_pairs.len()
        )
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let st = &self.settings;
        let _ = writeln!(s, "seed {}  target {}  budget {}", st.rng_seed, st.target, st.budget);
        let _ = writeln!(
            s,
            "P={} k={} l={} r={} parameterization={} pass-selection={}",
            st.passes_per_pipeline,
            st.k,
            st.l,
            st.r,
            if st.parameterization { "on" } else { "off" },
            st.pass_selection
        );
        let _ = writeln!(
            s,
            "corpus: {} files, {} seeds, {} skipped",
            self.corpus.files, self.corpus.seeds, self.corpus.skipped
        );
        let _ = writeln!(s, "iterations: {}", self.iterations);
        let e = &self.events;
        let _ = writeln!(
            s,
            "events: no-eligible-node {}  no-site {}  illegal-graft {}  pre-filtered {}  executed {}",
            e.no_eligible_node, e.no_site, e.illegal_graft, e.prefiltered, e.executed
        );
        let _ = write!(s, "outcomes:");
        for c in Category::ALL {
            let _ = write!(s, "  {} {}", c, self.outcomes.get(c));
        }
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "generic violations: {} of {} mutants ({:.4})",
            self.generic_violations,
            self.mutants(),
            self.general_mlir_fraction
        );
        let _ = write!(s, "{}", self.coverage);
        for c in &self.crashes {
            let _ = writeln!(s, "crash: {c}");
        }
        s
    }
}
