// SPDX-License-Identifier: Apache-2.0

//! The fuzzing loop.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::classify::{classify_outcome, Category, FuzzOutcome};
use super::corpus::{load_corpus, Corpus};
use super::passes::{select_passes, PassRegistry, PassSelection, Pipeline, OPTION_PROBABILITY};
use super::report::{EventCounts, FuzzReport, OutcomeCounts};
use super::target::{SpawnError, Target, DEFAULT_TIMEOUT};
use super::DriverError;
use crate::constraints::check_generic_constraints;
use crate::coverage::CoverageReport;
use crate::matching::MatchConfig;
use crate::mutate::{mutate_once, MutateFailure, MutateOptions, DEFAULT_MAX_SITES};
use crate::syntax::print;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Iterations(u64),
    Time(Duration),
}

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub seed_dir: PathBuf,
    /// Executable path or `builtin:reference`.
    pub target: String,
    /// Pass file; the bundled registry when `None`.
    pub passes: Option<PathBuf>,
    pub passes_per_pipeline: usize,
    pub match_config: MatchConfig,
    pub budget: Budget,
    pub rng_seed: u64,
    pub out_dir: Option<PathBuf>,
    pub parameterization: bool,
    pub pass_selection: PassSelection,
    pub option_probability: f64,
    pub timeout: Duration,
    pub workers: usize,
    pub max_sites: usize,
    /// Log a progress line every this many iterations (0 disables).
    pub report_every: u64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seed_dir: PathBuf::new(),
            target: super::target::BUILTIN_REFERENCE.to_string(),
            passes: None,
            passes_per_pipeline: 5,
            match_config: MatchConfig::default(),
            budget: Budget::Iterations(1000),
            rng_seed: 0,
            out_dir: None,
            parameterization: true,
            pass_selection: PassSelection::DialectHeuristic,
            option_probability: OPTION_PROBABILITY,
            timeout: DEFAULT_TIMEOUT,
            workers: 1,
            max_sites: DEFAULT_MAX_SITES,
            report_every: 1000,
        }
    }
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<(), DriverError> {
        if self.passes_per_pipeline == 0 {
            return Err(DriverError::Config("passes per pipeline must be at least 1".into()));
        }
        if matches!(self.budget, Budget::Time(d) if d.is_zero()) {
            return Err(DriverError::Config("time budget must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.option_probability) {
            return Err(DriverError::Config("option probability must be within [0, 1]".into()));
        }
        Ok(())
    }
}

/// What happened in one iteration.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum IterationEvent {
    NoEligibleNode,
    NoSite,
    IllegalGraft,
    /// The mutant broke def-use rules and was not sent to the target.
    PreFiltered,
    Executed { outcome: FuzzOutcome, text: String, coverage: CoverageReport, violations: usize },
}

/// RNG for one iteration. Independent of how iterations are spread over
/// workers.
pub fn iteration_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub struct Fuzzer {
    corpus: Corpus,
    registry: PassRegistry,
    target: Target,
    config: FuzzConfig,
}

impl Fuzzer {
    /// Loads the corpus and pass file named by the config.
    pub fn from_config(config: FuzzConfig) -> Result<Self, DriverError> {
        config.validate()?;
        let registry = match &config.passes {
            Some(p) => PassRegistry::load(p)?,
            None => PassRegistry::builtin(),
        };
        let corpus = load_corpus(&config.seed_dir)?;
        let target = Target::from_spec(&config.target, &registry);
        Ok(Fuzzer { corpus, registry, target, config })
    }

    pub fn new(corpus: Corpus, registry: PassRegistry, target: Target, config: FuzzConfig) -> Self {
        Fuzzer { corpus, registry, target, config }
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn iteration(&self, index: u64) -> Result<IterationEvent, SpawnError> {
        let mut rng = iteration_rng(self.config.rng_seed, index);
        if self.corpus.is_empty() {
            return Ok(IterationEvent::NoEligibleNode);
        }
        let donor = &self.corpus.seeds[rng.random_range(0..self.corpus.len())].tree;
        let recipient = &self.corpus.seeds[rng.random_range(0..self.corpus.len())].tree;
        let options = MutateOptions {
            match_config: self.config.match_config,
            parameterization: self.config.parameterization,
            max_sites: self.config.max_sites,
        };
        let mutant = match mutate_once(donor, recipient, &options, &mut rng) {
            Ok(m) => m,
            Err(MutateFailure::Synth(_)) => return Ok(IterationEvent::NoEligibleNode),
            Err(MutateFailure::NoSite) => return Ok(IterationEvent::NoSite),
            Err(MutateFailure::Graft(_)) => return Ok(IterationEvent::IllegalGraft),
        };
        let violations = check_generic_constraints(&mutant.tree).len();
        if self.config.parameterization && violations > 0 {
            return Ok(IterationEvent::PreFiltered);
        }
        let pipeline: Pipeline = select_passes(
            &mutant.tree,
            &self.registry,
            self.config.passes_per_pipeline,
            self.config.pass_selection,
            self.config.option_probability,
            &mut rng,
        );
        let text = print(&mutant.tree);
        let raw = self.target.run(&pipeline, &text, self.config.timeout)?;
        let outcome = classify_outcome(&raw, &pipeline);
        Ok(IterationEvent::Executed { outcome, text, coverage: CoverageReport::of(&mutant.tree), violations })
    }

    /// Runs until the budget is spent and writes artifacts to the output
    /// directory, if any.
    pub fn run(&self) -> Result<FuzzReport, DriverError> {
        self.config.validate()?;
        if let Some(out) = &self.config.out_dir {
            for sub in ["crashes", "valid"] {
                let dir = out.join(sub);
                fs::create_dir_all(&dir).map_err(|source| DriverError::Io { path: dir, source })?;
            }
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers.max(1))
            .build()
            .map_err(|e| DriverError::Config(e.to_string()))?;

        let mut report = FuzzReport::new(&self.config, &self.corpus, &self.target);
        let start = Instant::now();
        let batch = (self.config.workers.max(1) as u64) * 16;
        let mut next = 0u64;
        loop {
            let end = match self.config.budget {
                Budget::Iterations(n) => (next + batch).min(n),
                Budget::Time(d) if start.elapsed() < d => next + batch,
                Budget::Time(_) => next,
            };
            if end <= next {
                break;
            }
            let events: Vec<Result<IterationEvent, SpawnError>> = if self.config.workers <= 1 {
                (next..end).map(|i| self.iteration(i)).collect()
            } else {
                pool.install(|| (next..end).into_par_iter().map(|i| self.iteration(i)).collect())
            };
            for (i, event) in (next..end).zip(events) {
                let mut event = event?;
                self.persist(i, &mut event)?;
                report.record(i, &event);
                if self.config.report_every > 0 && (i + 1) % self.config.report_every == 0 {
                    log::info!("{}", report.progress_line());
                }
            }
            next = end;
        }
        report.finish();
        if let Some(out) = &self.config.out_dir {
            write_file(&out.join("report.txt"), &report.to_text())?;
            write_file(&out.join("report.json"), &report.to_json())?;
        }
        Ok(report)
    }

    fn persist(&self, index: u64, event: &mut IterationEvent) -> Result<(), DriverError> {
        let (Some(out), IterationEvent::Executed { outcome, text, .. }) = (&self.config.out_dir, event) else {
            return Ok(());
        };
        let sub = match outcome.category {
            Category::Crash => "crashes",
            Category::Valid => "valid",
            _ => return Ok(()),
        };
        let path = out.join(sub).join(format!("{index:06}.mlir"));
        write_file(&path, text)?;
        if outcome.category == Category::Crash {
            let mut info = outcome.pass_pipeline.flags().join("\n");
            info.push('\n');
            write_file(&path.with_extension("pipeline"), &info)?;
            write_file(&path.with_extension("stderr"), &outcome.diagnostic_text)?;
        }
        outcome.test_case_path = Some(path);
        Ok(())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), DriverError> {
    fs::write(path, contents).map_err(|source| DriverError::Io { path: path.to_path_buf(), source })
}

/// Tallies shared by the report.
pub(crate) fn tally(events: &mut EventCounts, outcomes: &mut OutcomeCounts, event: &IterationEvent) {
    match event {
        IterationEvent::NoEligibleNode => events.no_eligible_node += 1,
        IterationEvent::NoSite => events.no_site += 1,
        IterationEvent::IllegalGraft => events.illegal_graft += 1,
        IterationEvent::PreFiltered => events.prefiltered += 1,
        IterationEvent::Executed { outcome, violations, .. } => {
            events.executed += 1;
            if *violations > 0 {
                events.executed_with_violations += 1;
            }
            outcomes.add(outcome.category);
        }
    }
}
