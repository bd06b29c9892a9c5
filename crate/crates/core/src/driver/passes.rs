// SPDX-License-Identifier: Apache-2.0

//! Pass registries and random pass pipelines.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::{index, IndexedRandom, SliceRandom};
use rand::Rng;

use super::DriverError;
use crate::coverage::dialects;
use crate::syntax::SyntaxTree;

/// Chance that a selected pass gets a random option attached.
pub const OPTION_PROBABILITY: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassSpec {
    pub name: String,
    pub options: Vec<String>,
}

/// Known passes and the options each one accepts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PassRegistry {
    passes: Vec<PassSpec>,
}

impl PassRegistry {
    /// One pass per line with optional tab-separated options. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, DriverError> {
        let mut passes: Vec<PassSpec> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t').map(str::trim).filter(|f| !f.is_empty());
            let name = fields.next().unwrap_or_default();
            if name.starts_with('-') || name.contains(char::is_whitespace) {
                return Err(DriverError::PassFile { line: i + 1, message: format!("bad pass name `{name}`") });
            }
            if passes.iter().any(|p| p.name == name) {
                return Err(DriverError::PassFile { line: i + 1, message: format!("duplicate pass `{name}`") });
            }
            passes.push(PassSpec { name: name.to_string(), options: fields.map(str::to_string).collect() });
        }
        if passes.is_empty() {
            return Err(DriverError::PassFile { line: 0, message: "no passes listed".into() });
        }
        Ok(PassRegistry { passes })
    }

    pub fn load(path: &Path) -> Result<Self, DriverError> {
        let text = std::fs::read_to_string(path).map_err(|source| DriverError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    /// The registry shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(include_str!("../../passes/default.txt")).expect("bundled pass file is valid")
    }

    pub fn passes(&self) -> &[PassSpec] {
        &self.passes
    }

    pub fn get(&self, name: &str) -> Option<&PassSpec> {
        self.passes.iter().find(|p| p.name == name)
    }

    pub fn len(&self) -> usize {
        self.passes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.passes.is_empty()
    }

    /// Every option of every pass, deduplicated and sorted.
    pub fn option_pool(&self) -> Vec<&str> {
        let pool: BTreeSet<&str> = self.passes.iter().flat_map(|p| p.options.iter().map(String::as_str)).collect();
        pool.into_iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassInvocation {
    pub pass: String,
    pub option: Option<String>,
}

impl PassInvocation {
    pub fn flag(&self) -> String {
        match &self.option {
            Some(o) => format!("--{}={}", self.pass, o),
            None => format!("--{}", self.pass),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pipeline(pub Vec<PassInvocation>);

impl Pipeline {
    pub fn flags(&self) -> Vec<String> {
        self.0.iter().map(PassInvocation::flag).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.flags().join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PassSelection {
    /// Prefer passes whose name mentions a dialect used by the test case.
    #[default]
    DialectHeuristic,
    Random,
}

impl FromStr for PassSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "heuristic" | "dialect-heuristic" => Ok(PassSelection::DialectHeuristic),
            "random" => Ok(PassSelection::Random),
            other => Err(format!("unknown pass selection `{other}` (expected heuristic or random)")),
        }
    }
}

impl fmt::Display for PassSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PassSelection::DialectHeuristic => "heuristic",
            PassSelection::Random => "random",
        })
    }
}

/// Draws `p` distinct passes (fewer if the registry is smaller).
pub fn select_passes<R: Rng + ?Sized>(
    tree: &SyntaxTree,
    registry: &PassRegistry,
    p: usize,
    mode: PassSelection,
    option_probability: f64,
    rng: &mut R,
) -> Pipeline {
    let n = registry.len();
    let want = p.min(n);
    let mut chosen: Vec<usize> = match mode {
        PassSelection::Random => index::sample(rng, n, want).into_vec(),
        PassSelection::DialectHeuristic => {
            let present = dialects(tree);
            let (preferred, rest): (Vec<usize>, Vec<usize>) =
                (0..n).partition(|&i| present.iter().any(|d| registry.passes[i].name.contains(d.as_str())));
            let mut chosen: Vec<usize> = preferred.choose_multiple(rng, want).copied().collect();
            let missing = want - chosen.len();
            chosen.extend(rest.choose_multiple(rng, missing).copied());
            chosen.shuffle(rng);
            chosen
        }
    };
    chosen.truncate(want);
    let pool = registry.option_pool();
    let invocations = chosen
        .into_iter()
        .map(|i| {
            let option = (!pool.is_empty() && rng.random_bool(option_probability))
                .then(|| pool[rng.random_range(0..pool.len())].to_string());
            PassInvocation { pass: registry.passes[i].name.clone(), option }
        })
        .collect();
    Pipeline(invocations)
}
