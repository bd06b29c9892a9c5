// SPDX-License-Identifier: Apache-2.0

//! Loading seed test cases from a directory of `.mlir` files.

use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use super::DriverError;
use crate::syntax::{parse, OwnedNode, Rule, SyntaxTree};

/// Line that separates independent test cases inside one file.
pub const SPLIT_MARKER: &str = "// -----";

#[derive(Debug, Clone)]
pub struct Seed {
    /// `file:case:op`, with 0-based case and op indices.
    pub name: String,
    pub tree: SyntaxTree,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub seeds: Vec<Seed>,
    pub files: usize,
    /// Chunks that failed to parse.
    pub skipped: usize,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    /// Adds the test cases of one file's text.
    pub fn add_text(&mut self, name: &str, text: &str) {
        for (case, chunk) in split_test_cases(text).into_iter().enumerate() {
            match parse(chunk) {
                Ok(tree) => {
                    for (i, &op) in tree.children(tree.root()).iter().enumerate() {
                        let body = OwnedNode::rule(Rule::ModuleBody, vec![tree.to_owned_node(op)]);
                        self.seeds.push(Seed { name: format!("{name}:{case}:{i}"), tree: SyntaxTree::canonical(body) });
                    }
                }
                Err(e) => {
                    log::warn!("skipping {name} case {case}: {e}");
                    self.skipped += 1;
                }
            }
        }
    }
}

/// Splits text at lines consisting of the split marker.
pub fn split_test_cases(text: &str) -> Vec<&str> {
    let mut cases = Vec::new();
    let mut start = 0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if line.trim() == SPLIT_MARKER {
            cases.push(&text[start..offset]);
            start = offset + line.len();
        }
        offset += line.len();
    }
    cases.push(&text[start..]);
    cases
}

/// Every `.mlir` file under `dir`, in path order, split into one seed per
/// top-level operation.
pub fn load_corpus(dir: &Path) -> Result<Corpus, DriverError> {
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| DriverError::Io {
            path: e.path().map_or_else(|| dir.to_path_buf(), Path::to_path_buf),
            source: e.into(),
        })?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|x| x == "mlir") {
            paths.push(entry.into_path());
        }
    }
    let mut corpus = Corpus::default();
    for path in paths {
        let bytes = std::fs::read(&path).map_err(|source| DriverError::Io { path: path.clone(), source })?;
        let name = path.strip_prefix(dir).unwrap_or(&path).display().to_string();
        match String::from_utf8(bytes) {
            Ok(text) => corpus.add_text(&name, &text),
            Err(_) => {
                log::warn!("skipping {name}: not UTF-8");
                corpus.skipped += 1;
            }
        }
        corpus.files += 1;
    }
    if corpus.is_empty() {
        return Err(DriverError::EmptyCorpus(dir.to_path_buf()));
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_marker() {
        assert_eq!(split_test_cases("a\n// -----\nb\n"), ["a\n", "b\n"]);
        assert_eq!(split_test_cases("a"), ["a"]);
        assert_eq!(split_test_cases("// -----\n"), ["", ""]);
    }

    #[test]
    fn two_modules_two_seeds() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("x.mlir"),
            "\"hw.module\"() ({\n}) : () -> ()\n// -----\n\"hw.module\"() ({\n}) : () -> ()\n",
        )
        .unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let c = load_corpus(dir.path()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.files, 1);
        assert_eq!(c.seeds[1].name, "x.mlir:1:0");
    }

    #[test]
    fn top_level_ops_become_separate_seeds_and_bad_cases_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.mlir"), "\"t.a\"() : () -> ()\n\"t.b\"() : () -> ()\n// -----\n\"t.c\"(\n")
            .unwrap();
        let c = load_corpus(dir.path()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.skipped, 1);
    }

    #[test]
    fn empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_corpus(dir.path()), Err(DriverError::EmptyCorpus(_))));
    }
}
