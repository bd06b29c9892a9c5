// SPDX-License-Identifier: Apache-2.0

//! Dialect-level coverage: which dialects a program uses and which pairs of
//! dialects interact through nesting (control) or through SSA values (data).

use std::collections::BTreeSet;
use std::fmt;

use serde::ser::SerializeTuple;
use serde::{Serialize, Serializer};

use crate::constraints::{def_use_events, DefUseEvent, Definer};
use crate::syntax::{NodeId, NodeKind, Rule, SyntaxTree};

/// Prefix of an op name before its first `.`; quotes are ignored.
pub fn dialect_of(op_name: &str) -> &str {
    let name = op_name.trim_matches('"');
    name.split_once('.').map_or(name, |(d, _)| d)
}

/// Unordered pair of distinct dialects, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DialectPair(String, String);

impl DialectPair {
    /// `None` when both sides name the same dialect.
    pub fn new(a: &str, b: &str) -> Option<Self> {
        match a.cmp(b) {
            std::cmp::Ordering::Less => Some(DialectPair(a.to_string(), b.to_string())),
            std::cmp::Ordering::Greater => Some(DialectPair(b.to_string(), a.to_string())),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn first(&self) -> &str {
        &self.0
    }

    pub fn second(&self) -> &str {
        &self.1
    }
}

impl fmt::Display for DialectPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

impl Serialize for DialectPair {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(2)?;
        t.serialize_element(&self.0)?;
        t.serialize_element(&self.1)?;
        t.end()
    }
}

fn op_dialect(tree: &SyntaxTree, op: NodeId) -> Option<&str> {
    tree.op_name(op).map(dialect_of)
}

pub fn dialects(tree: &SyntaxTree) -> BTreeSet<String> {
    tree.operations().filter_map(|op| op_dialect(tree, op)).map(str::to_string).collect()
}

/// Pairs (A, B) where an op of dialect B is nested, at any depth, inside an
/// op of dialect A.
pub fn control_pairs(tree: &SyntaxTree) -> BTreeSet<DialectPair> {
    let mut pairs = BTreeSet::new();
    for op in tree.operations() {
        let Some(inner) = op_dialect(tree, op) else { continue };
        let mut cur = tree.parent(op);
        while let Some(n) = cur {
            if tree.kind(n) == NodeKind::Rule(Rule::Operation) {
                if let Some(p) = op_dialect(tree, n).and_then(|outer| DialectPair::new(outer, inner)) {
                    pairs.insert(p);
                }
            }
            cur = tree.parent(n);
        }
    }
    pairs
}

/// Pairs (A, B) where an op of dialect B uses a result of an op of dialect A.
pub fn data_pairs(tree: &SyntaxTree) -> BTreeSet<DialectPair> {
    let mut pairs = BTreeSet::new();
    for event in def_use_events(tree) {
        if let DefUseEvent::Use { user, resolved: Some(Definer::OpResult(def)), .. } = event {
            if let (Some(a), Some(b)) = (op_dialect(tree, def), op_dialect(tree, user)) {
                pairs.extend(DialectPair::new(a, b));
            }
        }
    }
    pairs
}

/// Coverage of one program, or the union over many.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub dialects: BTreeSet<String>,
    pub control_pairs: BTreeSet<DialectPair>,
    pub data_pairs: BTreeSet<DialectPair>,
}

impl CoverageReport {
    pub fn of(tree: &SyntaxTree) -> Self {
        CoverageReport { dialects: dialects(tree), control_pairs: control_pairs(tree), data_pairs: data_pairs(tree) }
    }

    pub fn accumulate(&mut self, tree: &SyntaxTree) {
        self.merge(&CoverageReport::of(tree));
    }

    pub fn merge(&mut self, other: &CoverageReport) {
        self.dialects.extend(other.dialects.iter().cloned());
        self.control_pairs.extend(other.control_pairs.iter().cloned());
        self.data_pairs.extend(other.data_pairs.iter().cloned());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("coverage serializes")
    }
}

impl fmt::Display for CoverageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn line<T: fmt::Display>(f: &mut fmt::Formatter<'_>, label: &str, items: &BTreeSet<T>) -> fmt::Result {
            write!(f, "{label} ({}):", items.len())?;
            for i in items {
                write!(f, " {i}")?;
            }
            writeln!(f)
        }
        line(f, "dialects", &self.dialects)?;
        line(f, "control pairs", &self.control_pairs)?;
        line(f, "data pairs", &self.data_pairs)
    }
}
