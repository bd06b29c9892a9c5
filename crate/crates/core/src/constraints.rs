// SPDX-License-Identifier: Apache-2.0

//! SSA def-use checks that hold for every MLIR program regardless of dialect:
//! each used value must be defined in a visible scope, and no value name may
//! be defined twice in one block.

use std::collections::HashMap;
use std::fmt;

use crate::syntax::{print_with_spans, NodeId, NodeKind, Rule, Span, SyntaxTree, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    UseBeforeDef,
    Redefinition,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::UseBeforeDef => "use-before-def",
            ViolationKind::Redefinition => "redefinition",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// The value name without result-number suffixes, e.g. `%0` for `%0#1`.
    pub value_name: String,
    /// Byte span of the offending terminal in the canonical print.
    pub position: Span,
    pub node: NodeId,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} of {} at byte {}", self.kind, self.value_name, self.position.start)
    }
}

/// Where a visible value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definer {
    OpResult(NodeId),
    BlockArg(NodeId),
}

/// Events produced by one scoped walk over a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DefUseEvent {
    Use { terminal: NodeId, user: NodeId, resolved: Option<Definer> },
    Def { terminal: NodeId, definer: Definer, redefinition: bool },
}

/// `%0#1` and `%0:2` both name the value group `%0`.
pub fn value_base(lexeme: &str) -> &str {
    let end = lexeme.char_indices().skip(1).find(|&(_, c)| c == '#' || c == ':').map_or(lexeme.len(), |(i, _)| i);
    &lexeme[..end]
}

/// Walks the tree with MLIR's visibility rules: a module body and each block
/// are scopes; a region sees its enclosing scopes plus everything defined by
/// its earlier blocks; results become visible after their operation.
pub fn def_use_events(tree: &SyntaxTree) -> Vec<DefUseEvent> {
    let mut scan = Scan { tree, scopes: Vec::new(), events: Vec::new() };
    let root = tree.root();
    match tree.kind(root) {
        NodeKind::Rule(Rule::ModuleBody) | NodeKind::Rule(Rule::Block) => {
            scan.block(root);
        }
        NodeKind::Rule(Rule::Operation) => {
            scan.scopes.push(HashMap::new());
            scan.operation(root);
        }
        _ => {}
    }
    scan.events
}

struct Scan<'t> {
    tree: &'t SyntaxTree,
    scopes: Vec<HashMap<&'t str, Definer>>,
    events: Vec<DefUseEvent>,
}

impl<'t> Scan<'t> {
    fn lookup(&self, name: &str) -> Option<Definer> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn define(&mut self, terminal: NodeId, definer: Definer) {
        let name = value_base(self.tree.text(terminal));
        let scope = self.scopes.last_mut().expect("open scope");
        let redefinition = scope.insert(name, definer).is_some();
        self.events.push(DefUseEvent::Def { terminal, definer, redefinition });
    }

    /// Scans a block (or module body) in its own scope and returns the names
    /// it defined.
    fn block(&mut self, block: NodeId) -> HashMap<&'t str, Definer> {
        let tree = self.tree;
        self.scopes.push(HashMap::new());
        for &c in tree.children(block) {
            match tree.kind(c) {
                NodeKind::Rule(Rule::BlockLabel) => {
                    for &arg in &tree.children(c)[1..] {
                        if let Some(&v) = tree.children(arg).first() {
                            self.define(v, Definer::BlockArg(arg));
                        }
                    }
                }
                NodeKind::Rule(Rule::Operation) => self.operation(c),
                _ => {}
            }
        }
        self.scopes.pop().unwrap_or_default()
    }

    fn operation(&mut self, op: NodeId) {
        let tree = self.tree;
        if let Some(operands) = tree.child_with_rule(op, Rule::OperandList) {
            for &value_use in tree.children(operands) {
                for &t in tree.children(value_use) {
                    if tree.kind(t) == NodeKind::Token(TokenKind::ValueId) {
                        let resolved = self.lookup(value_base(tree.text(t)));
                        self.events.push(DefUseEvent::Use { terminal: t, user: op, resolved });
                    }
                }
            }
        }
        if let Some(regions) = tree.child_with_rule(op, Rule::RegionList) {
            for &region in tree.children(regions) {
                self.scopes.push(HashMap::new());
                for &block in tree.children(region) {
                    let defined = self.block(block);
                    self.scopes.last_mut().expect("region scope").extend(defined);
                }
                self.scopes.pop();
            }
        }
        if let Some(results) = tree.child_with_rule(op, Rule::ResultList) {
            for &r in tree.children(results) {
                self.define(r, Definer::OpResult(op));
            }
        }
    }
}

/// All def-use violations, in the order the walk meets them. Positions refer
/// to the canonical print of the tree.
pub fn check_generic_constraints(tree: &SyntaxTree) -> Vec<Violation> {
    let events = def_use_events(tree);
    let mut spans: Option<Vec<Span>> = None;
    let mut out = Vec::new();
    for event in events {
        let (kind, terminal) = match event {
            DefUseEvent::Use { terminal, resolved: None, .. } => (ViolationKind::UseBeforeDef, terminal),
            DefUseEvent::Def { terminal, redefinition: true, .. } => (ViolationKind::Redefinition, terminal),
            _ => continue,
        };
        let spans = spans.get_or_insert_with(|| print_with_spans(tree).1);
        out.push(Violation {
            kind,
            value_name: value_base(tree.text(terminal)).to_string(),
            position: spans[terminal.index()],
            node: terminal,
        });
    }
    out
}
