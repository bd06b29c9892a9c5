// SPDX-License-Identifier: Apache-2.0

//! A small opt-style validator used as a hermetic target. It checks pass
//! flags, parses the input, enforces SSA def-use rules and operand/result
//! counts, and verifies a handful of `hw`, `comb`, `sv` and `llhd` ops.

use std::path::Path;

use crate::constraints::{check_generic_constraints, ViolationKind};
use crate::driver::classify::Category;
use crate::driver::passes::PassRegistry;
use crate::syntax::{parse, NodeId, NodeKind, Rule, Span, SyntaxTree};

/// Environment variable naming a pass file for the `reference-opt` binary.
pub const PASSES_ENV: &str = "REFERENCE_OPT_PASSES";

/// How far the input got before it was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectStage {
    Options,
    Syntax,
    DefUse,
    Arity,
    Verifier,
}

impl RejectStage {
    /// The category a classifier should assign to this rejection.
    pub fn category(self) -> Category {
        match self {
            RejectStage::Options => Category::InvalidOptions,
            RejectStage::Syntax | RejectStage::DefUse | RejectStage::Arity => Category::GeneralMlir,
            RejectStage::Verifier => Category::DialectSpecific,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceVerdict {
    pub exit_code: i32,
    pub diagnostics: Vec<String>,
    pub stage: Option<RejectStage>,
}

impl ReferenceVerdict {
    fn accept() -> Self {
        ReferenceVerdict { exit_code: 0, diagnostics: Vec::new(), stage: None }
    }

    fn reject(stage: RejectStage, diagnostics: Vec<String>) -> Self {
        ReferenceVerdict { exit_code: 1, diagnostics, stage: Some(stage) }
    }

    pub fn accepted(&self) -> bool {
        self.exit_code == 0
    }

    pub fn category(&self) -> Category {
        self.stage.map_or(Category::Valid, RejectStage::category)
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceTarget {
    registry: PassRegistry,
    file_name: String,
}

impl Default for ReferenceTarget {
    fn default() -> Self {
        ReferenceTarget::new(PassRegistry::builtin())
    }
}

impl ReferenceTarget {
    pub fn new(registry: PassRegistry) -> Self {
        ReferenceTarget { registry, file_name: "input.mlir".to_string() }
    }

    /// Registry from [`PASSES_ENV`] if set, otherwise the bundled one.
    pub fn from_env() -> Result<Self, crate::driver::DriverError> {
        match std::env::var_os(PASSES_ENV) {
            Some(path) => Ok(ReferenceTarget::new(PassRegistry::load(Path::new(&path))?)),
            None => Ok(ReferenceTarget::default()),
        }
    }

    /// Name used as the location prefix in diagnostics.
    pub fn with_file_name(mut self, name: impl Into<String>) -> Self {
        self.file_name = name.into();
        self
    }

    pub fn validate(&self, text: &str, flags: &[String]) -> ReferenceVerdict {
        let option_errors = self.check_flags(flags);
        if !option_errors.is_empty() {
            return ReferenceVerdict::reject(RejectStage::Options, option_errors);
        }
        let tree = match parse(text) {
            Ok(t) => t,
            Err(e) => {
                let (line, col) = line_col(text, e.offset);
                let msg = format!("{}:{line}:{col}: error: syntax error: expected {}", self.file_name, e.expected.join(" or "));
                return ReferenceVerdict::reject(RejectStage::Syntax, vec![msg]);
            }
        };

        let violations = check_generic_constraints(&tree);
        if !violations.is_empty() {
            let diags = violations
                .iter()
                .map(|v| {
                    let what = match v.kind {
                        ViolationKind::UseBeforeDef => format!("use of undeclared SSA value {}", v.value_name),
                        ViolationKind::Redefinition => format!("redefinition of SSA value '{}'", v.value_name),
                    };
                    self.located(&tree, tree.span(v.node), &what)
                })
                .collect();
            return ReferenceVerdict::reject(RejectStage::DefUse, diags);
        }

        let arity = self.check_arity(&tree);
        if !arity.is_empty() {
            return ReferenceVerdict::reject(RejectStage::Arity, arity);
        }
        let verifier = self.verify(&tree);
        if !verifier.is_empty() {
            return ReferenceVerdict::reject(RejectStage::Verifier, verifier);
        }
        ReferenceVerdict::accept()
    }

    fn check_flags(&self, flags: &[String]) -> Vec<String> {
        let mut errors = Vec::new();
        for flag in flags {
            let Some(body) = flag.strip_prefix("--") else {
                errors.push(format!("reference-opt: Unknown command line argument '{flag}'."));
                continue;
            };
            let (name, option) = match body.split_once('=') {
                Some((n, o)) => (n, Some(o)),
                None => (body, None),
            };
            match (self.registry.get(name), option) {
                (None, _) => errors.push(format!("reference-opt: Unknown command line argument '{flag}'.")),
                (Some(spec), Some(o)) if !spec.options.iter().any(|legal| legal == o) => {
                    errors.push(format!("error: '{name}' pass: no such option '{o}' exists"))
                }
                _ => {}
            }
        }
        errors
    }

    fn located(&self, tree: &SyntaxTree, span: Span, message: &str) -> String {
        let (line, col) = line_col(tree.source(), span.start);
        format!("{}:{line}:{col}: error: {message}", self.file_name)
    }

    fn check_arity(&self, tree: &SyntaxTree) -> Vec<String> {
        let mut out = Vec::new();
        for op in tree.operations() {
            let sig = Signature::of(tree, op);
            if sig.operands != sig.inputs.len() {
                let msg = format!("{} operands present, but expected {}", sig.operands, sig.inputs.len());
                out.push(self.located(tree, tree.span(op), &msg));
            }
            if sig.results != sig.outputs.len() {
                let msg =
                    format!("operation defines {} results but was provided {} to bind", sig.outputs.len(), sig.results);
                out.push(self.located(tree, tree.span(op), &msg));
            }
        }
        out
    }

    fn verify(&self, tree: &SyntaxTree) -> Vec<String> {
        let mut out = Vec::new();
        for op in tree.operations() {
            let Some(name) = tree.op_name(op) else { continue };
            let sig = Signature::of(tree, op);
            let mut fail = |msg: String| out.push(self.located(tree, tree.span(op), &format!("'{name}' op {msg}")));
            match name {
                "comb.add" | "comb.sub" | "comb.mul" | "comb.and" | "comb.or" | "comb.xor" | "comb.shl" => {
                    if sig.operands != 2 {
                        fail(format!("expected 2 operands, but found {}", sig.operands));
                    } else if sig.results != 1 {
                        fail(format!("expected 1 result, but found {}", sig.results));
                    } else if sig.inputs.iter().chain(&sig.outputs).any(|t| *t != sig.outputs[0]) {
                        fail("requires the same type for all operands and results".into());
                    }
                }
                "comb.icmp" => {
                    if sig.operands != 2 || sig.results != 1 {
                        fail("expected 2 operands and 1 result".into());
                    } else if sig.inputs[0] != sig.inputs[1] {
                        fail("requires both operands to have the same type".into());
                    } else if sig.outputs[0] != "i1" {
                        fail(format!("result #0 must be 1-bit signless integer, but got '{}'", sig.outputs[0]));
                    } else if !has_attr(tree, op, "predicate") {
                        fail("requires attribute 'predicate'".into());
                    }
                }
                "comb.mux" => {
                    if sig.operands != 3 || sig.results != 1 {
                        fail("expected 3 operands and 1 result".into());
                    } else if sig.inputs[0] != "i1" {
                        fail(format!("operand #0 must be 1-bit signless integer, but got '{}'", sig.inputs[0]));
                    } else if sig.inputs[1] != sig.inputs[2] || sig.inputs[1] != sig.outputs[0] {
                        fail("requires the same type for both values and the result".into());
                    }
                }
                "hw.constant" => {
                    if sig.operands != 0 || sig.results != 1 {
                        fail(format!("expected 0 operands and 1 result, but found {} and {}", sig.operands, sig.results));
                    } else if !has_attr(tree, op, "value") {
                        fail("requires attribute 'value'".into());
                    }
                }
                "hw.bitcast" => {
                    if sig.operands != 1 || sig.results != 1 {
                        fail("expected 1 operand and 1 result".into());
                    }
                }
                "hw.output" => {
                    if sig.results != 0 {
                        fail(format!("expected 0 results, but found {}", sig.results));
                    } else if tree.right_sibling(op).is_some() {
                        fail("must be the last operation in the parent block".into());
                    } else if enclosing_op(tree, op).and_then(|p| tree.op_name(p)) != Some("hw.module") {
                        fail("expects parent op 'hw.module'".into());
                    }
                }
                "hw.module" => {
                    let body = region_blocks(tree, op).next();
                    let terminated = body
                        .and_then(|b| last_op(tree, b))
                        .is_some_and(|last| tree.op_name(last) == Some("hw.output"));
                    if !terminated {
                        fail("body must be terminated by 'hw.output'".into());
                    }
                }
                "sv.if" => {
                    if sig.operands != 1 || sig.results != 0 {
                        fail("expected 1 operand and 0 results".into());
                    } else if sig.inputs[0] != "i1" {
                        fail(format!("operand #0 must be 1-bit signless integer, but got '{}'", sig.inputs[0]));
                    }
                }
                "llhd.proc" => {
                    let unterminated = region_blocks(tree, op).any(|b| {
                        !last_op(tree, b).is_some_and(|l| matches!(tree.op_name(l), Some("llhd.halt" | "llhd.wait")))
                    });
                    if unterminated {
                        fail("block must be terminated by 'llhd.halt' or 'llhd.wait'".into());
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Runs like an opt tool: `args` are pass flags followed by one input
    /// path. Diagnostics go to `stderr`; the return value is the exit code.
    pub fn run_cli(&self, args: &[String], stderr: &mut dyn std::io::Write) -> i32 {
        let Some((path, flags)) = args.split_last() else {
            let _ = writeln!(stderr, "reference-opt: Not enough positional command line arguments specified!");
            return 1;
        };
        let text = match std::fs::read(path) {
            Ok(bytes) => String::from_utf8_lossy(&bytes).into_owned(),
            Err(e) => {
                let _ = writeln!(stderr, "reference-opt: could not open input file '{path}': {e}");
                return 1;
            }
        };
        let verdict = self.clone().with_file_name(path.clone()).validate(&text, flags);
        for d in &verdict.diagnostics {
            let _ = writeln!(stderr, "{d}");
        }
        verdict.exit_code
    }
}

struct Signature {
    operands: usize,
    results: usize,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

impl Signature {
    fn of(tree: &SyntaxTree, op: NodeId) -> Self {
        let operands = tree.child_with_rule(op, Rule::OperandList).map_or(0, |l| tree.children(l).len());
        let results = tree.child_with_rule(op, Rule::ResultList).map_or(0, |l| {
            tree.children(l)
                .iter()
                .map(|&r| tree.text(r).split_once(':').and_then(|(_, n)| n.parse().ok()).unwrap_or(1))
                .sum()
        });
        let types = |i: usize| -> Vec<String> {
            tree.child_with_rule(op, Rule::FunctionType)
                .and_then(|f| tree.children(f).get(i).copied())
                .map(|list| tree.children(list).iter().map(|&t| type_text(tree, t)).collect())
                .unwrap_or_default()
        };
        Signature { operands, results, inputs: types(0), outputs: types(1) }
    }
}

fn type_text(tree: &SyntaxTree, ty: NodeId) -> String {
    tree.terminals(ty).iter().map(|&t| tree.text(t)).collect()
}

fn has_attr(tree: &SyntaxTree, op: NodeId, name: &str) -> bool {
    tree.child_with_rule(op, Rule::AttrDict).is_some_and(|d| {
        tree.children(d).iter().any(|&e| {
            tree.children(e).first().is_some_and(|&n| tree.text(n).trim_matches('"') == name)
        })
    })
}

fn enclosing_op(tree: &SyntaxTree, op: NodeId) -> Option<NodeId> {
    std::iter::successors(tree.parent(op), |&n| tree.parent(n))
        .find(|&n| tree.kind(n) == NodeKind::Rule(Rule::Operation))
}

fn region_blocks(tree: &SyntaxTree, op: NodeId) -> impl Iterator<Item = NodeId> + '_ {
    tree.child_with_rule(op, Rule::RegionList)
        .into_iter()
        .flat_map(move |l| tree.children(l).iter())
        .flat_map(move |&r| tree.children(r).iter().copied())
}

fn last_op(tree: &SyntaxTree, block: NodeId) -> Option<NodeId> {
    tree.children(block).last().copied().filter(|&c| tree.kind(c) == NodeKind::Rule(Rule::Operation))
}

/// 1-based line and column of a byte offset.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text.as_bytes()[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let col = offset - before.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1) + 1;
    (line, col)
}
