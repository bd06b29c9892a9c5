// SPDX-License-Identifier: Apache-2.0

//! Mutation synthesis: pick a donor subtree, split the donor into a context
//! with a hole and a detached mutation, then abstract the terminals the two
//! halves share into parameters.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::Rng;

use crate::syntax::{print_with, NodeId, NodeKind, OwnedNode, Rule, SyntaxTree, TokenKind};

/// Rules whose subtrees may be transplanted.
pub const ELIGIBLE_ROOTS: [Rule; 6] =
    [Rule::Operation, Rule::Region, Rule::Block, Rule::ValueUse, Rule::Type, Rule::AttrEntry];

/// Terminal kinds that are abstracted into parameters when shared.
pub const PARAMETER_KINDS: [TokenKind; 3] = [TokenKind::ValueId, TokenKind::TypeToken, TokenKind::IntLit];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("donor has no eligible subtree")]
    NoEligibleNode,
}

/// Eligible mutation roots in breadth-first order.
pub fn eligible_nodes(donor: &SyntaxTree) -> Vec<NodeId> {
    donor
        .walk()
        .filter(|&id| matches!(donor.kind(id), NodeKind::Rule(r) if ELIGIBLE_ROOTS.contains(&r)))
        .collect()
}

/// Draws one eligible subtree root uniformly at random.
pub fn select_mutation_subtree<R: Rng + ?Sized>(donor: &SyntaxTree, rng: &mut R) -> Result<NodeId, SynthError> {
    let eligible = eligible_nodes(donor);
    if eligible.is_empty() {
        return Err(SynthError::NoEligibleNode);
    }
    Ok(eligible[rng.random_range(0..eligible.len())])
}

/// Donor split at one node.
#[derive(Debug, Clone)]
pub struct Bisection {
    /// The donor with the selected subtree replaced by a childless hole node
    /// of the same kind.
    pub context: SyntaxTree,
    pub hole: NodeId,
    pub hole_path: Vec<usize>,
    /// Detached copy of the selected subtree.
    pub mutation: SyntaxTree,
}

pub fn bisect(donor: &SyntaxTree, subtree: NodeId) -> Bisection {
    let hole_path = donor.path_to(subtree);
    let root = donor.rebuild(&mut |id| {
        (id == subtree).then(|| OwnedNode {
            kind: donor.kind(id),
            text: String::new(),
            span: donor.span(id),
            children: Vec::new(),
        })
    });
    let context = SyntaxTree::from_owned(root, donor.source().to_string());
    let hole = context.node_at_path(&hole_path).expect("hole path exists in context");
    let mutation = SyntaxTree::from_owned(donor.to_owned_node(subtree), donor.source().to_string());
    Bisection { context, hole, hole_path, mutation }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

impl fmt::Display for ParamId {
    /// `A`..`Z`, then `AA`, `AB`, ...
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut n = self.0;
        let mut letters = Vec::new();
        loop {
            letters.push(b'A' + (n % 26) as u8);
            if n < 26 {
                break;
            }
            n = n / 26 - 1;
        }
        letters.reverse();
        f.write_str(std::str::from_utf8(&letters).unwrap())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Context,
    Mutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occurrence {
    pub side: Side,
    pub node: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    pub id: ParamId,
    pub kind: TokenKind,
    pub donor_value: String,
    pub occurrences: Vec<Occurrence>,
}

/// A mutation together with the context it was cut from.
#[derive(Debug, Clone)]
pub struct ParameterizedMutation {
    context: SyntaxTree,
    hole: NodeId,
    hole_path: Vec<usize>,
    mutation: SyntaxTree,
    params: Vec<Parameter>,
    context_params: HashMap<NodeId, ParamId>,
    mutation_params: HashMap<NodeId, ParamId>,
}

impl ParameterizedMutation {
    pub fn context(&self) -> &SyntaxTree {
        &self.context
    }

    pub fn hole(&self) -> NodeId {
        self.hole
    }

    pub fn hole_path(&self) -> &[usize] {
        &self.hole_path
    }

    pub fn mutation(&self) -> &SyntaxTree {
        &self.mutation
    }

    pub fn root_kind(&self) -> NodeKind {
        self.mutation.kind(self.mutation.root())
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn param(&self, id: ParamId) -> &Parameter {
        &self.params[id.0]
    }

    pub fn context_param(&self, node: NodeId) -> Option<ParamId> {
        self.context_params.get(&node).copied()
    }

    pub fn mutation_param(&self, node: NodeId) -> Option<ParamId> {
        self.mutation_params.get(&node).copied()
    }

    /// Puts the mutation back into the hole, ignoring parameters. Yields the
    /// original donor.
    pub fn regraft(&self) -> SyntaxTree {
        let mut mutation = Some(self.mutation.to_owned_node(self.mutation.root()));
        let root = self.context.rebuild(&mut |id| if id == self.hole { mutation.take() } else { None });
        SyntaxTree::from_owned(root, self.context.source().to_string())
    }

    /// Context and mutation printed with parameters as `⟨P0⟩`, `⟨P1⟩`, ...
    /// and the hole as `⟨HOLE⟩`.
    pub fn debug_dump(&self) -> String {
        let context = print_with(&self.context, &|id| {
            if id == self.hole {
                Some("⟨HOLE⟩".to_string())
            } else {
                self.context_param(id).map(|p| format!("⟨P{}⟩", p.0))
            }
        });
        let mutation = print_with(&self.mutation, &|id| self.mutation_param(id).map(|p| format!("⟨P{}⟩", p.0)));
        let mut out = String::from("context:\n");
        out.push_str(&context);
        out.push_str("mutation:\n");
        out.push_str(&mutation);
        if !mutation.ends_with('\n') {
            out.push('\n');
        }
        out.push_str("parameters:\n");
        for p in &self.params {
            out.push_str(&format!("  ⟨P{}⟩ {} {} = {}\n", p.id.0, p.id, p.kind.name(), p.donor_value));
        }
        out
    }
}

/// Introduces one parameter per lexeme of a parameterizable kind that occurs
/// on both sides of the bisection. Parameters are numbered in breadth-first
/// order of their first occurrence in the context.
pub fn parameterize(bisection: Bisection) -> ParameterizedMutation {
    let Bisection { context, hole, hole_path, mutation } = bisection;
    let parameterizable = |tree: &SyntaxTree, id: NodeId| match tree.kind(id) {
        NodeKind::Token(kind) if PARAMETER_KINDS.contains(&kind) => Some(kind),
        _ => None,
    };

    let in_mutation: HashSet<(TokenKind, &str)> = mutation
        .ids()
        .filter_map(|id| parameterizable(&mutation, id).map(|k| (k, mutation.text(id))))
        .collect();

    let mut by_lexeme: HashMap<(TokenKind, String), ParamId> = HashMap::new();
    let mut params: Vec<Parameter> = Vec::new();
    let mut context_params = HashMap::new();
    for id in context.walk() {
        if id == hole {
            continue;
        }
        let Some(kind) = parameterizable(&context, id) else { continue };
        let text = context.text(id);
        if !in_mutation.contains(&(kind, text)) {
            continue;
        }
        let pid = *by_lexeme.entry((kind, text.to_string())).or_insert_with(|| {
            let pid = ParamId(params.len());
            params.push(Parameter { id: pid, kind, donor_value: text.to_string(), occurrences: Vec::new() });
            pid
        });
        params[pid.0].occurrences.push(Occurrence { side: Side::Context, node: id });
        context_params.insert(id, pid);
    }

    let mut mutation_params = HashMap::new();
    for id in mutation.walk() {
        let Some(kind) = parameterizable(&mutation, id) else { continue };
        if let Some(&pid) = by_lexeme.get(&(kind, mutation.text(id).to_string())) {
            params[pid.0].occurrences.push(Occurrence { side: Side::Mutation, node: id });
            mutation_params.insert(id, pid);
        }
    }

    ParameterizedMutation { context, hole, hole_path, mutation, params, context_params, mutation_params }
}

/// Select, bisect and parameterize in one step.
pub fn synthesize<R: Rng + ?Sized>(donor: &SyntaxTree, rng: &mut R) -> Result<ParameterizedMutation, SynthError> {
    let node = select_mutation_subtree(donor, rng)?;
    Ok(parameterize(bisect(donor, node)))
}
