// SPDX-License-Identifier: Apache-2.0

//! Random generic-syntax programs for property and oracle tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use graftfuzz_core::matching::{MatchConfig, MutationSite};
use graftfuzz_core::synth::ParameterizedMutation;
use graftfuzz_core::syntax::{parse, NodeId, NodeKind, Rule, SyntaxTree};
use rand::seq::IndexedRandom;
use rand::Rng;

const OP_NAMES: [&str; 5] = ["t.a", "t.b", "u.c", "u.d", "v.e"];
const VALUES: [&str; 6] = ["%a", "%b", "%c", "%x", "%0", "%1"];
const TYPES: [&str; 4] = ["i1", "i4", "i32", "f32"];

/// A random program of at most `max_nodes` parse-tree nodes.
pub fn random_tree<R: Rng>(rng: &mut R, max_nodes: usize) -> SyntaxTree {
    loop {
        let mut text = String::new();
        for _ in 0..rng.random_range(1..=3) {
            random_op(rng, 0, &mut text);
        }
        let tree = parse(&text).expect("generated program parses");
        if tree.len() <= max_nodes {
            return tree;
        }
    }
}

fn types<R: Rng>(rng: &mut R, n: usize) -> String {
    (0..n).map(|_| *TYPES.choose(rng).unwrap()).collect::<Vec<_>>().join(", ")
}

fn random_op<R: Rng>(rng: &mut R, depth: usize, out: &mut String) {
    let results = rng.random_range(0..=2);
    let operands = rng.random_range(0..=2);
    let indent = "  ".repeat(depth);
    out.push_str(&indent);
    if results > 0 {
        let names: Vec<&str> = (0..results).map(|_| *VALUES.choose(rng).unwrap()).collect();
        out.push_str(&names.join(", "));
        out.push_str(" = ");
    }
    out.push('"');
    out.push_str(OP_NAMES.choose(rng).unwrap());
    out.push_str("\"(");
    let used: Vec<&str> = (0..operands).map(|_| *VALUES.choose(rng).unwrap()).collect();
    out.push_str(&used.join(", "));
    out.push(')');
    if depth < 2 && rng.random_bool(0.35) {
        out.push_str(" ({\n");
        let blocks = rng.random_range(1..=2);
        for b in 0..blocks {
            let ops = rng.random_range(0..=2);
            if b > 0 || ops == 0 || rng.random_bool(0.5) {
                out.push_str(&indent);
                out.push_str(&format!("^bb{b}"));
                let args = rng.random_range(0..=2);
                if args > 0 {
                    let list: Vec<String> =
                        (0..args).map(|_| format!("{}: {}", VALUES.choose(rng).unwrap(), TYPES.choose(rng).unwrap())).collect();
                    out.push_str(&format!("({})", list.join(", ")));
                }
                out.push_str(":\n");
            }
            for _ in 0..ops {
                random_op(rng, depth + 1, out);
            }
        }
        out.push_str(&indent);
        out.push_str("})");
    }
    if rng.random_bool(0.3) {
        out.push_str(&format!(" {{k = {} : {}}}", rng.random_range(0..4), TYPES.choose(rng).unwrap()));
    }
    let result_types = types(rng, results);
    let result_types = if results == 1 { result_types } else { format!("({result_types})") };
    out.push_str(&format!(" : ({}) -> {}\n", types(rng, operands), result_types));
}

/// Element rule of a repeated child list, listed independently of the
/// library's own table.
fn list_element(rule: Rule) -> Option<Rule> {
    match rule {
        Rule::ModuleBody | Rule::Block => Some(Rule::Operation),
        Rule::Region => Some(Rule::Block),
        Rule::RegionList => Some(Rule::Region),
        Rule::OperandList => Some(Rule::ValueUse),
        Rule::BlockLabel => Some(Rule::BlockArg),
        _ => None,
    }
}

type Neighborhood = (String, Vec<String>, Vec<String>, Vec<String>);

fn names(tree: &SyntaxTree, ids: impl Iterator<Item = NodeId>) -> Vec<String> {
    ids.map(|i| tree.kind(i).name().to_string()).collect()
}

/// Anchor kind, ancestors (nearest first), left siblings (nearest first)
/// and right siblings of a position that holds `kind` at `index` among
/// `parent`'s children (`skip` = 1 for an existing node, 0 for an insertion).
fn neighborhood(tree: &SyntaxTree, kind: &str, parent: Option<NodeId>, index: usize, skip: usize) -> Neighborhood {
    let mut ancestors = Vec::new();
    let mut cur = parent;
    while let Some(p) = cur {
        ancestors.push(tree.kind(p).name().to_string());
        cur = tree.parent(p);
    }
    let siblings: Vec<NodeId> = parent.map(|p| tree.children(p).to_vec()).unwrap_or_default();
    let left = names(tree, siblings[..index].iter().rev().copied());
    let right = names(tree, siblings[(index + skip).min(siblings.len())..].iter().copied());
    (kind.to_string(), ancestors, left, right)
}

fn agrees(ours: &[String], theirs: &[String], depth: usize) -> bool {
    for i in 0..depth {
        match (ours.get(i), theirs.get(i)) {
            (None, None) => return true,
            (Some(a), Some(b)) if a == b => {}
            _ => return false,
        }
    }
    true
}

/// Every site that passes the neighborhood comparison, found by exhaustive
/// enumeration.
pub fn brute_force_sites(pm: &ParameterizedMutation, recipient: &SyntaxTree, cfg: MatchConfig) -> BTreeSet<MutationSite> {
    let ctx = pm.context();
    let hole = pm.hole();
    let want = neighborhood(ctx, ctx.kind(hole).name(), ctx.parent(hole), ctx.index_in_parent(hole), 1);
    let ok = |got: &Neighborhood| {
        got.0 == want.0 && agrees(&want.1, &got.1, cfg.k) && agrees(&want.2, &got.2, cfg.l) && agrees(&want.3, &got.3, cfg.r)
    };
    let mut sites = BTreeSet::new();
    for id in recipient.ids() {
        let n = neighborhood(recipient, recipient.kind(id).name(), recipient.parent(id), recipient.index_in_parent(id), 1);
        if ok(&n) {
            sites.insert(MutationSite::Replace(id));
        }
        let NodeKind::Rule(rule) = recipient.kind(id) else { continue };
        let Some(element) = list_element(rule) else { continue };
        let kids = recipient.children(id);
        let first = kids
            .first()
            .is_some_and(|&c| matches!(recipient.kind(c), NodeKind::Rule(Rule::BlockLabel) | NodeKind::Token(_)))
            as usize;
        for index in first..=kids.len() {
            let n = neighborhood(recipient, NodeKind::Rule(element).name(), Some(id), index, 0);
            if ok(&n) {
                sites.insert(MutationSite::Insert { parent: id, index });
            }
        }
    }
    sites
}

/// A parameterized mutation synthesized from a fresh random donor.
pub fn random_mutation<R: Rng>(rng: &mut R, max_nodes: usize) -> ParameterizedMutation {
    loop {
        let donor = random_tree(rng, max_nodes);
        if let Ok(pm) = graftfuzz_core::synth::synthesize(&donor, rng) {
            return pm;
        }
    }
}

/// True when every site found under `narrow` is also found under `wide`,
/// where `wide` compares no more context in any direction.
pub fn is_subset(narrow: &BTreeSet<MutationSite>, wide: &BTreeSet<MutationSite>) -> bool {
    narrow.is_subset(wide)
}
