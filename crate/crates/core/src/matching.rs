// SPDX-License-Identifier: Apache-2.0

//! Finding places in a recipient whose surroundings look like the context a
//! mutation was cut from, and binding the mutation's parameters to values
//! visible at such a place.

use std::collections::VecDeque;
use std::fmt;
use std::iter;

use rand::Rng;

use crate::synth::{ParamId, ParameterizedMutation};
use crate::syntax::{NodeId, NodeKind, Rule, SyntaxTree, TokenKind};

/// How many ancestors (`k`), left siblings (`l`) and right siblings (`r`)
/// must agree between the hole and a candidate site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchConfig {
    pub k: usize,
    pub l: usize,
    pub r: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig { k: 4, l: 4, r: 4 }
    }
}

/// Where a mutation goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MutationSite {
    /// Replace an existing node.
    Replace(NodeId),
    /// Insert a new element into a repeated child list, before the current
    /// child at `index` (or at the end when `index` equals the child count).
    Insert { parent: NodeId, index: usize },
}

impl fmt::Display for MutationSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MutationSite::Replace(n) => write!(f, "replace #{}", n.index()),
            MutationSite::Insert { parent, index } => write!(f, "insert #{}[{}]", parent.index(), index),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Anchor,
    Ancestor,
    Left,
    Right,
}

/// The first comparison that failed while checking a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mismatch {
    pub direction: Direction,
    /// 0 for the anchor, otherwise the distance from the anchor.
    pub step: usize,
}

/// A node as the matcher sees it. For insertion sites this is a virtual
/// node that does not exist in the tree yet.
#[derive(Clone, Copy)]
struct Position<'t> {
    tree: &'t SyntaxTree,
    kind: NodeKind,
    parent: Option<NodeId>,
    /// First sibling index to the right of the position.
    right_start: usize,
    /// Number of siblings to the left of the position.
    left_count: usize,
}

impl<'t> Position<'t> {
    fn at(tree: &'t SyntaxTree, site: MutationSite) -> Option<Self> {
        match site {
            MutationSite::Replace(n) => {
                let i = tree.index_in_parent(n);
                Some(Position { tree, kind: tree.kind(n), parent: tree.parent(n), right_start: i + 1, left_count: i })
            }
            MutationSite::Insert { parent, index } => {
                let element = tree.kind(parent).rule()?.quantified_element()?;
                Some(Position {
                    tree,
                    kind: NodeKind::Rule(element),
                    parent: Some(parent),
                    right_start: index,
                    left_count: index,
                })
            }
        }
    }

    fn siblings(&self) -> &'t [NodeId] {
        self.parent.map_or(&[], |p| self.tree.children(p))
    }

    fn ancestors(&self) -> impl Iterator<Item = NodeId> + 't {
        let tree = self.tree;
        iter::successors(self.parent, move |&n| tree.parent(n))
    }

    /// Left siblings, nearest first.
    fn left(&self) -> impl Iterator<Item = NodeId> + 't {
        self.siblings()[..self.left_count].iter().rev().copied()
    }

    fn right(&self) -> impl Iterator<Item = NodeId> + 't {
        let s = self.siblings();
        s[self.right_start.min(s.len())..].iter().copied()
    }

    fn chain(&self, direction: Direction) -> Box<dyn Iterator<Item = NodeId> + 't> {
        match direction {
            Direction::Anchor => Box::new(iter::empty()),
            Direction::Ancestor => Box::new(self.ancestors()),
            Direction::Left => Box::new(self.left()),
            Direction::Right => Box::new(self.right()),
        }
    }
}

/// Compares the neighborhood of the hole with that of a candidate site.
///
/// The anchors must have the same kind. Then up to `k` ancestors, `l` left
/// siblings and `r` right siblings are compared pairwise by kind. When both
/// sides run out at the same step the rest of that direction is accepted;
/// when only one side runs out the site is rejected.
pub fn check_site(
    pm: &ParameterizedMutation,
    recipient: &SyntaxTree,
    site: MutationSite,
    config: MatchConfig,
) -> Result<(), Mismatch> {
    let hole = Position::at(pm.context(), MutationSite::Replace(pm.hole())).expect("hole position");
    let Some(candidate) = Position::at(recipient, site) else {
        return Err(Mismatch { direction: Direction::Anchor, step: 0 });
    };
    if hole.kind != candidate.kind {
        return Err(Mismatch { direction: Direction::Anchor, step: 0 });
    }
    for (direction, depth) in [(Direction::Ancestor, config.k), (Direction::Left, config.l), (Direction::Right, config.r)]
    {
        let mut ours = hole.chain(direction);
        let mut theirs = candidate.chain(direction);
        for step in 1..=depth {
            match (ours.next(), theirs.next()) {
                (None, None) => break,
                (Some(a), Some(b)) if pm.context().kind(a) == recipient.kind(b) => {}
                _ => return Err(Mismatch { direction, step }),
            }
        }
    }
    Ok(())
}

/// Insertion indices of a node's repeated child list, in increasing order.
pub fn insertion_slots(tree: &SyntaxTree, node: NodeId) -> std::ops::RangeInclusive<usize> {
    let Some(rule) = tree.kind(node).rule().filter(|r| r.quantified_element().is_some()) else {
        #[allow(clippy::reversed_empty_ranges)]
        return 1..=0;
    };
    let children = tree.children(node);
    let start = match rule {
        Rule::BlockLabel => 1,
        Rule::Block if children.first().is_some_and(|&c| tree.kind(c) == NodeKind::Rule(Rule::BlockLabel)) => 1,
        _ => 0,
    };
    start..=children.len()
}

/// Every insertion slot of the tree, in breadth-first order of the parent.
pub fn enumerate_insertion_slots(tree: &SyntaxTree) -> Vec<(NodeId, usize)> {
    tree.walk().flat_map(|n| insertion_slots(tree, n).map(move |i| (n, i))).collect()
}

/// All candidate sites in breadth-first order: each node's replacement site
/// followed by its insertion slots.
pub fn candidate_sites(tree: &SyntaxTree) -> impl Iterator<Item = MutationSite> + '_ {
    tree.walk().flat_map(move |n| {
        iter::once(MutationSite::Replace(n))
            .chain(insertion_slots(tree, n).map(move |index| MutationSite::Insert { parent: n, index }))
    })
}

/// Lazily yields every site whose neighborhood matches the hole's.
pub fn locate<'a>(
    pm: &'a ParameterizedMutation,
    recipient: &'a SyntaxTree,
    config: MatchConfig,
) -> impl Iterator<Item = MutationSite> + 'a {
    candidate_sites(recipient).filter(move |&site| check_site(pm, recipient, site, config).is_ok())
}

/// A value chosen for one parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundValue {
    pub kind: TokenKind,
    pub lexeme: String,
    /// The recipient terminal the value was taken from. `None` when the
    /// donor's own value is kept.
    pub source: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParameterBinding {
    values: Vec<BoundValue>,
}

impl ParameterBinding {
    /// Every parameter keeps its donor value.
    pub fn identity(pm: &ParameterizedMutation) -> Self {
        let values = pm
            .params()
            .iter()
            .map(|p| BoundValue { kind: p.kind, lexeme: p.donor_value.clone(), source: None })
            .collect();
        ParameterBinding { values }
    }

    pub fn get(&self, id: ParamId) -> &BoundValue {
        &self.values[id.0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &BoundValue)> {
        self.values.iter().enumerate().map(|(i, v)| (ParamId(i), v))
    }
}

/// Candidate values for one parameter: distinct lexemes in discovery order,
/// each with the first recipient terminal that carried it.
pub type Candidates = Vec<(String, NodeId)>;

/// Walks the hole's neighborhood and the site's neighborhood in lockstep and
/// collects, for each parameter, the recipient terminals that sit where the
/// parameter's context occurrences sit.
///
/// Pairs start at the siblings of the anchor and of each matched ancestor
/// (up to `l` to the left and `r` to the right). Pairs of the same kind are
/// descended child by child; a context terminal that is a parameter
/// occurrence paired with a recipient terminal of the same token kind
/// contributes that terminal's lexeme.
pub fn binding_candidates(
    pm: &ParameterizedMutation,
    recipient: &SyntaxTree,
    site: MutationSite,
    config: MatchConfig,
) -> Vec<Candidates> {
    let context = pm.context();
    let mut found: Vec<Candidates> = vec![Vec::new(); pm.params().len()];
    if pm.params().is_empty() {
        return found;
    }
    let Some(candidate) = Position::at(recipient, site) else { return found };
    let hole = Position::at(context, MutationSite::Replace(pm.hole())).expect("hole position");

    let mut queue: VecDeque<(NodeId, NodeId)> = VecDeque::new();
    let width = config.l.max(config.r);
    let seed_level = |ours: Position<'_>, theirs: Position<'_>, queue: &mut VecDeque<(NodeId, NodeId)>| {
        let mut ours_left = ours.left();
        let mut theirs_left = theirs.left();
        let mut ours_right = ours.right();
        let mut theirs_right = theirs.right();
        for i in 1..=width {
            if i <= config.l {
                if let (Some(a), Some(b)) = (ours_left.next(), theirs_left.next()) {
                    queue.push_back((a, b));
                }
            }
            if i <= config.r {
                if let (Some(a), Some(b)) = (ours_right.next(), theirs_right.next()) {
                    queue.push_back((a, b));
                }
            }
        }
    };

    seed_level(hole, candidate, &mut queue);
    let mut ours_up = hole.ancestors();
    let mut theirs_up = candidate.ancestors();
    for _ in 0..config.k {
        let (Some(a), Some(b)) = (ours_up.next(), theirs_up.next()) else { break };
        if context.kind(a) != recipient.kind(b) {
            break;
        }
        let level = |tree, n| Position {
            tree,
            kind: NodeKind::Rule(Rule::ModuleBody),
            parent: SyntaxTree::parent(tree, n),
            right_start: tree.index_in_parent(n) + 1,
            left_count: tree.index_in_parent(n),
        };
        seed_level(level(context, a), level(recipient, b), &mut queue);
    }

    while let Some((a, b)) = queue.pop_front() {
        if context.kind(a) != recipient.kind(b) {
            continue;
        }
        if let Some(p) = pm.context_param(a) {
            if recipient.is_terminal(b) {
                let text = recipient.text(b);
                let list = &mut found[p.0];
                if !list.iter().any(|(t, _)| t == text) {
                    list.push((text.to_string(), b));
                }
            }
        }
        for (&x, &y) in context.children(a).iter().zip(recipient.children(b)) {
            queue.push_back((x, y));
        }
    }
    found
}

/// Picks one candidate per parameter uniformly among the distinct lexemes
/// found; parameters without candidates keep their donor value.
pub fn bind_parameters<R: Rng + ?Sized>(
    pm: &ParameterizedMutation,
    recipient: &SyntaxTree,
    site: MutationSite,
    config: MatchConfig,
    rng: &mut R,
) -> ParameterBinding {
    let candidates = binding_candidates(pm, recipient, site, config);
    let values = pm
        .params()
        .iter()
        .zip(candidates)
        .map(|(p, cands)| {
            if cands.is_empty() {
                BoundValue { kind: p.kind, lexeme: p.donor_value.clone(), source: None }
            } else {
                let (lexeme, node) = cands[rng.random_range(0..cands.len())].clone();
                BoundValue { kind: p.kind, lexeme, source: Some(node) }
            }
        })
        .collect();
    ParameterBinding { values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{bisect, parameterize};
    use crate::syntax::parse;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const ADD_DONOR: &str = include_str!("../tests/fixtures/add_donor.mlir");
    const SUB_RECIPIENT: &str = include_str!("../tests/fixtures/sub_recipient.mlir");

    fn op_named(t: &SyntaxTree, name: &str) -> NodeId {
        t.operations().find(|&op| t.op_name(op) == Some(name)).unwrap()
    }

    fn comb_add_mutation() -> ParameterizedMutation {
        let donor = parse(ADD_DONOR).unwrap();
        parameterize(bisect(&donor, op_named(&donor, "comb.add")))
    }

    fn block_of(t: &SyntaxTree) -> NodeId {
        t.ids().find(|&i| t.kind(i) == NodeKind::Rule(Rule::Block)).unwrap()
    }

    #[test]
    fn sub_recipient_locations() {
        let pm = comb_add_mutation();
        let t = parse(SUB_RECIPIENT).unwrap();
        let sub = op_named(&t, "comb.sub");
        let block = block_of(&t);
        let location_a = MutationSite::Replace(sub);
        let location_b = MutationSite::Insert { parent: block, index: t.children(block).len() };
        let location_c = MutationSite::Insert { parent: t.root(), index: t.children(t.root()).len() };

        let narrow = MatchConfig { k: 2, l: 1, r: 1 };
        assert_eq!(check_site(&pm, &t, location_a, narrow), Ok(()));
        assert_eq!(check_site(&pm, &t, location_b, narrow), Err(Mismatch { direction: Direction::Right, step: 1 }));
        assert_eq!(
            check_site(&pm, &t, location_c, narrow),
            Err(Mismatch { direction: Direction::Ancestor, step: 1 })
        );
        let narrow_sites: Vec<_> = locate(&pm, &t, narrow).collect();
        assert!(narrow_sites.contains(&location_a));
        assert!(!narrow_sites.contains(&location_b) && !narrow_sites.contains(&location_c));
        assert_eq!(locate(&pm, &t, MatchConfig::default()).collect::<Vec<_>>(), [location_a]);
    }

    #[test]
    fn sub_recipient_binding_candidates() {
        let pm = comb_add_mutation();
        let t = parse(SUB_RECIPIENT).unwrap();
        let site = MutationSite::Replace(op_named(&t, "comb.sub"));
        let cands = binding_candidates(&pm, &t, site, MatchConfig::default());
        let lexemes: Vec<Vec<&str>> = cands.iter().map(|c| c.iter().map(|(s, _)| s.as_str()).collect()).collect();
        // A at the first block argument, B at the bitcast result, C at every
        // type position, D at the output operand.
        assert_eq!(lexemes[0], ["%arg0"]);
        assert_eq!(lexemes[1], ["%0"]);
        assert_eq!(lexemes[2], ["i4"]);
        assert_eq!(lexemes[3], ["%1"]);
        let binding = bind_parameters(&pm, &t, site, MatchConfig::default(), &mut ChaCha8Rng::seed_from_u64(0));
        let got: Vec<_> = binding.iter().map(|(p, v)| format!("{p}={}", v.lexeme)).collect();
        assert_eq!(got, ["A=%arg0", "B=%0", "C=i4", "D=%1"]);
    }

    #[test]
    fn zero_context_accepts_every_same_kind_site() {
        let pm = comb_add_mutation();
        let t = parse(SUB_RECIPIENT).unwrap();
        let zero = MatchConfig { k: 0, l: 0, r: 0 };
        let sites: Vec<_> = locate(&pm, &t, zero).collect();
        let ops = t.operations().count();
        let op_slots = enumerate_insertion_slots(&t)
            .into_iter()
            .filter(|&(p, _)| t.kind(p).rule().and_then(|r| r.quantified_element()) == Some(Rule::Operation))
            .count();
        assert_eq!(sites.len(), ops + op_slots);
    }

    #[test]
    fn insertion_slots_skip_labels() {
        let t = parse(SUB_RECIPIENT).unwrap();
        let block = block_of(&t);
        assert_eq!(insertion_slots(&t, block), 1..=4);
        let label = t.children(block)[0];
        assert_eq!(insertion_slots(&t, label), 1..=3);
        assert_eq!(insertion_slots(&t, t.root()), 0..=1);
        assert!(insertion_slots(&t, op_named(&t, "comb.sub")).is_empty());
    }

    #[test]
    fn fallback_to_donor_value() {
        let pm = comb_add_mutation();
        // A lone operation: no siblings or ancestors to draw values from.
        let t = parse(r#""t.x"() : () -> ()"#).unwrap();
        let site = MutationSite::Replace(t.operations().next().unwrap());
        let binding = bind_parameters(&pm, &t, site, MatchConfig::default(), &mut ChaCha8Rng::seed_from_u64(1));
        for (p, v) in binding.iter() {
            assert_eq!(v.lexeme, pm.param(p).donor_value);
            assert_eq!(v.source, None);
        }
    }

    #[test]
    fn two_candidates_are_equally_likely() {
        let donor = parse(
            r#"%x = "t.def"() : () -> i8
"t.sink"(%x) : (i8) -> ()
"t.use"(%x) : (i8) -> ()"#,
        )
        .unwrap();
        let pm = parameterize(bisect(&donor, op_named(&donor, "t.use")));
        let recipient = parse(
            r#"%p = "t.def"() : () -> i8
"t.sink"(%q) : (i8) -> ()
"t.use"(%p) : (i8) -> ()"#,
        )
        .unwrap();
        let site = MutationSite::Replace(op_named(&recipient, "t.use"));
        let x = pm.params().iter().find(|p| p.donor_value == "%x").unwrap().id;
        let cands = binding_candidates(&pm, &recipient, site, MatchConfig::default());
        let mut lexemes: Vec<_> = cands[x.0].iter().map(|(s, _)| s.as_str()).collect();
        lexemes.sort();
        assert_eq!(lexemes, ["%p", "%q"]);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 20_000;
        let mut p_count = 0;
        for _ in 0..draws {
            let b = bind_parameters(&pm, &recipient, site, MatchConfig::default(), &mut rng);
            if b.get(x).lexeme == "%p" {
                p_count += 1;
            }
        }
        let freq = p_count as f64 / draws as f64;
        assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
    }

    #[test]
    fn identity_binding_keeps_donor_values() {
        let pm = comb_add_mutation();
        let b = ParameterBinding::identity(&pm);
        let got: Vec<_> = b.iter().map(|(_, v)| v.lexeme.as_str()).collect();
        assert_eq!(got, ["%arg0", "%c1", "i2", "%o1"]);
    }
}
