// SPDX-License-Identifier: Apache-2.0

use std::collections::VecDeque;
use std::fmt;

/// Index of a node inside a [`SyntaxTree`] arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Half-open byte range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

/// Production rules of the generic operation grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    ModuleBody,
    Operation,
    ResultList,
    OpName,
    OperandList,
    ValueUse,
    SuccessorList,
    RegionList,
    Region,
    Block,
    BlockLabel,
    BlockArg,
    AttrDict,
    AttrEntry,
    FunctionType,
    TypeList,
    Type,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::ModuleBody => "module-body",
            Rule::Operation => "operation",
            Rule::ResultList => "result-list",
            Rule::OpName => "op-name",
            Rule::OperandList => "operand-list",
            Rule::ValueUse => "value-use",
            Rule::SuccessorList => "successor-list",
            Rule::RegionList => "region-list",
            Rule::Region => "region",
            Rule::Block => "block",
            Rule::BlockLabel => "block-label",
            Rule::BlockArg => "block-arg",
            Rule::AttrDict => "attr-dict",
            Rule::AttrEntry => "attr-entry",
            Rule::FunctionType => "function-type",
            Rule::TypeList => "type-list",
            Rule::Type => "type",
        }
    }

    /// Element rule of a quantified child list, if this rule owns one.
    pub fn quantified_element(self) -> Option<Rule> {
        match self {
            Rule::ModuleBody | Rule::Block => Some(Rule::Operation),
            Rule::Region => Some(Rule::Block),
            Rule::RegionList => Some(Rule::Region),
            Rule::OperandList => Some(Rule::ValueUse),
            Rule::BlockLabel => Some(Rule::BlockArg),
            _ => None,
        }
    }
}

/// Lexical class of a terminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenKind {
    ValueId,
    CaretId,
    SymbolRef,
    StringLit,
    IntLit,
    FloatLit,
    TypeToken,
    AttrValue,
    BareId,
}

impl TokenKind {
    pub fn name(self) -> &'static str {
        match self {
            TokenKind::ValueId => "value-id",
            TokenKind::CaretId => "caret-id",
            TokenKind::SymbolRef => "symbol-ref",
            TokenKind::StringLit => "string-lit",
            TokenKind::IntLit => "int-lit",
            TokenKind::FloatLit => "float-lit",
            TokenKind::TypeToken => "type-token",
            TokenKind::AttrValue => "attr-value",
            TokenKind::BareId => "bare-id",
        }
    }

    /// Classifies an opaque attribute value lexeme.
    pub fn of_attr_value(text: &str) -> TokenKind {
        if is_int_literal(text) {
            TokenKind::IntLit
        } else if is_float_literal(text) {
            TokenKind::FloatLit
        } else if text.len() >= 2 && text.starts_with('"') && text.ends_with('"') && !text[1..text.len() - 1].contains('"') {
            TokenKind::StringLit
        } else if text.len() > 1
            && text.starts_with('@')
            && text[1..].bytes().all(|b| b.is_ascii_alphanumeric() || b"_$.-".contains(&b))
        {
            TokenKind::SymbolRef
        } else {
            TokenKind::AttrValue
        }
    }
}

fn is_int_literal(text: &str) -> bool {
    let digits = text.strip_prefix('-').unwrap_or(text);
    if let Some(hex) = digits.strip_prefix("0x") {
        return !hex.is_empty() && hex.bytes().all(|b| b.is_ascii_hexdigit());
    }
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn is_float_literal(text: &str) -> bool {
    let body = text.strip_prefix('-').unwrap_or(text);
    let Some((int, rest)) = body.split_once('.') else {
        return false;
    };
    if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
        return false;
    }
    let (frac, exp) = match rest.find(['e', 'E']) {
        Some(i) => (&rest[..i], Some(&rest[i + 1..])),
        None => (rest, None),
    };
    if !frac.bytes().all(|b| b.is_ascii_digit()) {
        return false;
    }
    match exp {
        None => true,
        Some(e) => {
            let e = e.strip_prefix(['+', '-']).unwrap_or(e);
            !e.is_empty() && e.bytes().all(|b| b.is_ascii_digit())
        }
    }
}

/// Either a production rule or a terminal token kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Rule(Rule),
    Token(TokenKind),
}

impl NodeKind {
    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Rule(r) => r.name(),
            NodeKind::Token(t) => t.name(),
        }
    }

    pub fn rule(self) -> Option<Rule> {
        match self {
            NodeKind::Rule(r) => Some(r),
            NodeKind::Token(_) => None,
        }
    }

    pub fn token(self) -> Option<TokenKind> {
        match self {
            NodeKind::Token(t) => Some(t),
            NodeKind::Rule(_) => None,
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Owned, pointer-free form of a subtree. Used to build and splice trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwnedNode {
    pub kind: NodeKind,
    pub text: String,
    pub span: Span,
    pub children: Vec<OwnedNode>,
}

impl OwnedNode {
    pub fn rule(rule: Rule, children: Vec<OwnedNode>) -> Self {
        OwnedNode { kind: NodeKind::Rule(rule), text: String::new(), span: Span::default(), children }
    }

    pub fn token(kind: TokenKind, text: impl Into<String>) -> Self {
        OwnedNode { kind: NodeKind::Token(kind), text: text.into(), span: Span::default(), children: Vec::new() }
    }

    pub(crate) fn with_span(mut self, span: Span) -> Self {
        self.span = span;
        self
    }
}

#[derive(Debug, Clone)]
struct NodeData {
    kind: NodeKind,
    text: String,
    span: Span,
    parent: Option<NodeId>,
    index_in_parent: usize,
    children: Vec<NodeId>,
}

/// Immutable parse tree stored in a preorder arena.
///
/// Trees produced by [`crate::syntax::parse`] are rooted at a `module-body`
/// node. Fragments (mutations, instantiated subtrees) use the same type with
/// an arbitrary root.
#[derive(Debug, Clone)]
pub struct SyntaxTree {
    nodes: Vec<NodeData>,
    source: String,
}

impl SyntaxTree {
    /// Builds an arena from an owned tree, keeping the spans it carries.
    pub fn from_owned(root: OwnedNode, source: String) -> Self {
        let mut nodes = Vec::new();
        push_owned(&mut nodes, root, None, 0);
        SyntaxTree { nodes, source }
    }

    /// Builds an arena whose source is the canonical print of `root` and
    /// whose spans point into that print.
    pub fn canonical(root: OwnedNode) -> Self {
        let mut tree = SyntaxTree::from_owned(root, String::new());
        let (text, spans) = crate::syntax::printer::print_with_spans(&tree);
        for (node, span) in tree.nodes.iter_mut().zip(spans) {
            node.span = span;
        }
        tree.source = text;
        tree
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> NodeRef<'_> {
        debug_assert!(id.index() < self.nodes.len());
        NodeRef { tree: self, id }
    }

    pub fn root_node(&self) -> NodeRef<'_> {
        self.node(self.root())
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id.index()].kind
    }

    pub fn text(&self, id: NodeId) -> &str {
        &self.nodes[id.index()].text
    }

    pub fn span(&self, id: NodeId) -> Span {
        self.nodes[id.index()].span
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.index()].children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].parent
    }

    pub fn index_in_parent(&self, id: NodeId) -> usize {
        self.nodes[id.index()].index_in_parent
    }

    pub fn left_sibling(&self, id: NodeId) -> Option<NodeId> {
        let parent = self.parent(id)?;
        let idx = self.index_in_parent(id);
        idx.checked_sub(1).map(|i| self.children(parent)[i])
    }

    pub fn right_sibling(&self, id: NodeId) -> Option<NodeId> {
        let parent = self.parent(id)?;
        self.children(parent).get(self.index_in_parent(id) + 1).copied()
    }

    pub fn is_terminal(&self, id: NodeId) -> bool {
        matches!(self.kind(id), NodeKind::Token(_))
    }

    /// Breadth-first traversal from the root.
    pub fn walk(&self) -> Walk<'_> {
        self.walk_from(self.root())
    }

    pub fn walk_from(&self, start: NodeId) -> Walk<'_> {
        let mut queue = VecDeque::new();
        if !self.nodes.is_empty() {
            queue.push_back(start);
        }
        Walk { tree: self, queue }
    }

    /// Every node id in preorder (arena order).
    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// Terminals of the subtree rooted at `id`, in source order.
    pub fn terminals(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            if self.is_terminal(n) {
                out.push(n);
            }
            stack.extend(self.children(n).iter().rev());
        }
        out
    }

    /// Child-index path from the root to `id`.
    pub fn path_to(&self, id: NodeId) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = id;
        while let Some(p) = self.parent(cur) {
            path.push(self.index_in_parent(cur));
            cur = p;
        }
        path.reverse();
        path
    }

    pub fn node_at_path(&self, path: &[usize]) -> Option<NodeId> {
        let mut cur = self.root();
        for &i in path {
            cur = *self.children(cur).get(i)?;
        }
        Some(cur)
    }

    /// True when `ancestor` is `id` or lies on its parent chain.
    pub fn is_ancestor_or_self(&self, ancestor: NodeId, id: NodeId) -> bool {
        let mut cur = Some(id);
        while let Some(n) = cur {
            if n == ancestor {
                return true;
            }
            cur = self.parent(n);
        }
        false
    }

    pub fn to_owned_node(&self, id: NodeId) -> OwnedNode {
        let d = &self.nodes[id.index()];
        OwnedNode {
            kind: d.kind,
            text: d.text.clone(),
            span: d.span,
            children: d.children.iter().map(|&c| self.to_owned_node(c)).collect(),
        }
    }

    /// Copies the whole tree while letting `edit` substitute any subtree.
    /// Returning `Some` from `edit` replaces the node (its children are not
    /// visited).
    pub fn rebuild(&self, edit: &mut dyn FnMut(NodeId) -> Option<OwnedNode>) -> OwnedNode {
        self.rebuild_from(self.root(), edit)
    }

    fn rebuild_from(&self, id: NodeId, edit: &mut dyn FnMut(NodeId) -> Option<OwnedNode>) -> OwnedNode {
        if let Some(replacement) = edit(id) {
            return replacement;
        }
        let d = &self.nodes[id.index()];
        OwnedNode {
            kind: d.kind,
            text: d.text.clone(),
            span: d.span,
            children: d.children.iter().map(|&c| self.rebuild_from(c, edit)).collect(),
        }
    }

    /// Structural identity: same kinds, lexemes and shape. Spans and source
    /// text are ignored.
    pub fn structurally_eq(&self, other: &SyntaxTree) -> bool {
        self.nodes.len() == other.nodes.len()
            && self.nodes.iter().zip(&other.nodes).all(|(a, b)| {
                a.kind == b.kind && a.text == b.text && a.children == b.children
            })
    }

    /// Structural identity of two subtrees, possibly in different trees.
    pub fn subtree_eq(&self, id: NodeId, other: &SyntaxTree, other_id: NodeId) -> bool {
        let a = &self.nodes[id.index()];
        let b = &other.nodes[other_id.index()];
        a.kind == b.kind
            && a.text == b.text
            && a.children.len() == b.children.len()
            && a.children.iter().zip(&b.children).all(|(&x, &y)| self.subtree_eq(x, other, y))
    }

    /// Operation nodes in preorder.
    pub fn operations(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids().filter(move |&id| self.kind(id) == NodeKind::Rule(Rule::Operation))
    }

    /// Child of `id` with the given rule, if present.
    pub fn child_with_rule(&self, id: NodeId, rule: Rule) -> Option<NodeId> {
        self.children(id).iter().copied().find(|&c| self.kind(c) == NodeKind::Rule(rule))
    }

    /// Unquoted op name of an operation node.
    pub fn op_name(&self, op: NodeId) -> Option<&str> {
        let name = self.child_with_rule(op, Rule::OpName)?;
        let lit = *self.children(name).first()?;
        let text = self.text(lit);
        Some(text.strip_prefix('"').and_then(|t| t.strip_suffix('"')).unwrap_or(text))
    }
}

fn push_owned(nodes: &mut Vec<NodeData>, node: OwnedNode, parent: Option<NodeId>, index_in_parent: usize) -> NodeId {
    let id = NodeId(nodes.len() as u32);
    nodes.push(NodeData {
        kind: node.kind,
        text: node.text,
        span: node.span,
        parent,
        index_in_parent,
        children: Vec::with_capacity(node.children.len()),
    });
    for (i, child) in node.children.into_iter().enumerate() {
        let c = push_owned(nodes, child, Some(id), i);
        nodes[id.index()].children.push(c);
    }
    id
}

/// Breadth-first node iterator.
pub struct Walk<'t> {
    tree: &'t SyntaxTree,
    queue: VecDeque<NodeId>,
}

impl Iterator for Walk<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let id = self.queue.pop_front()?;
        self.queue.extend(self.tree.children(id));
        Some(id)
    }
}

/// Borrowed handle on one node.
#[derive(Clone, Copy)]
pub struct NodeRef<'t> {
    tree: &'t SyntaxTree,
    id: NodeId,
}

impl<'t> NodeRef<'t> {
    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn kind(&self) -> NodeKind {
        self.tree.kind(self.id)
    }

    /// Production-rule label or token kind name.
    pub fn rule_name(&self) -> &'static str {
        self.kind().name()
    }

    pub fn text(&self) -> &'t str {
        self.tree.text(self.id)
    }

    pub fn span(&self) -> Span {
        self.tree.span(self.id)
    }

    pub fn parent(&self) -> Option<NodeRef<'t>> {
        self.tree.parent(self.id).map(|id| self.tree.node(id))
    }

    pub fn left_sibling(&self) -> Option<NodeRef<'t>> {
        self.tree.left_sibling(self.id).map(|id| self.tree.node(id))
    }

    pub fn right_sibling(&self) -> Option<NodeRef<'t>> {
        self.tree.right_sibling(self.id).map(|id| self.tree.node(id))
    }

    pub fn children(&self) -> impl Iterator<Item = NodeRef<'t>> + 't {
        let tree = self.tree;
        tree.children(self.id).iter().map(move |&c| tree.node(c))
    }
}

impl fmt::Debug for NodeRef<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tree.is_terminal(self.id) {
            write!(f, "{}({:?})", self.rule_name(), self.text())
        } else {
            write!(f, "{}#{}", self.rule_name(), self.id.0)
        }
    }
}
