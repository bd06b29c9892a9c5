// SPDX-License-Identifier: Apache-2.0

//! Canonical printer: one operation per line, two spaces of indentation per
//! region level, single spaces around `=`, `:` and `->`.

use super::tree::{NodeId, NodeKind, Rule, Span, SyntaxTree};

const INDENT: usize = 2;

/// Prints the tree (or fragment) in canonical form.
pub fn print(tree: &SyntaxTree) -> String {
    print_with_spans(tree).0
}

/// Prints the tree and records the byte span of every node in the output.
pub fn print_with_spans(tree: &SyntaxTree) -> (String, Vec<Span>) {
    let mut p = Printer::new(tree, &|_| None);
    p.root();
    (p.out, p.spans)
}

/// Prints with some nodes rendered by `render` instead of their contents.
pub fn print_with(tree: &SyntaxTree, render: &dyn Fn(NodeId) -> Option<String>) -> String {
    let mut p = Printer::new(tree, render);
    p.root();
    p.out
}

struct Printer<'t> {
    tree: &'t SyntaxTree,
    render: &'t dyn Fn(NodeId) -> Option<String>,
    out: String,
    spans: Vec<Span>,
}

impl<'t> Printer<'t> {
    fn new(tree: &'t SyntaxTree, render: &'t dyn Fn(NodeId) -> Option<String>) -> Self {
        Printer { tree, render, out: String::new(), spans: vec![Span::default(); tree.len()] }
    }

    fn rule(&self, id: NodeId) -> Option<Rule> {
        self.tree.kind(id).rule()
    }

    fn root(&mut self) {
        if self.tree.is_empty() {
            return;
        }
        let root = self.tree.root();
        match self.rule(root) {
            Some(Rule::ModuleBody) => {
                let start = self.out.len();
                for &op in self.tree.children(root) {
                    self.statement(op, 0);
                }
                self.spans[root.index()] = Span::new(start, self.out.len());
            }
            Some(Rule::Operation) => self.statement(root, 0),
            Some(Rule::Block) => self.block(root, 0),
            _ => self.node(root, 0),
        }
    }

    /// An operation on its own line.
    fn statement(&mut self, op: NodeId, indent: usize) {
        self.pad(indent);
        self.node(op, indent);
        self.out.push('\n');
    }

    fn pad(&mut self, indent: usize) {
        self.out.extend(std::iter::repeat_n(' ', indent));
    }

    fn node(&mut self, id: NodeId, indent: usize) {
        let start = self.out.len();
        if let Some(text) = (self.render)(id) {
            self.out.push_str(&text);
        } else {
            self.contents(id, indent);
        }
        self.spans[id.index()] = Span::new(start, self.out.len());
    }

    fn join(&mut self, ids: &[NodeId], sep: &str, indent: usize) {
        for (i, &c) in ids.iter().enumerate() {
            if i > 0 {
                self.out.push_str(sep);
            }
            self.node(c, indent);
        }
    }

    fn contents(&mut self, id: NodeId, indent: usize) {
        let tree = self.tree;
        let children = tree.children(id);
        let rule = match tree.kind(id) {
            NodeKind::Token(_) => {
                self.out.push_str(tree.text(id));
                return;
            }
            NodeKind::Rule(r) => r,
        };
        match rule {
            Rule::ModuleBody => {
                for &op in children {
                    self.statement(op, indent);
                }
            }
            Rule::Operation => self.operation(id, indent),
            Rule::ResultList | Rule::TypeList => self.join(children, ", ", indent),
            Rule::OpName | Rule::ValueUse | Rule::Type => self.join(children, "", indent),
            Rule::OperandList => {
                self.out.push('(');
                self.join(children, ", ", indent);
                self.out.push(')');
            }
            Rule::SuccessorList => {
                self.out.push('[');
                self.join(children, ", ", indent);
                self.out.push(']');
            }
            Rule::RegionList => {
                self.out.push('(');
                self.join(children, ", ", indent);
                self.out.push(')');
            }
            Rule::Region => {
                self.out.push_str("{\n");
                for &block in children {
                    self.block(block, indent);
                }
                self.pad(indent);
                self.out.push('}');
            }
            Rule::Block => self.block_body(id, indent),
            Rule::BlockLabel => {
                if let Some((&caret, args)) = children.split_first() {
                    self.node(caret, indent);
                    if !args.is_empty() {
                        self.out.push('(');
                        self.join(args, ", ", indent);
                        self.out.push(')');
                    }
                }
                self.out.push(':');
            }
            Rule::BlockArg | Rule::AttrEntry => {
                let seps = if rule == Rule::BlockArg { [" : ", ""] } else { [" = ", " : "] };
                for (i, &c) in children.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(seps[(i - 1).min(1)]);
                    }
                    self.node(c, indent);
                }
            }
            Rule::AttrDict => {
                self.out.push('{');
                self.join(children, ", ", indent);
                self.out.push('}');
            }
            Rule::FunctionType => {
                let (inputs, results) = match children {
                    [i, r] => (*i, *r),
                    _ => return,
                };
                self.out.push('(');
                self.node(inputs, indent);
                self.out.push_str(") -> ");
                let single = tree.children(results).len() == 1;
                if !single {
                    self.out.push('(');
                }
                self.node(results, indent);
                if !single {
                    self.out.push(')');
                }
            }
        }
    }

    fn operation(&mut self, op: NodeId, indent: usize) {
        let tree = self.tree;
        for &c in tree.children(op) {
            match self.rule(c) {
                Some(Rule::ResultList) => {
                    self.node(c, indent);
                    if !tree.children(c).is_empty() {
                        self.out.push_str(" = ");
                    }
                }
                Some(Rule::RegionList) | Some(Rule::AttrDict) => {
                    self.out.push(' ');
                    self.node(c, indent);
                }
                Some(Rule::FunctionType) => {
                    self.out.push_str(" : ");
                    self.node(c, indent);
                }
                _ => self.node(c, indent),
            }
        }
    }

    /// A block inside a region whose owning operation sits at `indent`.
    fn block(&mut self, block: NodeId, indent: usize) {
        if let Some(text) = (self.render)(block) {
            let start = self.out.len();
            self.pad(indent + INDENT);
            self.out.push_str(&text);
            self.spans[block.index()] = Span::new(start, self.out.len());
            self.out.push('\n');
            return;
        }
        let start = self.out.len();
        self.block_body(block, indent);
        let end = self.out.len().saturating_sub(1).max(start);
        self.spans[block.index()] = Span::new(start, end);
    }

    fn block_body(&mut self, block: NodeId, indent: usize) {
        for &c in self.tree.children(block) {
            if self.rule(c) == Some(Rule::BlockLabel) {
                self.pad(indent);
                self.node(c, indent);
                self.out.push('\n');
            } else {
                self.statement(c, indent + INDENT);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, OwnedNode, TokenKind};

    #[test]
    fn empty_module_prints_nothing() {
        assert_eq!(print(&parse("").unwrap()), "");
    }

    #[test]
    fn canonical_layout() {
        let src = "%c1 =   \"hw.constant\"() {value=-2:i2} : ()->i2\n\"hw.output\"(%c1):(i2)->()";
        assert_eq!(
            print(&parse(src).unwrap()),
            "%c1 = \"hw.constant\"() {value = -2 : i2} : () -> i2\n\"hw.output\"(%c1) : (i2) -> ()\n"
        );
    }

    #[test]
    fn hand_built_region_matches_parse() {
        let ty = |t: &str| OwnedNode::rule(Rule::Type, vec![OwnedNode::token(TokenKind::TypeToken, t)]);
        let label = OwnedNode::rule(
            Rule::BlockLabel,
            vec![
                OwnedNode::token(TokenKind::CaretId, "^bb0"),
                OwnedNode::rule(Rule::BlockArg, vec![OwnedNode::token(TokenKind::ValueId, "%a"), ty("i1")]),
            ],
        );
        let block = OwnedNode::rule(Rule::Block, vec![label]);
        let region = OwnedNode::rule(Rule::Region, vec![block]);
        let op = OwnedNode::rule(
            Rule::Operation,
            vec![
                OwnedNode::rule(Rule::ResultList, vec![]),
                OwnedNode::rule(Rule::OpName, vec![OwnedNode::token(TokenKind::StringLit, "\"t.r\"")]),
                OwnedNode::rule(Rule::OperandList, vec![]),
                OwnedNode::rule(Rule::RegionList, vec![region]),
                OwnedNode::rule(
                    Rule::FunctionType,
                    vec![OwnedNode::rule(Rule::TypeList, vec![]), OwnedNode::rule(Rule::TypeList, vec![])],
                ),
            ],
        );
        let built = SyntaxTree::canonical(OwnedNode::rule(Rule::ModuleBody, vec![op]));
        let text = print(&built);
        assert_eq!(text, "\"t.r\"() ({\n^bb0(%a : i1):\n}) : () -> ()\n");
        let parsed = parse("\"t.r\"() ({ ^bb0(%a: i1): }) : () -> ()").unwrap();
        assert!(parsed.structurally_eq(&built));
    }

    #[test]
    fn spans_cover_printed_nodes() {
        let t = parse("%0 = \"a.b\"(%x) : (i1) -> i1").unwrap();
        let (text, spans) = print_with_spans(&t);
        for id in t.ids().filter(|&i| t.is_terminal(i)) {
            assert_eq!(&text[spans[id.index()].start..spans[id.index()].end], t.text(id));
        }
    }
}
