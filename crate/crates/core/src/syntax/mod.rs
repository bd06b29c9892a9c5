// SPDX-License-Identifier: Apache-2.0

//! Generic-syntax MLIR: parse tree, parser and canonical printer.

mod parser;
pub mod printer;
mod tree;

pub use parser::{parse, parse_bytes, SyntaxError};
pub use printer::{print, print_with, print_with_spans};
pub use tree::{NodeId, NodeKind, NodeRef, OwnedNode, Rule, Span, SyntaxTree, TokenKind, Walk};

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SUB_RECIPIENT: &str = include_str!("../../tests/fixtures/sub_recipient.mlir");

    fn names(tree: &SyntaxTree, ids: &[NodeId]) -> Vec<&'static str> {
        ids.iter().map(|&i| tree.kind(i).name()).collect()
    }

    #[test]
    fn walk_single_operation_level_by_level() {
        let t = parse(r#"%0 = "a.b"(%x) : (i1) -> i1"#).unwrap();
        let order: Vec<_> = t.walk().collect();
        assert_eq!(
            names(&t, &order),
            [
                "module-body",
                "operation",
                "result-list",
                "op-name",
                "operand-list",
                "function-type",
                "value-id",
                "string-lit",
                "value-use",
                "type-list",
                "type-list",
                "value-id",
                "type",
                "type",
                "type-token",
                "type-token",
            ]
        );
        assert_eq!(order.len(), t.len());
    }

    #[test]
    fn walk_empty_module() {
        let t = parse("").unwrap();
        assert_eq!(t.walk().collect::<Vec<_>>(), vec![t.root()]);
    }

    #[test]
    fn walk_recipient_block_before_its_operations() {
        let t = parse(SUB_RECIPIENT).unwrap();
        let order: Vec<_> = t.walk().collect();
        let pos = |id: NodeId| order.iter().position(|&x| x == id).unwrap();
        let block = t.ids().find(|&i| t.kind(i) == NodeKind::Rule(Rule::Block)).unwrap();
        let inner_ops: Vec<_> =
            t.children(block).iter().copied().filter(|&c| t.kind(c) == NodeKind::Rule(Rule::Operation)).collect();
        assert_eq!(inner_ops.len(), 3);
        assert!(inner_ops.iter().all(|&op| pos(block) < pos(op)));
    }

    #[test]
    fn navigation_in_recipient() {
        let t = parse(SUB_RECIPIENT).unwrap();
        let sub = t.operations().find(|&op| t.op_name(op) == Some("comb.sub")).unwrap();
        let n = t.node(sub);
        assert_eq!(n.parent().unwrap().rule_name(), "block");
        assert_eq!(t.op_name(n.left_sibling().unwrap().id()), Some("hw.bitcast"));
        assert_eq!(t.op_name(n.right_sibling().unwrap().id()), Some("hw.output"));
        let output = n.right_sibling().unwrap();
        assert!(output.right_sibling().is_none());
        assert!(t.root_node().parent().is_none());
    }

    #[test]
    fn donor_round_trips() {
        let src = include_str!("../../tests/fixtures/add_donor.mlir");
        let t = parse(src).unwrap();
        let text = print(&t);
        assert_eq!(text.lines().count(), 6);
        assert!(parse(&text).unwrap().structurally_eq(&t));
    }

    fn check_invariants(t: &SyntaxTree) {
        for id in t.ids() {
            let n = t.node(id);
            if t.is_terminal(id) {
                assert!(t.children(id).is_empty());
                assert!(!n.text().is_empty());
            } else {
                assert!(n.text().is_empty());
            }
            let kids = t.children(id);
            for w in kids.windows(2) {
                assert!(t.span(w[0]).end <= t.span(w[1]).start, "{:?} {:?}", t.node(w[0]), t.node(w[1]));
            }
            for &c in kids {
                assert_eq!(t.parent(c), Some(id));
                assert!(t.span(id).contains(&t.span(c)), "{:?} !⊇ {:?}", n, t.node(c));
            }
            if let Some(r) = t.right_sibling(id) {
                assert_eq!(t.left_sibling(r), Some(id));
            }
        }
    }

    #[test]
    fn node_invariants_on_fixtures() {
        for src in [SUB_RECIPIENT, include_str!("../../tests/fixtures/nested_dialects.mlir")] {
            let t = parse(src).unwrap();
            check_invariants(&t);
            check_invariants(&SyntaxTree::canonical(t.to_owned_node(t.root())));
        }
    }

    proptest! {
        #[test]
        fn parser_is_total(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
            let _ = parse_bytes(&bytes);
        }

        #[test]
        fn parser_is_total_on_mlir_like_text(
            pieces in proptest::collection::vec(
                prop::sample::select(vec![
                    "%0", "%a", " = ", "\"a.b\"", "(", ")", "{", "}", "[", "]", "^bb0", ":", ",",
                    "->", "i32", "<", ">", "!x.y", "{v = 1 : i2}", "\n", "// c\n", "\"", "%0#1", "%0:2",
                ]),
                0..64,
            )
        ) {
            let text: String = pieces.concat();
            if let Ok(t) = parse(&text) {
                let printed = print(&t);
                let again = parse(&printed).expect("canonical output re-parses");
                prop_assert!(again.structurally_eq(&t));
            }
        }
    }
}
