// SPDX-License-Identifier: Apache-2.0

//! Turning a bound mutation into concrete syntax and splicing it into the
//! recipient.

use crate::matching::{insertion_slots, MutationSite, ParameterBinding};
use crate::synth::ParameterizedMutation;
use crate::syntax::{NodeId, NodeKind, OwnedNode, Rule, SyntaxTree};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraftError {
    #[error("a {found} cannot be placed at {site} (expects {expected})")]
    KindMismatch { site: MutationSite, expected: NodeKind, found: NodeKind },
    #[error("insertion index {index} is outside the slots of node #{}", parent.index())]
    BadSlot { parent: NodeId, index: usize },
    #[error("grafting at {site} would leave a block without a label in a non-entry position")]
    UnlabeledBlock { site: MutationSite },
}

/// Copies the mutation with every parameter occurrence replaced by its bound
/// value. The result is a fragment rooted at the mutation's root kind.
pub fn instantiate(pm: &ParameterizedMutation, binding: &ParameterBinding) -> SyntaxTree {
    let mutation = pm.mutation();
    let root = mutation.rebuild(&mut |id| {
        let p = pm.mutation_param(id)?;
        Some(OwnedNode::token(binding.get(p).kind, binding.get(p).lexeme.clone()))
    });
    SyntaxTree::canonical(root)
}

/// Returns a new tree with `concrete` placed at `site`. The recipient is not
/// modified.
pub fn graft(recipient: &SyntaxTree, site: MutationSite, concrete: &SyntaxTree) -> Result<SyntaxTree, GraftError> {
    let found = concrete.kind(concrete.root());
    let labeled = block_is_labeled(concrete, concrete.root());
    let is_block = found == NodeKind::Rule(Rule::Block);
    if is_block && !labeled && concrete.children(concrete.root()).is_empty() {
        // Prints as an empty region; would not survive a round trip.
        return Err(GraftError::UnlabeledBlock { site });
    }
    let mut replacement = Some(concrete.to_owned_node(concrete.root()));
    let root = match site {
        MutationSite::Replace(target) => {
            let expected = recipient.kind(target);
            if expected != found {
                return Err(GraftError::KindMismatch { site, expected, found });
            }
            if is_block && !labeled && recipient.index_in_parent(target) > 0 {
                return Err(GraftError::UnlabeledBlock { site });
            }
            recipient.rebuild(&mut |id| if id == target { replacement.take() } else { None })
        }
        MutationSite::Insert { parent, index } => {
            let expected = match recipient.kind(parent).rule().and_then(Rule::quantified_element) {
                Some(rule) => NodeKind::Rule(rule),
                None => return Err(GraftError::BadSlot { parent, index }),
            };
            if expected != found {
                return Err(GraftError::KindMismatch { site, expected, found });
            }
            if !insertion_slots(recipient, parent).contains(&index) {
                return Err(GraftError::BadSlot { parent, index });
            }
            if is_block {
                let siblings = recipient.children(parent);
                let pushes_unlabeled_down =
                    index == 0 && siblings.first().is_some_and(|&b| !block_is_labeled(recipient, b));
                if (!labeled && index > 0) || pushes_unlabeled_down {
                    return Err(GraftError::UnlabeledBlock { site });
                }
            }
            recipient.rebuild(&mut |id| {
                if id != parent {
                    return None;
                }
                let mut node = recipient.to_owned_node(parent);
                node.children.insert(index, replacement.take().expect("single insertion"));
                Some(node)
            })
        }
    };
    Ok(SyntaxTree::canonical(root))
}

/// Path of the grafted subtree's root in the tree returned by [`graft`].
pub fn grafted_path(recipient: &SyntaxTree, site: MutationSite) -> Vec<usize> {
    match site {
        MutationSite::Replace(n) => recipient.path_to(n),
        MutationSite::Insert { parent, index } => {
            let mut path = recipient.path_to(parent);
            path.push(index);
            path
        }
    }
}

fn block_is_labeled(tree: &SyntaxTree, block: NodeId) -> bool {
    tree.children(block).first().is_some_and(|&c| tree.kind(c) == NodeKind::Rule(Rule::BlockLabel))
}
