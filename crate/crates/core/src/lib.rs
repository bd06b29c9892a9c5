// SPDX-License-Identifier: Apache-2.0

//! Mutation synthesis and transplantation for generic-syntax MLIR.
//!
//! A donor program is split into a mutation subtree and the context around
//! it. Tokens shared by both halves become parameters. The mutation is then
//! grafted into a recipient wherever the recipient's surroundings match the
//! context, with parameters rebound to values found at that spot.

pub mod constraints;
pub mod coverage;
pub mod driver;
pub mod instantiate;
pub mod matching;
pub mod mutate;
pub mod reference;
pub mod synth;
pub mod syntax;
