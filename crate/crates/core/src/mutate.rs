// SPDX-License-Identifier: Apache-2.0

//! One complete mutation: synthesize from a donor, locate a site in a
//! recipient, bind, instantiate and graft.

use rand::Rng;

use crate::instantiate::{graft, instantiate, GraftError};
use crate::matching::{bind_parameters, locate, MatchConfig, MutationSite, ParameterBinding};
use crate::synth::{synthesize, ParameterizedMutation, SynthError};
use crate::syntax::SyntaxTree;

/// Sites beyond this many matches are not considered.
pub const DEFAULT_MAX_SITES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MutateOptions {
    pub match_config: MatchConfig,
    /// When off, the donor's own tokens are grafted verbatim.
    pub parameterization: bool,
    pub max_sites: usize,
}

impl Default for MutateOptions {
    fn default() -> Self {
        MutateOptions { match_config: MatchConfig::default(), parameterization: true, max_sites: DEFAULT_MAX_SITES }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MutateFailure {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("no matching site in the recipient")]
    NoSite,
    #[error(transparent)]
    Graft(#[from] GraftError),
}

#[derive(Debug, Clone)]
pub struct Mutant {
    pub mutation: ParameterizedMutation,
    pub site: MutationSite,
    pub binding: ParameterBinding,
    /// The instantiated mutation fragment.
    pub concrete: SyntaxTree,
    /// The recipient with the fragment grafted in.
    pub tree: SyntaxTree,
}

/// Picks uniformly among the first `max_sites` matching sites.
pub fn mutate_once<R: Rng + ?Sized>(
    donor: &SyntaxTree,
    recipient: &SyntaxTree,
    options: &MutateOptions,
    rng: &mut R,
) -> Result<Mutant, MutateFailure> {
    let mutation = synthesize(donor, rng)?;
    let sites: Vec<MutationSite> =
        locate(&mutation, recipient, options.match_config).take(options.max_sites.max(1)).collect();
    if sites.is_empty() {
        return Err(MutateFailure::NoSite);
    }
    let site = sites[rng.random_range(0..sites.len())];
    let binding = if options.parameterization {
        bind_parameters(&mutation, recipient, site, options.match_config, rng)
    } else {
        ParameterBinding::identity(&mutation)
    };
    let concrete = instantiate(&mutation, &binding);
    let tree = graft(recipient, site, &concrete)?;
    Ok(Mutant { mutation, site, binding, concrete, tree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, print};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn same_seed_same_mutant() {
        let donor = parse(include_str!("../tests/fixtures/add_donor.mlir")).unwrap();
        let recipient = parse(include_str!("../tests/fixtures/sub_recipient.mlir")).unwrap();
        let opts = MutateOptions::default();
        for seed in 0..20 {
            let a = mutate_once(&donor, &recipient, &opts, &mut ChaCha8Rng::seed_from_u64(seed));
            let b = mutate_once(&donor, &recipient, &opts, &mut ChaCha8Rng::seed_from_u64(seed));
            match (a, b) {
                (Ok(a), Ok(b)) => assert_eq!(print(&a.tree), print(&b.tree)),
                (Err(a), Err(b)) => assert_eq!(a, b),
                _ => panic!("diverged"),
            }
        }
    }

    #[test]
    fn parameterization_off_keeps_donor_tokens() {
        let donor = parse(include_str!("../tests/fixtures/add_donor.mlir")).unwrap();
        let recipient = parse(include_str!("../tests/fixtures/sub_recipient.mlir")).unwrap();
        let opts = MutateOptions { parameterization: false, ..Default::default() };
        let mut hits = 0;
        for seed in 0..200 {
            if let Ok(m) = mutate_once(&donor, &recipient, &opts, &mut ChaCha8Rng::seed_from_u64(seed)) {
                assert!(m.binding.iter().all(|(_, v)| v.source.is_none()));
                if m.concrete.op_name(m.concrete.root()) == Some("comb.add") {
                    assert_eq!(print(&m.concrete), "%o1 = \"comb.add\"(%arg0, %c1) : (i2, i2) -> i2\n");
                    hits += 1;
                }
            }
        }
        assert!(hits > 0);
    }
}
