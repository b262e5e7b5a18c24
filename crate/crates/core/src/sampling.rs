//! Seeded sampling of families.
//!
//! Every sampled case `i` of a run with seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`, so case outcomes do
//! not depend on evaluation order or thread count. A family of `m` edges is
//! drawn as `m` distinct colex ranks (Floyd's algorithm) unranked into
//! `k`-sets.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{params, Result};
use crate::sets::{binom, colex_unrank, EdgeSet, SetFamily};

pub type CaseRng = ChaCha8Rng;

/// The generator for case `index` of a run seeded with `seed`.
pub fn case_rng(seed: u64, index: u64) -> CaseRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `m` distinct values from `0..universe`, sorted.
pub fn sample_ranks<R: Rng>(rng: &mut R, universe: u128, m: u128) -> Result<Vec<u128>> {
    if m > universe {
        return Err(params(format!(
            "cannot draw {m} distinct values below {universe}"
        )));
    }
    let mut picked = BTreeSet::new();
    for j in universe - m..universe {
        let t = rng.gen_range(0..=j);
        if !picked.insert(t) {
            picked.insert(j);
        }
    }
    Ok(picked.into_iter().collect())
}

/// A uniformly random `m`-edge subfamily of `([n] choose k)`.
pub fn random_family<R: Rng>(rng: &mut R, n: u32, k: u32, m: u128) -> Result<SetFamily> {
    let universe = binom(n as i64, k as i64);
    let edges = sample_ranks(rng, universe, m)?
        .into_iter()
        .map(|r| colex_unrank(r, k))
        .collect::<Result<Vec<EdgeSet>>>()?;
    SetFamily::new(n, k, edges)
}

/// A uniformly random `m`-edge subfamily of `family`.
pub fn random_subfamily<R: Rng>(rng: &mut R, family: &SetFamily, m: usize) -> Result<SetFamily> {
    let idx = sample_ranks(rng, family.len() as u128, m as u128)?;
    SetFamily::new(
        family.n(),
        family.k(),
        idx.into_iter().map(|i| family.edges()[i as usize]),
    )
}

/// `family` plus `extra` uniformly chosen edges from its complement.
pub fn augment<R: Rng>(rng: &mut R, family: &SetFamily, extra: usize) -> Result<SetFamily> {
    let outside = family.complement();
    let added = random_subfamily(rng, &outside, extra)?;
    family.union(&added)
}

/// A random family of uniformly random size in `0..=binom(n,k)`.
pub fn random_family_any_size<R: Rng>(rng: &mut R, n: u32, k: u32) -> Result<SetFamily> {
    let m = rng.gen_range(0..=binom(n as i64, k as i64));
    random_family(rng, n, k, m)
}
