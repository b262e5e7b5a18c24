//! Brute-force oracles shared by the integration tests. They only enumerate;
//! nothing here calls into the solver.

#![allow(dead_code)]

use rainstab::constructions::{lift_rainbow, PartiteHypergraph, RainbowInstance};
use rainstab::sampling::{random_family, CaseRng};
use rainstab::sets::KSubsets;
use rainstab::{binom, EdgeSet, SetFamily};
use rand::Rng;

/// Largest rainbow matching, by trying "skip or any disjoint edge" for every
/// family in turn.
pub fn rainbow_max(inst: &RainbowInstance) -> usize {
    fn go(families: &[SetFamily], used: u64) -> usize {
        let Some((first, rest)) = families.split_first() else {
            return 0;
        };
        let mut best = go(rest, used);
        for e in first.iter() {
            if e.mask() & used == 0 {
                best = best.max(1 + go(rest, used | e.mask()));
            }
        }
        best
    }
    go(inst.families(), 0)
}

/// Matching number by include/exclude over the edge list.
pub fn matching_number(f: &SetFamily) -> usize {
    fn go(edges: &[EdgeSet], used: u64) -> usize {
        let Some((first, rest)) = edges.split_first() else {
            return 0;
        };
        let skip = go(rest, used);
        if first.mask() & used == 0 {
            skip.max(1 + go(rest, used | first.mask()))
        } else {
            skip
        }
    }
    go(f.edges(), 0)
}

/// Whether some `t`-subset of `[n]` meets every edge of every family.
pub fn cover_exists(inst: &RainbowInstance, t: u32) -> bool {
    KSubsets::new(inst.n(), t).any(|w| {
        inst.families()
            .iter()
            .all(|f| f.iter().all(|e| e.mask() & w.mask() != 0))
    })
}

/// Every `k`-uniform family on `[n]`, as subsets of the complete family.
pub fn all_families(n: u32, k: u32) -> impl Iterator<Item = SetFamily> {
    let all = SetFamily::complete(n, k).unwrap();
    let count = all.len() as u32;
    (0u64..1 << count).map(move |idx| {
        let edges = EdgeSet::from_mask(idx)
            .vertices()
            .map(|i| all.edges()[i as usize - 1]);
        SetFamily::new(n, k, edges).unwrap()
    })
}

/// A random (1,k)-partite hypergraph with `q` colors, each a random
/// `k`-uniform family of random size.
pub fn random_partite(rng: &mut CaseRng, n: u32, k: u32, q: usize) -> PartiteHypergraph {
    let universe = binom(n as i64, k as i64);
    let families = (0..q)
        .map(|_| {
            let m = rng.gen_range(0..=universe);
            random_family(rng, n, k, m).unwrap()
        })
        .collect();
    lift_rainbow(&RainbowInstance::new(n, families).unwrap())
}

/// A uniformly random permutation of `0..n`.
pub fn random_permutation(rng: &mut CaseRng, n: usize) -> Vec<u32> {
    let mut p: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.gen_range(0..=i));
    }
    p
}
