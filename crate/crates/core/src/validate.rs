//! Witness validation, kept independent of the search code: every check here
//! re-derives membership, disjointness and coverage from scratch.

use thiserror::Error;

use crate::constructions::{PartiteHypergraph, RainbowInstance};
use crate::sets::{EdgeSet, SetFamily};
use crate::solver::MatchingWitness;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Violation {
    #[error("edge {edge} is not in family {color}")]
    NotAMember { color: usize, edge: EdgeSet },
    #[error("edges {a} and {b} overlap")]
    Overlap { a: EdgeSet, b: EdgeSet },
    #[error("color {0} used twice")]
    RepeatedColor(usize),
    #[error("color {0} does not exist")]
    UnknownColor(usize),
    #[error("witness has {actual} edges, expected {expected}")]
    Size { expected: usize, actual: usize },
    #[error("cover {cover} misses edge {edge} of family {color}")]
    Uncovered {
        cover: EdgeSet,
        color: usize,
        edge: EdgeSet,
    },
    #[error("cover {cover} has {actual} vertices, expected {expected}")]
    CoverSize {
        cover: EdgeSet,
        expected: u32,
        actual: u32,
    },
    #[error("cover {0} leaves the ground set")]
    CoverRange(EdgeSet),
}

type Checked = Result<(), Violation>;

fn pairwise_disjoint(edges: &[EdgeSet]) -> Checked {
    for (i, a) in edges.iter().enumerate() {
        for b in &edges[i + 1..] {
            if a.mask() & b.mask() != 0 {
                return Err(Violation::Overlap { a: *a, b: *b });
            }
        }
    }
    Ok(())
}

fn member(family: &SetFamily, e: EdgeSet) -> bool {
    family.edges().contains(&e)
}

/// A plain matching of one family.
pub fn check_matching(family: &SetFamily, w: &MatchingWitness) -> Checked {
    let edges: Vec<EdgeSet> = w.edges.iter().map(|e| e.edge).collect();
    if let Some(&edge) = edges.iter().find(|&&e| !member(family, e)) {
        return Err(Violation::NotAMember { color: 0, edge });
    }
    pairwise_disjoint(&edges)
}

fn check_colored(families: &[SetFamily], w: &MatchingWitness) -> Checked {
    let mut seen = vec![false; families.len()];
    for ce in &w.edges {
        let Some(f) = families.get(ce.color) else {
            return Err(Violation::UnknownColor(ce.color));
        };
        if std::mem::replace(&mut seen[ce.color], true) {
            return Err(Violation::RepeatedColor(ce.color));
        }
        if !member(f, ce.edge) {
            return Err(Violation::NotAMember {
                color: ce.color,
                edge: ce.edge,
            });
        }
    }
    let edges: Vec<EdgeSet> = w.edges.iter().map(|e| e.edge).collect();
    pairwise_disjoint(&edges)
}

/// A rainbow matching of exactly `target` edges from distinct families.
pub fn check_rainbow(inst: &RainbowInstance, w: &MatchingWitness, target: usize) -> Checked {
    if w.len() != target {
        return Err(Violation::Size {
            expected: target,
            actual: w.len(),
        });
    }
    check_colored(inst.families(), w)
}

/// A matching of a (1,k)-partite hypergraph: distinct color vertices,
/// disjoint ground parts.
pub fn check_partite_matching(h: &PartiteHypergraph, w: &MatchingWitness) -> Checked {
    check_colored(h.colors(), w)
}

/// `cover` is a `t`-subset of `[n]` meeting every edge of every family.
pub fn check_cover(inst: &RainbowInstance, cover: EdgeSet, t: u32) -> Checked {
    if cover.vertices().any(|v| v > inst.n()) {
        return Err(Violation::CoverRange(cover));
    }
    if cover.len() != t {
        return Err(Violation::CoverSize {
            cover,
            expected: t,
            actual: cover.len(),
        });
    }
    for (color, f) in inst.families().iter().enumerate() {
        if let Some(&edge) = f.iter().find(|e| e.mask() & cover.mask() == 0) {
            return Err(Violation::Uncovered { cover, color, edge });
        }
    }
    Ok(())
}
