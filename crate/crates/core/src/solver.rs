//! Exact matching, rainbow matching and bounded common-cover search.
//!
//! Every search is a deterministic depth-first branch-and-bound over vertex
//! bitmasks. Colors are visited in ascending order of family size (ties by
//! index) and edges in mask order, so the first witness found is reproducible
//! bit for bit. Searches that can blow up run under a node budget; running out
//! is reported as [`BudgetExceeded`], never as "no witness".

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::constructions::{Params, PartiteHypergraph, RainbowInstance};
use crate::error::{params, Result};
use crate::sets::{EdgeSet, SetFamily};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Cap on branch nodes for one solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: u64,
}

impl Budget {
    pub const fn new(max_nodes: u64) -> Self {
        Budget { max_nodes }
    }

    pub const fn unlimited() -> Self {
        Budget {
            max_nodes: u64::MAX,
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_BUDGET)
    }
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("node budget exceeded after {nodes} nodes")]
pub struct BudgetExceeded {
    pub nodes: u64,
}

/// A search result together with the number of branch nodes it took.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solved<T> {
    pub value: T,
    pub nodes: u64,
}

pub type SolveResult<T> = std::result::Result<Solved<T>, BudgetExceeded>;

/// An edge chosen from color `color` (0-based; 1-based in JSON).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColoredEdge {
    pub color: usize,
    pub edge: EdgeSet,
}

impl Serialize for ColoredEdge {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ColoredEdge", 2)?;
        st.serialize_field("color", &(self.color + 1))?;
        st.serialize_field("edge", &self.edge.vertices().collect::<Vec<_>>())?;
        st.end()
    }
}

/// Pairwise disjoint edges, sorted by color for rainbow matchings and by
/// mask for plain ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchingWitness {
    pub edges: Vec<ColoredEdge>,
}

impl MatchingWitness {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Union of the chosen edges.
    pub fn vertex_set(&self) -> EdgeSet {
        self.edges
            .iter()
            .fold(EdgeSet::EMPTY, |acc, e| acc.union(e.edge))
    }

    fn plain(mut edges: Vec<EdgeSet>) -> Self {
        edges.sort_unstable();
        MatchingWitness {
            edges: edges
                .into_iter()
                .map(|edge| ColoredEdge { color: 0, edge })
                .collect(),
        }
    }

    fn colored(mut edges: Vec<ColoredEdge>) -> Self {
        edges.sort_unstable();
        MatchingWitness { edges }
    }
}

/// A vertex set meeting every edge of every covered family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverWitness {
    pub cover: EdgeSet,
}

/// Either side of a dichotomy, in the interchange form
/// `{"matching": [{"color": i, "edge": [...]}, ...]}` / `{"cover": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Matching(MatchingWitness),
    Cover(CoverWitness),
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Witness", 1)?;
        match self {
            Witness::Matching(m) => st.serialize_field("matching", &m.edges)?,
            Witness::Cover(c) => {
                st.serialize_field("cover", &c.cover.vertices().collect::<Vec<_>>())?
            }
        }
        st.end()
    }
}

struct Counter {
    nodes: u64,
    limit: u64,
}

impl Counter {
    fn new(budget: Budget) -> Self {
        Counter {
            nodes: 0,
            limit: budget.max_nodes,
        }
    }

    fn tick(&mut self) -> std::result::Result<(), BudgetExceeded> {
        self.nodes += 1;
        if self.nodes > self.limit {
            Err(BudgetExceeded { nodes: self.nodes })
        } else {
            Ok(())
        }
    }
}

/// Maximum matching `ν(F)` of a single uniform family, with a witness.
pub fn max_matching(family: &SetFamily, budget: Budget) -> SolveResult<MatchingWitness> {
    let mut counter = Counter::new(budget);
    if family.k() == 0 {
        // the empty edge can be used once
        let edges = family.edges().to_vec();
        return Ok(Solved {
            value: MatchingWitness::plain(edges),
            nodes: 1,
        });
    }
    let k = family.k();
    let edges = family.edges().to_vec();
    let ceiling = (family.support().len() / k) as usize;
    let greedy = greedy_matching(&edges);
    let mut search = PlainSearch {
        k,
        ceiling,
        best: greedy,
        current: Vec::new(),
        counter: &mut counter,
    };
    if search.best.len() < ceiling {
        search.run(edges)?;
    }
    let best = std::mem::take(&mut search.best);
    Ok(Solved {
        value: MatchingWitness::plain(best),
        nodes: counter.nodes,
    })
}

fn greedy_matching(edges: &[EdgeSet]) -> Vec<EdgeSet> {
    let mut used = EdgeSet::EMPTY;
    let mut out = Vec::new();
    for &e in edges {
        if e.is_disjoint(used) {
            used = used.union(e);
            out.push(e);
        }
    }
    out
}

struct PlainSearch<'c> {
    k: u32,
    ceiling: usize,
    best: Vec<EdgeSet>,
    current: Vec<EdgeSet>,
    counter: &'c mut Counter,
}

impl PlainSearch<'_> {
    /// Branches on the lowest vertex still covered by an available edge:
    /// either one of its edges joins the matching or the vertex stays free.
    fn run(&mut self, avail: Vec<EdgeSet>) -> std::result::Result<(), BudgetExceeded> {
        self.counter.tick()?;
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
        }
        if avail.is_empty() || self.best.len() >= self.ceiling {
            return Ok(());
        }
        let support = avail.iter().fold(EdgeSet::EMPTY, |a, e| a.union(*e));
        let room = (support.len() / self.k) as usize;
        if self.current.len() + room.min(avail.len()) <= self.best.len() {
            return Ok(());
        }
        let pivot = EdgeSet::from_mask(support.mask() & support.mask().wrapping_neg());
        for &e in avail.iter().filter(|e| e.intersects(pivot)) {
            let rest: Vec<EdgeSet> = avail.iter().copied().filter(|f| f.is_disjoint(e)).collect();
            self.current.push(e);
            self.run(rest)?;
            self.current.pop();
            if self.best.len() >= self.ceiling {
                return Ok(());
            }
        }
        let rest: Vec<EdgeSet> = avail.into_iter().filter(|f| f.is_disjoint(pivot)).collect();
        self.run(rest)
    }
}

/// One color's edge list in search order.
struct Slot<'a> {
    color: usize,
    k: u32,
    edges: &'a [EdgeSet],
}

/// Decision search: pick `target` colors and one edge from each, pairwise
/// disjoint. Colors are tried in slot order; a color may be skipped only
/// while enough colors remain.
struct ColoredSearch<'a, 'c> {
    slots: Vec<Slot<'a>>,
    /// `suffix_min_k[i]` = smallest uniformity among slots `i..`.
    suffix_min_k: Vec<u32>,
    n: u32,
    chosen: Vec<ColoredEdge>,
    counter: &'c mut Counter,
}

impl<'a, 'c> ColoredSearch<'a, 'c> {
    fn new(n: u32, families: &'a [SetFamily], counter: &'c mut Counter) -> Self {
        let mut order: Vec<usize> = (0..families.len()).collect();
        order.sort_by_key(|&i| (families[i].len(), i));
        let slots: Vec<Slot<'a>> = order
            .into_iter()
            .map(|i| Slot {
                color: i,
                k: families[i].k(),
                edges: families[i].edges(),
            })
            .collect();
        let mut suffix_min_k = vec![u32::MAX; slots.len() + 1];
        for i in (0..slots.len()).rev() {
            suffix_min_k[i] = suffix_min_k[i + 1].min(slots[i].k);
        }
        ColoredSearch {
            slots,
            suffix_min_k,
            n,
            chosen: Vec::new(),
            counter,
        }
    }

    fn run(
        &mut self,
        pos: usize,
        used: EdgeSet,
        needed: usize,
    ) -> std::result::Result<bool, BudgetExceeded> {
        self.counter.tick()?;
        if needed == 0 {
            return Ok(true);
        }
        let remaining = self.slots.len() - pos;
        if remaining < needed {
            return Ok(false);
        }
        let free = self.n - used.len();
        if (needed as u64) * (self.suffix_min_k[pos] as u64) > free as u64 {
            return Ok(false);
        }
        if remaining == needed {
            // every remaining color is forced; each needs a free edge
            let stuck = self.slots[pos..]
                .iter()
                .any(|s| !s.edges.iter().any(|e| e.is_disjoint(used)));
            if stuck {
                return Ok(false);
            }
        }
        let slot = &self.slots[pos];
        let (color, edges) = (slot.color, slot.edges);
        for &e in edges {
            if !e.is_disjoint(used) {
                continue;
            }
            self.chosen.push(ColoredEdge { color, edge: e });
            if self.run(pos + 1, used.union(e), needed - 1)? {
                return Ok(true);
            }
            self.chosen.pop();
        }
        if remaining > needed {
            return self.run(pos + 1, used, needed);
        }
        Ok(false)
    }
}

fn colored_decision(
    n: u32,
    families: &[SetFamily],
    target: usize,
    counter: &mut Counter,
) -> std::result::Result<Option<MatchingWitness>, BudgetExceeded> {
    if target == families.len() && families.iter().any(SetFamily::is_empty) {
        counter.tick()?;
        return Ok(None);
    }
    let mut search = ColoredSearch::new(n, families, counter);
    let found = search.run(0, EdgeSet::EMPTY, target)?;
    Ok(found.then(|| MatchingWitness::colored(std::mem::take(&mut search.chosen))))
}

/// A rainbow matching of size `target`: pairwise disjoint edges from
/// `target` distinct families (all of them when `target = q`).
pub fn rainbow_matching(
    inst: &RainbowInstance,
    target: usize,
    budget: Budget,
) -> Result<SolveResult<Option<MatchingWitness>>> {
    if target > inst.q() {
        return Err(params(format!(
            "target {target} exceeds the {} families",
            inst.q()
        )));
    }
    let mut counter = Counter::new(budget);
    let res = colored_decision(inst.n(), inst.families(), target, &mut counter);
    Ok(res.map(|value| Solved {
        value,
        nodes: counter.nodes,
    }))
}

/// Maximum matching of a (1,k)-partite hypergraph: each color vertex is used
/// at most once.
pub fn max_matching_partite(h: &PartiteHypergraph, budget: Budget) -> SolveResult<MatchingWitness> {
    let mut counter = Counter::new(budget);
    let usable = h.colors().iter().filter(|f| !f.is_empty()).count();
    let min_k = h
        .colors()
        .iter()
        .filter(|f| !f.is_empty())
        .map(SetFamily::k)
        .min();
    let ceiling = match min_k {
        None => 0,
        Some(0) => usable,
        Some(k) => usable.min((h.n() / k) as usize),
    };
    // the color-order greedy pass is the first leaf of every decision search
    let nonempty: Vec<SetFamily> = h
        .colors()
        .iter()
        .filter(|f| !f.is_empty())
        .cloned()
        .collect();
    let index: Vec<usize> = (0..h.q()).filter(|&i| !h.color(i).is_empty()).collect();
    for target in (1..=ceiling).rev() {
        if let Some(mut w) = colored_decision(h.n(), &nonempty, target, &mut counter)? {
            for e in &mut w.edges {
                e.color = index[e.color];
            }
            w.edges.sort_unstable();
            return Ok(Solved {
                value: w,
                nodes: counter.nodes,
            });
        }
    }
    Ok(Solved {
        value: MatchingWitness::default(),
        nodes: counter.nodes.max(1),
    })
}

/// A `t`-set meeting every edge of every family, if one exists.
///
/// Branches on the vertices of a smallest edge not yet met; depth is at most
/// `t`, so the tree has at most `max_k^t` leaves. Covers found with fewer than
/// `t` vertices are padded with the smallest unused vertices.
pub fn common_cover(inst: &RainbowInstance, t: u32) -> Result<Solved<Option<CoverWitness>>> {
    if t > inst.n() {
        return Err(params(format!("cover size {t} exceeds n = {}", inst.n())));
    }
    let mut nodes = 0u64;
    let found = cover_search(inst.families(), EdgeSet::EMPTY, t, &mut nodes);
    let value = found.map(|mut w| {
        let mut v = 1;
        while w.len() < t {
            if !w.contains(v) {
                w = w.union(EdgeSet::from_mask(1u64 << (v - 1)));
            }
            v += 1;
        }
        CoverWitness { cover: w }
    });
    Ok(Solved { value, nodes })
}

fn cover_search(families: &[SetFamily], w: EdgeSet, left: u32, nodes: &mut u64) -> Option<EdgeSet> {
    *nodes += 1;
    let mut pick: Option<EdgeSet> = None;
    for f in families {
        if pick.is_some_and(|p| p.len() <= f.k()) {
            continue;
        }
        if let Some(&e) = f.iter().find(|e| e.is_disjoint(w)) {
            pick = Some(e);
        }
    }
    let Some(edge) = pick else {
        return Some(w);
    };
    if left == 0 {
        return None;
    }
    edge.vertices().find_map(|v| {
        let next = w.union(EdgeSet::from_mask(1u64 << (v - 1)));
        cover_search(families, next, left - 1, nodes)
    })
}

/// Outcome of a near-perfect matching test on `H^q(k,n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NearPerfect {
    pub holds: bool,
    /// `q + m = ⌊n/k⌋`.
    pub target: usize,
    pub witness: Option<MatchingWitness>,
}

/// Whether the padded lift `H^q(k,n)` has a matching of size `q + m`, i.e. one
/// leaving fewer than `k` ground vertices uncovered.
pub fn near_perfect_check(
    h: &PartiteHypergraph,
    budget: Budget,
) -> Result<SolveResult<NearPerfect>> {
    let k = h.ground_uniformity();
    if h.colors().iter().any(|f| f.k() != k) {
        return Err(params("near-perfect check needs a uniform lift"));
    }
    let p = Params::near_perfect(h.n(), k, 0)?;
    if p.m as usize != h.q() {
        return Err(params(format!(
            "lift has {} colors but ⌊n/k⌋ = {}",
            h.q(),
            p.m
        )));
    }
    let target = h.q();
    let mut counter = Counter::new(budget);
    let res = colored_decision(h.n(), h.colors(), target, &mut counter);
    Ok(res.map(|witness| Solved {
        value: NearPerfect {
            holds: witness.is_some(),
            target,
            witness,
        },
        nodes: counter.nodes,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{
        hm_family, lift_near_perfect, lift_rainbow, star, star_near_perfect,
    };
    use crate::validate;

    fn fam(n: u32, k: u32, lists: &[&[u32]]) -> SetFamily {
        SetFamily::from_vertex_lists(n, k, lists.iter().map(|l| l.iter().copied())).unwrap()
    }

    fn nu(f: &SetFamily) -> usize {
        let w = max_matching(f, Budget::default()).unwrap().value;
        validate::check_matching(f, &w).unwrap();
        w.len()
    }

    #[test]
    fn max_matching_examples() {
        assert_eq!(nu(&SetFamily::complete(4, 2).unwrap()), 2);
        assert_eq!(nu(&hm_family(9, 3, 2).unwrap()), 2);
        assert_eq!(nu(&star(8, 2, 1).unwrap()), 1);
        assert_eq!(nu(&SetFamily::empty(5, 2).unwrap()), 0);
        assert_eq!(nu(&SetFamily::complete(4, 0).unwrap()), 1);
    }

    #[test]
    fn budget_abort_is_distinct() {
        let f = SetFamily::complete(12, 3).unwrap();
        let inst = RainbowInstance::uniform_copies(&star(12, 3, 3).unwrap(), 4);
        assert!(rainbow_matching(&inst, 4, Budget::new(10))
            .unwrap()
            .is_err());
        assert!(max_matching(&hm_family(12, 3, 3).unwrap(), Budget::new(2)).is_err());
        // the greedy pass already meets the ceiling here, no branching needed
        assert_eq!(max_matching(&f, Budget::new(1)).unwrap().value.len(), 4);
    }

    #[test]
    fn rainbow_examples() {
        let single = RainbowInstance::new(5, vec![fam(5, 2, &[&[1, 2]])]).unwrap();
        let w = rainbow_matching(&single, 1, Budget::default())
            .unwrap()
            .unwrap()
            .value
            .unwrap();
        assert_eq!(
            w.edges,
            vec![ColoredEdge {
                color: 0,
                edge: EdgeSet::from_vertices(5, [1, 2]).unwrap()
            }]
        );

        let stars = RainbowInstance::uniform_copies(&star(6, 2, 2).unwrap(), 3);
        assert!(rainbow_matching(&stars, 3, Budget::default())
            .unwrap()
            .unwrap()
            .value
            .is_none());
        assert!(rainbow_matching(&stars, 2, Budget::default())
            .unwrap()
            .unwrap()
            .value
            .is_some());

        let k4 = RainbowInstance::uniform_copies(&SetFamily::complete(4, 2).unwrap(), 2);
        let w = rainbow_matching(&k4, 2, Budget::default())
            .unwrap()
            .unwrap()
            .value
            .unwrap();
        validate::check_rainbow(&k4, &w, 2).unwrap();
        assert_eq!(w.vertex_set(), EdgeSet::prefix(4));

        assert!(rainbow_matching(&k4, 3, Budget::default()).is_err());
        let with_empty = RainbowInstance::new(
            4,
            vec![
                SetFamily::complete(4, 2).unwrap(),
                SetFamily::empty(4, 2).unwrap(),
            ],
        )
        .unwrap();
        assert!(rainbow_matching(&with_empty, 2, Budget::default())
            .unwrap()
            .unwrap()
            .value
            .is_none());
        let w = rainbow_matching(&with_empty, 1, Budget::default())
            .unwrap()
            .unwrap()
            .value
            .unwrap();
        assert_eq!(w.edges[0].color, 0);
    }

    #[test]
    fn rainbow_mixed_uniformity() {
        let inst = RainbowInstance::new(
            5,
            vec![
                fam(5, 3, &[&[1, 2, 3], &[3, 4, 5]]),
                fam(5, 2, &[&[1, 2], &[4, 5]]),
            ],
        )
        .unwrap();
        let w = rainbow_matching(&inst, 2, Budget::default())
            .unwrap()
            .unwrap()
            .value
            .unwrap();
        validate::check_rainbow(&inst, &w, 2).unwrap();
    }

    #[test]
    fn witnesses_are_reproducible() {
        let inst = RainbowInstance::uniform_copies(&SetFamily::complete(7, 2).unwrap(), 3);
        let a = rainbow_matching(&inst, 3, Budget::default())
            .unwrap()
            .unwrap();
        let b = rainbow_matching(&inst, 3, Budget::default())
            .unwrap()
            .unwrap();
        assert_eq!(a, b);
        // the color with fewest edges is branched first
        let inst = RainbowInstance::new(
            4,
            vec![SetFamily::complete(4, 2).unwrap(), fam(4, 2, &[&[3, 4]])],
        )
        .unwrap();
        let w = rainbow_matching(&inst, 2, Budget::default())
            .unwrap()
            .unwrap()
            .value
            .unwrap();
        assert_eq!(w.edges[0].edge, EdgeSet::from_vertices(4, [1, 2]).unwrap());
        assert_eq!(w.edges[1].edge, EdgeSet::from_vertices(4, [3, 4]).unwrap());
    }

    #[test]
    fn cover_examples() {
        for (n, k, t) in [(8, 2, 3), (9, 3, 2), (10, 2, 1)] {
            let inst = RainbowInstance::uniform_copies(&star(n, k, t).unwrap(), t as usize + 1);
            let w = common_cover(&inst, t).unwrap().value.unwrap();
            assert_eq!(w.cover, EdgeSet::prefix(t));
        }
        let disjoint = RainbowInstance::new(4, vec![fam(4, 2, &[&[1, 2], &[3, 4]])]).unwrap();
        assert!(common_cover(&disjoint, 1).unwrap().value.is_none());
        assert!(common_cover(&disjoint, 2).unwrap().value.is_some());
        let hm = RainbowInstance::new(7, vec![hm_family(7, 3, 2).unwrap()]).unwrap();
        assert!(common_cover(&hm, 2).unwrap().value.is_none());
        // padding when a smaller cover suffices
        let tiny = RainbowInstance::new(6, vec![fam(6, 2, &[&[2, 3]])]).unwrap();
        let w = common_cover(&tiny, 3).unwrap().value.unwrap();
        assert_eq!(w.cover.len(), 3);
        validate::check_cover(&tiny, w.cover, 3).unwrap();
        assert!(common_cover(&tiny, 7).is_err());
    }

    #[test]
    fn near_perfect_examples() {
        let inst = RainbowInstance::uniform_copies(&star(5, 2, 1).unwrap(), 1);
        let h = lift_near_perfect(&inst, 2).unwrap();
        let r = near_perfect_check(&h, Budget::default())
            .unwrap()
            .unwrap()
            .value;
        assert!(r.holds);
        assert_eq!(r.witness.unwrap().len(), 2);

        let empty = RainbowInstance::new(5, vec![SetFamily::empty(5, 2).unwrap()]).unwrap();
        let h = lift_near_perfect(&empty, 2).unwrap();
        assert!(
            !near_perfect_check(&h, Budget::default())
                .unwrap()
                .unwrap()
                .value
                .holds
        );

        let full = RainbowInstance::uniform_copies(&SetFamily::complete(6, 3).unwrap(), 2);
        let h = lift_near_perfect(&full, 3).unwrap();
        let r = near_perfect_check(&h, Budget::default())
            .unwrap()
            .unwrap()
            .value;
        let nu = max_matching_partite(&h, Budget::default())
            .unwrap()
            .value
            .len();
        assert_eq!(r.holds, nu == 2);
        assert!(r.holds);

        let h = star_near_perfect(8, 2, 2, 2).unwrap();
        assert!(
            near_perfect_check(&h, Budget::default())
                .unwrap()
                .unwrap()
                .value
                .holds
        );
        assert!(near_perfect_check(&lift_rainbow(&inst), Budget::default()).is_err());
    }

    #[test]
    fn partite_max_matching() {
        let stars = RainbowInstance::uniform_copies(&star(8, 2, 3).unwrap(), 4);
        let h = lift_rainbow(&stars);
        let w = max_matching_partite(&h, Budget::default()).unwrap().value;
        assert_eq!(w.len(), 3);
        validate::check_partite_matching(&h, &w).unwrap();
        let colors: Vec<usize> = w.edges.iter().map(|e| e.color).collect();
        assert!(colors.windows(2).all(|c| c[0] < c[1]));
    }

    #[test]
    fn witness_json() {
        let w = Witness::Matching(MatchingWitness {
            edges: vec![ColoredEdge {
                color: 0,
                edge: EdgeSet::from_vertices(4, [1, 2]).unwrap(),
            }],
        });
        assert_eq!(
            serde_json::to_string(&w).unwrap(),
            r#"{"matching":[{"color":1,"edge":[1,2]}]}"#
        );
        let c = Witness::Cover(CoverWitness {
            cover: EdgeSet::prefix(2),
        });
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"cover":[1,2]}"#);
    }
}
