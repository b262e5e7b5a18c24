//! Ground-set arithmetic.
//!
//! Vertices are `1..=n` with `n <= 64`; vertex `v` lives at bit `v - 1` of an
//! [`EdgeSet`]. Families are kept in canonical form (strictly increasing
//! masks), which makes equality structural and set algebra a linear merge.
//! Numeric mask order on equal-size sets is colex order.

use std::cmp::Ordering;
use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{params, Error, Result};

pub const MAX_VERTICES: u32 = 64;

static PASCAL: LazyLock<[[u128; 65]; 65]> = LazyLock::new(|| {
    let mut t = [[0u128; 65]; 65];
    for n in 0..65 {
        t[n][0] = 1;
        for k in 1..=n {
            t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0 };
        }
    }
    t
});

/// Exact binomial coefficient.
///
/// Out-of-range arguments (`n < 0`, `k < 0`, `k > n`) give 0 so that every
/// threshold formula is total.
///
/// # Panics
///
/// If `n > 64`.
pub fn binom(n: i64, k: i64) -> u128 {
    assert!(n <= 64, "binom({n}, {k}): n exceeds 64");
    if n < 0 || k < 0 || k > n {
        return 0;
    }
    PASCAL[n as usize][k as usize]
}

/// Mask of the vertex set `[s]`.
pub fn prefix_mask(s: u32) -> u64 {
    match s {
        0 => 0,
        64.. => u64::MAX,
        _ => (1u64 << s) - 1,
    }
}

/// One hyperedge as a bitmask over `[n]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EdgeSet(u64);

impl EdgeSet {
    pub const EMPTY: EdgeSet = EdgeSet(0);

    pub const fn from_mask(mask: u64) -> Self {
        EdgeSet(mask)
    }

    /// Builds an edge from 1-based vertices, rejecting anything outside `[n]`.
    pub fn from_vertices<I>(n: u32, vertices: I) -> Result<Self>
    where
        I: IntoIterator<Item = u32>,
    {
        let mut mask = 0u64;
        for v in vertices {
            if v == 0 || v > n || v > MAX_VERTICES {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            mask |= 1u64 << (v - 1);
        }
        Ok(EdgeSet(mask))
    }

    /// The prefix `[s]`.
    pub fn prefix(s: u32) -> Self {
        EdgeSet(prefix_mask(s))
    }

    pub const fn mask(self) -> u64 {
        self.0
    }

    pub const fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn is_disjoint(self, other: EdgeSet) -> bool {
        self.0 & other.0 == 0
    }

    pub const fn intersects(self, other: EdgeSet) -> bool {
        self.0 & other.0 != 0
    }

    pub const fn is_subset(self, other: EdgeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub const fn contains(self, vertex: u32) -> bool {
        vertex >= 1 && vertex <= 64 && self.0 >> (vertex - 1) & 1 == 1
    }

    pub const fn union(self, other: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 | other.0)
    }

    pub const fn intersection(self, other: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 & other.0)
    }

    pub const fn difference(self, other: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 & !other.0)
    }

    /// Largest vertex, if any.
    pub fn max_vertex(self) -> Option<u32> {
        (self.0 != 0).then(|| 64 - self.0.leading_zeros())
    }

    /// Smallest vertex, if any.
    pub fn min_vertex(self) -> Option<u32> {
        (self.0 != 0).then(|| self.0.trailing_zeros() + 1)
    }

    /// Vertices in ascending order, 1-based.
    pub fn vertices(self) -> Vertices {
        Vertices(self.0)
    }
}

impl fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.vertices().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

/// Iterator over the 1-based vertices of an [`EdgeSet`].
#[derive(Clone, Debug)]
pub struct Vertices(u64);

impl Iterator for Vertices {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let v = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(v + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let c = self.0.count_ones() as usize;
        (c, Some(c))
    }
}

impl ExactSizeIterator for Vertices {}

/// All `k`-subsets of `[n]` in increasing mask (colex) order.
#[derive(Clone, Debug)]
pub struct KSubsets {
    next: Option<u64>,
    limit: u64,
}

impl KSubsets {
    pub fn new(n: u32, k: u32) -> Self {
        assert!(n <= MAX_VERTICES, "ground set of {n} vertices exceeds 64");
        let next = if k > n { None } else { Some(prefix_mask(k)) };
        KSubsets {
            next,
            limit: prefix_mask(n),
        }
    }
}

impl Iterator for KSubsets {
    type Item = EdgeSet;

    fn next(&mut self) -> Option<EdgeSet> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            // Gosper's hack; the 128-bit detour keeps n = 64 from overflowing.
            let c = cur as u128;
            let low = c & c.wrapping_neg();
            let ripple = c + low;
            let next = (((ripple ^ c) >> 2) / low) | ripple;
            (next <= self.limit as u128).then_some(next as u64)
        };
        Some(EdgeSet(cur))
    }
}

/// All `size`-subsets of the vertex set `within`, in increasing mask order.
pub fn subsets_within(within: EdgeSet, size: u32) -> impl Iterator<Item = EdgeSet> {
    let positions: Vec<u32> = within.vertices().map(|v| v - 1).collect();
    KSubsets::new(positions.len() as u32, size).map(move |idx| {
        let mut mask = 0u64;
        let mut bits = idx.mask();
        while bits != 0 {
            mask |= 1u64 << positions[bits.trailing_zeros() as usize];
            bits &= bits - 1;
        }
        EdgeSet(mask)
    })
}

/// Colex rank of a `k`-set among all `k`-subsets of the naturals.
pub fn colex_rank(edge: EdgeSet) -> u128 {
    edge.vertices()
        .enumerate()
        .map(|(i, v)| binom(v as i64 - 1, i as i64 + 1))
        .sum()
}

/// Inverse of [`colex_rank`] for `k`-sets over at most 64 vertices.
pub fn colex_unrank(mut rank: u128, k: u32) -> Result<EdgeSet> {
    if rank >= binom(64, k as i64) {
        return Err(Error::TooLarge {
            value: rank.to_string(),
            limit: format!("binom(64, {k})"),
        });
    }
    let mut mask = 0u64;
    let mut upper = 64i64;
    for j in (1..=k as i64).rev() {
        // largest c < upper with binom(c, j) <= rank
        let mut c = upper - 1;
        while binom(c, j) > rank {
            c -= 1;
        }
        rank -= binom(c, j);
        mask |= 1u64 << c;
        upper = c;
    }
    Ok(EdgeSet(mask))
}

/// A `k`-uniform family over `[n]` in canonical (strictly sorted) form.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FamilyJson", into = "FamilyJson")]
pub struct SetFamily {
    n: u32,
    k: u32,
    edges: Vec<EdgeSet>,
}

impl SetFamily {
    /// Validates and canonicalises (sorts, deduplicates) the given edges.
    pub fn new<I>(n: u32, k: u32, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = EdgeSet>,
    {
        check_shape(n, k)?;
        let limit = prefix_mask(n);
        let mut edges: Vec<EdgeSet> = edges.into_iter().collect();
        for &e in &edges {
            if e.mask() & !limit != 0 {
                return Err(Error::VertexOutOfRange {
                    vertex: e.max_vertex().unwrap_or(0),
                    n,
                });
            }
            if e.len() != k {
                return Err(Error::EdgeSize {
                    edge: e.to_string(),
                    expected: k,
                    actual: e.len(),
                });
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(SetFamily { n, k, edges })
    }

    /// Builds a family from 1-based vertex lists.
    pub fn from_vertex_lists<L>(n: u32, k: u32, lists: L) -> Result<Self>
    where
        L: IntoIterator,
        L::Item: IntoIterator<Item = u32>,
    {
        let edges = lists
            .into_iter()
            .map(|l| EdgeSet::from_vertices(n, l))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, k, edges)
    }

    pub fn empty(n: u32, k: u32) -> Result<Self> {
        check_shape(n, k)?;
        Ok(SetFamily {
            n,
            k,
            edges: Vec::new(),
        })
    }

    /// `([n] choose k)`.
    pub fn complete(n: u32, k: u32) -> Result<Self> {
        Self::complete_filtered(n, k, |_| true)
    }

    /// The members of `([n] choose k)` accepted by `keep`.
    pub fn complete_filtered<P>(n: u32, k: u32, keep: P) -> Result<Self>
    where
        P: FnMut(&EdgeSet) -> bool,
    {
        check_shape(n, k)?;
        Ok(SetFamily {
            n,
            k,
            edges: KSubsets::new(n, k).filter(keep).collect(),
        })
    }

    /// Caller guarantees canonical form and shape.
    pub(crate) fn from_canonical(n: u32, k: u32, edges: Vec<EdgeSet>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges.iter().all(|e| e.len() == k));
        SetFamily { n, k, edges }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn edges(&self) -> &[EdgeSet] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, edge: EdgeSet) -> bool {
        self.edges.binary_search(&edge).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, EdgeSet> {
        self.edges.iter()
    }

    /// Union of all edges.
    pub fn support(&self) -> EdgeSet {
        EdgeSet(self.edges.iter().fold(0, |acc, e| acc | e.mask()))
    }

    /// True iff `cover` meets every edge.
    pub fn is_covered_by(&self, cover: EdgeSet) -> bool {
        self.edges.iter().all(|e| e.intersects(cover))
    }

    /// Edges containing vertex `v`.
    pub fn degree(&self, v: u32) -> usize {
        self.edges.iter().filter(|e| e.contains(v)).count()
    }

    pub fn union(&self, other: &SetFamily) -> Result<SetFamily> {
        self.same_shape(other)?;
        Ok(self.merge(other, |a, b| a || b))
    }

    pub fn intersection(&self, other: &SetFamily) -> Result<SetFamily> {
        self.same_shape(other)?;
        Ok(self.merge(other, |a, b| a && b))
    }

    pub fn difference(&self, other: &SetFamily) -> Result<SetFamily> {
        self.same_shape(other)?;
        Ok(self.merge(other, |a, b| a && !b))
    }

    pub fn is_subfamily_of(&self, other: &SetFamily) -> bool {
        self.n == other.n && self.k == other.k && self.intersection_len(other) == self.edges.len()
    }

    /// `|self ∩ other|` by sorted merge.
    pub fn intersection_len(&self, other: &SetFamily) -> usize {
        sorted_intersection_len(&self.edges, &other.edges)
    }

    /// Keeps the edges accepted by `keep`.
    pub fn filter<P>(&self, mut keep: P) -> SetFamily
    where
        P: FnMut(&EdgeSet) -> bool,
    {
        SetFamily::from_canonical(
            self.n,
            self.k,
            self.edges.iter().copied().filter(|e| keep(e)).collect(),
        )
    }

    /// The `(k-1)`-uniform family of sets obtained by deleting one vertex
    /// from an edge.
    pub fn shadow(&self) -> Result<SetFamily> {
        if self.k == 0 {
            return Err(params("shadow of a 0-uniform family"));
        }
        let mut out = Vec::with_capacity(self.edges.len() * self.k as usize);
        for e in &self.edges {
            let mut bits = e.mask();
            while bits != 0 {
                let low = bits & bits.wrapping_neg();
                out.push(EdgeSet(e.mask() ^ low));
                bits ^= low;
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(SetFamily::from_canonical(self.n, self.k - 1, out))
    }

    /// The shadow applied `times` times.
    pub fn iterated_shadow(&self, times: u32) -> Result<SetFamily> {
        if times > self.k {
            return Err(params(format!(
                "{times}-fold shadow of a {}-uniform family",
                self.k
            )));
        }
        let mut cur = self.clone();
        for _ in 0..times {
            cur = cur.shadow()?;
        }
        Ok(cur)
    }

    /// `([n] choose k)` minus this family.
    pub fn complement(&self) -> SetFamily {
        let mut mine = self.edges.iter().peekable();
        let edges = KSubsets::new(self.n, self.k)
            .filter(|e| {
                while mine.peek().is_some_and(|m| *m < e) {
                    mine.next();
                }
                mine.peek() != Some(&e)
            })
            .collect();
        SetFamily::from_canonical(self.n, self.k, edges)
    }

    fn same_shape(&self, other: &SetFamily) -> Result<()> {
        if self.n != other.n || self.k != other.k {
            return Err(Error::Shape(format!(
                "families over ([{}] choose {}) and ([{}] choose {})",
                self.n, self.k, other.n, other.k
            )));
        }
        Ok(())
    }

    fn merge(&self, other: &SetFamily, keep: impl Fn(bool, bool) -> bool) -> SetFamily {
        let (a, b) = (&self.edges, &other.edges);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(a.len().max(b.len()));
        while i < a.len() || j < b.len() {
            let ord = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.cmp(y),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            let (e, in_a, in_b) = match ord {
                Ordering::Less => {
                    i += 1;
                    (a[i - 1], true, false)
                }
                Ordering::Greater => {
                    j += 1;
                    (b[j - 1], false, true)
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (a[i - 1], true, true)
                }
            };
            if keep(in_a, in_b) {
                out.push(e);
            }
        }
        SetFamily::from_canonical(self.n, self.k, out)
    }
}

impl fmt::Debug for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetFamily(n={}, k={}, ", self.n, self.k)?;
        f.debug_list().entries(&self.edges).finish()?;
        f.write_str(")")
    }
}

impl<'a> IntoIterator for &'a SetFamily {
    type Item = &'a EdgeSet;
    type IntoIter = std::slice::Iter<'a, EdgeSet>;

    fn into_iter(self) -> Self::IntoIter {
        self.edges.iter()
    }
}

pub(crate) fn sorted_intersection_len(a: &[EdgeSet], b: &[EdgeSet]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

fn check_shape(n: u32, k: u32) -> Result<()> {
    if n == 0 || n > MAX_VERTICES {
        return Err(Error::GroundSetSize(n));
    }
    if k > n {
        return Err(params(format!(
            "uniformity {k} exceeds ground set size {n}"
        )));
    }
    Ok(())
}

/// Interchange form: 1-based sorted vertex lists.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyJson {
    pub n: u32,
    pub k: u32,
    pub edges: Vec<Vec<u32>>,
}

impl From<SetFamily> for FamilyJson {
    fn from(f: SetFamily) -> Self {
        FamilyJson {
            n: f.n,
            k: f.k,
            edges: f.edges.iter().map(|e| e.vertices().collect()).collect(),
        }
    }
}

impl TryFrom<FamilyJson> for SetFamily {
    type Error = Error;

    fn try_from(j: FamilyJson) -> Result<Self> {
        SetFamily::from_vertex_lists(j.n, j.k, j.edges)
    }
}

/// A greedy `k`-cascade: `m = Σ binom(a_j, j)` with `a_k > … > a_s >= s >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeRepr {
    /// `(a_j, j)` pairs with `j` strictly descending.
    pub terms: Vec<(u32, u32)>,
}

impl CascadeRepr {
    /// The represented integer.
    pub fn value(&self) -> u128 {
        self.terms
            .iter()
            .map(|&(a, j)| binom(a as i64, j as i64))
            .sum()
    }

    /// `Σ binom(a_j, j - 1)`, the Kruskal–Katona lower bound on the shadow.
    pub fn shadow_bound(&self) -> u128 {
        self.terms
            .iter()
            .map(|&(a, j)| binom(a as i64, j as i64 - 1))
            .sum()
    }

    /// Checks strict descent and `a_s >= s >= 1`.
    pub fn is_well_formed(&self) -> bool {
        let descending = self
            .terms
            .windows(2)
            .all(|w| w[0].0 > w[1].0 && w[0].1 == w[1].1 + 1);
        let tail_ok = self.terms.last().is_none_or(|&(a, s)| s >= 1 && a >= s);
        descending && tail_ok
    }
}

/// Greedy `k`-cascade representation of `m`; empty for `m = 0`.
pub fn cascade_repr(m: u128, k: u32) -> Result<CascadeRepr> {
    if k == 0 {
        return Err(params("cascade representation needs k >= 1"));
    }
    let limit = binom(64, k as i64);
    if k > 64 || m > limit {
        return Err(Error::TooLarge {
            value: m.to_string(),
            limit: format!("binom(64, {k}) = {limit}"),
        });
    }
    let mut terms = Vec::new();
    let mut rest = m;
    let mut a = 64i64;
    let mut j = k as i64;
    while rest > 0 {
        while binom(a, j) > rest {
            a -= 1;
        }
        rest -= binom(a, j);
        terms.push((a as u32, j as u32));
        j -= 1;
        a -= 1;
    }
    Ok(CascadeRepr { terms })
}

/// Kruskal–Katona lower bound on `|∂F|` for `|F| = m`, `F` `k`-uniform.
pub fn kk_bound(m: u128, k: u32) -> Result<u128> {
    Ok(cascade_repr(m, k)?.shadow_bound())
}
