//! Distances between (1,k)-partite hypergraphs, vertex goodness, and the
//! executable equivalences between rainbow matchings, matchings of the lift
//! and near-perfect matchings of the padded lift.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::constructions::{
    lift_near_perfect, lift_rainbow, star_lift, star_near_perfect, PartiteHypergraph,
    RainbowInstance,
};
use crate::error::{params, Error, Result};
use crate::sets::{sorted_intersection_len, EdgeSet, SetFamily};
use crate::solver::{near_perfect_check, rainbow_matching, Budget, MatchingWitness};

/// Largest ground set for which closeness is computed exactly.
pub const EXACT_CLOSENESS_MAX_N: u32 = 10;
const EXACT_MAX_COLORS: usize = 16;
const LOCAL_SEARCH_PASSES: usize = 64;

/// Vertex permutation: `map[v - 1]` is the image of vertex `v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Relabeling {
    /// Image of each ground vertex of `H2`, 1-based.
    pub vertices: Vec<u32>,
    /// Color of `H1` that each color of `H2` is sent to, 1-based.
    pub colors: Vec<usize>,
}

impl Relabeling {
    fn to_json_colors(sigma: &[u32], pi: &[usize]) -> Self {
        Relabeling {
            vertices: sigma.iter().map(|&v| v + 1).collect(),
            colors: pi.iter().map(|&c| c + 1).collect(),
        }
    }

    /// Applies the relabeling to `h`, producing the aligned copy `H'`.
    pub fn apply(&self, h: &PartiteHypergraph) -> Result<PartiteHypergraph> {
        let sigma: Vec<u32> = self.vertices.iter().map(|&v| v - 1).collect();
        let mut colors: Vec<Option<SetFamily>> = vec![None; h.q()];
        for (j, f) in h.colors().iter().enumerate() {
            colors[self.colors[j] - 1] = Some(relabel_family(f, &sigma));
        }
        let colors = colors
            .into_iter()
            .map(|c| c.ok_or_else(|| params("color map is not a permutation")))
            .collect::<Result<Vec<_>>>()?;
        PartiteHypergraph::new(h.n(), colors, h.label())
    }
}

fn relabel_mask(mask: u64, sigma: &[u32]) -> u64 {
    let mut out = 0u64;
    let mut bits = mask;
    while bits != 0 {
        out |= 1u64 << sigma[bits.trailing_zeros() as usize];
        bits &= bits - 1;
    }
    out
}

/// The image of `f` under the 0-based vertex map `sigma`.
pub fn relabel_family(f: &SetFamily, sigma: &[u32]) -> SetFamily {
    let mut edges: Vec<EdgeSet> = f
        .iter()
        .map(|e| EdgeSet::from_mask(relabel_mask(e.mask(), sigma)))
        .collect();
    edges.sort_unstable();
    SetFamily::from_canonical(f.n(), f.k(), edges)
}

/// Applies a vertex permutation (0-based) to every color.
pub fn relabel_partite(h: &PartiteHypergraph, sigma: &[u32]) -> PartiteHypergraph {
    let colors = h
        .colors()
        .iter()
        .map(|f| relabel_family(f, sigma))
        .collect();
    PartiteHypergraph::new(h.n(), colors, h.label()).expect("relabeling preserves shape")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosenessReport {
    /// `min |E(H1) \ E(H')|` over class-preserving copies `H'` of `H2`.
    #[serde(rename = "c")]
    pub c_value: u64,
    #[serde(rename = "relabeling")]
    pub best_relabeling: Relabeling,
    /// False when the value is only a local-search upper bound.
    pub exact: bool,
}

fn check_same_shape(h1: &PartiteHypergraph, h2: &PartiteHypergraph) -> Result<()> {
    if h1.n() != h2.n() || h1.q() != h2.q() {
        return Err(Error::Shape(format!(
            "(n, q) = ({}, {}) vs ({}, {})",
            h1.n(),
            h1.q(),
            h2.n(),
            h2.q()
        )));
    }
    Ok(())
}

/// Scores alignments of `H2` against `H1`: the best color assignment for a
/// fixed vertex map, solved exactly by a DP over subsets of `H1` colors.
struct Aligner<'a> {
    h1: &'a PartiteHypergraph,
    h2: &'a PartiteHypergraph,
    weights: Vec<u64>,
}

impl<'a> Aligner<'a> {
    fn new(h1: &'a PartiteHypergraph, h2: &'a PartiteHypergraph) -> Self {
        let q = h1.q();
        Aligner {
            h1,
            h2,
            weights: vec![0; q * q],
        }
    }

    /// Best overlap `Σ_j |H1_{π(j)} ∩ σ(H2_j)|` and the maximising `π`.
    fn score(&mut self, sigma: &[u32]) -> (u64, Vec<usize>) {
        let q = self.h1.q();
        for (j, f2) in self.h2.colors().iter().enumerate() {
            let image = relabel_family(f2, sigma);
            for (i, f1) in self.h1.colors().iter().enumerate() {
                self.weights[j * q + i] = if f1.k() == image.k() {
                    sorted_intersection_len(f1.edges(), image.edges()) as u64
                } else {
                    0
                };
            }
        }
        best_assignment(q, &self.weights)
    }
}

/// Maximum-weight perfect assignment of rows `j` to columns `i`;
/// `w[j * q + i]`. Ties resolve to the lexicographically first assignment.
fn best_assignment(q: usize, w: &[u64]) -> (u64, Vec<usize>) {
    if q == 0 {
        return (0, Vec::new());
    }
    let full = 1usize << q;
    // best[mask] = max weight assigning rows 0..popcount(mask) to columns in mask
    let mut best = vec![0u64; full];
    for mask in 1..full {
        let row = mask.count_ones() as usize - 1;
        let mut b = 0;
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            b = b.max(best[mask ^ (1 << i)] + w[row * q + i]);
        }
        best[mask] = b;
    }
    // reconstruct from the last row back
    let mut pi = vec![0usize; q];
    let mut mask = full - 1;
    for row in (0..q).rev() {
        let i = (0..q)
            .find(|&i| mask >> i & 1 == 1 && best[mask ^ (1 << i)] + w[row * q + i] == best[mask])
            .expect("DP table is consistent");
        pi[row] = i;
        mask ^= 1 << i;
    }
    (best[full - 1], pi)
}

/// Groups `H2`'s ground vertices into classes of mutual twins: `u ~ v` iff
/// swapping `u` and `v` fixes every color.
fn twin_classes(h: &PartiteHypergraph) -> Vec<Vec<u32>> {
    let n = h.n();
    let mut classes: Vec<Vec<u32>> = Vec::new();
    'vertex: for v in 0..n {
        for class in &mut classes {
            let u = class[0];
            let mut swap: Vec<u32> = (0..n).collect();
            swap.swap(u as usize, v as usize);
            if h.colors().iter().all(|f| relabel_family(f, &swap) == *f) {
                class.push(v);
                continue 'vertex;
            }
        }
        classes.push(vec![v]);
    }
    classes
}

/// Enumerates vertex maps up to twin symmetry of `H2`: each twin class is
/// sent, in order, onto a chosen set of `H1` vertices.
struct ClassEnumerator<'a> {
    classes: &'a [Vec<u32>],
    remaining: Vec<usize>,
    label: Vec<usize>,
}

impl ClassEnumerator<'_> {
    fn run(&mut self, v: usize, n: usize, visit: &mut dyn FnMut(&[u32]) -> bool) -> bool {
        if v == n {
            let mut sigma = vec![0u32; n];
            let mut next = vec![0usize; self.classes.len()];
            for (target, &c) in self.label.iter().enumerate() {
                sigma[self.classes[c][next[c]] as usize] = target as u32;
                next[c] += 1;
            }
            return visit(&sigma);
        }
        for c in 0..self.classes.len() {
            if self.remaining[c] == 0 {
                continue;
            }
            self.remaining[c] -= 1;
            self.label[v] = c;
            let stop = self.run(v + 1, n, visit);
            self.remaining[c] += 1;
            if stop {
                return true;
            }
        }
        false
    }
}

/// `c(H1, H2)`: the fewest edges of `H1` missing from some copy of `H2`
/// obtained by permuting the ground set and the color class separately.
///
/// Exact for `n <= 10` (enumeration up to twin symmetry of `H2`); beyond that
/// a degree-ordered start improved by pairwise swaps gives an upper bound.
pub fn closeness(h1: &PartiteHypergraph, h2: &PartiteHypergraph) -> Result<ClosenessReport> {
    check_same_shape(h1, h2)?;
    if h1.q() > EXACT_MAX_COLORS {
        return Err(params(format!(
            "closeness supports at most {EXACT_MAX_COLORS} colors"
        )));
    }
    if h1.n() <= EXACT_CLOSENESS_MAX_N {
        Ok(closeness_exact(h1, h2))
    } else {
        Ok(closeness_local(h1, h2))
    }
}

/// Exact closeness regardless of `n`; cost grows like `n!` for asymmetric `H2`.
pub fn closeness_exact(h1: &PartiteHypergraph, h2: &PartiteHypergraph) -> ClosenessReport {
    let total = h1.edge_count() as u64;
    let classes = twin_classes(h2);
    let mut aligner = Aligner::new(h1, h2);
    let mut best: Option<(u64, Vec<u32>, Vec<usize>)> = None;
    let n = h1.n() as usize;
    let mut visit = |sigma: &[u32]| {
        let (overlap, pi) = aligner.score(sigma);
        if best.as_ref().is_none_or(|b| overlap > b.0) {
            best = Some((overlap, sigma.to_vec(), pi));
        }
        overlap == total
    };
    let mut walker = ClassEnumerator {
        classes: &classes,
        remaining: classes.iter().map(Vec::len).collect(),
        label: vec![0; n],
    };
    walker.run(0, n, &mut visit);
    let (overlap, sigma, pi) = best.expect("at least one relabeling");
    ClosenessReport {
        c_value: total - overlap,
        best_relabeling: Relabeling::to_json_colors(&sigma, &pi),
        exact: true,
    }
}

fn closeness_local(h1: &PartiteHypergraph, h2: &PartiteHypergraph) -> ClosenessReport {
    let n = h1.n() as usize;
    let total = h1.edge_count() as u64;
    let mut aligner = Aligner::new(h1, h2);

    let degrees = |h: &PartiteHypergraph| -> Vec<usize> {
        (1..=h.n())
            .map(|v| h.colors().iter().map(|f| f.degree(v)).sum())
            .collect()
    };
    let (d1, d2) = (degrees(h1), degrees(h2));
    let mut by1: Vec<usize> = (0..n).collect();
    let mut by2: Vec<usize> = (0..n).collect();
    by1.sort_by_key(|&v| (std::cmp::Reverse(d1[v]), v));
    by2.sort_by_key(|&v| (std::cmp::Reverse(d2[v]), v));
    let mut by_degree = vec![0u32; n];
    for (a, b) in by2.iter().zip(&by1) {
        by_degree[*a] = *b as u32;
    }
    let identity: Vec<u32> = (0..n as u32).collect();

    let (mut best_overlap, mut best_pi) = aligner.score(&identity);
    let mut sigma = identity;
    let (o, p) = aligner.score(&by_degree);
    if o > best_overlap {
        (best_overlap, best_pi, sigma) = (o, p, by_degree);
    }
    for _ in 0..LOCAL_SEARCH_PASSES {
        if best_overlap == total {
            break;
        }
        let mut improved = false;
        for a in 0..n {
            for b in a + 1..n {
                sigma.swap(a, b);
                let (o, p) = aligner.score(&sigma);
                if o > best_overlap {
                    best_overlap = o;
                    best_pi = p;
                    improved = true;
                } else {
                    sigma.swap(a, b);
                }
            }
        }
        if !improved {
            break;
        }
    }
    ClosenessReport {
        c_value: total - best_overlap,
        best_relabeling: Relabeling::to_json_colors(&sigma, &best_pi),
        exact: false,
    }
}

/// How `|V|^k` is read in the closeness threshold `c <= ε |V|^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsNorm {
    pub base: BigRational,
    pub exponent: u32,
}

impl EpsNorm {
    /// `|V| = n + q`, exponent the ground-edge size `k`.
    pub fn vertex_count(h: &PartiteHypergraph) -> Self {
        EpsNorm {
            base: BigRational::from_integer(BigInt::from(h.vertex_count())),
            exponent: h.ground_uniformity(),
        }
    }

    /// `(n + n/k)^(k+1)`, the normalisation used for the padded lift.
    pub fn scaled_ground(n: u32, k: u32) -> Self {
        let n = BigRational::from_integer(BigInt::from(n));
        let k_r = BigRational::from_integer(BigInt::from(k));
        EpsNorm {
            base: &n + &n / k_r,
            exponent: k + 1,
        }
    }

    pub fn explicit(base: BigRational, exponent: u32) -> Self {
        EpsNorm { base, exponent }
    }

    /// `ε · base^exponent`.
    pub fn allowance(&self, eps: &BigRational) -> BigRational {
        eps * num_traits::pow(self.base.clone(), self.exponent as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsCloseness {
    pub report: ClosenessReport,
    pub allowance: BigRational,
    pub close: bool,
}

/// Whether `H2` is ε-close to `H1`: `c(H1, H2) <= ε · base^exponent`, in exact
/// rationals. With an inexact closeness value a `true` answer is still sound
/// (the bound is an upper bound) but `false` may be spurious.
pub fn is_eps_close(
    h1: &PartiteHypergraph,
    h2: &PartiteHypergraph,
    eps: &BigRational,
    norm: &EpsNorm,
) -> Result<EpsCloseness> {
    let report = closeness(h1, h2)?;
    let allowance = norm.allowance(eps);
    let c = BigRational::from_integer(BigInt::from(report.c_value));
    Ok(EpsCloseness {
        close: c <= allowance,
        report,
        allowance,
    })
}

/// A vertex of a (1,k)-partite hypergraph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PartiteVertex {
    /// `x_{i+1}`.
    Color(usize),
    /// Ground vertex, 1-based.
    Ground(u32),
}

impl Serialize for PartiteVertex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            PartiteVertex::Color(i) => s.serialize_str(&format!("x{}", i + 1)),
            PartiteVertex::Ground(v) => s.serialize_u32(v),
        }
    }
}

fn serialize_ratio<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoodnessReport {
    #[serde(serialize_with = "serialize_ratio")]
    pub alpha: BigRational,
    /// `α n^k`.
    #[serde(skip)]
    pub allowance: BigRational,
    #[serde(rename = "bad")]
    pub bad_vertices: Vec<PartiteVertex>,
    #[serde(skip)]
    pub deficits: Vec<(PartiteVertex, u64)>,
}

impl GoodnessReport {
    pub fn deficit(&self, v: PartiteVertex) -> Option<u64> {
        self.deficits.iter().find(|d| d.0 == v).map(|d| d.1)
    }
}

/// Per-vertex `|N_target(v) \ N_H(v)|`, and the vertices where it exceeds
/// `α n^k` (`n` the ground-set size, `k` the ground-edge size). Neighborhoods
/// are compared under the identity labeling.
pub fn alpha_good(
    h: &PartiteHypergraph,
    target: &PartiteHypergraph,
    alpha: &BigRational,
) -> Result<GoodnessReport> {
    check_same_shape(h, target)?;
    let k = target.ground_uniformity();
    let allowance =
        alpha * BigRational::from_integer(num_traits::pow(BigInt::from(h.n()), k as usize));
    let missing: Vec<SetFamily> = target
        .colors()
        .iter()
        .zip(h.colors())
        .map(|(t, mine)| {
            if t.k() == mine.k() {
                t.difference(mine)
            } else {
                Ok(t.clone())
            }
        })
        .collect::<Result<_>>()?;
    let mut deficits = Vec::with_capacity(h.q() + h.n() as usize);
    for (i, m) in missing.iter().enumerate() {
        deficits.push((PartiteVertex::Color(i), m.len() as u64));
    }
    for v in 1..=h.n() {
        let d: usize = missing.iter().map(|m| m.degree(v)).sum();
        deficits.push((PartiteVertex::Ground(v), d as u64));
    }
    let bad_vertices = deficits
        .iter()
        .filter(|(_, d)| BigRational::from_integer(BigInt::from(*d)) > allowance)
        .map(|(v, _)| *v)
        .collect();
    Ok(GoodnessReport {
        alpha: alpha.clone(),
        allowance,
        bad_vertices,
        deficits,
    })
}

/// Parses `p/q` or an integer into an exact rational.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let bad = |reason: String| Error::Parse {
        what: "rational",
        reason,
    };
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|e| bad(format!("{s:?}: {e}")))?;
    let den: BigInt = den.parse().map_err(|e| bad(format!("{s:?}: {e}")))?;
    if den.is_zero() {
        return Err(bad(format!("{s:?}: zero denominator")));
    }
    Ok(BigRational::new(num, den))
}

/// Agreement status of the two sides of an equivalence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Agree,
    Disagree,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RainPmReport {
    /// The family list admits a rainbow matching (`F^q` has a matching of size `q`).
    pub rainbow: Option<bool>,
    /// `H^q(k,n)` has a matching of size `⌊n/k⌋`.
    pub near_perfect: Option<bool>,
    pub status: Agreement,
    pub rainbow_witness: Option<MatchingWitness>,
    pub near_perfect_witness: Option<MatchingWitness>,
    pub nodes: u64,
}

/// Solves both sides of the rainbow / near-perfect equivalence for a
/// `k`-uniform instance with `n >= kq`.
pub fn rainpm_equiv_check(inst: &RainbowInstance, budget: Budget) -> Result<RainPmReport> {
    let k = inst
        .uniformity()
        .ok_or_else(|| params("equivalence check needs a non-empty uniform instance"))?;
    let lifted = lift_near_perfect(inst, k)?;
    let left = rainbow_matching(inst, inst.q(), budget)?;
    let right = near_perfect_check(&lifted, budget)?;
    let mut nodes = 0;
    let (rainbow, rainbow_witness) = match left {
        Ok(s) => {
            nodes += s.nodes;
            (Some(s.value.is_some()), s.value)
        }
        Err(e) => {
            nodes += e.nodes;
            (None, None)
        }
    };
    let (near_perfect, near_perfect_witness) = match right {
        Ok(s) => {
            nodes += s.nodes;
            (Some(s.value.holds), s.value.witness)
        }
        Err(e) => {
            nodes += e.nodes;
            (None, None)
        }
    };
    let status = match (rainbow, near_perfect) {
        (Some(a), Some(b)) if a == b => Agreement::Agree,
        (Some(_), Some(_)) => Agreement::Disagree,
        _ => Agreement::Inconclusive,
    };
    Ok(RainPmReport {
        rainbow,
        near_perfect,
        status,
        rainbow_witness,
        near_perfect_witness,
        nodes,
    })
}

/// Both closeness comparisons behind the transfer between `F^q` vs `F_q(k,n;s)`
/// and `H^q` vs `H_q(k,n;s)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferReport {
    pub c_lift: u64,
    pub c_padded: u64,
    /// `F^q` is ε-close to `F_q(k,n;s)`.
    pub lift_close: bool,
    /// `H^q` is ε-close to `H_q(k,n;s)`.
    pub padded_close: bool,
    /// `F^q` is `4k^5 ε`-close to `F_q(k,n;s)`.
    pub lift_close_scaled: bool,
    /// Lift-close implies padded-close.
    pub forward_holds: bool,
    /// Padded-close implies scaled lift-close; `None` when `n > 2k^3 min(q,s)`.
    pub backward_holds: Option<bool>,
}

/// Evaluates both transfer implications for one instance at tolerance `eps`,
/// with `|V|` the full vertex count of each graph and exponent `k`.
pub fn closeness_transfer(
    inst: &RainbowInstance,
    s: u32,
    eps: &BigRational,
) -> Result<TransferReport> {
    let k = inst
        .uniformity()
        .ok_or_else(|| params("transfer check needs a non-empty uniform instance"))?;
    let (n, q) = (inst.n(), inst.q());
    if n > EXACT_CLOSENESS_MAX_N {
        return Err(params(format!(
            "transfer check needs exact closeness, n <= {EXACT_CLOSENESS_MAX_N}"
        )));
    }
    let lift = lift_rainbow(inst);
    let padded = lift_near_perfect(inst, k)?;
    let lift_target = star_lift(n, k, q, s)?;
    let padded_target = star_near_perfect(n, k, q, s)?;

    let c_lift = closeness(&lift, &lift_target)?.c_value;
    let c_padded = closeness(&padded, &padded_target)?.c_value;
    let as_rat = |c: u64| BigRational::from_integer(BigInt::from(c));
    let lift_norm = EpsNorm::vertex_count(&lift);
    let padded_norm = EpsNorm::vertex_count(&padded);
    let lift_close = as_rat(c_lift) <= lift_norm.allowance(eps);
    let padded_close = as_rat(c_padded) <= padded_norm.allowance(eps);
    let scale = BigRational::from_integer(BigInt::from(4u64 * (k as u64).pow(5)));
    let lift_close_scaled = as_rat(c_lift) <= lift_norm.allowance(&(eps * scale));
    let backward_applies = (n as u64) <= 2 * (k as u64).pow(3) * (q as u64).min(s as u64);
    Ok(TransferReport {
        c_lift,
        c_padded,
        lift_close,
        padded_close,
        lift_close_scaled,
        forward_holds: !lift_close || padded_close,
        backward_holds: backward_applies.then_some(!padded_close || lift_close_scaled),
    })
}
