//! The named families and their lifted (1,k)-partite hypergraphs, plus the
//! closed-form size thresholds.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{params, Error, Result};
use crate::sets::{binom, prefix_mask, subsets_within, EdgeSet, SetFamily};

/// Ordered list of families over a shared ground set; uniformities may differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson")]
pub struct RainbowInstance {
    n: u32,
    families: Vec<SetFamily>,
}

#[derive(Deserialize)]
struct InstanceJson {
    n: u32,
    families: Vec<SetFamily>,
}

impl TryFrom<InstanceJson> for RainbowInstance {
    type Error = Error;

    fn try_from(j: InstanceJson) -> Result<Self> {
        RainbowInstance::new(j.n, j.families)
    }
}

impl RainbowInstance {
    pub fn new(n: u32, families: Vec<SetFamily>) -> Result<Self> {
        if let Some(f) = families.iter().find(|f| f.n() != n) {
            return Err(Error::Shape(format!(
                "family over [{}] in an instance over [{n}]",
                f.n()
            )));
        }
        Ok(RainbowInstance { n, families })
    }

    /// Infers `n` from the first family.
    pub fn from_families(families: Vec<SetFamily>) -> Result<Self> {
        let n = families
            .first()
            .map(SetFamily::n)
            .ok_or_else(|| params("instance without families"))?;
        Self::new(n, families)
    }

    /// `copies` copies of one family.
    pub fn uniform_copies(family: &SetFamily, copies: usize) -> Self {
        RainbowInstance {
            n: family.n(),
            families: vec![family.clone(); copies],
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> usize {
        self.families.len()
    }

    pub fn families(&self) -> &[SetFamily] {
        &self.families
    }

    pub fn family(&self, i: usize) -> &SetFamily {
        &self.families[i]
    }

    /// The common uniformity, if every family shares one.
    pub fn uniformity(&self) -> Option<u32> {
        let k = self.families.first()?.k();
        self.families.iter().all(|f| f.k() == k).then_some(k)
    }

    pub fn max_k(&self) -> u32 {
        self.families.iter().map(SetFamily::k).max().unwrap_or(0)
    }
}

/// Which construction a [`PartiteHypergraph`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Generic,
    /// `F^q(k,n)`: one color per family.
    FUpper,
    /// `H^q(k,n)`: `F^q(k,n)` padded with complete colors.
    HUpper,
    /// `F_q(k,n;s)`: every color is the star `H_k(s,n)`.
    FStar {
        s: u32,
    },
    /// `H_q(k,n;s)`: star colors padded with complete colors.
    HStar {
        s: u32,
    },
}

impl Label {
    pub fn tag(self) -> &'static str {
        match self {
            Label::Generic => "generic",
            Label::FUpper => "F^q",
            Label::HUpper => "H^q",
            Label::FStar { .. } => "F_q(k,n;s)",
            Label::HStar { .. } => "H_q(k,n;s)",
        }
    }

    fn star_param(self) -> Option<u32> {
        match self {
            Label::FStar { s } | Label::HStar { s } => Some(s),
            _ => None,
        }
    }

    fn from_tag(tag: &str, s: Option<u32>) -> Result<Self> {
        let need_s = || s.ok_or_else(|| params(format!("label {tag} needs \"s\"")));
        Ok(match tag {
            "generic" => Label::Generic,
            "F^q" => Label::FUpper,
            "H^q" => Label::HUpper,
            "F_q(k,n;s)" => Label::FStar { s: need_s()? },
            "H_q(k,n;s)" => Label::HStar { s: need_s()? },
            _ => {
                return Err(Error::Parse {
                    what: "label",
                    reason: format!("unknown construction tag {tag:?}"),
                })
            }
        })
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.star_param() {
            Some(s) => write!(f, "{}[s={s}]", self.tag()),
            None => f.write_str(self.tag()),
        }
    }
}

/// A (1,k)-partite (k+1)-graph on `X ∪ [n]`, `X = {x_1, …, x_q}`.
///
/// Color `i` stores the neighborhood of `x_i`: the edges are exactly
/// `{x_i} ∪ e` for `e` in `colors[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartiteJson", into = "PartiteJson")]
pub struct PartiteHypergraph {
    n: u32,
    colors: Vec<SetFamily>,
    label: Label,
}

#[derive(Serialize, Deserialize)]
struct PartiteJson {
    n: u32,
    q: usize,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<u32>,
    families: Vec<SetFamily>,
}

impl From<PartiteHypergraph> for PartiteJson {
    fn from(h: PartiteHypergraph) -> Self {
        PartiteJson {
            n: h.n,
            q: h.colors.len(),
            label: h.label.tag().to_owned(),
            s: h.label.star_param(),
            families: h.colors,
        }
    }
}

impl TryFrom<PartiteJson> for PartiteHypergraph {
    type Error = Error;

    fn try_from(j: PartiteJson) -> Result<Self> {
        if j.q != j.families.len() {
            return Err(Error::Shape(format!(
                "q = {} but {} families given",
                j.q,
                j.families.len()
            )));
        }
        let label = Label::from_tag(&j.label, j.s)?;
        PartiteHypergraph::new(j.n, j.families, label)
    }
}

impl PartiteHypergraph {
    pub fn new(n: u32, colors: Vec<SetFamily>, label: Label) -> Result<Self> {
        if colors.len() > 64 {
            return Err(params(format!("{} colors exceed 64", colors.len())));
        }
        if let Some(f) = colors.iter().find(|f| f.n() != n) {
            return Err(Error::Shape(format!(
                "color over [{}] in a hypergraph over [{n}]",
                f.n()
            )));
        }
        Ok(PartiteHypergraph { n, colors, label })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> usize {
        self.colors.len()
    }

    pub fn colors(&self) -> &[SetFamily] {
        &self.colors
    }

    pub fn color(&self, i: usize) -> &SetFamily {
        &self.colors[i]
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = label;
        self
    }

    /// Total number of (k+1)-edges.
    pub fn edge_count(&self) -> usize {
        self.colors.iter().map(SetFamily::len).sum()
    }

    /// Largest ground-edge size over all colors.
    pub fn ground_uniformity(&self) -> u32 {
        self.colors.iter().map(SetFamily::k).max().unwrap_or(0)
    }

    /// Total vertex count `q + n`.
    pub fn vertex_count(&self) -> u64 {
        self.n as u64 + self.colors.len() as u64
    }

    pub fn as_instance(&self) -> RainbowInstance {
        RainbowInstance {
            n: self.n,
            families: self.colors.clone(),
        }
    }
}

/// `n - kq = km + r` with `0 <= r < k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub n: u32,
    pub k: u32,
    pub q: u32,
    pub m: u32,
    pub r: u32,
}

impl Params {
    pub fn near_perfect(n: u32, k: u32, q: u32) -> Result<Self> {
        if k == 0 {
            return Err(params("uniformity must be positive"));
        }
        let used = k as u64 * q as u64;
        if (n as u64) < used {
            return Err(params(format!("n = {n} < kq = {used}")));
        }
        let rest = n - used as u32;
        Ok(Params {
            n,
            k,
            q,
            m: rest / k,
            r: rest % k,
        })
    }
}

/// `H_k(s,n)`: every `k`-set meeting `[s]`.
pub fn star(n: u32, k: u32, s: u32) -> Result<SetFamily> {
    if s < 1 || s >= n {
        return Err(params(format!(
            "star needs 1 <= s < n, got s = {s}, n = {n}"
        )));
    }
    let core = prefix_mask(s);
    SetFamily::complete_filtered(n, k, |e| e.mask() & core != 0)
}

/// `H^(k)(n,s)`: edges meeting `[s-1]`, the special edge `[s+k] \ [s]`, and
/// edges through `s` that avoid `[s-1]` and meet the special edge.
pub fn hm_family(n: u32, k: u32, s: u32) -> Result<SetFamily> {
    if k < 1 || s < 1 {
        return Err(params("hm_family needs k >= 1 and s >= 1"));
    }
    if (n as u64) < s as u64 + k as u64 {
        return Err(params(format!(
            "hm_family needs n >= s + k, got n = {n}, s + k = {}",
            s + k
        )));
    }
    let head = prefix_mask(s - 1);
    let pivot = 1u64 << (s - 1);
    let special = prefix_mask(s + k) & !prefix_mask(s);
    SetFamily::complete_filtered(n, k, |e| {
        let m = e.mask();
        m & head != 0 || m == special || (m & prefix_mask(s) == pivot && m & special != 0)
    })
}

/// `A_i^(k)(n,s)`: `k`-sets with at least `i` vertices in `[(s+1)i - 1]`.
pub fn a_family(n: u32, k: u32, s: u32, i: u32) -> Result<SetFamily> {
    let window = a_window(n, k, s, i)?;
    let core = prefix_mask(window);
    SetFamily::complete_filtered(n, k, |e| (e.mask() & core).count_ones() >= i)
}

fn a_window(n: u32, k: u32, s: u32, i: u32) -> Result<u32> {
    if i < 1 || i > k {
        return Err(params(format!(
            "A_i needs 1 <= i <= k, got i = {i}, k = {k}"
        )));
    }
    let window = (s as u64 + 1) * i as u64 - 1;
    if window > n as u64 {
        return Err(params(format!(
            "A_i needs (s+1)i - 1 <= n, got {window} > {n}"
        )));
    }
    Ok(window as u32)
}

/// `|A_i^(k)(n,s)|` by counting its complement: `binom(n,k) - Σ_{j<i} binom(L,j)·binom(n-L,k-j)`.
pub fn a_family_size(n: u32, k: u32, s: u32, i: u32) -> Result<u128> {
    let window = a_window(n, k, s, i)? as i64;
    let (n, k) = (n as i64, k as i64);
    let missing: u128 = (0..i as i64)
        .map(|j| binom(window, j) * binom(n - window, k - j))
        .sum();
    Ok(binom(n, k) - missing)
}

/// The published estimate `binom(n,k) - Σ_{j<i} binom((s+1)i-1, j)`.
pub fn a_family_stated_bound(n: u32, k: u32, s: u32, i: u32) -> Result<i128> {
    let window = a_window(n, k, s, i)? as i64;
    let sub: u128 = (0..i as i64).map(|j| binom(window, j)).sum();
    Ok(binom(n as i64, k as i64) as i128 - sub as i128)
}

/// `{e ∪ f : e ∈ F, f ⊆ [n] \ e, |f| = k - r}`.
pub fn expand(family: &SetFamily, k: u32) -> Result<SetFamily> {
    let (n, r) = (family.n(), family.k());
    if k <= r || k > n {
        return Err(params(format!(
            "expansion of an {r}-uniform family to k = {k} needs r < k <= n = {n}"
        )));
    }
    let ground = EdgeSet::prefix(n);
    let mut out = Vec::new();
    for &e in family {
        out.extend(subsets_within(ground.difference(e), k - r).map(|f| e.union(f)));
    }
    out.sort_unstable();
    out.dedup();
    Ok(SetFamily::from_canonical(n, k, out))
}

/// `binom(n,k_i) - binom(n-t,k_i) - binom(n-t-k,k_i-1) + 1`.
///
/// Out-of-range binomials are 0, so the value may be non-positive for
/// degenerate parameters.
pub fn threshold_hm(n: u32, k_i: u32, t: u32, k: u32) -> i128 {
    let (n, ki, t, k) = (n as i64, k_i as i64, t as i64, k as i64);
    binom(n, ki) as i128 - binom(n - t, ki) as i128 - binom(n - t - k, ki - 1) as i128 + 1
}

/// `binom(n,k_i) - binom(n-t+1,k_i)`.
pub fn threshold_em(n: u32, k_i: u32, t: u32) -> i128 {
    let (n, ki, t) = (n as i64, k_i as i64, t as i64);
    binom(n, ki) as i128 - binom(n - t + 1, ki) as i128
}

/// `F^q(k,n)`: color `i` carries `F_i`.
pub fn lift_rainbow(inst: &RainbowInstance) -> PartiteHypergraph {
    PartiteHypergraph {
        n: inst.n,
        colors: inst.families.clone(),
        label: Label::FUpper,
    }
}

/// `H^q(k,n)`: the `q` families followed by `m = ⌊(n - kq)/k⌋` complete colors.
pub fn lift_near_perfect(inst: &RainbowInstance, k: u32) -> Result<PartiteHypergraph> {
    if let Some(f) = inst.families.iter().find(|f| f.k() != k) {
        return Err(params(format!(
            "near-perfect lift needs a {k}-uniform instance, found a {}-uniform family",
            f.k()
        )));
    }
    let p = Params::near_perfect(inst.n, k, inst.q() as u32)?;
    let mut colors = inst.families.clone();
    if p.m > 0 {
        let full = SetFamily::complete(inst.n, k)?;
        colors.extend(std::iter::repeat_n(full, p.m as usize));
    }
    PartiteHypergraph::new(inst.n, colors, Label::HUpper)
}

/// `F_q(k,n;s)`.
pub fn star_lift(n: u32, k: u32, q: usize, s: u32) -> Result<PartiteHypergraph> {
    let inst = RainbowInstance::uniform_copies(&star(n, k, s)?, q);
    Ok(lift_rainbow(&inst).with_label(Label::FStar { s }))
}

/// `H_q(k,n;s)`.
pub fn star_near_perfect(n: u32, k: u32, q: usize, s: u32) -> Result<PartiteHypergraph> {
    let inst = RainbowInstance::uniform_copies(&star(n, k, s)?, q);
    Ok(lift_near_perfect(&inst, k)?.with_label(Label::HStar { s }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::KSubsets;

    #[test]
    fn star_sizes() {
        assert_eq!(star(6, 2, 2).unwrap().len(), 9);
        assert_eq!(star(4, 2, 3).unwrap(), SetFamily::complete(4, 2).unwrap());
        let s = star(5, 3, 1).unwrap();
        assert_eq!(s.len(), 6);
        assert!(s.iter().all(|e| e.contains(1)));
        assert!(star(5, 2, 0).is_err());
        assert!(star(5, 2, 5).is_err());
    }

    #[test]
    fn star_size_formula_exhaustive() {
        for n in 2..=12 {
            for k in 0..=4.min(n) {
                for s in 1..n {
                    let expect = binom(n as i64, k as i64) - binom((n - s) as i64, k as i64);
                    assert_eq!(
                        star(n, k, s).unwrap().len() as u128,
                        expect,
                        "n={n} k={k} s={s}"
                    );
                }
            }
        }
    }

    #[test]
    fn hm_family_parts() {
        // 15 edges meet [1], one special edge, 9 through 2 meeting {3,4,5}
        let h = hm_family(7, 3, 2).unwrap();
        assert_eq!(h.len(), 25);
        assert_eq!(h.iter().filter(|e| e.contains(1)).count(), 15);
        assert!(h.contains(EdgeSet::from_vertices(7, [3, 4, 5]).unwrap()));
        assert!(!h.contains(EdgeSet::from_vertices(7, [2, 6, 7]).unwrap()));
        assert!(hm_family(4, 3, 2).is_err());
    }

    #[test]
    fn hm_family_s1_is_hilton_milner() {
        for (n, k) in [(5, 2), (7, 3), (9, 4)] {
            let special = EdgeSet::from_vertices(n, 2..=k + 1).unwrap();
            let expect = SetFamily::complete_filtered(n, k, |e| {
                *e == special || (e.contains(1) && e.intersects(special))
            })
            .unwrap();
            assert_eq!(hm_family(n, k, 1).unwrap(), expect);
        }
    }

    #[test]
    fn a_family_examples() {
        assert_eq!(a_family(6, 2, 1, 1).unwrap(), star(6, 2, 1).unwrap());
        let a = a_family(7, 3, 2, 2).unwrap();
        assert_eq!(a.len(), 30);
        assert_eq!(a_family_size(7, 3, 2, 2).unwrap(), 30);
        // the stated bound drops the binom(n-L, k-j) factors and undercounts here
        assert_eq!(a_family_stated_bound(7, 3, 2, 2).unwrap(), 29);
        // i = k forces A ⊆ [(s+1)k - 1]
        assert_eq!(a_family(9, 3, 2, 3).unwrap(), {
            SetFamily::complete_filtered(9, 3, |e| e.is_subset(EdgeSet::prefix(8))).unwrap()
        });
        assert!(a_family(4, 2, 2, 2).is_err());
        assert!(a_family(5, 2, 1, 3).is_err());
    }

    #[test]
    fn a_family_size_matches_enumeration() {
        for n in 3..=10 {
            for k in 1..=4.min(n) {
                for s in 1..=3 {
                    for i in 1..=k {
                        if let Ok(f) = a_family(n, k, s, i) {
                            let exact = a_family_size(n, k, s, i).unwrap();
                            assert_eq!(f.len() as u128, exact);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn expand_examples() {
        let f = SetFamily::from_vertex_lists(3, 1, [vec![1]]).unwrap();
        assert_eq!(
            expand(&f, 2).unwrap(),
            SetFamily::from_vertex_lists(3, 2, [vec![1, 2], vec![1, 3]]).unwrap()
        );
        let g = SetFamily::complete_filtered(4, 2, |e| e.is_subset(EdgeSet::prefix(3))).unwrap();
        assert_eq!(expand(&g, 3).unwrap(), SetFamily::complete(4, 3).unwrap());
        assert!(expand(&SetFamily::empty(5, 2).unwrap(), 3)
            .unwrap()
            .is_empty());
        assert!(expand(&g, 2).is_err());
    }

    #[test]
    fn expand_is_upward_closure() {
        let f = SetFamily::from_vertex_lists(6, 2, [vec![1, 2], vec![3, 5], vec![2, 6]]).unwrap();
        let g = expand(&f, 4).unwrap();
        let brute =
            SetFamily::complete_filtered(6, 4, |s| f.iter().any(|e| e.is_subset(*s))).unwrap();
        assert_eq!(g, brute);
    }

    #[test]
    fn thresholds() {
        assert_eq!(threshold_hm(32, 2, 2, 2), 34);
        assert_eq!(threshold_hm(7, 3, 2, 3), 25);
        assert_eq!(threshold_hm(9, 3, 0, 3), 1 - binom(6, 2) as i128);
        assert_eq!(threshold_em(6, 2, 2), 5);
        assert_eq!(threshold_em(11, 3, 1), 0);
        assert_eq!(threshold_em(32, 2, 3), 61);
        for n in 4..=14 {
            for k in 1..=4 {
                for s in 1..=4 {
                    if let Ok(h) = hm_family(n, k, s) {
                        assert_eq!(h.len() as i128, threshold_hm(n, k, s, k));
                    }
                }
            }
        }
    }

    #[test]
    fn lifts() {
        let f = SetFamily::from_vertex_lists(5, 2, [vec![1, 2]]).unwrap();
        let inst = RainbowInstance::new(5, vec![f.clone()]).unwrap();
        let h = lift_rainbow(&inst);
        assert_eq!((h.q(), h.edge_count(), h.label()), (1, 1, Label::FUpper));

        let np = lift_near_perfect(&inst, 2).unwrap();
        assert_eq!(np.q(), 2);
        assert_eq!(np.color(0), &f);
        assert_eq!(np.color(1), &SetFamily::complete(5, 2).unwrap());

        let tight = RainbowInstance::uniform_copies(&SetFamily::complete(6, 2).unwrap(), 3);
        assert_eq!(
            lift_near_perfect(&tight, 2).unwrap().colors(),
            lift_rainbow(&tight).colors()
        );
        assert!(lift_near_perfect(&tight, 3).is_err());
        let crowded = RainbowInstance::uniform_copies(&SetFamily::complete(5, 2).unwrap(), 3);
        assert!(lift_near_perfect(&crowded, 2).is_err());

        let stars = RainbowInstance::uniform_copies(&star(8, 2, 3).unwrap(), 4);
        assert_eq!(
            lift_rainbow(&stars).colors(),
            star_lift(8, 2, 4, 3).unwrap().colors()
        );
        assert_eq!(
            lift_near_perfect(&stars, 2).unwrap().colors(),
            star_near_perfect(8, 2, 4, 3).unwrap().colors()
        );

        let mixed = RainbowInstance::new(
            6,
            vec![
                SetFamily::from_vertex_lists(6, 2, [vec![1, 2]]).unwrap(),
                SetFamily::from_vertex_lists(6, 3, [vec![3, 4, 5]]).unwrap(),
            ],
        )
        .unwrap();
        let lifted = lift_rainbow(&mixed);
        assert_eq!(lifted.color(1).k() + 1, 4);
        assert!(RainbowInstance::new(6, vec![SetFamily::empty(5, 2).unwrap()]).is_err());
    }

    #[test]
    fn near_perfect_params_decompose_n() {
        for n in 1..=40 {
            for k in 1..=5 {
                for q in 0..=n / k {
                    let p = Params::near_perfect(n, k, q).unwrap();
                    assert_eq!(k * (q + p.m) + p.r, n);
                    assert!(p.r < k);
                }
            }
        }
    }

    #[test]
    fn partite_json_round_trip() {
        let h = star_near_perfect(7, 2, 2, 2).unwrap();
        let s = serde_json::to_string(&h).unwrap();
        assert!(s.contains(r#""label":"H_q(k,n;s)""#) && s.contains(r#""q":3"#));
        let back: PartiteHypergraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, h);
        let bad = s.replace(r#""q":3"#, r#""q":2"#);
        assert!(serde_json::from_str::<PartiteHypergraph>(&bad).is_err());
    }

    #[test]
    fn ksubsets_feed_complete() {
        assert_eq!(
            KSubsets::new(6, 3).count(),
            SetFamily::complete(6, 3).unwrap().len()
        );
    }
}
