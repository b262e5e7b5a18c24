//! Verification experiments.
//!
//! Each experiment produces one [`CaseRecord`] per case. Cases are evaluated
//! in parallel but reported in case order, and sampled cases draw from their
//! own RNG stream (see [`crate::sampling::case_rng`]), so a given
//! configuration always yields byte-identical JSON-lines output. Wall-clock
//! times are only recorded when explicitly requested.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::constructions::{a_family, expand, hm_family, star, threshold_hm, RainbowInstance};
use crate::error::{params, Result};
use crate::reductions::{rainpm_equiv_check, Agreement};
use crate::sampling::{
    augment, case_rng, random_family, random_family_any_size, random_subfamily, CaseRng,
};
use crate::sets::{binom, kk_bound, EdgeSet, KSubsets, SetFamily};
use crate::solver::{common_cover, max_matching, rainbow_matching, Budget, CoverWitness, Witness};
use crate::validate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Skipped,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseRecord {
    pub case: u64,
    pub params: Value,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
    pub nodes: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: u64,
    pub pass: u64,
    pub fail: u64,
    pub skipped: u64,
    pub inconclusive: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub experiment: String,
    pub config: Value,
    pub cases: Vec<CaseRecord>,
}

impl VerificationReport {
    pub fn summary(&self) -> Summary {
        let mut s = Summary::default();
        for c in &self.cases {
            s.total += 1;
            match c.outcome {
                Outcome::Pass => s.pass += 1,
                Outcome::Fail => s.fail += 1,
                Outcome::Skipped => s.skipped += 1,
                Outcome::Inconclusive => s.inconclusive += 1,
            }
        }
        s
    }

    /// No failures and nothing inconclusive.
    pub fn is_success(&self) -> bool {
        let s = self.summary();
        s.fail == 0 && s.inconclusive == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseRecord> {
        self.cases.iter().filter(|c| c.outcome == Outcome::Fail)
    }

    /// One JSON object per line, in case order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            out.push_str(&serde_json::to_string(c).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    /// Per-case CSV: `case,outcome,nodes,params`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("case,outcome,nodes,params\n");
        for c in &self.cases {
            let outcome = serde_json::to_value(c.outcome).expect("outcome serializes");
            let params = c.params.to_string().replace('"', "\"\"");
            let _ = writeln!(
                out,
                "{},{},{},\"{}\"",
                c.case,
                outcome.as_str().unwrap_or_default(),
                c.nodes,
                params
            );
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let s = self.summary();
        format!(
            "experiment,total,pass,fail,skipped,inconclusive\n{},{},{},{},{},{}\n",
            self.experiment, s.total, s.pass, s.fail, s.skipped, s.inconclusive
        )
    }
}

/// Exhaustive, sampled, or exhaustive whenever the instance space is small.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub mode: Mode,
    pub samples: u64,
    pub seed: u64,
    pub budget: Budget,
    /// Attach `wall_ms` to every record (breaks byte-reproducibility).
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            mode: Mode::Auto,
            samples: 1000,
            seed: 0,
            budget: Budget::default(),
            timing: false,
        }
    }
}

impl RunOptions {
    fn exhaustive(&self, small: bool, what: &str) -> Result<bool> {
        match self.mode {
            Mode::Auto => Ok(small),
            Mode::Sampled => Ok(false),
            Mode::Exhaustive if small => Ok(true),
            Mode::Exhaustive => Err(params(format!("{what} is too large for exhaustive mode"))),
        }
    }
}

struct Eval {
    params: Value,
    outcome: Outcome,
    detail: Value,
    nodes: u64,
}

fn run_cases<F>(count: u64, opts: &RunOptions, eval: F) -> Result<Vec<CaseRecord>>
where
    F: Fn(u64) -> Result<Eval> + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|case| {
            let start = Instant::now();
            let e = eval(case)?;
            Ok(CaseRecord {
                case,
                params: e.params,
                outcome: e.outcome,
                detail: e.detail,
                nodes: e.nodes,
                wall_ms: opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
            })
        })
        .collect()
}

fn skipped_report(experiment: &str, config: Value, reason: String) -> VerificationReport {
    VerificationReport {
        experiment: experiment.to_owned(),
        cases: vec![CaseRecord {
            case: 0,
            params: config.clone(),
            outcome: Outcome::Skipped,
            detail: json!({ "reason": reason }),
            nodes: 0,
            wall_ms: None,
        }],
        config,
    }
}

fn family_json(f: &SetFamily) -> Value {
    serde_json::to_value(f).expect("families serialize")
}

fn edge_json(e: EdgeSet) -> Value {
    json!(e.vertices().collect::<Vec<_>>())
}

/// The `size`-edge subfamilies of `all`, as index masks over its edge list.
fn subfamilies(all: &SetFamily, size: u32) -> impl Iterator<Item = SetFamily> + '_ {
    KSubsets::new(all.len() as u32, size).map(move |idx| {
        let edges = EdgeSet::from_mask(idx.mask())
            .vertices()
            .map(|i| all.edges()[i as usize - 1]);
        SetFamily::new(all.n(), all.k(), edges).expect("subfamily of a valid family")
    })
}

// ---------------------------------------------------------------- shadows

/// `|∂F| >= kk_bound(|F|, k)` for every family (exhaustive when
/// `binom(n,k) <= 20`) or for sampled families, one record per size `|F|`.
pub fn verify_kk(n: u32, k: u32, opts: &RunOptions) -> Result<VerificationReport> {
    if k == 0 {
        return Err(params("shadow bound needs k >= 1"));
    }
    let all = SetFamily::complete(n, k)?;
    let total = all.len() as u32;
    let exhaustive = opts.exhaustive(total <= 20, "2^binom(n,k)")?;
    let config = json!({ "n": n, "k": k, "exhaustive": exhaustive, "samples": opts.samples, "seed": opts.seed });

    let check = |f: &SetFamily| -> Result<(u128, u128)> {
        Ok((f.shadow()?.len() as u128, kk_bound(f.len() as u128, k)?))
    };
    let mut by_size: Vec<Vec<SetFamily>> = vec![Vec::new(); total as usize + 1];
    if !exhaustive {
        let sampled: Vec<SetFamily> = (0..opts.samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = case_rng(opts.seed, i);
                let m = rng.gen_range(1..=total as u128);
                random_family(&mut rng, n, k, m)
            })
            .collect::<Result<_>>()?;
        for f in sampled {
            by_size[f.len()].push(f);
        }
    }
    let by_size = &by_size;
    let cases = run_cases(total as u64 + 1, opts, |m| {
        let mut checked = 0u64;
        let mut worst: Option<(u128, SetFamily)> = None;
        let mut visit = |f: SetFamily| -> Result<()> {
            let (sh, _) = check(&f)?;
            checked += 1;
            if worst.as_ref().is_none_or(|w| sh < w.0) {
                worst = Some((sh, f));
            }
            Ok(())
        };
        if exhaustive {
            for f in subfamilies(&all, m as u32) {
                visit(f)?;
            }
        } else {
            for f in &by_size[m as usize] {
                visit(f.clone())?;
            }
        }
        let bound = kk_bound(m as u128, k)?;
        let params = json!({ "n": n, "k": k, "m": m });
        let Some((min_shadow, f)) = worst else {
            return Ok(Eval {
                params,
                outcome: Outcome::Skipped,
                detail: json!({ "reason": "no family of this size sampled" }),
                nodes: 0,
            });
        };
        let ok = min_shadow >= bound;
        let mut detail = json!({
            "families": checked,
            "min_shadow": min_shadow as u64,
            "bound": bound as u64,
        });
        if !ok {
            detail["counterexample"] = family_json(&f);
        }
        Ok(Eval {
            params,
            outcome: if ok { Outcome::Pass } else { Outcome::Fail },
            detail,
            nodes: checked,
        })
    })?;
    Ok(VerificationReport {
        experiment: "verify-kk".into(),
        config,
        cases,
    })
}

// ---------------------------------------------------------------- dichotomy

/// Result of testing the rainbow-matching / common-cover dichotomy on one
/// instance of `t + 1` families.
#[derive(Clone, Debug, PartialEq)]
pub struct DichotomyCheck {
    pub outcome: Outcome,
    /// `(i)`: a rainbow matching of size `t + 1`.
    pub matching: Option<Witness>,
    /// `(ii)`: a common cover of size `t`.
    pub cover: Option<Witness>,
    pub nodes: u64,
    pub note: Option<String>,
}

impl DichotomyCheck {
    fn detail(&self, inst: &RainbowInstance) -> Value {
        let mut d = json!({});
        if let Some(w) = &self.matching {
            d["matching"] =
                serde_json::to_value(w).expect("witness serializes")["matching"].clone();
        }
        if let Some(w) = &self.cover {
            d["cover"] = serde_json::to_value(w).expect("witness serializes")["cover"].clone();
        }
        if let Some(note) = &self.note {
            d["note"] = json!(note);
        }
        if self.outcome == Outcome::Fail {
            d["instance"] = serde_json::to_value(inst).expect("instance serializes");
            d["rainbow"] = json!("none");
            d["common_cover"] = json!("none");
        }
        d
    }
}

/// Decides whether `inst` admits a rainbow matching using every family or a
/// common cover of size `t`. Witnesses are re-validated independently; a
/// solver abort makes the case inconclusive even if a cover exists.
pub fn check_dichotomy(inst: &RainbowInstance, t: u32, budget: Budget) -> Result<DichotomyCheck> {
    let q = inst.q();
    let mut nodes = 0;
    let mut aborted = false;
    let matching = match rainbow_matching(inst, q, budget)? {
        Ok(s) => {
            nodes += s.nodes;
            s.value
        }
        Err(e) => {
            nodes += e.nodes;
            aborted = true;
            None
        }
    };
    if let Some(w) = &matching {
        if let Err(v) = validate::check_rainbow(inst, w, q) {
            return Ok(DichotomyCheck {
                outcome: Outcome::Fail,
                matching: Some(Witness::Matching(w.clone())),
                cover: None,
                nodes,
                note: Some(format!("invalid rainbow witness: {v}")),
            });
        }
    }
    let cover = if matching.is_none() {
        let s = common_cover(inst, t)?;
        nodes += s.nodes;
        s.value
    } else {
        None
    };
    if let Some(CoverWitness { cover: c }) = cover {
        if let Err(v) = validate::check_cover(inst, c, t) {
            return Ok(DichotomyCheck {
                outcome: Outcome::Fail,
                matching: None,
                cover: Some(Witness::Cover(CoverWitness { cover: c })),
                nodes,
                note: Some(format!("invalid cover witness: {v}")),
            });
        }
    }
    let outcome = if aborted {
        Outcome::Inconclusive
    } else if matching.is_some() || cover.is_some() {
        Outcome::Pass
    } else {
        Outcome::Fail
    };
    Ok(DichotomyCheck {
        outcome,
        matching: matching.map(Witness::Matching),
        cover: cover.map(Witness::Cover),
        nodes,
        note: aborted.then(|| "rainbow search exceeded the node budget".to_owned()),
    })
}

/// How the families of one sampled case are generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    /// Uniform `m`-subsets of `([n] choose k)`.
    Uniform,
    /// Uniform `m`-subsets of the star `H_k(t,n)`.
    StarSubset,
    /// An extremal family topped up with random outside edges.
    ExtremalPlus,
    /// Each family independently one of the above, or a star subset with a
    /// few edges swapped for outside edges.
    Mixed,
}

impl SampleKind {
    fn for_case(case: u64) -> Self {
        [
            SampleKind::Uniform,
            SampleKind::StarSubset,
            SampleKind::ExtremalPlus,
            SampleKind::Mixed,
        ][(case % 4) as usize]
    }
}

/// Draws one family of exactly `m` edges near the given extremal shapes.
fn adversarial_family(
    rng: &mut CaseRng,
    kind: SampleKind,
    n: u32,
    k: u32,
    m: usize,
    star_family: &SetFamily,
    extremal: &SetFamily,
) -> Result<SetFamily> {
    let near_star = |rng: &mut CaseRng| -> Result<SetFamily> {
        if star_family.len() >= m {
            random_subfamily(rng, star_family, m)
        } else {
            augment(rng, star_family, m - star_family.len())
        }
    };
    let near_extremal = |rng: &mut CaseRng| -> Result<SetFamily> {
        if extremal.len() >= m {
            random_subfamily(rng, extremal, m)
        } else {
            augment(rng, extremal, m - extremal.len())
        }
    };
    match kind {
        SampleKind::Uniform => random_family(rng, n, k, m as u128),
        SampleKind::StarSubset => near_star(rng),
        SampleKind::ExtremalPlus => near_extremal(rng),
        SampleKind::Mixed => match rng.gen_range(0..4) {
            0 => random_family(rng, n, k, m as u128),
            1 => near_star(rng),
            2 => near_extremal(rng),
            _ => {
                let swap = rng.gen_range(1..=3usize).min(m);
                let kept = random_subfamily(rng, star_family, (m - swap).min(star_family.len()))?;
                augment(rng, &kept, m - kept.len())
            }
        },
    }
}

/// Shared inputs of the sampled dichotomy experiments.
struct DichotomySetup {
    n: u32,
    k: u32,
    t: u32,
    m: usize,
    star_family: SetFamily,
    extremal: SetFamily,
}

impl DichotomySetup {
    fn case(&self, case: u64, opts: &RunOptions) -> Result<Eval> {
        let DichotomySetup { n, k, t, m, .. } = *self;
        let mut rng = case_rng(opts.seed, case);
        let kind = SampleKind::for_case(case);
        let families = (0..=t)
            .map(|_| adversarial_family(&mut rng, kind, n, k, m, &self.star_family, &self.extremal))
            .collect::<Result<Vec<_>>>()?;
        let inst = RainbowInstance::new(n, families)?;
        let check = check_dichotomy(&inst, t, opts.budget)?;
        Ok(Eval {
            params: json!({ "n": n, "k": k, "t": t, "m": m, "kind": kind }),
            outcome: check.outcome,
            detail: check.detail(&inst),
            nodes: check.nodes,
        })
    }
}

/// Samples `t + 1` families of size `threshold_hm(n,k,t,k) + 1` and checks
/// that each sample admits a rainbow matching or a common `t`-cover. Runs only
/// in the regime `n >= 2k^3 t`.
pub fn verify_dichotomy(n: u32, k: u32, t: u32, opts: &RunOptions) -> Result<VerificationReport> {
    let threshold = threshold_hm(n, k, t, k);
    let config = json!({
        "n": n, "k": k, "t": t, "samples": opts.samples, "seed": opts.seed,
        "budget": opts.budget.max_nodes, "threshold": threshold as i64,
    });
    let name = "verify-dichotomy";
    if t == 0 || k == 0 {
        return Ok(skipped_report(
            name,
            config,
            "precondition: t >= 1 and k >= 1".into(),
        ));
    }
    if (n as u64) < 2 * (k as u64).pow(3) * t as u64 {
        return Ok(skipped_report(
            name,
            config,
            format!(
                "precondition: n >= 2k^3 t fails ({n} < {})",
                2 * k.pow(3) * t
            ),
        ));
    }
    let m = (threshold + 1).max(0) as usize;
    if m as u128 > binom(n as i64, k as i64) {
        return Ok(skipped_report(
            name,
            config,
            "threshold exceeds binom(n,k)".into(),
        ));
    }
    let setup = DichotomySetup {
        n,
        k,
        t,
        m,
        star_family: star(n, k, t)?,
        extremal: hm_family(n, k, t)?,
    };
    let cases = run_cases(opts.samples, opts, |case| setup.case(case, opts))?;
    Ok(VerificationReport {
        experiment: name.into(),
        config,
        cases,
    })
}

// ---------------------------------------------------------------- extremal

/// Parameter ranges for [`verify_extremal`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtremalGrid {
    pub n: std::ops::RangeInclusive<u32>,
    pub k: std::ops::RangeInclusive<u32>,
    pub s: std::ops::RangeInclusive<u32>,
}

impl ExtremalGrid {
    fn points(&self) -> Vec<(u32, u32, u32)> {
        let mut out = Vec::new();
        for k in self.k.clone() {
            for s in self.s.clone() {
                for n in self.n.clone() {
                    out.push((n, k, s));
                }
            }
        }
        out
    }
}

/// For each grid point: the enumerated size of `H^(k)(n,s)` against its
/// closed form, its matching number against `s`, and that `s + 1` copies of
/// the star `H_k(s,n)` have no rainbow matching but share the cover `[s]`.
pub fn verify_extremal(grid: &ExtremalGrid, opts: &RunOptions) -> Result<VerificationReport> {
    if *grid.n.end() > 14 || *grid.k.end() > 4 || *grid.s.end() > 4 {
        return Err(params(
            "extremal grid is limited to n <= 14, k <= 4, s <= 4",
        ));
    }
    let points = grid.points();
    let cases = run_cases(points.len() as u64, opts, |case| {
        let (n, k, s) = points[case as usize];
        let params = json!({ "n": n, "k": k, "s": s });
        if k == 0 || s == 0 || n < s + k {
            return Ok(Eval {
                params,
                outcome: Outcome::Skipped,
                detail: json!({ "reason": "precondition: k, s >= 1 and n >= s + k" }),
                nodes: 0,
            });
        }
        let h = hm_family(n, k, s)?;
        let formula = threshold_hm(n, k, s, k);
        let (nu, mut nodes, aborted) = match max_matching(&h, opts.budget) {
            Ok(sol) => {
                validate::check_matching(&h, &sol.value)
                    .map_err(|v| crate::error::params(v.to_string()))?;
                (Some(sol.value.len() as u32), sol.nodes, false)
            }
            Err(e) => (None, e.nodes, true),
        };
        let stars = RainbowInstance::uniform_copies(&star(n, k, s)?, s as usize + 1);
        let rainbow = match rainbow_matching(&stars, s as usize + 1, opts.budget)? {
            Ok(sol) => {
                nodes += sol.nodes;
                Some(sol.value.is_some())
            }
            Err(e) => {
                nodes += e.nodes;
                None
            }
        };
        let cover_found = common_cover(&stars, s)?;
        nodes += cover_found.nodes;
        let prefix_covers = validate::check_cover(&stars, EdgeSet::prefix(s), s).is_ok();

        let mut failed = Vec::new();
        if h.len() as i128 != formula {
            failed.push("size");
        }
        if nu.is_some_and(|nu| nu != s) {
            failed.push("matching_number");
        }
        if rainbow == Some(true) {
            failed.push("star_rainbow");
        }
        if cover_found.value.is_none() || !prefix_covers {
            failed.push("star_cover");
        }
        let outcome = if !failed.is_empty() {
            Outcome::Fail
        } else if aborted || rainbow.is_none() {
            Outcome::Inconclusive
        } else {
            Outcome::Pass
        };
        let mut detail = json!({
            "size": h.len(),
            "formula": formula as i64,
            "nu": nu,
            "star_rainbow": rainbow,
            "star_cover": cover_found.value.map(|c| edge_json(c.cover)),
        });
        if !failed.is_empty() {
            detail["failed"] = json!(failed);
            detail["family"] = family_json(&h);
        }
        Ok(Eval {
            params,
            outcome,
            detail,
            nodes,
        })
    })?;
    Ok(VerificationReport {
        experiment: "verify-extremal".into(),
        config: json!({ "grid": grid }),
        cases,
    })
}

// ---------------------------------------------------------------- expansion

/// For `r`-uniform `F` with `|F| > threshold_hm(n,r,t,k)`, checks that the
/// `k`-uniform expansion satisfies `|G| > threshold_hm(n,k,t,k)`. One record
/// per family size; sizes at or below the hypothesis are skipped.
pub fn verify_expansion(
    n: u32,
    r: u32,
    k: u32,
    t: u32,
    opts: &RunOptions,
) -> Result<VerificationReport> {
    if r == 0 || k <= r || k > n {
        return Err(params("expansion needs 1 <= r < k <= n"));
    }
    let all = SetFamily::complete(n, r)?;
    let total = all.len() as u32;
    let exhaustive = opts.exhaustive(total <= 20, "2^binom(n,r)")?;
    let hyp = threshold_hm(n, r, t, k);
    let concl = threshold_hm(n, k, t, k);
    let config = json!({
        "n": n, "r": r, "k": k, "t": t, "exhaustive": exhaustive,
        "samples": opts.samples, "seed": opts.seed,
        "hypothesis_threshold": hyp as i64, "conclusion_threshold": concl as i64,
    });

    let mut sampled: Vec<Vec<SetFamily>> = vec![Vec::new(); total as usize + 1];
    let lowest = (hyp + 1).max(0) as u128;
    if !exhaustive && lowest <= total as u128 {
        let fams: Vec<SetFamily> = (0..opts.samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = case_rng(opts.seed, i);
                let m = rng.gen_range(lowest..=total as u128);
                random_family(&mut rng, n, r, m)
            })
            .collect::<Result<_>>()?;
        for f in fams {
            sampled[f.len()].push(f);
        }
    }
    let sampled = &sampled;
    let cases = run_cases(total as u64 + 1, opts, |m| {
        let params = json!({ "n": n, "r": r, "k": k, "t": t, "m": m });
        if (m as i128) <= hyp {
            return Ok(Eval {
                params,
                outcome: Outcome::Skipped,
                detail: json!({ "reason": "hypothesis unmet", "threshold": hyp as i64 }),
                nodes: 0,
            });
        }
        let mut checked = 0u64;
        let mut worst: Option<(usize, SetFamily)> = None;
        let mut visit = |f: SetFamily| -> Result<()> {
            let g = expand(&f, k)?.len();
            checked += 1;
            if worst.as_ref().is_none_or(|w| g < w.0) {
                worst = Some((g, f));
            }
            Ok(())
        };
        if exhaustive {
            for f in subfamilies(&all, m as u32) {
                visit(f)?;
            }
        } else {
            for f in &sampled[m as usize] {
                visit(f.clone())?;
            }
        }
        let Some((min_g, f)) = worst else {
            return Ok(Eval {
                params,
                outcome: Outcome::Skipped,
                detail: json!({ "reason": "no family of this size sampled" }),
                nodes: 0,
            });
        };
        let ok = min_g as i128 > concl;
        let mut detail =
            json!({ "families": checked, "min_expansion": min_g, "threshold": concl as i64 });
        if !ok {
            detail["counterexample"] = family_json(&f);
        }
        Ok(Eval {
            params,
            outcome: if ok { Outcome::Pass } else { Outcome::Fail },
            detail,
            nodes: checked,
        })
    })?;
    Ok(VerificationReport {
        experiment: "verify-expansion".into(),
        config,
        cases,
    })
}

// ---------------------------------------------------------------- cross-intersecting pairs

fn mors_bounds(n: u32, k: u32, l: u32) -> (i128, i128) {
    let (n, k, l) = (n as i64, k as i64, l as i64);
    let a = binom(n - 1, k - 1) as i128 - binom(n - 1 - l, k - 1) as i128 + 1;
    let b = binom(n - 1, l - 1) as i128 - binom(n - 1 - k, l - 1) as i128 + 1;
    (a, b)
}

/// Statistics for one `|A|` class of cross-intersecting pairs.
#[derive(Default)]
struct MorsTally {
    pairs: u64,
    skipped: u64,
    failure: Option<(SetFamily, SetFamily)>,
}

/// Cross-intersecting pairs `A ⊆ ([n] choose k)`, `B ⊆ ([n] choose l)` with
/// empty common intersection must satisfy one of the two size bounds.
///
/// Pairs with `A` or `B` empty are skipped: the common intersection over an
/// empty union is read literally as `[n]`, and with one side empty the
/// conclusion is vacuous.
pub fn verify_mors(n: u32, k: u32, l: u32, opts: &RunOptions) -> Result<VerificationReport> {
    if k == 0 || l == 0 || n < k + l {
        return Err(params("needs k, l >= 1 and n >= k + l"));
    }
    let a_all = SetFamily::complete(n, k)?;
    let b_all = SetFamily::complete(n, l)?;
    let (na, nb) = (a_all.len() as u32, b_all.len() as u32);
    let exhaustive = opts.exhaustive(na + nb <= 24, "2^binom(n,k) * 2^binom(n,l)")?;
    if na > 64 || nb > 64 {
        return Err(params("at most 64 sets per side"));
    }
    let (bound_a, bound_b) = mors_bounds(n, k, l);
    let config = json!({
        "n": n, "k": k, "l": l, "exhaustive": exhaustive,
        "samples": opts.samples, "seed": opts.seed,
        "bound_a": bound_a as i64, "bound_b": bound_b as i64,
    });
    // meets[i] = index mask of the l-sets meeting the i-th k-set
    let meets: Vec<u64> = a_all
        .iter()
        .map(|a| {
            b_all
                .iter()
                .enumerate()
                .filter(|(_, b)| b.intersects(*a))
                .fold(0u64, |acc, (j, _)| acc | 1 << j)
        })
        .collect();
    let full = EdgeSet::prefix(n).mask();
    let common = |edges: &[EdgeSet], idx: u64| -> u64 {
        EdgeSet::from_mask(idx)
            .vertices()
            .fold(full, |acc, i| acc & edges[i as usize - 1].mask())
    };
    let pick = |edges: &[EdgeSet], idx: u64| -> SetFamily {
        let n_edges = EdgeSet::from_mask(idx)
            .vertices()
            .map(|i| edges[i as usize - 1]);
        SetFamily::new(n, edges[0].len(), n_edges).expect("subfamily")
    };
    let judge = |a_idx: u64, b_idx: u64, tally: &mut MorsTally| {
        if a_idx == 0 || b_idx == 0 {
            tally.skipped += 1;
            return;
        }
        let a_common = common(a_all.edges(), a_idx);
        if a_common & common(b_all.edges(), b_idx) != 0 {
            tally.skipped += 1;
            return;
        }
        tally.pairs += 1;
        let (sa, sb) = (a_idx.count_ones() as i128, b_idx.count_ones() as i128);
        if sa > bound_a && sb > bound_b && tally.failure.is_none() {
            tally.failure = Some((pick(a_all.edges(), a_idx), pick(b_all.edges(), b_idx)));
        }
    };
    let allowed = |a_idx: u64| -> u64 {
        EdgeSet::from_mask(a_idx)
            .vertices()
            .fold(prefix(nb), |acc, i| acc & meets[i as usize - 1])
    };

    let cases = run_cases(na as u64 + 1, opts, |size_a| {
        let mut tally = MorsTally::default();
        if exhaustive {
            for a in KSubsets::new(na, size_a as u32) {
                let ok = allowed(a.mask());
                // every submask of `ok`, including the empty one
                let mut b = ok;
                loop {
                    judge(a.mask(), b, &mut tally);
                    if b == 0 {
                        break;
                    }
                    b = (b - 1) & ok;
                }
            }
        } else {
            let per_size = opts.samples / (na as u64 + 1) + 1;
            let mut rng = case_rng(opts.seed, size_a);
            for _ in 0..per_size {
                let ranks = crate::sampling::sample_ranks(&mut rng, na as u128, size_a as u128)?;
                let a = ranks.iter().fold(0u64, |acc, &r| acc | 1 << r);
                let ok = allowed(a);
                let b = ok & rng.gen::<u64>();
                judge(a, b, &mut tally);
            }
        }
        let params = json!({ "n": n, "k": k, "l": l, "size_a": size_a });
        let (outcome, mut detail) = if tally.pairs == 0 {
            (
                Outcome::Skipped,
                json!({ "reason": "no pair meets the hypothesis" }),
            )
        } else if tally.failure.is_some() {
            (Outcome::Fail, json!({}))
        } else {
            (Outcome::Pass, json!({}))
        };
        detail["pairs"] = json!(tally.pairs);
        detail["skipped_pairs"] = json!(tally.skipped);
        if let Some((a, b)) = &tally.failure {
            detail["counterexample"] = json!({ "a": family_json(a), "b": family_json(b) });
        }
        Ok(Eval {
            params,
            outcome,
            detail,
            nodes: tally.pairs + tally.skipped,
        })
    })?;
    Ok(VerificationReport {
        experiment: "verify-mors".into(),
        config,
        cases,
    })
}

fn prefix(bits: u32) -> u64 {
    crate::sets::prefix_mask(bits)
}

// ---------------------------------------------------------------- rainbow vs near-perfect

/// Random `k`-uniform instances of `q` families: rainbow matching exists iff
/// the padded lift has a near-perfect matching.
pub fn verify_rainpm(n: u32, k: u32, q: u32, opts: &RunOptions) -> Result<VerificationReport> {
    let config = json!({
        "n": n, "k": k, "q": q, "samples": opts.samples, "seed": opts.seed,
        "budget": opts.budget.max_nodes,
    });
    let name = "verify-rainpm";
    if k == 0 || q == 0 || (n as u64) < k as u64 * q as u64 {
        return Ok(skipped_report(
            name,
            config,
            "precondition: k, q >= 1 and n >= kq".into(),
        ));
    }
    let star_family = (q < n).then(|| star(n, k, q)).transpose()?;
    let universe = binom(n as i64, k as i64);
    let cases = run_cases(opts.samples, opts, |case| {
        let mut rng = case_rng(opts.seed, case);
        let kind = case % 3;
        let families = (0..q)
            .map(|_| match (kind, &star_family) {
                (1, Some(s)) => {
                    let m = rng.gen_range(0..=s.len());
                    random_subfamily(&mut rng, s, m)
                }
                (2, _) => {
                    let m = rng.gen_range(0..=universe.min(2 * q as u128));
                    random_family(&mut rng, n, k, m)
                }
                _ => random_family_any_size(&mut rng, n, k),
            })
            .collect::<Result<Vec<_>>>()?;
        let inst = RainbowInstance::new(n, families)?;
        let r = rainpm_equiv_check(&inst, opts.budget)?;
        let outcome = match r.status {
            Agreement::Agree => Outcome::Pass,
            Agreement::Disagree => Outcome::Fail,
            Agreement::Inconclusive => Outcome::Inconclusive,
        };
        if let Some(w) = &r.rainbow_witness {
            validate::check_rainbow(&inst, w, inst.q()).map_err(|v| params(v.to_string()))?;
        }
        let mut detail = json!({ "rainbow": r.rainbow, "near_perfect": r.near_perfect });
        if outcome == Outcome::Fail {
            detail["instance"] = serde_json::to_value(&inst).expect("instance serializes");
            detail["rainbow_witness"] = json!(r.rainbow_witness.map(Witness::Matching));
            detail["near_perfect_witness"] = json!(r.near_perfect_witness.map(Witness::Matching));
        }
        Ok(Eval {
            params: json!({ "n": n, "k": k, "q": q, "kind": kind }),
            outcome,
            detail,
            nodes: r.nodes,
        })
    })?;
    Ok(VerificationReport {
        experiment: name.into(),
        config,
        cases,
    })
}

// ---------------------------------------------------------------- stability conjecture

/// Meaning given to the undefined size terms of the rainbow stability
/// conjecture's threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conj6Interpretation {
    /// `max(|A_2^(k)(n,t)|, …, |A_k^(k)(n,t)|, |H^(k)(n,t)|)`, exact sizes.
    AFamiliesAndHm,
    /// `|H^(k)(n,t)|` alone.
    HmOnly,
    /// A caller-supplied threshold.
    Explicit(u64),
}

impl std::str::FromStr for Conj6Interpretation {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" | "a-families-and-hm" => Ok(Self::AFamiliesAndHm),
            "hm-only" => Ok(Self::HmOnly),
            other => other
                .parse()
                .map(Self::Explicit)
                .map_err(|_| crate::Error::Parse {
                    what: "interpretation",
                    reason: format!("{other:?}: expected default, hm-only or an integer"),
                }),
        }
    }
}

/// Named threshold terms with their sizes, and the names of undefined terms.
pub type Conj6Terms = (Vec<(String, u64)>, Vec<String>);

/// The threshold terms under an interpretation, with terms whose
/// construction is undefined at these parameters listed separately.
pub fn conj6_terms(n: u32, k: u32, t: u32, interp: Conj6Interpretation) -> Result<Conj6Terms> {
    let mut terms = Vec::new();
    let mut undefined = Vec::new();
    if let Conj6Interpretation::Explicit(v) = interp {
        terms.push(("explicit".to_owned(), v));
        return Ok((terms, undefined));
    }
    if interp == Conj6Interpretation::AFamiliesAndHm {
        for i in 2..=k {
            let name = format!("A_{i}");
            match a_family(n, k, t, i) {
                Ok(f) => terms.push((name, f.len() as u64)),
                Err(_) => undefined.push(name),
            }
        }
    }
    match hm_family(n, k, t) {
        Ok(f) => terms.push(("H".to_owned(), f.len() as u64)),
        Err(_) => undefined.push("H".to_owned()),
    }
    Ok((terms, undefined))
}

/// Sampled check of the rainbow stability conjecture above an interpreted
/// threshold. Failures are kept as evidence against the interpretation.
pub fn verify_conjecture6(
    n: u32,
    k: u32,
    t: u32,
    interp: Conj6Interpretation,
    opts: &RunOptions,
) -> Result<VerificationReport> {
    let name = "verify-conj6";
    let base = json!({ "n": n, "k": k, "t": t, "samples": opts.samples, "seed": opts.seed, "interpretation": interp });
    if k == 0 || t == 0 || (k as u64 * t as u64) >= n as u64 {
        return Ok(skipped_report(name, base, "precondition: kt < n".into()));
    }
    let (terms, undefined) = conj6_terms(n, k, t, interp)?;
    let mut config = base;
    config["terms"] = json!(terms
        .iter()
        .map(|(s, v)| json!({ "term": s, "size": v }))
        .collect::<Vec<_>>());
    config["undefined_terms"] = json!(undefined);
    let Some(threshold) = terms.iter().map(|t| t.1).max() else {
        return Ok(skipped_report(
            name,
            config,
            "no threshold term is defined".into(),
        ));
    };
    config["threshold"] = json!(threshold);
    let m = threshold as usize + 1;
    if m as u128 > binom(n as i64, k as i64) {
        return Ok(skipped_report(
            name,
            config,
            "threshold leaves no larger family".into(),
        ));
    }
    let star_family = star(n, k, t)?;
    // the largest defined construction serves as the extremal seed
    let extremal = if t + k <= n {
        hm_family(n, k, t)?
    } else {
        star_family.clone()
    };
    let setup = DichotomySetup {
        n,
        k,
        t,
        m,
        star_family,
        extremal,
    };
    let cases = run_cases(opts.samples, opts, |case| setup.case(case, opts))?;
    Ok(VerificationReport {
        experiment: name.into(),
        config,
        cases,
    })
}
