//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any of them fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rainstab::constructions::{hm_family, star, threshold_hm, PartiteHypergraph, RainbowInstance};
use rainstab::reductions::{closeness, relabel_partite};
use rainstab::sampling::{case_rng, random_family};
use rainstab::solver::{max_matching, rainbow_matching, Budget};
use rainstab::validate;
use rainstab::verify::{self, Mode, RunOptions, VerificationReport};
use rainstab::{binom, SetFamily};
use rand::Rng;

const SEED: u64 = 20_240_601;

type Check = Result<String, String>;
type Rerun = Box<dyn Fn() -> rainstab::Result<VerificationReport>>;
type Criterion = (u32, &'static str, fn() -> Check);

fn opts(samples: u64, mode: Mode) -> RunOptions {
    RunOptions {
        mode,
        samples,
        seed: SEED,
        ..RunOptions::default()
    }
}

fn clean(r: &VerificationReport) -> Check {
    let s = r.summary();
    if s.fail == 0 && s.inconclusive == 0 {
        Ok(format!(
            "{}: {} pass, {} skipped",
            r.experiment, s.pass, s.skipped
        ))
    } else {
        let first = r
            .failures()
            .next()
            .map(|c| c.params.to_string())
            .unwrap_or_default();
        Err(format!(
            "{}: {} fail, {} inconclusive (first failure {first})",
            r.experiment, s.fail, s.inconclusive
        ))
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    if took > limit {
        Err(format!("{what} took {took:?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

fn c1_kruskal_katona() -> Check {
    let start = Instant::now();
    let mut families = 0;
    let mut notes = Vec::new();
    for (n, k, expected) in [(5, 3, 1u64 << 10), (6, 3, 1 << 20)] {
        let r = verify::verify_kk(n, k, &opts(0, Mode::Exhaustive)).map_err(|e| e.to_string())?;
        let checked: u64 = r
            .cases
            .iter()
            .map(|c| c.detail["families"].as_u64().unwrap_or(0))
            .sum();
        if checked != expected {
            return Err(format!(
                "({n},{k}) checked {checked} families, expected {expected}"
            ));
        }
        families += checked;
        notes.push(clean(&r)?);
    }
    within(start, Duration::from_secs(300), "exhaustive runs")?;
    Ok(format!(
        "{families} families in {:.1?}; {}",
        start.elapsed(),
        notes.join("; ")
    ))
}

fn c2_extremal_tightness() -> Check {
    let mut deviations = Vec::new();
    let mut points = 0;
    for k in 2..=3u32 {
        for s in 1..=3u32 {
            for n in s + k..=12 {
                points += 1;
                let h = hm_family(n, k, s).map_err(|e| e.to_string())?;
                let formula = binom(n as i64, k as i64) as i128
                    - binom((n - s) as i64, k as i64) as i128
                    - binom((n - s - k) as i64, (k - 1) as i64) as i128
                    + 1;
                if h.len() as i128 != formula {
                    deviations.push(format!("size({n},{k},{s})={} vs {formula}", h.len()));
                }
                let nu = max_matching(&h, Budget::default())
                    .map_err(|e| e.to_string())?
                    .value
                    .len();
                if nu != s as usize {
                    deviations.push(format!("nu({n},{k},{s})={nu}"));
                }
            }
        }
    }
    if deviations.is_empty() {
        Ok(format!("{points} grid points, 0 deviations"))
    } else {
        Err(format!(
            "{} deviations over {points} points: {}",
            deviations.len(),
            deviations.join(", ")
        ))
    }
}

fn c3_dichotomy() -> Check {
    let t0 = threshold_hm(32, 2, 2, 2);
    if t0 != 34 {
        return Err(format!("threshold_hm(32,2,2,2) = {t0}, expected 34"));
    }
    let start = Instant::now();
    let r = verify::verify_dichotomy(32, 2, 2, &opts(1000, Mode::Sampled))
        .map_err(|e| e.to_string())?;
    within(start, Duration::from_secs(600), "1000 samples")?;
    if r.cases.iter().any(|c| c.params["m"] != 35) || r.summary().pass != 1000 {
        return Err("expected 1000 evaluated samples of size 35".into());
    }
    clean(&r)
}

fn c4_rainpm() -> Check {
    let mut notes = Vec::new();
    for (n, k, q, samples) in [(5, 2, 1, 10_000), (7, 2, 2, 2_000), (9, 3, 2, 1_000)] {
        let r = verify::verify_rainpm(n, k, q, &opts(samples, Mode::Sampled))
            .map_err(|e| e.to_string())?;
        if r.summary().pass != samples {
            clean(&r)?;
            return Err(format!(
                "({n},{k},{q}) evaluated {} of {samples}",
                r.summary().pass
            ));
        }
        notes.push(format!("({n},{k},{q}) {samples}/{samples}"));
    }
    Ok(format!("agreement {}", notes.join(", ")))
}

fn c5_expansion() -> Check {
    let r = verify::verify_expansion(6, 2, 3, 2, &opts(0, Mode::Exhaustive))
        .map_err(|e| e.to_string())?;
    let hyp = r.config["hypothesis_threshold"]
        .as_i64()
        .unwrap_or_default();
    let families: u64 = r
        .cases
        .iter()
        .filter_map(|c| c.detail["families"].as_u64())
        .sum();
    clean(&r).map(|s| format!("{s}; {families} families above threshold {hyp}"))
}

fn c6_mors() -> Check {
    let mut notes = Vec::new();
    for n in [4, 5] {
        let r =
            verify::verify_mors(n, 2, 2, &opts(0, Mode::Exhaustive)).map_err(|e| e.to_string())?;
        let pairs: u64 = r
            .cases
            .iter()
            .filter_map(|c| c.detail["pairs"].as_u64())
            .sum();
        clean(&r)?;
        notes.push(format!("({n},2,2) {pairs} qualifying pairs"));
    }
    Ok(format!("0 failures; {}", notes.join(", ")))
}

fn c7_oracles() -> Check {
    let mut solves = 0u64;
    for case in 0..10_000u64 {
        let mut rng = case_rng(SEED, case);
        let n = rng.gen_range(3..=8u32);
        let q = rng.gen_range(1..=4usize);
        let mixed = rng.gen_bool(0.25);
        let base_k = rng.gen_range(1..=3u32.min(n));
        let families: Vec<SetFamily> = (0..q)
            .map(|_| {
                let k = if mixed {
                    rng.gen_range(1..=3u32.min(n))
                } else {
                    base_k
                };
                let m = rng.gen_range(0..=binom(n as i64, k as i64).min(30));
                random_family(&mut rng, n, k, m).unwrap()
            })
            .collect();
        let product: u128 = families.iter().map(|f| f.len() as u128).product();
        if product > 1_000_000 {
            return Err(format!("case {case} exceeds the product bound"));
        }
        let inst = RainbowInstance::new(n, families).unwrap();
        let best = common::rainbow_max(&inst);
        for target in 1..=q {
            solves += 1;
            let found = rainbow_matching(&inst, target, Budget::default())
                .map_err(|e| e.to_string())?
                .map_err(|e| format!("case {case} aborted after {} nodes", e.nodes))?
                .value;
            if found.is_some() != (best >= target) {
                return Err(format!(
                    "case {case} target {target}: solver {} oracle max {best}",
                    found.is_some()
                ));
            }
            if let Some(w) = found {
                validate::check_rainbow(&inst, &w, target)
                    .map_err(|v| format!("case {case}: {v}"))?;
            }
        }
    }
    let mut families = 0u64;
    let mut check = |f: &SetFamily| -> Result<(), String> {
        families += 1;
        let w = max_matching(f, Budget::default())
            .map_err(|e| e.to_string())?
            .value;
        validate::check_matching(f, &w).map_err(|v| v.to_string())?;
        let nu = common::matching_number(f);
        if w.len() != nu {
            return Err(format!(
                "max_matching {} vs oracle {nu} on {}",
                w.len(),
                serde_json::to_string(f).unwrap()
            ));
        }
        Ok(())
    };
    for n in 1..=8u32 {
        for k in 1..=n {
            if binom(n as i64, k as i64) <= 15 {
                for f in common::all_families(n, k) {
                    check(&f)?;
                }
            } else {
                let mut rng = case_rng(SEED, (n * 10 + k) as u64);
                for _ in 0..2000 {
                    let m = rng.gen_range(0..=binom(n as i64, k as i64));
                    check(&random_family(&mut rng, n, k, m).unwrap())?;
                }
            }
        }
    }
    Ok(format!("{solves} rainbow solves on 10000 instances and {families} max-matching families agree with enumeration"))
}

fn c8_closeness() -> Check {
    let mut rng = case_rng(SEED, 8);
    for i in 0..100 {
        let n = rng.gen_range(2..=8u32);
        let k = rng.gen_range(1..=3u32.min(n));
        let q = rng.gen_range(1..=3usize);
        let h = common::random_partite(&mut rng, n, k, q);
        let r = closeness(&h, &h).map_err(|e| e.to_string())?;
        if r.c_value != 0 || !r.exact {
            return Err(format!("graph {i}: closeness to itself is {}", r.c_value));
        }
    }
    let lift = |f: SetFamily| rainstab::lift_rainbow(&RainbowInstance::uniform_copies(&f, 1));
    let complete = lift(SetFamily::complete(4, 2).unwrap());
    let star1 = lift(star(4, 2, 1).unwrap());
    let c = closeness(&complete, &star1)
        .map_err(|e| e.to_string())?
        .c_value;
    if c != 3 {
        return Err(format!("complete vs star gave {c}"));
    }
    for i in 0..40 {
        let n = rng.gen_range(2..=7u32);
        let k = rng.gen_range(1..=2u32.min(n));
        let q = rng.gen_range(1..=3usize);
        let h1 = common::random_partite(&mut rng, n, k, q);
        let h2 = common::random_partite(&mut rng, n, k, q);
        let sigma = common::random_permutation(&mut rng, n as usize);
        let pi = common::random_permutation(&mut rng, q);
        let moved = relabel_partite(&h1, &sigma);
        let colors = pi
            .iter()
            .map(|&j| moved.color(j as usize).clone())
            .collect();
        let shuffled = PartiteHypergraph::new(n, colors, moved.label()).unwrap();
        let a = closeness(&h1, &h2).map_err(|e| e.to_string())?.c_value;
        let b = closeness(&shuffled, &h2)
            .map_err(|e| e.to_string())?
            .c_value;
        if a != b {
            return Err(format!("pair {i}: {a} before relabeling, {b} after"));
        }
    }
    Ok(
        "self-closeness 0 on 100 graphs, complete vs star = 3, invariant on 40 relabeled pairs"
            .into(),
    )
}

fn c9_determinism() -> Check {
    let runs: [(&str, Rerun); 5] = [
        (
            "kk",
            Box::new(|| verify::verify_kk(5, 3, &opts(0, Mode::Exhaustive))),
        ),
        (
            "kk-sampled",
            Box::new(|| verify::verify_kk(12, 3, &opts(500, Mode::Sampled))),
        ),
        (
            "dichotomy",
            Box::new(|| verify::verify_dichotomy(32, 2, 2, &opts(200, Mode::Sampled))),
        ),
        (
            "rainpm",
            Box::new(|| verify::verify_rainpm(7, 2, 2, &opts(300, Mode::Sampled))),
        ),
        (
            "conj6",
            Box::new(|| {
                verify::verify_conjecture6(
                    7,
                    2,
                    2,
                    verify::Conj6Interpretation::AFamiliesAndHm,
                    &opts(200, Mode::Sampled),
                )
            }),
        ),
    ];
    for (name, run) in &runs {
        let a = run().map_err(|e| e.to_string())?.to_jsonl();
        let b = run().map_err(|e| e.to_string())?.to_jsonl();
        if a != b {
            return Err(format!("{name}: reruns differ"));
        }
    }
    let other_seed = verify::verify_rainpm(
        7,
        2,
        2,
        &RunOptions {
            seed: SEED + 1,
            ..opts(300, Mode::Sampled)
        },
    )
    .map_err(|e| e.to_string())?
    .to_jsonl();
    let same = verify::verify_rainpm(7, 2, 2, &opts(300, Mode::Sampled))
        .map_err(|e| e.to_string())?
        .to_jsonl();
    if other_seed == same {
        return Err("seed has no effect on sampled cases".into());
    }
    Ok(format!(
        "{} experiments byte-identical on rerun",
        runs.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            1,
            "Kruskal-Katona exhaustive (5,3) and (6,3)",
            c1_kruskal_katona,
        ),
        (
            2,
            "extremal family size and matching number",
            c2_extremal_tightness,
        ),
        (3, "dichotomy at (32,2,2), 1000 samples", c3_dichotomy),
        (4, "rainbow vs near-perfect equivalence", c4_rainpm),
        (5, "expansion threshold (6,2,3,2) exhaustive", c5_expansion),
        (6, "cross-intersecting bounds (4,2,2), (5,2,2)", c6_mors),
        (7, "solver vs brute-force oracles", c7_oracles),
        (8, "closeness sanity", c8_closeness),
        (9, "determinism", c9_determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        let label = format!("criterion {id}");
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|f| label.contains(f.as_str()) || name.contains(f.as_str()))
        {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {label}: {name} ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {label}: {name} ({secs:.1}s) {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
