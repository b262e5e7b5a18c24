use std::fs;
use std::io::{self, Read, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rainstab::constructions::{
    a_family, expand, hm_family, lift_near_perfect, lift_rainbow, star, star_lift,
    star_near_perfect, threshold_em, threshold_hm, PartiteHypergraph, RainbowInstance,
};
use rainstab::reductions::{closeness, rainpm_equiv_check};
use rainstab::solver::{
    common_cover, max_matching, max_matching_partite, near_perfect_check, rainbow_matching, Budget,
    BudgetExceeded, Witness, DEFAULT_BUDGET,
};
use rainstab::verify::{
    self, Conj6Interpretation, ExtremalGrid, Mode, RunOptions, VerificationReport,
};
use rainstab::SetFamily;

/// Exit status for usage and input errors; 1 is reserved for failed or
/// inconclusive verification runs.
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "rainstab",
    version,
    about = "Rainbow matchings, extremal constructions and their verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a construction and print it as JSON.
    Construct(ConstructArgs),
    /// Run a solver on a JSON instance.
    Solve(SolveArgs),
    /// Shadow lower bound over all or sampled families.
    VerifyKk(VerifyArgs),
    /// Rainbow matching or common cover above the threshold (n >= 2k^3 t).
    VerifyDichotomy(VerifyArgs),
    /// Sizes and matching numbers of the extremal families over a grid.
    VerifyExtremal(ExtremalArgs),
    /// Threshold transfer from r-uniform families to their expansions.
    VerifyExpansion(ExpansionArgs),
    /// Size bounds for cross-intersecting pairs.
    VerifyMors(MorsArgs),
    /// Rainbow matching versus near-perfect matching of the padded lift.
    VerifyRainpm(VerifyArgs),
    /// Sampled stability-conjecture dichotomy under an interpreted threshold.
    VerifyConj6(Conj6Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Star,
    Hm,
    A,
    Complete,
    Expand,
    LiftRainbow,
    LiftNearPerfect,
    StarLift,
    StarNearPerfect,
    Threshold,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    t: Option<u32>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    i: Option<u32>,
    /// Edge size of the family being measured (`threshold`), defaults to k.
    #[arg(long)]
    r: Option<u32>,
    /// Input JSON for `expand` and the lifts (`-` for stdin).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    MaxMatching,
    Rainbow,
    Cover,
    NearPerfect,
    Closeness,
    Rainpm,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(value_enum)]
    problem: Problem,
    /// Instance JSON (`-` for stdin).
    #[arg(long, default_value = "-")]
    input: PathBuf,
    /// Second partite hypergraph for `closeness`.
    #[arg(long)]
    other: Option<PathBuf>,
    /// Matching target (`rainbow`, defaults to the number of families) or
    /// cover size (`cover`).
    #[arg(long)]
    t: Option<u32>,
    #[arg(long, env = "RAINSTAB_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "RAINSTAB_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Case records go here (stdout by default); the summary goes to
    /// `<out>.summary.csv`, or stderr without `--out`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Enumerate every instance; an error if the space is too large.
    #[arg(long, conflicts_with = "sampled")]
    exhaustive: bool,
    /// Sample even when exhaustive enumeration would be feasible.
    #[arg(long)]
    sampled: bool,
    /// Add wall-clock milliseconds to every record.
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            mode: if self.exhaustive {
                Mode::Exhaustive
            } else if self.sampled {
                Mode::Sampled
            } else {
                Mode::Auto
            },
            samples: self.samples,
            seed: self.seed,
            budget: Budget::new(self.budget),
            timing: self.timing,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    /// Cover size (`verify-dichotomy`).
    #[arg(long)]
    t: Option<u32>,
    /// Number of families (`verify-rainpm`).
    #[arg(long)]
    q: Option<u32>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ExtremalArgs {
    /// Value or inclusive range `a..b`.
    #[arg(long, value_parser = parse_range, default_value = "3..12")]
    n: RangeInclusive<u32>,
    #[arg(long, value_parser = parse_range, default_value = "2..3")]
    k: RangeInclusive<u32>,
    #[arg(long, value_parser = parse_range, default_value = "1..3")]
    s: RangeInclusive<u32>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ExpansionArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    r: u32,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    t: u32,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct MorsArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    l: u32,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Conj6Args {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    t: u32,
    /// `default`, `hm-only`, or an explicit integer threshold.
    #[arg(long, default_value = "default")]
    interpretation: Conj6Interpretation,
    #[command(flatten)]
    common: Common,
}

fn parse_range(s: &str) -> Result<RangeInclusive<u32>, String> {
    let parse = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("{x:?}: {e}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            Ok(parse(a)?..=parse(b)?)
        }
        None => {
            let v = parse(s)?;
            Ok(v..=v)
        }
    }
}

type CliResult<T> = Result<T, String>;

fn need(v: Option<u32>, flag: &str) -> CliResult<u32> {
    v.ok_or_else(|| format!("--{flag} is required"))
}

fn read_input(path: &Path) -> CliResult<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| e.to_string())?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| format!("invalid {what}: {e}"))
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    }
}

fn emit(out: Option<&Path>, v: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| e.to_string())?;
    text.push('\n');
    write_output(out, &text)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialize")
}

fn lib<T>(r: rainstab::Result<T>) -> CliResult<T> {
    r.map_err(|e| e.to_string())
}

fn construct(a: &ConstructArgs) -> CliResult<Value> {
    let n = || need(a.n, "n");
    let k = || need(a.k, "k");
    let s = || need(a.s.or(a.t), "s");
    let input = || read_input(a.input.as_deref().unwrap_or(Path::new("-")));
    Ok(match a.kind {
        Kind::Star => to_value(&lib(star(n()?, k()?, s()?))?),
        Kind::Hm => to_value(&lib(hm_family(n()?, k()?, s()?))?),
        Kind::A => to_value(&lib(a_family(n()?, k()?, s()?, need(a.i, "i")?))?),
        Kind::Complete => to_value(&lib(SetFamily::complete(n()?, k()?))?),
        Kind::Expand => {
            let f: SetFamily = parse_json(&input()?, "family")?;
            to_value(&lib(expand(&f, k()?))?)
        }
        Kind::LiftRainbow => {
            let inst: RainbowInstance = parse_json(&input()?, "instance")?;
            to_value(&lift_rainbow(&inst))
        }
        Kind::LiftNearPerfect => {
            let inst: RainbowInstance = parse_json(&input()?, "instance")?;
            let k = match a.k {
                Some(k) => k,
                None => inst
                    .uniformity()
                    .ok_or("--k is required for a non-uniform instance")?,
            };
            to_value(&lib(lift_near_perfect(&inst, k))?)
        }
        Kind::StarLift => to_value(&lib(star_lift(n()?, k()?, need(a.q, "q")? as usize, s()?))?),
        Kind::StarNearPerfect => to_value(&lib(star_near_perfect(
            n()?,
            k()?,
            need(a.q, "q")? as usize,
            s()?,
        ))?),
        Kind::Threshold => {
            let (n, k, t) = (n()?, k()?, need(a.t.or(a.s), "t")?);
            let r = a.r.unwrap_or(k);
            json!({
                "n": n, "k": k, "r": r, "t": t,
                "threshold_hm": threshold_hm(n, r, t, k) as i64,
                "threshold_em": threshold_em(n, r, t) as i64,
            })
        }
    })
}

fn solved_json<T>(
    r: Result<rainstab::solver::Solved<T>, BudgetExceeded>,
    found: impl FnOnce(T) -> Option<Value>,
) -> Value {
    match r {
        Err(e) => json!({ "status": "budget_exceeded", "nodes": e.nodes }),
        Ok(s) => {
            let nodes = s.nodes;
            match found(s.value) {
                Some(mut v) => {
                    v["status"] = json!("found");
                    v["nodes"] = json!(nodes);
                    v
                }
                None => json!({ "status": "none", "nodes": nodes }),
            }
        }
    }
}

fn solve(a: &SolveArgs) -> CliResult<Value> {
    let budget = Budget::new(a.budget);
    let text = read_input(&a.input)?;
    let witness = |w: Witness| to_value(&w);
    Ok(match a.problem {
        Problem::MaxMatching => {
            let raw: Value = parse_json(&text, "JSON")?;
            if raw.get("edges").is_some() {
                let f: SetFamily = parse_json(&text, "family")?;
                solved_json(max_matching(&f, budget), |w| {
                    let size = w.len();
                    let mut v = witness(Witness::Matching(w));
                    v["size"] = json!(size);
                    Some(v)
                })
            } else {
                let h: PartiteHypergraph = parse_json(&text, "partite hypergraph")?;
                solved_json(max_matching_partite(&h, budget), |w| {
                    let size = w.len();
                    let mut v = witness(Witness::Matching(w));
                    v["size"] = json!(size);
                    Some(v)
                })
            }
        }
        Problem::Rainbow => {
            let inst: RainbowInstance = parse_json(&text, "instance")?;
            let target = a.t.map_or(inst.q(), |t| t as usize);
            solved_json(lib(rainbow_matching(&inst, target, budget))?, |w| {
                w.map(|w| witness(Witness::Matching(w)))
            })
        }
        Problem::Cover => {
            let inst: RainbowInstance = parse_json(&text, "instance")?;
            let s = lib(common_cover(&inst, need(a.t, "t")?))?;
            solved_json(Ok(s), |w| w.map(|w| witness(Witness::Cover(w))))
        }
        Problem::NearPerfect => {
            let h: PartiteHypergraph = parse_json(&text, "partite hypergraph")?;
            solved_json(lib(near_perfect_check(&h, budget))?, |np| {
                let mut v = np
                    .witness
                    .map_or(json!({}), |w| witness(Witness::Matching(w)));
                v["holds"] = json!(np.holds);
                v["target"] = json!(np.target);
                Some(v)
            })
        }
        Problem::Closeness => {
            let h1: PartiteHypergraph = parse_json(&text, "partite hypergraph")?;
            let other = a.other.as_deref().ok_or("--other is required")?;
            let h2: PartiteHypergraph = parse_json(&read_input(other)?, "partite hypergraph")?;
            to_value(&lib(closeness(&h1, &h2))?)
        }
        Problem::Rainpm => {
            let inst: RainbowInstance = parse_json(&text, "instance")?;
            let r = lib(rainpm_equiv_check(&inst, budget))?;
            json!({
                "rainbow": r.rainbow,
                "near_perfect": r.near_perfect,
                "status": format!("{:?}", r.status).to_lowercase(),
                "nodes": r.nodes,
            })
        }
    })
}

fn report(common: &Common, r: rainstab::Result<VerificationReport>) -> CliResult<bool> {
    let r = lib(r)?;
    let body = match common.format {
        Format::Json => r.to_jsonl(),
        Format::Csv => r.to_csv(),
    };
    write_output(common.out.as_deref(), &body)?;
    let summary = r.summary_csv();
    match &common.out {
        Some(p) => {
            let mut path = p.clone().into_os_string();
            path.push(".summary.csv");
            fs::write(&path, &summary).map_err(|e| e.to_string())?;
        }
        None => eprint!("{summary}"),
    }
    Ok(r.is_success())
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Construct(a) => emit(a.out.as_deref(), &construct(&a)?).map(|_| true),
        Command::Solve(a) => emit(a.out.as_deref(), &solve(&a)?).map(|_| true),
        Command::VerifyKk(a) => report(&a.common, verify::verify_kk(a.n, a.k, &a.common.options())),
        Command::VerifyDichotomy(a) => {
            let t = need(a.t, "t")?;
            report(
                &a.common,
                verify::verify_dichotomy(a.n, a.k, t, &a.common.options()),
            )
        }
        Command::VerifyRainpm(a) => {
            let q = need(a.q, "q")?;
            report(
                &a.common,
                verify::verify_rainpm(a.n, a.k, q, &a.common.options()),
            )
        }
        Command::VerifyExtremal(a) => {
            let grid = ExtremalGrid {
                n: a.n,
                k: a.k,
                s: a.s,
            };
            report(
                &a.common,
                verify::verify_extremal(&grid, &a.common.options()),
            )
        }
        Command::VerifyExpansion(a) => report(
            &a.common,
            verify::verify_expansion(a.n, a.r, a.k, a.t, &a.common.options()),
        ),
        Command::VerifyMors(a) => report(
            &a.common,
            verify::verify_mors(a.n, a.k, a.l, &a.common.options()),
        ),
        Command::VerifyConj6(a) => report(
            &a.common,
            verify::verify_conjecture6(a.n, a.k, a.t, a.interpretation, &a.common.options()),
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
