//! `selfsim`: nuclei, Moore diagrams, fixed-word counts and KMS states of
//! self-similar actions.

mod document;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::BigRational;
use serde_json::{json, Value};

use document::{parse_document, LoadedAction};
use selfsim::kms::{characterization_check, ground_check, kms_check, CheckReport, State};
use selfsim::{
    brute_force_counts, build_diagram, critical_limit_bounds, critical_value, dot_export,
    exact_equal, nucleus, stationary_subgraph, Algebra, Caps, DotOptions, EqualityOptions, Error,
    Evaluator, MealyAction, NucleusStatus, Sampler, SelfSimilarAction, Trace, TransferMatrix,
};

#[derive(Parser)]
#[command(
    name = "selfsim",
    version,
    about = "Exact computations for self-similar group actions"
)]
struct Cli {
    #[command(flatten)]
    source: Source,

    /// Cap on elements explored in one restriction closure.
    #[arg(long, global = true)]
    max_elems: Option<usize>,

    /// Cap on closure depth and contraction depth.
    #[arg(long, global = true)]
    max_depth: Option<usize>,

    /// Cap on outer iterations of the nucleus search.
    #[arg(long, global = true)]
    max_iterations: Option<usize>,

    /// Worker threads for parallel checks.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// A built-in action.
    #[arg(long, global = true, value_enum, conflicts_with = "action")]
    builtin: Option<Builtin>,

    /// An action document (Mealy machine or `{"type": "zd", ...}`).
    #[arg(long, global = true)]
    action: Option<PathBuf>,

    /// Alphabet size of the odometer.
    #[arg(long, global = true, default_value_t = 2)]
    n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    Odometer,
    Basilica,
    Grigorchuk,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the nucleus.
    Nucleus,
    /// Build the Moore diagram of the nucleus (or of given elements).
    Moore {
        /// Write DOT here instead of stdout.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Draw stationary edges in bold.
        #[arg(long)]
        highlight_stationary: bool,
        /// Use the closure of these elements instead of the nucleus.
        #[arg(long)]
        element: Vec<String>,
    },
    /// Count fixed words |G_g^k| and |F_g^k|.
    Count {
        #[arg(long)]
        element: String,
        #[arg(long)]
        k: u32,
        /// Also enumerate X^k directly and compare.
        #[arg(long)]
        oracle: bool,
    },
    /// The critical value c_g.
    Cg {
        #[arg(long)]
        element: String,
        /// Also report the bracketing bounds at this depth.
        #[arg(long)]
        bounds: Option<u64>,
    },
    /// Evaluate a KMS or ground state on a combination of terms.
    Kms(KmsArgs),
    /// Decide group relations.
    Relations {
        /// A relation `lhs = rhs`; defaults to the built-in's presentation.
        #[arg(long)]
        check: Vec<String>,
    },
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("kind").required(true).args(["r", "critical", "ground"]))]
struct KmsArgs {
    /// r = e^{-β} as P/Q, with 0 < r < 1/|X|.
    #[arg(long)]
    r: Option<String>,
    /// The critical state at r = 1/|X|.
    #[arg(long)]
    critical: bool,
    /// The ground state of the trace.
    #[arg(long)]
    ground: bool,
    #[arg(long, value_enum, default_value_t = TraceName::Dirac)]
    trace: TraceName,
    /// A combination such as `s[x] u[a b^-1] s*[x]`.
    #[arg(long)]
    term: String,
    /// Run this many random consistency checks.
    #[arg(long)]
    check: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceName {
    Dirac,
    Trivial,
    Critical,
}

impl TraceName {
    fn trace<E>(self) -> Trace<E> {
        match self {
            TraceName::Dirac => Trace::Dirac,
            TraceName::Trivial => Trace::Trivial,
            TraceName::Critical => Trace::Critical,
        }
    }
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Inconclusive(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Overflow { .. } | Error::Undecided(_) | Error::BudgetExceeded { .. } => {
                Failure::Inconclusive(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

struct Outcome {
    json: Option<Value>,
    text: Option<String>,
    inconclusive: bool,
}

impl Outcome {
    fn json(v: Value) -> Self {
        Outcome {
            json: Some(v),
            text: None,
            inconclusive: false,
        }
    }
}

fn rational(r: &BigRational) -> Value {
    Value::String(r.to_string())
}

fn report_json(r: &CheckReport) -> Value {
    json!({
        "checked": r.checked,
        "passed": r.passes(),
        "failures": r.failures.iter().take(10).map(|f| json!({
            "case": f.description,
            "lhs": rational(&f.lhs),
            "rhs": rational(&f.rhs),
        })).collect::<Vec<_>>(),
    })
}

fn parse_element<A: SelfSimilarAction>(action: &A, text: &str) -> Result<A::Element, Failure> {
    action
        .parse_element(text)
        .map_err(|e| Failure::Usage(format!("element {text:?}: {e}")))
}

fn run<A: SelfSimilarAction>(
    action: &A,
    builtin: Option<Builtin>,
    command: &Command,
    caps: &Caps,
) -> Result<Outcome, Failure> {
    match command {
        Command::Nucleus => {
            let r = nucleus(action, &action.generators(), caps);
            let verified = r.status == NucleusStatus::Verified;
            let certificates: Vec<Value> = r
                .certificates
                .iter()
                .map(|c| {
                    json!({
                        "left": r.names[c.left],
                        "right": r.names[c.right],
                        "depth": c.depth,
                    })
                })
                .collect();
            let max_depth = r.certificates.iter().map(|c| c.depth).max().unwrap_or(0);
            Ok(Outcome {
                json: Some(json!({
                    "status": if verified { "verified" } else { "inconclusive" },
                    "elements": r.names,
                    "size": r.elements.len(),
                    "certificates": certificates,
                    "max_certificate_depth": max_depth,
                    "iterations": r.iterations,
                    "reason": r.reason,
                    "caps": {
                        "max_elems": caps.max_elems,
                        "max_depth": caps.max_depth,
                        "max_iterations": caps.max_iterations,
                    },
                })),
                text: None,
                inconclusive: !verified,
            })
        }
        Command::Moore {
            dot,
            highlight_stationary,
            element,
        } => {
            let seeds = if element.is_empty() {
                let r = nucleus(action, &action.generators(), caps);
                if r.status != NucleusStatus::Verified {
                    return Err(Failure::Inconclusive(format!(
                        "nucleus not verified: {}",
                        r.reason.unwrap_or_default()
                    )));
                }
                r.elements
            } else {
                element
                    .iter()
                    .map(|e| parse_element(action, e))
                    .collect::<Result<_, _>>()?
            };
            let diagram = build_diagram(action, &seeds, caps)?;
            let text = dot_export(
                &diagram,
                &DotOptions {
                    highlight_stationary: *highlight_stationary,
                },
            );
            match dot {
                Some(path) => {
                    std::fs::write(path, &text).map_err(|e| {
                        Failure::Usage(format!("cannot write {}: {e}", path.display()))
                    })?;
                    Ok(Outcome::json(json!({
                        "vertices": diagram.names(),
                        "edges": diagram.edge_count(),
                        "stationary_edges": stationary_subgraph(&diagram).edge_count(),
                        "dot": path.display().to_string(),
                    })))
                }
                None => Ok(Outcome {
                    json: None,
                    text: Some(text),
                    inconclusive: false,
                }),
            }
        }
        Command::Count { element, k, oracle } => {
            let g = parse_element(action, element)?;
            let matrix = TransferMatrix::build(action, &g, caps)?;
            let (gk, fk) = matrix.counts(u64::from(*k));
            let mut out = json!({
                "element": action.format_element(&g),
                "k": k,
                "G": gk.to_string(),
                "F": fk.to_string(),
            });
            if *oracle {
                let opts = EqualityOptions {
                    caps: *caps,
                    ..EqualityOptions::default()
                };
                let (og, of) =
                    brute_force_counts(action, &g, *k, selfsim::counting::DEFAULT_BUDGET, &opts)?;
                if og != gk || of != fk {
                    return Err(Failure::Internal(format!(
                        "transfer matrix gives (G, F) = ({gk}, {fk}) but enumeration gives ({og}, {of})"
                    )));
                }
                out["oracle"] = json!({ "G": og.to_string(), "F": of.to_string(), "agrees": true });
            }
            Ok(Outcome::json(out))
        }
        Command::Cg { element, bounds } => {
            let g = parse_element(action, element)?;
            let c = critical_value(action, &g, caps)?;
            let mut out = json!({
                "element": action.format_element(&g),
                "c": rational(&c),
                "method": "linear-solve",
            });
            if let Some(k) = bounds {
                let (lo, hi) = critical_limit_bounds(action, &g, *k, caps)?;
                if lo > c || c > hi {
                    return Err(Failure::Internal(format!(
                        "c = {c} outside the depth-{k} bounds [{lo}, {hi}]"
                    )));
                }
                out["bounds"] = json!({
                    "k": k,
                    "lower": rational(&lo),
                    "upper": rational(&hi),
                    "method": "limit-bound",
                });
            }
            Ok(Outcome::json(out))
        }
        Command::Kms(args) => run_kms(action, args, caps),
        Command::Relations { check } => {
            let relations: Vec<String> = if check.is_empty() {
                default_relations(builtin).ok_or_else(|| {
                    Failure::Usage("no default relations; pass --check \"lhs = rhs\"".into())
                })?
            } else {
                check.clone()
            };
            let opts = EqualityOptions {
                caps: *caps,
                ..EqualityOptions::default()
            };
            let mut results = Vec::new();
            for rel in &relations {
                let (lhs, rhs) = rel
                    .split_once('=')
                    .ok_or_else(|| Failure::Usage(format!("relation {rel:?} has no '='")))?;
                let g = parse_element(action, lhs)?;
                let h = parse_element(action, rhs)?;
                let holds = exact_equal(action, &g, &h, &opts)?;
                results.push(json!({
                    "lhs": lhs.trim(),
                    "rhs": rhs.trim(),
                    "holds": holds,
                }));
            }
            Ok(Outcome::json(json!({ "relations": results })))
        }
    }
}

fn default_relations(builtin: Option<Builtin>) -> Option<Vec<String>> {
    let list: &[&str] = match builtin? {
        Builtin::Grigorchuk => &[
            "aa = e", "bb = e", "cc = e", "dd = e", "cd = b", "db = c", "bc = d",
        ],
        Builtin::Basilica => &["ab = ba", "ab^-1 = b^-1 a"],
        Builtin::Odometer => &["g g^-1 = e", "g = e"],
    };
    Some(list.iter().map(|s| s.to_string()).collect())
}

fn run_kms<A: SelfSimilarAction>(
    action: &A,
    args: &KmsArgs,
    caps: &Caps,
) -> Result<Outcome, Failure> {
    let algebra = Algebra::new(action, *caps);
    let combination = algebra.parse(&args.term)?;
    let trace: Trace<A::Element> = args.trace.trace();
    let (state, kind, r) = if let Some(text) = &args.r {
        let r: BigRational = text
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("invalid rational {text:?}; expected P/Q")))?;
        (
            State::gibbs(&algebra, r.clone(), trace.clone())?,
            "gibbs",
            Some(r),
        )
    } else if args.critical {
        let s = State::critical(&algebra);
        let r = s.r();
        (s, "critical", r)
    } else {
        (State::ground(&algebra, trace.clone()), "ground", None)
    };
    let value = state.evaluate(&combination)?;
    let mut out = json!({
        "state": kind,
        "term": algebra.format(&combination),
        "value": rational(&value),
    });
    if let Some(r) = &r {
        out["r"] = rational(r);
    }
    if kind != "critical" {
        out["trace"] = json!(trace.name());
    }
    let mut failed = false;
    if let Some(n) = args.check {
        let mut sampler = Sampler::new(args.seed);
        let pool = {
            let res = nucleus(action, &action.generators(), caps);
            if res.status == NucleusStatus::Verified {
                res.elements
            } else {
                Vec::new()
            }
        };
        let mut pairs = Vec::with_capacity(n);
        let mut terms = Vec::with_capacity(n);
        for _ in 0..n {
            let a = sampler.term(&algebra, &pool, 3)?;
            let b = sampler.term(&algebra, &pool, 3)?;
            pairs.push((a, b));
            terms.push(sampler.term(&algebra, &pool, 3)?);
        }
        let mut checks = serde_json::Map::new();
        match &r {
            Some(r) => {
                let kms = kms_check(&algebra, &state, r, &pairs)?;
                let ch = characterization_check(&algebra, &state, r, &terms)?;
                failed = !kms.passed() || !ch.passed();
                checks.insert("kms".into(), report_json(&kms));
                checks.insert("characterization".into(), report_json(&ch));
            }
            None => {
                let g = ground_check(&algebra, &state, &trace, &terms)?;
                failed = !g.passed();
                checks.insert("ground".into(), report_json(&g));
            }
        }
        out["checks"] = Value::Object(checks);
        out["seed"] = json!(args.seed);
    }
    if failed {
        emit(&format!(
            "{}\n",
            serde_json::to_string_pretty(&out).expect("serializable")
        ));
        return Err(Failure::Internal("state checks failed".into()));
    }
    Ok(Outcome::json(out))
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    let mut caps = Caps::default();
    let (action, builtin) = match (&cli.source.builtin, &cli.source.action) {
        (Some(b), None) => {
            let action = match b {
                Builtin::Odometer => LoadedAction::Mealy(MealyAction::odometer(cli.source.n)?),
                Builtin::Basilica => LoadedAction::Mealy(MealyAction::basilica()),
                Builtin::Grigorchuk => LoadedAction::Mealy(MealyAction::grigorchuk()),
            };
            (action, Some(*b))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            let doc = parse_document(&text)?;
            doc.caps.apply(&mut caps);
            if let Some(name) = &doc.name {
                eprintln!("loaded action {name}");
            }
            if let LoadedAction::Zd(z) = &doc.action {
                match z.is_dilation() {
                    Ok(true) => {}
                    Ok(false) => {
                        eprintln!("warning: matrix is not a dilation; closures may overflow")
                    }
                    Err(_) => {
                        eprintln!("warning: could not determine whether the matrix is a dilation")
                    }
                }
            }
            (doc.action, None)
        }
        _ => {
            return Err(Failure::Usage(
                "exactly one of --builtin or --action is required".into(),
            ))
        }
    };
    if let Some(v) = cli.max_elems {
        caps.max_elems = v;
    }
    if let Some(v) = cli.max_depth {
        caps.max_depth = v;
    }
    if let Some(v) = cli.max_iterations {
        caps.max_iterations = v;
    }
    match &action {
        LoadedAction::Mealy(a) => run(a, builtin, &cli.command, &caps),
        LoadedAction::Zd(a) => run(a, builtin, &cli.command, &caps),
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = std::panic::catch_unwind(|| dispatch(&cli));
    match result {
        Ok(Ok(outcome)) => {
            if let Some(v) = outcome.json {
                emit(&format!(
                    "{}\n",
                    serde_json::to_string_pretty(&v).expect("serializable")
                ));
            }
            if let Some(t) = outcome.text {
                emit(&t);
            }
            ExitCode::from(if outcome.inconclusive { 2 } else { 0 })
        }
        Ok(Err(Failure::Usage(m))) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Ok(Err(Failure::Inconclusive(m))) => {
            eprintln!("inconclusive: {m}");
            ExitCode::from(2)
        }
        Ok(Err(Failure::Internal(m))) => {
            eprintln!("internal error: {m}");
            ExitCode::from(3)
        }
        Err(_) => ExitCode::from(3),
    }
}
