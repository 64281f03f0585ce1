use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use waring_core::decomp::{lee_elementary, monomial_product_decomposition, ryser_elementary};
use waring_core::engines::{
    approx_multilinear_sum, certify_nonnegative, certify_support_intersection, count_hamiltonian,
    count_set_partitions, count_simple_cycles, count_subgraphs_approx, count_subgraphs_exact, detect_multilinear_char2,
    exact_decomposition, permanent, ApproxConfig, CountReport, CycleConvention, DetectConfig,
};
use waring_core::formats::{
    parse_graph, parse_matrix, parse_set_system, parse_sparse_polynomial, parse_tree_decomposition,
};
use waring_core::genpoly::{cycle_poly, sparse_blackbox, Graph, TreeDecomposition};
use waring_core::oracle::{
    catalecticant, hankel_catalecticant_bound_check, hankel_support_polynomial, is_positive_multilinear,
    rank_lower_bound_check,
};
use waring_core::polycore::{format_rational, integer, parse_rational};
use waring_core::splitters::{
    hash_family_lower_bound, sample_verified_balanced, sample_verified_perfect, verify_balanced, verify_perfect,
    BalancedSpec, FunctionFamily, RangeShape,
};
use waring_core::{Error, Limits, Rational, SparsePolynomial};

#[derive(Parser, Debug)]
#[command(name = "waring", version, about = "Counting through Waring decompositions of elementary symmetric polynomials")]
struct Cli {
    /// Seed for every randomized step; drawn from entropy and echoed when absent.
    #[arg(long, global = true, env = "WARING_SEED")]
    seed: Option<u64>,
    /// Cap applied to every enumeration budget.
    #[arg(long, global = true)]
    budget: Option<u128>,
    /// Print `key: value` lines instead of JSON.
    #[arg(long, global = true)]
    human: bool,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GraphInput {
    /// Edge list, one 0-based `u v` pair per line.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    directed: bool,
    /// Vertex count when isolated vertices are not listed.
    #[arg(long)]
    vertices: Option<usize>,
}

#[derive(Args, Debug)]
struct Approx {
    /// Exact evaluation instead of sampling.
    #[arg(long, conflicts_with = "eps")]
    exact: bool,
    /// Relative accuracy of the sampled estimate.
    #[arg(long)]
    eps: Option<String>,
    /// Independent repetitions; the median is reported.
    #[arg(long, default_value_t = 1)]
    trials: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simple cycles of length d.
    CountCycles {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        d: usize,
        /// rooted-directed, directed-cycles or undirected-cycles.
        #[arg(long)]
        convention: Option<String>,
        #[command(flatten)]
        approx: Approx,
    },
    /// Subgraphs of the host isomorphic to a pattern.
    CountSub {
        #[arg(long)]
        pattern: PathBuf,
        #[command(flatten)]
        host: GraphInput,
        /// PACE tree decomposition of the pattern; min-degree heuristic otherwise.
        #[arg(long)]
        td: Option<PathBuf>,
        #[command(flatten)]
        approx: Approx,
    },
    /// Permanent of a square rational matrix.
    Permanent {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Hamiltonian cycles.
    Hamiltonian {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        convention: Option<String>,
    },
    /// Partitions of the ground set into k of the given sets.
    Partitions {
        #[arg(long)]
        sets: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// One-sided test for a multilinear monomial with an odd coefficient,
    /// over GF(2^m).
    DetectMultilinear {
        /// Sparse polynomial, one `coeff e_1 ... e_n` line per monomial.
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Field degree.
        #[arg(long)]
        m: Option<u32>,
    },
    /// Certifies that a polynomial has a multilinear monomial in its support.
    Certify {
        #[arg(long)]
        poly: PathBuf,
        /// One-sided error bound of the randomized test.
        #[arg(long, default_value = "1/4")]
        delta: String,
        /// Deterministic test valid for nonnegative coefficients.
        #[arg(long)]
        nonnegative: bool,
    },
    /// Samples and verifies a balanced or perfect splitter.
    SampleSplitter {
        #[arg(long)]
        n: usize,
        #[arg(long, required_unless_present = "perfect")]
        k: Option<usize>,
        #[arg(long, required_unless_present = "perfect")]
        l: Option<usize>,
        #[arg(long, default_value = "2")]
        delta: String,
        /// Perfect (n, d, n0, d0) splitter instead.
        #[arg(long, requires_all = ["d", "n0", "d0"])]
        perfect: bool,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        n0: Option<usize>,
        #[arg(long)]
        d0: Option<usize>,
        /// Write the family here instead of embedding it in the report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively verifies a family written by sample-splitter.
    VerifySplitter {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value = "2")]
        delta: String,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        d0: Option<usize>,
    },
    /// Lower bound on perfectly balanced hash families [n] -> [l].
    HashBound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
    },
    /// Expansion and catalecticant audits of the built-in decompositions.
    #[command(alias = "verify")]
    VerifyDecompositions {
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        #[arg(long, default_value_t = 4)]
        max_d: usize,
    },
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(PathBuf, std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::Budget { .. }) => 3,
            Failure::Core(
                Error::Domain(_) | Error::Parse { .. } | Error::Contract(_) | Error::TreeDecomposition(_) | Error::Json(_),
            )
            | Failure::Io(..) => 2,
            Failure::Core(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(path, e) => format!("cannot read {}: {e}", path.display()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Shared state of one invocation.
struct Context {
    seed: u64,
    limits: Limits,
    timing: bool,
    started: Instant,
}

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load_graph(input: &GraphInput) -> Outcome<Graph> {
    Ok(parse_graph(&read(&input.graph)?, input.directed, input.vertices)?)
}

fn rational_arg(text: &str, name: &str) -> Outcome<Rational> {
    parse_rational(text).map_err(|_| Failure::Core(Error::Domain(format!("--{name}: not a rational number: {text:?}"))))
}

fn convention_for(g: &Graph, flag: Option<&str>) -> Outcome<CycleConvention> {
    Ok(match flag {
        Some(text) => text.parse()?,
        None if g.is_directed() => CycleConvention::DirectedCycles,
        None => CycleConvention::UndirectedCycles,
    })
}

fn approx_config(ctx: &Context, approx: &Approx) -> Outcome<Option<ApproxConfig>> {
    if approx.exact {
        return Ok(None);
    }
    let eps = rational_arg(approx.eps.as_deref().unwrap_or("1/4"), "eps")?;
    let mut cfg = ApproxConfig::new(eps, ctx.seed);
    cfg.trials = approx.trials;
    Ok(Some(cfg))
}

fn divisor(convention: CycleConvention, d: usize) -> usize {
    match convention {
        CycleConvention::RootedDirected => 1,
        CycleConvention::DirectedCycles => d,
        CycleConvention::UndirectedCycles => 2 * d,
    }
}

fn count_report(ctx: &Context, r: &CountReport) -> Value {
    let mut obj = Map::new();
    obj.insert("value".into(), json!(format_rational(&r.value)));
    obj.insert("queries".into(), json!(r.queries));
    obj.insert("method".into(), json!(r.method));
    obj.insert("seed".into(), r.seed.map_or(Value::Null, |s| json!(s.to_string())));
    obj.insert("parameters".into(), json!(r.parameters));
    obj.insert("max_value_bits".into(), json!(r.max_value_bits));
    if ctx.timing {
        obj.insert("elapsed_ms".into(), json!(r.elapsed.as_secs_f64() * 1e3));
    }
    Value::Object(obj)
}

fn run(cli: &Cli, ctx: &Context) -> Outcome<Value> {
    match &cli.command {
        Command::CountCycles { input, d, convention, approx } => {
            let g = load_graph(input)?;
            let convention = convention_for(&g, convention.as_deref())?;
            match approx_config(ctx, approx)? {
                None => Ok(count_report(ctx, &count_simple_cycles(&g, *d, convention)?)),
                Some(cfg) => {
                    let mut r = approx_multilinear_sum(&cycle_poly(&g, *d)?, &cfg)?;
                    r.value /= integer(divisor(convention, *d));
                    r.method = "count_simple_cycles_approx".into();
                    r.parameters.insert("convention".into(), convention.to_string());
                    Ok(count_report(ctx, &r))
                }
            }
        }
        Command::CountSub { pattern, host, td, approx } => {
            let h = parse_graph(&read(pattern)?, host.directed, None)?;
            let g = load_graph(host)?;
            let td = match td {
                Some(path) => parse_tree_decomposition(&read(path)?)?.0,
                None => TreeDecomposition::min_degree(&h),
            };
            let r = match approx_config(ctx, approx)? {
                None => count_subgraphs_exact(&h, &g, &td, &ctx.limits)?,
                Some(cfg) => count_subgraphs_approx(&h, &g, &td, &cfg, &ctx.limits)?,
            };
            Ok(count_report(ctx, &r))
        }
        Command::Permanent { matrix } => Ok(count_report(ctx, &permanent(&parse_matrix(&read(matrix)?)?, &ctx.limits)?)),
        Command::Hamiltonian { input, convention } => {
            let g = load_graph(input)?;
            let convention = convention_for(&g, convention.as_deref())?;
            Ok(count_report(ctx, &count_hamiltonian(&g, convention, &ctx.limits)?))
        }
        Command::Partitions { sets, k } => {
            let s = parse_set_system(&read(sets)?, *k)?;
            Ok(count_report(ctx, &count_set_partitions(&s, &ctx.limits)?))
        }
        Command::DetectMultilinear { poly, trials, m } => {
            let cfg = DetectConfig { trials: *trials, seed: ctx.seed, m: *m };
            let f = sparse_blackbox(&parse_sparse_polynomial(&read(poly)?)?);
            let report = detect_multilinear_char2(&f, &cfg)?;
            Ok(json!({
                "method": "detect_multilinear_char2",
                "detected": report.detected,
                "trials_run": report.trials_run,
                "queries": report.queries,
                "field_degree": report.m,
                "seed": ctx.seed.to_string(),
            }))
        }
        Command::Certify { poly, delta, nonnegative } => {
            let p = parse_sparse_polynomial(&read(poly)?)?;
            let (g, kind) = exact_decomposition(p.nvars(), p.degree())?;
            let f = sparse_blackbox(&p);
            let mut out = json!({ "method": "certify", "decomposition": kind, "queries": g.rank_bound() });
            if *nonnegative {
                out["certified"] = json!(certify_nonnegative(&g, &f)?);
                out["mode"] = json!("nonnegative");
            } else {
                let delta = rational_arg(delta, "delta")?;
                out["certified"] = json!(certify_support_intersection(&g, &f, &delta, ctx.seed)?);
                out["mode"] = json!("randomized");
                out["delta"] = json!(format_rational(&delta));
                out["seed"] = json!(ctx.seed.to_string());
            }
            Ok(out)
        }
        Command::SampleSplitter { n, k, l, delta, perfect, d, n0, d0, out } => {
            let family = if *perfect {
                let (d, n0, d0) = (d.unwrap_or(0), n0.unwrap_or(0), d0.unwrap_or(0));
                sample_verified_perfect(*n, d, n0, d0, ctx.seed, &ctx.limits)?
            } else {
                let spec = BalancedSpec {
                    n: *n,
                    k: k.unwrap_or(0),
                    l: l.unwrap_or(0),
                    delta: rational_arg(delta, "delta")?,
                };
                sample_verified_balanced(&spec, ctx.seed, &ctx.limits)?
            };
            let text = family.to_json()?;
            let mut report = json!({
                "method": "sample_splitter",
                "size": family.len(),
                "verified": family.verified,
                "balance": family.balance.as_ref().map(format_rational),
                "seed": ctx.seed.to_string(),
            });
            match out {
                Some(path) => {
                    std::fs::write(path, &text).map_err(|e| Failure::Io(path.clone(), e))?;
                    report["family_file"] = json!(path.display().to_string());
                }
                None => report["family"] = serde_json::from_str(&text).map_err(Error::from)?,
            }
            Ok(report)
        }
        Command::VerifySplitter { family, k, delta, d, d0 } => {
            let fam = FunctionFamily::from_json(&read(family)?)?;
            match fam.range() {
                RangeShape::Flat(_) => {
                    let k = k.ok_or_else(|| Error::Domain("balanced families need --k".into()))?;
                    let delta = rational_arg(delta, "delta")?;
                    let r = verify_balanced(&fam, k, &delta, &ctx.limits)?;
                    Ok(json!({
                        "method": "verify_balanced",
                        "ok": r.ok,
                        "c": format_rational(&r.c),
                        "min": r.min,
                        "max": r.max,
                        "worst_ratio": r.worst_ratio.as_ref().map(format_rational),
                    }))
                }
                RangeShape::Product([t, _]) => {
                    let d0 = d0.ok_or_else(|| Error::Domain("perfect families need --d0".into()))?;
                    let d = d.unwrap_or(t * d0);
                    Ok(json!({ "method": "verify_perfect", "ok": verify_perfect(&fam, d, d0, &ctx.limits)? }))
                }
            }
        }
        Command::HashBound { n, k, l } => {
            let v = hash_family_lower_bound(*n, *k, *l)?;
            Ok(json!({ "method": "hash_family_lower_bound", "value": format_rational(&v) }))
        }
        Command::VerifyDecompositions { max_n, max_d } => verify_decompositions(*max_n, *max_d, &ctx.limits),
    }
}

fn verify_decompositions(max_n: usize, max_d: usize, limits: &Limits) -> Outcome<Value> {
    let mut checks = Vec::new();
    let mut all_ok = true;
    let mut record = |name: String, ok: bool| {
        all_ok &= ok;
        checks.push(json!({ "check": name, "ok": ok }));
    };
    for n in 1..=max_n {
        for d in 1..=n.min(max_d) {
            let target = SparsePolynomial::elementary(n, d);
            let mut built = vec![("ryser", ryser_elementary(n, d)?)];
            if d % 2 == 1 || n > d {
                built.push(("lee", lee_elementary(n, d)?));
            }
            if n == d {
                built.push(("monomial", monomial_product_decomposition(&vec![1; n])?));
            }
            for (name, dec) in built {
                let exact = dec.expand(limits)? == target;
                record(format!("{name}({n},{d}) expands to e_({n},{d})"), exact);
                if exact {
                    record(format!("{name}({n},{d}) term count bounds catalecticant ranks"), rank_lower_bound_check(&target, &dec, limits)?);
                }
            }
        }
    }
    let rank = catalecticant(&SparsePolynomial::elementary(3, 2), 1, 1, limits)?.rank();
    record(format!("rank Cat_(e_(3,2))(1,1) = {rank}"), rank == 3);
    for d in [2, 3] {
        record(format!("Hankel catalecticant bound d={d}"), hankel_catalecticant_bound_check(d, limits)?);
    }
    let nodes: Vec<Rational> = (0..6).map(integer).collect();
    let p = hankel_support_polynomial(6, 3, &nodes, limits)?;
    record("Hankel support polynomial positive at (6,3)".into(), is_positive_multilinear(&p));
    Ok(json!({ "method": "verify_decompositions", "ok": all_ok, "checks": checks }))
}

fn human(value: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = value {
        for (key, v) in map {
            let shown = match v {
                Value::String(s) => approximate(key, s).map_or_else(|| s.clone(), |a| format!("{s} (~{a})")),
                Value::Array(items) => items
                    .iter()
                    .map(|item| match (item.get("check"), item.get("ok")) {
                        (Some(c), Some(ok)) => format!("\n  [{}] {}", if ok == true { "ok" } else { "FAIL" }, c.as_str().unwrap_or("")),
                        _ => format!("\n  {item}"),
                    })
                    .collect(),
                other => other.to_string(),
            };
            out.push_str(&format!("{key}: {shown}\n"));
        }
    }
    out
}

/// Decimal rendering of a non-integral `"p/q"` value.
fn approximate(key: &str, s: &str) -> Option<String> {
    if key != "value" || !s.contains('/') {
        return None;
    }
    let r = parse_rational(s).ok()?;
    Some(format!("{:.6}", r.to_f64()?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let limits = cli.budget.map_or_else(Limits::default, Limits::uniform);
    let ctx = Context { seed: cli.seed.unwrap_or_else(rand::random), limits, timing: cli.timing, started: Instant::now() };
    match run(&cli, &ctx) {
        Ok(mut value) => {
            if ctx.timing {
                value["total_ms"] = json!(ctx.started.elapsed().as_secs_f64() * 1e3);
            }
            let text = if cli.human { human(&value) } else { format!("{value}\n") };
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}
