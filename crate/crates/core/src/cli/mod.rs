//! Command-line front end: parsing, solving, checking, generation,
//! classification and benchmarking.
//!
//! Exit codes: 0 sat, 1 unsat, 2 unknown, 3 usage or parse error,
//! 4 internal invariant failure.

mod parse;

use std::io::{Read, Write};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use crate::arith::{ExtInt, Prime, Rational};
use crate::combine::solve_combined;
use crate::complete::SolveOptions;
use crate::error::{Error, Result};
use crate::geq::{solve_geq, GeqProblem};
use crate::leq::solve_leq;
use crate::linalg::QMatrix;
use crate::model::{
    classify_instance, instance_size, normalize, FragmentClass, Instance, PrimeFragment, Status, Verdict,
    Witness, WitnessValue,
};
use crate::testkit::random::{random_geq_problem, random_leq_problem, rng_from_seed};
use crate::testkit::{
    encode_coloring, random_instance, smith_oracle_geq, verify_witness_with_guard, FragmentKind, Graph,
    RandomParams,
};

pub use parse::{parse_instance, parse_witness, render_witness, serialize_instance};

pub const EXIT_USAGE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "padic", version, about = "Linear equations with p-adic valuation and order constraints")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Largest exponent magnitude materialized when checking witnesses.
    #[arg(long, global = true)]
    pub guard: Option<u64>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Instance file, or `-` for standard input.
    #[arg(conflicts_with = "expr", required_unless_present = "expr")]
    pub input: Option<String>,
    /// Instance text given inline.
    #[arg(short = 'e', long)]
    pub expr: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide an instance.
    Solve {
        #[command(flatten)]
        input: InputArgs,
        /// Print the witness.
        #[arg(long)]
        witness: bool,
        /// Lower valuation window for unbounded mixed components.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<BigInt>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Verify a witness file against an instance.
    Check {
        #[command(flatten)]
        input: InputArgs,
        /// File with `wit` lines, as printed by `solve --witness`.
        #[arg(long = "witness-file", short = 'w')]
        witness_file: String,
    },
    /// Report the fragment of every prime.
    Classify {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Emit a generated instance.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Decide a >= instance with the Smith normal form oracle.
    Oracle {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Time a polynomial solver on a doubling series.
    Bench {
        #[arg(long, value_enum, default_value_t = BenchFragment::Geq)]
        fragment: BenchFragment,
        /// Comma separated variable counts.
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32, 64])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        prime: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Colorability encoding of a graph.
    Coloring {
        /// `complete:N`, `cycle:N` or `random:N:PROB`.
        #[arg(long)]
        graph: String,
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        e: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Seeded random instance.
    Random {
        #[arg(long, value_enum, default_value_t = GenFragment::Geq)]
        fragment: GenFragment,
        #[arg(long, default_value_t = 4)]
        vars: usize,
        #[arg(long, default_value_t = 2)]
        eqs: usize,
        #[arg(long, default_value_t = 10)]
        coeff: i64,
        #[arg(long, default_value_t = 4)]
        bound: i64,
        #[arg(long, default_value_t = 3)]
        prime: u64,
        /// Build around a known solution.
        #[arg(long)]
        planted: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BenchFragment {
    Geq,
    Leq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenFragment {
    Geq,
    Leq,
    Hard,
}

impl From<GenFragment> for FragmentKind {
    fn from(f: GenFragment) -> Self {
        match f {
            GenFragment::Geq => FragmentKind::Geq,
            GenFragment::Leq => FragmentKind::Leq,
            GenFragment::Hard => FragmentKind::Hard,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&config, stdin, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code_for(&e)
        }
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Invariant(_) => EXIT_INTERNAL,
        _ => EXIT_USAGE,
    }
}

fn read_input(input: &InputArgs, stdin: &mut dyn Read) -> Result<String> {
    if let Some(text) = &input.expr {
        return Ok(text.replace("\\n", "\n").replace(';', "\n"));
    }
    match input.input.as_deref() {
        Some("-") | None => {
            let mut s = String::new();
            stdin
                .read_to_string(&mut s)
                .map_err(|e| Error::InvalidInput(format!("reading standard input: {e}")))?;
            Ok(s)
        }
        Some(path) => read_file(path),
    }
}

fn read_file(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{path}: {e}")))
}

fn io(e: std::io::Error) -> Error {
    Error::InvalidInput(format!("write failed: {e}"))
}

fn execute(config: &CliConfig, stdin: &mut dyn Read, out: &mut dyn Write) -> Result<i32> {
    let guard = config.guard.unwrap_or_else(crate::powersum::guard_from_env);
    match &config.command {
        Command::Solve {
            input,
            witness,
            window,
            threads,
        } => {
            let inst = parse_instance(&read_input(input, stdin)?)?;
            if *threads == 0 {
                return Err(Error::InvalidInput("--threads must be at least 1".into()));
            }
            let opts = SolveOptions {
                window: window.clone(),
                threads: *threads,
                ..SolveOptions::default()
            };
            let start = Instant::now();
            let verdict = solve_combined(&inst, &opts)?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            if let Some(w) = &verdict.witness {
                verify_witness_with_guard(&inst, w, guard)
                    .map_err(|v| Error::Invariant(format!("witness rejected: {v}")))?;
            }
            if config.json {
                let v = verdict_json(&inst, &verdict, *witness, ms);
                writeln!(out, "{v}").map_err(io)?;
            } else {
                write!(out, "{}", verdict_text(&inst, &verdict, *witness)).map_err(io)?;
            }
            Ok(verdict.status.exit_code())
        }
        Command::Check { input, witness_file } => {
            let inst = parse_instance(&read_input(input, stdin)?)?;
            let w = parse_witness(&read_file(witness_file)?)?;
            let res = verify_witness_with_guard(&inst, &w, guard);
            if config.json {
                let v = match &res {
                    Ok(()) => json!({"valid": true}),
                    Err(e) => json!({"valid": false, "violation": e.to_string()}),
                };
                writeln!(out, "{v}").map_err(io)?;
            } else {
                match &res {
                    Ok(()) => writeln!(out, "valid"),
                    Err(e) => writeln!(out, "invalid: {e}"),
                }
                .map_err(io)?;
            }
            Ok(if res.is_ok() { 0 } else { 1 })
        }
        Command::Classify { input } => {
            let inst = parse_instance(&read_input(input, stdin)?)?;
            inst.validate()?;
            let class = classify_instance(&inst);
            if config.json {
                let primes: Map<String, Value> = class
                    .per_prime
                    .iter()
                    .map(|(p, f)| {
                        (
                            p.to_string(),
                            json!({"fragment": f.name(), "complexity": f.complexity()}),
                        )
                    })
                    .collect();
                let v = json!({
                    "fragment": fragment_string(&class),
                    "primes": primes,
                    "orders": class.has_order,
                    "tractable": class.is_tractable(),
                });
                writeln!(out, "{v}").map_err(io)?;
            } else {
                if class.per_prime.is_empty() {
                    writeln!(out, "no valuation constraints: {}", PrimeFragment::None.label()).map_err(io)?;
                }
                for (p, f) in &class.per_prime {
                    writeln!(out, "p = {p}: {}", f.label()).map_err(io)?;
                }
                if class.has_order {
                    writeln!(out, "orders: yes").map_err(io)?;
                }
            }
            Ok(0)
        }
        Command::Gen { what } => {
            let inst = match what {
                GenCommand::Coloring { graph, p, e, seed } => {
                    let g = parse_graph(graph, *seed)?;
                    encode_coloring(&g, Prime::new(*p)?, *e)?
                }
                GenCommand::Random {
                    fragment,
                    vars,
                    eqs,
                    coeff,
                    bound,
                    prime,
                    planted,
                    seed,
                } => {
                    let params = RandomParams {
                        fragment: (*fragment).into(),
                        vars: *vars,
                        equations: *eqs,
                        coeff: *coeff,
                        bound: *bound,
                        prime: Prime::new(*prime)?,
                        planted: *planted,
                        ..RandomParams::default()
                    };
                    random_instance(*seed, &params)?
                }
            };
            write!(out, "{}", serialize_instance(&inst)).map_err(io)?;
            Ok(0)
        }
        Command::Oracle { input } => {
            let inst = parse_instance(&read_input(input, stdin)?)?;
            let prob = match geq_problem(&inst)? {
                Ok(prob) => prob,
                Err(detail) => {
                    writeln!(out, "unsat").map_err(io)?;
                    writeln!(out, "reason immediate_unsat: {detail}").map_err(io)?;
                    return Ok(Status::Unsat.exit_code());
                }
            };
            let status = if smith_oracle_geq(&prob, guard)? {
                Status::Sat
            } else {
                Status::Unsat
            };
            if config.json {
                writeln!(out, "{}", json!({"status": status.as_str(), "oracle": "smith"})).map_err(io)?;
            } else {
                writeln!(out, "{}", status.as_str()).map_err(io)?;
            }
            Ok(status.exit_code())
        }
        Command::Bench {
            fragment,
            sizes,
            reps,
            seed,
            prime,
        } => {
            let p = Prime::new(*prime)?;
            let rows = bench(*fragment, sizes, (*reps).max(1), *seed, p)?;
            if config.json {
                let series: Vec<Value> = rows
                    .iter()
                    .map(|r| json!({"n": r.n, "size": r.size, "time_ms": r.time_ms}))
                    .collect();
                writeln!(out, "{}", json!({"fragment": format!("{fragment:?}").to_lowercase(), "series": series}))
                    .map_err(io)?;
            } else {
                writeln!(out, "n size time_ms").map_err(io)?;
                for r in &rows {
                    writeln!(out, "{} {} {:.3}", r.n, r.size, r.time_ms).map_err(io)?;
                }
            }
            Ok(0)
        }
    }
}

fn parse_graph(spec: &str, seed: u64) -> Result<Graph> {
    let bad = || Error::InvalidInput(format!("graph '{spec}': expected complete:N, cycle:N or random:N:PROB"));
    let parts: Vec<&str> = spec.split(':').collect();
    let n: usize = parts.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    match (parts[0], parts.len()) {
        ("complete", 2) => Ok(Graph::complete(n)),
        ("cycle", 2) => Ok(Graph::cycle(n)),
        ("random", 3) => {
            let prob: f64 = parts[2].parse().map_err(|_| bad())?;
            if !(0.0..=1.0).contains(&prob) {
                return Err(bad());
            }
            Ok(Graph::random(n, prob, &mut rng_from_seed(seed)))
        }
        _ => Err(bad()),
    }
}

/// The `>=` problem of an order-free single-prime instance in the `>=` fragment.
fn geq_problem(inst: &Instance) -> Result<std::result::Result<GeqProblem, String>> {
    if !inst.orders.is_empty() {
        return Err(Error::OracleRefused("order constraints".into()));
    }
    let norm = match normalize(inst)? {
        Ok(n) => n,
        Err(imm) => return Ok(Err(imm.detail)),
    };
    let class = crate::model::classify(&norm);
    let (prime, profiles) = match (class.per_prime.iter().next(), class.multi_prime) {
        (Some((&p, &PrimeFragment::GeqP)), false) => (p, &norm.profiles[&p]),
        _ => return Err(Error::OracleRefused("needs a single prime in the >= fragment".into())),
    };
    let n = inst.num_vars();
    let a = QMatrix::from_rows(inst.equations.iter().map(|e| e.coeffs.clone()).collect(), n)?;
    Ok(Ok(GeqProblem {
        a,
        b: inst.equations.iter().map(|e| e.rhs.clone()).collect(),
        prime,
        lower: profiles.iter().map(|p| p.lower.clone()).collect(),
        exact: profiles.iter().map(|p| p.exact).collect(),
    }))
}

/// `p:NAME` per prime, comma separated, with `ord` when orders are present.
pub fn fragment_string(class: &FragmentClass) -> String {
    let mut parts: Vec<String> = class
        .per_prime
        .iter()
        .map(|(p, f)| format!("{p}:{}", f.name()))
        .collect();
    if parts.is_empty() {
        parts.push(PrimeFragment::None.name().to_string());
    }
    if class.has_order {
        parts.push("ord".into());
    }
    parts.join(",")
}

pub fn verdict_text(inst: &Instance, v: &Verdict, with_witness: bool) -> String {
    let mut s = format!("{}\n", v.status.as_str());
    s.push_str(&format!("fragment {}\n", fragment_string(&classify_instance(inst))));
    if v.message.is_empty() {
        s.push_str(&format!("reason {}\n", v.code.name()));
    } else {
        s.push_str(&format!("reason {}: {}\n", v.code.name(), v.message));
    }
    for d in &v.diagnostics {
        s.push_str(&format!("# {d}\n"));
    }
    if with_witness {
        if let Some(w) = &v.witness {
            s.push_str(&render_witness(w));
        }
    }
    s
}

fn rational_json(q: &Rational) -> Value {
    Value::String(format!("{}/{}", q.numer(), q.denom()))
}

fn int_json(k: &BigInt) -> Value {
    match i64::try_from(k) {
        Ok(k) => Value::from(k),
        Err(_) => Value::String(k.to_string()),
    }
}

/// JSON witness map; exponents beyond 64 bits are emitted as strings.
pub fn witness_json(w: &Witness) -> Value {
    let map: Map<String, Value> = w
        .iter()
        .map(|(name, value)| {
            let entry = match value {
                WitnessValue::Rational(q) => json!({"p": 1, "terms": [[rational_json(q), 0]]}),
                WitnessValue::PowerSum(s) => {
                    let terms: Vec<Value> = s
                        .terms()
                        .iter()
                        .map(|(a, c)| Value::Array(vec![rational_json(a), int_json(c)]))
                        .collect();
                    json!({"p": s.prime().get(), "terms": terms})
                }
            };
            (name.clone(), entry)
        })
        .collect();
    Value::Object(map)
}

pub fn verdict_json(inst: &Instance, v: &Verdict, with_witness: bool, time_ms: f64) -> Value {
    let mut obj = Map::new();
    obj.insert("status".into(), v.status.as_str().into());
    obj.insert("fragment".into(), fragment_string(&classify_instance(inst)).into());
    if with_witness {
        if let Some(w) = &v.witness {
            obj.insert("witness".into(), witness_json(w));
        }
    }
    obj.insert(
        "stats".into(),
        json!({"size": instance_size(inst), "time_ms": time_ms}),
    );
    obj.insert(
        "reason".into(),
        json!({"code": v.code.name(), "message": v.message, "diagnostics": v.diagnostics}),
    );
    Value::Object(obj)
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub n: usize,
    pub size: u64,
    pub time_ms: f64,
}

/// Wall time of a polynomial solver on random instances with `n` variables
/// and `n / 2` equations: each instance is timed as the fastest of three
/// runs, and the row reports the median over `reps` instances.
pub fn bench(fragment: BenchFragment, sizes: &[usize], reps: usize, seed: u64, p: Prime) -> Result<Vec<BenchRow>> {
    const RUNS: usize = 3;
    let mut rows = Vec::new();
    for &n in sizes {
        let m = (n / 2).max(1);
        let mut rng = rng_from_seed(seed ^ (n as u64).wrapping_mul(0x9e37_79b9));
        let mut times = Vec::with_capacity(reps);
        let mut size = 0;
        for _ in 0..reps {
            let mut best = f64::INFINITY;
            let inst = match fragment {
                BenchFragment::Geq => {
                    let prob = random_geq_problem(&mut rng, n, m, 50, 20, p, true);
                    for _ in 0..RUNS {
                        let start = Instant::now();
                        let _ = solve_geq(&prob)?;
                        best = best.min(start.elapsed().as_secs_f64() * 1e3);
                    }
                    geq_instance(&prob)
                }
                BenchFragment::Leq => {
                    let prob = random_leq_problem(&mut rng, n, m, 50, 20, p);
                    for _ in 0..RUNS {
                        let start = Instant::now();
                        let _ = solve_leq(&prob)?;
                        best = best.min(start.elapsed().as_secs_f64() * 1e3);
                    }
                    let mut inst = Instance::new((0..n).map(|j| format!("x{j}")));
                    for i in 0..m {
                        inst.add_equation(prob.a.row(i).to_vec(), prob.b[i].clone());
                    }
                    inst
                }
            };
            size = size.max(instance_size(&inst));
            times.push(best);
        }
        times.sort_by(|a, b| a.total_cmp(b));
        rows.push(BenchRow {
            n,
            size,
            time_ms: times[times.len() / 2],
        });
    }
    Ok(rows)
}

fn geq_instance(prob: &GeqProblem) -> Instance {
    let n = prob.a.cols();
    let mut inst = Instance::new((0..n).map(|j| format!("x{j}")));
    for i in 0..prob.a.rows() {
        inst.add_equation(prob.a.row(i).to_vec(), prob.b[i].clone());
    }
    for (j, c) in prob.lower.iter().enumerate() {
        if let ExtInt::Fin(c) = c {
            inst.add_valuation(prob.prime, j, crate::model::ValRel::Ge, c.clone());
        }
    }
    inst
}
