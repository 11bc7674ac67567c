//! Argument parsing and subcommand dispatch for the `zsl` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use zsl_core::atoms::{davenport, enumerate_atoms, set_cache_dir};
use zsl_core::constructions::{build_construction, classify_maxlen_atom, gen_maxlen_atoms_rank2, ConstructionSpec};
use zsl_core::factorize::{
    catenary_degree, enumerate_factorizations, lengths_with_budget, min_delta_support, rho_k, LengthSet, MinDelta,
    DEFAULT_STATE_BUDGET, RHO_BUDGET,
};
use zsl_core::lengthsets::{
    classify_aamp, classify_aamp_with_period, contains_length_set, delta_star, MEMBERSHIP_BUDGET,
};
use zsl_core::sequence::SequenceJson;
use zsl_core::{Error, FiniteAbelianGroup, GroupElement, Sequence};

use crate::verify::{verify_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "zsl", version, about = "Factorization invariants of zero-sum sequences over finite abelian groups")]
struct Cli {
    /// Group literal such as C3xC6.
    #[arg(long, global = true)]
    group: Option<String>,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Directory of the on-disk atom cache (ZSL_CACHE takes precedence).
    #[arg(long, global = true, value_name = "DIR")]
    cache: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// State budget for the length-set dynamic program.
    #[arg(long = "budget-states", global = true, value_name = "N")]
    budget_states: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SeqArg {
    /// Sequence literal `(a,b)^m (c,d) …` or its JSON form.
    #[arg(long)]
    seq: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List atoms over a support.
    Atoms {
        /// Support elements, e.g. "(1,0) (0,1)"; default is all of G.
        #[arg(long)]
        support: Option<String>,
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Davenport constant.
    Davenport,
    /// Set of lengths L(B).
    Lengths(SeqArg),
    /// Factorizations of B.
    Factorizations {
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long, default_value_t = 10_000)]
        limit: usize,
    },
    /// Catenary degree c(B).
    Catenary {
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long, default_value_t = 100_000)]
        limit: usize,
        /// Report a lower bound instead of failing when the list is truncated.
        #[arg(long)]
        allow_lower_bound: bool,
    },
    /// Elasticity ρ(L(B)) of a sequence, or ρ_k(G) with --k.
    Rho {
        #[arg(long, conflicts_with = "k", required_unless_present = "k")]
        seq: Option<String>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// min Δ(G_0) under a length bound.
    Mindelta {
        /// Support elements; default is all nonzero elements of G.
        #[arg(long)]
        support: Option<String>,
        #[arg(long)]
        len_bound: Option<usize>,
    },
    /// Δ*(G) under a length bound.
    Deltastar {
        #[arg(long)]
        len_bound: Option<usize>,
    },
    /// AAMP decomposition of a finite set with difference d.
    Classify {
        /// Set literal such as "[2,4,5]".
        #[arg(long)]
        set: String,
        #[arg(long)]
        d: u32,
        /// Force the period, e.g. "0,2,3".
        #[arg(long)]
        period: Option<String>,
    },
    /// Bounded decision of whether a set is a set of lengths over G.
    Contains {
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = MEMBERSHIP_BUDGET)]
        budget: u128,
    },
    /// Build one of the explicit constructions.
    Build {
        /// Construction id, e.g. p3.5.1.
        #[arg(long)]
        id: String,
        /// Parameters, e.g. "n1=3,n2=6,d=3,k=1".
        #[arg(long, default_value = "")]
        params: String,
        /// Basis elements overriding the standard one.
        #[arg(long)]
        basis: Option<String>,
        /// Also compute L(B) and compare with the prediction.
        #[arg(long)]
        check: bool,
    },
    /// Atoms of length D(G) over a rank-2 group, or the parameters of one.
    Maxatoms {
        #[arg(long)]
        classify: Option<String>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, default_value = "paper")]
        suite: Suite,
        /// Case-id prefix; repeatable.
        #[arg(long)]
        filter: Vec<String>,
    },
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::InvalidArgument(_) => EXIT_USAGE,
            _ => EXIT_COMPUTATION,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

struct Ctx {
    group: Option<FiniteAbelianGroup>,
    json: bool,
    budget: usize,
    seed: u64,
}

impl Ctx {
    fn group(&self) -> Result<&FiniteAbelianGroup, Failure> {
        self.group.as_ref().ok_or_else(|| usage("this subcommand needs --group"))
    }

    fn sequence(&self, text: &str) -> Result<Sequence, Failure> {
        if text.trim_start().starts_with('{') {
            let parsed: SequenceJson = serde_json::from_str(text).map_err(|e| usage(format!("sequence JSON: {e}")))?;
            let s = Sequence::from_json(&parsed)?;
            if let Some(g) = &self.group {
                if g != s.group() {
                    return Err(usage(format!("sequence is over {}, not {g}", s.group())));
                }
            }
            return Ok(s);
        }
        Ok(Sequence::parse(text, self.group()?)?)
    }

    fn elements(&self, text: &str) -> Result<Vec<GroupElement>, Failure> {
        let s = Sequence::parse(text, self.group()?)?;
        Ok(s.support())
    }
}

fn parse_set(text: &str) -> Result<Vec<i64>, Failure> {
    let inner = text.trim().trim_start_matches(['[', '{']).trim_end_matches([']', '}']);
    inner
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().map_err(|_| usage(format!("bad set element {t:?}"))))
        .collect()
}

fn parse_length_set(text: &str) -> Result<LengthSet, Failure> {
    parse_set(text)?
        .into_iter()
        .map(|x| u32::try_from(x).map_err(|_| usage(format!("lengths are nonnegative (got {x})"))))
        .collect()
}

fn atoms_json(atoms: &[Sequence]) -> Value {
    json!(atoms.iter().map(Sequence::to_string).collect::<Vec<_>>())
}

/// Executes one subcommand, returning what to print.
fn execute(ctx: &Ctx, command: Command) -> Result<(Value, String, i32), Failure> {
    let ok = |v: Value, text: String| Ok((v, text, EXIT_OK));
    match command {
        Command::Atoms { support, max_len } => {
            let g = ctx.group()?;
            let support = match support {
                Some(s) => ctx.elements(&s)?,
                None => g.elements().collect(),
            };
            let a = enumerate_atoms(g, &support, max_len);
            let text = a.iter().map(Sequence::to_string).collect::<Vec<_>>().join("\n");
            ok(json!({ "group": g.to_string(), "count": a.len(), "atoms": atoms_json(a.atoms()) }), text)
        }
        Command::Davenport => {
            let d = davenport(ctx.group()?);
            ok(json!({ "davenport": d }), d.to_string())
        }
        Command::Lengths(SeqArg { seq }) => {
            let b = ctx.sequence(&seq)?;
            let l = lengths_with_budget(&b, ctx.budget)?;
            ok(json!({ "lengths": l.as_slice() }), l.to_string())
        }
        Command::Factorizations { seq, limit } => {
            let b = ctx.sequence(&seq.seq)?;
            let atoms = enumerate_atoms(b.group(), &b.support(), Some(b.len()));
            let f = enumerate_factorizations(&b, &atoms, limit)?;
            let items: Vec<Value> = f.items.iter().map(|z| atoms_json(z.atoms())).collect();
            let mut text = f.items.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n");
            if f.truncated {
                text.push_str(&format!("\n(truncated at {limit})"));
            }
            ok(json!({ "factorizations": items, "truncated": f.truncated }), text)
        }
        Command::Catenary { seq, limit, allow_lower_bound } => {
            let b = ctx.sequence(&seq.seq)?;
            let atoms = enumerate_atoms(b.group(), &b.support(), Some(b.len()));
            let c = catenary_degree(&b, &atoms, limit, allow_lower_bound)?;
            let text = if c.exact { c.value.to_string() } else { format!("≥ {}", c.value) };
            ok(json!({ "catenary": c.value, "exact": c.exact }), text)
        }
        Command::Rho { seq, k } => match (seq, k) {
            (Some(seq), _) => {
                let b = ctx.sequence(&seq)?;
                let r = lengths_with_budget(&b, ctx.budget)?.rho();
                ok(json!({ "rho": [r.numer(), r.denom()] }), r.to_string())
            }
            (None, Some(k)) => {
                let r = rho_k(ctx.group()?, k, RHO_BUDGET)?;
                ok(json!({ "k": k, "rho_k": r }), r.to_string())
            }
            (None, None) => Err(usage("rho needs --seq or --k")),
        },
        Command::Mindelta { support, len_bound } => {
            let g = ctx.group()?;
            let support = match support {
                Some(s) => ctx.elements(&s)?,
                None => g.nonzero_elements(),
            };
            let m = min_delta_support(g, &support, len_bound)?;
            let text = match m {
                MinDelta::HalfFactorial => "half-factorial".to_string(),
                MinDelta::Gcd { value, bound } => format!("{value} (exact under length bound {bound})"),
                MinDelta::Undetermined { bound } => format!("undetermined within length bound {bound}"),
            };
            ok(json!({ "mindelta": m }), text)
        }
        Command::Deltastar { len_bound } => {
            let d = delta_star(ctx.group()?, len_bound)?;
            let text = format!("{:?} (bound {}, undetermined {})", d.values, d.bound, d.undetermined);
            ok(serde_json::to_value(&d).map_err(Error::from)?, text)
        }
        Command::Classify { set, d, period } => {
            let l = parse_set(&set)?;
            if l.is_empty() {
                return Err(usage("classify needs a nonempty set"));
            }
            let desc = match period {
                Some(p) => {
                    let period: Vec<u32> = parse_set(&p)?
                        .into_iter()
                        .map(|x| u32::try_from(x).map_err(|_| usage("period entries are nonnegative")))
                        .collect::<Result<_, _>>()?;
                    classify_aamp_with_period(&l, d, &period)?
                }
                None => Some(classify_aamp(&l, d)?),
            };
            let text = match &desc {
                Some(x) => format!(
                    "y={} d={} period={:?} l={} M={} lower={:?} central={:?} upper={:?}",
                    x.shift, x.difference, x.period, x.length, x.bound, x.lower, x.central, x.upper
                ),
                None => "no decomposition with this period".to_string(),
            };
            ok(serde_json::to_value(&desc).map_err(Error::from)?, text)
        }
        Command::Contains { set, budget } => {
            let l = parse_length_set(&set)?;
            let m = contains_length_set(ctx.group()?, &l, budget)?;
            let v = serde_json::to_value(&m).map_err(Error::from)?;
            let text = v["answer"].as_str().unwrap_or("").to_string();
            ok(v, text)
        }
        Command::Build { id, params, basis, check } => {
            let mut spec = ConstructionSpec::parse(&id, &params)?;
            if let Some(b) = basis {
                let g = spec.group()?;
                let elems = Sequence::parse(&b, &g)?.elements().collect();
                spec = spec.with_basis(elems);
            }
            let c = build_construction(&spec)?;
            let mut v = json!({
                "id": id,
                "group": c.group.to_string(),
                "sequence": c.sequence.to_string(),
                "length": c.sequence.len(),
                "predicted": serde_json::to_value(&c.predicted).map_err(Error::from)?,
            });
            let mut text = format!("{}\npredicted: {}", c.sequence, c.predicted);
            let mut code = EXIT_OK;
            if check {
                let l = lengths_with_budget(&c.sequence, ctx.budget)?;
                let failures = c.predicted.failures(&l);
                v["lengths"] = json!(l.as_slice());
                v["matches"] = json!(failures.is_empty());
                v["mismatches"] = json!(failures);
                text.push_str(&format!("\ncomputed: {l}\nmatches: {}", failures.is_empty()));
                if !failures.is_empty() {
                    code = EXIT_VERIFY;
                }
            }
            Ok((v, text, code))
        }
        Command::Maxatoms { classify } => {
            let g = ctx.group()?;
            match classify {
                Some(u) => {
                    let u = ctx.sequence(&u)?;
                    let found = classify_maxlen_atom(g, &u)?;
                    let items: Vec<Value> = found.iter().map(|p| p.to_json(g)).collect();
                    let text = items.iter().map(Value::to_string).collect::<Vec<_>>().join("\n");
                    ok(json!({ "atom": u.to_string(), "realizations": items }), text)
                }
                None => {
                    let a = gen_maxlen_atoms_rank2(g)?;
                    let text = a.iter().map(Sequence::to_string).collect::<Vec<_>>().join("\n");
                    ok(json!({ "group": g.to_string(), "count": a.len(), "atoms": atoms_json(a.atoms()) }), text)
                }
            }
        }
        Command::Verify { suite, filter } => {
            let report = verify_suite(suite, &filter, ctx.seed);
            let code = if report.pass { EXIT_OK } else { EXIT_VERIFY };
            let mut text = String::new();
            for c in &report.cases {
                text.push_str(&format!("{:<8} {:<32} {:>8} ms\n", format!("{:?}", c.status).to_uppercase(), c.id, c.runtime_ms));
            }
            text.push_str(&format!("suite {}: {}", report.suite, if report.pass { "pass" } else { "FAIL" }));
            Ok((serde_json::to_value(&report).map_err(Error::from)?, text, code))
        }
    }
}

/// Runs the tool on `argv` (program name first), writing to the given streams.
pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    let cache = std::env::var_os("ZSL_CACHE").map(PathBuf::from).or(cli.cache.clone());
    set_cache_dir(cache);
    let group = match cli.group.as_deref().map(str::parse::<FiniteAbelianGroup>).transpose() {
        Ok(g) => g,
        Err(e) => {
            let _ = writeln!(err, "error: --group: {e}");
            return EXIT_USAGE;
        }
    };
    let ctx = Ctx { group, json: cli.json, budget: cli.budget_states.unwrap_or(DEFAULT_STATE_BUDGET), seed: cli.seed };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            let _ = writeln!(err, "error: --jobs must be at least 1");
            return EXIT_USAGE;
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: thread pool: {e}");
            return EXIT_COMPUTATION;
        }
    };
    let result = pool.install(|| execute(&ctx, cli.command));
    match result {
        Ok((v, text, code)) => {
            let _ = if ctx.json { writeln!(out, "{}", serde_json::to_string_pretty(&v).unwrap_or_default()) } else { writeln!(out, "{text}") };
            code
        }
        Err(f) => {
            if ctx.json {
                let _ = writeln!(out, "{}", json!({ "error": f.message }));
            }
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Runs the tool on `argv` against the process's stdout and stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
