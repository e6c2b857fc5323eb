//! The `backdoor` command line, as a library so tests can drive it in-process.
//!
//! Exit codes: 0 when the question was answered (including "no backdoor of
//! size k"), 2 when a resource cap stopped the computation, 1 for usage and
//! validation errors.

pub mod random;

use std::fs;

use anyhow::{anyhow, bail, Context};
use backdoor_core::backdoor::{
    check_backdoor_constraintwise, check_backdoor_naive, find_backdoor_bruteforce,
    find_backdoor_fpt, solve_via_backdoor,
};
use backdoor_core::reductions::{
    find_non_helly_witness, gen_bijection_chain, gen_boolean_cover, gen_boolean_sets,
    gen_single_constraint, gen_vertex_cover, sample_flags, sample_sets, single_constraint_flags,
};
use backdoor_core::{
    BackdoorLimits, ClassExpr, ClassOracle, CspInstance, Error, Graph, HellyBound,
    HittingSetInstance, Language, NonHellyWitness, SearchLimits, SearchOutcome,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser)]
#[command(
    name = "backdoor",
    version,
    about = "Strong backdoors to polymorphism-defined CSP classes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct Opts {
    /// Print a JSON report instead of text.
    #[arg(long)]
    json: bool,
    /// Sequential, reproducible execution (detection is always sequential).
    #[arg(long)]
    deterministic: bool,
    /// Largest d^|B| the naive checker enumerates.
    #[arg(long)]
    cap_naive: Option<u128>,
    /// Largest number of (constraint subset, local assignment) pairs per check.
    #[arg(long)]
    cap_constraintwise: Option<u128>,
    /// Largest cumulative C(n,s)·d^s for brute-force search.
    #[arg(long)]
    cap_brute: Option<u128>,
    /// Largest number of decisions in a polymorphism search.
    #[arg(long)]
    cap_nodes: Option<u64>,
    /// Largest |D(Γ)| for polymorphism table searches.
    #[arg(long)]
    cap_family_domain: Option<usize>,
}

impl Opts {
    fn backdoor_limits(&self) -> BackdoorLimits {
        let mut l = BackdoorLimits::default();
        if let Some(v) = self.cap_naive {
            l.naive_assignments = v;
        }
        if let Some(v) = self.cap_constraintwise {
            l.constraintwise_pairs = v;
        }
        if let Some(v) = self.cap_brute {
            l.brute_work = v;
        }
        l
    }

    fn search_limits(&self) -> SearchLimits {
        let mut l = SearchLimits::default();
        if let Some(v) = self.cap_nodes {
            l.max_nodes = v;
        }
        if let Some(v) = self.cap_family_domain {
            l.max_family_domain = v;
        }
        l
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a language belongs to a class.
    Member {
        #[arg(long)]
        language: String,
        /// Class expression: a file path or inline JSON.
        #[arg(long)]
        class: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Verify that a variable set is a strong backdoor.
    Check {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        class: String,
        /// Comma-separated variable indices; empty for the empty set.
        #[arg(long, default_value = "")]
        backdoor: String,
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
        #[command(flatten)]
        opts: Opts,
    },
    /// Bounded search tree detection; needs a Helly bound.
    Find {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        class: String,
        #[arg(long)]
        k: usize,
        /// Assert a Helly number instead of deriving one from the class.
        #[arg(long)]
        helly_override: Option<usize>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Exhaustive detection of a smallest backdoor of size at most k.
    FindBrute {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        class: String,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        opts: Opts,
    },
    /// Emit a reduction instance (or a random one) as instance JSON.
    Generate {
        #[arg(value_enum)]
        construction: Construction,
        /// Graph or hitting-set JSON.
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        class: Option<String>,
        /// single-constraint only: per-set memberships as 0/1, comma-separated.
        #[arg(long)]
        flags: Option<String>,
        /// bijection-chain only: witness language file; searched for when absent.
        #[arg(long)]
        witness: Option<String>,
        /// Write the instance here instead of stdout.
        #[arg(long)]
        out: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        d: u32,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        t: usize,
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[command(flatten)]
        opts: Opts,
    },
    /// Solve an instance by branching on a verified backdoor.
    Solve {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        class: String,
        #[arg(long, default_value = "")]
        backdoor: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Search for a language outside the class whose proper sublanguages are all members.
    Witness {
        #[arg(long)]
        class: String,
        #[arg(long, default_value_t = 2)]
        arity_cap: usize,
        #[arg(long, default_value_t = 2)]
        domain_cap: u32,
        #[arg(long, default_value_t = 3)]
        size_cap: usize,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Naive,
    Constraintwise,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Construction {
    VertexCover,
    BooleanCover,
    SingleConstraint,
    BooleanSets,
    BijectionChain,
    Sample,
    Random,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok(stdout) => Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => {
            let resource = e.downcast_ref::<Error>().is_some_and(Error::is_resource);
            Outcome {
                code: if resource { 2 } else { 1 },
                stdout: String::new(),
                stderr: format!("error: {e:#}\n"),
            }
        }
    }
}

fn read(path: &str) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {path}"))
}

/// A class given inline (JSON text) or as a path to a JSON file.
fn load_class(arg: &str) -> anyhow::Result<ClassExpr> {
    let text = if arg.trim_start().starts_with(['{', '"']) {
        arg.to_string()
    } else {
        read(arg)?
    };
    Ok(ClassExpr::from_json(&text)?)
}

fn load_instance(path: &str) -> anyhow::Result<CspInstance> {
    CspInstance::from_json(&read(path)?)
        .map_err(|e| anyhow!(e).context(format!("loading instance {path}")))
}

fn load_language(path: &str) -> anyhow::Result<Language> {
    serde_json::from_str(&read(path)?).with_context(|| format!("parsing language {path}"))
}

/// Hitting-set JSON, or a graph read as a 2-Hitting Set.
fn load_cover_input(path: &str) -> anyhow::Result<HittingSetInstance> {
    let text = read(path)?;
    if let Ok(hs) = serde_json::from_str::<HittingSetInstance>(&text) {
        return Ok(hs);
    }
    let g: Graph = serde_json::from_str(&text)
        .with_context(|| format!("{path} is neither a hitting set nor a graph"))?;
    Ok(g.as_hitting_set())
}

fn parse_vars(s: &str) -> anyhow::Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<usize>()
                .with_context(|| format!("bad variable index {p:?}"))
        })
        .collect()
}

fn emit(opts: &Opts, report: Json, text: String) -> anyhow::Result<String> {
    if opts.json {
        Ok(serde_json::to_string_pretty(&report)? + "\n")
    } else {
        Ok(text)
    }
}

fn search_report(out: &SearchOutcome, mode: &str) -> Json {
    json!({
        "found": out.backdoor.is_some(),
        "backdoor": out.backdoor,
        "nodes_expanded": out.nodes_expanded,
        "membership_tests": out.membership_tests,
        "mode": mode,
    })
}

fn search_text(out: &SearchOutcome, k: usize) -> String {
    match &out.backdoor {
        Some(b) => format!("found backdoor {b:?} (size {})\n", b.len()),
        None => format!("no backdoor of size at most {k}\n"),
    }
}

fn dispatch(command: Command) -> anyhow::Result<String> {
    match command {
        Command::Member {
            language,
            class,
            opts,
        } => {
            let expr = load_class(&class)?;
            let lang = load_language(&language)?;
            let report = backdoor_core::class::member(&expr, &lang, &opts.search_limits())?;
            let text = format!("member: {}\n", report.member);
            emit(&opts, serde_json::to_value(&report)?, text)
        }
        Command::Check {
            instance,
            class,
            backdoor,
            method,
            opts,
        } => {
            let inst = load_instance(&instance)?;
            let oracle = ClassOracle::new(load_class(&class)?, opts.search_limits())?;
            let vars = parse_vars(&backdoor)?;
            let limits = opts.backdoor_limits();
            let naive = matches!(method, Method::Naive | Method::Both)
                .then(|| check_backdoor_naive(&inst, &vars, &oracle, &limits))
                .transpose()?;
            let constraintwise = matches!(method, Method::Constraintwise | Method::Both)
                .then(|| check_backdoor_constraintwise(&inst, &vars, &oracle, &limits))
                .transpose()?;
            if let (Some(a), Some(b)) = (naive, constraintwise) {
                if a != b {
                    bail!("checkers disagree: naive {a}, constraint-wise {b}");
                }
            }
            let is_backdoor = naive.or(constraintwise).expect("at least one method runs");
            let report = json!({ "backdoor": vars, "is_backdoor": is_backdoor, "naive": naive, "constraintwise": constraintwise });
            emit(&opts, report, format!("strong backdoor: {is_backdoor}\n"))
        }
        Command::Find {
            instance,
            class,
            k,
            helly_override,
            opts,
        } => {
            let inst = load_instance(&instance)?;
            let expr = load_class(&class)?;
            let helly = match (helly_override, expr.helly_bound()) {
                (Some(h), _) => HellyBound {
                    value: h,
                    asserted: true,
                },
                (None, Some(h)) => HellyBound {
                    value: h,
                    asserted: false,
                },
                (None, None) => {
                    bail!("the class has no derivable Helly number; pass --helly-override")
                }
            };
            let oracle = ClassOracle::new(expr, opts.search_limits())?;
            let limits = opts.backdoor_limits();
            let out = find_backdoor_fpt(&inst, &oracle, k, helly.value, &limits)?;
            let verified = match &out.backdoor {
                Some(b) => {
                    if !check_backdoor_naive(&inst, b, &oracle, &limits)? {
                        bail!("search returned {b:?}, which fails naive verification");
                    }
                    Some(true)
                }
                None => None,
            };
            let mut report = search_report(&out, "fpt");
            report["helly"] = serde_json::to_value(helly)?;
            report["verified"] = json!(verified);
            let mut text = search_text(&out, k);
            if helly.asserted {
                text.push_str("(conditional on the asserted Helly number)\n");
            }
            emit(&opts, report, text)
        }
        Command::FindBrute {
            instance,
            class,
            k,
            opts,
        } => {
            let inst = load_instance(&instance)?;
            let oracle = ClassOracle::new(load_class(&class)?, opts.search_limits())?;
            let out = find_backdoor_bruteforce(&inst, &oracle, k, &opts.backdoor_limits())?;
            emit(&opts, search_report(&out, "brute"), search_text(&out, k))
        }
        Command::Solve {
            instance,
            class,
            backdoor,
            opts,
        } => {
            let inst = load_instance(&instance)?;
            let oracle = ClassOracle::new(load_class(&class)?, opts.search_limits())?;
            let vars = parse_vars(&backdoor)?;
            let solution = solve_via_backdoor(&inst, &vars, &oracle, &opts.backdoor_limits())?;
            let text = match &solution {
                Some(s) => format!("solution {s:?}\n"),
                None => "unsatisfiable\n".to_string(),
            };
            emit(
                &opts,
                json!({ "satisfiable": solution.is_some(), "solution": solution }),
                text,
            )
        }
        Command::Witness {
            class,
            arity_cap,
            domain_cap,
            size_cap,
            opts,
        } => {
            let oracle = ClassOracle::new(load_class(&class)?, opts.search_limits())?;
            let found = find_non_helly_witness(&oracle, arity_cap, domain_cap, size_cap)?;
            let text = match &found {
                Some(w) => format!(
                    "witness: {}\n",
                    w.language()
                        .relations()
                        .iter()
                        .map(|r| r.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
                None => "no witness within the caps\n".to_string(),
            };
            let report = json!({ "found": found.is_some(), "language": found.as_ref().map(|w| w.language()) });
            emit(&opts, report, text)
        }
        Command::Generate {
            construction,
            input,
            class,
            flags,
            witness,
            out,
            seed,
            n,
            d,
            m,
            t,
            r,
            opts,
        } => {
            let need_input = || -> anyhow::Result<HittingSetInstance> {
                load_cover_input(
                    input
                        .as_deref()
                        .ok_or_else(|| anyhow!("--input is required"))?,
                )
            };
            let need_oracle = || -> anyhow::Result<ClassOracle> {
                let c = class
                    .as_deref()
                    .ok_or_else(|| anyhow!("--class is required"))?;
                Ok(ClassOracle::new(load_class(c)?, opts.search_limits())?)
            };
            let file = match construction {
                Construction::VertexCover => {
                    let hs = need_input()?;
                    if hs.p() != 2 {
                        bail!("vertex-cover takes a graph");
                    }
                    let g = Graph::new(hs.universe(), hs.sets().iter().map(|s| (s[0], s[1])))?;
                    gen_vertex_cover(&g, &need_oracle()?)?.to_file()
                }
                Construction::BooleanCover => {
                    gen_boolean_cover(&need_input()?, &need_oracle()?)?.to_file()
                }
                Construction::SingleConstraint => {
                    let hs = need_input()?;
                    let flags = match (&flags, &class) {
                        (Some(f), _) => f
                            .split(',')
                            .filter(|p| !p.trim().is_empty())
                            .map(|p| match p.trim() {
                                "1" | "true" => Ok(true),
                                "0" | "false" => Ok(false),
                                other => Err(anyhow!("bad flag {other:?}")),
                            })
                            .collect::<anyhow::Result<Vec<bool>>>()?,
                        (None, Some(_)) => {
                            single_constraint_flags(hs.sets().len(), &need_oracle()?)?
                        }
                        (None, None) => bail!("single-constraint needs --flags or --class"),
                    };
                    gen_single_constraint(&hs, &flags)?.to_file()
                }
                Construction::BooleanSets => {
                    gen_boolean_sets(&need_input()?, &need_oracle()?)?.to_file()
                }
                Construction::BijectionChain => {
                    let hs = need_input()?;
                    let oracle = need_oracle()?;
                    let w = match &witness {
                        Some(path) => NonHellyWitness::new(load_language(path)?, &oracle)?,
                        None => find_non_helly_witness(&oracle, 2, 2, 3)?
                            .ok_or_else(|| anyhow!("no witness found; pass --witness"))?,
                    };
                    gen_bijection_chain(&hs, &w, &oracle)?.0.to_file()
                }
                Construction::Sample => {
                    gen_single_constraint(&sample_sets(), &sample_flags())?.to_file()
                }
                Construction::Random => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let shape = random::Shape {
                        max_vars: n,
                        max_domain: d,
                        max_constraints: m,
                        max_tuples: t,
                        max_arity: r,
                    };
                    let mut f = random::random_instance(&mut rng, &shape).to_file();
                    f.metadata = Some(json!({ "construction": "random", "seed": seed }));
                    f
                }
            };
            let text = serde_json::to_string_pretty(&file)? + "\n";
            match out {
                Some(path) => {
                    fs::write(&path, &text).with_context(|| format!("writing {path}"))?;
                    let report = json!({ "written": path, "num_vars": file.num_vars, "constraints": file.constraints.len(), "metadata": file.metadata });
                    emit(&opts, report, format!("wrote {path}\n"))
                }
                None => Ok(text),
            }
        }
    }
}
