mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pitower_core::linops::{order_bound, Filtration};
use pitower_core::modularity::{analyze, modular_closure, Method, ModularityError};
use pitower_core::oracle::{agreement_harness, labelled_corpus, CorpusConfig};
use pitower_core::semilinear::{dim_ceiling_from_env, SemilinearError};
use pitower_core::spec::{parse_tower, TowerSpec};
use pitower_core::tower::{build_tower, modular_by_pickert, pickert_order, Tower};

const EXIT_PARSE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_SOUNDNESS: u8 = 3;
const EXIT_REFUSED: u8 = 4;
const EXIT_USAGE: u8 = 64;

/// Purely inseparable towers: validation, Pickert orderings, modularity tests.
#[derive(Parser)]
#[command(name = "pitower", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a tower file.
    Check { file: PathBuf },
    /// Print the Pickert ordering, exponents and structure equations.
    Pickert { file: PathBuf },
    /// Decide whether the extension is modular.
    Modular {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
        #[arg(long)]
        json: bool,
    },
    /// Compute the modular closure field.
    Closure {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Dimensions of the order filtration on differential operators.
    Ops {
        file: PathBuf,
        #[arg(long)]
        max_order: usize,
    },
    /// Run every procedure on a seeded random corpus.
    Harness {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 25)]
        count: usize,
        /// Extra tower files to include ahead of the corpus.
        #[arg(long)]
        include: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Pickert,
    Disjoint,
    Span,
    Witness,
    All,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Pickert => vec![Method::Pickert],
            MethodArg::Disjoint => vec![Method::Disjoint],
            MethodArg::Span => vec![Method::Span],
            MethodArg::Witness => vec![Method::Witness],
            MethodArg::All => Method::ALL.to_vec(),
        }
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Pickert => "pickert",
        Method::Disjoint => "disjoint",
        Method::Span => "span",
        Method::Witness => "witness",
    }
}

struct Failure(u8, String);

impl Failure {
    fn invalid(e: impl std::fmt::Display) -> Self {
        Failure(EXIT_INVALID, format!("invalid tower: {e}"))
    }
}

fn read_spec(path: &Path) -> Result<TowerSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))?;
    parse_tower(&text).map_err(|e| Failure(EXIT_PARSE, format!("{}:{e}", path.display())))
}

fn load(path: &Path) -> Result<(TowerSpec, Tower), Failure> {
    let spec = read_spec(path)?;
    let tower = build_tower(&spec).map_err(Failure::invalid)?;
    Ok((spec, tower))
}

fn ceiling() -> Result<usize, Failure> {
    dim_ceiling_from_env().map_err(|e| Failure(EXIT_USAGE, e))
}

fn run(cli: Cli) -> Result<(String, u8), Failure> {
    match cli.command {
        Command::Check { file } => {
            let (_, t) = load(&file)?;
            let names: Vec<_> = t.generators().iter().map(|g| g.name.as_str()).collect();
            Ok((format!("ok: {} generators ({}), dimension {}\n", names.len(), names.join(", "), t.dim()), 0))
        }
        Command::Pickert { file } => {
            let (_, t) = load(&file)?;
            let seq = pickert_order(&t).map_err(Failure::invalid)?;
            let outcome = modular_by_pickert(&seq);
            let view = report::pickert_view(&seq, outcome).map_err(Failure::invalid)?;
            Ok((report::pickert_text(&view), 0))
        }
        Command::Modular { file, method, json } => {
            let (spec, t) = load(&file)?;
            let methods = method.methods();
            let r = analyze(&t, &methods, ceiling()?).map_err(Failure::invalid)?;
            let pickert = match &r.pickert {
                Some(p) => Some(report::pickert_view(&p.sequence, p.outcome).map_err(Failure::invalid)?),
                None => None,
            };
            let view = report::ModularView {
                spec: &spec,
                tower: &t,
                report: &r,
                pickert,
                methods: methods.iter().map(|&m| method_name(m)).collect(),
            };
            let out = if json { report::to_json_line(&report::modular_json(&view)) } else { report::modular_text(&view) };
            let code = if r.soundness_violation() || r.flags.contains(&"witness_verification_failed") {
                EXIT_SOUNDNESS
            } else if r.flags.contains(&"span_refused") {
                EXIT_REFUSED
            } else {
                0
            };
            Ok((out, code))
        }
        Command::Closure { file, json } => {
            let (spec, t) = load(&file)?;
            let c = match modular_closure(&t, ceiling()?) {
                Ok(c) => c,
                Err(ModularityError::Semilinear(e @ SemilinearError::CeilingExceeded { .. })) => {
                    return Err(Failure(EXIT_REFUSED, format!("refused: {e}")));
                }
                Err(e) => return Err(Failure::invalid(e)),
            };
            let out = if json { report::to_json_line(&report::closure_json(&spec, &t, &c)) } else { report::closure_text(&t, &c) };
            Ok((out, 0))
        }
        Command::Ops { file, max_order } => {
            let (_, t) = load(&file)?;
            let f = Filtration::new(&t, max_order.min(order_bound(&t)));
            let mut out = String::new();
            for n in 0..=max_order {
                if n > f.max_level() && !f.is_complete() {
                    break;
                }
                out.push_str(&format!("Diff^{n}: dim_L {}, dim_K {}\n", f.dim_l(n), f.dim_k(n)));
            }
            Ok((out, 0))
        }
        Command::Harness { seed, count, include, json } => {
            let ceiling = ceiling()?;
            let mut towers = Vec::new();
            for path in &include {
                let spec = read_spec(path)?;
                let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                towers.push((label, spec));
            }
            let config = CorpusConfig { seed, count, ceiling, ..CorpusConfig::default() };
            towers.extend(labelled_corpus(&config).map_err(|e| Failure(EXIT_INVALID, e.to_string()))?);
            let h = agreement_harness(&towers, ceiling);
            let out = if json { report::to_json_line(&report::harness_json(seed, count, &h)) } else { report::harness_text(&h) };
            Ok((out, if h.hard_failures > 0 { EXIT_SOUNDNESS } else { 0 }))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(Failure(code, msg)) => {
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}
