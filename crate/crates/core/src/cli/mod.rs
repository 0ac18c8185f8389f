//! Command-line front end and the artifacts it drives: message documents,
//! graph export, instance generation, the randomized exchangeability suite,
//! and the counterexample search.
//!
//! Exit codes: 0 success or property holds, 1 property fails (witness
//! emitted), 2 input or validation error, 3 search budget exhausted.

mod document;
mod graph;
mod random;
mod search;
mod suite;

pub use document::{
    parse_message, parse_table, parse_valuation, serialize_message, serialize_table,
    ConstraintDocument, DocumentError, MessageDocument, TableDocument, TableEntryDocument,
    Valuation, VariableDocument,
};
pub use graph::{export_graph, network_to_dot};
pub use random::{
    random_message, RandomError, RandomParams, MAX_RANDOM_GOODS, MAX_RANDOM_VARIABLES,
};
pub use search::{
    search_counterexample, verify_search_witness, SearchConfig, SearchError, SearchFamily,
    SearchOutcome, SearchReport, SearchWitness, WitnessCheck, MAX_SEARCH_GOODS,
};
pub use suite::{
    run_theorem1_suite, suite_case, FailureKind, SuiteFailure, SuiteOptions, SuiteReport,
};

use crate::engine::{self, EngineError};
use crate::model::{AssignmentMessage, Bundle, PriceVector};
use crate::properties::{
    binary_expansion, check_gross_substitutes_exact, check_single_unit_exchangeability,
    check_strong_exchangeability, check_strong_substitutes, default_item_grid, PropertyError,
    PropertyReport, Witness,
};
use crate::rational::{format_rational, parse_rational, ParseRationalError};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::io::{Read, Write};
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "am",
    version,
    about = "Evaluate and check integer assignment messages"
)]
pub struct Cli {
    /// Input document (message or valuation table); stdin when absent.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Emit a JSON report instead of prose.
    #[arg(long, global = true)]
    pub machine: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Exhaustive,
    Matroid,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the structure of a message.
    Validate,
    /// Value of a bundle.
    Value {
        #[arg(long)]
        bundle: String,
    },
    /// Indirect utility at a price vector.
    Iu {
        #[arg(long)]
        price: String,
    },
    /// Demand set at a price vector.
    Demand {
        #[arg(long)]
        price: String,
    },
    /// Materialize the valuation table of a message.
    Table,
    /// The circulation network in DOT format.
    ExportGraph,
    /// Strong substitutes on the nonnegative part of the domain.
    CheckSs {
        #[arg(long, default_value_t = crate::properties::DEFAULT_MAX_POINTS)]
        max_points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Strong exchangeability at one price vector.
    CheckExchangeability {
        #[arg(long)]
        price: String,
    },
    /// Generate a random valid message.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        goods: usize,
        #[arg(long)]
        vars: usize,
    },
    /// Randomized exchangeability suite over generated messages.
    Suite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 10)]
        prices: usize,
        /// Corrupt one demand set to exercise failure reporting.
        #[arg(long)]
        inject_bug: bool,
    },
    /// Search for a gross substitutes table that is not strongly exchangeable.
    Search {
        #[arg(long)]
        goods: usize,
        #[arg(long)]
        value_cap: u32,
        #[arg(long)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = FamilyArg::Exhaustive)]
        family: FamilyArg,
        #[arg(long, default_value_t = 4096)]
        max_grid_points: usize,
        /// Also write the witness table as a table document.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Property(#[from] PropertyError),
    #[error(transparent)]
    Random(#[from] RandomError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("--{flag}: {source}")]
    Rational {
        flag: &'static str,
        source: ParseRationalError,
    },
    #[error("--bundle: `{0}` is not an integer")]
    Quantity(String),
    #[error("{0}")]
    Usage(String),
}

/// Result of one command before it is written out.
struct Outcome {
    code: i32,
    prose: String,
    machine: Value,
}

impl Outcome {
    fn ok(prose: String, machine: Value) -> Self {
        Outcome {
            code: EXIT_OK,
            prose,
            machine,
        }
    }
}

fn parse_list<T>(
    text: &str,
    parse: impl Fn(&str) -> Result<T, CliError>,
) -> Result<Vec<T>, CliError> {
    text.split(',').map(|s| parse(s.trim())).collect()
}

fn parse_price(text: &str) -> Result<PriceVector, CliError> {
    parse_list(text, |s| {
        parse_rational(s).map_err(|source| CliError::Rational {
            flag: "price",
            source,
        })
    })
    .map(PriceVector::new)
}

fn parse_bundle(text: &str) -> Result<Bundle, CliError> {
    parse_list(text, |s| {
        s.parse::<i64>()
            .map_err(|_| CliError::Quantity(s.to_string()))
    })
    .map(Bundle::new)
}

fn fmt_price(p: &PriceVector) -> String {
    let parts: Vec<String> = p.prices().iter().map(format_rational).collect();
    format!("({})", parts.join(","))
}

fn bundle_json(b: &Bundle) -> Value {
    json!(b.quantities())
}

fn witness_json(w: &Witness) -> Value {
    match w {
        Witness::Substitutes(s) => json!({
            "kind": "substitutes",
            "price": s.price.iter().map(format_rational).collect::<Vec<_>>(),
            "raised": s.raised.iter().map(format_rational).collect::<Vec<_>>(),
            "item": s.item,
            "bundle": s.bundle,
        }),
        Witness::LocalExchange(l) => json!({
            "kind": "local_exchange",
            "base": l.base,
            "i": l.i,
            "j": l.j,
            "k": l.k,
        }),
        Witness::Exchange(e) => json!({
            "kind": "exchange",
            "price": e.price.prices().iter().map(format_rational).collect::<Vec<_>>(),
            "demand": e.demand.iter().map(bundle_json).collect::<Vec<_>>(),
            "q": bundle_json(&e.q),
            "r": bundle_json(&e.r),
            "valid_pairs": e.valid_pairs.iter().map(|(i, j)| json!([i, j])).collect::<Vec<_>>(),
        }),
    }
}

fn report_json(r: &PropertyReport) -> Value {
    json!({
        "holds": r.is_holds(),
        "cases": r.cases,
        "witness": r.witness().map(witness_json),
    })
}

fn report_code(r: &PropertyReport) -> i32 {
    if r.is_holds() {
        EXIT_OK
    } else {
        EXIT_FAILS
    }
}

fn read_input(path: &Option<PathBuf>, stdin: &mut dyn Read) -> Result<String, CliError> {
    let mut text = String::new();
    match path {
        Some(p) => {
            text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        }
        None => {
            stdin
                .read_to_string(&mut text)
                .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        }
    }
    Ok(text)
}

fn message_of(v: Valuation) -> Result<AssignmentMessage, CliError> {
    match v {
        Valuation::Message(m) => Ok(m),
        Valuation::Table(_) => Err(CliError::Usage(
            "this command needs a message document, not a table".into(),
        )),
    }
}

fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<Outcome, CliError> {
    let load = |stdin: &mut dyn Read| -> Result<Valuation, CliError> {
        Ok(parse_valuation(&read_input(&cli.input, stdin)?)?)
    };
    match &cli.command {
        Command::Validate => {
            let text = read_input(&cli.input, stdin)?;
            let doc: MessageDocument = serde_json::from_str(&text).map_err(DocumentError::from)?;
            let report = crate::model::validate_message(&doc.to_message()?);
            let violations: Vec<String> =
                report.violations.iter().map(ToString::to_string).collect();
            Ok(Outcome {
                code: if report.is_valid() {
                    EXIT_OK
                } else {
                    EXIT_INPUT
                },
                prose: report.to_string(),
                machine: json!({ "valid": report.is_valid(), "violations": violations }),
            })
        }
        Command::Value { bundle } => {
            let msg = message_of(load(stdin)?)?;
            let q = parse_bundle(bundle)?;
            let v = engine::value(&msg, &q)?;
            Ok(Outcome::ok(
                match &v {
                    Some(v) => format!("v{q} = {}", format_rational(v)),
                    None => format!("{q} is not a feasible bundle"),
                },
                json!({ "bundle": bundle_json(&q), "value": v.as_ref().map(format_rational) }),
            ))
        }
        Command::Iu { price } => {
            let msg = message_of(load(stdin)?)?;
            let p = parse_price(price)?;
            let u = engine::indirect_utility(&msg, &p)?;
            Ok(Outcome::ok(
                format!("u{} = {}", fmt_price(&p), format_rational(&u)),
                json!({ "price": p.prices().iter().map(format_rational).collect::<Vec<_>>(), "indirect_utility": format_rational(&u) }),
            ))
        }
        Command::Demand { price } => {
            let msg = message_of(load(stdin)?)?;
            let p = parse_price(price)?;
            let d = engine::demand_set(&msg, &p)?;
            let bundles: Vec<String> = d.demand.iter().map(ToString::to_string).collect();
            Ok(Outcome::ok(
                format!(
                    "u{} = {}\nD{} = {{{}}}",
                    fmt_price(&p),
                    format_rational(&d.indirect_utility),
                    fmt_price(&p),
                    bundles.join(", ")
                ),
                json!({
                    "indirect_utility": format_rational(&d.indirect_utility),
                    "demand": d.demand.iter().map(bundle_json).collect::<Vec<_>>(),
                }),
            ))
        }
        Command::Table => {
            let msg = message_of(load(stdin)?)?;
            let table = engine::to_valuation_table(&msg)?;
            let text = serialize_table(&table);
            let machine: Value = serde_json::from_str(&text).expect("own output parses");
            Ok(Outcome::ok(text, machine))
        }
        Command::ExportGraph => {
            let msg = message_of(load(stdin)?)?;
            let dot = export_graph(&msg)?;
            Ok(Outcome::ok(dot.clone(), json!({ "dot": dot })))
        }
        Command::CheckSs { max_points, seed } => {
            let table = match load(stdin)? {
                Valuation::Message(m) => engine::to_valuation_table(&m)?.restrict_nonnegative(),
                Valuation::Table(t) => t,
            };
            let bv = binary_expansion(&table)?;
            let grid = default_item_grid(&bv)
                .with_max_points(*max_points)
                .with_seed(*seed);
            let report = check_strong_substitutes(&table, Some(&grid))?;
            let scope = if grid.is_exhaustive() {
                "full grid"
            } else {
                "sampled grid"
            };
            let mut prose = format!(
                "strong substitutes ({scope}, {} items): {report}",
                bv.num_items()
            );
            let mut code = report_code(&report);
            let exact = if table.is_hypercube() {
                let exact = check_gross_substitutes_exact(&table)?;
                prose.push_str(&format!("\ngross substitutes (exact): {exact}"));
                code = code.max(report_code(&exact));
                Some(report_json(&exact))
            } else {
                None
            };
            Ok(Outcome {
                code,
                prose,
                machine: json!({ "items": bv.num_items(), "exhaustive_grid": grid.is_exhaustive(), "report": report_json(&report), "exact": exact }),
            })
        }
        Command::CheckExchangeability { price } => {
            let p = parse_price(price)?;
            let (report, single) = match load(stdin)? {
                Valuation::Message(m) => {
                    let compiled = engine::compile(&m)?;
                    (check_strong_exchangeability(&compiled, &p)?, None)
                }
                Valuation::Table(t) => {
                    let single = if t.is_hypercube() {
                        Some(check_single_unit_exchangeability(&t, &p)?)
                    } else {
                        None
                    };
                    (check_strong_exchangeability(&t, &p)?, single)
                }
            };
            let mut prose = format!("strong exchangeability at {}: {report}", fmt_price(&p));
            if let Some(s) = &single {
                prose.push_str(&format!(
                    "\nbijection form: {}",
                    if s.is_holds() { "holds" } else { "fails" }
                ));
            }
            Ok(Outcome {
                code: report_code(&report),
                prose,
                machine: json!({ "report": report_json(&report), "bijection_holds": single.map(|s| s.is_holds()) }),
            })
        }
        Command::Random { seed, goods, vars } => {
            let msg = random_message(*seed, &RandomParams::new(*goods, *vars))?;
            let text = serialize_message(&msg);
            let machine: Value = serde_json::from_str(&text).expect("own output parses");
            Ok(Outcome::ok(text, machine))
        }
        Command::Suite {
            seed,
            count,
            prices,
            inject_bug,
        } => {
            let mut options = SuiteOptions::new(*count);
            options.prices_per_message = *prices;
            options.inject_bug = *inject_bug;
            let report = run_theorem1_suite(*seed, &options)?;
            let mut prose = report.to_string();
            for f in &report.failures {
                prose.push_str(&format!(
                    "\n{f}\nreplay message:\n{}",
                    serialize_message(&f.message)
                ));
            }
            let failures: Vec<Value> = report
                .failures
                .iter()
                .map(|f| {
                    json!({
                        "case": f.case,
                        "message_seed": f.message_seed,
                        "price": f.price.prices().iter().map(format_rational).collect::<Vec<_>>(),
                        "description": f.to_string(),
                        "message": serde_json::to_value(MessageDocument::from_message(&f.message)).expect("serializes"),
                    })
                })
                .collect();
            Ok(Outcome {
                code: if report.all_passed() {
                    EXIT_OK
                } else {
                    EXIT_FAILS
                },
                prose,
                machine: json!({
                    "seed": seed,
                    "messages": report.messages,
                    "price_cases": report.price_cases,
                    "passed_cases": report.passed_cases,
                    "bundle_pairs": report.bundle_pairs,
                    "cycles": report.cycles,
                    "failures": failures,
                }),
            })
        }
        Command::Search {
            goods,
            value_cap,
            budget,
            family,
            max_grid_points,
            witness_out,
        } => {
            let mut cfg =
                SearchConfig::new(*goods, *value_cap, *budget).with_family(match family {
                    FamilyArg::Exhaustive => SearchFamily::Exhaustive,
                    FamilyArg::Matroid => SearchFamily::MatroidRank,
                });
            cfg.max_grid_points = *max_grid_points;
            let report = search_counterexample(&cfg)?;
            let mut machine = json!({
                "examined": report.examined,
                "gross_substitutes": report.gross_substitutes,
                "prices_tried": report.prices_tried,
                "demand_families": report.demand_families,
                "found": report.witness().is_some(),
            });
            let mut prose = report.to_string();
            let code = match report.witness() {
                None => EXIT_BUDGET,
                Some(w) => {
                    let check = verify_search_witness(w)?;
                    let table_text = serialize_table(&w.table);
                    prose.push_str(&format!(
                        "\nre-verified: gross substitutes {}, no correspondence {}, no bijection {}\nwitness table:\n{table_text}",
                        check.gross_substitutes, check.correspondence_absent, check.bijection_absent
                    ));
                    machine["index"] = json!(w.index);
                    machine["witness"] = witness_json(&Witness::Exchange(w.failure.clone()));
                    machine["table"] =
                        serde_json::from_str(&table_text).expect("own output parses");
                    machine["verified"] = json!(check.all());
                    if let Some(path) = witness_out {
                        std::fs::write(path, &table_text)
                            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    }
                    if check.all() {
                        EXIT_FAILS
                    } else {
                        return Err(CliError::Usage("witness failed re-verification".into()));
                    }
                }
            };
            Ok(Outcome {
                code,
                prose,
                machine,
            })
        }
    }
}

/// Parses `args` (including the program name) and runs one command.
pub fn run_with_io<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let outcome = match execute(&cli, stdin) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let mut text = if cli.machine {
        serde_json::to_string_pretty(
            &json!({ "exit_code": outcome.code, "result": outcome.machine }),
        )
        .expect("json values serialize")
    } else {
        outcome.prose
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_INPUT;
    }
    outcome.code
}

/// [`run_with_io`] on the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_io(
        args,
        &mut std::io::stdin().lock(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
