use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use purelab::corpus::{parse_entry, parse_env, CorpusEntry, CorpusError};
use purelab::encode::{check_encoding_a, check_encoding_e, encode_term_a, encode_term_e};
use purelab::eval::{eval_observed, Tracer};
use purelab::gen::Gen;
use purelab::oracle::{
    obs_purity, safety_case, EnvSpec, PurityOptions, SType, DEFAULT_FUEL, DEFAULT_MAX_NODES,
};
use purelab::report::{compare, Report, TermRow};
use purelab::script::{parse_script, run_script};
use purelab::suite::{run_suite, safety_env, Suite, SuiteOptions, DEFAULT_SEED};
use purelab::syntax::{parse, parse_annot, Term};
use purelab::system::System;

#[derive(Parser)]
#[command(name = "purelab", version, about = "Effect, ability and combined type systems with an observational-purity oracle")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Record wall time in reports.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Effect,
    Ability,
    Ae,
    All,
}

impl SystemArg {
    fn systems(self) -> Vec<System> {
        match self {
            SystemArg::Effect => vec![System::Effect],
            SystemArg::Ability => vec![System::Ability],
            SystemArg::Ae => vec![System::Ae],
            SystemArg::All => System::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceSystem {
    Effect,
    Ability,
}

#[derive(Args)]
struct EnvArgs {
    /// Environment as JSON: {"bindings": [{"name": "a", "kind": "refCell"}]}.
    #[arg(long, value_name = "FILE", conflicts_with = "bind")]
    env: Option<PathBuf>,
    /// Environment inline, for example "a:ref y:bool".
    #[arg(long, value_name = "SPEC")]
    bind: Option<String>,
}

impl EnvArgs {
    fn load(&self) -> Result<EnvSpec> {
        if let Some(path) = &self.env {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(EnvSpec::from_json(&text)?);
        }
        match &self.bind {
            Some(spec) => parse_env(spec).map_err(anyhow::Error::msg),
            None => Ok(EnvSpec::default()),
        }
    }
}

#[derive(Args)]
struct Bounds {
    /// Largest context the oracle enumerates, in nodes.
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    max_nodes: usize,
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    /// Largest number of pre-states examined.
    #[arg(long, default_value_t = u64::MAX)]
    store_bound: u64,
}

impl Bounds {
    fn options(&self) -> PurityOptions {
        PurityOptions {
            max_nodes: self.max_nodes,
            fuel: self.fuel,
            store_bound: self.store_bound,
            hole_type: None,
        }
    }
}

/// A term argument: literal source, `-` for stdin, or `@path`.
#[derive(Args)]
struct TermArg {
    #[arg(value_name = "TERM")]
    term: String,
}

impl TermArg {
    fn load(&self) -> Result<Term> {
        let text = if self.term == "-" {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        } else if let Some(path) = self.term.strip_prefix('@') {
            fs::read_to_string(path).with_context(|| format!("reading {path}"))?
        } else {
            self.term.clone()
        };
        Ok(parse(&text)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a judgment in each selected system.
    Typecheck {
        #[arg(long, value_enum, default_value = "all")]
        system: SystemArg,
        #[command(flatten)]
        env: EnvArgs,
        #[command(flatten)]
        term: TermArg,
    },
    /// Run a term, binding the environment in one pre-state.
    Eval {
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Print each rule application.
        #[arg(long)]
        trace: bool,
        /// Pre-state number: bit i is the Boolean held by binding i.
        #[arg(long, default_value_t = 0)]
        config: u64,
        #[command(flatten)]
        env: EnvArgs,
        #[command(flatten)]
        term: TermArg,
    },
    /// Purity according to each selected system.
    Purity {
        #[arg(long, value_enum, default_value = "all")]
        system: SystemArg,
        #[command(flatten)]
        env: EnvArgs,
        #[command(flatten)]
        term: TermArg,
    },
    /// Translate a term into the combined system.
    Encode {
        #[arg(long, value_enum)]
        from: SourceSystem,
        /// Check that the translated judgment holds.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        env: EnvArgs,
        #[command(flatten)]
        term: TermArg,
    },
    /// Semantic checks by bounded context enumeration.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Classify a directory of corpus files with every system and the oracle.
    Compare {
        dir: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Check a judgment script line by line.
    Script { file: PathBuf },
    /// Run a property suite: safety, reorder, beta, encode or algebra.
    Suite {
        name: Suite,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Generated cases per system.
        #[arg(long)]
        count: Option<usize>,
        /// Leave out the golden corpus entries.
        #[arg(long)]
        generated_only: bool,
        #[command(flatten)]
        bounds: Bounds,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Search for a context that tells the term apart from its bound value.
    Purity {
        /// Type of the holes, needed for terms without a simple type.
        #[arg(long, value_name = "TYPE")]
        hole: Option<String>,
        #[command(flatten)]
        bounds: Bounds,
        #[command(flatten)]
        env: EnvArgs,
        #[command(flatten)]
        term: TermArg,
    },
    /// Check that terms a system calls pure are observationally pure.
    Safety {
        #[arg(long, value_enum)]
        system: SystemArg,
        /// Corpus directory; generated terms when absent.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[command(flatten)]
        bounds: Bounds,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit(cli: &Cli, json: &impl Serialize, text: impl FnOnce() -> String) {
    let out = if cli.json {
        serde_json::to_string_pretty(json).expect("serializable") + "\n"
    } else {
        text()
    };
    // A closed pipe is not an error for the caller.
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
}

fn emit_report(cli: &Cli, mut report: Report, started: Instant) -> u8 {
    if cli.timing {
        report.wall_time = Some(started.elapsed().as_secs_f64());
    }
    emit(cli, &report, || report.to_text());
    report.exit_code() as u8
}

fn run(cli: &Cli) -> Result<u8> {
    let started = Instant::now();
    match &cli.command {
        Command::Typecheck { system, env, term } => {
            let (env, t) = (env.load()?, term.load()?);
            let mut ok = true;
            let mut rows = serde_json::Map::new();
            let mut text = String::new();
            for s in system.systems() {
                match s.judgment(&env, &t) {
                    Ok(j) => {
                        text.push_str(&format!("{s}: {j}\n"));
                        rows.insert(s.name().into(), json!({ "judgment": j }));
                    }
                    Err(e) => {
                        ok = false;
                        text.push_str(&format!("{s}: ill-typed: {e}\n"));
                        rows.insert(s.name().into(), json!({ "error": e.to_string() }));
                    }
                }
            }
            emit(cli, &json!({ "term": t.to_string(), "systems": rows }), || text);
            Ok(if ok { 0 } else { 1 })
        }
        Command::Eval {
            fuel,
            trace,
            config,
            env,
            term,
        } => {
            let (env, t) = (env.load()?, term.load()?);
            if *config >= env.config_count() {
                bail!("pre-state {config} out of range (environment has {})", env.config_count());
            }
            let (henv, store) = env.instantiate(*config);
            let mut tracer = Tracer::default();
            let outcome = eval_observed(&henv, store, &t, *fuel, &mut tracer);
            let mut out = json!({ "term": t.to_string(), "outcome": outcome.to_string() });
            if *trace {
                out["trace"] = json!(tracer.lines);
            }
            emit(cli, &out, || {
                let mut s = String::new();
                if *trace {
                    for l in &tracer.lines {
                        s.push_str(l);
                        s.push('\n');
                    }
                }
                s.push_str(&format!("{outcome}\n"));
                s
            });
            Ok(0)
        }
        Command::Purity { system, env, term } => {
            let (env, t) = (env.load()?, term.load()?);
            let mut rows = serde_json::Map::new();
            let mut text = String::new();
            let mut ok = true;
            for s in system.systems() {
                let word = match s.is_pure(&env, &t) {
                    Ok(true) => "pure".to_string(),
                    Ok(false) => "impure".to_string(),
                    Err(e) => {
                        ok = false;
                        format!("ill-typed: {e}")
                    }
                };
                text.push_str(&format!("{s}: {word}\n"));
                rows.insert(s.name().into(), json!(word));
            }
            emit(cli, &json!({ "term": t.to_string(), "systems": rows }), || text);
            Ok(if ok { 0 } else { 1 })
        }
        Command::Encode {
            from,
            check,
            env,
            term,
        } => {
            let (env, t) = (env.load()?, term.load()?);
            let encoded = match from {
                SourceSystem::Effect => encode_term_e(&t),
                SourceSystem::Ability => encode_term_a(&t),
            };
            if !*check {
                emit(cli, &json!({ "term": t.to_string(), "encoded": encoded.to_string() }), || {
                    format!("{encoded}\n")
                });
                return Ok(0);
            }
            let r = match from {
                SourceSystem::Effect => check_encoding_e(&env.effect_ctx(), &t),
                SourceSystem::Ability => check_encoding_a(&env.ability_ctx(), &t),
            };
            emit(cli, &r, || {
                let mut s = format!("encoded: {encoded}\n");
                for (label, v) in [
                    ("source", &r.source_judgment),
                    ("expected", &r.target_judgment),
                    ("derived", &r.synthesized),
                    ("error", &r.error),
                ] {
                    if let Some(v) = v {
                        s.push_str(&format!("{label}: {v}\n"));
                    }
                }
                let verdict = match r.holds {
                    Some(true) => "holds",
                    Some(false) => "fails",
                    None => "not applicable",
                };
                s.push_str(&format!("encoding {verdict}\n"));
                s
            });
            Ok(match r.holds {
                Some(true) => 0,
                _ => 1,
            })
        }
        Command::Oracle(OracleCommand::Purity {
            hole,
            bounds,
            env,
            term,
        }) => {
            let (env, t) = (env.load()?, term.load()?);
            let mut opts = bounds.options();
            if let Some(h) = hole {
                opts.hole_type = Some(SType::erase(&parse_annot(h)?));
            }
            let v = obs_purity(&t, &env, &opts).map_err(|e| anyhow::anyhow!("term has no simple type: {e}"))?;
            let json = json!({ "term": t.to_string(), "verdict": v });
            emit(cli, &json, || {
                let mut s = match &v.witness {
                    None => format!(
                        "pure up to bounds ({} contexts, {} inconclusive)\n",
                        v.contexts_checked, v.inconclusive
                    ),
                    Some(w) => format!(
                        "impure: context {} gives {} bound and {} in place (pre-state {})\n",
                        w.context, w.left, w.right, w.store_config
                    ),
                };
                s.push_str(&format!(
                    "bounds: contexts of {} nodes, fuel {}, {} pre-states\n",
                    v.bounds.context_size, v.bounds.fuel, v.bounds.store_configs
                ));
                s
            });
            Ok(0)
        }
        Command::Oracle(OracleCommand::Safety {
            system,
            corpus,
            seed,
            count,
            bounds,
        }) => {
            let opts = bounds.options();
            let mut report = Report::new("oracle safety", (&opts).into());
            let mut cases: Vec<(Option<String>, EnvSpec, Term, Option<SType>)> = Vec::new();
            match corpus {
                Some(dir) => {
                    for (file, entry) in read_corpus(dir)? {
                        report.inputs.push(file.clone());
                        match entry {
                            Ok(e) => cases.push((Some(file), e.env, e.term, e.hole)),
                            Err(e) => {
                                report.errors += 1;
                                report.per_term.push(TermRow {
                                    file: Some(file),
                                    error: Some(e.to_string()),
                                    ..TermRow::default()
                                });
                            }
                        }
                    }
                }
                None => report.seed = Some(*seed),
            }
            for s in system.systems() {
                let generated: Vec<(Option<String>, EnvSpec, Term, Option<SType>)> = if corpus.is_none() {
                    let env = safety_env();
                    Gen::new(*seed)
                        .corpus(s, &env, 8, *count)
                        .into_iter()
                        .map(|t| (None, env.clone(), t, None))
                        .collect()
                } else {
                    Vec::new()
                };
                for (file, env, t, hole) in cases.iter().chain(&generated) {
                    let purity = PurityOptions {
                        hole_type: hole.clone(),
                        ..opts.clone()
                    };
                    let case = safety_case(s, env, t, &purity);
                    report.count(&format!("{s}.terms"), 1);
                    report.count(&format!("{s}.typedPure"), (case.system_pure == Some(true)) as u64);
                    if case.violation {
                        report.violations += 1;
                        report.per_term.push(TermRow {
                            file: file.clone(),
                            term: case.term,
                            detail: Some(format!("{s} types it pure but the oracle finds it impure")),
                            witness: case.verdict.and_then(|v| v.witness),
                            ..TermRow::default()
                        });
                    }
                }
            }
            Ok(emit_report(cli, report, started))
        }
        Command::Compare { dir, bounds } => {
            let report = compare(read_corpus(dir)?, &bounds.options());
            Ok(emit_report(cli, report, started))
        }
        Command::Script { file } => {
            let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
            let results = run_script(&parse_script(&text)?);
            let failed = results.iter().filter(|r| !r.matches).count();
            let json = json!({ "lines": results, "matched": results.len() - failed, "failed": failed });
            emit(cli, &json, || {
                let mut s = String::new();
                for r in &results {
                    let mark = if r.matches { "ok  " } else { "FAIL" };
                    s.push_str(&format!("{mark} line {}: {}\n", r.line, r.source));
                    if !r.matches {
                        s.push_str(&format!("     expected {}\n", r.expected));
                        s.push_str(&format!("     derived  {}\n", r.derived.as_deref().unwrap_or("nothing")));
                    }
                    if let Some(n) = &r.note {
                        s.push_str(&format!("     note: {n}\n"));
                    }
                }
                s.push_str(&format!("{}/{} lines match\n", results.len() - failed, results.len()));
                s
            });
            Ok(if failed == 0 { 0 } else { 1 })
        }
        Command::Suite {
            name,
            seed,
            count,
            generated_only,
            bounds,
        } => {
            let opts = SuiteOptions {
                seed: *seed,
                count: *count,
                purity: bounds.options(),
                generated_only: *generated_only,
            };
            Ok(emit_report(cli, run_suite(*name, &opts), started))
        }
    }
}

/// Every `.lam` file in `dir`, sorted by name, parsed or with its error.
fn read_corpus(dir: &Path) -> Result<Vec<(String, Result<CorpusEntry, CorpusError>)>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|x| x == "lam"));
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().expect("file").to_string_lossy().into_owned();
            let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            Ok((name, parse_entry(&text)))
        })
        .collect()
}
