//! `dutyroster`: headless driver for the rostering pipeline.
//!
//! Exit status: 0 on success, 1 when findings or disagreements were
//! reported, 2 on errors (including usage errors).

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dutyroster_core::check::{compare_rosters, quality_report, render_report, validate_hard, QualityReport, Timings};
use dutyroster_core::derive::derive;
use dutyroster_core::document;
use dutyroster_core::mip::{model_statistics, render_listing};
use dutyroster_core::model::RosterInstance;
use dutyroster_core::par::ExecMode;
use dutyroster_core::pipeline::{compare_backends, prepare, run_pipeline};
use dutyroster_core::scenarios::{self, random_tiny};
use dutyroster_core::solver::{emit_mps, Backend, RosterSolution, SolveRequest, SolverConfig};
use dutyroster_service::{parse_tokens, serve, ServiceConfig};

#[derive(Parser)]
#[command(name = "dutyroster", version, about = "Physician duty rostering")]
struct Cli {
    /// Run derivation and the oracle on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// External solver executable.
    #[arg(long, global = true)]
    solver: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Doc,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    External,
    Oracle,
}

#[derive(Subcommand)]
enum Command {
    /// Print a bundled scenario as an instance document.
    Demo {
        #[arg(long, default_value = "tiny-demo")]
        scenario: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Solve an instance and write the roster and its report.
    Solve {
        /// Instance document; `-` reads standard input.
        #[arg(long, short, default_value = "-")]
        instance: PathBuf,
        #[arg(long, default_value_t = 0.03)]
        gap: f64,
        #[arg(long = "time-limit", default_value_t = 600.0)]
        time_limit: f64,
        #[arg(long, value_enum, default_value = "external")]
        backend: BackendArg,
        #[arg(long = "roster-out", default_value = "roster.json")]
        roster_out: PathBuf,
        #[arg(long = "report-out", default_value = "report.json")]
        report_out: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Also write the derived sets.
        #[arg(long = "dump-derived")]
        dump_derived: Option<PathBuf>,
    },
    /// Check a roster against every hard rule of an instance.
    Validate {
        #[arg(long, short)]
        instance: PathBuf,
        #[arg(long, short)]
        roster: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Quality indicators of a roster, optionally against a second one.
    Report {
        #[arg(long, short)]
        instance: PathBuf,
        #[arg(long, short)]
        roster: PathBuf,
        #[arg(long)]
        compare: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Write the model of an instance as fixed-format MPS with its name map.
    ExportMps {
        #[arg(long, short)]
        instance: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Name map; defaults to the output path with `.names`.
        #[arg(long)]
        names: Option<PathBuf>,
        /// Readable listing with one constraint per line.
        #[arg(long)]
        listing: Option<PathBuf>,
    },
    /// Compare the oracle with the external solver on random tiny instances.
    OracleCheck {
        #[arg(long, default_value_t = 100)]
        n: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, short)]
        verbose: bool,
    },
    /// Start the HTTP service; flags override the environment.
    Serve {
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        listen: Option<String>,
        /// `token=planner,token=physician:<id>`
        #[arg(long)]
        tokens: Option<String>,
    },
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn write_output(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_instance(path: &Path) -> Result<RosterInstance> {
    document::decode_instance(&read_input(path)?).with_context(|| format!("instance {}", path.display()))
}

fn load_roster(path: &Path) -> Result<RosterSolution> {
    document::decode_roster(&read_input(path)?).with_context(|| format!("roster {}", path.display()))
}

fn show_report(r: &QualityReport, format: Format) -> String {
    match format {
        Format::Table => render_report(r),
        Format::Doc => document::encode_report(r),
    }
}

fn report_of(inst: &RosterInstance, roster: &RosterSolution, mode: ExecMode) -> Result<QualityReport> {
    let der = derive(inst, mode)?;
    let t = Timings { solver_seconds: roster.metadata.solver_seconds, total_seconds: roster.metadata.total_seconds };
    Ok(quality_report(roster, inst, &der, &inst.weights, t)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mode = if cli.sequential { ExecMode::Sequential } else { ExecMode::default() };
    let solver = SolverConfig { path: cli.solver, ..Default::default() };
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Demo { scenario, out: path } => {
            let Some(inst) = scenarios::by_name(&scenario) else {
                bail!("unknown scenario {scenario:?}; choose one of {}, cardiology-full", scenarios::SCENARIOS.join(", "));
            };
            let text = document::encode_instance(&inst);
            match path {
                Some(p) => write_output(&p, &text)?,
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::Solve { instance, gap, time_limit, backend, roster_out, report_out, format, dump_derived } => {
            let inst = load_instance(&instance)?;
            let backend = match backend {
                BackendArg::External => Backend::External,
                BackendArg::Oracle => Backend::Oracle,
            };
            let req = SolveRequest { gap, time_limit_seconds: time_limit, backend };
            let res = run_pipeline(&inst, &req, &solver, mode)?;
            write_output(&roster_out, &document::encode_roster(&res.roster))?;
            write_output(&report_out, &document::encode_report(&res.report))?;
            if let Some(p) = dump_derived {
                write_output(&p, &document::encode_derived(&res.derived))?;
            }
            let stats = model_statistics(&res.model);
            writeln!(
                out,
                "{:?}: {} variables, {} constraints, objective {}",
                res.raw.status,
                stats.variables,
                stats.constraints,
                res.raw.objective.map_or("none".into(), |o| o.to_string())
            )?;
            out.write_all(show_report(&res.report, format).as_bytes())?;
            if !res.hard_findings.is_empty() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Validate { instance, roster, format } => {
            let inst = load_instance(&instance)?;
            let roster = load_roster(&roster)?;
            let der = derive(&inst, mode)?;
            let findings = validate_hard(&roster, &inst, &der)?;
            match format {
                Format::Doc => out.write_all(document::encode_findings(&findings).as_bytes())?,
                Format::Table => {
                    for f in &findings {
                        writeln!(out, "({}) {}: {}", f.family, f.subjects.join(", "), f.message)?;
                    }
                    writeln!(out, "{} hard findings", findings.len())?;
                }
            }
            if !findings.is_empty() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Report { instance, roster, compare, format } => {
            let inst = load_instance(&instance)?;
            let first = report_of(&inst, &load_roster(&roster)?, mode)?;
            match compare {
                None => out.write_all(show_report(&first, format).as_bytes())?,
                Some(p) => {
                    let second = report_of(&inst, &load_roster(&p)?, mode)?;
                    let fmt = |v: Option<f64>| v.map_or("-".to_owned(), |x| format!("{x}"));
                    for d in compare_rosters(&first, &second) {
                        writeln!(out, "{}\t{}\t{}\t{}", d.indicator, fmt(d.first), fmt(d.second), fmt(d.delta))?;
                    }
                }
            }
        }
        Command::ExportMps { instance, out: path, names, listing } => {
            let inst = load_instance(&instance)?;
            let (_, model) = prepare(&inst, mode)?;
            let mps = emit_mps(&model, &inst.department)?;
            write_output(&path, &mps.text)?;
            write_output(&names.unwrap_or_else(|| path.with_extension("names")), &mps.names.to_text())?;
            if let Some(l) = listing {
                write_output(&l, &render_listing(&model))?;
            }
            writeln!(out, "{} variables, {} constraints", model.variables.len(), model.constraints.len())?;
        }
        Command::OracleCheck { n, seed, verbose } => {
            let mut agree = 0;
            for i in 0..n {
                let s = seed.wrapping_add(i);
                let c = compare_backends(&random_tiny(s), &solver, mode)?;
                let ok = c.agree(1e-6);
                agree += u64::from(ok);
                if verbose || !ok {
                    writeln!(
                        out,
                        "seed {s}: {} oracle {:?} {:?}, external {:?} {:?}",
                        if ok { "agree" } else { "DISAGREE" },
                        c.oracle,
                        c.oracle_objective,
                        c.external,
                        c.external_objective
                    )?;
                }
            }
            writeln!(out, "{agree}/{n} agree")?;
            if agree != n {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Serve { store, listen, tokens } => {
            let mut config = ServiceConfig::from_env().map_err(anyhow::Error::msg)?;
            if let Some(s) = store {
                config.store_path = s;
            }
            if let Some(l) = listen {
                config.listen = l.parse().with_context(|| format!("listen address {l}"))?;
            }
            if let Some(t) = tokens {
                config.tokens = parse_tokens(&t).map_err(anyhow::Error::msg)?;
            }
            if solver.path.is_some() {
                config.solver = solver;
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(config)).map_err(|e| anyhow::anyhow!("{e}"))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
