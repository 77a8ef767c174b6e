//! Command line front end: decide problem files, check candidate bodies,
//! enumerate solutions and generate reduction instances.
//!
//! Every run prints diagnostics to stderr and keeps stdout for the result
//! itself. Exit codes are stable: 0 solvable or valid, 1 unsolvable or
//! invalid, 2 unknown, 3 usage or parse error, 4 resource limit.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use regsyn_core::fd::{self, FiniteModel};
use regsyn_core::parser::{parse_candidate, parse_problem, print_problem};
use regsyn_core::problem::{SygusProblem, Theory, Verdict};
use regsyn_core::reductions::{self, CfgPair, PcpInstance, SreuInstance};
use regsyn_core::regular;
use regsyn_core::term::Term;
use regsyn_core::Error;

const DEFAULT_BOUND: usize = 10;
const ENUM_LIMIT: usize = 1_000_000;

#[derive(Parser)]
#[command(
    name = "regsyn",
    version,
    about = "Decide, check and generate syntax-guided synthesis problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a problem file and print a one-line result record
    Solve {
        /// Problem file
        file: PathBuf,
        /// Decision engine
        #[arg(long, value_enum, default_value_t = Engine::Auto)]
        engine: Engine,
        /// Finite model (JSON) for finite-domain problems
        #[arg(long)]
        model: Option<PathBuf>,
        /// Candidate size bound for bounded search
        #[arg(long)]
        max_size: Option<usize>,
        /// Write the solution automaton to this path as DOT
        #[arg(long)]
        emit_automaton: Option<PathBuf>,
    },
    /// Test one candidate body against a problem file
    Check {
        /// Problem file
        file: PathBuf,
        /// Candidate body for the synthesis target
        #[arg(long)]
        candidate: String,
        /// Finite model (JSON) for finite-domain problems
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Generate a problem file from a reduction input
    Gen {
        /// One of: pcp-tree, pcp-regular, pcp-arrays, pcp-wellformed, sreu, cfg-bv
        kind: String,
        /// Reduction input file
        spec: PathBuf,
        /// Output path
        #[arg(short, long)]
        out: PathBuf,
        /// First constructor arity for pcp-wellformed
        #[arg(long, default_value_t = 1)]
        arity_f: usize,
        /// Second constructor arity for pcp-wellformed
        #[arg(long, default_value_t = 2)]
        arity_g: usize,
    },
    /// List the solutions up to a size bound, one per line
    Enum {
        /// Problem file
        file: PathBuf,
        /// Largest candidate size to report
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        max_size: usize,
        /// Decision engine
        #[arg(long, value_enum, default_value_t = Engine::Auto)]
        engine: Engine,
        /// Finite model (JSON) for finite-domain problems
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    /// Pick by logic, falling back to bounded search when needed
    Auto,
    /// Tree-automaton construction for equational problems
    RegularEuf,
    /// Fixpoint enumeration over a finite model
    Fd,
    /// Size-bounded candidate search against a checker
    Bounded,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = if matches!(e, Error::ResourceLimit(_)) {
            4
        } else {
            3
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 3,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let run = match cli.command {
        Command::Solve {
            file,
            engine,
            model,
            max_size,
            emit_automaton,
        } => cmd_solve(
            &file,
            engine,
            model.as_deref(),
            max_size,
            emit_automaton.as_deref(),
        ),
        Command::Check {
            file,
            candidate,
            model,
        } => cmd_check(&file, &candidate, model.as_deref()),
        Command::Gen {
            kind,
            spec,
            out,
            arity_f,
            arity_g,
        } => cmd_gen(&kind, &spec, &out, arity_f, arity_g),
        Command::Enum {
            file,
            max_size,
            engine,
            model,
        } => cmd_enum(&file, max_size, engine, model.as_deref()),
    };
    match run {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    fs::write(path, content).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_problem(path: &Path) -> Result<SygusProblem, Failure> {
    Ok(parse_problem(&read(path)?)?)
}

fn load_model(path: Option<&Path>) -> Result<FiniteModel, Failure> {
    let Some(path) = path else {
        return Err(usage("this problem needs --model <file.json>"));
    };
    Ok(FiniteModel::from_json(&read(path)?)?)
}

fn cmd_solve(
    file: &Path,
    engine: Engine,
    model: Option<&Path>,
    max_size: Option<usize>,
    emit: Option<&Path>,
) -> Result<ExitCode, Failure> {
    let problem = load_problem(file)?;
    let (verdict, name) = match engine {
        Engine::Auto => match problem.theory {
            Theory::Euf => match regular::solve(&problem) {
                Ok(v) => (v, "regular-euf"),
                Err(e @ (Error::NotRegular(_) | Error::IteInGrammar(_))) => {
                    let bound = max_size.unwrap_or(DEFAULT_BOUND);
                    eprintln!("note: {e}; trying bounded search up to size {bound}");
                    (bounded_verdict(&problem, model, bound)?, "bounded")
                }
                Err(e) => return Err(e.into()),
            },
            Theory::Fd => (fd::solve_fd(&problem, &load_model(model)?)?, "fd"),
            Theory::Bv => {
                let bound = max_size.unwrap_or(DEFAULT_BOUND);
                (bounded_verdict(&problem, model, bound)?, "bounded")
            }
        },
        Engine::RegularEuf => (regular::solve(&problem)?, "regular-euf"),
        Engine::Fd => (fd::solve_fd(&problem, &load_model(model)?)?, "fd"),
        Engine::Bounded => {
            let bound = max_size.ok_or_else(|| usage("bounded search needs --max-size"))?;
            (bounded_verdict(&problem, model, bound)?, "bounded")
        }
    };
    if let Some(path) = emit {
        if let Verdict::Solvable {
            solutions: Some(automaton),
            ..
        } = &verdict
        {
            write_file(path, &automaton.to_dot("solutions"))?;
        } else {
            eprintln!("note: no solution automaton to write");
        }
    }
    if let Verdict::Unknown { bound } = &verdict {
        eprintln!("note: exhausted candidates up to size {bound}");
    }
    let witness = verdict.witness().map_or("-".to_string(), Term::to_string);
    let (word, code) = match verdict {
        Verdict::Solvable { .. } => ("solvable", 0),
        Verdict::Unsolvable => ("unsolvable", 1),
        Verdict::Unknown { .. } => ("unknown", 2),
    };
    println!("result={word} witness={witness} engine={name}");
    Ok(ExitCode::from(code))
}

fn bounded_verdict(
    problem: &SygusProblem,
    model: Option<&Path>,
    bound: usize,
) -> Result<Verdict, Failure> {
    let verdict = match problem.theory {
        Theory::Euf => {
            reductions::bounded_solve(problem, |t| regular::check_candidate(problem, t), bound)?
        }
        Theory::Bv => {
            reductions::bounded_solve(problem, |t| reductions::check_bv_candidate(t), bound)?
        }
        Theory::Fd => {
            let model = load_model(model)?;
            reductions::bounded_solve(problem, |t| fd::check_candidate(problem, &model, t), bound)?
        }
    };
    Ok(verdict)
}

fn cmd_check(file: &Path, candidate: &str, model: Option<&Path>) -> Result<ExitCode, Failure> {
    let problem = load_problem(file)?;
    let body = parse_candidate(candidate, &problem.signature)?;
    let ok = match problem.theory {
        Theory::Euf => regular::check_candidate(&problem, &body)?,
        Theory::Fd => fd::check_candidate(&problem, &load_model(model)?, &body)?,
        Theory::Bv => reductions::check_bv_candidate(&body)?,
    };
    println!("{}", if ok { "valid" } else { "invalid" });
    Ok(ExitCode::from(if ok { 0 } else { 1 }))
}

fn cmd_gen(
    kind: &str,
    spec: &Path,
    out: &Path,
    arity_f: usize,
    arity_g: usize,
) -> Result<ExitCode, Failure> {
    let text = read(spec)?;
    let output = match kind {
        "pcp-tree" => print_problem(&reductions::gen_pcp_tree(&PcpInstance::from_json(&text)?)?),
        "pcp-arrays" => {
            print_problem(&reductions::gen_pcp_arrays(&PcpInstance::from_json(&text)?)?)
        }
        "pcp-regular" => {
            let (problem, words) = reductions::gen_pcp_regular(&PcpInstance::from_json(&text)?)?;
            let mut page = String::from("; word grammar over the same blocks:\n");
            for line in words.to_text().lines() {
                page.push_str("; ");
                page.push_str(line);
                page.push('\n');
            }
            page.push_str(&print_problem(&problem));
            page
        }
        "pcp-wellformed" => {
            reductions::gen_pcp_wellformed(&PcpInstance::from_json(&text)?, arity_f, arity_g)?
                .to_text()
        }
        "sreu" => print_problem(&reductions::gen_sreu(&SreuInstance::from_text(&text)?)?),
        "cfg-bv" => print_problem(&reductions::gen_cfg_bv(&CfgPair::from_text(&text)?)?),
        other => return Err(usage(format!("unknown generator kind: {other}"))),
    };
    write_file(out, &output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_enum(
    file: &Path,
    max_size: usize,
    engine: Engine,
    model: Option<&Path>,
) -> Result<ExitCode, Failure> {
    let problem = load_problem(file)?;
    let mut terms = match engine {
        Engine::Auto => match problem.theory {
            Theory::Euf => match regular::solve(&problem) {
                Ok(v) => regular_language(&v, max_size),
                Err(e @ (Error::NotRegular(_) | Error::IteInGrammar(_))) => {
                    eprintln!("note: {e}; trying bounded enumeration up to size {max_size}");
                    bounded_candidates(&problem, model, max_size)?
                }
                Err(e) => return Err(e.into()),
            },
            Theory::Fd => fd_solutions(&problem, &load_model(model)?, max_size)?,
            Theory::Bv => bounded_candidates(&problem, model, max_size)?,
        },
        Engine::RegularEuf => regular_language(&regular::solve(&problem)?, max_size),
        Engine::Fd => fd_solutions(&problem, &load_model(model)?, max_size)?,
        Engine::Bounded => bounded_candidates(&problem, model, max_size)?,
    };
    terms.sort();
    terms.dedup();
    for t in &terms {
        println!("{t}");
    }
    Ok(ExitCode::from(if terms.is_empty() { 1 } else { 0 }))
}

fn regular_language(verdict: &Verdict, max_size: usize) -> Vec<Term> {
    match verdict {
        Verdict::Solvable {
            solutions: Some(automaton),
            ..
        } => automaton.enumerate_language(max_size, ENUM_LIMIT),
        _ => Vec::new(),
    }
}

fn bounded_candidates(
    problem: &SygusProblem,
    model: Option<&Path>,
    max_size: usize,
) -> Result<Vec<Term>, Failure> {
    let candidates = problem.grammar.enumerate(max_size, ENUM_LIMIT);
    let mut keep = Vec::new();
    match problem.theory {
        Theory::Euf => {
            for t in candidates {
                if regular::check_candidate(problem, &t)? {
                    keep.push(t);
                }
            }
        }
        Theory::Bv => {
            for t in candidates {
                if reductions::check_bv_candidate(&t)? {
                    keep.push(t);
                }
            }
        }
        Theory::Fd => {
            let model = load_model(model)?;
            for t in candidates {
                if fd::check_candidate(problem, &model, &t)? {
                    keep.push(t);
                }
            }
        }
    }
    Ok(keep)
}

fn fd_solutions(
    problem: &SygusProblem,
    model: &FiniteModel,
    max_size: usize,
) -> Result<Vec<Term>, Failure> {
    let sets = fd::fixpoint_enumerate(problem, model, None)?;
    let mut keep = Vec::new();
    for (term, _) in &sets[problem.grammar.start()] {
        if term.size() <= max_size && fd::check_candidate(problem, model, term)? {
            keep.push(term.clone());
        }
    }
    Ok(keep)
}
