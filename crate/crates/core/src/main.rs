use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use langcert::certify::emit_certificate;
use langcert::diag::{explain, Code, Diagnostic};
use langcert::driver::{check_file, run_corpus, CheckOptions, Verdict};
use langcert::oracle::{
    elaborate_with, fuzz_soundness, print_closed, ClosedType, EvalOutcome, FuzzConfig, Interpreter,
};
use langcert::par::with_big_stack;
use langcert::syntax::{load, parse_closed_term};

#[derive(Parser)]
#[command(name = "langcert", version, about = "Checks small-step language definitions for type soundness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one language file.
    Check {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        /// Print the long explanation of each diagnostic.
        #[arg(long)]
        explain: bool,
        /// Print the entailment search of each preservation query.
        #[arg(long)]
        trace_entailment: bool,
    },
    /// Check every `.mod` file in a directory against a manifest.
    Corpus {
        dir: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        json: bool,
        /// Check files one at a time.
        #[arg(long)]
        serial: bool,
    },
    /// Evaluate a closed term.
    Run {
        file: PathBuf,
        #[arg(long)]
        expr: String,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
    },
    /// Type a closed term.
    Typeof {
        file: PathBuf,
        #[arg(long)]
        expr: String,
    },
    /// Evaluate random well-typed terms looking for soundness failures.
    Fuzz {
        file: PathBuf,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 6)]
        depth: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        serial: bool,
    },
    /// Write the soundness certificate of a language.
    Certify {
        file: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Explain a diagnostic code.
    Explain { code: String },
}

fn print_diags(diags: &[Diagnostic], long: bool) {
    for d in diags {
        eprintln!("{d}");
        if long {
            for line in explain(d.code).lines() {
                eprintln!("    {line}");
            }
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn read(file: &Path) -> Result<(String, String), ExitCode> {
    let path = file.display().to_string();
    match std::fs::read_to_string(file) {
        Ok(t) => Ok((path, t)),
        Err(e) => {
            eprintln!("{path}: cannot read file: {e}");
            Err(ExitCode::from(2))
        }
    }
}

fn interpreter(file: &Path) -> Result<Interpreter, ExitCode> {
    let analysis = check_file(file, &CheckOptions::default());
    let Some(lang) = analysis.lang else {
        print_diags(&analysis.report.diagnostics, false);
        return Err(ExitCode::from(2));
    };
    Ok(Interpreter::new(elaborate_with(&lang, analysis.errctx.as_ref())))
}

fn run(cli: Cli) -> ExitCode {
    let code = |v: Verdict| ExitCode::from(v.exit_code() as u8);
    match cli.command {
        Command::Check {
            file,
            json,
            explain: long,
            trace_entailment,
        } => {
            let opts = CheckOptions {
                trace: trace_entailment,
                ..CheckOptions::default()
            };
            let a = check_file(&file, &opts);
            let r = &a.report;
            print_diags(&r.diagnostics, long);
            if json {
                println!("{}", to_json(r));
            } else {
                if trace_entailment {
                    for c in &a.preservation {
                        println!("rule {}", c.rule);
                        for line in &c.trace {
                            println!("  {line}");
                        }
                    }
                }
                println!("{}: {}", r.language, r.verdict);
            }
            code(r.verdict)
        }
        Command::Corpus {
            dir,
            manifest,
            json,
            serial,
        } => match run_corpus(&dir, &manifest, &CheckOptions::default(), serial) {
            Ok(r) => {
                if json {
                    println!("{}", to_json(&r));
                } else {
                    for e in &r.entries {
                        let status = if e.matches { "ok" } else { "MISMATCH" };
                        let codes: Vec<&str> = e.codes.iter().map(|c| c.as_str()).collect();
                        println!("{status:8} {:28} {} {}", e.file, e.verdict, codes.join(" "));
                    }
                    for m in &r.missing {
                        println!("{:8} {m}", "MISSING");
                    }
                    println!("{} passed, {} failed, {:.0} ms", r.passed, r.failed, r.timing_ms);
                }
                ExitCode::from(if r.all_match() { 0 } else { 1 })
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(2)
            }
        },
        Command::Run {
            file,
            expr,
            max_steps,
        } => {
            let interp = match interpreter(&file) {
                Ok(i) => i,
                Err(c) => return c,
            };
            let t = match parse_closed_term(&interp.rules.signature, &expr) {
                Ok(t) => t,
                Err(d) => {
                    eprintln!("{d}");
                    return ExitCode::from(2);
                }
            };
            let (trace, outcome) = interp.run(&t, max_steps);
            for t in &trace {
                println!("{}", print_closed(t));
            }
            match outcome {
                EvalOutcome::Value { .. } => println!("value"),
                EvalOutcome::Error { .. } => println!("error"),
                EvalOutcome::Stuck { .. } => {
                    println!("stuck");
                    return ExitCode::from(1);
                }
                EvalOutcome::StepBudgetExhausted { steps, .. } => {
                    println!("step budget exhausted after {steps} steps")
                }
            }
            ExitCode::SUCCESS
        }
        Command::Typeof { file, expr } => {
            let interp = match interpreter(&file) {
                Ok(i) => i,
                Err(c) => return c,
            };
            let t = match parse_closed_term(&interp.rules.signature, &expr) {
                Ok(t) => t,
                Err(d) => {
                    eprintln!("{d}");
                    return ExitCode::from(2);
                }
            };
            let (ty, diags) = interp.typeof_closed(&t);
            print_diags(&diags, false);
            match ty {
                ClosedType::Typed { ty, .. } => {
                    println!("{}", print_closed(&ty));
                    ExitCode::SUCCESS
                }
                ClosedType::Untypable => {
                    println!("untypable");
                    ExitCode::from(1)
                }
                ClosedType::Undecided => {
                    println!("undecided");
                    ExitCode::from(1)
                }
            }
        }
        Command::Fuzz {
            file,
            count,
            depth,
            seed,
            max_steps,
            json,
            serial,
        } => {
            let (path, text) = match read(&file) {
                Ok(x) => x,
                Err(c) => return c,
            };
            let lang = match load(&path, &text) {
                Ok(l) => l,
                Err(ds) => {
                    print_diags(&ds, false);
                    return ExitCode::from(2);
                }
            };
            let cfg = FuzzConfig {
                count,
                depth,
                max_steps,
                seed,
                serial,
            };
            let r = fuzz_soundness(&langcert::oracle::elaborate(&lang), &cfg);
            if json {
                println!("{}", to_json(&r));
            } else {
                println!(
                    "{}: {} generated, {} generation failures, {} stuck, {} preservation violations, {} over budget",
                    r.language,
                    r.generated,
                    r.generation_failures,
                    r.stuck.len(),
                    r.preservation_violations.len(),
                    r.budget_exhausted
                );
                for f in &r.stuck {
                    println!("stuck at term {} of type {}: {}", f.index, f.ty, f.trace.join(" --> "));
                }
                for f in &r.preservation_violations {
                    println!(
                        "type {} lost at term {}: {} --> {}",
                        f.ty,
                        f.index,
                        f.trace.join(" --> "),
                        f.successor.as_deref().unwrap_or("?")
                    );
                }
                for t in &r.value_overlaps {
                    println!("warning {}: value {t} also steps or is an error", Code::W003);
                }
            }
            ExitCode::from(if r.sound() { 0 } else { 1 })
        }
        Command::Certify { file, out } => {
            let a = check_file(&file, &CheckOptions::default());
            print_diags(&a.report.diagnostics, false);
            if let Err(e) = std::fs::write(&out, emit_certificate(&a)) {
                eprintln!("{}: cannot write certificate: {e}", out.display());
                return ExitCode::from(2);
            }
            code(a.report.verdict)
        }
        Command::Explain { code } => match code.parse::<Code>() {
            Ok(c) => {
                println!("{c}: {}", c.title());
                println!("{}", explain(c));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(2)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    with_big_stack(|| run(cli))
}
