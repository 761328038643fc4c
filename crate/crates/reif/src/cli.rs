//! Command-line front end: `run`, `repl` and `bench` subcommands.
//!
//! Answer display follows the conventional top-level shell: the first
//! answer is prefixed with three spaces, alternatives with `;  `. The
//! final line ends with `.`; when exhaustion required further work after
//! the last answer (a leftover choicepoint), a closing `;  false.` line
//! reports it.

use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::bench;
use crate::db::Database;
use crate::fmt::format_answer;
use crate::machine::{Answer, Machine};
use crate::parser;
use crate::state::State;
use crate::stdlib;

#[derive(Parser)]
#[command(name = "reif", about = "Pure logic programming with reified equality and dif/2")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load programs and run one query
    Run {
        /// Program files to load on top of the built-in library
        files: Vec<PathBuf>,
        /// Query text, terminated by '.'
        #[arg(short, long)]
        query: String,
        /// Enumerate all answers (default)
        #[arg(long, conflicts_with = "max_answers")]
        all: bool,
        /// Stop after N answers
        #[arg(short = 'n', long = "max-answers")]
        max_answers: Option<usize>,
        /// Apply goal expansion at load time
        #[arg(long)]
        expand: bool,
        /// Print a final `% steps=N cells=M cps=K` comment line
        #[arg(long)]
        stats: bool,
        /// Unify with occurs check
        #[arg(long)]
        occurs_check: bool,
    },
    /// Interactive query loop
    Repl {
        files: Vec<PathBuf>,
        #[arg(long)]
        expand: bool,
        #[arg(long)]
        occurs_check: bool,
    },
    /// Run the impure-vs-pure comparison workloads
    Bench {
        #[arg(long, default_value_t = bench::DEFAULT_REPS)]
        reps: usize,
    },
}

pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { files, query, all: _, max_answers, expand, stats, occurs_check } => {
            cmd_run(&files, &query, max_answers, expand, stats, occurs_check)
        }
        Command::Repl { files, expand, occurs_check } => cmd_repl(&files, expand, occurs_check),
        Command::Bench { reps } => {
            let rows = bench::run_all(reps);
            print!("{}", bench::table(&rows));
            println!("{}", bench::machine_lines(&rows));
            0
        }
    }
}

fn load_files(files: &[PathBuf], expand: bool) -> Result<Database, String> {
    let mut db = stdlib();
    for path in files {
        let src = std::fs::read_to_string(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        db.load_str(&src)
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(if expand { db.specialized() } else { db })
}

/// Exit status: 0 with at least one answer, 1 with none, 2 on error.
pub fn cmd_run(
    files: &[PathBuf],
    query: &str,
    max_answers: Option<usize>,
    expand: bool,
    stats: bool,
    occurs_check: bool,
) -> i32 {
    let db = match load_files(files, expand) {
        Ok(db) => db,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let parsed = match parser::parse_query(query) {
        Ok(q) => q,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let mut state = State::new();
    state.occurs_check = occurs_check;
    let mut machine = match Machine::with_state(&db, &parsed, state) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut prev: Option<Answer> = None;
    let mut count = 0usize;
    let mut stopped_early = false;
    loop {
        match machine.next_answer() {
            Err(e) => {
                if let Some(p) = prev.take() {
                    let _ = writeln!(out, "{}", answer_line(&p, count == 1));
                }
                let _ = out.flush();
                eprintln!("{e}");
                return 2;
            }
            Ok(None) => break,
            Ok(Some(a)) => {
                if let Some(p) = prev.replace(a) {
                    let _ = writeln!(out, "{}", answer_line(&p, count == 1));
                }
                count += 1;
                if max_answers.is_some_and(|max| count >= max) {
                    stopped_early = true;
                    break;
                }
            }
        }
    }
    match prev {
        Some(p) => {
            if stopped_early || p.pending_choicepoints == 0 {
                let _ = writeln!(out, "{}.", answer_line(&p, count == 1));
            } else {
                let _ = writeln!(out, "{}", answer_line(&p, count == 1));
                let _ = writeln!(out, ";  false.");
            }
        }
        None => {
            let _ = writeln!(out, "   false.");
        }
    }
    if stats {
        let s = machine.stats();
        let _ = writeln!(
            out,
            "% steps={} cells={} cps={}",
            s.steps, s.cells_visited, s.choicepoints_created
        );
    }
    let _ = out.flush();
    if count > 0 {
        0
    } else {
        1
    }
}

fn answer_line(a: &Answer, is_first: bool) -> String {
    let prefix = if is_first { "   " } else { ";  " };
    format!("{prefix}{}", format_answer(a))
}

/// Reads `?- Query.` lines; a lone `;` requests the next answer, `.`
/// stops the current query; `:load path` merges another program file.
pub fn cmd_repl(files: &[PathBuf], expand: bool, occurs_check: bool) -> i32 {
    let mut db = match load_files(files, expand) {
        Ok(db) => db,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        print!("?- ");
        let _ = std::io::stdout().flush();
        let Some(Ok(line)) = lines.next() else { return 0 };
        let line = line.trim().to_string();
        if line.is_empty() {
            continue;
        }
        if line == "halt." {
            return 0;
        }
        if let Some(path) = line.strip_prefix(":load ") {
            match std::fs::read_to_string(path.trim()) {
                Ok(src) => {
                    let result = db.load_str(&src);
                    match result {
                        Ok(()) => {
                            if expand {
                                db = db.specialized();
                            }
                            println!("% loaded {}", path.trim());
                        }
                        Err(e) => println!("% {e}"),
                    }
                }
                Err(e) => println!("% {}: {e}", path.trim()),
            }
            continue;
        }
        let parsed = match parser::parse_query(&line) {
            Ok(q) => q,
            Err(e) => {
                println!("% {e}");
                continue;
            }
        };
        let mut state = State::new();
        state.occurs_check = occurs_check;
        let mut machine = match Machine::with_state(&db, &parsed, state) {
            Ok(m) => m,
            Err(e) => {
                println!("{e}");
                continue;
            }
        };
        run_interactive(&mut machine, &mut lines);
    }
}

fn run_interactive(
    machine: &mut Machine,
    lines: &mut impl Iterator<Item = std::io::Result<String>>,
) {
    let mut count = 0usize;
    loop {
        match machine.next_answer() {
            Err(e) => {
                println!("{e}");
                return;
            }
            Ok(None) => {
                if count == 0 {
                    println!("   false.");
                } else {
                    println!(";  false.");
                }
                return;
            }
            Ok(Some(a)) => {
                count += 1;
                if a.pending_choicepoints == 0 {
                    println!("{}.", answer_line(&a, count == 1));
                    return;
                }
                print!("{}", answer_line(&a, count == 1));
                let _ = std::io::stdout().flush();
                match lines.next() {
                    Some(Ok(l)) if l.trim() == ";" => {
                        println!();
                    }
                    _ => {
                        println!(".");
                        return;
                    }
                }
            }
        }
    }
}
