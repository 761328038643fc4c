//! Impure-vs-pure comparison workloads with deterministic step counts.
//!
//! Two workloads: searching `z` in the list of letters a..z followed by
//! a space atom, and searching the 10th element of a `Key-Value` pair
//! list by key (keys k1..k26 with values v1..v26, searching k10). Each
//! contender answers the same question; step counts are run-to-run
//! identical, wall times are informational.

use std::time::Instant;

use crate::machine::Machine;
use crate::parser::{self, ParsedQuery};
use crate::state::SolveStats;
use crate::stdlib;

pub const DEFAULT_REPS: usize = 100_000;

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub workload: &'static str,
    pub contender: &'static str,
    pub answers: usize,
    pub stats: SolveStats,
    /// Median wall time of 5 timed runs of `reps` repetitions, in ms.
    pub millis: f64,
}

struct Contender {
    name: &'static str,
    query: ParsedQuery,
    expanded: bool,
}

fn letters_list() -> String {
    let mut items: Vec<String> = (b'a'..=b'z').map(|c| char::from(c).to_string()).collect();
    items.push("' '".to_string());
    format!("[{}]", items.join(","))
}

fn pairs_list() -> String {
    let items: Vec<String> = (1..=26).map(|i| format!("k{i}-v{i}")).collect();
    format!("[{}]", items.join(","))
}

fn contenders(workload: &str) -> Vec<Contender> {
    let (once, dif, if_, expanded) = match workload {
        "letters" => {
            let l = letters_list();
            (
                format!("once(member(z, {l}))."),
                format!("memberd_dif(z, {l})."),
                format!("memberd(z, {l})."),
                format!("memberd(z, {l})."),
            )
        }
        "keyed" => {
            let p = pairs_list();
            (
                format!("once(member(k10-V, {p}))."),
                format!("memberk_dif(k10, {p}, V)."),
                format!("memberk(k10, {p}, V)."),
                format!("memberk(k10, {p}, V)."),
            )
        }
        _ => unreachable!(),
    };
    let parse = |s: &str| parser::parse_query(s).expect("bench query parses");
    vec![
        Contender { name: "once_member", query: parse(&once), expanded: false },
        Contender { name: "memberd_dif", query: parse(&dif), expanded: false },
        Contender { name: "memberd_if", query: parse(&if_), expanded: false },
        Contender { name: "memberd_expanded", query: parse(&expanded), expanded: true },
    ]
}

/// One repetition: full reset of the reused solver, run to the first
/// answer.
fn one_rep(m: &mut Machine) -> (usize, SolveStats) {
    m.reset();
    let n = match m.next_answer().expect("bench query must not error") {
        Some(_) => 1,
        None => 0,
    };
    (n, m.stats())
}

pub fn run_workload(workload: &'static str, reps: usize) -> Vec<BenchRow> {
    let plain = stdlib();
    let expanded = plain.specialized();
    contenders(workload)
        .into_iter()
        .map(|c| {
            let db = if c.expanded { &expanded } else { &plain };
            let mut m = Machine::new(db, &c.query).expect("bench query compiles");
            let (answers, stats) = one_rep(&mut m);
            let mut times: Vec<f64> = (0..5)
                .map(|_| {
                    let start = Instant::now();
                    for _ in 0..reps {
                        std::hint::black_box(one_rep(&mut m));
                    }
                    start.elapsed().as_secs_f64() * 1e3
                })
                .collect();
            times.sort_by(|a, b| a.partial_cmp(b).unwrap());
            BenchRow {
                workload,
                contender: c.name,
                answers,
                stats,
                millis: times[2],
            }
        })
        .collect()
}

pub fn run_all(reps: usize) -> Vec<BenchRow> {
    let mut rows = run_workload("letters", reps);
    rows.extend(run_workload("keyed", reps));
    rows
}

/// `workload,contender,steps,cells,cps,ms` lines for machine consumption.
pub fn machine_lines(rows: &[BenchRow]) -> String {
    rows.iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{:.3}",
                r.workload,
                r.contender,
                r.stats.steps,
                r.stats.cells_visited,
                r.stats.choicepoints_created,
                r.millis
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn table(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:<18} {:>8} {:>9} {:>7} {:>6} {:>12}\n",
        "workload", "contender", "answers", "steps", "cells", "cps", "ms/run"
    ));
    for r in rows {
        out.push_str(&format!(
            "{:<10} {:<18} {:>8} {:>9} {:>7} {:>6} {:>12.3}\n",
            r.workload,
            r.contender,
            r.answers,
            r.stats.steps,
            r.stats.cells_visited,
            r.stats.choicepoints_created,
            r.millis
        ));
    }
    out
}
