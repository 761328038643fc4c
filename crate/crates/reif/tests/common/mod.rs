//! Shared helpers: CLI invocation and a brute-force grounding oracle
//! over the finite domain {a, b, c}.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::process::Command;

use reif::parser::parse_query;
use reif::{run_query, Database, QueryOutcome};

pub const DOMAIN: [&str; 3] = ["a", "b", "c"];

pub struct CliResult {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

pub fn run_cli(args: &[&str]) -> CliResult {
    let out = Command::new(env!("CARGO_BIN_EXE_reif"))
        .args(args)
        .output()
        .expect("binary runs");
    CliResult {
        stdout: String::from_utf8(out.stdout).expect("stdout is utf-8"),
        stderr: String::from_utf8(out.stderr).expect("stderr is utf-8"),
        code: out.status.code().expect("process exits normally"),
    }
}

pub fn query(db: &Database, text: &str) -> QueryOutcome {
    let parsed = parse_query(text).unwrap_or_else(|e| panic!("{text}: {e}"));
    run_query(db, &parsed, None).unwrap_or_else(|e| panic!("{text}: {e}"))
}

pub fn succeeds(db: &Database, text: &str) -> bool {
    let parsed = parse_query(text).unwrap_or_else(|e| panic!("{text}: {e}"));
    run_query(db, &parsed, Some(1))
        .unwrap_or_else(|e| panic!("{text}: {e}"))
        .answers
        .len()
        == 1
}

/// A query template over free variables, instantiated by substituting
/// variable names with domain atoms. Solutions are reported as the
/// assignment tuple in `vars` order.
pub struct GroundCases<'a> {
    pub template: &'a str,
    pub vars: &'a [&'a str],
}

impl GroundCases<'_> {
    fn instantiate(&self, assignment: &[&str]) -> String {
        let mut text = self.template.to_string();
        for (name, value) in self.vars.iter().zip(assignment) {
            text = text.replace(name, value);
        }
        text
    }

    /// All domain assignments under which the instantiated query has at
    /// least one answer in the engine.
    pub fn engine_solutions(&self, db: &Database) -> BTreeSet<Vec<String>> {
        self.assignments()
            .into_iter()
            .filter(|a| succeeds(db, &self.instantiate(a)))
            .map(|a| a.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    /// All domain assignments accepted by a ground-truth predicate.
    pub fn oracle_solutions(
        &self,
        truth: impl Fn(&[&str]) -> bool,
    ) -> BTreeSet<Vec<String>> {
        self.assignments()
            .into_iter()
            .filter(|a| truth(a))
            .map(|a| a.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    fn assignments(&self) -> Vec<Vec<&'static str>> {
        let mut out = vec![Vec::new()];
        for _ in self.vars {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    DOMAIN.iter().map(move |d| {
                        let mut next = prefix.clone();
                        next.push(*d);
                        next
                    })
                })
                .collect();
        }
        out
    }
}
