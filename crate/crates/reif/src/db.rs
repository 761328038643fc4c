//! Predicate database: clauses compiled to goal trees, immutable once a
//! query starts, with argument-indexed candidate selection.

use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::goal::{Goal, GoalError};
use crate::parser::{self, ParseError, ParsedClause};
use crate::term::{Principal, Term};

#[derive(Clone, Debug)]
pub struct Clause {
    pub head_args: Vec<Term>,
    pub body: Arc<Goal>,
    pub n_vars: usize,
}

impl Clause {
    /// Whether the head can unify with a call whose argument principals
    /// are given (`None` for unbound call arguments). A principal
    /// clash at any position guarantees head unification would fail, so
    /// non-matching clauses are skipped without creating choicepoints.
    pub fn may_match(&self, arg_principals: &[Option<Principal>]) -> bool {
        self.head_args
            .iter()
            .zip(arg_principals)
            .all(|(h, ap)| match (h.principal(), ap) {
                (Some(hp), Some(cp)) => hp == *cp,
                _ => true,
            })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LoadError {
    Parse(ParseError),
    Goal(GoalError),
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadError::Parse(e) => e.fmt(f),
            LoadError::Goal(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for LoadError {}

impl From<ParseError> for LoadError {
    fn from(e: ParseError) -> Self {
        LoadError::Parse(e)
    }
}

impl From<GoalError> for LoadError {
    fn from(e: GoalError) -> Self {
        LoadError::Goal(e)
    }
}

#[derive(Default, Clone, Debug)]
pub struct Database {
    preds: FxHashMap<(Arc<str>, usize), Vec<Clause>>,
}

impl Database {
    pub fn new() -> Database {
        Database::default()
    }

    /// Parse and add a program text; clauses keep textual order.
    pub fn load_str(&mut self, src: &str) -> Result<(), LoadError> {
        for pc in parser::parse_program(src)? {
            self.add_clause(&pc)?;
        }
        Ok(())
    }

    pub fn add_clause(&mut self, pc: &ParsedClause) -> Result<(), LoadError> {
        let (functor, head_args) = match &pc.head {
            Term::Atom(a) => (a.clone(), Vec::new()),
            Term::Compound(c) => (c.functor.clone(), c.args.clone()),
            _ => unreachable!("parser validates clause heads"),
        };
        let arity = head_args.len();
        let body = Goal::from_term(&pc.body)?;
        self.preds
            .entry((functor, arity))
            .or_default()
            .push(Clause { head_args, body, n_vars: pc.n_vars });
        Ok(())
    }

    pub fn get(&self, name: &Arc<str>, arity: usize) -> Option<&[Clause]> {
        self.preds
            .get(&(name.clone(), arity))
            .map(|v| v.as_slice())
    }

    /// Clause indices whose head can match a call with the given
    /// argument principals (`None` for unbound call arguments).
    pub fn candidates(clauses: &[Clause], arg_principals: &[Option<Principal>]) -> Vec<usize> {
        clauses
            .iter()
            .enumerate()
            .filter(|(_, cl)| cl.may_match(arg_principals))
            .map(|(i, _)| i)
            .collect()
    }

    /// Copy of the database with every `if_(A = B, ...)` body inlined.
    pub fn specialized(&self) -> Database {
        let preds = self
            .preds
            .iter()
            .map(|(k, clauses)| {
                let clauses = clauses
                    .iter()
                    .map(|cl| Clause {
                        head_args: cl.head_args.clone(),
                        body: crate::reif::specialize(&cl.body),
                        n_vars: cl.n_vars,
                    })
                    .collect();
                (k.clone(), clauses)
            })
            .collect();
        Database { preds }
    }
}
