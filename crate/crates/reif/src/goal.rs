//! Executable goal trees and the term-to-goal compiler.
//!
//! `TestEq` is produced only by the specializer (see [`crate::reif`]) and
//! has no surface syntax.

use std::sync::Arc;

use crate::term::{Term, VarId};

#[derive(Clone, PartialEq, Debug)]
pub enum Goal {
    True,
    Fail,
    Unify(Term, Term),
    Dif(Term, Term),
    Conj(Arc<Goal>, Arc<Goal>),
    Disj(Arc<Goal>, Arc<Goal>),
    Call(Arc<str>, Vec<Term>),
    /// Monotonic if-then-else: the condition is an incomplete goal that
    /// receives a fresh truth-value argument.
    IfReified(Term, Arc<Goal>, Arc<Goal>),
    /// Inlined `if_(A = B, Then, Else)` emitted by the specializer.
    TestEq(Term, Term, Arc<Goal>, Arc<Goal>),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum GoalError {
    /// A goal position held a non-callable term (an integer).
    NotCallable(Term),
    /// An `if_/3` condition that can never be completed into a goal.
    BadCondition(Term),
}

impl std::fmt::Display for GoalError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GoalError::NotCallable(t) => {
                write!(f, "non-callable term in goal position: {}", crate::fmt::format_term(t))
            }
            GoalError::BadCondition(t) => {
                write!(f, "if_/3 condition is not closure-shaped: {}", crate::fmt::format_term(t))
            }
        }
    }
}

impl Goal {
    /// Compile a body term into a goal tree. `,` becomes [`Goal::Conj`],
    /// `;` becomes [`Goal::Disj`], `if_/3` becomes [`Goal::IfReified`].
    pub fn from_term(t: &Term) -> Result<Arc<Goal>, GoalError> {
        let g = match t {
            Term::Var(_) => Goal::Call(Arc::from("call"), vec![t.clone()]),
            Term::Int(_) => return Err(GoalError::NotCallable(t.clone())),
            Term::Atom(a) => match &**a {
                "true" => Goal::True,
                "fail" | "false" => Goal::Fail,
                name => Goal::Call(Arc::from(name), Vec::new()),
            },
            Term::Compound(c) => {
                let n = c.args.len();
                match (&*c.functor, n) {
                    (",", 2) => Goal::Conj(
                        Goal::from_term(&c.args[0])?,
                        Goal::from_term(&c.args[1])?,
                    ),
                    (";", 2) => Goal::Disj(
                        Goal::from_term(&c.args[0])?,
                        Goal::from_term(&c.args[1])?,
                    ),
                    ("=", 2) => Goal::Unify(c.args[0].clone(), c.args[1].clone()),
                    ("dif", 2) => Goal::Dif(c.args[0].clone(), c.args[1].clone()),
                    ("if_", 3) => {
                        let cond = c.args[0].clone();
                        if matches!(cond, Term::Int(_)) {
                            return Err(GoalError::BadCondition(cond));
                        }
                        Goal::IfReified(
                            cond,
                            Goal::from_term(&c.args[1])?,
                            Goal::from_term(&c.args[2])?,
                        )
                    }
                    _ => Goal::Call(c.functor.clone(), c.args.clone()),
                }
            }
        };
        Ok(Arc::new(g))
    }
}

/// Rename clause-local variables (numbered from 0) into a fresh block.
pub fn rename_term(t: &Term, base: usize) -> Term {
    if base == 0 {
        return t.clone();
    }
    match t {
        Term::Var(v) => Term::Var(VarId(v.0 + base)),
        Term::Atom(_) | Term::Int(_) => t.clone(),
        Term::Compound(c) => {
            if is_ground(t) {
                t.clone()
            } else {
                Term::compound(
                    &c.functor,
                    c.args.iter().map(|a| rename_term(a, base)).collect(),
                )
            }
        }
    }
}

fn is_ground(t: &Term) -> bool {
    match t {
        Term::Var(_) => false,
        Term::Atom(_) | Term::Int(_) => true,
        Term::Compound(c) => c.args.iter().all(is_ground),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compiles_control_terms() {
        let t = Term::compound(
            ",",
            vec![
                Term::compound("=", vec![Term::Var(VarId(0)), Term::atom("a")]),
                Term::atom("true"),
            ],
        );
        match &*Goal::from_term(&t).unwrap() {
            Goal::Conj(a, b) => {
                assert!(matches!(&**a, Goal::Unify(_, _)));
                assert!(matches!(&**b, Goal::True));
            }
            g => panic!("expected Conj, got {g:?}"),
        }
    }

    #[test]
    fn rejects_integer_goal() {
        assert!(Goal::from_term(&Term::int(7)).is_err());
    }

    #[test]
    fn rejects_integer_if_condition() {
        let t = Term::compound(
            "if_",
            vec![Term::int(1), Term::atom("true"), Term::atom("fail")],
        );
        assert!(matches!(
            Goal::from_term(&t),
            Err(GoalError::BadCondition(_))
        ));
    }

    #[test]
    fn rename_offsets_vars() {
        let t = Term::compound("f", vec![Term::Var(VarId(0)), Term::Var(VarId(1))]);
        assert_eq!(
            rename_term(&t, 10),
            Term::compound("f", vec![Term::Var(VarId(10)), Term::Var(VarId(11))])
        );
    }
}
