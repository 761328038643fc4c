//! Closure application and the goal specializer.
//!
//! A closure is an incomplete goal: a callable term that still lacks
//! trailing arguments. The specializer plays the role of compile-time
//! goal expansion: `if_/3` calls whose condition is a term-equality
//! closure are rewritten into an inline three-way test that needs no
//! meta-call.

use std::sync::Arc;

use crate::goal::Goal;
use crate::term::Term;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ApplyError {
    /// The closure position was an unbound variable.
    Unbound,
    /// The closure position held a non-callable term.
    NotCallable(Term),
}

/// Complete an incomplete goal with `extra` trailing arguments.
/// `call(C, A...)` wrappers are flattened. The input must be walked.
pub fn apply_closure(closure: &Term, extra: &[Term]) -> Result<Goal, ApplyError> {
    match closure {
        Term::Var(_) => Err(ApplyError::Unbound),
        Term::Int(_) => Err(ApplyError::NotCallable(closure.clone())),
        Term::Atom(name) => match (&**name, extra.len()) {
            ("true", 0) => Ok(Goal::True),
            ("fail", 0) | ("false", 0) => Ok(Goal::Fail),
            _ => Ok(Goal::Call(name.clone(), extra.to_vec())),
        },
        Term::Compound(c) => {
            if &*c.functor == "call" && !c.args.is_empty() {
                let mut rest: Vec<Term> = c.args[1..].to_vec();
                rest.extend_from_slice(extra);
                // note: the inner closure may itself be a variable; the
                // caller re-walks when it executes the produced goal
                return apply_closure_any(&c.args[0], &rest);
            }
            let mut args = c.args.clone();
            args.extend_from_slice(extra);
            Ok(Goal::Call(c.functor.clone(), args))
        }
    }
}

fn apply_closure_any(closure: &Term, extra: &[Term]) -> Result<Goal, ApplyError> {
    match closure {
        // defer: call(Var, ...) resolves when the produced goal runs
        Term::Var(_) => {
            let mut args = vec![closure.clone()];
            args.extend_from_slice(extra);
            Ok(Goal::Call(Arc::from("call"), args))
        }
        _ => apply_closure(closure, extra),
    }
}

/// Structural rewrite inlining reified term equality: every
/// `IfReified('='(A, B), Then, Else)` becomes `TestEq(A, B, Then, Else)`.
/// Semantics are preserved; choicepoints never increase.
pub fn specialize(g: &Goal) -> Arc<Goal> {
    Arc::new(match g {
        Goal::Conj(a, b) => Goal::Conj(specialize(a), specialize(b)),
        Goal::Disj(a, b) => Goal::Disj(specialize(a), specialize(b)),
        Goal::IfReified(cond, then, els) => {
            let then = specialize(then);
            let els = specialize(els);
            match cond {
                Term::Compound(c) if &*c.functor == "=" && c.args.len() == 2 => {
                    Goal::TestEq(c.args[0].clone(), c.args[1].clone(), then, els)
                }
                _ => Goal::IfReified(cond.clone(), then, els),
            }
        }
        Goal::TestEq(a, b, then, els) => {
            Goal::TestEq(a.clone(), b.clone(), specialize(then), specialize(els))
        }
        other => other.clone(),
    })
}
