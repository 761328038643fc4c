//! Term representation: variables, atoms, integers and compounds.
//!
//! Lists are `'.'(Head, Tail)` terminated by the atom `[]`; `Key-Value`
//! pairs are `'-'(K, V)`. Zero-arity names are atoms, never compounds.

use std::sync::Arc;

/// Engine-wide variable identifier. Two variables are identical iff their
/// ids are equal; display names live outside the term itself.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub usize);

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Var(VarId),
    Atom(Arc<str>),
    Int(i64),
    Compound(Arc<Compound>),
}

#[derive(PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Compound {
    pub functor: Arc<str>,
    pub args: Vec<Term>,
}

/// Principal functor of a non-variable term, used by first-argument indexing.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Principal {
    Atom(Arc<str>),
    Int(i64),
    Compound(Arc<str>, usize),
}

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Atom(Arc::from(name))
    }

    pub fn int(value: i64) -> Term {
        Term::Int(value)
    }

    pub fn compound(functor: &str, args: Vec<Term>) -> Term {
        debug_assert!(!args.is_empty(), "zero-arity names are atoms");
        Term::Compound(Arc::new(Compound {
            functor: Arc::from(functor),
            args,
        }))
    }

    pub fn nil() -> Term {
        Term::atom("[]")
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::compound(".", vec![head, tail])
    }

    pub fn pair(key: Term, value: Term) -> Term {
        Term::compound("-", vec![key, value])
    }

    pub fn list(items: impl IntoIterator<Item = Term>) -> Term {
        Self::list_with_tail(items, Term::nil())
    }

    pub fn list_with_tail(items: impl IntoIterator<Item = Term>, tail: Term) -> Term {
        let items: Vec<Term> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .fold(tail, |acc, item| Term::cons(item, acc))
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Term::Atom(a) if &**a == "[]")
    }

    pub fn as_var(&self) -> Option<VarId> {
        match self {
            Term::Var(v) => Some(*v),
            _ => None,
        }
    }

    /// `None` for variables.
    pub fn principal(&self) -> Option<Principal> {
        match self {
            Term::Var(_) => None,
            Term::Atom(a) => Some(Principal::Atom(a.clone())),
            Term::Int(i) => Some(Principal::Int(*i)),
            Term::Compound(c) => Some(Principal::Compound(c.functor.clone(), c.args.len())),
        }
    }
}
