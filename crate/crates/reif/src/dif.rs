//! Suspended disequality store.
//!
//! Each live [`Diseq`] stands for one `dif/2` call that could neither be
//! discharged (the two terms can never be equal) nor failed (they are
//! already identical). It holds the pending variable/term pairs whose
//! simultaneous equality would violate the constraint, and is indexed by
//! every variable occurring in those pairs so bindings wake it up.

use std::collections::{BTreeMap, BTreeSet};

use crate::term::{Term, VarId};

/// One suspended `dif(A, B)` constraint.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Diseq {
    pub id: u64,
    /// The original argument pair, kept for residual-goal printing.
    pub orig: (Term, Term),
    /// Violated exactly when every pair becomes simultaneously identical.
    pub pending: Vec<(VarId, Term)>,
}

/// Outcome of posting a `dif/2` goal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PostResult {
    /// The terms can never be equal; nothing is stored.
    Entailed,
    /// The terms are already identical.
    Failed,
    /// A constraint was added to the store.
    Suspended,
}

#[derive(Default, Clone, Debug)]
pub struct DifStore {
    live: BTreeMap<u64, Diseq>,
    watch: BTreeMap<VarId, BTreeSet<u64>>,
    next_id: u64,
}

impl DifStore {
    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn get(&self, id: u64) -> Option<&Diseq> {
        self.live.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Diseq> {
        self.live.values()
    }

    /// Ids of live constraints watching any of `vars`, in ascending order.
    pub fn watching(&self, vars: &[VarId]) -> Vec<u64> {
        let mut ids = BTreeSet::new();
        for v in vars {
            if let Some(ws) = self.watch.get(v) {
                ids.extend(ws.iter().copied());
            }
        }
        ids.into_iter().collect()
    }

    pub fn insert(&mut self, orig: (Term, Term), pending: Vec<(VarId, Term)>) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        let d = Diseq { id, orig, pending };
        self.index(&d);
        self.live.insert(id, d);
        id
    }

    pub fn remove(&mut self, id: u64) -> Diseq {
        let d = self.live.remove(&id).expect("removing dead disequation");
        self.unindex(&d);
        d
    }

    /// Replace the pending pairs of a live constraint, returning the old one.
    pub fn replace_pending(&mut self, id: u64, pending: Vec<(VarId, Term)>) -> Diseq {
        let old = self.remove(id);
        let d = Diseq {
            id,
            orig: old.orig.clone(),
            pending,
        };
        self.index(&d);
        self.live.insert(id, d);
        old
    }

    /// Reinstate a constraint exactly as it was (trail undo).
    pub fn reinstate(&mut self, d: Diseq) {
        if self.live.contains_key(&d.id) {
            self.unindex(&self.live[&d.id].clone());
        }
        self.index(&d);
        self.live.insert(d.id, d);
    }

    /// Drop a constraint added after a trail mark (trail undo).
    pub fn retract(&mut self, id: u64) {
        if self.live.contains_key(&id) {
            self.remove(id);
        }
    }

    fn index(&mut self, d: &Diseq) {
        for v in Self::watched_vars(d) {
            self.watch.entry(v).or_default().insert(d.id);
        }
    }

    fn unindex(&mut self, d: &Diseq) {
        for v in Self::watched_vars(d) {
            if let Some(ws) = self.watch.get_mut(&v) {
                ws.remove(&d.id);
                if ws.is_empty() {
                    self.watch.remove(&v);
                }
            }
        }
    }

    /// All variables occurring in the pending pairs, left and right side.
    fn watched_vars(d: &Diseq) -> BTreeSet<VarId> {
        let mut vars = BTreeSet::new();
        for (v, t) in &d.pending {
            vars.insert(*v);
            collect_vars(t, &mut vars);
        }
        vars
    }
}

fn collect_vars(t: &Term, out: &mut BTreeSet<VarId>) {
    match t {
        Term::Var(v) => {
            out.insert(*v);
        }
        Term::Compound(c) => {
            for a in &c.args {
                collect_vars(a, out);
            }
        }
        _ => {}
    }
}
