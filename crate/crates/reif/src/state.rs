//! Solver state: variable bindings, the trail, and the constraint store.
//!
//! All mutations go through the trail so that backtracking restores the
//! exact prior bindings and constraint store. Unification is destructive
//! and trailed; [`State::trial_unify`] runs the same algorithm on a
//! scratch section of the trail and rewinds, so the two operations can
//! never disagree.

use std::collections::BTreeSet;
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::dif::{DifStore, Diseq, PostResult};
use crate::goal::rename_term;
use crate::term::{Term, VarId};

/// Resolution-step counters, deterministic across runs.
#[derive(Default, Clone, Copy, PartialEq, Eq, Debug)]
pub struct SolveStats {
    /// Goal reductions: builtins executed plus clause bodies entered.
    pub steps: u64,
    /// List (`'.'/2`) and tree (`t/3`) nodes destructured by successful
    /// unifications.
    pub cells_visited: u64,
    pub choicepoints_created: u64,
}

#[derive(Clone, Debug)]
pub enum TrailEntry {
    Bind(VarId),
    DifAdd(u64),
    DifRemove(Diseq),
    DifUpdate(Diseq),
}

/// Classification of a term pair without mutating the bindings.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TrialOutcome {
    Identical,
    Clash,
    /// The bindings a most-general unifier would add, in left-to-right
    /// discovery order. Read as a triangular substitution.
    UnifiesWith(Vec<(VarId, Term)>),
}

pub struct State {
    bindings: Vec<Option<Term>>,
    trail: Vec<TrailEntry>,
    pub store: DifStore,
    pub occurs_check: bool,
    pub stats: SolveStats,
    // reusable buffers; unify and trial_unify are not reentrant
    scratch_bound: Vec<VarId>,
    scratch_pairs: Vec<(VarId, Term)>,
}

enum Mode<'a> {
    /// Destructive unification: collect bound vars for constraint wakeup.
    Real {
        bound: &'a mut Vec<VarId>,
        cells: &'a mut u64,
    },
    /// Scratch unification: record would-be mgu pairs, count nothing.
    Trial {
        pairs: &'a mut Vec<(VarId, Term)>,
    },
}

impl State {
    pub fn new() -> State {
        State {
            bindings: Vec::new(),
            trail: Vec::new(),
            store: DifStore::default(),
            occurs_check: false,
            stats: SolveStats::default(),
            scratch_bound: Vec::new(),
            scratch_pairs: Vec::new(),
        }
    }

    pub fn fresh_var(&mut self) -> Term {
        Term::Var(self.alloc_one())
    }

    pub fn alloc_one(&mut self) -> VarId {
        let id = VarId(self.bindings.len());
        self.bindings.push(None);
        id
    }

    /// Allocate `n` consecutive fresh variables, returning the first id.
    pub fn alloc_block(&mut self, n: usize) -> usize {
        let base = self.bindings.len();
        self.bindings.resize(base + n, None);
        base
    }

    pub fn num_vars(&self) -> usize {
        self.bindings.len()
    }

    /// Drop variables allocated after the first `n`. Callers must have
    /// rewound any bindings that mention them first.
    pub fn truncate_vars(&mut self, n: usize) {
        self.bindings.truncate(n);
    }

    pub fn mark(&self) -> usize {
        self.trail.len()
    }

    pub fn rewind(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                TrailEntry::Bind(v) => self.bindings[v.0] = None,
                TrailEntry::DifAdd(id) => self.store.retract(id),
                TrailEntry::DifRemove(d) => self.store.reinstate(d),
                TrailEntry::DifUpdate(old) => self.store.reinstate(old),
            }
        }
    }

    /// Shallow dereference: follow the binding chain of a variable.
    pub fn walk(&self, t: &Term) -> Term {
        self.walk_ref(t).clone()
    }

    /// [`State::walk`] without cloning the result.
    pub fn walk_ref<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match &self.bindings[v.0] {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    /// Deep dereference: every bound variable recursively replaced by its
    /// binding. Non-terminating on cyclic input, which is outside the
    /// contract.
    pub fn walk_star(&self, t: &Term) -> Term {
        let t = self.walk(t);
        match &t {
            Term::Compound(c) => Term::compound(
                &c.functor,
                c.args.iter().map(|a| self.walk_star(a)).collect(),
            ),
            _ => t,
        }
    }

    /// Structural equality on walked terms; variables equal only themselves.
    pub fn term_identical(&self, t1: &Term, t2: &Term) -> bool {
        let (a, b) = (self.walk(t1), self.walk(t2));
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) => x == y,
            (Term::Atom(x), Term::Atom(y)) => x == y,
            (Term::Int(x), Term::Int(y)) => x == y,
            (Term::Compound(x), Term::Compound(y)) => {
                x.functor == y.functor
                    && x.args.len() == y.args.len()
                    && x.args
                        .iter()
                        .zip(&y.args)
                        .all(|(p, q)| self.term_identical(p, q))
            }
            _ => false,
        }
    }

    /// Unbound variables of `walk_star(t)` in first-occurrence order.
    pub fn term_variables(&self, t: &Term) -> Vec<VarId> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.term_variables_into(t, &mut seen, &mut out);
        out
    }

    fn term_variables_into(&self, t: &Term, seen: &mut BTreeSet<VarId>, out: &mut Vec<VarId>) {
        match self.walk(t) {
            Term::Var(v) => {
                if seen.insert(v) {
                    out.push(v);
                }
            }
            Term::Compound(c) => {
                for a in &c.args {
                    self.term_variables_into(a, seen, out);
                }
            }
            _ => {}
        }
    }

    /// Destructive, trailed unification followed by constraint wakeup.
    /// On failure the trail is rewound to the entry mark.
    pub fn unify(&mut self, t1: &Term, t2: &Term) -> bool {
        self.unify_off(t1, 0, t2, 0)
    }

    /// Unify against a clause-relative term whose variable ids are
    /// shifted by `off2`; subterms are materialized into absolute ids
    /// only when a binding actually captures them.
    pub fn unify_head(&mut self, t1: &Term, t2: &Term, off2: usize) -> bool {
        self.unify_off(t1, 0, t2, off2)
    }

    pub(crate) fn unify_off(&mut self, t1: &Term, off1: usize, t2: &Term, off2: usize) -> bool {
        let mark = self.mark();
        let mut bound = std::mem::take(&mut self.scratch_bound);
        bound.clear();
        let mut cells = 0u64;
        let ok = self.unify_inner(
            t1,
            off1,
            t2,
            off2,
            &mut Mode::Real {
                bound: &mut bound,
                cells: &mut cells,
            },
        );
        let woken = ok && {
            self.stats.cells_visited += cells;
            self.wake(&bound)
        };
        self.scratch_bound = bound;
        if !woken {
            self.rewind(mark);
        }
        woken
    }

    /// Classify the pair without observable mutation.
    pub fn trial_unify(&mut self, t1: &Term, t2: &Term) -> TrialOutcome {
        let mark = self.mark();
        let mut pairs = std::mem::take(&mut self.scratch_pairs);
        pairs.clear();
        let ok = self.unify_inner(t1, 0, t2, 0, &mut Mode::Trial { pairs: &mut pairs });
        self.rewind(mark);
        let out = if !ok {
            TrialOutcome::Clash
        } else if pairs.is_empty() {
            TrialOutcome::Identical
        } else {
            TrialOutcome::UnifiesWith(pairs.clone())
        };
        self.scratch_pairs = pairs;
        out
    }

    /// Walk a term whose variable ids are shifted by `off`; bindings are
    /// stored with absolute ids, so following one drops the offset.
    fn walk_off(&self, t: &Term, off: usize) -> (Term, usize) {
        let mut t = t;
        let mut off = off;
        while let Term::Var(v) = t {
            match &self.bindings[v.0 + off] {
                Some(next) => {
                    t = next;
                    off = 0;
                }
                None => break,
            }
        }
        (t.clone(), off)
    }

    fn unify_inner(
        &mut self,
        t1: &Term,
        off1: usize,
        t2: &Term,
        off2: usize,
        mode: &mut Mode,
    ) -> bool {
        let (a, off1) = self.walk_off(t1, off1);
        let (b, off2) = self.walk_off(t2, off2);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) => {
                let (x, y) = (VarId(x.0 + off1), VarId(y.0 + off2));
                if x == y {
                    true
                } else if x.0 > y.0 {
                    // bind the younger variable so query variables stay
                    // representatives
                    self.bind(x, Term::Var(y), mode);
                    true
                } else {
                    self.bind(y, Term::Var(x), mode);
                    true
                }
            }
            (Term::Var(x), _) => {
                let x = VarId(x.0 + off1);
                let b = rename_term(&b, off2);
                if self.occurs_check && self.occurs(x, &b) {
                    return false;
                }
                self.bind(x, b, mode);
                true
            }
            (_, Term::Var(y)) => {
                let y = VarId(y.0 + off2);
                let a = rename_term(&a, off1);
                if self.occurs_check && self.occurs(y, &a) {
                    return false;
                }
                self.bind(y, a, mode);
                true
            }
            (Term::Atom(x), Term::Atom(y)) => x == y,
            (Term::Int(x), Term::Int(y)) => x == y,
            (Term::Compound(x), Term::Compound(y)) => {
                if x.functor != y.functor || x.args.len() != y.args.len() {
                    return false;
                }
                if let Mode::Real { cells, .. } = mode {
                    let f = &*x.functor;
                    if (f == "." && x.args.len() == 2) || (f == "t" && x.args.len() == 3) {
                        **cells += 1;
                    }
                }
                x.args
                    .iter()
                    .zip(y.args.iter())
                    .all(|(p, q)| self.unify_inner(p, off1, q, off2, mode))
            }
            _ => false,
        }
    }

    fn bind(&mut self, v: VarId, t: Term, mode: &mut Mode) {
        match mode {
            Mode::Real { bound, .. } => bound.push(v),
            Mode::Trial { pairs } => pairs.push((v, t.clone())),
        }
        self.bindings[v.0] = Some(t);
        self.trail.push(TrailEntry::Bind(v));
    }


    fn occurs(&self, v: VarId, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(w) => v == w,
            Term::Compound(c) => c.args.iter().any(|a| self.occurs(v, a)),
            _ => false,
        }
    }

    /// Post a `dif/2` constraint. Never creates a choicepoint.
    pub fn post_dif(&mut self, t1: &Term, t2: &Term) -> PostResult {
        match self.trial_unify(t1, t2) {
            TrialOutcome::Clash => PostResult::Entailed,
            TrialOutcome::Identical => PostResult::Failed,
            TrialOutcome::UnifiesWith(pairs) => {
                let id = self.store.insert((t1.clone(), t2.clone()), pairs);
                self.trail.push(TrailEntry::DifAdd(id));
                PostResult::Suspended
            }
        }
    }

    /// Recheck every constraint watching one of the freshly bound vars.
    /// Returns false when some constraint is violated.
    pub fn wake(&mut self, bound: &[VarId]) -> bool {
        if bound.is_empty() || self.store.is_empty() {
            return true;
        }
        for id in self.store.watching(bound) {
            let pending = match self.store.get(id) {
                Some(d) => d.pending.clone(),
                None => continue,
            };
            let (vars, terms): (Vec<_>, Vec<_>) = pending.into_iter().unzip();
            let lhs = Term::compound("$d", vars.into_iter().map(Term::Var).collect());
            let rhs = Term::compound("$d", terms);
            match self.trial_unify(&lhs, &rhs) {
                TrialOutcome::Clash => {
                    let d = self.store.remove(id);
                    self.trail.push(TrailEntry::DifRemove(d));
                }
                TrialOutcome::Identical => return false,
                TrialOutcome::UnifiesWith(pairs) => {
                    let old = self.store.replace_pending(id, pairs);
                    self.trail.push(TrailEntry::DifUpdate(old));
                }
            }
        }
        true
    }

    /// Residual `dif` goals for constraints reachable from `vars`
    /// (transitively through shared constraint variables), as walked term
    /// pairs, deduplicated and sorted.
    pub fn residual_goals(&self, vars: &[VarId]) -> Vec<(Term, Term)> {
        let mut reach: BTreeSet<VarId> = vars.iter().copied().collect();
        let mut included: BTreeSet<u64> = BTreeSet::new();
        loop {
            let mut changed = false;
            for d in self.store.iter() {
                if included.contains(&d.id) {
                    continue;
                }
                let mut dvars = Vec::new();
                for (v, t) in &d.pending {
                    dvars.extend(self.term_variables(&Term::Var(*v)));
                    dvars.extend(self.term_variables(t));
                }
                if dvars.iter().any(|v| reach.contains(v)) {
                    included.insert(d.id);
                    reach.extend(dvars);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut out: Vec<(Term, Term)> = included
            .iter()
            .map(|id| {
                let d = self.store.get(*id).unwrap();
                if d.pending.len() == 1 {
                    let (v, t) = &d.pending[0];
                    (Term::Var(*v), self.walk_star(t))
                } else {
                    (self.walk_star(&d.orig.0), self.walk_star(&d.orig.1))
                }
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Deterministic digest of bindings plus constraint store, used to
    /// check that backtracking restores state exactly.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for (i, b) in self.bindings.iter().enumerate() {
            if let Some(t) = b {
                (i, t).hash(&mut h);
            }
        }
        for d in self.store.iter() {
            d.id.hash(&mut h);
            d.orig.hash(&mut h);
            d.pending.hash(&mut h);
        }
        h.finish()
    }
}

impl Default for State {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dif::PostResult;

    fn f(args: Vec<Term>) -> Term {
        Term::compound("f", args)
    }

    #[test]
    fn walk_star_resolves_chains() {
        let mut s = State::new();
        let x = s.fresh_var();
        let y = s.fresh_var();
        assert!(s.unify(&x, &f(vec![y.clone()])));
        assert!(s.unify(&y, &Term::atom("a")));
        assert_eq!(s.walk_star(&x), f(vec![Term::atom("a")]));
        assert_eq!(s.walk_star(&Term::atom("a")), Term::atom("a"));
    }

    #[test]
    fn walk_star_applies_list_tail() {
        let mut s = State::new();
        let t = s.fresh_var();
        let l = Term::cons(Term::int(1), t.clone());
        assert!(s.unify(&t, &Term::list(vec![Term::int(2)])));
        assert_eq!(
            s.walk_star(&l),
            Term::list(vec![Term::int(1), Term::int(2)])
        );
    }

    #[test]
    fn walk_star_is_idempotent() {
        let mut s = State::new();
        let x = s.fresh_var();
        let y = s.fresh_var();
        assert!(s.unify(&x, &f(vec![y.clone(), Term::int(3)])));
        let once = s.walk_star(&x);
        assert_eq!(s.walk_star(&once), once);
    }

    #[test]
    fn term_identical_cases() {
        let mut s = State::new();
        let x = s.fresh_var();
        let y = s.fresh_var();
        assert!(s.term_identical(&f(vec![x.clone()]), &f(vec![x.clone()])));
        assert!(!s.term_identical(&x, &y));
        // X -> f(Z), Z -> a, Y -> a: X and f(Y) walk to the same term
        let z = s.fresh_var();
        assert!(s.unify(&x, &f(vec![z.clone()])));
        assert!(s.unify(&z, &Term::atom("a")));
        assert!(s.unify(&y, &Term::atom("a")));
        assert!(s.term_identical(&x, &f(vec![y])));
    }

    #[test]
    fn term_variables_order_and_dedup() {
        let mut s = State::new();
        let x = s.fresh_var();
        let y = s.fresh_var();
        let t = f(vec![x.clone(), Term::compound("g", vec![y.clone(), x.clone()])]);
        assert_eq!(
            s.term_variables(&t),
            vec![x.as_var().unwrap(), y.as_var().unwrap()]
        );
        assert!(s.term_variables(&Term::atom("a")).is_empty());
        assert!(s.unify(&x, &Term::atom("b")));
        assert_eq!(s.term_variables(&t), vec![y.as_var().unwrap()]);
    }

    #[test]
    fn unify_textbook_mgu() {
        let mut s = State::new();
        let x = s.fresh_var();
        let y = s.fresh_var();
        let t1 = f(vec![x.clone(), Term::atom("b")]);
        let t2 = f(vec![Term::atom("a"), y.clone()]);
        assert!(s.unify(&t1, &t2));
        assert_eq!(s.walk_star(&x), Term::atom("a"));
        assert_eq!(s.walk_star(&y), Term::atom("b"));
        assert!(!s.unify(&Term::atom("a"), &Term::atom("b")));
    }

    #[test]
    fn occurs_check_flag() {
        let mut s = State::new();
        let x = s.fresh_var();
        assert!(s.unify(&x, &f(vec![x.clone()])));

        let mut s = State::new();
        s.occurs_check = true;
        let x = s.fresh_var();
        assert!(!s.unify(&x, &f(vec![x.clone()])));
    }

    #[test]
    fn trial_unify_classification() {
        let mut s = State::new();
        assert_eq!(
            s.trial_unify(&f(vec![Term::atom("a")]), &f(vec![Term::atom("a")])),
            TrialOutcome::Identical
        );
        assert_eq!(
            s.trial_unify(
                &f(vec![Term::atom("a")]),
                &Term::compound("g", vec![Term::atom("a")])
            ),
            TrialOutcome::Clash
        );
        let x = s.fresh_var();
        let y = s.fresh_var();
        let t1 = f(vec![x.clone(), Term::atom("b")]);
        let t2 = f(vec![Term::atom("a"), y.clone()]);
        match s.trial_unify(&t1, &t2) {
            TrialOutcome::UnifiesWith(pairs) => {
                assert_eq!(
                    pairs,
                    vec![
                        (x.as_var().unwrap(), Term::atom("a")),
                        (y.as_var().unwrap(), Term::atom("b"))
                    ]
                );
            }
            o => panic!("expected UnifiesWith, got {o:?}"),
        }
        // no observable mutation
        assert_eq!(s.walk(&x), x);
    }

    #[test]
    fn trial_unify_symmetry() {
        let mut s = State::new();
        let x = s.fresh_var();
        let t1 = f(vec![x.clone(), Term::atom("b")]);
        let t2 = f(vec![Term::atom("a"), Term::atom("b")]);
        let o1 = s.trial_unify(&t1, &t2);
        let o2 = s.trial_unify(&t2, &t1);
        assert_eq!(
            std::mem::discriminant(&o1),
            std::mem::discriminant(&o2)
        );
    }

    #[test]
    fn unify_then_rewind_restores_state() {
        let mut s = State::new();
        let x = s.fresh_var();
        let y = s.fresh_var();
        s.post_dif(&x, &Term::atom("q"));
        let fp = s.fingerprint();
        let mark = s.mark();
        assert!(s.unify(&f(vec![x.clone(), y.clone()]), &f(vec![Term::atom("a"), x.clone()])));
        s.rewind(mark);
        assert_eq!(s.fingerprint(), fp);
    }

    #[test]
    fn post_dif_outcomes() {
        let mut s = State::new();
        assert_eq!(s.post_dif(&Term::atom("a"), &Term::atom("b")), PostResult::Entailed);
        let x = s.fresh_var();
        assert_eq!(s.post_dif(&x, &x), PostResult::Failed);
        let y = s.fresh_var();
        let t1 = f(vec![x.clone(), Term::atom("b")]);
        let t2 = f(vec![Term::atom("a"), y.clone()]);
        assert_eq!(s.post_dif(&t1, &t2), PostResult::Suspended);
        assert_eq!(s.store.len(), 1);
        let d = s.store.iter().next().unwrap();
        assert_eq!(
            d.pending,
            vec![
                (x.as_var().unwrap(), Term::atom("a")),
                (y.as_var().unwrap(), Term::atom("b"))
            ]
        );
        // binding X -> a shrinks pending to [(Y, b)]
        assert!(s.unify(&x, &Term::atom("a")));
        let d = s.store.iter().next().unwrap();
        assert_eq!(d.pending, vec![(y.as_var().unwrap(), Term::atom("b"))]);
        // binding Y -> c discharges the constraint
        assert!(s.unify(&y, &Term::atom("c")));
        assert!(s.store.is_empty());
    }

    #[test]
    fn wake_fails_on_violation() {
        let mut s = State::new();
        let x = s.fresh_var();
        assert_eq!(s.post_dif(&x, &Term::int(1)), PostResult::Suspended);
        assert!(!s.unify(&x, &Term::int(1)));
    }

    #[test]
    fn wake_discharges_on_clash() {
        let mut s = State::new();
        let x = s.fresh_var();
        assert_eq!(s.post_dif(&x, &Term::int(1)), PostResult::Suspended);
        assert!(s.unify(&x, &Term::int(2)));
        assert!(s.store.is_empty());
    }

    #[test]
    fn wake_fails_when_all_pairs_become_equal() {
        let mut s = State::new();
        let x = s.fresh_var();
        let y = s.fresh_var();
        let t1 = f(vec![x.clone(), Term::atom("b")]);
        let t2 = f(vec![Term::atom("a"), y.clone()]);
        assert_eq!(s.post_dif(&t1, &t2), PostResult::Suspended);
        assert!(s.unify(&x, &Term::atom("a")));
        assert!(!s.unify(&y, &Term::atom("b")));
    }

    #[test]
    fn backtracking_restores_store_exactly() {
        let mut s = State::new();
        let x = s.fresh_var();
        let fp0 = s.fingerprint();
        let mark = s.mark();
        s.post_dif(&x, &Term::int(1));
        let fp1 = s.fingerprint();
        let inner = s.mark();
        assert!(s.unify(&x, &Term::int(2))); // discharges
        s.rewind(inner);
        assert_eq!(s.fingerprint(), fp1);
        s.rewind(mark);
        assert_eq!(s.fingerprint(), fp0);
    }

    #[test]
    fn residual_goals_projection() {
        let mut s = State::new();
        let x = s.fresh_var();
        s.post_dif(&x, &Term::int(1));
        let r = s.residual_goals(&[x.as_var().unwrap()]);
        assert_eq!(r, vec![(x.clone(), Term::int(1))]);
        assert!(s.residual_goals(&[]).is_empty());

        // multi-pair constraint keeps the original argument pair
        let mut s = State::new();
        let x = s.fresh_var();
        let y = s.fresh_var();
        let t1 = f(vec![x.clone(), Term::atom("b")]);
        let t2 = f(vec![Term::atom("a"), y.clone()]);
        s.post_dif(&t1, &t2);
        let r = s.residual_goals(&[x.as_var().unwrap()]);
        assert_eq!(r, vec![(t1, t2)]);
    }
}
