//! Depth-first resolution with an explicit choicepoint stack.
//!
//! Answers are enumerated in clause order, left-to-right. Disjunctions
//! and clause alternatives push choicepoints; backtracking rewinds the
//! trail and constraint store to the state at choicepoint creation.
//! The reified builtins `(=)/3`, `','/3`, `';'/3` and `if_/3` live here.

use std::sync::{Arc, OnceLock};

use crate::db::{Clause, Database};
use crate::fmt::format_term;
use crate::goal::{rename_term, Goal, GoalError};
use crate::parser::ParsedQuery;
use crate::reif::{apply_closure, ApplyError};
use crate::state::{SolveStats, State, TrialOutcome};
use crate::term::{Principal, Term, VarId};

/// Default reduction limit; turns runaway queries into clean errors.
pub const DEFAULT_LIMIT: u64 = 1_000_000;

#[derive(Clone, PartialEq, Debug)]
pub enum EngineError {
    /// `if_/3` saw an unbound truth value, or a closure was unbound.
    Instantiation,
    /// `if_/3` saw a non-boolean truth value, or a goal position held a
    /// non-callable term. The culprit is fully walked.
    Type { expected: &'static str, culprit: Term },
    Existence { name: String, arity: usize },
    ReductionLimit(u64),
}

impl EngineError {
    /// The thrown error term, `error(E, _)` style.
    pub fn term(&self) -> Term {
        let inner = match self {
            EngineError::Instantiation => Term::atom("instantiation_error"),
            EngineError::Type { expected, culprit } => Term::compound(
                "type_error",
                vec![Term::atom(expected), culprit.clone()],
            ),
            EngineError::Existence { name, arity } => Term::compound(
                "existence_error",
                vec![
                    Term::atom("procedure"),
                    Term::pair(Term::atom(name), Term::int(*arity as i64)),
                ],
            ),
            EngineError::ReductionLimit(n) => Term::compound(
                "resource_error",
                vec![Term::compound("reduction_limit", vec![Term::int(*n as i64)])],
            ),
        };
        Term::compound("error", vec![inner, Term::atom("_")])
    }
}

impl std::fmt::Display for EngineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&format_term(&self.term()))
    }
}

impl std::error::Error for EngineError {}

/// One projected solution.
#[derive(Clone, PartialEq, Debug)]
pub struct Answer {
    /// All query variables in source order, bound or not.
    pub query_vars: Vec<(String, VarId)>,
    /// Bound query variables with their walked display terms.
    pub bindings: Vec<(String, Term)>,
    /// Residual `dif(A, B)` argument pairs, deduplicated and sorted.
    pub residuals: Vec<(Term, Term)>,
    /// Choicepoint-stack depth when this answer was delivered; zero means
    /// the top level prints `.` with no trailing `; false.`.
    pub pending_choicepoints: usize,
}

/// Goals from clause bodies are shared, not copied: each instruction
/// carries the variable-block base that shifts the body's local
/// variable ids, and leaf terms are renamed only when executed.
#[derive(Clone)]
enum Instr {
    Run(Arc<Goal>, usize),
    /// Dereference the reified truth value of an `if_/3` condition and
    /// continue with the matching branch at the given base.
    CheckTruth(Term, Arc<Goal>, Arc<Goal>, usize),
    /// Commit point for `once/1`: discard choicepoints above the depth.
    Trim(usize),
}

enum Alt<'db> {
    Goal(Arc<Goal>, usize),
    /// Else-branch of a residual `TestEq`: post `dif(a, b)`, then run
    /// the branch.
    DifElse {
        a: Term,
        b: Term,
        els: Arc<Goal>,
        base: usize,
    },
    Clauses {
        clauses: &'db [Clause],
        args: Vec<Term>,
        principals: Vec<Option<Principal>>,
        /// Next clause index to try.
        next: usize,
    },
}

struct Choicepoint<'db> {
    goals: Vec<Instr>,
    trail_mark: usize,
    alt: Alt<'db>,
    #[cfg(debug_assertions)]
    fingerprint: Option<u64>,
}

enum Step {
    Ok,
    Failed,
}

pub struct Machine<'db> {
    db: &'db Database,
    pub state: State,
    goals: Vec<Instr>,
    cps: Vec<Choicepoint<'db>>,
    root: Arc<Goal>,
    root_base: usize,
    query_var_count: usize,
    query_vars: Vec<(String, VarId)>,
    principal_scratch: Vec<Option<Principal>>,
    /// One-entry clause-lookup cache; recursive predicates hit it on
    /// every call after the first.
    pred_cache: Option<(Arc<str>, usize, &'db [Clause])>,
    /// Recycled goal-stack snapshots for choicepoints.
    goal_pool: Vec<Vec<Instr>>,
    limit: u64,
    /// Verify that backtracking restores state hashes (expensive; used by
    /// tests).
    pub verify_trail: bool,
    started: bool,
    done: bool,
}

impl<'db> Machine<'db> {
    pub fn new(db: &'db Database, query: &ParsedQuery) -> Result<Machine<'db>, EngineError> {
        Self::with_state(db, query, State::new())
    }

    pub fn with_state(
        db: &'db Database,
        query: &ParsedQuery,
        mut state: State,
    ) -> Result<Machine<'db>, EngineError> {
        let base = state.alloc_block(query.n_vars);
        let goal = Goal::from_term(&query.body).map_err(goal_error)?;
        let query_vars = query
            .var_names
            .iter()
            .enumerate()
            .filter_map(|(i, name)| match name {
                Some(n) if !n.starts_with('_') => Some((n.clone(), VarId(base + i))),
                _ => None,
            })
            .collect();
        let goals = vec![Instr::Run(goal.clone(), base)];
        Ok(Machine {
            db,
            state,
            goals,
            cps: Vec::new(),
            root: goal,
            root_base: base,
            query_var_count: base + query.n_vars,
            query_vars,
            principal_scratch: Vec::new(),
            pred_cache: None,
            goal_pool: Vec::new(),
            limit: DEFAULT_LIMIT,
            verify_trail: false,
            started: false,
            done: false,
        })
    }

    /// Return to the pristine pre-run state so the same query can be
    /// solved again without recompiling it. Statistics start over.
    pub fn reset(&mut self) {
        self.state.rewind(0);
        self.state.truncate_vars(self.query_var_count);
        self.state.stats = SolveStats::default();
        let mut cps = std::mem::take(&mut self.cps);
        for cp in cps.drain(..) {
            self.recycle(cp.goals);
        }
        self.cps = cps;
        self.goals.clear();
        self.goals.push(Instr::Run(self.root.clone(), self.root_base));
        self.started = false;
        self.done = false;
    }

    pub fn set_limit(&mut self, limit: u64) {
        self.limit = limit;
    }

    pub fn stats(&self) -> SolveStats {
        self.state.stats
    }

    /// Produce the next answer, `None` on exhaustion. A returned error
    /// aborts the enumeration.
    pub fn next_answer(&mut self) -> Result<Option<Answer>, EngineError> {
        if self.done {
            return Ok(None);
        }
        if self.started {
            if !self.backtrack()? {
                self.done = true;
                return Ok(None);
            }
        }
        self.started = true;
        loop {
            if self.state.stats.steps > self.limit {
                self.done = true;
                return Err(EngineError::ReductionLimit(self.limit));
            }
            let Some(instr) = self.goals.pop() else {
                return Ok(Some(self.project()));
            };
            let step = match self.execute(instr) {
                Ok(s) => s,
                Err(e) => {
                    self.done = true;
                    return Err(e);
                }
            };
            if matches!(step, Step::Failed) && !self.backtrack()? {
                self.done = true;
                return Ok(None);
            }
        }
    }

    fn execute(&mut self, instr: Instr) -> Result<Step, EngineError> {
        match instr {
            Instr::Run(goal, base) => self.execute_goal(&goal, base),
            Instr::CheckTruth(v, then, els, base) => {
                self.state.stats.steps += 1;
                match self.state.walk(&v) {
                    Term::Atom(a) if &*a == "true" => {
                        self.goals.push(Instr::Run(then, base));
                        Ok(Step::Ok)
                    }
                    Term::Atom(a) if &*a == "false" => {
                        self.goals.push(Instr::Run(els, base));
                        Ok(Step::Ok)
                    }
                    Term::Var(_) => Err(EngineError::Instantiation),
                    other => Err(EngineError::Type {
                        expected: "boolean",
                        culprit: self.state.walk_star(&other),
                    }),
                }
            }
            Instr::Trim(depth) => {
                self.cps.truncate(depth);
                Ok(Step::Ok)
            }
        }
    }

    fn execute_goal(&mut self, goal: &Goal, base: usize) -> Result<Step, EngineError> {
        match goal {
            Goal::True => {
                self.state.stats.steps += 1;
                Ok(Step::Ok)
            }
            Goal::Fail => {
                self.state.stats.steps += 1;
                Ok(Step::Failed)
            }
            Goal::Unify(a, b) => {
                self.state.stats.steps += 1;
                if self.state.unify_off(a, base, b, base) {
                    Ok(Step::Ok)
                } else {
                    Ok(Step::Failed)
                }
            }
            Goal::Dif(a, b) => {
                self.state.stats.steps += 1;
                let (a, b) = (rename_term(a, base), rename_term(b, base));
                match self.state.post_dif(&a, &b) {
                    crate::dif::PostResult::Failed => Ok(Step::Failed),
                    _ => Ok(Step::Ok),
                }
            }
            Goal::Conj(a, b) => {
                self.goals.push(Instr::Run(b.clone(), base));
                self.goals.push(Instr::Run(a.clone(), base));
                Ok(Step::Ok)
            }
            Goal::Disj(a, b) => {
                self.state.stats.steps += 1;
                self.push_choicepoint(Alt::Goal(b.clone(), base));
                self.goals.push(Instr::Run(a.clone(), base));
                Ok(Step::Ok)
            }
            Goal::IfReified(cond, then, els) => {
                self.state.stats.steps += 1;
                let cond = rename_term(cond, base);
                self.exec_if(&cond, then.clone(), els.clone(), base)
            }
            Goal::TestEq(a, b, then, els) => {
                self.state.stats.steps += 1;
                let (a, b) = (rename_term(a, base), rename_term(b, base));
                match self.state.trial_unify(&a, &b) {
                    TrialOutcome::Identical => {
                        self.goals.push(Instr::Run(then.clone(), base));
                        Ok(Step::Ok)
                    }
                    TrialOutcome::Clash => {
                        self.goals.push(Instr::Run(els.clone(), base));
                        Ok(Step::Ok)
                    }
                    TrialOutcome::UnifiesWith(_) => {
                        self.push_choicepoint(Alt::DifElse {
                            a: a.clone(),
                            b: b.clone(),
                            els: els.clone(),
                            base,
                        });
                        if self.state.unify(&a, &b) {
                            self.goals.push(Instr::Run(then.clone(), base));
                            Ok(Step::Ok)
                        } else {
                            Ok(Step::Failed)
                        }
                    }
                }
            }
            Goal::Call(name, args) => {
                if base == 0 {
                    self.dispatch(name, args)
                } else {
                    let renamed: Vec<Term> =
                        args.iter().map(|t| rename_term(t, base)).collect();
                    self.dispatch(name, &renamed)
                }
            }
        }
    }

    fn dispatch(&mut self, name: &Arc<str>, args: &[Term]) -> Result<Step, EngineError> {
        match (&**name, args.len()) {
            ("true", 0) => {
                self.state.stats.steps += 1;
                Ok(Step::Ok)
            }
            ("fail", 0) | ("false", 0) => {
                self.state.stats.steps += 1;
                Ok(Step::Failed)
            }
            ("=", 2) => self.execute_goal(&Goal::Unify(args[0].clone(), args[1].clone()), 0),
            ("dif", 2) => self.execute_goal(&Goal::Dif(args[0].clone(), args[1].clone()), 0),
            ("=", 3) => self.eq3(&args[0], &args[1], &args[2]),
            (",", 3) => {
                // appendix ','/3: if_(A_1, call(B_1, T), T = false)
                self.state.stats.steps += 1;
                let then = Arc::new(Goal::Call(
                    call_name(),
                    vec![args[1].clone(), args[2].clone()],
                ));
                let els = Arc::new(Goal::Unify(args[2].clone(), atom_false()));
                self.exec_if(&args[0], then, els, 0)
            }
            (";", 3) => {
                // appendix ;/3: if_(A_1, T = true, call(B_1, T))
                self.state.stats.steps += 1;
                let then = Arc::new(Goal::Unify(args[2].clone(), atom_true()));
                let els = Arc::new(Goal::Call(
                    call_name(),
                    vec![args[1].clone(), args[2].clone()],
                ));
                self.exec_if(&args[0], then, els, 0)
            }
            ("if_", 3) => {
                self.state.stats.steps += 1;
                let then = self.runtime_goal(&args[1])?;
                let els = self.runtime_goal(&args[2])?;
                self.exec_if(&args[0], then, els, 0)
            }
            ("call", n) if n >= 1 => {
                self.state.stats.steps += 1;
                let closure = self.state.walk(&args[0]);
                let goal = apply_closure(&closure, &args[1..]).map_err(apply_error)?;
                self.execute_goal(&goal, 0)
            }
            (",", 2) => {
                let a = self.runtime_goal(&args[0])?;
                let b = self.runtime_goal(&args[1])?;
                self.execute_goal(&Goal::Conj(a, b), 0)
            }
            (";", 2) => {
                let a = self.runtime_goal(&args[0])?;
                let b = self.runtime_goal(&args[1])?;
                self.execute_goal(&Goal::Disj(a, b), 0)
            }
            // impure; exists only for the benchmark baselines
            ("once", 1) => {
                self.state.stats.steps += 1;
                let goal = self.runtime_goal(&args[0])?;
                self.goals.push(Instr::Trim(self.cps.len()));
                self.goals.push(Instr::Run(goal, 0));
                Ok(Step::Ok)
            }
            (_, arity) => {
                let clauses = match &self.pred_cache {
                    Some((p, a, cls)) if Arc::ptr_eq(p, name) && *a == arity => *cls,
                    _ => {
                        let Some(cls) = self.db.get(name, arity) else {
                            return Err(EngineError::Existence {
                                name: name.to_string(),
                                arity,
                            });
                        };
                        self.pred_cache = Some((name.clone(), arity, cls));
                        cls
                    }
                };
                let mut principals = std::mem::take(&mut self.principal_scratch);
                principals.clear();
                principals.extend(args.iter().map(|a| self.state.walk_ref(a).principal()));
                let entered = self.enter_clauses(clauses, args, &principals, 0, true);
                self.principal_scratch = principals;
                if entered {
                    Ok(Step::Ok)
                } else {
                    Ok(Step::Failed)
                }
            }
        }
    }

    /// Reified term equality. Ground-decidable cases are deterministic;
    /// the residual case branches true-then-false with one choicepoint.
    fn eq3(&mut self, x: &Term, y: &Term, t: &Term) -> Result<Step, EngineError> {
        self.state.stats.steps += 1;
        match self.state.trial_unify(x, y) {
            TrialOutcome::Identical => {
                if self.state.unify(t, &atom_true()) {
                    Ok(Step::Ok)
                } else {
                    Ok(Step::Failed)
                }
            }
            TrialOutcome::Clash => {
                if self.state.unify(t, &atom_false()) {
                    Ok(Step::Ok)
                } else {
                    Ok(Step::Failed)
                }
            }
            TrialOutcome::UnifiesWith(_) => {
                let alt = Arc::new(Goal::Conj(
                    Arc::new(Goal::Unify(t.clone(), atom_false())),
                    Arc::new(Goal::Dif(x.clone(), y.clone())),
                ));
                self.push_choicepoint(Alt::Goal(alt, 0));
                if self.state.unify(t, &atom_true()) && self.state.unify(x, y) {
                    Ok(Step::Ok)
                } else {
                    Ok(Step::Failed)
                }
            }
        }
    }

    /// Run the condition closure with a fresh truth-value variable; every
    /// condition answer continues through `CheckTruth` (no commit).
    fn exec_if(
        &mut self,
        cond: &Term,
        then: Arc<Goal>,
        els: Arc<Goal>,
        branch_base: usize,
    ) -> Result<Step, EngineError> {
        let v = self.state.fresh_var();
        let closure = self.state.walk(cond);
        let goal = apply_closure(&closure, std::slice::from_ref(&v)).map_err(apply_error)?;
        self.goals.push(Instr::CheckTruth(v, then, els, branch_base));
        self.goals.push(Instr::Run(Arc::new(goal), 0));
        Ok(Step::Ok)
    }

    fn runtime_goal(&mut self, t: &Term) -> Result<Arc<Goal>, EngineError> {
        // a shallow walk suffices: nested control terms are structural
        // subterms, and variables in goal position re-walk at call time
        let walked = self.state.walk(t);
        Goal::from_term(&walked).map_err(goal_error)
    }

    fn push_choicepoint(&mut self, alt: Alt<'db>) {
        self.state.stats.choicepoints_created += 1;
        let goals = self.snapshot_goals();
        self.cps.push(Choicepoint {
            goals,
            trail_mark: self.state.mark(),
            alt,
            #[cfg(debug_assertions)]
            fingerprint: self.verify_trail.then(|| self.state.fingerprint()),
        });
    }

    fn snapshot_goals(&mut self) -> Vec<Instr> {
        let mut g = self.goal_pool.pop().unwrap_or_default();
        g.clone_from(&self.goals);
        g
    }

    fn recycle(&mut self, mut g: Vec<Instr>) {
        if self.goal_pool.len() < 64 {
            g.clear();
            self.goal_pool.push(g);
        }
    }

    fn backtrack(&mut self) -> Result<bool, EngineError> {
        while let Some(cp) = self.cps.pop() {
            self.state.rewind(cp.trail_mark);
            #[cfg(debug_assertions)]
            if let Some(fp) = cp.fingerprint {
                assert_eq!(
                    fp,
                    self.state.fingerprint(),
                    "trail rewind did not restore bindings and store"
                );
            }
            let old = std::mem::replace(&mut self.goals, cp.goals);
            self.recycle(old);
            match cp.alt {
                Alt::Goal(g, base) => {
                    self.goals.push(Instr::Run(g, base));
                    return Ok(true);
                }
                Alt::DifElse { a, b, els, base } => {
                    self.state.stats.steps += 1;
                    if matches!(
                        self.state.post_dif(&a, &b),
                        crate::dif::PostResult::Failed
                    ) {
                        continue;
                    }
                    self.goals.push(Instr::Run(els, base));
                    return Ok(true);
                }
                Alt::Clauses { clauses, args, principals, next } => {
                    if self.enter_clauses(clauses, &args, &principals, next, false) {
                        return Ok(true);
                    }
                }
            }
        }
        Ok(false)
    }

    /// Try indexed candidate clauses from clause index `from`; enter the
    /// first whose head unifies and leave any remaining candidate behind
    /// a choicepoint. Head unification failures cost neither steps nor
    /// choicepoints.
    fn enter_clauses(
        &mut self,
        clauses: &'db [Clause],
        args: &[Term],
        principals: &[Option<Principal>],
        from: usize,
        count_creation: bool,
    ) -> bool {
        let mut i = from;
        while i < clauses.len() {
            let cl: &Clause = &clauses[i];
            if !cl.may_match(principals) {
                i += 1;
                continue;
            }
            let mark = self.state.mark();
            let base = self.state.alloc_block(cl.n_vars);
            let mut entered = true;
            for (a, h) in args.iter().zip(&cl.head_args) {
                if !self.state.unify_head(a, h, base) {
                    entered = false;
                    break;
                }
            }
            if entered {
                self.state.stats.steps += 1;
                let next = (i + 1..clauses.len())
                    .find(|&j| clauses[j].may_match(principals));
                if let Some(next) = next {
                    if count_creation {
                        self.state.stats.choicepoints_created += 1;
                    }
                    let goals = self.snapshot_goals();
                    self.cps.push(Choicepoint {
                        goals,
                        trail_mark: mark,
                        alt: Alt::Clauses {
                            clauses,
                            args: args.to_vec(),
                            principals: principals.to_vec(),
                            next,
                        },
                        #[cfg(debug_assertions)]
                        fingerprint: None,
                    });
                }
                self.goals.push(Instr::Run(clauses[i].body.clone(), base));
                return true;
            }
            self.state.rewind(mark);
            i += 1;
        }
        false
    }

    fn project(&mut self) -> Answer {
        let mut bindings = Vec::new();
        let mut seed_vars = Vec::new();
        // representatives without a display name of their own adopt the
        // first query variable that walks to them
        let mut named_reps: Vec<VarId> = Vec::new();
        for (name, v) in &self.query_vars {
            seed_vars.push(*v);
            let w = self.state.walk_star(&Term::Var(*v));
            match w {
                Term::Var(r) if r == *v => {}
                Term::Var(r) => {
                    let is_query_var = self.query_vars.iter().any(|(_, q)| *q == r);
                    if is_query_var || named_reps.contains(&r) {
                        bindings.push((name.clone(), Term::Var(r)));
                    } else {
                        named_reps.push(r);
                    }
                    seed_vars.push(r);
                }
                _ => {
                    seed_vars.extend(self.state.term_variables(&w));
                    bindings.push((name.clone(), w));
                }
            }
        }
        let residuals = self.state.residual_goals(&seed_vars);
        // a representative that adopted a query variable's name renders
        // under that name
        let query_vars: Vec<(String, VarId)> = self
            .query_vars
            .iter()
            .map(|(name, v)| {
                match self.state.walk(&Term::Var(*v)) {
                    Term::Var(r) if named_reps.contains(&r) => (name.clone(), r),
                    _ => (name.clone(), *v),
                }
            })
            .collect();
        Answer {
            query_vars,
            bindings,
            residuals,
            pending_choicepoints: self.cps.len(),
        }
    }
}

fn atom_true() -> Term {
    static T: OnceLock<Term> = OnceLock::new();
    T.get_or_init(|| Term::atom("true")).clone()
}

fn atom_false() -> Term {
    static T: OnceLock<Term> = OnceLock::new();
    T.get_or_init(|| Term::atom("false")).clone()
}

fn call_name() -> Arc<str> {
    static T: OnceLock<Arc<str>> = OnceLock::new();
    T.get_or_init(|| Arc::from("call")).clone()
}

fn goal_error(e: GoalError) -> EngineError {
    match e {
        GoalError::NotCallable(t) | GoalError::BadCondition(t) => EngineError::Type {
            expected: "callable",
            culprit: t,
        },
    }
}

fn apply_error(e: ApplyError) -> EngineError {
    match e {
        ApplyError::Unbound => EngineError::Instantiation,
        ApplyError::NotCallable(t) => EngineError::Type {
            expected: "callable",
            culprit: t,
        },
    }
}

/// Outcome of a bounded query run.
#[derive(Clone, Debug)]
pub struct QueryOutcome {
    pub answers: Vec<Answer>,
    pub stats: SolveStats,
    /// False when the run stopped at `max_answers`.
    pub exhausted: bool,
}

/// Enumerate answers of a query against a program; facade over [`Machine`].
pub fn run_query(
    db: &Database,
    query: &ParsedQuery,
    max_answers: Option<usize>,
) -> Result<QueryOutcome, EngineError> {
    run_query_with(db, query, max_answers, State::new())
}

pub fn run_query_with(
    db: &Database,
    query: &ParsedQuery,
    max_answers: Option<usize>,
    state: State,
) -> Result<QueryOutcome, EngineError> {
    let mut m = Machine::with_state(db, query, state)?;
    let mut answers = Vec::new();
    let mut exhausted = true;
    while let Some(a) = m.next_answer()? {
        answers.push(a);
        if max_answers.is_some_and(|max| answers.len() >= max) {
            exhausted = false;
            break;
        }
    }
    Ok(QueryOutcome {
        answers,
        stats: m.stats(),
        exhausted,
    })
}
