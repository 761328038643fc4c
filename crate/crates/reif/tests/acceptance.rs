//! End-to-end acceptance checks, one test per criterion. Each prints a
//! single pass line on success (run with `--nocapture` to see them).

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use common::{query, run_cli, succeeds, GroundCases, DOMAIN};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use reif::bench;
use reif::dif::PostResult;
use reif::fmt::format_term;
use reif::parser::parse_term_str;
use reif::state::State;
use reif::stdlib;
use reif::term::Term;

const GOLDENS: &[(&str, &str)] = &[
    ("member(1, [1,2,3,4,5]).", "   true\n;  false.\n"),
    ("member(1, [1,2,1,4,5]).", "   true\n;  true\n;  false.\n"),
    ("member(1, [1,X]).", "   true\n;  X = 1.\n"),
    ("memberd(1, [1,X]).", "   true.\n"),
    ("memberd(1, [1,2,3]).", "   true.\n"),
    (
        "tfilter(=(X), [1,2,3,2,3,3], Fs).",
        "   X = 1, Fs = [1]\n\
         ;  X = 2, Fs = [2,2]\n\
         ;  X = 3, Fs = [3,3,3]\n\
         ;  Fs = [], dif(X, 1), dif(X, 2), dif(X, 3).\n",
    ),
    ("duplicate(X, [1,2,3,2,3,3]).", "   X = 2\n;  X = 3\n;  false.\n"),
    ("firstduplicate(1, [1,2,3,1]).", "   true.\n"),
    ("firstduplicate(X, [1,2,2,1]).", "   X = 1.\n"),
    ("memberd_t(1, [1|non_list], T).", "   T = true.\n"),
    ("memberd_t(X, non_list, T).", "   false.\n"),
];

#[test]
fn criterion_1_golden_query_suite() {
    let start = Instant::now();
    for expand in [false, true] {
        for (q, expected) in GOLDENS {
            let mut args = vec!["run", "-q", q];
            if expand {
                args.insert(1, "--expand");
            }
            let r = run_cli(&args);
            assert_eq!(&r.stdout, expected, "query {q} (expand: {expand})");
        }
    }
    assert!(start.elapsed().as_secs() < 5, "suite took {:?}", start.elapsed());
    println!("ACCEPTANCE 1 golden query suite: pass");
}

#[test]
fn criterion_2_determinism_metrics() {
    let db = stdlib();
    let out = query(&db, "memberd(1, [1,2,3]).");
    assert_eq!(out.stats.choicepoints_created, 0);
    assert_eq!(out.answers.len(), 1);
    assert_eq!(out.answers[0].pending_choicepoints, 0);

    let out = query(&db, "memberd_dif(1, [1,2,3]).");
    assert!(out.stats.choicepoints_created >= 1);
    assert_eq!(out.answers.len(), 1);
    assert!(out.answers[0].pending_choicepoints > 0);
    let r = run_cli(&["run", "-q", "memberd_dif(1, [1,2,3])."]);
    assert!(r.stdout.ends_with(";  false.\n"), "got: {}", r.stdout);
    println!("ACCEPTANCE 2 determinism metrics: pass");
}

#[test]
fn criterion_3_grounding_oracle_equivalence() {
    let start = Instant::now();
    let db = stdlib();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let var_pool = ["V", "W"];
    for case in 0..1000 {
        let n_vars = rng.gen_range(0..=2usize);
        let vars = &var_pool[..n_vars];
        let mut used: BTreeSet<&str> = BTreeSet::new();
        let pick = |rng: &mut ChaCha8Rng, used: &mut BTreeSet<&'static str>| {
            if !vars.is_empty() && rng.gen_bool(0.4) {
                let v = vars[rng.gen_range(0..vars.len())];
                used.insert(v);
                v.to_string()
            } else {
                DOMAIN[rng.gen_range(0..DOMAIN.len())].to_string()
            }
        };
        let len = rng.gen_range(0..=4usize);
        let elem = pick(&mut rng, &mut used);
        let items: Vec<String> = (0..len).map(|_| pick(&mut rng, &mut used)).collect();
        let list = format!("[{}]", items.join(","));
        let vars: Vec<&str> = used.into_iter().collect();

        let member = GroundCases { template: &format!("member({elem}, {list})."), vars: &vars };
        let memberd = GroundCases { template: &format!("memberd({elem}, {list})."), vars: &vars };
        let oracle = member.oracle_solutions(|assignment| {
            let subst = |s: &str| {
                vars.iter()
                    .position(|v| *v == s)
                    .map_or_else(|| s.to_string(), |i| assignment[i].to_string())
            };
            let e = subst(&elem);
            items.iter().any(|item| subst(item) == e)
        });
        assert_eq!(member.engine_solutions(&db), oracle, "case {case}: member({elem}, {list})");
        assert_eq!(memberd.engine_solutions(&db), oracle, "case {case}: memberd({elem}, {list})");
    }
    for x in DOMAIN {
        for y in DOMAIN {
            for t in ["true", "false"] {
                assert_eq!(
                    succeeds(&db, &format!("=({x}, {y}, {t}).")),
                    (x == y) == (t == "true")
                );
            }
        }
    }
    for a in [true, false] {
        for b in [true, false] {
            let ga = if a { "=(a, a)" } else { "=(a, b)" };
            let gb = if b { "=(c, c)" } else { "=(b, c)" };
            for t in [true, false] {
                let tv = if t { "true" } else { "false" };
                assert_eq!(succeeds(&db, &format!("','({ga}, {gb}, {tv}).")), (a && b) == t);
                assert_eq!(succeeds(&db, &format!("';'({ga}, {gb}, {tv}).")), (a || b) == t);
            }
        }
    }
    assert!(start.elapsed().as_secs() < 30, "oracle took {:?}", start.elapsed());
    println!("ACCEPTANCE 3 grounding-oracle equivalence: pass");
}

#[test]
fn criterion_4_dif_store_behavior() {
    // violation: both pending pairs become equal
    let mut s = State::new();
    let x = s.fresh_var();
    let y = s.fresh_var();
    let fxb = Term::compound("f", vec![x.clone(), Term::atom("b")]);
    let fay = Term::compound("f", vec![Term::atom("a"), y.clone()]);
    assert_eq!(s.post_dif(&fxb, &fay), PostResult::Suspended);
    assert!(s.unify(&x, &Term::atom("a")));
    assert!(!s.unify(&y, &Term::atom("b")));

    // discharge: a clash entails the constraint
    let mut s = State::new();
    let x = s.fresh_var();
    let y = s.fresh_var();
    let fxb = Term::compound("f", vec![x.clone(), Term::atom("b")]);
    let fay = Term::compound("f", vec![Term::atom("a"), y.clone()]);
    assert_eq!(s.post_dif(&fxb, &fay), PostResult::Suspended);
    assert!(s.unify(&x, &Term::atom("c")));
    assert!(s.unify(&y, &Term::atom("b")));
    assert!(s.residual_goals(&s.term_variables(&fay)).is_empty());

    // shrink: a partial binding narrows the pending pairs
    let mut s = State::new();
    let x = s.fresh_var();
    let y = s.fresh_var();
    let fxb = Term::compound("f", vec![x.clone(), Term::atom("b")]);
    let fay = Term::compound("f", vec![Term::atom("a"), y.clone()]);
    assert_eq!(s.post_dif(&fxb, &fay), PostResult::Suspended);
    assert!(s.unify(&x, &Term::atom("a")));
    let vars = s.term_variables(&fay);
    assert_eq!(s.residual_goals(&vars).len(), 1);

    // backtracking over any dif restores the store hash
    let mut s = State::new();
    let x = s.fresh_var();
    let y = s.fresh_var();
    let before = s.fingerprint();
    let mark = s.mark();
    assert_eq!(s.post_dif(&x, &Term::atom("a")), PostResult::Suspended);
    assert_eq!(
        s.post_dif(
            &Term::compound("f", vec![x.clone(), Term::atom("b")]),
            &Term::compound("f", vec![Term::atom("a"), y.clone()])
        ),
        PostResult::Suspended
    );
    assert!(s.unify(&y, &Term::atom("c")));
    s.rewind(mark);
    assert_eq!(s.fingerprint(), before);
    println!("ACCEPTANCE 4 dif store behavior: pass");
}

#[test]
fn criterion_5_if_error_contract() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cond.pl");
    std::fs::write(&path, "maybe_t(maybe).\nunbound_t(_).\n").unwrap();
    let p = path.to_str().unwrap();

    let r = run_cli(&["run", p, "-q", "if_(maybe_t, fail, fail)."]);
    assert_eq!(r.code, 2);
    assert!(
        r.stderr.contains("type_error(boolean, maybe)"),
        "got: {}",
        r.stderr
    );

    let r = run_cli(&["run", p, "-q", "if_(unbound_t, fail, fail)."]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("instantiation_error"), "got: {}", r.stderr);
    println!("ACCEPTANCE 5 if_ error contract: pass");
}

#[test]
fn criterion_6_table_1_surrogate() {
    let start = Instant::now();
    let rows = bench::run_all(bench::DEFAULT_REPS);
    for workload in ["letters", "keyed"] {
        let get = |name: &str| {
            rows.iter()
                .find(|r| r.workload == workload && r.contender == name)
                .unwrap_or_else(|| panic!("{workload}/{name} row missing"))
        };
        let once = get("once_member");
        let dif = get("memberd_dif");
        let if_ = get("memberd_if");
        let expanded = get("memberd_expanded");
        for r in [once, dif, if_, expanded] {
            assert_eq!(r.answers, 1, "{workload}/{}", r.contender);
        }
        assert!(once.stats.steps <= expanded.stats.steps, "{workload}");
        assert!(expanded.stats.steps <= if_.stats.steps, "{workload}");
        assert!(expanded.stats.steps < dif.stats.steps, "{workload}");
        assert!(expanded.millis <= if_.millis, "{workload}");
        assert!(expanded.millis <= dif.millis, "{workload}");
        if workload == "letters" {
            assert_eq!(expanded.stats.cells_visited, 26);
            assert_eq!(once.stats.cells_visited, 26);
        }
    }
    assert!(start.elapsed().as_secs() < 60, "bench took {:?}", start.elapsed());
    println!("ACCEPTANCE 6 Table 1 surrogate: pass");
}

#[test]
fn criterion_7_specialization_differential() {
    let db = stdlib();
    let expanded = db.specialized();
    for (q, _) in GOLDENS {
        let plain = query(&db, q);
        let spec = query(&expanded, q);
        let render = |o: &reif::QueryOutcome| {
            o.answers
                .iter()
                .map(reif::fmt::format_answer)
                .collect::<Vec<_>>()
        };
        assert_eq!(render(&plain), render(&spec), "query {q}");
        assert!(
            spec.stats.choicepoints_created <= plain.stats.choicepoints_created,
            "query {q}: {} > {}",
            spec.stats.choicepoints_created,
            plain.stats.choicepoints_created
        );
    }
    println!("ACCEPTANCE 7 specialization differential: pass");
}

#[test]
fn criterion_8_parser_round_trip() {
    let db = stdlib();
    for (q, _) in GOLDENS {
        for a in query(&db, q).answers {
            let mut terms: Vec<Term> = a.bindings.iter().map(|(_, t)| t.clone()).collect();
            for (l, r) in &a.residuals {
                terms.push(Term::compound("dif", vec![l.clone(), r.clone()]));
            }
            for t in terms {
                let text = format_term(&t);
                let (parsed, _) = parse_term_str(&text)
                    .unwrap_or_else(|e| panic!("{text}: {e}"));
                assert!(
                    alpha_equal(&parsed, &t),
                    "round trip changed {text}: {parsed:?} vs {t:?}"
                );
            }
        }
    }
    println!("ACCEPTANCE 8 parser round trip: pass");
}

/// Equality up to variable renaming (printing renames fresh variables).
fn alpha_equal(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, map: &mut Vec<(reif::VarId, reif::VarId)>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                if let Some((_, mapped)) = map.iter().find(|(k, _)| k == x) {
                    mapped == y
                } else if map.iter().any(|(_, v)| v == y) {
                    false
                } else {
                    map.push((*x, *y));
                    true
                }
            }
            (Term::Atom(x), Term::Atom(y)) => x == y,
            (Term::Int(x), Term::Int(y)) => x == y,
            (Term::Compound(x), Term::Compound(y)) => {
                x.functor == y.functor
                    && x.args.len() == y.args.len()
                    && x.args.iter().zip(&y.args).all(|(p, q)| go(p, q, map))
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}
