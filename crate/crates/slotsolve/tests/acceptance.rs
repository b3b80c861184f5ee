//! The acceptance gate: nine end-to-end checks, one test (and one pass/fail
//! line) per criterion. Each check pits the component engine against an
//! independent reference — the brute-force oracle, golden n-queens counts,
//! alternative wirings of the same problem — on a seeded 200-instance corpus.

mod common;

use std::cell::{Cell, RefCell};
use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::Path;
use std::rc::Rc;
use std::time::Instant;

use slotsolve::model::ast::Pos;
use slotsolve::model::{nqueens, parse, BuildOptions, ModelError, Scheme};
use slotsolve::{
    Bus, Cno, Constraint, Domain, FiniteDomain, IntegralVariable, NotifyMode, PopPolicy, Value,
    VarId,
};

use common::{corpus, solve, space_of, CORPUS_SIZE};

#[test]
fn criterion_1_propagation_reaches_the_bruteforce_fixpoint() {
    let started = Instant::now();
    let mut infeasible = 0usize;
    for (k, csp) in corpus().iter().enumerate() {
        let oracle_box = csp.brute_force_hyperarc().expect("corpus stays under the oracle cap");
        let oracle_failed = oracle_box.iter().any(Domain::is_empty);

        let mut space = space_of(csp, Scheme::Constraint, PopPolicy::Fifo);
        let feasible = space.propagate().unwrap();

        if oracle_failed {
            assert!(!feasible, "instance {k}: engine succeeded where the oracle wiped a domain");
            infeasible += 1;
        } else {
            assert!(feasible, "instance {k}: engine failed on a non-empty fixpoint");
            assert_eq!(space.domains(), oracle_box, "instance {k}: fixpoint boxes differ");
        }
    }
    let secs = started.elapsed().as_secs_f64();
    assert!(secs <= 10.0, "budget blown: {secs:.1}s > 10s");
    println!(
        "PASS criterion 1: {CORPUS_SIZE} instances ({infeasible} infeasible) reach the \
         brute-force hyper-arc fixpoint in {secs:.2}s"
    );
}

#[test]
fn criterion_2_search_finds_exactly_the_bruteforce_solutions() {
    let started = Instant::now();
    let mut total = 0usize;
    for (k, csp) in corpus().iter().enumerate() {
        let expected: BTreeSet<Vec<Value>> =
            csp.enumerate_solutions().expect("corpus stays under the oracle cap").into_iter().collect();
        let mut space = space_of(csp, Scheme::Constraint, PopPolicy::Fifo);
        let found: BTreeSet<Vec<Value>> =
            solve(&mut space).unwrap_or_default().into_iter().collect();
        assert_eq!(found, expected, "instance {k}: solution sets differ");
        total += expected.len();
    }
    let secs = started.elapsed().as_secs_f64();
    assert!(secs <= 30.0, "budget blown: {secs:.1}s > 30s");
    println!(
        "PASS criterion 2: solve_all equals brute-force enumeration on {CORPUS_SIZE} instances \
         ({total} solutions) in {secs:.2}s"
    );
}

#[test]
fn criterion_3_nqueens_golden_counts() {
    for (n, want) in [(1, 1), (2, 0), (3, 0), (4, 2), (5, 10), (6, 4), (7, 40)] {
        assert_eq!(queens_count(n, Scheme::Constraint), want, "n = {n}");
    }
    let started = Instant::now();
    assert_eq!(queens_count(8, Scheme::Constraint), 92, "n = 8");
    let secs = started.elapsed().as_secs_f64();
    assert!(secs <= 5.0, "n = 8 budget blown: {secs:.1}s > 5s");
    println!("PASS criterion 3: n-queens counts 1,0,0,2,10,4,40,92 for n = 1..=8 (n = 8 in {secs:.2}s)");
}

fn queens_count(n: usize, scheme: Scheme) -> u64 {
    let opts = BuildOptions { scheme, ..BuildOptions::default() };
    let mut space = nqueens(n, &opts).unwrap();
    assert!(space.propagate().unwrap(), "initial propagation prunes nothing on a full board");
    space.count_solutions().unwrap()
}

#[test]
fn criterion_4_connection_schemes_are_interchangeable() {
    for (k, csp) in corpus().iter().enumerate() {
        let by_constraint = solve(&mut space_of(csp, Scheme::Constraint, PopPolicy::Fifo));
        let by_variable = solve(&mut space_of(csp, Scheme::Variable, PopPolicy::Fifo));
        assert_eq!(
            by_constraint.map(sorted),
            by_variable.map(sorted),
            "instance {k}: schemes disagree"
        );
    }
    for n in 1..=8 {
        assert_eq!(
            queens_count(n, Scheme::Constraint),
            queens_count(n, Scheme::Variable),
            "schemes disagree on {n}-queens"
        );
    }
    println!(
        "PASS criterion 4: constraint- and variable-oriented wirings agree on \
         {CORPUS_SIZE} instances and n-queens up to 8"
    );
}

fn sorted(mut v: Vec<Vec<Value>>) -> Vec<Vec<Value>> {
    v.sort();
    v
}

#[test]
fn criterion_5_pop_order_confluence() {
    let policies: Vec<PopPolicy> = [PopPolicy::Fifo, PopPolicy::Lifo]
        .into_iter()
        .chain((0..10).map(|k| PopPolicy::Random(0xC0FFEE + k)))
        .collect();
    for (k, csp) in corpus().iter().enumerate() {
        let mut reference: Option<Option<Vec<Domain>>> = None;
        for &policy in &policies {
            let mut space = space_of(csp, Scheme::Constraint, policy);
            // On failure the engine stops at the first wipe-out, so only the
            // outcome is schedule-independent; on success the whole box is.
            let outcome = space.propagate().unwrap().then(|| space.domains());
            match &reference {
                None => reference = Some(outcome),
                Some(r) => assert_eq!(r, &outcome, "instance {k}: {policy:?} diverged"),
            }
        }
    }
    println!(
        "PASS criterion 5: FIFO, LIFO, and 10 random pop orders agree on all {CORPUS_SIZE} instances"
    );
}

#[test]
fn criterion_6_pipelines_stop_at_the_first_failure() {
    for k in 1..=5usize {
        for j in 1..=k {
            let mut bus = Bus::new();
            let v = IntegralVariable::new(&mut bus, VarId(0), "p", FiniteDomain::interval(1, 9));
            let c = Constraint::new(&mut bus, "probe", &[&v], NotifyMode::Deferred).unwrap();
            let executed = Rc::new(Cell::new(0usize));
            for step in 1..=k {
                let executed = Rc::clone(&executed);
                let fails_here = step == j;
                let cno = Cno::from_fn(&format!("step{step}"), vec![v.id()], move |mut msg| {
                    executed.set(executed.get() + 1);
                    msg.failure |= fails_here;
                    msg
                });
                c.attach_cno(&mut bus, &cno).unwrap();
            }
            assert!(!c.invoke(&mut bus).unwrap(), "k = {k}, j = {j}: failure not reported");
            assert_eq!(executed.get(), j, "k = {k}, j = {j}: wrong number of operators ran");
        }
    }
    println!(
        "PASS criterion 6: a failure at position j of k stops the pipeline after exactly \
         j operators, for every j <= k <= 5"
    );
}

struct SharedBuf(Rc<RefCell<Vec<u8>>>);

impl io::Write for SharedBuf {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.borrow_mut().extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

#[test]
fn criterion_7_tracing_observes_without_interfering() {
    let mut traced_bytes = 0usize;
    for (k, csp) in corpus().iter().enumerate() {
        let mut quiet = space_of(csp, Scheme::Constraint, PopPolicy::Fifo);
        let quiet_solutions = solve(&mut quiet);

        let mut loud = space_of(csp, Scheme::Constraint, PopPolicy::Fifo);
        let sink = Rc::new(RefCell::new(Vec::new()));
        loud.bus.set_trace(Some(Box::new(SharedBuf(Rc::clone(&sink)))));
        let loud_solutions = solve(&mut loud);

        assert_eq!(quiet_solutions, loud_solutions, "instance {k}: tracing changed the solutions");
        assert_eq!(quiet.domains(), loud.domains(), "instance {k}: tracing changed a domain");
        traced_bytes += sink.borrow().len();
    }
    assert!(traced_bytes > 0, "the spy never saw a delivery");
    println!(
        "PASS criterion 7: tracing every delivery ({traced_bytes} bytes over {CORPUS_SIZE} \
         instances) changes no solution and no domain"
    );
}

#[test]
fn criterion_8_exhausted_search_restores_the_initial_box() {
    let mut searched = 0usize;
    for (k, csp) in corpus().iter().enumerate() {
        let mut space = space_of(csp, Scheme::Constraint, PopPolicy::Fifo);
        if !space.propagate().unwrap() {
            assert!(space.enumerator.trail().is_empty(), "instance {k}: failed propagation left trail state");
            continue;
        }
        let snapshot = space.domains();
        space.solve_all().unwrap();
        assert_eq!(space.domains(), snapshot, "instance {k}: domains not restored after exhaustion");
        assert!(space.enumerator.trail().is_empty(), "instance {k}: trail not drained");
        searched += 1;
    }
    println!(
        "PASS criterion 8: exhausted search restores the post-propagation box and drains the \
         trail on {searched} feasible instances"
    );
}

#[derive(PartialEq, Eq, Debug, Clone, Copy)]
enum Diagnosis {
    Syntax,
    Undeclared,
    Duplicate,
    Arity,
}

fn diagnose(e: &ModelError) -> (Diagnosis, Pos) {
    match e {
        ModelError::Syntax { pos, .. } => (Diagnosis::Syntax, *pos),
        ModelError::UndeclaredVariable { pos, .. } => (Diagnosis::Undeclared, *pos),
        ModelError::DuplicateName { pos, .. } => (Diagnosis::Duplicate, *pos),
        ModelError::ArityMismatch { pos, .. } => (Diagnosis::Arity, *pos),
        other => panic!("model corpus never triggers {other}"),
    }
}

#[test]
fn criterion_9_model_corpus_parses_and_diagnoses() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/models");

    let expected_failures: &[(&str, Diagnosis, u32, u32)] = &[
        ("invalid_missing_semi.csp", Diagnosis::Syntax, 1, 14),
        ("invalid_unknown_stmt.csp", Diagnosis::Syntax, 1, 1),
        ("invalid_undeclared.csp", Diagnosis::Undeclared, 2, 17),
        ("invalid_duplicate_var.csp", Diagnosis::Duplicate, 2, 5),
        ("invalid_dup_scope.csp", Diagnosis::Duplicate, 3, 26),
        ("invalid_arity.csp", Diagnosis::Arity, 3, 36),
        ("invalid_bad_range.csp", Diagnosis::Syntax, 1, 13),
        ("invalid_stray_char.csp", Diagnosis::Syntax, 2, 14),
        ("invalid_overflow.csp", Diagnosis::Syntax, 1, 13),
        ("invalid_empty_tuple.csp", Diagnosis::Syntax, 2, 26),
        ("invalid_alldiff_single.csp", Diagnosis::Syntax, 2, 21),
    ];

    let mut valid = 0usize;
    let mut listed: BTreeSet<String> = BTreeSet::new();
    for entry in fs::read_dir(&dir).expect("tests/models exists") {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        if name.starts_with("valid_") {
            let text = fs::read_to_string(&path).unwrap();
            let model = parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            let reprinted = model.to_string();
            let reparsed =
                parse(&reprinted).unwrap_or_else(|e| panic!("{name}: reprint does not parse: {e}"));
            assert_eq!(model, reparsed, "{name}: parse-print-parse is not a fixpoint");
            valid += 1;
        }
        listed.insert(name);
    }

    for &(name, class, line, col) in expected_failures {
        assert!(listed.contains(name), "{name} is missing from tests/models");
        let text = fs::read_to_string(dir.join(name)).unwrap();
        let err = parse(&text)
            .err()
            .unwrap_or_else(|| panic!("{name}: parsed cleanly but should not"));
        assert_eq!(
            diagnose(&err),
            (class, Pos { line, col }),
            "{name}: wrong diagnosis ({err})"
        );
    }

    let total = valid + expected_failures.len();
    assert!(valid >= 10 && total >= 20, "corpus too small: {valid} valid, {total} total");
    println!(
        "PASS criterion 9: {valid} valid models round-trip and {} invalid models are \
         diagnosed with the expected class and position",
        expected_failures.len()
    );
}
