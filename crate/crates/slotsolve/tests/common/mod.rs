//! Shared fixtures for the integration suite: a seeded corpus of random
//! table CSPs, each available both as a [`DenseCsp`] for the brute-force
//! oracle and as a live component network via the model builder.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::rngs::StdRng;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use slotsolve::model::ast::{
    ConstraintDecl, DomainItem, DomainLiteral, Ident, Model, Pos, Stmt, Tuple, VarDecl,
};
use slotsolve::model::{build, BuildOptions, Scheme, Space};
use slotsolve::oracle::DenseCsp;
use slotsolve::{Domain, FiniteDomain, PopPolicy, Value};

pub const CORPUS_SIZE: usize = 200;
const CORPUS_SEED: u64 = 0x51_07_50_1f;

/// The acceptance corpus: `CORPUS_SIZE` random CSPs over 2–4 variables with
/// domains of up to six values drawn from −3..=6, constrained by one to five
/// extensional tables of arity 2–3 at varying densities (including empty
/// tables, so genuinely infeasible instances occur).
pub fn corpus() -> Vec<DenseCsp> {
    let mut rng = StdRng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE).map(|_| random_csp(&mut rng)).collect()
}

fn random_csp(rng: &mut StdRng) -> DenseCsp {
    let nvars = rng.random_range(2..=4);
    let domains: Vec<Domain> = (0..nvars)
        .map(|_| {
            let size = rng.random_range(1..=6);
            let mut values = BTreeSet::new();
            while values.len() < size {
                values.insert(rng.random_range(-3..=6));
            }
            FiniteDomain::from_values(values)
        })
        .collect();

    let mut csp = DenseCsp::new(domains);
    for _ in 0..rng.random_range(1..=5) {
        let arity = rng.random_range(2..=3.min(nvars));
        let mut scope: Vec<usize> = (0..nvars).collect();
        scope.shuffle(rng);
        scope.truncate(arity);

        let density = *[0.0, 0.25, 0.45, 0.65, 0.85]
            .choose(rng)
            .expect("density table is non-empty");
        let tuples: Vec<Vec<Value>> = scope
            .iter()
            .map(|&i| csp.domains[i].iter().collect::<Vec<Value>>())
            .multi_cartesian_product()
            .filter(|_| rng.random_bool(density))
            .collect();
        csp.add_table(scope, tuples);
    }
    csp
}

/// Renders a dense CSP as a model ast (variables `v0`, `v1`, … and one
/// table constraint per tuple set), ready for [`build`].
pub fn model_of(csp: &DenseCsp) -> Model {
    let nowhere = Pos { line: 0, col: 0 };
    let ident = |i: usize| Ident { text: format!("v{i}"), pos: nowhere };

    let mut items = Vec::new();
    for (i, d) in csp.domains.iter().enumerate() {
        items.push(Stmt::Var(VarDecl {
            name: ident(i),
            domain: DomainLiteral {
                items: d.intervals().iter().map(|&(lo, hi)| DomainItem::Range(lo, hi)).collect(),
                pos: nowhere,
            },
        }));
    }
    for c in &csp.constraints {
        items.push(Stmt::Constraint(ConstraintDecl::Table {
            vars: c.scope.iter().map(|&i| ident(i)).collect(),
            tuples: c.tuples.iter().map(|t| Tuple { values: t.clone(), pos: nowhere }).collect(),
            pos: nowhere,
        }));
    }
    Model { items }
}

/// Assembles the CSP as a live solver instance under the given wiring.
pub fn space_of(csp: &DenseCsp, scheme: Scheme, policy: PopPolicy) -> Space {
    let opts = BuildOptions { scheme, policy, ..BuildOptions::default() };
    build(&model_of(csp), &opts).expect("corpus models stay under the table cap")
}

/// Propagates to a fixpoint and, when feasible, enumerates every solution
/// (values only, in declaration order). `None` means propagation failed.
pub fn solve(space: &mut Space) -> Option<Vec<Vec<Value>>> {
    if !space.propagate().expect("propagation on a fresh space cannot misuse the bus") {
        return None;
    }
    let sols = space.solve_all().expect("search on a propagated space cannot misuse the bus");
    Some(sols.into_iter().map(|s| s.into_iter().map(|(_, v)| v).collect()).collect())
}
