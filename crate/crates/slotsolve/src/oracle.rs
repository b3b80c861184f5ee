//! Brute-force reference solvers for the test suite.
//!
//! A [`DenseCsp`] is the plainest possible rendering of a CSP: explicit
//! value sets for domains, explicit tuple sets for constraints, no events,
//! no components. [`brute_force_hyperarc`](DenseCsp::brute_force_hyperarc)
//! computes the greatest fixpoint of per-constraint projection by exhaustive
//! tuple scanning; [`enumerate_solutions`](DenseCsp::enumerate_solutions)
//! filters the full Cartesian product. Both are deliberately independent of
//! the engine's narrowing operators and scheduler — they share only the
//! [`FiniteDomain`] value type — so agreement between
//! the two sides is evidence, not tautology.
//!
//! Everything here is capped on the domain product size (default 10^7):
//! these are oracles for small instances, not solvers.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::{Domain, FiniteDomain, Value};

/// Default bound on Π|Dᵢ| for oracle runs.
pub const DEFAULT_CAP: u128 = 10_000_000;

/// An extensional constraint: variable indices plus the allowed tuples.
#[derive(Debug)]
pub struct DenseConstraint {
    pub scope: Vec<usize>,
    pub tuples: BTreeSet<Vec<Value>>,
}

/// A CSP in dense form, enumerable by brute force.
#[derive(Debug)]
pub struct DenseCsp {
    pub domains: Vec<Domain>,
    pub constraints: Vec<DenseConstraint>,
    cap: u128,
}

impl DenseCsp {
    pub fn new(domains: Vec<Domain>) -> DenseCsp {
        DenseCsp { domains, constraints: Vec::new(), cap: DEFAULT_CAP }
    }

    pub fn with_cap(mut self, cap: u128) -> DenseCsp {
        self.cap = cap;
        self
    }

    /// Adds an extensional constraint. Tuples are deduplicated; tuples of
    /// the wrong arity are a caller bug.
    pub fn add_table(&mut self, scope: Vec<usize>, tuples: impl IntoIterator<Item = Vec<Value>>) {
        assert!(scope.iter().all(|&x| x < self.domains.len()), "scope index out of range");
        let tuples: BTreeSet<Vec<Value>> = tuples.into_iter().collect();
        assert!(tuples.iter().all(|t| t.len() == scope.len()), "tuple arity must match the scope");
        self.constraints.push(DenseConstraint { scope, tuples });
    }

    /// Adds a constraint given as a predicate, materialized into a tuple
    /// set over the current domains of its scope.
    pub fn add_predicate(&mut self, scope: Vec<usize>, pred: impl Fn(&[Value]) -> bool) -> Result<()> {
        assert!(scope.iter().all(|&x| x < self.domains.len()), "scope index out of range");
        let size: u128 = scope.iter().map(|&x| u128::from(self.domains[x].size())).product();
        if size > self.cap {
            return Err(Error::Capacity { need: size, cap: self.cap });
        }
        let columns: Vec<Vec<Value>> = scope.iter().map(|&x| self.domains[x].iter().collect()).collect();
        let tuples: BTreeSet<Vec<Value>> =
            columns.into_iter().multi_cartesian_product().filter(|t| pred(t)).collect();
        self.constraints.push(DenseConstraint { scope, tuples });
        Ok(())
    }

    fn product_size(&self) -> u128 {
        self.domains.iter().map(|d| u128::from(d.size())).product()
    }

    fn check_cap(&self) -> Result<()> {
        let need = self.product_size();
        if need > self.cap {
            return Err(Error::Capacity { need, cap: self.cap });
        }
        Ok(())
    }

    /// The greatest fixpoint of hyper-arc projection: repeatedly replace
    /// each scope domain by the values that still appear in some tuple all
    /// of whose components survive, until nothing changes. The returned box
    /// may have empty components.
    pub fn brute_force_hyperarc(&self) -> Result<Vec<Domain>> {
        self.check_cap()?;
        let mut doms: Vec<BTreeSet<Value>> = self.domains.iter().map(|d| d.iter().collect()).collect();
        loop {
            let mut changed = false;
            for c in &self.constraints {
                let mut support: Vec<BTreeSet<Value>> = vec![BTreeSet::new(); c.scope.len()];
                for t in &c.tuples {
                    if t.iter().zip(&c.scope).all(|(v, &x)| doms[x].contains(v)) {
                        for (k, v) in t.iter().enumerate() {
                            support[k].insert(*v);
                        }
                    }
                }
                for (k, &x) in c.scope.iter().enumerate() {
                    let before = doms[x].len();
                    doms[x].retain(|v| support[k].contains(v));
                    changed |= doms[x].len() != before;
                }
            }
            if !changed {
                break;
            }
        }
        Ok(doms.into_iter().map(FiniteDomain::from_values).collect())
    }

    /// Every assignment in the full Cartesian product that satisfies every
    /// constraint, in lexicographic order (hence duplicate-free).
    pub fn enumerate_solutions(&self) -> Result<Vec<Vec<Value>>> {
        self.check_cap()?;
        if self.domains.iter().any(|d| d.is_empty()) {
            return Ok(Vec::new());
        }
        let columns: Vec<Vec<Value>> = self.domains.iter().map(|d| d.iter().collect()).collect();
        Ok(columns
            .into_iter()
            .multi_cartesian_product()
            .filter(|asg| {
                self.constraints.iter().all(|c| {
                    let t: Vec<Value> = c.scope.iter().map(|&x| asg[x]).collect();
                    c.tuples.contains(&t)
                })
            })
            .collect())
    }
}

/// All n-queens solutions by straight permutation enumeration: columns are
/// a permutation of 1..=n (rows attack along rows/columns by construction),
/// a permutation survives if no pair shares a diagonal.
pub fn queens_solutions(n: usize) -> Vec<Vec<Value>> {
    (1..=n as Value)
        .permutations(n)
        .filter(|p| {
            (0..n).all(|i| (i + 1..n).all(|j| (p[i] - p[j]).unsigned_abs() != (j - i) as u64))
        })
        .collect()
}
