//! Lowering a parsed model onto the bus: variables, constraints with their
//! narrowing operators and trigger wiring, a scheduler, and an enumerator,
//! assembled into a ready-to-solve [`Space`].
//!
//! The `!=`-with-offset constraint lowers to a pair of instantiation-based
//! removal operators by default; under [`BuildOptions::complete`] a full
//! hyper-arc table operator is attached as well (and the triggers widen
//! from `instantiated` to `domain_changed`, since the table rule profits
//! from every narrowing, not just pinning). Table constraints always get
//! hyper-arc revision. The choice of propagation scheme is pure wiring —
//! the same components are connected either constraint-oriented (events
//! re-queue the constraint) or variable-oriented (events re-queue the
//! variable, whose item invokes its watchers).

use std::collections::HashMap;

use super::ast::{ConstraintDecl, Model};
use super::ModelError;
use crate::constraint::{alldiff_instantiation, diff3, Cno, Constraint, NotifyMode, Relation};
use crate::error::Error;
use crate::events::{Bus, VarId};
use crate::scheduler::{PopPolicy, Scheduler, Stats};
use crate::search::RoundRobinEnumerator;
use crate::variable::{IntegralVariable, Variable};
use crate::{Result, Value};

/// Which propagation scheme the scheduler is wired for.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Scheme {
    Constraint,
    Variable,
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub scheme: Scheme,
    /// Attach a complete hyper-arc table operator to every `!=` constraint
    /// in addition to the instantiation rules.
    pub complete: bool,
    pub policy: PopPolicy,
    /// Tuple cap for table expansion under `complete`.
    pub table_cap: u64,
}

impl Default for BuildOptions {
    fn default() -> BuildOptions {
        BuildOptions {
            scheme: Scheme::Constraint,
            complete: false,
            policy: PopPolicy::Fifo,
            table_cap: 1_000_000,
        }
    }
}

/// A fully wired solver instance.
pub struct Space {
    pub bus: Bus,
    pub variables: Vec<IntegralVariable>,
    pub constraints: Vec<Constraint>,
    pub scheduler: Scheduler,
    pub enumerator: RoundRobinEnumerator,
}

impl Space {
    /// Initial propagation: drives the posted constraints to a fixpoint.
    /// Must run (and return `true`) before the first search step.
    pub fn propagate(&mut self) -> Result<bool> {
        self.scheduler.run(&mut self.bus)
    }

    pub fn first_solution(&mut self) -> Result<bool> {
        self.enumerator.first_solution(&mut self.bus)
    }

    pub fn next_solution(&mut self) -> Result<bool> {
        self.enumerator.next_solution(&mut self.bus)
    }

    pub fn assignment(&self) -> Result<Vec<(String, Value)>> {
        self.enumerator.assignment()
    }

    pub fn solve_all(&mut self) -> Result<Vec<Vec<(String, Value)>>> {
        self.enumerator.solve_all(&mut self.bus)
    }

    pub fn count_solutions(&mut self) -> Result<u64> {
        self.enumerator.count_solutions(&mut self.bus)
    }

    pub fn stats(&self) -> Stats {
        self.scheduler.stats()
    }

    /// The current box, in declaration order.
    pub fn domains(&self) -> Vec<crate::Domain> {
        self.variables.iter().map(|v| v.domain()).collect()
    }
}

struct Assembly {
    bus: Bus,
    variables: Vec<IntegralVariable>,
    constraints: Vec<Constraint>,
    scheduler: Scheduler,
    scheme: Scheme,
}

impl Assembly {
    fn start(names_domains: Vec<(String, crate::Domain)>, opts: &BuildOptions) -> Result<Assembly> {
        let mut bus = Bus::new();
        let variables: Vec<IntegralVariable> = names_domains
            .into_iter()
            .enumerate()
            .map(|(i, (name, d))| IntegralVariable::new(&mut bus, VarId(i), &name, d))
            .collect();
        let scheduler = Scheduler::new(&mut bus, "scheduler", opts.policy);
        for v in &variables {
            scheduler.watch_variable(&mut bus, v)?;
        }
        if opts.scheme == Scheme::Variable {
            let refs: Vec<&Variable> = variables.iter().map(|v| &**v).collect();
            scheduler.variable_scheme_adapter(&mut bus, &refs)?;
        }
        Ok(Assembly { bus, variables, constraints: Vec::new(), scheduler, scheme: opts.scheme })
    }

    fn post(&mut self, c: Constraint) -> Result<()> {
        match self.scheme {
            Scheme::Constraint => {
                self.scheduler.post(&mut self.bus, &c)?;
            }
            Scheme::Variable => self.scheduler.post_watching(&c)?,
        }
        self.constraints.push(c);
        Ok(())
    }

    fn finish(mut self) -> Result<Space> {
        let refs: Vec<&Variable> = self.variables.iter().map(|v| &**v).collect();
        let enumerator = RoundRobinEnumerator::new(&mut self.bus, "enumerator", &refs, &self.scheduler)?;
        Ok(Space {
            bus: self.bus,
            variables: self.variables,
            constraints: self.constraints,
            scheduler: self.scheduler,
            enumerator,
        })
    }
}

/// Instantiates a validated model as a [`Space`].
pub fn build(model: &Model, opts: &BuildOptions) -> std::result::Result<Space, ModelError> {
    let decls: Vec<(String, crate::Domain)> =
        model.variables().map(|v| (v.name.text.clone(), v.domain.eval())).collect();
    let index: HashMap<String, usize> =
        decls.iter().enumerate().map(|(i, (n, _))| (n.clone(), i)).collect();
    let mut asm = Assembly::start(decls, opts)?;

    for (k, decl) in model.constraints().enumerate() {
        let name = format!("c{}", k + 1);
        match decl {
            ConstraintDecl::Diff { x, y, offset } => {
                let xi = index[&x.text];
                let yi = index[&y.text];
                if xi == yi {
                    if *offset != 0 {
                        // x != x + c with c != 0 always holds; nothing to do.
                        continue;
                    }
                    // x != x can never hold: a one-column table with no
                    // tuples empties the variable on first invocation.
                    let vx = &asm.variables[xi];
                    let c = Constraint::new(&mut asm.bus, &name, &[vx], NotifyMode::Deferred)?;
                    c.attach_cno(
                        &mut asm.bus,
                        &Cno::hyperarc("never", vec![vx.id()], Relation::extensional(1, [])?),
                    )?;
                    asm.post(c)?;
                    continue;
                }

                let (vx, vy) = (asm.variables[xi].clone(), asm.variables[yi].clone());
                let c = Constraint::new(&mut asm.bus, &name, &[&vx, &vy], NotifyMode::Deferred)?;
                // x != y + offset: pinning y at d forbids d + offset for x;
                // pinning x at d forbids d − offset for y.
                let mirrored = offset.checked_neg().expect("the parser rejects an offset of -2^63");
                c.attach_cno(
                    &mut asm.bus,
                    &Cno::neq_offset(&format!("prune_{}", vx.name()), vy.id(), vx.id(), *offset),
                )?;
                c.attach_cno(
                    &mut asm.bus,
                    &Cno::neq_offset(&format!("prune_{}", vy.name()), vx.id(), vy.id(), mirrored),
                )?;
                if opts.complete {
                    let c0 = *offset;
                    let rel = Relation::from_predicate(
                        &[vx.domain(), vy.domain()],
                        |t| i128::from(t[0]) != i128::from(t[1]) + i128::from(c0),
                        opts.table_cap,
                    )
                    .map_err(|e| capacity(&name, e))?;
                    c.attach_cno(&mut asm.bus, &Cno::hyperarc("table", vec![vx.id(), vy.id()], rel))?;
                    c.watch(&mut asm.bus, vx.domain_changed())?;
                    c.watch(&mut asm.bus, vy.domain_changed())?;
                } else {
                    c.watch(&mut asm.bus, vx.instantiated())?;
                    c.watch(&mut asm.bus, vy.instantiated())?;
                }
                asm.post(c)?;
            }
            ConstraintDecl::AllDiff { vars, .. } => {
                let scope: Vec<IntegralVariable> =
                    vars.iter().map(|v| asm.variables[index[&v.text]].clone()).collect();
                let refs: Vec<&IntegralVariable> = scope.iter().collect();
                let c = alldiff_instantiation(&mut asm.bus, &name, &refs)?;
                asm.post(c)?;
            }
            ConstraintDecl::Table { vars, tuples, .. } => {
                let scope: Vec<IntegralVariable> =
                    vars.iter().map(|v| asm.variables[index[&v.text]].clone()).collect();
                let refs: Vec<&Variable> = scope.iter().map(|v| &**v).collect();
                let ids: Vec<VarId> = scope.iter().map(|v| v.id()).collect();
                let rel = Relation::extensional(vars.len(), tuples.iter().map(|t| t.values.clone()))?;
                let c = Constraint::new(&mut asm.bus, &name, &refs, NotifyMode::Deferred)?;
                c.attach_cno(&mut asm.bus, &Cno::hyperarc("table", ids, rel))?;
                for v in &scope {
                    c.watch(&mut asm.bus, v.domain_changed())?;
                }
                asm.post(c)?;
            }
        }
    }
    Ok(asm.finish()?)
}

fn capacity(name: &str, e: Error) -> ModelError {
    match e {
        Error::Capacity { need, cap } => ModelError::Capacity { name: name.to_string(), need, cap },
        other => ModelError::Engine(other),
    }
}

/// Builds the classic n-queens model programmatically: one variable per
/// row over `1..=n`, one immediate-mode [`diff3`] constraint per row pair
/// with the row gap as offset. Under [`BuildOptions::complete`] each pair
/// also gets the full hyper-arc table.
pub fn nqueens(n: usize, opts: &BuildOptions) -> Result<Space> {
    assert!(n >= 1, "n-queens needs at least one queen");
    let decls: Vec<(String, crate::Domain)> = (1..=n)
        .map(|i| (format!("q{i}"), crate::FiniteDomain::interval(1, n as Value)))
        .collect();
    let mut asm = Assembly::start(decls, opts)?;

    for i in 0..n {
        for j in i + 1..n {
            let gap = (j - i) as Value;
            let (vi, vj) = (asm.variables[i].clone(), asm.variables[j].clone());
            let c = diff3(&mut asm.bus, &format!("d{}_{}", i + 1, j + 1), &vi, &vj, gap)?;
            asm.post(c)?;
            if opts.complete {
                // The hyper-arc rule may narrow the very variable whose
                // event triggered it, so it cannot run inline from that
                // event's dispatch; it gets its own deferred constraint.
                let rel = Relation::from_predicate(
                    &[vi.domain(), vj.domain()],
                    |t| t[0] != t[1] && (t[0] - t[1]).abs() != gap,
                    opts.table_cap,
                )?;
                let t = Constraint::new(
                    &mut asm.bus,
                    &format!("t{}_{}", i + 1, j + 1),
                    &[&vi, &vj],
                    NotifyMode::Deferred,
                )?;
                t.attach_cno(&mut asm.bus, &Cno::hyperarc("table", vec![vi.id(), vj.id()], rel))?;
                t.watch(&mut asm.bus, vi.domain_changed())?;
                t.watch(&mut asm.bus, vj.domain_changed())?;
                asm.post(t)?;
            }
        }
    }
    asm.finish()
}
