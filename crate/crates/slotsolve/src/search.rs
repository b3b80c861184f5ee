//! Depth-first search: interleaves value assignment with propagation and
//! streams solutions one at a time.
//!
//! The two halves are a [`TrailStack`] — the backtrack memory, fed by the
//! variables' `trailing` ports, restoring through the silent `reinit_domain`
//! path — and a [`RoundRobinEnumerator`] that picks the next uninstantiated
//! variable cyclically, tries its values in ascending order through the
//! `get_domain` slot, and runs the scheduler after each assignment. A failed
//! run pops the trail back to the last choice point and tries the next
//! value; exhausting a variable's values backtracks across variables.
//!
//! The search loop is iterative (an explicit frame stack), so problem size
//! is never bounded by recursion depth, and it is resumable: after a
//! solution, [`next_solution`](RoundRobinEnumerator::next_solution) revises
//! the deepest choice and carries on from there.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::events::{Bus, MessageKind, Payload, PortId, VarId};
use crate::scheduler::Scheduler;
use crate::variable::Variable;
use crate::{Domain, FiniteDomain, Value};

#[derive(Default)]
struct TrailInner {
    frames: Vec<(VarId, Domain)>,
    marks: Vec<usize>,
}

/// The backtrack stack: saved domains (frames) grouped into choice points
/// (marks). Cloning yields another handle to the same trail, which is how
/// the bus-side recording slot and the enumerator share it.
#[derive(Clone, Default)]
pub struct TrailStack {
    inner: Rc<RefCell<TrailInner>>,
}

impl TrailStack {
    pub fn new() -> TrailStack {
        TrailStack::default()
    }

    /// Opens a choice point: everything recorded from here on is undone by
    /// the matching [`pop_to_mark`](TrailStack::pop_to_mark).
    pub fn mark(&self) {
        let mut t = self.inner.borrow_mut();
        let at = t.frames.len();
        debug_assert!(
            t.marks.last().is_none_or(|&m| m < at),
            "marks must be strictly increasing — no empty choice points"
        );
        t.marks.push(at);
    }

    /// Records `saved` as `id`'s pre-mutation domain. Outside any choice
    /// point nothing is recorded (there is nothing to restore to), and
    /// within one choice point only a variable's *first* mutation is kept —
    /// that frame already holds the domain as of the mark.
    pub fn record(&self, id: VarId, saved: Domain) {
        let mut t = self.inner.borrow_mut();
        let Some(&m) = t.marks.last() else { return };
        if t.frames[m..].iter().any(|(v, _)| *v == id) {
            return;
        }
        t.frames.push((id, saved));
    }

    /// Closes the top choice point, returning its frames most recent first
    /// — restoration must run in reverse push order. Empty when no choice
    /// point is open.
    pub fn pop_to_mark(&self) -> Vec<(VarId, Domain)> {
        let mut t = self.inner.borrow_mut();
        let Some(m) = t.marks.pop() else { return Vec::new() };
        let mut undo: Vec<_> = t.frames.drain(m..).collect();
        undo.reverse();
        undo
    }

    /// Open choice points.
    pub fn depth(&self) -> usize {
        self.inner.borrow().marks.len()
    }

    pub fn frame_count(&self) -> usize {
        self.inner.borrow().frames.len()
    }

    pub fn is_empty(&self) -> bool {
        let t = self.inner.borrow();
        t.frames.is_empty() && t.marks.is_empty()
    }
}

/// Where an enumerator is in its lifecycle.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SearchState {
    Idle,
    Searching,
    Exhausted,
}

/// One open branching decision: which variable, the candidate values (as of
/// frame creation, ascending), and how many have been tried.
struct Frame {
    var_idx: usize,
    values: Vec<Value>,
    next: usize,
}

enum Step {
    /// Propagation is at a fixpoint; select the next variable (or report a
    /// solution if none is left).
    Descend,
    /// The top frame must try its next value; its previous try, if any, has
    /// already been undone.
    Advance,
}

/// A depth-first enumerator branching on variables in declaration order,
/// round-robin, with values tried ascending. Assignments are emitted into
/// the variables' `get_domain` slots; every `trailing` event lands in the
/// trail for backtracking.
pub struct RoundRobinEnumerator {
    variables: Vec<Variable>,
    index: HashMap<VarId, usize>,
    assign: Vec<PortId>,
    cursor: usize,
    scheduler: Scheduler,
    trail: TrailStack,
    state: SearchState,
    stack: Vec<Frame>,
}

impl RoundRobinEnumerator {
    /// Registers the enumerator on `bus`: one `assign_<var>` output per
    /// variable wired to its `get_domain`, and a `trail` slot wired from
    /// every variable's `trailing` port.
    pub fn new(bus: &mut Bus, name: &str, vars: &[&Variable], scheduler: &Scheduler) -> Result<RoundRobinEnumerator> {
        let trail = TrailStack::new();
        let t = trail.clone();
        let record = bus.add_input(name, "trail", MessageKind::Domain, move |_, p| {
            let Payload::Domain(id, old) = p else { unreachable!("trailing is a domain port") };
            t.record(*id, old.clone());
            Ok(())
        });

        let mut variables = Vec::with_capacity(vars.len());
        let mut index = HashMap::new();
        let mut assign = Vec::with_capacity(vars.len());
        for (i, v) in vars.iter().enumerate() {
            let port = bus.add_output(name, &format!("assign_{}", v.name()), MessageKind::Domain);
            bus.connect(port, v.get_domain())?;
            bus.connect(v.trailing(), record)?;
            index.insert(v.id(), i);
            assign.push(port);
            variables.push((*v).clone());
        }

        Ok(RoundRobinEnumerator {
            variables,
            index,
            assign,
            cursor: 0,
            scheduler: scheduler.clone(),
            trail,
            state: SearchState::Idle,
            stack: Vec::new(),
        })
    }

    pub fn state(&self) -> SearchState {
        self.state
    }

    pub fn trail(&self) -> &TrailStack {
        &self.trail
    }

    /// Starts the search. The caller must already have run initial
    /// propagation successfully (a search over an inconsistent or
    /// unpropagated store is the caller's bug, not detected here).
    ///
    /// Returns `true` with every variable instantiated and propagation at a
    /// fixpoint, `false` if there is no solution.
    pub fn first_solution(&mut self, bus: &mut Bus) -> Result<bool> {
        if self.state != SearchState::Idle {
            return Err(Error::State("first_solution on an already-started search"));
        }
        self.state = SearchState::Searching;
        self.search(bus, Step::Descend)
    }

    /// Resumes after a solution, revising the deepest choice. Returns
    /// `false` once the tree is exhausted (and keeps returning `false`).
    pub fn next_solution(&mut self, bus: &mut Bus) -> Result<bool> {
        match self.state {
            SearchState::Idle => Err(Error::State("next_solution before first_solution")),
            SearchState::Exhausted => Ok(false),
            SearchState::Searching => {
                if self.stack.is_empty() {
                    // The first solution needed no branching; there is
                    // nothing to revise.
                    self.state = SearchState::Exhausted;
                    return Ok(false);
                }
                self.restore();
                self.search(bus, Step::Advance)
            }
        }
    }

    /// The current solution as ordered (name, value) pairs. Errors unless
    /// every variable is instantiated.
    pub fn assignment(&self) -> Result<Vec<(String, Value)>> {
        self.variables
            .iter()
            .map(|v| {
                let d = v.domain();
                if !d.is_singleton() {
                    return Err(Error::State("assignment read without a solution"));
                }
                Ok((v.name().to_string(), d.min().expect("singleton has a min")))
            })
            .collect()
    }

    /// Drains the remaining solutions in order. On a fresh enumerator this
    /// is the complete, duplicate-free solution list.
    pub fn solve_all(&mut self, bus: &mut Bus) -> Result<Vec<Vec<(String, Value)>>> {
        let mut out = Vec::new();
        let mut found = match self.state {
            SearchState::Idle => self.first_solution(bus)?,
            SearchState::Exhausted => false,
            SearchState::Searching => self.next_solution(bus)?,
        };
        while found {
            out.push(self.assignment()?);
            found = self.next_solution(bus)?;
        }
        Ok(out)
    }

    /// Like [`solve_all`](RoundRobinEnumerator::solve_all) without keeping
    /// the assignments.
    pub fn count_solutions(&mut self, bus: &mut Bus) -> Result<u64> {
        let mut n = 0;
        let mut found = match self.state {
            SearchState::Idle => self.first_solution(bus)?,
            SearchState::Exhausted => false,
            SearchState::Searching => self.next_solution(bus)?,
        };
        while found {
            n += 1;
            found = self.next_solution(bus)?;
        }
        Ok(n)
    }

    /// The iterative depth-first loop. Leaves on `Ok(true)` with the stack
    /// describing the solution's open choices (so the next call can revise
    /// them) and on `Ok(false)` with the stack empty, the trail balanced,
    /// and every domain back to its post-initial-propagation state.
    fn search(&mut self, bus: &mut Bus, mut step: Step) -> Result<bool> {
        loop {
            match step {
                Step::Descend => match self.select() {
                    None => return Ok(true),
                    Some(idx) => {
                        let values: Vec<Value> = self.variables[idx].domain().iter().collect();
                        self.stack.push(Frame { var_idx: idx, values, next: 0 });
                        self.cursor = (idx + 1) % self.variables.len();
                        step = Step::Advance;
                    }
                },
                Step::Advance => {
                    let Some(frame) = self.stack.last_mut() else {
                        self.state = SearchState::Exhausted;
                        return Ok(false);
                    };
                    if frame.next == frame.values.len() {
                        // This variable is out of values: discard its frame
                        // and undo the parent's current try so the parent
                        // can advance. The root frame has no parent and its
                        // tries are already undone — the trail is balanced.
                        self.stack.pop();
                        if let Some(parent) = self.stack.last() {
                            self.cursor = (parent.var_idx + 1) % self.variables.len();
                            self.restore();
                        }
                    } else {
                        let value = frame.values[frame.next];
                        frame.next += 1;
                        let idx = frame.var_idx;
                        self.trail.mark();
                        let var = &self.variables[idx];
                        bus.emit(self.assign[idx], Payload::Domain(var.id(), FiniteDomain::singleton(value)))?;
                        if self.scheduler.run(bus)? {
                            step = Step::Descend;
                        } else {
                            self.restore();
                        }
                    }
                }
            }
        }
    }

    /// Next uninstantiated variable from the cursor, cyclically.
    fn select(&self) -> Option<usize> {
        let n = self.variables.len();
        (0..n).map(|k| (self.cursor + k) % n).find(|&i| !self.variables[i].domain().is_singleton())
    }

    /// Undoes the top choice point through the variables' silent restore
    /// path, in reverse push order.
    fn restore(&self) {
        for (id, saved) in self.trail.pop_to_mark() {
            self.variables[self.index[&id]].reinit(saved);
        }
    }
}
