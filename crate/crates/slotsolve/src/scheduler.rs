//! The propagation-set scheduler: the fixpoint loop every solve runs on.
//!
//! A [`Scheduler`] keeps a queue of schedulable items (the propagation set)
//! plus a membership set so an item is queued at most once.
//! [`run`](Scheduler::run) pops items one at a time and invokes them until the set
//! drains (fixpoint, `true`) or a failure is observed (`false`). Failure
//! means either an invocation returned false or the scheduler's watch slot
//! saw a variable announce an empty domain — both are the same "no values
//! left" condition.
//!
//! Two propagation schemes share this machinery, selected by how things are
//! posted:
//!
//! * constraint-oriented — [`post`](Scheduler::post) registers a constraint
//!   as an item; its `ask_for_reinvocation` port is wired to a per-item
//!   request slot, so watched variable events re-queue the constraint.
//! * variable-oriented —
//!   [`variable_scheme_adapter`](Scheduler::variable_scheme_adapter)
//!   registers each *variable* as the
//!   schedulable item; a domain change queues the variable, and popping it
//!   invokes every constraint watching it (see
//!   [`post_watching`](Scheduler::post_watching)).
//!
//! For contracting, monotone operators the two schemes — and any pop order —
//! reach the same fixpoint, which is what makes [`PopPolicy`] a free choice.
//! An item popped before its invocation may be re-queued by its own effects
//! and will then run again.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet, VecDeque};
use std::rc::Rc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::constraint::{Constraint, ConstraintCore};
use crate::error::{Error, Result};
use crate::events::{Bus, MessageKind, Payload, PortId, VarId};
use crate::variable::Variable;

/// Handle to an item registered with a scheduler.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ItemId(usize);

/// How [`run`](Scheduler::run) chooses the next item from the propagation
/// set. The shipped narrowing operators are monotone, so every policy ends
/// in the same fixpoint; the default mirrors a plain FIFO store.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PopPolicy {
    Fifo,
    Lifo,
    /// Uniformly random pops from a seeded generator (deterministic per seed).
    Random(u64),
}

/// Work counters for the CLI's `--stats`: queue pops, constraint
/// invocations, and prunings (domain-change announcements the scheduler's
/// watch slot observed, enumerator assignments included).
#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
pub struct Stats {
    pub pops: u64,
    pub invocations: u64,
    pub prunings: u64,
}

type CustomItem = Rc<dyn Fn(&mut Bus) -> Result<bool>>;

#[derive(Clone)]
enum ItemKind {
    Constraint(Rc<ConstraintCore>),
    Variable { watching: Rc<RefCell<Vec<Rc<ConstraintCore>>>> },
    Custom(CustomItem),
}

struct ItemEntry {
    name: String,
    kind: ItemKind,
}

struct SchedState {
    items: Vec<ItemEntry>,
    queue: VecDeque<usize>,
    queued: HashSet<usize>,
    var_items: HashMap<VarId, usize>,
    watched: HashSet<VarId>,
    policy: PopPolicy,
    rng: StdRng,
    failed: bool,
    running: bool,
    stats: Stats,
}

impl SchedState {
    fn enqueue(&mut self, id: usize) {
        if self.queued.insert(id) {
            self.queue.push_back(id);
        }
    }

    fn pop(&mut self) -> Option<usize> {
        let id = match self.policy {
            PopPolicy::Fifo => self.queue.pop_front()?,
            PopPolicy::Lifo => self.queue.pop_back()?,
            PopPolicy::Random(_) => {
                if self.queue.is_empty() {
                    return None;
                }
                let k = self.rng.random_range(0..self.queue.len());
                self.queue.remove(k)?
            }
        };
        self.queued.remove(&id);
        Some(id)
    }
}

/// A scheduler component. Cloning yields another handle to the same
/// scheduler (the state is shared with the bus-side slots).
#[derive(Clone)]
pub struct Scheduler {
    name: String,
    watch: PortId,
    state: Rc<RefCell<SchedState>>,
}

impl Scheduler {
    pub fn new(bus: &mut Bus, name: &str, policy: PopPolicy) -> Scheduler {
        let seed = match policy {
            PopPolicy::Random(seed) => seed,
            _ => 0,
        };
        let state = Rc::new(RefCell::new(SchedState {
            items: Vec::new(),
            queue: VecDeque::new(),
            queued: HashSet::new(),
            var_items: HashMap::new(),
            watched: HashSet::new(),
            policy,
            rng: StdRng::seed_from_u64(seed),
            failed: false,
            running: false,
            stats: Stats::default(),
        }));

        // The failure sentinel: every watched variable's domain_changed
        // lands here, so an empty domain is noticed no matter who caused it
        // (a scheduled invocation, an immediate-mode cascade, the
        // enumerator). Doubles as the pruning counter.
        let st = state.clone();
        let watch = bus.add_input(name, "watch", MessageKind::Domain, move |_, p| {
            let Payload::Domain(_, d) = p else { unreachable!("watch is a domain slot") };
            let mut st = st.borrow_mut();
            st.stats.prunings += 1;
            if d.is_empty() {
                st.failed = true;
            }
            Ok(())
        });

        Scheduler { name: name.to_string(), watch, state }
    }

    /// Routes `v`'s domain announcements into the failure sentinel. Safe to
    /// call once per variable; repeated calls are ignored.
    pub fn watch_variable(&self, bus: &mut Bus, v: &Variable) -> Result<()> {
        if !self.state.borrow_mut().watched.insert(v.id()) {
            return Ok(());
        }
        bus.connect(v.domain_changed(), self.watch)?;
        Ok(())
    }

    fn register(&self, name: &str, kind: ItemKind) -> usize {
        let mut st = self.state.borrow_mut();
        let id = st.items.len();
        st.items.push(ItemEntry { name: name.to_string(), kind });
        id
    }

    /// Posts a constraint under the constraint-oriented scheme: registers
    /// it as a schedulable item, wires its `ask_for_reinvocation` output to
    /// a fresh request slot, and seeds the propagation set with it.
    pub fn post(&self, bus: &mut Bus, c: &Constraint) -> Result<ItemId> {
        {
            let st = self.state.borrow();
            for entry in &st.items {
                if let ItemKind::Constraint(core) = &entry.kind {
                    if Rc::ptr_eq(core, c.core()) {
                        return Err(Error::DuplicatePost(c.name().to_string()));
                    }
                }
            }
        }
        let id = self.register(c.name(), ItemKind::Constraint(c.core().clone()));

        let st = self.state.clone();
        let request =
            bus.add_input(&self.name, &format!("request_{}", c.name()), MessageKind::Signal, move |_, _| {
                st.borrow_mut().enqueue(id);
                Ok(())
            });
        bus.connect(c.ask_for_reinvocation(), request)?;

        self.state.borrow_mut().enqueue(id);
        Ok(ItemId(id))
    }

    /// Registers a custom schedulable (anything with an `invoke`-shaped
    /// closure) and seeds the set with it.
    pub fn post_custom(&self, name: &str, f: impl Fn(&mut Bus) -> Result<bool> + 'static) -> ItemId {
        let id = self.register(name, ItemKind::Custom(Rc::new(f)));
        self.state.borrow_mut().enqueue(id);
        ItemId(id)
    }

    /// The variable-oriented scheme's item set: each variable becomes a
    /// schedulable whose invocation runs every constraint watching it, and
    /// the variable's own domain changes queue the variable itself.
    /// Constraints join the watching lists via
    /// [`post_watching`](Scheduler::post_watching).
    pub fn variable_scheme_adapter(&self, bus: &mut Bus, vars: &[&Variable]) -> Result<Vec<ItemId>> {
        let mut ids = Vec::with_capacity(vars.len());
        for v in vars {
            if let Some(&id) = self.state.borrow().var_items.get(&v.id()) {
                ids.push(ItemId(id));
                continue;
            }
            let watching = Rc::new(RefCell::new(Vec::new()));
            let id = self.register(v.name(), ItemKind::Variable { watching });
            self.state.borrow_mut().var_items.insert(v.id(), id);

            let st = self.state.clone();
            let notify =
                bus.add_input(&self.name, &format!("notify_{}", v.name()), MessageKind::Domain, move |_, _| {
                    st.borrow_mut().enqueue(id);
                    Ok(())
                });
            bus.connect(v.domain_changed(), notify)?;
            ids.push(ItemId(id));
        }
        Ok(ids)
    }

    /// Posts a constraint under the variable-oriented scheme: appends it to
    /// the watching list of each scope variable's item (the variables must
    /// have gone through
    /// [`variable_scheme_adapter`](Scheduler::variable_scheme_adapter)
    /// first) and seeds the set with
    /// those items so the constraint participates in initial propagation.
    pub fn post_watching(&self, c: &Constraint) -> Result<()> {
        let mut st = self.state.borrow_mut();
        let mut item_ids = Vec::with_capacity(c.scope().len());
        for v in c.scope() {
            let &id = st.var_items.get(v).ok_or(Error::UnknownItem)?;
            item_ids.push(id);
        }
        for &id in &item_ids {
            let ItemKind::Variable { watching } = &st.items[id].kind else {
                unreachable!("var_items maps to variable items")
            };
            if watching.borrow().iter().any(|core| Rc::ptr_eq(core, c.core())) {
                return Err(Error::DuplicatePost(c.name().to_string()));
            }
            watching.borrow_mut().push(c.core().clone());
        }
        for id in item_ids {
            st.enqueue(id);
        }
        Ok(())
    }

    /// Adds a registered item to the propagation set (idempotent while it
    /// is already queued).
    pub fn schedule(&self, item: ItemId) -> Result<()> {
        let mut st = self.state.borrow_mut();
        if item.0 >= st.items.len() {
            return Err(Error::UnknownItem);
        }
        st.enqueue(item.0);
        Ok(())
    }

    /// Items currently in the propagation set.
    pub fn active_len(&self) -> usize {
        self.state.borrow().queue.len()
    }

    pub fn stats(&self) -> Stats {
        self.state.borrow().stats
    }

    /// True once a failure has been observed and not yet consumed by a
    /// (failed) run.
    pub fn failed(&self) -> bool {
        self.state.borrow().failed
    }

    /// Drives the propagation set to quiescence. Returns `true` on a
    /// fixpoint (set drained, no failure), `false` on failure — in which
    /// case the set is cleared and the failure flag reset, so the caller
    /// can restore domains and re-seed deterministically. Note that a
    /// failure observed *before* the call (say, by an immediate-mode
    /// cascade during an enumerator assignment) also fails the run.
    pub fn run(&self, bus: &mut Bus) -> Result<bool> {
        {
            let mut st = self.state.borrow_mut();
            if st.running {
                return Err(Error::ReentrantRun);
            }
            st.running = true;
        }
        let outcome = self.drain(bus);
        let mut st = self.state.borrow_mut();
        st.running = false;
        if !matches!(outcome, Ok(true)) {
            st.queue.clear();
            st.queued.clear();
            st.failed = false;
        }
        outcome
    }

    fn drain(&self, bus: &mut Bus) -> Result<bool> {
        loop {
            let kind = {
                let mut st = self.state.borrow_mut();
                if st.failed {
                    return Ok(false);
                }
                let Some(id) = st.pop() else { return Ok(true) };
                st.stats.pops += 1;
                st.items[id].kind.clone()
            };
            let ok = match kind {
                ItemKind::Constraint(core) => {
                    self.state.borrow_mut().stats.invocations += 1;
                    core.invoke(bus)?
                }
                ItemKind::Variable { watching } => {
                    let list: Vec<Rc<ConstraintCore>> = watching.borrow().clone();
                    let mut all_ok = true;
                    for core in list {
                        self.state.borrow_mut().stats.invocations += 1;
                        if !core.invoke(bus)? {
                            all_ok = false;
                            break;
                        }
                    }
                    all_ok
                }
                ItemKind::Custom(f) => f(bus)?,
            };
            if !ok {
                self.state.borrow_mut().failed = true;
            }
        }
    }

    /// The name of a registered item, for diagnostics.
    pub fn item_name(&self, item: ItemId) -> Option<String> {
        self.state.borrow().items.get(item.0).map(|e| e.name.clone())
    }
}
