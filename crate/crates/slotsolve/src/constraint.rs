//! Constraint components and the narrowing operators they drive.
//!
//! A [`Constraint`] owns no domains. It knows its scope, holds a pair of
//! ports per scope variable (a sharing port to pull the current domain, a
//! send port wired to the variable's `get_domain`), a marshalled output
//! channel where narrowing operators ([`Cno`]) are attached as pipeline
//! stages, and an `ask_for_reinvocation` output for deferring work to a
//! scheduler. [`invoke`](ConstraintCore::invoke) is the whole story: pull
//! the scope's domains, run them through the CNO pipeline, push back
//! whatever narrowed, report failure.
//!
//! Narrowing operators are pure `DomainMessage -> DomainMessage` functions
//! and must be contracting (never widen), correct (never lose a tuple of
//! the constraint's relation), and monotone — that is what makes the
//! propagation fixpoint independent of scheduling order.
//!
//! Notification is deferred by default: a watched variable event makes the
//! constraint ask its scheduler for reinvocation. A constraint built in
//! immediate mode instead invokes right inside the variable's dispatch,
//! which is how the n-queens [`diff3`] pruning runs.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ops::Deref;
use std::rc::Rc;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::events::{Bus, Connection, ConnectionId, DomainMessage, MessageKind, Payload, PortId, TransformFn, VarId};
use crate::variable::Variable;
use crate::{Domain, FiniteDomain, Value};

/// A relation ρ over tuples of integers, stored extensionally. Tuples are
/// kept sorted and deduplicated, so equal relations compare equal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Relation {
    arity: usize,
    tuples: Vec<Vec<Value>>,
}

impl Relation {
    /// Builds a relation from explicit tuples, all of the given arity.
    pub fn extensional(arity: usize, tuples: impl IntoIterator<Item = Vec<Value>>) -> Result<Relation> {
        let mut tuples: Vec<Vec<Value>> = tuples.into_iter().collect();
        for t in &tuples {
            if t.len() != arity {
                return Err(Error::Arity { expected: arity, got: t.len() });
            }
        }
        tuples.sort_unstable();
        tuples.dedup();
        Ok(Relation { arity, tuples })
    }

    /// Materializes a predicate over the box `domains` into tuples. The box
    /// size (product of domain sizes) must stay within `cap`: intensional
    /// relations are a small-domain convenience, not a bulk encoding.
    pub fn from_predicate(domains: &[Domain], pred: impl Fn(&[Value]) -> bool, cap: u64) -> Result<Relation> {
        let need: u128 = domains.iter().map(|d| u128::from(d.size())).product();
        if need > u128::from(cap) {
            return Err(Error::Capacity { need, cap: u128::from(cap) });
        }
        let tuples = domains
            .iter()
            .map(|d| d.iter().collect::<Vec<_>>())
            .multi_cartesian_product()
            .filter(|t| pred(t));
        Relation::extensional(domains.len(), tuples)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &[Vec<Value>] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &[Value]) -> bool {
        self.tuples.binary_search_by(|probe| probe.as_slice().cmp(t)).is_ok()
    }
}

/// Hyper-arc revision: each output domain keeps exactly the values that
/// still have a supporting tuple, `D_i' = { a ∈ D_i | ∃ t ∈ rel ∩ (D_1 ×
/// … × D_n), t_i = a }`. The failure flag is set iff some output is empty.
/// Idempotent, and exact: one application reaches the per-constraint
/// fixpoint.
pub fn hyperarc_revise(rel: &Relation, msg: DomainMessage) -> DomainMessage {
    assert_eq!(rel.arity, msg.domains.len(), "relation arity must match message width");
    let mut support: Vec<BTreeSet<Value>> = vec![BTreeSet::new(); rel.arity];
    for t in &rel.tuples {
        if t.iter().zip(&msg.domains).all(|(v, (_, d))| d.contains(*v)) {
            for (i, v) in t.iter().enumerate() {
                support[i].insert(*v);
            }
        }
    }
    let mut out = msg;
    for (i, vals) in support.into_iter().enumerate() {
        let v = out.domains[i].0;
        out.set_domain(v, FiniteDomain::from_values(vals));
    }
    out
}

/// The instantiation removal rule: once the watched variable is pinned to
/// `d`, the values `d`, `d + cst`, and `d − cst` cannot appear in `dx`.
/// Offsets that overflow the scalar can't be members of any domain and are
/// simply skipped.
pub fn out_of(d: Value, cst: Value, dx: &Domain) -> Domain {
    let mut cut = vec![d];
    if let Some(v) = d.checked_add(cst) {
        cut.push(v);
    }
    if let Some(v) = d.checked_sub(cst) {
        cut.push(v);
    }
    dx.remove_all(cut)
}

/// A narrowing operator: a name (for traces), the sub-scope it operates
/// on, and the narrowing function itself. Attach it to a [`Constraint`]
/// whose scope covers the sub-scope.
#[derive(Clone)]
pub struct Cno {
    name: String,
    scope: Vec<VarId>,
    func: Rc<TransformFn>,
}

/// Shared entry guard for the closed-form rules: a box with an empty
/// component denotes no tuples at all, so the rule raises the failure flag
/// and leaves the box alone rather than pruning a lost cause.
fn failed_box(msg: &mut DomainMessage) -> bool {
    if msg.any_empty() {
        msg.failure = true;
        return true;
    }
    false
}

fn pinned_value(msg: &DomainMessage, v: VarId) -> Option<Value> {
    let d = msg.domain_of(v).expect("cno sub-scope is part of the constraint scope");
    d.is_singleton().then(|| d.min().expect("singleton has a bound"))
}

impl Cno {
    /// Wraps an arbitrary narrowing function. The function must be
    /// contracting, correct, and monotone; nothing checks that at run time.
    pub fn from_fn(
        name: &str,
        scope: Vec<VarId>,
        f: impl Fn(DomainMessage) -> DomainMessage + 'static,
    ) -> Cno {
        Cno { name: name.to_string(), scope, func: Rc::new(f) }
    }

    /// Hyper-arc revision over an extensional relation, applied to the
    /// message entries for `scope` (in that order).
    pub fn hyperarc(name: &str, scope: Vec<VarId>, rel: Relation) -> Cno {
        assert_eq!(rel.arity(), scope.len(), "relation arity must match the sub-scope");
        let captured = scope.clone();
        Cno::from_fn(name, scope, move |mut msg| {
            let sub = DomainMessage {
                domains: captured
                    .iter()
                    .map(|&v| (v, msg.domain_of(v).expect("cno sub-scope is part of the constraint scope").clone()))
                    .collect(),
                failure: msg.failure,
            };
            let revised = hyperarc_revise(&rel, sub);
            msg.failure |= revised.failure;
            for (v, d) in revised.domains {
                msg.set_domain(v, d);
            }
            msg
        })
    }

    /// The [`out_of`] rule as an operator: when `watch` is instantiated to
    /// `d`, remove `d`, `d + cst`, `d − cst` from `target`.
    pub fn out_of(name: &str, watch: VarId, target: VarId, cst: Value) -> Cno {
        Cno::from_fn(name, vec![watch, target], move |mut msg| {
            if failed_box(&mut msg) {
                return msg;
            }
            if let Some(d) = pinned_value(&msg, watch) {
                let dx = msg.domain_of(target).expect("cno sub-scope is part of the constraint scope");
                let narrowed = out_of(d, cst, dx);
                if &narrowed != dx {
                    msg.set_domain(target, narrowed);
                }
            }
            msg
        })
    }

    /// Single-offset disequality: once `watch` is pinned to `d`, the value
    /// `d + offset` is impossible for `target`. Two of these (with mirrored
    /// offsets) enforce `x ≠ y + c` by instantiation.
    pub fn neq_offset(name: &str, watch: VarId, target: VarId, offset: Value) -> Cno {
        Cno::from_fn(name, vec![watch, target], move |mut msg| {
            if failed_box(&mut msg) {
                return msg;
            }
            if let Some(d) = pinned_value(&msg, watch) {
                if let Some(v) = d.checked_add(offset) {
                    let dx = msg.domain_of(target).expect("cno sub-scope is part of the constraint scope");
                    if dx.contains(v) {
                        let narrowed = dx.remove(v);
                        msg.set_domain(target, narrowed);
                    }
                }
            }
            msg
        })
    }

    /// Instantiation-based alldiff pruning: every pinned value is removed
    /// from every other variable in scope. Deliberately weak — it does no
    /// matching-based filtering, so e.g. three variables over `{1,2}` pass
    /// propagation and only die under search.
    pub fn alldiff(name: &str, scope: Vec<VarId>) -> Cno {
        let captured = scope.clone();
        Cno::from_fn(name, scope, move |mut msg| {
            if failed_box(&mut msg) {
                return msg;
            }
            let pinned: Vec<(VarId, Value)> =
                captured.iter().filter_map(|&v| pinned_value(&msg, v).map(|d| (v, d))).collect();
            if pinned.is_empty() {
                return msg;
            }
            for &u in &captured {
                let cut: Vec<Value> =
                    pinned.iter().filter(|&&(w, _)| w != u).map(|&(_, val)| val).collect();
                if cut.is_empty() {
                    continue;
                }
                let d = msg.domain_of(u).expect("cno sub-scope is part of the constraint scope");
                let narrowed = d.remove_all(cut);
                if &narrowed != d {
                    msg.set_domain(u, narrowed);
                }
            }
            msg
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    /// Applies the narrowing function directly, no bus involved — handy for
    /// testing an operator against its contract.
    pub fn run(&self, msg: DomainMessage) -> DomainMessage {
        (self.func)(msg)
    }
}

/// When a watched variable event arrives: hand the work to the scheduler,
/// or do it right now inside the variable's dispatch.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NotifyMode {
    Deferred,
    Immediate,
}

struct AttachedCno {
    ident: Rc<TransformFn>,
    conn: ConnectionId,
}

/// The constraint's shared state; schedulers hold an `Rc` of this and call
/// [`invoke`](ConstraintCore::invoke) on it.
pub struct ConstraintCore {
    name: String,
    scope: Vec<VarId>,
    ask_ports: Vec<PortId>,
    send_ports: Vec<PortId>,
    cno_channel: PortId,
    ask_reinvoke: PortId,
    mode: NotifyMode,
    attached: RefCell<Vec<AttachedCno>>,
}

impl ConstraintCore {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    pub fn mode(&self) -> NotifyMode {
        self.mode
    }

    /// Output port announcing "schedule me again"; schedulers connect their
    /// per-item request slot here when the constraint is posted.
    pub fn ask_for_reinvocation(&self) -> PortId {
        self.ask_reinvoke
    }

    /// One propagation step: pull every scope domain through the sharing
    /// ports, run the CNO pipeline over the bundle, push each narrowed
    /// domain back through the owning variable's `get_domain`, and return
    /// `false` iff the pipeline raised failure or produced an empty domain.
    /// At a fixpoint this pushes nothing and returns `true`.
    pub fn invoke(&self, bus: &mut Bus) -> Result<bool> {
        let mut domains = Vec::with_capacity(self.scope.len());
        for (k, &v) in self.scope.iter().enumerate() {
            let Payload::Domain(id, d) = bus.share(self.ask_ports[k])? else {
                unreachable!("sharing ports carry domain payloads")
            };
            debug_assert_eq!(id, v, "sharing port wired to the wrong variable");
            domains.push((v, d));
        }
        let before = domains.clone();
        let result = bus.emit_marshalled(self.cno_channel, DomainMessage::new(domains))?;

        let ok = !result.failure && !result.any_empty();
        for (k, (v, old)) in before.iter().enumerate() {
            match result.domain_of(*v) {
                Some(new) if new != old => {
                    bus.emit(self.send_ports[k], Payload::Domain(*v, new.clone()))?;
                }
                _ => {}
            }
        }
        Ok(ok)
    }

    /// Reaction to a watched variable event. Deferred: ask the scheduler.
    /// Immediate: invoke here and now — and if that fails, still ping the
    /// scheduler so the failure is noticed even by pipelines that raise the
    /// flag without writing an empty domain anywhere.
    pub fn on_notified(&self, bus: &mut Bus) -> Result<()> {
        match self.mode {
            NotifyMode::Deferred => bus.emit(self.ask_reinvoke, Payload::Signal(0)),
            NotifyMode::Immediate => {
                if !self.invoke(bus)? {
                    bus.emit(self.ask_reinvoke, Payload::Signal(0))?;
                }
                Ok(())
            }
        }
    }
}

/// A constraint component registered on a bus.
pub struct Constraint {
    core: Rc<ConstraintCore>,
}

impl Deref for Constraint {
    type Target = ConstraintCore;

    fn deref(&self) -> &ConstraintCore {
        &self.core
    }
}

impl Constraint {
    /// Registers a constraint over `vars` (the scope, in order), wiring a
    /// sharing/send port pair to each variable. No CNOs are attached and no
    /// events are watched yet.
    pub fn new(bus: &mut Bus, name: &str, vars: &[&Variable], mode: NotifyMode) -> Result<Constraint> {
        assert!(!vars.is_empty(), "a constraint needs a non-empty scope");
        let mut scope = Vec::with_capacity(vars.len());
        let mut ask_ports = Vec::with_capacity(vars.len());
        let mut send_ports = Vec::with_capacity(vars.len());
        for v in vars {
            let ask = bus.add_share_output(name, &format!("ask_{}", v.name()), MessageKind::Domain);
            let send = bus.add_output(name, &format!("send_{}", v.name()), MessageKind::Domain);
            bus.connect(ask, v.sharing_domain())?;
            bus.connect(send, v.get_domain())?;
            scope.push(v.id());
            ask_ports.push(ask);
            send_ports.push(send);
        }
        let cno_channel = bus.add_marshalled_output(name, "cnos");
        let ask_reinvoke = bus.add_output(name, "ask_for_reinvocation", MessageKind::Signal);
        Ok(Constraint {
            core: Rc::new(ConstraintCore {
                name: name.to_string(),
                scope,
                ask_ports,
                send_ports,
                cno_channel,
                ask_reinvoke,
                mode,
                attached: RefCell::new(Vec::new()),
            }),
        })
    }

    /// The shared core, for schedulers.
    pub fn core(&self) -> &Rc<ConstraintCore> {
        &self.core
    }

    /// Appends `cno` to the marshalled pipeline (pipeline order is attach
    /// order). The operator's sub-scope must be covered by this
    /// constraint's scope.
    pub fn attach_cno(&self, bus: &mut Bus, cno: &Cno) -> Result<()> {
        if !cno.scope.iter().all(|v| self.core.scope.contains(v)) {
            return Err(Error::ScopeMismatch {
                cno: cno.scope.iter().map(|v| v.to_string()).collect(),
                scope: self.core.scope.iter().map(|v| v.to_string()).collect(),
            });
        }
        let func = cno.func.clone();
        let stage = bus.add_transform_input(&self.core.name, &cno.name, move |m| func(m));
        let conn = bus.connect(self.core.cno_channel, stage)?;
        self.core.attached.borrow_mut().push(AttachedCno { ident: cno.func.clone(), conn: conn.id });
        Ok(())
    }

    /// Removes a previously attached operator from the pipeline; takes
    /// effect from the next invocation.
    pub fn detach_cno(&self, bus: &mut Bus, cno: &Cno) -> Result<()> {
        let mut attached = self.core.attached.borrow_mut();
        let pos = attached
            .iter()
            .position(|a| Rc::ptr_eq(&a.ident, &cno.func))
            .ok_or(Error::CnoNotAttached)?;
        let rec = attached.remove(pos);
        drop(attached);
        bus.disconnect(rec.conn)
    }

    /// Subscribes this constraint to a variable event port (for a variable
    /// in scope): the event will trigger
    /// [`on_notified`](ConstraintCore::on_notified) through a fresh
    /// `get_notified` slot.
    pub fn watch(&self, bus: &mut Bus, event: PortId) -> Result<Connection> {
        let core = self.core.clone();
        let slot = bus.add_input(&self.core.name, "get_notified", MessageKind::Domain, move |bus, _| {
            core.on_notified(bus)
        });
        bus.connect(event, slot)
    }
}

/// The n-queens pruning constraint: `x ≠ y`, `x ≠ y + i`, and `x ≠ y − i`
/// packed into one constraint with two instantiation-triggered [`out_of`]
/// operators, invoked immediately (no scheduler round-trip) when either
/// variable becomes a singleton.
pub fn diff3(
    bus: &mut Bus,
    name: &str,
    x: &crate::variable::IntegralVariable,
    y: &crate::variable::IntegralVariable,
    i: Value,
) -> Result<Constraint> {
    assert!(x.id() != y.id(), "diff3 needs two distinct variables");
    assert!(i > 0, "diff3 offset must be positive");
    let c = Constraint::new(bus, name, &[x, y], NotifyMode::Immediate)?;
    c.attach_cno(bus, &Cno::out_of(&format!("prune_{}", y.name()), x.id(), y.id(), i))?;
    c.attach_cno(bus, &Cno::out_of(&format!("prune_{}", x.name()), y.id(), x.id(), i))?;
    c.watch(bus, x.instantiated())?;
    c.watch(bus, y.instantiated())?;
    Ok(c)
}

/// Alldiff by instantiation pruning over two or more variables, scheduler-
/// deferred, triggered by instantiation events.
pub fn alldiff_instantiation(
    bus: &mut Bus,
    name: &str,
    vars: &[&crate::variable::IntegralVariable],
) -> Result<Constraint> {
    assert!(vars.len() >= 2, "alldiff needs at least two variables");
    let scope: Vec<&Variable> = vars.iter().map(|v| &***v).collect();
    let c = Constraint::new(bus, name, &scope, NotifyMode::Deferred)?;
    c.attach_cno(bus, &Cno::alldiff("alldiff", c.scope().to_vec()))?;
    for v in vars {
        c.watch(bus, v.instantiated())?;
    }
    Ok(c)
}
