//! The variable component: owns a domain, turns mutations into events.
//!
//! A [`Variable`] holds a [`Domain`] and exposes three input
//! slots — `get_domain` (the one access point that modifies the domain),
//! `sharing_domain` (hands out snapshots to pull-style askers), and
//! `reinit_domain` (restores a domain *silently*, the backtracking path) —
//! plus two output ports: `trailing`, which carries the old domain just
//! before a mutation (a trail component records these), and
//! `domain_changed`, which carries the new one just after.
//!
//! An [`IntegralVariable`] adds four derived outputs — `min_changed`,
//! `max_changed`, `hull_changed`, `instantiated` — each fired only when its
//! quantity actually changed, so a bounds-only constraint never wakes up for
//! an interior hole. One mutation emits, in this fixed order: `trailing`,
//! `domain_changed`, then `min`, `max`, `hull`, `instantiated` as applicable.

use std::cell::RefCell;
use std::ops::Deref;
use std::rc::Rc;

use crate::error::{BusError, Result};
use crate::events::{Bus, MessageKind, Payload, PortId, VarId};
use crate::Domain;

/// Which derived quantities differ between two domains.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct DerivedEvents {
    pub min: bool,
    pub max: bool,
    pub hull: bool,
    pub instantiated: bool,
}

/// Compares two domains and reports which derived events a mutation from
/// `old` to `new` fires. A transition into or out of emptiness counts as a
/// min/max change; `instantiated` fires only on becoming a singleton.
pub fn derived_events(old: &Domain, new: &Domain) -> DerivedEvents {
    let bound_changed = |a: std::result::Result<i64, _>, b: std::result::Result<i64, _>| match (a, b) {
        (Ok(x), Ok(y)) => x != y,
        (Err(_), Err(_)) => false,
        _ => true,
    };
    DerivedEvents {
        min: bound_changed(old.min(), new.min()),
        max: bound_changed(old.max(), new.max()),
        hull: old.hull() != new.hull(),
        instantiated: new.is_singleton() && !old.is_singleton(),
    }
}

#[derive(Clone, Copy)]
struct DerivedPorts {
    min: PortId,
    max: PortId,
    hull: PortId,
    instantiated: PortId,
}

struct VarCore {
    id: VarId,
    domain: Domain,
    trailing: PortId,
    domain_changed: PortId,
    derived: Option<DerivedPorts>,
}

impl VarCore {
    /// The `get_domain` path: emit `trailing` with the old domain, store the
    /// new one, then announce it. A delivery equal to the current domain is
    /// not a modification and emits nothing. Empty domains are stored and
    /// announced like any other — failure detection is the scheduler's job.
    fn receive(core: &Rc<RefCell<Self>>, bus: &mut Bus, d: Domain) -> Result<()> {
        let (id, old, trailing, changed, derived) = {
            let c = core.borrow();
            if c.domain == d {
                return Ok(());
            }
            (c.id, c.domain.clone(), c.trailing, c.domain_changed, c.derived)
        };
        bus.emit(trailing, Payload::Domain(id, old.clone()))?;
        core.borrow_mut().domain = d.clone();
        bus.emit(changed, Payload::Domain(id, d.clone()))?;
        if let Some(ports) = derived {
            let fired = derived_events(&old, &d);
            if fired.min {
                bus.emit(ports.min, Payload::Domain(id, d.clone()))?;
            }
            if fired.max {
                bus.emit(ports.max, Payload::Domain(id, d.clone()))?;
            }
            if fired.hull {
                bus.emit(ports.hull, Payload::Domain(id, d.clone()))?;
            }
            if fired.instantiated {
                bus.emit(ports.instantiated, Payload::Domain(id, d))?;
            }
        }
        Ok(())
    }
}

fn own_domain(core: &Rc<RefCell<VarCore>>, p: &Payload) -> Result<Domain> {
    let Payload::Domain(v, d) = p else {
        unreachable!("connect/emit kind checks admit only domain payloads here")
    };
    let id = core.borrow().id;
    if *v != id {
        return Err(BusError::HandlerMismatch(format!("domain for {v} delivered to {id}'s slot")).into());
    }
    Ok(d.clone())
}

/// A finite-domain variable on the bus. Cloning yields another handle to
/// the same variable — the domain and ports are shared.
#[derive(Clone)]
pub struct Variable {
    name: String,
    core: Rc<RefCell<VarCore>>,
    get_domain: PortId,
    sharing_domain: PortId,
    reinit_domain: PortId,
}

impl Variable {
    /// Registers a base variable (no derived bound events) on `bus`.
    pub fn new(bus: &mut Bus, id: VarId, name: &str, domain: Domain) -> Self {
        Self::build(bus, id, name, domain, false)
    }

    fn build(bus: &mut Bus, id: VarId, name: &str, domain: Domain, integral: bool) -> Self {
        let trailing = bus.add_output(name, "trailing", MessageKind::Domain);
        let domain_changed = bus.add_output(name, "domain_changed", MessageKind::Domain);
        let derived = integral.then(|| DerivedPorts {
            min: bus.add_output(name, "min_changed", MessageKind::Domain),
            max: bus.add_output(name, "max_changed", MessageKind::Domain),
            hull: bus.add_output(name, "hull_changed", MessageKind::Domain),
            instantiated: bus.add_output(name, "instantiated", MessageKind::Domain),
        });
        let core = Rc::new(RefCell::new(VarCore { id, domain, trailing, domain_changed, derived }));

        let c = core.clone();
        let get_domain = bus.add_input(name, "get_domain", MessageKind::Domain, move |bus, p| {
            let d = own_domain(&c, p)?;
            VarCore::receive(&c, bus, d)
        });
        let c = core.clone();
        let reinit_domain = bus.add_input(name, "reinit_domain", MessageKind::Domain, move |_, p| {
            let d = own_domain(&c, p)?;
            c.borrow_mut().domain = d;
            Ok(())
        });
        let c = core.clone();
        let sharing_domain = bus.add_provide_input(name, "sharing_domain", MessageKind::Domain, move || {
            let c = c.borrow();
            Payload::Domain(c.id, c.domain.clone())
        });

        Variable { name: name.to_string(), core, get_domain, sharing_domain, reinit_domain }
    }

    pub fn id(&self) -> VarId {
        self.core.borrow().id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Snapshot of the current domain (what `sharing_domain` hands out).
    pub fn domain(&self) -> Domain {
        self.core.borrow().domain.clone()
    }

    /// Delivers a new domain exactly as the `get_domain` slot would:
    /// `trailing`, store, `domain_changed`, derived events. Any domain is
    /// accepted, not only subsets — the enumerator assigns singletons
    /// through this same path; contraction is a narrowing-operator contract.
    pub fn receive(&self, bus: &mut Bus, d: Domain) -> Result<()> {
        VarCore::receive(&self.core, bus, d)
    }

    /// Restores a domain without emitting anything, exactly as the
    /// `reinit_domain` slot would. Backtracking uses this so that undoing
    /// work is not itself an event.
    pub fn reinit(&self, d: Domain) {
        self.core.borrow_mut().domain = d;
    }

    pub fn get_domain(&self) -> PortId {
        self.get_domain
    }

    pub fn sharing_domain(&self) -> PortId {
        self.sharing_domain
    }

    pub fn reinit_domain(&self) -> PortId {
        self.reinit_domain
    }

    pub fn trailing(&self) -> PortId {
        self.core.borrow().trailing
    }

    pub fn domain_changed(&self) -> PortId {
        self.core.borrow().domain_changed
    }
}

/// A variable over an integer domain, with bound/instantiation events.
#[derive(Clone)]
pub struct IntegralVariable {
    base: Variable,
    derived: DerivedPorts,
}

impl IntegralVariable {
    /// Registers an integral variable (all six output ports) on `bus`.
    pub fn new(bus: &mut Bus, id: VarId, name: &str, domain: Domain) -> Self {
        let base = Variable::build(bus, id, name, domain, true);
        let derived = base.core.borrow().derived.expect("built as integral");
        IntegralVariable { base, derived }
    }

    pub fn min_changed(&self) -> PortId {
        self.derived.min
    }

    pub fn max_changed(&self) -> PortId {
        self.derived.max
    }

    pub fn hull_changed(&self) -> PortId {
        self.derived.hull
    }

    pub fn instantiated(&self) -> PortId {
        self.derived.instantiated
    }
}

impl Deref for IntegralVariable {
    type Target = Variable;

    fn deref(&self) -> &Variable {
        &self.base
    }
}
