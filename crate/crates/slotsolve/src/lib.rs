//! A component-oriented finite-domain constraint solver.
//!
//! Everything here is a small component — variables, constraints, schedulers,
//! enumerators — wired together at run time over a signal/slot event bus.
//! Components never call each other directly: a variable announces a domain
//! change on an output port, and whoever is connected (constraint triggers, a
//! scheduler, a trace sink, the search trail) reacts. Solving n-queens, for
//! instance, is assembling variables and `!=`-style narrowing operators on a
//! bus, posting the constraints to a scheduler, and handing the propagation
//! loop to a backtracking enumerator.
//!
//! The crate also ships a tiny modeling language (see [`model`]) and a CLI
//! (`slotsolve`) that parses it, plus a brute-force [`oracle`] used by the
//! test suite to cross-check propagation and search.

pub mod constraint;
pub mod domain;
pub mod error;
pub mod events;
pub mod model;
pub mod oracle;
pub mod scheduler;
pub mod search;
pub mod variable;

pub use constraint::{alldiff_instantiation, diff3, Cno, Constraint, NotifyMode, Relation};
pub use domain::{DomainValue, FiniteDomain};
pub use error::{BusError, EmptyDomain, Error, Result};
pub use events::{Bus, Connection, ConnectionId, DomainMessage, MessageKind, Payload, PortId, VarId};
pub use model::{build, nqueens, parse, BuildOptions, ModelError, Scheme, Space};
pub use scheduler::{ItemId, PopPolicy, Scheduler, Stats};
pub use search::{RoundRobinEnumerator, SearchState, TrailStack};
pub use variable::{IntegralVariable, Variable};

/// The scalar type the solver stack (variables, constraints, models) runs on.
/// The domain layer itself is generic over any primitive integer up to 64
/// bits; `i64` is the default everywhere else.
pub type Value = i64;

/// A finite domain over the solver's default scalar.
pub type Domain = FiniteDomain<Value>;
