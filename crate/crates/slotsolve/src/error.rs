//! Error types shared across the solver.

use thiserror::Error;

/// Raised when a bound query is made on an empty domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("bound query on an empty domain")]
pub struct EmptyDomain;

/// Errors raised by the event bus itself (wiring and dispatch misuse, not
/// solver failures: an empty domain is ordinary data, never a bus error).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BusError {
    #[error("message-kind mismatch: {from} sends {from_kind}, {to} accepts {to_kind}")]
    KindMismatch {
        from: String,
        from_kind: &'static str,
        to: String,
        to_kind: &'static str,
    },
    #[error("direction error: {0}")]
    Direction(String),
    #[error("unknown port #{0}")]
    UnknownPort(u32),
    #[error("unknown or stale connection #{0}")]
    UnknownConnection(u32),
    #[error("payload kind {found} does not match {port}'s declared kind {expected}")]
    PayloadKind {
        port: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("re-entrant emit on port {0} while it is dispatching")]
    Reentrant(String),
    #[error("share on {port} requires exactly one listener, found {listeners}")]
    ShareCardinality { port: String, listeners: usize },
    #[error("handler on {0} cannot service this dispatch")]
    HandlerMismatch(String),
}

/// Top-level error for solver operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Bus(#[from] BusError),
    #[error(transparent)]
    EmptyDomain(#[from] EmptyDomain),
    #[error("constraint {0} is already posted")]
    DuplicatePost(String),
    #[error("tuple arity {got} does not match relation arity {expected}")]
    Arity { expected: usize, got: usize },
    #[error("narrowing operator scope {cno:?} is not covered by constraint scope {scope:?}")]
    ScopeMismatch { cno: Vec<String>, scope: Vec<String> },
    #[error("narrowing operator is not attached to this constraint")]
    CnoNotAttached,
    #[error("re-entrant scheduler run")]
    ReentrantRun,
    #[error("item is not registered with this scheduler")]
    UnknownItem,
    #[error("enumerator state error: {0}")]
    State(&'static str),
    #[error("capacity exceeded: {need} tuples over the cap of {cap}")]
    Capacity { need: u128, cap: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
