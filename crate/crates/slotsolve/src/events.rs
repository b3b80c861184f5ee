//! The signal/slot event bus.
//!
//! A [`Bus`] owns a flat table of ports. Components register output ports
//! (where they announce things) and input ports (where they react), then
//! anybody with access to the bus can [`connect`](Bus::connect) an output to
//! a kind-compatible input. Senders stay anonymous: emitting on a port with
//! zero listeners is a silent success, and a component never learns who is
//! connected to it.
//!
//! Three dispatch styles cover everything the solver needs:
//!
//! * [`emit`](Bus::emit) — push a payload to every listener, synchronously,
//!   in connection order (depth-first: a handler that emits on another port
//!   finishes that nested dispatch before the outer one resumes).
//! * [`emit_marshalled`](Bus::emit_marshalled) — thread a [`DomainMessage`]
//!   through the listeners as a pipeline, each one a transformer receiving
//!   the previous result; dispatch stops at the first message whose failure
//!   flag is raised.
//! * [`share`](Bus::share) — pull a payload from the single connected
//!   provider (a variable handing out a snapshot of its domain).
//!
//! Re-entrant dispatch on the port already dispatching is an error rather
//! than a queue: a propagation loop should surface, not spin. Disconnecting
//! (or connecting) during a dispatch is fine and takes effect from the next
//! emit — the dispatch in flight delivers to the listener list as it was
//! when the emit started.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, Write};
use std::rc::Rc;

use crate::error::{BusError, Result};
use crate::Domain;

/// Identifies a variable across messages, traces, and solution records.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Handle to a port registered on some [`Bus`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PortId(u32);

impl PortId {
    fn index(self) -> usize {
        self.0 as usize
    }
}

/// Handle to a live (or once-live) connection.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ConnectionId(u32);

impl ConnectionId {
    fn index(self) -> usize {
        self.0 as usize
    }
}

/// A successfully established output→input connection.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Connection {
    pub id: ConnectionId,
    pub from: PortId,
    pub to: PortId,
    /// Global insertion index; per-output delivery order follows it.
    pub order: u64,
}

/// Message-kind tag checked at connect time, so a domain announcement can
/// never arrive at a slot expecting a bare signal.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MessageKind {
    /// One variable's domain: [`Payload::Domain`].
    Domain,
    /// A [`DomainMessage`] bundle: [`Payload::Bundle`].
    Bundle,
    /// A bare notification token: [`Payload::Signal`].
    Signal,
}

impl MessageKind {
    fn name(self) -> &'static str {
        match self {
            MessageKind::Domain => "domain",
            MessageKind::Bundle => "bundle",
            MessageKind::Signal => "signal",
        }
    }
}

/// The bundle a narrowing pipeline works on: the domains of one constraint's
/// scope, in scope order, plus a failure flag a narrowing operator raises
/// when it detects inconsistency (an empty domain in the list means the same
/// thing; the flag just makes it explicit and stops the pipeline early).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DomainMessage {
    pub domains: Vec<(VarId, Domain)>,
    pub failure: bool,
}

impl DomainMessage {
    pub fn new(domains: Vec<(VarId, Domain)>) -> Self {
        DomainMessage { domains, failure: false }
    }

    pub fn domain_of(&self, v: VarId) -> Option<&Domain> {
        self.domains.iter().find(|(id, _)| *id == v).map(|(_, d)| d)
    }

    /// Replaces `v`'s entry (or appends one), raising the failure flag if
    /// the new domain is empty.
    pub fn set_domain(&mut self, v: VarId, d: Domain) {
        if d.is_empty() {
            self.failure = true;
        }
        match self.domains.iter_mut().find(|(id, _)| *id == v) {
            Some(slot) => slot.1 = d,
            None => self.domains.push((v, d)),
        }
    }

    pub fn any_empty(&self) -> bool {
        self.domains.iter().any(|(_, d)| d.is_empty())
    }
}

impl fmt::Display for DomainMessage {
    /// Renders `[v0={1..3},v1={2}]`, with a trailing `!` when failed.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, (v, d)) in self.domains.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}={d}")?;
        }
        f.write_str("]")?;
        if self.failure {
            f.write_str("!")?;
        }
        Ok(())
    }
}

/// What travels over a connection.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Payload {
    /// One variable's domain (announcement or snapshot).
    Domain(VarId, Domain),
    /// A narrowing-pipeline bundle.
    Bundle(DomainMessage),
    /// A bare notification carrying a small token.
    Signal(u64),
}

impl Payload {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::Domain(..) => MessageKind::Domain,
            Payload::Bundle(_) => MessageKind::Bundle,
            Payload::Signal(_) => MessageKind::Signal,
        }
    }

    fn summary(&self) -> String {
        match self {
            Payload::Domain(v, d) => format!("{v}={d}"),
            Payload::Bundle(m) => m.to_string(),
            Payload::Signal(t) => format!("#{t}"),
        }
    }
}

/// Handler for a plain input slot.
pub type PushFn = dyn Fn(&mut Bus, &Payload) -> Result<()>;
/// Handler for a narrowing-pipeline stage.
pub type TransformFn = dyn Fn(DomainMessage) -> DomainMessage;
/// Handler for a pull-style provider slot.
pub type ProvideFn = dyn Fn() -> Payload;

#[derive(Clone)]
enum Handler {
    Push(Rc<PushFn>),
    Transform(Rc<TransformFn>),
    Provide(Rc<ProvideFn>),
}

impl Handler {
    fn flavor(&self) -> &'static str {
        match self {
            Handler::Push(_) => "push",
            Handler::Transform(_) => "transform",
            Handler::Provide(_) => "provide",
        }
    }
}

/// How an output port dispatches: determines which handler flavor its
/// listeners must have, enforced at connect time.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum OutputRole {
    Emit,
    Marshalled,
    Share,
}

impl OutputRole {
    fn name(self) -> &'static str {
        match self {
            OutputRole::Emit => "emitting",
            OutputRole::Marshalled => "marshalled",
            OutputRole::Share => "sharing",
        }
    }

    fn wants(self) -> &'static str {
        match self {
            OutputRole::Emit => "push",
            OutputRole::Marshalled => "transform",
            OutputRole::Share => "provide",
        }
    }
}

enum PortBody {
    Output { role: OutputRole, conns: Vec<ConnectionId> },
    Input { handler: Handler },
}

struct PortInfo {
    owner: String,
    name: String,
    kind: MessageKind,
    body: PortBody,
}

struct ConnRec {
    from: PortId,
    to: PortId,
}

/// The bus: a port table, the live connections, and an optional trace sink.
///
/// One bus is one solver instance's nervous system; it is confined to a
/// single thread of control. Payloads are plain values and may cross
/// threads freely.
pub struct Bus {
    ports: Vec<PortInfo>,
    connections: Vec<Option<ConnRec>>,
    dispatching: HashSet<PortId>,
    next_order: u64,
    trace: Option<Box<dyn io::Write>>,
}

impl Default for Bus {
    fn default() -> Self {
        Self::new()
    }
}

impl Bus {
    pub fn new() -> Self {
        Bus {
            ports: Vec::new(),
            connections: Vec::new(),
            dispatching: HashSet::new(),
            next_order: 0,
            trace: None,
        }
    }

    /// Installs (or removes) the trace sink. Every delivery is logged as
    /// one line, `EMIT <from-port> -> <to-port> <payload-summary>`; write
    /// failures are swallowed so observability can never perturb solving.
    pub fn set_trace(&mut self, sink: Option<Box<dyn io::Write>>) {
        self.trace = sink;
    }

    fn add_port(&mut self, owner: &str, name: &str, kind: MessageKind, body: PortBody) -> PortId {
        let id = PortId(self.ports.len() as u32);
        self.ports.push(PortInfo { owner: owner.to_string(), name: name.to_string(), kind, body });
        id
    }

    /// Registers a fan-out output port (listeners are push handlers).
    pub fn add_output(&mut self, owner: &str, name: &str, kind: MessageKind) -> PortId {
        self.add_port(owner, name, kind, PortBody::Output { role: OutputRole::Emit, conns: Vec::new() })
    }

    /// Registers a pipeline output port (listeners are transform handlers;
    /// always carries [`DomainMessage`] bundles).
    pub fn add_marshalled_output(&mut self, owner: &str, name: &str) -> PortId {
        self.add_port(owner, name, MessageKind::Bundle, PortBody::Output {
            role: OutputRole::Marshalled,
            conns: Vec::new(),
        })
    }

    /// Registers a pull-style output port (its single listener is a provider).
    pub fn add_share_output(&mut self, owner: &str, name: &str, kind: MessageKind) -> PortId {
        self.add_port(owner, name, kind, PortBody::Output { role: OutputRole::Share, conns: Vec::new() })
    }

    /// Registers a plain input slot.
    pub fn add_input(
        &mut self,
        owner: &str,
        name: &str,
        kind: MessageKind,
        handler: impl Fn(&mut Bus, &Payload) -> Result<()> + 'static,
    ) -> PortId {
        self.add_port(owner, name, kind, PortBody::Input { handler: Handler::Push(Rc::new(handler)) })
    }

    /// Registers a pipeline-stage input slot (bundle-kind by construction).
    pub fn add_transform_input(
        &mut self,
        owner: &str,
        name: &str,
        handler: impl Fn(DomainMessage) -> DomainMessage + 'static,
    ) -> PortId {
        self.add_port(owner, name, MessageKind::Bundle, PortBody::Input {
            handler: Handler::Transform(Rc::new(handler)),
        })
    }

    /// Registers a provider input slot for [`share`](Bus::share) pulls.
    pub fn add_provide_input(
        &mut self,
        owner: &str,
        name: &str,
        kind: MessageKind,
        handler: impl Fn() -> Payload + 'static,
    ) -> PortId {
        self.add_port(owner, name, kind, PortBody::Input { handler: Handler::Provide(Rc::new(handler)) })
    }

    /// `owner.name`, for errors and traces.
    pub fn port_label(&self, p: PortId) -> String {
        match self.ports.get(p.index()) {
            Some(info) => format!("{}.{}", info.owner, info.name),
            None => format!("port#{}?", p.0),
        }
    }

    fn port(&self, p: PortId) -> Result<&PortInfo> {
        self.ports.get(p.index()).ok_or_else(|| BusError::UnknownPort(p.0).into())
    }

    /// Live listeners currently connected to an output port.
    pub fn listener_count(&self, from: PortId) -> usize {
        match self.ports.get(from.index()) {
            Some(PortInfo { body: PortBody::Output { conns, .. }, .. }) => conns.len(),
            _ => 0,
        }
    }

    /// Connects an output port to a kind-compatible input port. Duplicate
    /// connections are allowed and mean duplicate deliveries; deliveries
    /// happen in connection order.
    pub fn connect(&mut self, from: PortId, to: PortId) -> Result<Connection> {
        let src = self.port(from)?;
        let dst = self.port(to)?;
        let role = match &src.body {
            PortBody::Output { role, .. } => *role,
            PortBody::Input { .. } => {
                return Err(BusError::Direction(format!(
                    "cannot connect from {}: it is an input port",
                    self.port_label(from)
                ))
                .into())
            }
        };
        let handler = match &dst.body {
            PortBody::Input { handler } => handler,
            PortBody::Output { .. } => {
                return Err(BusError::Direction(format!(
                    "cannot connect to {}: it is an output port",
                    self.port_label(to)
                ))
                .into())
            }
        };
        if src.kind != dst.kind {
            return Err(BusError::KindMismatch {
                from: self.port_label(from),
                from_kind: src.kind.name(),
                to: self.port_label(to),
                to_kind: dst.kind.name(),
            }
            .into());
        }
        if handler.flavor() != role.wants() {
            return Err(BusError::HandlerMismatch(format!(
                "{} is a {} port and needs a {} listener, but {} is a {} slot",
                self.port_label(from),
                role.name(),
                role.wants(),
                self.port_label(to),
                handler.flavor()
            ))
            .into());
        }

        let id = ConnectionId(self.connections.len() as u32);
        let order = self.next_order;
        self.next_order += 1;
        self.connections.push(Some(ConnRec { from, to }));
        match &mut self.ports[from.index()].body {
            PortBody::Output { conns, .. } => conns.push(id),
            PortBody::Input { .. } => unreachable!("validated as output above"),
        }
        Ok(Connection { id, from, to, order })
    }

    /// Severs a connection. Safe during a dispatch: the dispatch in flight
    /// still delivers to its snapshot; the next emit won't.
    pub fn disconnect(&mut self, id: ConnectionId) -> Result<()> {
        let rec = self
            .connections
            .get_mut(id.index())
            .and_then(Option::take)
            .ok_or(BusError::UnknownConnection(id.0))?;
        if let PortBody::Output { conns, .. } = &mut self.ports[rec.from.index()].body {
            conns.retain(|&c| c != id);
        }
        Ok(())
    }

    /// Snapshots the listener list and flags the port as dispatching.
    /// Callers must clear `dispatching` when done, error or not.
    fn begin_dispatch(
        &mut self,
        from: PortId,
        want: OutputRole,
        kind: MessageKind,
    ) -> Result<Vec<(PortId, Handler)>> {
        let label = self.port_label(from);
        let info = self.port(from)?;
        let conn_ids = match &info.body {
            PortBody::Output { role, conns } if *role == want => conns.clone(),
            PortBody::Output { role, .. } => {
                return Err(BusError::Direction(format!(
                    "{label} is a {} port; this dispatch needs a {} port",
                    role.name(),
                    want.name()
                ))
                .into())
            }
            PortBody::Input { .. } => {
                return Err(BusError::Direction(format!("{label} is an input port; only outputs dispatch")).into())
            }
        };
        if info.kind != kind {
            return Err(BusError::PayloadKind { port: label, expected: info.kind.name(), found: kind.name() }.into());
        }
        if self.dispatching.contains(&from) {
            return Err(BusError::Reentrant(label).into());
        }
        let mut snapshot = Vec::with_capacity(conn_ids.len());
        for cid in conn_ids {
            let rec = self.connections[cid.index()].as_ref().expect("output lists only live connections");
            match &self.ports[rec.to.index()].body {
                PortBody::Input { handler } => snapshot.push((rec.to, handler.clone())),
                PortBody::Output { .. } => unreachable!("connect only targets inputs"),
            }
        }
        self.dispatching.insert(from);
        Ok(snapshot)
    }

    /// Pushes `payload` to every listener in connection order. No listeners
    /// is a silent success; the sender never learns who received it. A
    /// handler error aborts the remaining deliveries and propagates.
    pub fn emit(&mut self, from: PortId, payload: Payload) -> Result<()> {
        let snapshot = self.begin_dispatch(from, OutputRole::Emit, payload.kind())?;
        let mut result = Ok(());
        for (to, handler) in snapshot {
            let Handler::Push(f) = handler else {
                unreachable!("connect enforces push listeners on emitting ports")
            };
            self.trace_delivery(from, to, &payload.summary());
            if let Err(e) = f(self, &payload) {
                result = Err(e);
                break;
            }
        }
        self.dispatching.remove(&from);
        result
    }

    /// Threads `msg` through the listeners as a pipeline: each transformer
    /// receives the previous stage's result. Dispatch stops as soon as a
    /// result carries `failure = true`; the final message is returned. With
    /// zero listeners the message comes back unchanged.
    pub fn emit_marshalled(&mut self, from: PortId, msg: DomainMessage) -> Result<DomainMessage> {
        let snapshot = self.begin_dispatch(from, OutputRole::Marshalled, MessageKind::Bundle)?;
        let mut cur = msg;
        for (to, handler) in snapshot {
            if cur.failure {
                break;
            }
            let Handler::Transform(f) = handler else {
                unreachable!("connect enforces transform listeners on marshalled ports")
            };
            self.trace_delivery(from, to, &cur.to_string());
            cur = f(cur);
        }
        self.dispatching.remove(&from);
        Ok(cur)
    }

    /// Pulls a payload from the port's single provider. Zero or multiple
    /// listeners is an error: a pull must have exactly one answer.
    pub fn share(&mut self, from: PortId) -> Result<Payload> {
        let label = self.port_label(from);
        let info = self.port(from)?;
        let kind = info.kind;
        let conn_ids = match &info.body {
            PortBody::Output { role: OutputRole::Share, conns } => conns.clone(),
            PortBody::Output { role, .. } => {
                return Err(BusError::Direction(format!("{label} is a {} port; share needs a sharing port", role.name())).into())
            }
            PortBody::Input { .. } => {
                return Err(BusError::Direction(format!("{label} is an input port; only outputs dispatch")).into())
            }
        };
        let [cid] = conn_ids.as_slice() else {
            return Err(BusError::ShareCardinality { port: label, listeners: conn_ids.len() }.into());
        };
        let rec = self.connections[cid.index()].as_ref().expect("output lists only live connections");
        let to = rec.to;
        let Handler::Provide(f) = (match &self.ports[to.index()].body {
            PortBody::Input { handler } => handler.clone(),
            PortBody::Output { .. } => unreachable!("connect only targets inputs"),
        }) else {
            unreachable!("connect enforces provide listeners on sharing ports")
        };
        let payload = f();
        if payload.kind() != kind {
            return Err(BusError::PayloadKind {
                port: self.port_label(to),
                expected: kind.name(),
                found: payload.kind().name(),
            }
            .into());
        }
        self.trace_delivery(from, to, &payload.summary());
        Ok(payload)
    }

    fn trace_delivery(&mut self, from: PortId, to: PortId, summary: &str) {
        if self.trace.is_none() {
            return;
        }
        let line = format!("EMIT {} -> {} {}", self.port_label(from), self.port_label(to), summary);
        if let Some(w) = &mut self.trace {
            let _ = writeln!(w, "{line}");
        }
    }
}
