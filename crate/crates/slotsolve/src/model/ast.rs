//! Syntax tree for the model language.
//!
//! Every node that came from source text carries a [`Pos`], but equality
//! deliberately ignores positions: two parses of equivalent text compare
//! equal, which is what the parse→print→parse round-trip test leans on.

use std::fmt;

use crate::{Domain, FiniteDomain};

/// 1-based source position.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A name occurrence. Equality compares the text only.
#[derive(Clone, Debug)]
pub struct Ident {
    pub text: String,
    pub pos: Pos,
}

impl PartialEq for Ident {
    fn eq(&self, other: &Ident) -> bool {
        self.text == other.text
    }
}
impl Eq for Ident {}

/// One piece of a domain literal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DomainItem {
    Range(i64, i64),
    Value(i64),
    Nested(DomainLiteral),
}

/// A comma-separated union of ranges, single values, and braced groups.
#[derive(Clone, Debug)]
pub struct DomainLiteral {
    pub items: Vec<DomainItem>,
    pub pos: Pos,
}

impl PartialEq for DomainLiteral {
    fn eq(&self, other: &DomainLiteral) -> bool {
        self.items == other.items
    }
}
impl Eq for DomainLiteral {}

impl DomainLiteral {
    /// The finite domain this literal denotes (the union of its items).
    /// An inverted range contributes nothing, so `5..3` is empty.
    pub fn eval(&self) -> Domain {
        let mut out = FiniteDomain::empty();
        for item in &self.items {
            let piece = match item {
                DomainItem::Range(lo, hi) => FiniteDomain::interval(*lo, *hi),
                DomainItem::Value(v) => FiniteDomain::singleton(*v),
                DomainItem::Nested(inner) => inner.eval(),
            };
            out = FiniteDomain::from_intervals(
                out.intervals().iter().chain(piece.intervals().iter()).copied(),
            );
        }
        out
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VarDecl {
    pub name: Ident,
    pub domain: DomainLiteral,
}

/// One table row. Equality compares the values only.
#[derive(Clone, Debug)]
pub struct Tuple {
    pub values: Vec<i64>,
    pub pos: Pos,
}

impl PartialEq for Tuple {
    fn eq(&self, other: &Tuple) -> bool {
        self.values == other.values
    }
}
impl Eq for Tuple {}

#[derive(Clone, Debug)]
pub enum ConstraintDecl {
    /// `x != y`, `x != y + c`, `x != y - c` (the offset is signed; 0 when
    /// absent).
    Diff { x: Ident, y: Ident, offset: i64 },
    AllDiff { vars: Vec<Ident>, pos: Pos },
    Table { vars: Vec<Ident>, tuples: Vec<Tuple>, pos: Pos },
}

impl PartialEq for ConstraintDecl {
    fn eq(&self, other: &ConstraintDecl) -> bool {
        match (self, other) {
            (
                ConstraintDecl::Diff { x, y, offset },
                ConstraintDecl::Diff { x: x2, y: y2, offset: o2 },
            ) => x == x2 && y == y2 && offset == o2,
            (ConstraintDecl::AllDiff { vars, .. }, ConstraintDecl::AllDiff { vars: v2, .. }) => {
                vars == v2
            }
            (
                ConstraintDecl::Table { vars, tuples, .. },
                ConstraintDecl::Table { vars: v2, tuples: t2, .. },
            ) => vars == v2 && tuples == t2,
            _ => false,
        }
    }
}
impl Eq for ConstraintDecl {}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Stmt {
    Var(VarDecl),
    Constraint(ConstraintDecl),
}

/// A parsed model: statements in source order. Variable declaration order
/// is meaningful — it fixes the enumerator's round-robin order and the
/// solution output order.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Model {
    pub items: Vec<Stmt>,
}

impl Model {
    pub fn variables(&self) -> impl Iterator<Item = &VarDecl> {
        self.items.iter().filter_map(|s| match s {
            Stmt::Var(v) => Some(v),
            _ => None,
        })
    }

    pub fn constraints(&self) -> impl Iterator<Item = &ConstraintDecl> {
        self.items.iter().filter_map(|s| match s {
            Stmt::Constraint(c) => Some(c),
            _ => None,
        })
    }
}

impl fmt::Display for DomainItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainItem::Range(lo, hi) => write!(f, "{lo}..{hi}"),
            DomainItem::Value(v) => write!(f, "{v}"),
            DomainItem::Nested(inner) => write!(f, "{{{inner}}}"),
        }
    }
}

impl fmt::Display for DomainLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

fn join(f: &mut fmt::Formatter<'_>, names: &[Ident]) -> fmt::Result {
    for (i, n) in names.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{}", n.text)?;
    }
    Ok(())
}

impl fmt::Display for ConstraintDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintDecl::Diff { x, y, offset } => {
                write!(f, "{} != {}", x.text, y.text)?;
                if *offset > 0 {
                    write!(f, " + {offset}")?;
                } else if *offset < 0 {
                    write!(f, " - {}", offset.unsigned_abs())?;
                }
                Ok(())
            }
            ConstraintDecl::AllDiff { vars, .. } => {
                write!(f, "alldiff(")?;
                join(f, vars)?;
                write!(f, ")")
            }
            ConstraintDecl::Table { vars, tuples, .. } => {
                write!(f, "table(")?;
                join(f, vars)?;
                write!(f, ") in {{")?;
                for (i, t) in tuples.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "(")?;
                    for (j, v) in t.values.iter().enumerate() {
                        if j > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{v}")?;
                    }
                    write!(f, ")")?;
                }
                write!(f, "}}")
            }
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Var(v) => write!(f, "var {} in {};", v.name.text, v.domain),
            Stmt::Constraint(c) => write!(f, "constraint {c};"),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for stmt in &self.items {
            writeln!(f, "{stmt}")?;
        }
        Ok(())
    }
}
