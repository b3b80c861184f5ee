//! The modeling layer: a small text language for finite-domain problems,
//! its parser, and a builder that lowers a parsed model onto the event bus
//! as a ready-to-solve [`Space`].
//!
//! A model is a sequence of `;`-terminated statements:
//!
//! ```text
//! var x in 1..4;
//! var y in {1..2, 5};
//! constraint x != y + 1;
//! constraint alldiff(x, y);
//! constraint table(x, y) in {(1, 2), (2, 5)};
//! # comments run to end of line
//! ```
//!
//! [`parse`] turns text into an [`ast::Model`] (or a positioned
//! [`ModelError`]); [`build`] instantiates the model against fresh solver
//! components; [`nqueens`] builds the classic benchmark directly.
//!
//! ```
//! use slotsolve::model::{build, parse, BuildOptions};
//!
//! let model = parse("var x in 1..4; var y in 1..4; constraint x != y + 1;")?;
//! let mut space = build(&model, &BuildOptions::default())?;
//! assert!(space.propagate()?);
//! assert_eq!(space.solve_all()?.len(), 13);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod ast;
mod build;
mod lexer;
mod parser;

pub use build::{build, nqueens, BuildOptions, Scheme, Space};
pub use parser::parse;

use ast::Pos;
use thiserror::Error;

/// Anything that can go wrong between model text and a runnable [`Space`].
/// Parse-stage variants carry the 1-based `line:column` of the offence.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{pos}: unexpected {found}, expected {}", friendly_list(expected))]
    Syntax { pos: Pos, found: String, expected: Vec<String> },
    #[error("{pos}: variable `{name}` is not declared")]
    UndeclaredVariable { name: String, pos: Pos },
    #[error("{pos}: the name `{name}` is already used here")]
    DuplicateName { name: String, pos: Pos },
    #[error("{pos}: tuple has {got} values but the scope has {expected} variables")]
    ArityMismatch { pos: Pos, expected: usize, got: usize },
    #[error("constraint {name} would expand to {need} tuples, over the cap of {cap}")]
    Capacity { name: String, need: u128, cap: u128 },
    #[error(transparent)]
    Engine(#[from] crate::Error),
}

fn friendly_list(items: &[String]) -> String {
    match items {
        [] => "nothing".to_string(),
        [one] => one.clone(),
        [head @ .., last] => format!("{} or {last}", head.join(", ")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_render_position_and_expectations() {
        let err = parse("var x in ..;").unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("1:10"), "{msg}");

        let err = parse("frobnicate;").unwrap_err();
        assert_eq!(
            err.to_string(),
            "1:1: unexpected `frobnicate`, expected `var` or `constraint`"
        );

        let err = parse("var x in 1..2; constraint x != y;").unwrap_err();
        assert_eq!(err.to_string(), "1:32: variable `y` is not declared");
    }
}
