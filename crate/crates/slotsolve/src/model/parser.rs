//! Recursive-descent parser for the model language, plus the semantic
//! checks that make a syntactically valid tree a usable model: variable
//! names are unique, every constraint mentions only declared variables,
//! alldiff/table scopes repeat no variable, and table tuples match their
//! scope's arity. All diagnostics carry a 1-based line:column position.

use std::collections::HashSet;

use super::ast::{ConstraintDecl, DomainItem, DomainLiteral, Ident, Model, Stmt, Tuple, VarDecl};
use super::lexer::{lex, TokKind, Token};
use super::ModelError;

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, kind: &TokKind) -> bool {
        if &self.peek().kind == kind {
            self.bump();
            return true;
        }
        false
    }

    fn unexpected(&self, expected: &[&str]) -> ModelError {
        let t = self.peek();
        ModelError::Syntax {
            pos: t.pos,
            found: t.kind.to_string(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, kind: TokKind, expected: &str) -> Result<Token, ModelError> {
        if self.peek().kind == kind {
            return Ok(self.bump());
        }
        Err(self.unexpected(&[expected]))
    }

    fn expect_name(&mut self) -> Result<Ident, ModelError> {
        match &self.peek().kind {
            TokKind::Ident(_) => {
                let t = self.bump();
                let TokKind::Ident(text) = t.kind else { unreachable!() };
                Ok(Ident { text, pos: t.pos })
            }
            _ => Err(self.unexpected(&["a variable name"])),
        }
    }

    /// INT with an optional leading `-`.
    fn expect_int(&mut self) -> Result<(i64, super::ast::Pos), ModelError> {
        let pos = self.peek().pos;
        let negative = self.eat(&TokKind::Minus);
        match self.peek().kind {
            TokKind::Int(v) => {
                self.bump();
                let v = if negative {
                    v.checked_neg().ok_or(ModelError::Syntax {
                        pos,
                        found: format!("`-{v}`"),
                        expected: vec!["a 64-bit integer".to_string()],
                    })?
                } else {
                    v
                };
                Ok((v, pos))
            }
            _ => Err(self.unexpected(&["an integer"])),
        }
    }

    fn parse_model(&mut self) -> Result<Model, ModelError> {
        let mut items = Vec::new();
        while self.peek().kind != TokKind::Eof {
            let stmt = match self.peek().kind {
                TokKind::Var => Stmt::Var(self.parse_var()?),
                TokKind::Constraint => Stmt::Constraint(self.parse_constraint()?),
                _ => return Err(self.unexpected(&["`var`", "`constraint`"])),
            };
            self.expect(TokKind::Semi, "`;`")?;
            items.push(stmt);
        }
        Ok(Model { items })
    }

    fn parse_var(&mut self) -> Result<VarDecl, ModelError> {
        self.expect(TokKind::Var, "`var`")?;
        let name = self.expect_name()?;
        self.expect(TokKind::In, "`in`")?;
        let domain = self.parse_domain()?;
        Ok(VarDecl { name, domain })
    }

    fn parse_domain(&mut self) -> Result<DomainLiteral, ModelError> {
        let pos = self.peek().pos;
        let mut items = vec![self.parse_domain_item()?];
        while self.eat(&TokKind::Comma) {
            items.push(self.parse_domain_item()?);
        }
        Ok(DomainLiteral { items, pos })
    }

    fn parse_domain_item(&mut self) -> Result<DomainItem, ModelError> {
        match self.peek().kind {
            TokKind::LBrace => {
                self.bump();
                let inner = self.parse_domain()?;
                self.expect(TokKind::RBrace, "`}`")?;
                Ok(DomainItem::Nested(inner))
            }
            TokKind::Int(_) | TokKind::Minus => {
                let (lo, _) = self.expect_int()?;
                if self.eat(&TokKind::DotDot) {
                    let (hi, _) = self.expect_int()?;
                    Ok(DomainItem::Range(lo, hi))
                } else {
                    Ok(DomainItem::Value(lo))
                }
            }
            _ => Err(self.unexpected(&["an integer", "`{`"])),
        }
    }

    fn parse_constraint(&mut self) -> Result<ConstraintDecl, ModelError> {
        self.expect(TokKind::Constraint, "`constraint`")?;
        match self.peek().kind {
            TokKind::Alldiff => {
                let pos = self.bump().pos;
                self.expect(TokKind::LParen, "`(`")?;
                let mut vars = vec![self.expect_name()?];
                // The grammar wants two or more names.
                self.expect(TokKind::Comma, "`,`")?;
                vars.push(self.expect_name()?);
                while self.eat(&TokKind::Comma) {
                    vars.push(self.expect_name()?);
                }
                self.expect(TokKind::RParen, "`)`")?;
                Ok(ConstraintDecl::AllDiff { vars, pos })
            }
            TokKind::Table => {
                let pos = self.bump().pos;
                self.expect(TokKind::LParen, "`(`")?;
                let mut vars = vec![self.expect_name()?];
                while self.eat(&TokKind::Comma) {
                    vars.push(self.expect_name()?);
                }
                self.expect(TokKind::RParen, "`)`")?;
                self.expect(TokKind::In, "`in`")?;
                self.expect(TokKind::LBrace, "`{`")?;
                let mut tuples = vec![self.parse_tuple()?];
                while self.eat(&TokKind::Comma) {
                    tuples.push(self.parse_tuple()?);
                }
                self.expect(TokKind::RBrace, "`}`")?;
                Ok(ConstraintDecl::Table { vars, tuples, pos })
            }
            TokKind::Ident(_) => {
                let x = self.expect_name()?;
                self.expect(TokKind::Neq, "`!=`")?;
                let y = self.expect_name()?;
                let offset = if self.eat(&TokKind::Plus) {
                    self.expect_int()?.0
                } else if self.peek().kind == TokKind::Minus {
                    self.bump();
                    let (v, pos) = self.expect_int()?;
                    v.checked_neg().ok_or(ModelError::Syntax {
                        pos,
                        found: format!("`{v}`"),
                        expected: vec!["a negatable integer".to_string()],
                    })?
                } else {
                    0
                };
                Ok(ConstraintDecl::Diff { x, y, offset })
            }
            _ => Err(self.unexpected(&["a variable name", "`alldiff`", "`table`"])),
        }
    }

    fn parse_tuple(&mut self) -> Result<Tuple, ModelError> {
        let pos = self.expect(TokKind::LParen, "`(`")?.pos;
        let mut values = vec![self.expect_int()?.0];
        while self.eat(&TokKind::Comma) {
            values.push(self.expect_int()?.0);
        }
        self.expect(TokKind::RParen, "`)`")?;
        Ok(Tuple { values, pos })
    }
}

/// Semantic pass over a syntactically valid tree.
fn validate(model: &Model) -> Result<(), ModelError> {
    let mut declared: HashSet<&str> = HashSet::new();
    for v in model.variables() {
        if !declared.insert(&v.name.text) {
            return Err(ModelError::DuplicateName { name: v.name.text.clone(), pos: v.name.pos });
        }
    }

    let check_declared = |name: &Ident| -> Result<(), ModelError> {
        if declared.contains(name.text.as_str()) {
            Ok(())
        } else {
            Err(ModelError::UndeclaredVariable { name: name.text.clone(), pos: name.pos })
        }
    };
    let check_scope = |vars: &[Ident]| -> Result<(), ModelError> {
        let mut seen = HashSet::new();
        for v in vars {
            check_declared(v)?;
            if !seen.insert(v.text.as_str()) {
                return Err(ModelError::DuplicateName { name: v.text.clone(), pos: v.pos });
            }
        }
        Ok(())
    };

    for c in model.constraints() {
        match c {
            ConstraintDecl::Diff { x, y, .. } => {
                // `x != x` is legal (degenerate) — scope repetition is only
                // an error where it would make the constraint ill-formed.
                check_declared(x)?;
                check_declared(y)?;
            }
            ConstraintDecl::AllDiff { vars, .. } => check_scope(vars)?,
            ConstraintDecl::Table { vars, tuples, .. } => {
                check_scope(vars)?;
                for t in tuples {
                    if t.values.len() != vars.len() {
                        return Err(ModelError::ArityMismatch {
                            pos: t.pos,
                            expected: vars.len(),
                            got: t.values.len(),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Parses and validates a model. The grammar, roughly:
///
/// ```text
/// model := (stmt ";")*
/// stmt  := "var" NAME "in" dom | "constraint" cexpr
/// dom   := item ("," item)*        item := INT ".." INT | INT | "{" dom "}"
/// cexpr := NAME "!=" NAME (("+"|"-") INT)?
///        | "alldiff" "(" NAME ("," NAME)+ ")"
///        | "table" "(" NAME ("," NAME)* ")" "in" "{" tuple ("," tuple)* "}"
/// tuple := "(" INT ("," INT)* ")"
/// ```
///
/// `#` comments run to end of line. Integers may carry a leading `-`.
pub fn parse(text: &str) -> Result<Model, ModelError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0 };
    let model = p.parse_model()?;
    validate(&model)?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::super::ast::Pos;
    use super::*;
    use crate::FiniteDomain;

    fn pos(line: u32, col: u32) -> Pos {
        Pos { line, col }
    }

    #[test]
    fn variable_declarations_and_domains() {
        let m = parse("var x in 1..3;\nvar y in -2, 0, {4..5, 9};").unwrap();
        let vars: Vec<_> = m.variables().collect();
        assert_eq!(vars.len(), 2);
        assert_eq!(vars[0].name.text, "x");
        assert_eq!(vars[0].domain.eval(), FiniteDomain::interval(1, 3));
        assert_eq!(vars[1].domain.eval(), FiniteDomain::from_values([-2, 0, 4, 5, 9]));
    }

    #[test]
    fn constraint_forms() {
        let m = parse(concat!(
            "var x in 1..3; var y in 1..3; var z in 1..3;\n",
            "constraint x != y + 2;\n",
            "constraint x != y - 1;\n",
            "constraint x != z;\n",
            "constraint alldiff(x, y, z);\n",
            "constraint table(x, y) in {(1, 2), (2, 3)};\n",
        ))
        .unwrap();
        let cs: Vec<_> = m.constraints().collect();
        assert_eq!(cs.len(), 5);
        assert!(matches!(cs[0], ConstraintDecl::Diff { offset: 2, .. }));
        assert!(matches!(cs[1], ConstraintDecl::Diff { offset: -1, .. }));
        assert!(matches!(cs[2], ConstraintDecl::Diff { offset: 0, .. }));
        assert!(matches!(cs[3], ConstraintDecl::AllDiff { vars, .. } if vars.len() == 3));
        assert!(matches!(cs[4], ConstraintDecl::Table { tuples, .. } if tuples.len() == 2));
    }

    #[test]
    fn comments_and_whitespace_are_ignored() {
        let m = parse("# heading\nvar x in 1..2; # trailing\n\n  constraint x != x + 1;").unwrap();
        assert_eq!(m.items.len(), 2);
    }

    #[test]
    fn syntax_errors_carry_position_and_expectations() {
        let err = parse("var x in 1..3").unwrap_err();
        let ModelError::Syntax { pos: p, expected, .. } = &err else {
            panic!("expected a syntax error, got {err:?}")
        };
        assert_eq!(*p, pos(1, 14));
        assert!(expected.contains(&"`;`".to_string()));

        let err = parse("var x in ;").unwrap_err();
        assert!(matches!(err, ModelError::Syntax { pos: p, .. } if p == pos(1, 10)));

        let err = parse("frobnicate;").unwrap_err();
        let ModelError::Syntax { expected, .. } = &err else { panic!("{err:?}") };
        assert_eq!(expected, &["`var`", "`constraint`"]);

        let err = parse("var x in 1..3; constraint x = 1;").unwrap_err();
        assert!(matches!(err, ModelError::Syntax { pos: p, .. } if p == pos(1, 29)));
    }

    #[test]
    fn undeclared_variable_is_reported_at_its_use() {
        let err = parse("var x in 1..3; constraint x != z;").unwrap_err();
        let ModelError::UndeclaredVariable { name, pos: p } = err else {
            panic!("expected UndeclaredVariable")
        };
        assert_eq!(name, "z");
        assert_eq!(p, pos(1, 32));
    }

    #[test]
    fn duplicate_names_are_errors() {
        let err = parse("var x in 1..2; var x in 3..4;").unwrap_err();
        assert!(matches!(err, ModelError::DuplicateName { pos: p, .. } if p == pos(1, 20)));

        let err = parse("var x in 1..2; var y in 1..2; constraint alldiff(x, y, x);").unwrap_err();
        assert!(matches!(err, ModelError::DuplicateName { pos: p, .. } if p == pos(1, 56)));
    }

    #[test]
    fn table_tuple_arity_is_checked() {
        let err = parse("var x in 1..2; var y in 1..2; constraint table(x, y) in {(1, 2), (3,)};")
            .unwrap_err();
        // `(3,)` is a syntax error before arity is even considered.
        assert!(matches!(err, ModelError::Syntax { .. }));

        let err =
            parse("var x in 1..2; var y in 1..2; constraint table(x, y) in {(1, 2), (3)};").unwrap_err();
        let ModelError::ArityMismatch { pos: p, expected, got } = err else {
            panic!("expected ArityMismatch")
        };
        assert_eq!((expected, got), (2, 1));
        assert_eq!(p, pos(1, 66));
    }

    #[test]
    fn alldiff_needs_two_names() {
        let err = parse("var x in 1..2; constraint alldiff(x);").unwrap_err();
        assert!(matches!(err, ModelError::Syntax { pos: p, .. } if p == pos(1, 36)));
    }

    #[test]
    fn print_then_reparse_is_identity() {
        let text = concat!(
            "var x in 1..3, 7;\n",
            "var y in -5..-1;\n",
            "var z in {1, 3}, 5;\n",
            "constraint x != y - 2;\n",
            "constraint alldiff(x, y, z);\n",
            "constraint table(x, z) in {(1, 5), (3, 1)};\n",
        );
        let first = parse(text).unwrap();
        let second = parse(&first.to_string()).unwrap();
        assert_eq!(first, second);
    }
}
