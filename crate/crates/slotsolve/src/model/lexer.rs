//! Tokenizer for the model language. Tracks 1-based line/column positions;
//! `#` starts a comment running to end of line. `-` is its own token — the
//! parser decides whether it negates a literal or separates an offset.

use std::fmt;
use std::iter::Peekable;
use std::str::Chars;

use super::ast::Pos;
use super::ModelError;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TokKind {
    Ident(String),
    Int(i64),
    Var,
    In,
    Constraint,
    Alldiff,
    Table,
    Semi,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    DotDot,
    Neq,
    Plus,
    Minus,
    Eof,
}

impl fmt::Display for TokKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokKind::Ident(s) => write!(f, "`{s}`"),
            TokKind::Int(v) => write!(f, "`{v}`"),
            TokKind::Var => write!(f, "`var`"),
            TokKind::In => write!(f, "`in`"),
            TokKind::Constraint => write!(f, "`constraint`"),
            TokKind::Alldiff => write!(f, "`alldiff`"),
            TokKind::Table => write!(f, "`table`"),
            TokKind::Semi => write!(f, "`;`"),
            TokKind::Comma => write!(f, "`,`"),
            TokKind::LParen => write!(f, "`(`"),
            TokKind::RParen => write!(f, "`)`"),
            TokKind::LBrace => write!(f, "`{{`"),
            TokKind::RBrace => write!(f, "`}}`"),
            TokKind::DotDot => write!(f, "`..`"),
            TokKind::Neq => write!(f, "`!=`"),
            TokKind::Plus => write!(f, "`+`"),
            TokKind::Minus => write!(f, "`-`"),
            TokKind::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Token {
    pub kind: TokKind,
    pub pos: Pos,
}

struct Lexer<'a> {
    chars: Peekable<Chars<'a>>,
    line: u32,
    col: u32,
}

impl Lexer<'_> {
    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, pos: Pos, found: impl Into<String>, expected: &[&str]) -> ModelError {
        ModelError::Syntax {
            pos,
            found: found.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

pub fn lex(text: &str) -> Result<Vec<Token>, ModelError> {
    let mut lx = Lexer { chars: text.chars().peekable(), line: 1, col: 1 };
    let mut out = Vec::new();
    while let Some(&c) = lx.chars.peek() {
        let pos = lx.pos();
        let kind = match c {
            c if c.is_whitespace() => {
                lx.bump();
                continue;
            }
            '#' => {
                while lx.chars.peek().is_some_and(|&c| c != '\n') {
                    lx.bump();
                }
                continue;
            }
            ';' => {
                lx.bump();
                TokKind::Semi
            }
            ',' => {
                lx.bump();
                TokKind::Comma
            }
            '(' => {
                lx.bump();
                TokKind::LParen
            }
            ')' => {
                lx.bump();
                TokKind::RParen
            }
            '{' => {
                lx.bump();
                TokKind::LBrace
            }
            '}' => {
                lx.bump();
                TokKind::RBrace
            }
            '+' => {
                lx.bump();
                TokKind::Plus
            }
            '-' => {
                lx.bump();
                TokKind::Minus
            }
            '.' => {
                lx.bump();
                if lx.chars.peek() == Some(&'.') {
                    lx.bump();
                    TokKind::DotDot
                } else {
                    return Err(lx.error(pos, "`.`", &["`..`"]));
                }
            }
            '!' => {
                lx.bump();
                if lx.chars.peek() == Some(&'=') {
                    lx.bump();
                    TokKind::Neq
                } else {
                    return Err(lx.error(pos, "`!`", &["`!=`"]));
                }
            }
            '0'..='9' => {
                let mut digits = String::new();
                while lx.chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                    digits.push(lx.bump().expect("peeked"));
                }
                let v: i64 = digits
                    .parse()
                    .map_err(|_| lx.error(pos, format!("`{digits}`"), &["a 64-bit integer"]))?;
                TokKind::Int(v)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while lx.chars.peek().is_some_and(|&c| c.is_ascii_alphanumeric() || c == '_') {
                    word.push(lx.bump().expect("peeked"));
                }
                match word.as_str() {
                    "var" => TokKind::Var,
                    "in" => TokKind::In,
                    "constraint" => TokKind::Constraint,
                    "alldiff" => TokKind::Alldiff,
                    "table" => TokKind::Table,
                    _ => TokKind::Ident(word),
                }
            }
            other => return Err(lx.error(pos, format!("`{other}`"), &["a token"])),
        };
        out.push(Token { kind, pos });
    }
    out.push(Token { kind: TokKind::Eof, pos: lx.pos() });
    Ok(out)
}
