//! Concrete formula syntax.
//!
//! ```text
//! formula  := or ('->' formula)?            right associative
//! or       := and ('|' and)*
//! and      := until ('&' until)*
//! until    := unary ('U' until)?            right associative
//! unary    := ('!' | 'F' | 'G' | 'X') unary | primary
//! primary  := 'true' | '(' formula ')' | '[' ident ']' cmp threshold
//! cmp      := '<' | '<=' | '>' | '>='
//! threshold := number | 'y' digits          variables are one-based
//! ```

use std::fmt;

use thiserror::Error;

use super::ast::{CmpOp, Formula, Threshold};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    /// Byte offset into the input where the problem starts.
    pub position: usize,
    pub message: String,
}

fn err<T>(position: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { position, message: message.into() })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Cmp(CmpOp),
    Number(f64),
    Ident(String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Cmp(op) => write!(f, "`{}`", op.symbol()),
            Tok::Number(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '(' => toks.push((start, Tok::LParen)),
            ')' => toks.push((start, Tok::RParen)),
            '[' => toks.push((start, Tok::LBracket)),
            ']' => toks.push((start, Tok::RBracket)),
            '!' => toks.push((start, Tok::Bang)),
            '&' => toks.push((start, Tok::Amp)),
            '|' => toks.push((start, Tok::Pipe)),
            '<' | '>' => {
                let eq = bytes.get(i + 1) == Some(&b'=');
                let op = match (c, eq) {
                    ('<', false) => CmpOp::Lt,
                    ('<', true) => CmpOp::Le,
                    ('>', false) => CmpOp::Gt,
                    ('>', true) => CmpOp::Ge,
                    _ => unreachable!(),
                };
                toks.push((start, Tok::Cmp(op)));
                if eq {
                    i += 1;
                }
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((start, Tok::Arrow));
                    i += 1;
                } else {
                    let (tok, len) = lex_number(text, i)?;
                    toks.push((start, tok));
                    i += len;
                    continue;
                }
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let (tok, len) = lex_number(text, i)?;
                toks.push((start, tok));
                i += len;
                continue;
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < bytes.len()
                    && ((bytes[j] as char).is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                toks.push((start, Tok::Ident(text[i..j].to_string())));
                i = j;
                continue;
            }
            '=' => {
                return err(start, "unexpected `=`, comparisons are <, <=, > and >=".to_string())
            }
            _ => return err(start, format!("unexpected character `{c}`")),
        }
        i += 1;
    }
    toks.push((text.len(), Tok::Eof));
    Ok(toks)
}

fn lex_number(text: &str, start: usize) -> Result<(Tok, usize), ParseError> {
    let bytes = text.as_bytes();
    let mut j = start;
    if bytes.get(j) == Some(&b'-') {
        j += 1;
    }
    while j < bytes.len() && ((bytes[j] as char).is_ascii_digit() || bytes[j] == b'.') {
        j += 1;
    }
    if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
        let mut k = j + 1;
        if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
            k += 1;
        }
        if k < bytes.len() && (bytes[k] as char).is_ascii_digit() {
            j = k;
            while j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                j += 1;
            }
        }
    }
    match text[start..j].parse::<f64>() {
        Ok(v) => Ok((Tok::Number(v), j - start)),
        Err(_) => err(start, format!("invalid number `{}`", &text[start..j])),
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            err(self.pos(), format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.formula()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.and()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.until()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if matches!(self.peek(), Tok::Ident(s) if s == "U") {
            self.bump();
            let rhs = self.until()?;
            return Ok(Formula::Until(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Tok::Bang) {
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        if let Tok::Ident(s) = self.peek() {
            let wrap = match s.as_str() {
                "F" => Some(Formula::Finally as fn(Box<Formula>) -> Formula),
                "G" => Some(Formula::Globally as fn(Box<Formula>) -> Formula),
                "X" => Some(Formula::Next as fn(Box<Formula>) -> Formula),
                _ => None,
            };
            if let Some(wrap) = wrap {
                self.bump();
                return Ok(wrap(Box::new(self.unary()?)));
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let inner = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::LBracket => {
                self.bump();
                let observable = match self.peek().clone() {
                    Tok::Ident(name) => {
                        self.bump();
                        name
                    }
                    other => return err(self.pos(), format!("expected observable name, found {other}")),
                };
                self.expect(Tok::RBracket)?;
                let op = match self.peek() {
                    Tok::Cmp(op) => {
                        let op = *op;
                        self.bump();
                        op
                    }
                    other => {
                        return err(
                            self.pos(),
                            format!("expected comparison operator, found {other}"),
                        )
                    }
                };
                let threshold = self.threshold()?;
                Ok(Formula::Atom { observable, op, threshold })
            }
            other => err(self.pos(), format!("expected formula, found {other}")),
        }
    }

    fn threshold(&mut self) -> Result<Threshold, ParseError> {
        match self.peek().clone() {
            Tok::Number(v) => {
                self.bump();
                Ok(Threshold::Const(v))
            }
            Tok::Ident(s) => {
                if let Some(digits) = s.strip_prefix('y') {
                    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                        let n: usize = digits.parse().map_err(|_| ParseError {
                            position: self.pos(),
                            message: format!("variable index out of range in `{s}`"),
                        })?;
                        if n == 0 {
                            return err(self.pos(), "variable indices start at y1");
                        }
                        self.bump();
                        return Ok(Threshold::Var(n - 1));
                    }
                }
                err(self.pos(), format!("expected number or variable, found `{s}`"))
            }
            other => err(self.pos(), format!("expected number or variable, found {other}")),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0 };
    let f = p.formula()?;
    if p.peek() != &Tok::Eof {
        return err(p.pos(), format!("unexpected trailing input, found {}", p.peek()));
    }
    Ok(f)
}
