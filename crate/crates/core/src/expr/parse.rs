use thiserror::Error;

use super::{Expr, Func};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("syntax error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

pub(crate) struct Parser<'a> {
    src: &'a [u8],
    pub(crate) pos: usize,
    base: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &'a str, base: usize) -> Self {
        Parser { src: src.as_bytes(), pos: 0, base }
    }

    pub(crate) fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.base + self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && matches!(self.src[self.pos], b' ' | b'\t' | b'\r') {
            self.pos += 1;
        }
    }

    pub(crate) fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    pub(crate) fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    pub(crate) fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        match self.src.get(self.pos) {
            Some(c) if c.is_ascii_alphabetic() || *c == b'_' => {}
            _ => return None,
        }
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < s.len() && (s[self.pos] == b'+' || s[self.pos] == b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < s.len() && s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(x) => Ok(x),
            Err(_) => {
                self.pos = start;
                self.err(format!("bad number '{text}'"))
            }
        }
    }

    fn integer(&mut self) -> Result<i32, ParseError> {
        let neg = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<i32>() {
            Ok(v) => Ok(if neg { -v } else { v }),
            Err(_) => self.err("expected integer exponent"),
        }
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = lhs.add(self.term()?);
            } else if self.eat(b'-') {
                lhs = lhs.sub(self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = lhs.mul(self.unary()?);
            } else if self.eat(b'/') {
                lhs = lhs.div(self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            Ok(self.unary()?.neg())
        } else {
            self.primary()
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => self.err("unexpected end of input"),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Num(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                let name = self.ident().unwrap_or_default();
                if self.peek() == Some(b'(') {
                    self.pos += 1;
                    let e = if name == "pow" {
                        let base = self.expr()?;
                        self.expect(b',')?;
                        let p = self.integer()?;
                        Expr::Pow(Box::new(base), p)
                    } else if let Some(f) = Func::from_name(&name) {
                        Expr::Call(f, Box::new(self.expr()?))
                    } else {
                        self.pos = start;
                        return self.err(format!("unknown function '{name}'"));
                    };
                    self.expect(b')')?;
                    return Ok(e);
                }
                if name == "pow" || Func::from_name(&name).is_some() {
                    self.pos = start;
                    return self.err(format!("function '{name}' needs an argument list"));
                }
                Ok(resolve_ident(&name))
            }
            Some(c) => self.err(format!("unexpected character '{}'", c as char)),
        }
    }
}

fn coord_index(rest: &str) -> Option<usize> {
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) || rest.starts_with('0') {
        return None;
    }
    rest.parse::<usize>().ok().map(|k| k - 1)
}

fn resolve_ident(name: &str) -> Expr {
    if name == "i" {
        return Expr::I;
    }
    if let Some(rest) = name.strip_prefix("zb") {
        if let Some(k) = coord_index(rest) {
            return Expr::zb(k);
        }
    }
    if let Some(rest) = name.strip_prefix('z') {
        if let Some(k) = coord_index(rest) {
            return Expr::z(k);
        }
    }
    Expr::Param(name.to_string())
}

/// Parse a single expression.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src, 0);
    let e = p.expr()?;
    if !p.at_end() {
        return p.err("trailing input");
    }
    Ok(e)
}
