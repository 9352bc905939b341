//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)* ;
//! term   := factor (('*'|'/') factor)* ;
//! factor := atom ('^' integer)? ;
//! atom   := number | ident | '(' expr ')' | 'sqrt' '(' expr ')' | '-' factor ;
//! ```
//!
//! Unary minus takes a whole factor, so `-x^2` is `-(x^2)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use super::Expr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Ident(i) => format!("identifier `{i}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexed {
    toks: Vec<(Tok, usize, usize)>,
}

fn lex(text: &str) -> Result<Lexed, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = single {
            toks.push((t, tl, tc));
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let frac_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i == frac_start {
                    return Err(ParseError {
                        line: tl,
                        column: col + (i - start),
                        message: "expected digits after decimal point".into(),
                    });
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            toks.push((Tok::Num(s), tl, tc));
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            toks.push((Tok::Ident(s), tl, tc));
            continue;
        }
        return Err(ParseError {
            line: tl,
            column: tc,
            message: format!("unknown token `{c}`"),
        });
    }
    toks.push((Tok::End, line, col));
    Ok(Lexed { toks })
}

/// Parses a decimal literal such as `-2`, `0.125` or `3.5` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let value = decimal_to_rational(body)?;
    Some(if neg { -value } else { value })
}

fn decimal_to_rational(body: &str) -> Option<BigRational> {
    let (int_part, frac_part) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if int_part.is_empty() || !int_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if !frac_part.chars().all(|c| c.is_ascii_digit()) || (body.contains('.') && frac_part.is_empty()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Some(BigRational::new(numer, denom))
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (_, line, column) = self.toks[self.pos];
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", t.describe(), self.peek().describe())))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(-self.term()?);
                }
                _ => break,
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    factors.push(self.factor()?);
                }
                Tok::Slash => {
                    self.bump();
                    factors.push(self.factor()?.pow(-1));
                }
                _ => break,
            }
        }
        Ok(Expr::product(factors))
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let k = self.exponent()?;
        Ok(base.pow(k))
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let parenthesized = *self.peek() == Tok::LParen;
        if parenthesized {
            self.bump();
        }
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        let k = match self.peek().clone() {
            Tok::Num(n) if !n.contains('.') => {
                let v: i64 = n.parse().map_err(|_| self.error("exponent out of range"))?;
                self.bump();
                v
            }
            other => return Err(self.error(format!("expected integer exponent, found {}", other.describe()))),
        };
        if parenthesized {
            self.expect(Tok::RParen)?;
        }
        Ok(if negative { -k } else { k })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                let value = decimal_to_rational(&n).ok_or_else(|| self.error(format!("invalid number `{n}`")))?;
                self.bump();
                Ok(Expr::Const(value))
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "sqrt" {
                    self.expect(Tok::LParen)?;
                    let inner = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(inner.sqrt())
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Minus => {
                self.bump();
                Ok(-self.factor()?)
            }
            other => Err(self.error(format!("unexpected {}", other.describe()))),
        }
    }
}

/// Parses a single expression.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let lexed = lex(text)?;
    let mut p = Parser {
        toks: lexed.toks,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(format!("unexpected {} after expression", p.peek().describe())));
    }
    Ok(e)
}

/// Parses a comma-separated list of expressions, optionally wrapped in one
/// pair of parentheses: `(a, b, c)`, `a, b` and `a` are all accepted.
pub fn parse_tuple(text: &str) -> Result<Vec<Expr>, ParseError> {
    let lexed = lex(text)?;
    let toks = lexed.toks;
    let wrapped = toks.len() >= 3 && toks[0].0 == Tok::LParen && closing_paren(&toks, 0) == Some(toks.len() - 2);
    let mut p = Parser { toks, pos: 0 };
    if wrapped {
        p.bump();
    }
    let mut items = vec![p.expr()?];
    while *p.peek() == Tok::Comma {
        p.bump();
        items.push(p.expr()?);
    }
    if wrapped {
        p.expect(Tok::RParen)?;
    }
    if *p.peek() != Tok::End {
        return Err(p.error(format!("unexpected {} in list", p.peek().describe())));
    }
    Ok(items)
}

fn closing_paren(toks: &[(Tok, usize, usize)], open: usize) -> Option<usize> {
    let mut depth = 0i32;
    for (i, (t, _, _)) in toks.iter().enumerate().skip(open) {
        match t {
            Tok::LParen => depth += 1,
            Tok::RParen => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}
