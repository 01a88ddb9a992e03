//! Recursive-descent parser for right-hand sides.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' exponent)?
//! exponent := ['-' | '+'] INT | '(' ['-' | '+'] INT ')'
//! atom   := NUMBER ['i'] | 'i' | 'w' | 'z' | 'rad' '(' INT ',' expr ')' | '(' expr ')'
//! ```

use num_complex::Complex64;
use thiserror::Error;

use super::{Node, Radical};
use crate::poly::BivariatePoly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at position {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { position: usize, name: String },
    #[error("rad index must be ≥ 2 (got {index} at position {position})")]
    RadIndex { position: usize, index: i64 },
    #[error("exponent must be an integer (at position {position})")]
    NonIntegerExponent { position: usize },
    #[error("non-polynomial radicand at position {position}")]
    NonPolynomialRadicand { position: usize },
    #[error("radicand is identically zero at position {position}")]
    ZeroRadicand { position: usize },
    #[error("non-polynomial denominator at position {position}")]
    NonPolynomialDenominator { position: usize },
    #[error("division by zero at position {position}")]
    ZeroDenominator { position: usize },
    #[error("expected a constant, found an expression depending on w, z or radicals")]
    NotConstant,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num { value: f64, imag: bool, integer: bool },
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
            Tok::Num { value, imag, .. } => format!("number `{value}{}`", if *imag { "i" } else { "" }),
            Tok::Ident(s) => format!("`{s}`"),
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

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match ch {
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
            out.push((start, t));
            i += 1;
            continue;
        }
        if ch.is_ascii_digit() || ch == '.' {
            let mut integer = true;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                integer = false;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    integer = false;
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lexeme = &text[start..i];
            let value: f64 = lexeme.parse().map_err(|_| ParseError::Syntax {
                position: start,
                expected: "a number".into(),
                found: format!("`{lexeme}`"),
            })?;
            let imag = i < bytes.len()
                && bytes[i] == b'i'
                && !bytes
                    .get(i + 1)
                    .map_or(false, |b| b.is_ascii_alphanumeric() || *b == b'_');
            if imag {
                i += 1;
            }
            out.push((start, Tok::Num { value, imag, integer: integer && !imag }));
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
            continue;
        }
        // multi-byte minus sign
        if text[start..].starts_with('−') {
            out.push((start, Tok::Minus));
            i += '−'.len_utf8();
            continue;
        }
        let found = text[start..].chars().next().unwrap_or(' ');
        return Err(ParseError::Syntax {
            position: start,
            expected: "an operator, number, variable or parenthesis".into(),
            found: format!("`{found}`"),
        });
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

pub(super) struct Parsed {
    pub root: Node,
    pub radicals: Vec<Radical>,
    pub denominators: Vec<BivariatePoly>,
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    radicals: Vec<Radical>,
    denominators: Vec<BivariatePoly>,
}

pub(super) fn parse(text: &str) -> Result<Parsed, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        radicals: Vec::new(),
        denominators: Vec::new(),
    };
    let root = p.expr()?;
    p.expect(&Tok::End, "an operator or end of input")?;
    Ok(Parsed {
        root,
        radicals: p.radicals,
        denominators: p.denominators,
    })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn position(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            position: self.position(),
            expected: expected.into(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: &Tok, expected: &str) -> Result<(), ParseError> {
        if self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    let at = self.position();
                    let den = self.unary()?;
                    self.register_denominator(&den, at)?;
                    lhs = Node::Div(Box::new(lhs), Box::new(den));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let at = self.position();
        let base = self.atom()?;
        if self.peek() != &Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exp = self.exponent()?;
        if exp < 0 {
            self.register_denominator(&base, at)?;
        }
        Ok(Node::Pow(Box::new(base), exp))
    }

    fn signed_int(&mut self) -> Result<i64, ParseError> {
        let mut sign = 1;
        match self.peek() {
            Tok::Minus => {
                self.bump();
                sign = -1;
            }
            Tok::Plus => {
                self.bump();
            }
            _ => {}
        }
        let at = self.position();
        match self.bump().1 {
            Tok::Num { value, integer: true, .. } if value <= i32::MAX as f64 => Ok(sign * value as i64),
            Tok::Num { .. } => Err(ParseError::NonIntegerExponent { position: at }),
            other => Err(ParseError::Syntax {
                position: at,
                expected: "an integer".into(),
                found: other.describe(),
            }),
        }
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let at = self.position();
        let value = if self.peek() == &Tok::LParen {
            self.bump();
            let v = self.signed_int()?;
            self.expect(&Tok::RParen, "`)`")?;
            v
        } else {
            self.signed_int()?
        };
        i32::try_from(value).map_err(|_| ParseError::NonIntegerExponent { position: at })
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let at = self.position();
        match self.peek().clone() {
            Tok::Num { value, imag, .. } => {
                self.bump();
                Ok(Node::Const(if imag {
                    Complex64::new(0.0, value)
                } else {
                    Complex64::new(value, 0.0)
                }))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "w" => Ok(Node::W),
                    "z" => Ok(Node::Z),
                    "i" => Ok(Node::Const(Complex64::new(0.0, 1.0))),
                    "rad" => self.radical(),
                    _ => Err(ParseError::UnknownIdentifier { position: at, name }),
                }
            }
            _ => Err(self.error("a number, `w`, `z`, `i`, `rad(` or `(`")),
        }
    }

    fn radical(&mut self) -> Result<Node, ParseError> {
        self.expect(&Tok::LParen, "`(` after `rad`")?;
        let at = self.position();
        let index = match self.bump().1 {
            Tok::Num { value, integer: true, .. } => value as i64,
            other => {
                return Err(ParseError::Syntax {
                    position: at,
                    expected: "an integer rad index".into(),
                    found: other.describe(),
                })
            }
        };
        if index < 2 || index > u32::MAX as i64 {
            return Err(ParseError::RadIndex { position: at, index });
        }
        self.expect(&Tok::Comma, "`,` after the rad index")?;
        let rat = self.position();
        let radicand = self.expr()?;
        self.expect(&Tok::RParen, "`)` closing rad")?;
        let poly = to_poly(&radicand).ok_or(ParseError::NonPolynomialRadicand { position: rat })?;
        if poly.is_zero() {
            return Err(ParseError::ZeroRadicand { position: rat });
        }
        let factors = multiplicative_factors(&radicand);
        self.radicals.push(Radical {
            index: index as u32,
            radicand,
            poly,
            factors,
        });
        Ok(Node::Rad(self.radicals.len() - 1))
    }

    fn register_denominator(&mut self, den: &Node, at: usize) -> Result<(), ParseError> {
        let comps = denominator_components(den, &self.radicals, at)?;
        self.denominators.extend(comps);
        Ok(())
    }
}

/// The polynomial a radical-free node denotes, if any.
pub(super) fn to_poly(node: &Node) -> Option<BivariatePoly> {
    Some(match node {
        Node::Const(c) => BivariatePoly::constant(*c),
        Node::W => BivariatePoly::u(),
        Node::Z => BivariatePoly::v(),
        Node::Neg(a) => -&to_poly(a)?,
        Node::Add(a, b) => &to_poly(a)? + &to_poly(b)?,
        Node::Sub(a, b) => &to_poly(a)? - &to_poly(b)?,
        Node::Mul(a, b) => &to_poly(a)? * &to_poly(b)?,
        Node::Div(a, b) => {
            let d = to_poly(b)?;
            if d.is_zero() || !d.is_constant() {
                return None;
            }
            to_poly(a)?.scale(d.coefficient(0, 0).inv())
        }
        Node::Pow(a, n) => {
            let base = to_poly(a)?;
            if *n >= 0 {
                base.powi(*n as u32)
            } else if base.is_constant() && !base.is_zero() {
                BivariatePoly::constant(base.coefficient(0, 0).powi(*n))
            } else {
                return None;
            }
        }
        Node::Rad(_) => return None,
    })
}

/// Non-constant polynomial factors visible in the product structure of a
/// polynomial node; `(z + w^2)^3` yields `z + w^2` once.
fn multiplicative_factors(node: &Node) -> Vec<BivariatePoly> {
    match node {
        Node::Mul(a, b) => {
            let mut f = multiplicative_factors(a);
            f.extend(multiplicative_factors(b));
            f
        }
        Node::Neg(a) => multiplicative_factors(a),
        Node::Pow(_, 0) => Vec::new(),
        Node::Pow(a, n) if *n > 0 => multiplicative_factors(a),
        Node::Div(a, b) if to_poly(b).map_or(false, |d| d.is_constant()) => multiplicative_factors(a),
        _ => match to_poly(node) {
            Some(p) if !p.is_constant() => vec![p],
            _ => Vec::new(),
        },
    }
}

/// Components of the zero set of a denominator, which must be a product or
/// quotient of polynomials, radicals and integer powers.
fn denominator_components(
    node: &Node,
    radicals: &[Radical],
    at: usize,
) -> Result<Vec<BivariatePoly>, ParseError> {
    match node {
        Node::Const(c) => {
            if c.norm() == 0.0 {
                Err(ParseError::ZeroDenominator { position: at })
            } else {
                Ok(Vec::new())
            }
        }
        Node::Neg(a) | Node::Pow(a, _) => denominator_components(a, radicals, at),
        Node::Mul(a, b) | Node::Div(a, b) => {
            let mut f = denominator_components(a, radicals, at)?;
            f.extend(denominator_components(b, radicals, at)?);
            Ok(f)
        }
        Node::Rad(id) => Ok(radicals[*id].factors.clone()),
        Node::W | Node::Z | Node::Add(..) | Node::Sub(..) => {
            let p = to_poly(node).ok_or(ParseError::NonPolynomialDenominator { position: at })?;
            if p.is_zero() {
                Err(ParseError::ZeroDenominator { position: at })
            } else if p.is_constant() {
                Ok(Vec::new())
            } else {
                Ok(vec![p])
            }
        }
    }
}
