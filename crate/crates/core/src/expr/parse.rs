//! Text DSL for function expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := ['-'] factor (('*' | '/') factor)*
//! factor  := primary ['^' number]
//! primary := number | var | '(' expr ')'
//!          | 'abs(' expr ')' | 'norm' ['(' vars ')']
//!          | ('sin' | 'cos' | 'atan') '(' expr ')'
//!          | 'ind' ('[' | '(') bound ',' bound (']' | ')') | 'ind{' [conds] '}'
//!          | 'max(' expr (',' expr)* ')'
//!          | 'piecewise{' (conds ':' expr ';')+ '}'
//!          | 'compose(' expr ',' expr ')'
//!          | 'scale(' expr ',' expr ')'
//! conds   := 'true' | rel ('&' rel)*
//! rel     := linear (('<' | '<=' | '>' | '>=') linear)+
//! ```
//!
//! Variables are `x` and `y` (coordinates 0 and 1); `u` is an alias for the
//! single variable of the outer function in `compose(outer, inner)`.
//!
//! Polynomial pieces of degree at most two become affine or quadratic atoms.
//! Polynomial terms of one sum merge into a single atom unless the term
//! contains a parenthesized group, which keeps it as its own summand:
//! `-0.5*x^2 - x^2` is one quadratic, `-(1/2)*x^2 + (-(x^2))` a sum of two.

use super::{BoundedKind, ExprError, FuncExpr, Halfspace, Region, RegionPartition};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Dimension,
    Partition,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Lt,
    Le,
    Gt,
    Ge,
    Amp,
    Eof,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s = &text[start..i];
            let v = s.parse::<f64>().map_err(|_| ParseError {
                kind: ParseErrorKind::Syntax,
                position: start,
                message: format!("malformed number `{s}`"),
            })?;
            out.push((Tok::Num(v), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        }
        let next = bytes.get(i + 1).map(|b| *b as char);
        let (tok, len) = match (c, next) {
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (',', _) => (Tok::Comma, 1),
            (':', _) => (Tok::Colon, 1),
            (';', _) => (Tok::Semi, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('^', _) => (Tok::Caret, 1),
            ('&', _) => (Tok::Amp, 1),
            _ => {
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax,
                    position: start,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push((tok, start));
        i += len;
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

/// Polynomial of degree at most two in two variables.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Poly {
    c: f64,
    lin: [f64; 2],
    /// Coefficients of `x^2`, `x*y`, `y^2`.
    quad: [f64; 3],
}

impl Poly {
    fn constant(c: f64) -> Self {
        Poly { c, ..Default::default() }
    }

    fn var(i: usize) -> Self {
        let mut p = Poly::default();
        p.lin[i] = 1.0;
        p
    }

    fn degree(&self) -> usize {
        if self.quad.iter().any(|q| *q != 0.0) {
            2
        } else if self.lin.iter().any(|a| *a != 0.0) {
            1
        } else {
            0
        }
    }

    fn as_constant(&self) -> Option<f64> {
        (self.degree() == 0).then_some(self.c)
    }

    fn add(&self, o: &Poly) -> Poly {
        Poly {
            c: self.c + o.c,
            lin: [self.lin[0] + o.lin[0], self.lin[1] + o.lin[1]],
            quad: [self.quad[0] + o.quad[0], self.quad[1] + o.quad[1], self.quad[2] + o.quad[2]],
        }
    }

    fn scaled(&self, k: f64) -> Poly {
        Poly {
            c: k * self.c,
            lin: [k * self.lin[0], k * self.lin[1]],
            quad: [k * self.quad[0], k * self.quad[1], k * self.quad[2]],
        }
    }

    fn mul(&self, o: &Poly) -> Option<Poly> {
        if let Some(k) = self.as_constant() {
            return Some(o.scaled(k));
        }
        if let Some(k) = o.as_constant() {
            return Some(self.scaled(k));
        }
        if self.degree() > 1 || o.degree() > 1 {
            return None;
        }
        let (a, b) = (self, o);
        Some(Poly {
            c: a.c * b.c,
            lin: [a.c * b.lin[0] + b.c * a.lin[0], a.c * b.lin[1] + b.c * a.lin[1]],
            quad: [
                a.lin[0] * b.lin[0],
                a.lin[0] * b.lin[1] + a.lin[1] * b.lin[0],
                a.lin[1] * b.lin[1],
            ],
        })
    }

    /// The single variable `x_i` with unit coefficient, if that is what this is.
    fn as_var(&self) -> Option<usize> {
        if self.c != 0.0 || self.quad.iter().any(|q| *q != 0.0) {
            return None;
        }
        match self.lin {
            [1.0, 0.0] => Some(0),
            [0.0, 1.0] => Some(1),
            _ => None,
        }
    }

    fn into_expr(self) -> FuncExpr {
        match self.degree() {
            0 => FuncExpr::constant(self.c),
            1 => FuncExpr::affine(self.lin.to_vec(), self.c),
            _ => {
                let matrix = vec![
                    vec![2.0 * self.quad[0], self.quad[1]],
                    vec![self.quad[1], 2.0 * self.quad[2]],
                ];
                FuncExpr::quadratic(matrix, self.lin.to_vec(), self.c)
                    .expect("matrix built symmetric and finite")
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Lowered {
    Poly(Poly),
    Node(FuncExpr),
}

impl Lowered {
    fn into_expr(self) -> FuncExpr {
        match self {
            Lowered::Poly(p) => p.into_expr(),
            Lowered::Node(f) => f,
        }
    }
}

enum Primary {
    Var(usize),
    AbsVar(usize),
    Other(Lowered, bool),
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    /// Number of variables allowed in the current context.
    dims: Vec<usize>,
    /// Dimension of the whole expression, fixed by a pre-scan.
    global_dim: usize,
    _text: &'a str,
}

/// Parses DSL text into an expression.
pub fn parse_expr(text: &str) -> Result<FuncExpr, ParseError> {
    let toks = lex(text)?;
    let global_dim = if toks.iter().any(|(t, _)| matches!(t, Tok::Ident(s) if s == "y")) {
        2
    } else {
        1
    };
    let mut p = Parser { toks, pos: 0, dims: vec![global_dim], global_dim, _text: text };
    let lowered = p.expr()?;
    p.expect(&Tok::Eof, "end of input")?;
    Ok(lowered.into_expr())
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn at(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err(&self, kind: ParseErrorKind, position: usize, message: impl Into<String>) -> ParseError {
        ParseError { kind, position, message: message.into() }
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        self.err(ParseErrorKind::Syntax, self.at(), message)
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.syntax(format!("expected {what}, found {:?}", self.peek())))
        }
    }

    fn invalid(&self, position: usize, e: ExprError) -> ParseError {
        let kind = match e {
            ExprError::Partition(_) | ExprError::PieceCount { .. } => ParseErrorKind::Partition,
            ExprError::OuterDimension(_) => ParseErrorKind::Dimension,
            _ => ParseErrorKind::Invalid,
        };
        self.err(kind, position, e.to_string())
    }

    fn expr(&mut self) -> Result<Lowered, ParseError> {
        let mut terms: Vec<(Lowered, bool)> = Vec::new();
        let first = self.term()?;
        terms.push(first);
        loop {
            let neg = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            let at = self.at();
            self.bump();
            let (t, grouped) = self.term()?;
            let t = if neg { self.negate(t, at)? } else { t };
            terms.push((t, grouped));
        }
        Ok(merge_terms(terms))
    }

    fn negate(&self, t: Lowered, at: usize) -> Result<Lowered, ParseError> {
        match t {
            Lowered::Poly(p) => Ok(Lowered::Poly(p.scaled(-1.0))),
            Lowered::Node(f) => f.negated().map(Lowered::Node).ok_or_else(|| {
                self.err(
                    ParseErrorKind::Invalid,
                    at,
                    "cannot negate this expression; write compose(-u, ...) instead",
                )
            }),
        }
    }

    fn term(&mut self) -> Result<(Lowered, bool), ParseError> {
        let start = self.at();
        let neg = self.eat(&Tok::Minus);
        let (mut acc, mut grouped) = self.factor()?;
        loop {
            let div = match self.peek() {
                Tok::Star => false,
                Tok::Slash => true,
                _ => break,
            };
            let at = self.at();
            self.bump();
            let (rhs, g) = self.factor()?;
            grouped |= g;
            acc = if div {
                let k = match rhs {
                    Lowered::Poly(p) => p.as_constant(),
                    Lowered::Node(_) => None,
                }
                .filter(|k| *k != 0.0)
                .ok_or_else(|| self.err(ParseErrorKind::Invalid, at, "can only divide by a nonzero number"))?;
                self.multiply(acc, Lowered::Poly(Poly::constant(1.0 / k)), at)?
            } else {
                self.multiply(acc, rhs, at)?
            };
        }
        if neg {
            acc = self.negate(acc, start)?;
        }
        Ok((acc, grouped))
    }

    fn multiply(&self, a: Lowered, b: Lowered, at: usize) -> Result<Lowered, ParseError> {
        let bad = |msg: &str| self.err(ParseErrorKind::Invalid, at, msg.to_string());
        match (a, b) {
            (Lowered::Poly(p), Lowered::Poly(q)) => p
                .mul(&q)
                .map(Lowered::Poly)
                .ok_or_else(|| bad("polynomial degree above two; use x^k for higher powers")),
            (Lowered::Poly(p), Lowered::Node(f)) | (Lowered::Node(f), Lowered::Poly(p)) => {
                let k = p.as_constant().ok_or_else(|| bad("unsupported product of a variable and a function"))?;
                f.times(k)
                    .map(Lowered::Node)
                    .ok_or_else(|| bad("negative multiple of a composite expression; use compose(-u, ...)"))
            }
            (Lowered::Node(_), Lowered::Node(_)) => Err(bad("products of functions are not supported")),
        }
    }

    fn factor(&mut self) -> Result<(Lowered, bool), ParseError> {
        let primary = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(match primary {
                Primary::Var(i) => (Lowered::Poly(Poly::var(i)), false),
                Primary::AbsVar(i) => (Lowered::Node(self.abs_of_var(i)), false),
                Primary::Other(l, g) => (l, g),
            });
        }
        let at = self.at();
        self.bump();
        let p = match self.bump() {
            Tok::Num(v) => v,
            t => return Err(self.err(ParseErrorKind::Syntax, at, format!("expected exponent, found {t:?}"))),
        };
        let power_err = |e: ExprError| self.invalid(at, e);
        match primary {
            Primary::Var(i) => {
                if p.fract() != 0.0 {
                    return Err(self.err(ParseErrorKind::Invalid, at, "non-integer power of a variable; use abs(x)^p"));
                }
                Ok((
                    match p as i64 {
                        0 => Lowered::Poly(Poly::constant(1.0)),
                        1 => Lowered::Poly(Poly::var(i)),
                        2 => Lowered::Poly(Poly::var(i).mul(&Poly::var(i)).expect("degree two")),
                        k => Lowered::Node(FuncExpr::power(1.0, p, k % 2 == 1, i).map_err(power_err)?),
                    },
                    false,
                ))
            }
            Primary::AbsVar(i) => Ok((Lowered::Node(FuncExpr::power(1.0, p, false, i).map_err(power_err)?), false)),
            Primary::Other(Lowered::Poly(q), g) if q.as_constant().is_some() => {
                Ok((Lowered::Poly(Poly::constant(q.c.powf(p))), g))
            }
            Primary::Other(..) => Err(self.err(
                ParseErrorKind::Invalid,
                at,
                "powers apply to a variable, abs(var) or a number",
            )),
        }
    }

    fn abs_of_var(&self, i: usize) -> FuncExpr {
        if *self.dims.last().expect("context") == 1 {
            FuncExpr::abs_norm(1.0)
        } else {
            FuncExpr::power(1.0, 1.0, false, i).expect("valid exponent")
        }
    }

    fn variable(&self, name: &str, at: usize) -> Result<Option<usize>, ParseError> {
        let idx = match name {
            "x" | "u" => 0,
            "y" => 1,
            _ => return Ok(None),
        };
        if idx >= *self.dims.last().expect("context") {
            return Err(self.err(
                ParseErrorKind::Dimension,
                at,
                format!("variable `{name}` not available in a one-dimensional context"),
            ));
        }
        Ok(Some(idx))
    }

    fn primary(&mut self) -> Result<Primary, ParseError> {
        let at = self.at();
        match self.bump() {
            Tok::Num(v) => Ok(Primary::Other(Lowered::Poly(Poly::constant(v)), false)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Primary::Other(inner, true))
            }
            Tok::Ident(name) => {
                if let Some(i) = self.variable(&name, at)? {
                    return Ok(Primary::Var(i));
                }
                self.call(&name, at)
            }
            t => Err(self.err(ParseErrorKind::Syntax, at, format!("unexpected {t:?}"))),
        }
    }

    fn node(f: FuncExpr) -> Primary {
        Primary::Other(Lowered::Node(f), false)
    }

    fn call(&mut self, name: &str, at: usize) -> Result<Primary, ParseError> {
        match name {
            "abs" => {
                self.expect(&Tok::LParen, "`(`")?;
                let arg = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                if let Lowered::Poly(p) = &arg {
                    if let Some(i) = p.as_var() {
                        return Ok(Primary::AbsVar(i));
                    }
                }
                let f = FuncExpr::compose(FuncExpr::abs_norm(1.0), arg.into_expr())
                    .map_err(|e| self.invalid(at, e))?;
                Ok(Self::node(f))
            }
            "norm" => {
                if self.eat(&Tok::LParen) {
                    while !self.eat(&Tok::RParen) {
                        let vat = self.at();
                        match self.bump() {
                            Tok::Ident(v) if self.variable(&v, vat)?.is_some() => {}
                            Tok::Comma => {}
                            t => return Err(self.err(ParseErrorKind::Syntax, vat, format!("expected variable, found {t:?}"))),
                        }
                    }
                }
                Ok(Self::node(FuncExpr::abs_norm(1.0)))
            }
            "sin" | "cos" | "atan" => {
                let kind = match name {
                    "sin" => BoundedKind::Sin,
                    "cos" => BoundedKind::Cos,
                    _ => BoundedKind::Atan,
                };
                self.expect(&Tok::LParen, "`(`")?;
                let arg = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                if let Lowered::Poly(p) = &arg {
                    if let Some(i) = p.as_var() {
                        return Ok(Self::node(FuncExpr::bounded(kind, 1.0, i)));
                    }
                }
                let f = FuncExpr::compose(FuncExpr::bounded(kind, 1.0, 0), arg.into_expr())
                    .map_err(|e| self.invalid(at, e))?;
                Ok(Self::node(f))
            }
            "max" => {
                self.expect(&Tok::LParen, "`(`")?;
                let mut terms = vec![self.expr()?.into_expr()];
                while self.eat(&Tok::Comma) {
                    terms.push(self.expr()?.into_expr());
                }
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Self::node(FuncExpr::max(terms).map_err(|e| self.invalid(at, e))?))
            }
            "compose" => {
                self.expect(&Tok::LParen, "`(`")?;
                self.dims.push(1);
                let outer = self.expr();
                self.dims.pop();
                let outer = outer?.into_expr();
                self.expect(&Tok::Comma, "`,`")?;
                let inner = self.expr()?.into_expr();
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Self::node(FuncExpr::compose(outer, inner).map_err(|e| self.invalid(at, e))?))
            }
            "scale" => {
                self.expect(&Tok::LParen, "`(`")?;
                let kat = self.at();
                let k = match self.expr()? {
                    Lowered::Poly(p) => p.as_constant(),
                    Lowered::Node(_) => None,
                }
                .ok_or_else(|| self.err(ParseErrorKind::Invalid, kat, "scale factor must be a number"))?;
                self.expect(&Tok::Comma, "`,`")?;
                let inner = self.expr()?.into_expr();
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Self::node(FuncExpr::scale(k, inner).map_err(|e| self.invalid(kat, e))?))
            }
            "ind" => {
                let region = if self.eat(&Tok::LBrace) {
                    let r = if *self.peek() == Tok::RBrace { Region::full() } else { self.conds()? };
                    self.expect(&Tok::RBrace, "`}`")?;
                    r
                } else {
                    self.interval()?
                };
                Ok(Self::node(FuncExpr::indicator(region)))
            }
            "piecewise" => {
                self.expect(&Tok::LBrace, "`{`")?;
                let mut cells = Vec::new();
                let mut pieces = Vec::new();
                while *self.peek() != Tok::RBrace {
                    cells.push(self.conds()?);
                    self.expect(&Tok::Colon, "`:`")?;
                    pieces.push(self.expr()?.into_expr());
                    if !self.eat(&Tok::Semi) {
                        break;
                    }
                }
                self.expect(&Tok::RBrace, "`}`")?;
                if cells.is_empty() {
                    return Err(self.err(ParseErrorKind::Syntax, at, "piecewise needs at least one cell"));
                }
                let f = FuncExpr::piecewise(RegionPartition::new(cells), pieces)
                    .map_err(|e| self.invalid(at, e))?;
                Ok(Self::node(f))
            }
            other => Err(self.err(ParseErrorKind::Syntax, at, format!("unknown identifier `{other}`"))),
        }
    }

    fn signed_bound(&mut self) -> Result<f64, ParseError> {
        let neg = self.eat(&Tok::Minus);
        let at = self.at();
        let v = match self.bump() {
            Tok::Num(v) => v,
            Tok::Ident(s) if s == "inf" => f64::INFINITY,
            t => return Err(self.err(ParseErrorKind::Syntax, at, format!("expected interval bound, found {t:?}"))),
        };
        Ok(if neg { -v } else { v })
    }

    fn interval(&mut self) -> Result<Region, ParseError> {
        let at = self.at();
        let lo_closed = match self.bump() {
            Tok::LBracket => true,
            Tok::LParen => false,
            t => return Err(self.err(ParseErrorKind::Syntax, at, format!("expected interval, found {t:?}"))),
        };
        let lo = self.signed_bound()?;
        self.expect(&Tok::Comma, "`,`")?;
        let hi = self.signed_bound()?;
        let at = self.at();
        let hi_closed = match self.bump() {
            Tok::RBracket => true,
            Tok::RParen => false,
            t => return Err(self.err(ParseErrorKind::Syntax, at, format!("expected `]` or `)`, found {t:?}"))),
        };
        if self.global_dim > 1 {
            return Err(self.err(ParseErrorKind::Dimension, at, "interval indicators are one-dimensional; use ind{...}"));
        }
        Ok(Region::interval(lo, lo_closed, hi, hi_closed))
    }

    fn linear(&mut self) -> Result<Poly, ParseError> {
        let at = self.at();
        match self.expr()? {
            Lowered::Poly(p) if p.degree() <= 1 => Ok(p),
            _ => Err(self.err(ParseErrorKind::Invalid, at, "conditions must be linear inequalities")),
        }
    }

    fn conds(&mut self) -> Result<Region, ParseError> {
        if matches!(self.peek(), Tok::Ident(s) if s == "true") {
            self.bump();
            return Ok(Region::full());
        }
        let mut halfspaces = Vec::new();
        loop {
            let mut lhs = self.linear()?;
            let mut any = false;
            loop {
                let (strict, flip) = match self.peek() {
                    Tok::Lt => (true, false),
                    Tok::Le => (false, false),
                    Tok::Gt => (true, true),
                    Tok::Ge => (false, true),
                    _ => break,
                };
                self.bump();
                let rhs = self.linear()?;
                let diff = if flip { rhs.add(&lhs.scaled(-1.0)) } else { lhs.add(&rhs.scaled(-1.0)) };
                let n = self.global_dim;
                halfspaces.push(Halfspace::new(diff.lin[..n].to_vec(), -diff.c, strict));
                lhs = rhs;
                any = true;
            }
            if !any {
                return Err(self.syntax("expected a comparison"));
            }
            if !self.eat(&Tok::Amp) {
                break;
            }
        }
        Ok(Region::new(halfspaces))
    }
}

fn merge_terms(terms: Vec<(Lowered, bool)>) -> Lowered {
    let mut children: Vec<Lowered> = Vec::new();
    let mut pending: Option<Poly> = None;
    for (t, grouped) in terms {
        match t {
            Lowered::Poly(p) if !grouped => {
                pending = Some(match pending {
                    Some(q) => q.add(&p),
                    None => p,
                });
            }
            other => {
                if let Some(q) = pending.take() {
                    children.push(Lowered::Poly(q));
                }
                children.push(other);
            }
        }
    }
    if let Some(q) = pending {
        children.push(Lowered::Poly(q));
    }
    if children.len() == 1 {
        return children.pop().expect("one child");
    }
    Lowered::Node(FuncExpr::Sum { terms: children.into_iter().map(Lowered::into_expr).collect() })
}
