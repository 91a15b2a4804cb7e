//! A small expression language for elements, necklaces, forms and derivations.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := "-"? power (("."? power))*
//! power  := atom ("^" INT)?
//! atom   := INT ("/" INT)? | ARROW | "e(" VERTEX ")" | "(" expr ")"
//!         | "cyc(" expr ")" | "d(" expr ")"
//!         | "i(" theta "," expr ")" | "L(" theta "," expr ")" | theta
//! theta  := "theta{" (ARROW "->" expr ("," ARROW "->" expr)*)? "}"
//! ARROW  := [A-Za-z_][A-Za-z0-9_]* "*"?
//! ```
//!
//! Juxtaposition is the path product (`x y` is `x` after `y`). Inside
//! `cyc(...)` every word must be closed; a product of nonzero factors in which
//! no pair of paths composes is rejected rather than read as zero.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::PathAlgebraElement;
use crate::derivation::Derivation;
use crate::error::{Error, Result};
use crate::forms::{Form, OmegaElement};
use crate::necklace::Necklace;
use crate::quiver::{Quiver, STAR};
use crate::Rational;

/// A parsed expression.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Element(PathAlgebraElement),
    /// A noncommutative form before passing to `DR`, such as `x d(y)`.
    Omega(OmegaElement),
    Necklace(Necklace),
    /// A class in `DR^k` with `k ≥ 1`.
    Form(Form),
    Derivation(Derivation),
}

impl Expr {
    pub fn kind(&self) -> &'static str {
        match self {
            Expr::Element(_) => "path algebra element",
            Expr::Omega(_) => "noncommutative form",
            Expr::Necklace(_) => "necklace",
            Expr::Form(_) => "cyclic form",
            Expr::Derivation(_) => "derivation",
        }
    }

    pub fn into_necklace(self) -> Result<Necklace> {
        match self {
            Expr::Necklace(n) => Ok(n),
            Expr::Element(e) => {
                let n = Necklace::from(&e);
                let open = e.terms().keys().find(|p| !p.is_closed());
                match open {
                    Some(p) => Err(Error::NotClosed(p.display(e.quiver()).to_string())),
                    None => Ok(n),
                }
            }
            other => Err(Error::Input(format!("expected a necklace, got a {}", other.kind()))),
        }
    }

    pub fn into_element(self) -> Result<PathAlgebraElement> {
        match self {
            Expr::Element(e) => Ok(e),
            other => Err(Error::Input(format!("expected a path algebra element, got a {}", other.kind()))),
        }
    }

    /// A form of any degree; necklaces count as 0-forms.
    pub fn into_form(self) -> Result<Form> {
        match self {
            Expr::Form(f) => Ok(f),
            Expr::Necklace(n) => Ok(Form::from(&n)),
            Expr::Element(_) => Ok(Form::from(&self.into_necklace()?)),
            Expr::Omega(o) => closed_class(&o),
            other => Err(Error::Input(format!("expected a form, got a {}", other.kind()))),
        }
    }

    pub fn into_derivation(self) -> Result<Derivation> {
        match self {
            Expr::Derivation(d) => Ok(d),
            other => Err(Error::Input(format!("expected a derivation, got a {}", other.kind()))),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Element(x) => x.fmt(f),
            Expr::Omega(x) => x.fmt(f),
            Expr::Necklace(x) => x.fmt(f),
            Expr::Form(x) => x.fmt(f),
            Expr::Derivation(x) => x.fmt(f),
        }
    }
}

pub fn parse_expression(src: &str, quiver: &Arc<Quiver>) -> Result<Expr> {
    let tokens = lex(src)?;
    let mut p = Parser {
        src,
        tokens,
        pos: 0,
        quiver: quiver.clone(),
    };
    let v = p.expr()?;
    if !matches!(p.peek(), Tok::End) {
        return Err(p.syntax("unexpected input after expression"));
    }
    Ok(finish(v, quiver))
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Dot,
    Slash,
    Caret,
    Comma,
    To,
    LParen,
    RParen,
    LBrace,
    RBrace,
    End,
}

fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn syntax_at(src: &str, offset: usize, message: impl Into<String>) -> Error {
    let (line, column) = position(src, offset);
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn locate(src: &str, offset: usize, err: Error) -> Error {
    if matches!(err, Error::Parse { .. } | Error::Located { .. }) {
        return err;
    }
    let (line, column) = position(src, offset);
    Error::Located {
        line,
        column,
        source: Box::new(err),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::To
            }
            b'-' => Tok::Minus,
            b'.' => Tok::Dot,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b',' => Tok::Comma,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'{' => Tok::LBrace,
            b'}' => Tok::RBrace,
            b'0'..=b'9' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                }
                Tok::Int(src[start..=i].parse().expect("digits"))
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                    i += 1;
                }
                if bytes.get(i + 1) == Some(&(STAR as u8)) {
                    i += 1;
                }
                Tok::Ident(src[start..=i].to_owned())
            }
            _ => {
                let ch = src[start..].chars().next().expect("in bounds");
                return Err(syntax_at(src, start, format!("unexpected character `{ch}`")));
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

enum Value {
    Scalar(Rational),
    Omega(OmegaElement),
    Class(Form),
    Theta(Derivation),
}

fn one(q: &Arc<Quiver>) -> OmegaElement {
    OmegaElement::from_element(&PathAlgebraElement::one(q))
}

fn to_omega(v: Value, q: &Arc<Quiver>) -> Result<OmegaElement> {
    match v {
        Value::Scalar(s) => Ok(one(q).scale(&s)),
        Value::Omega(o) => Ok(o),
        Value::Class(_) => Err(Error::Input("a cyclic class cannot be used as a path algebra element".into())),
        Value::Theta(_) => Err(Error::Input("a derivation cannot be used here".into())),
    }
}

/// The `DR` class of an `Ω` element whose words are all closed.
fn closed_class(o: &OmegaElement) -> Result<Form> {
    if let Some(w) = o.terms().keys().find(|w| w.head() != w.tail()) {
        return Err(Error::NotClosed(w.display(o.quiver()).to_string()));
    }
    o.class(0)
}

fn to_class(v: Value, q: &Arc<Quiver>) -> Result<Form> {
    match v {
        Value::Class(f) => Ok(f),
        Value::Theta(_) => Err(Error::Input("a derivation cannot be used here".into())),
        other => closed_class(&to_omega(other, q)?),
    }
}

fn finish(v: Value, q: &Arc<Quiver>) -> Expr {
    match v {
        Value::Scalar(s) => Expr::Element(PathAlgebraElement::one(q).scale(&s)),
        Value::Omega(o) => match o.to_element() {
            Some(e) => Expr::Element(e),
            None => Expr::Omega(o),
        },
        Value::Class(f) if f.degree() == 0 => Expr::Necklace(f.to_necklace().expect("degree zero")),
        Value::Class(f) => Expr::Form(f),
        Value::Theta(t) => Expr::Derivation(t),
    }
}

struct Parser<'s> {
    src: &'s str,
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    quiver: Arc<Quiver>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].0.clone();
        if !matches!(t, Tok::End) {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, message: impl Into<String>) -> Error {
        syntax_at(self.src, self.offset(), message)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(format!("expected {what}")))
        }
    }

    fn at(&self, offset: usize, err: Error) -> Error {
        locate(self.src, offset, err)
    }

    fn expr(&mut self) -> Result<Value> {
        let mut acc = self.term()?;
        loop {
            let negate = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => return Ok(acc),
            };
            let at = self.offset();
            self.bump();
            let mut rhs = self.term()?;
            if negate {
                rhs = self.scale(rhs, &-Rational::one());
            }
            acc = self.add(acc, rhs).map_err(|e| self.at(at, e))?;
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::Int(_) | Tok::LParen)
    }

    fn term(&mut self) -> Result<Value> {
        let negate = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let mut acc = self.power()?;
        loop {
            let at = self.offset();
            if *self.peek() == Tok::Dot {
                self.bump();
            } else if !self.starts_atom() {
                break;
            }
            let rhs = self.power()?;
            acc = self.mul(acc, rhs).map_err(|e| self.at(at, e))?;
        }
        Ok(if negate { self.scale(acc, &-Rational::one()) } else { acc })
    }

    fn power(&mut self) -> Result<Value> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let at = self.offset();
        self.bump();
        let Tok::Int(n) = self.bump() else {
            return Err(syntax_at(self.src, at + 1, "expected an exponent"));
        };
        let n: u32 = n
            .try_into()
            .map_err(|_| syntax_at(self.src, at + 1, "exponent too large"))?;
        match base {
            Value::Scalar(s) => Ok(Value::Scalar(num_traits::pow(s, n as usize))),
            other => {
                let q = self.quiver.clone();
                let o = to_omega(other, &q).map_err(|e| self.at(at, e))?;
                let mut acc = one(&q);
                for _ in 0..n {
                    acc = acc.mul(&o)?;
                }
                Ok(Value::Omega(acc))
            }
        }
    }

    fn atom(&mut self) -> Result<Value> {
        let at = self.offset();
        match self.bump() {
            Tok::Int(n) => {
                let mut r = Rational::from_integer(n);
                if *self.peek() == Tok::Slash {
                    self.bump();
                    let Tok::Int(d) = self.bump() else {
                        return Err(syntax_at(self.src, self.tokens[self.pos - 1].1, "expected a denominator"));
                    };
                    if d.is_zero() {
                        return Err(syntax_at(self.src, at, "division by zero"));
                    }
                    r = Rational::new(r.to_integer(), d);
                }
                Ok(Value::Scalar(r))
            }
            Tok::LParen => {
                let v = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(v)
            }
            Tok::Ident(name) => self.ident(name, at),
            Tok::End => Err(syntax_at(self.src, at, "unexpected end of input")),
            _ => Err(syntax_at(self.src, at, "expected an expression")),
        }
    }

    fn ident(&mut self, name: String, at: usize) -> Result<Value> {
        let q = self.quiver.clone();
        match name.as_str() {
            "e" => {
                self.expect(Tok::LParen, "`(` after `e`")?;
                let vat = self.offset();
                let vname = match self.bump() {
                    Tok::Ident(s) => s,
                    Tok::Int(n) => n.to_string(),
                    _ => return Err(syntax_at(self.src, vat, "expected a vertex name")),
                };
                let v = q.find_vertex(&vname).map_err(|e| self.at(vat, e))?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Value::Omega(OmegaElement::from_element(&PathAlgebraElement::idempotent(&q, v))))
            }
            "cyc" => {
                self.expect(Tok::LParen, "`(` after `cyc`")?;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Value::Class(to_class(inner, &q).map_err(|e| self.at(at, e))?))
            }
            "d" => {
                self.expect(Tok::LParen, "`(` after `d`")?;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                match inner {
                    Value::Scalar(_) => Ok(Value::Omega(OmegaElement::zero(&q))),
                    Value::Omega(o) => Ok(Value::Omega(o.d())),
                    Value::Class(f) => Ok(Value::Class(f.d())),
                    Value::Theta(_) => Err(self.at(at, Error::Input("cannot take d of a derivation".into()))),
                }
            }
            "i" | "L" => {
                self.expect(Tok::LParen, "`(`")?;
                let tat = self.offset();
                let theta = match self.expr()? {
                    Value::Theta(t) => t,
                    _ => return Err(self.at(tat, Error::Input("expected a derivation `theta{...}`".into()))),
                };
                self.expect(Tok::Comma, "`,`")?;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let result = if name == "i" {
                    to_class(inner, &q).and_then(|f| f.contract(&theta)).map(Value::Class)
                } else {
                    self.lie(theta, inner)
                };
                result.map_err(|e| self.at(at, e))
            }
            "theta" => self.theta(),
            _ => {
                let a = q.find_arrow(&name).map_err(|e| self.at(at, e))?;
                Ok(Value::Omega(OmegaElement::from_element(&PathAlgebraElement::arrow(&q, a))))
            }
        }
    }

    fn lie(&self, theta: Derivation, inner: Value) -> Result<Value> {
        let q = &self.quiver;
        match inner {
            Value::Scalar(_) => Ok(Value::Omega(OmegaElement::zero(q))),
            Value::Omega(o) => match o.to_element() {
                Some(e) => Ok(Value::Omega(OmegaElement::from_element(&theta.apply(&e)))),
                None => closed_class(&o)?.lie_derivative(&theta).map(Value::Class),
            },
            Value::Class(f) => f.lie_derivative(&theta).map(Value::Class),
            Value::Theta(t) => Ok(Value::Theta(theta.commutator(&t))),
        }
    }

    fn theta(&mut self) -> Result<Value> {
        let q = self.quiver.clone();
        self.expect(Tok::LBrace, "`{` after `theta`")?;
        let mut images = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                let aat = self.offset();
                let Tok::Ident(name) = self.bump() else {
                    return Err(syntax_at(self.src, aat, "expected an arrow name"));
                };
                let a = q.find_arrow(&name).map_err(|e| self.at(aat, e))?;
                self.expect(Tok::To, "`->`")?;
                let iat = self.offset();
                let img = self.expr()?;
                let elem = to_omega(img, &q)
                    .ok()
                    .and_then(|o| o.to_element())
                    .ok_or_else(|| self.at(iat, Error::Input("image must be a path algebra element".into())))?;
                images.push((a, elem, aat));
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        let first = images.first().map_or(self.offset(), |(_, _, at)| *at);
        let theta = Derivation::new(&q, images.into_iter().map(|(a, e, _)| (a, e))).map_err(|e| self.at(first, e))?;
        Ok(Value::Theta(theta))
    }

    fn scale(&self, v: Value, s: &Rational) -> Value {
        match v {
            Value::Scalar(x) => Value::Scalar(x * s),
            Value::Omega(o) => Value::Omega(o.scale(s)),
            Value::Class(f) => Value::Class(f.scale(s)),
            Value::Theta(t) => Value::Theta(t.scale(s)),
        }
    }

    fn add(&self, a: Value, b: Value) -> Result<Value> {
        let q = &self.quiver;
        match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(x + y)),
            (Value::Theta(x), Value::Theta(y)) => Ok(Value::Theta(x.add(&y))),
            (Value::Theta(_), _) | (_, Value::Theta(_)) => {
                Err(Error::Input("cannot add a derivation and a non-derivation".into()))
            }
            (a @ Value::Class(_), b) | (a, b @ Value::Class(_)) => to_class(a, q)?.try_add(&to_class(b, q)?).map(Value::Class),
            (a, b) => to_omega(a, q)?.add(&to_omega(b, q)?).map(Value::Omega),
        }
    }

    fn mul(&self, a: Value, b: Value) -> Result<Value> {
        match (a, b) {
            (Value::Scalar(s), v) | (v, Value::Scalar(s)) => Ok(self.scale(v, &s)),
            (Value::Omega(x), Value::Omega(y)) => {
                let prod = x.mul(&y)?;
                let composable = x
                    .terms()
                    .keys()
                    .any(|u| y.terms().keys().any(|v| u.tail() == v.head()));
                if prod.is_zero() && !x.is_zero() && !y.is_zero() && !composable {
                    return Err(Error::NotComposable {
                        left: x.to_string(),
                        right: y.to_string(),
                    });
                }
                Ok(Value::Omega(prod))
            }
            (Value::Class(_), _) | (_, Value::Class(_)) => {
                Err(Error::Input("necklaces and cyclic forms cannot be multiplied".into()))
            }
            _ => Err(Error::Input("derivations cannot be multiplied".into())),
        }
    }
}
