//! Scalar expression language for the entries of matrix-functions.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' integer)?
//! primary := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Identifiers are the variables `x1..x<m>` and the functions `sin`, `cos`
//! and `sqrt`. Exponents are non-negative integer literals.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Sqrt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Expression tree. Variables are stored zero-based (`x1` is `Var(0)`).
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("empty expression")]
    Empty,
    #[error("non-ASCII input")]
    NonAscii,
    #[error("unexpected `{0}`")]
    Unexpected(String),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("invalid number literal `{0}`")]
    InvalidNumber(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("variable x{index} out of range 1..={m}")]
    VariableOutOfRange { index: usize, m: usize },
    #[error("exponent must be a non-negative integer literal")]
    BadExponent,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("square root of a negative number in `{0}`")]
    SqrtOfNegative(String),
    #[error("non-finite value in `{0}`")]
    NonFinite(String),
    #[error("point has {got} coordinates but the expression uses x{needed}")]
    Dimension { needed: usize, got: usize },
}

/// Parses `text` as an expression over the variables `x1..x<m>`.
pub fn parse(text: &str, m: usize) -> Result<Expr, ParseError> {
    if !text.is_ascii() {
        let offset = text.char_indices().find(|(_, c)| !c.is_ascii()).map_or(0, |(i, _)| i);
        return Err(ParseError { kind: ParseErrorKind::NonAscii, offset });
    }
    let tokens = lex(text)?;
    if tokens.is_empty() {
        return Err(ParseError { kind: ParseErrorKind::Empty, offset: 0 });
    }
    let mut parser = Parser { tokens: &tokens, pos: 0, m, end: text.len() };
    let expr = parser.expr()?;
    match parser.peek() {
        None => Ok(expr),
        Some(tok) => Err(ParseError {
            kind: ParseErrorKind::Unexpected(tok.kind.to_string()),
            offset: tok.offset,
        }),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Number(v) => write!(f, "{v:?}"),
            TokenKind::Ident(s) => f.write_str(s),
            TokenKind::Plus => f.write_str("+"),
            TokenKind::Minus => f.write_str("-"),
            TokenKind::Star => f.write_str("*"),
            TokenKind::Slash => f.write_str("/"),
            TokenKind::Caret => f.write_str("^"),
            TokenKind::LParen => f.write_str("("),
            TokenKind::RParen => f.write_str(")"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokenKind,
    offset: usize,
    // Raw text, kept for exponent validation.
    text: String,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Some(TokenKind::Plus),
            b'-' => Some(TokenKind::Minus),
            b'*' => Some(TokenKind::Star),
            b'/' => Some(TokenKind::Slash),
            b'^' => Some(TokenKind::Caret),
            b'(' => Some(TokenKind::LParen),
            b')' => Some(TokenKind::RParen),
            _ => None,
        };
        if let Some(kind) = single {
            i += 1;
            tokens.push(Token { kind, offset: start, text: text[start..i].to_string() });
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let raw = &text[start..i];
            let value: f64 = raw.parse().map_err(|_| ParseError {
                kind: ParseErrorKind::InvalidNumber(raw.to_string()),
                offset: start,
            })?;
            if !value.is_finite() {
                return Err(ParseError {
                    kind: ParseErrorKind::InvalidNumber(raw.to_string()),
                    offset: start,
                });
            }
            tokens.push(Token { kind: TokenKind::Number(value), offset: start, text: raw.to_string() });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let raw = &text[start..i];
            tokens.push(Token { kind: TokenKind::Ident(raw.to_string()), offset: start, text: raw.to_string() });
            continue;
        }
        return Err(ParseError {
            kind: ParseErrorKind::Unexpected((c as char).to_string()),
            offset: start,
        });
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    m: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<&Token, ParseError> {
        let tok = self.tokens.get(self.pos).ok_or(ParseError {
            kind: ParseErrorKind::UnexpectedEnd,
            offset: self.end,
        })?;
        self.pos += 1;
        Ok(tok)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), ParseError> {
        let tok = self.next()?;
        if tok.kind == kind {
            Ok(())
        } else {
            Err(ParseError { kind: ParseErrorKind::Unexpected(tok.kind.to_string()), offset: tok.offset })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(&TokenKind::Plus) {
                BinaryOp::Add
            } else if self.eat(&TokenKind::Minus) {
                BinaryOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat(&TokenKind::Star) {
                BinaryOp::Mul
            } else if self.eat(&TokenKind::Slash) {
                BinaryOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&TokenKind::Minus) {
            let inner = self.unary()?;
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !self.eat(&TokenKind::Caret) {
            return Ok(base);
        }
        let tok = self.next()?;
        let bad = ParseError { kind: ParseErrorKind::BadExponent, offset: tok.offset };
        match tok.kind {
            TokenKind::Number(_) if tok.text.bytes().all(|b| b.is_ascii_digit()) => {
                let k: u32 = tok.text.parse().map_err(|_| bad)?;
                Ok(Expr::Pow(Box::new(base), k))
            }
            _ => Err(bad),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let tok = self.next()?.clone();
        match tok.kind {
            TokenKind::Number(v) => Ok(Expr::Const(v)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                let is_call = self.peek().is_some_and(|t| t.kind == TokenKind::LParen);
                if is_call {
                    let op = match name.as_str() {
                        "sin" => UnaryOp::Sin,
                        "cos" => UnaryOp::Cos,
                        "sqrt" => UnaryOp::Sqrt,
                        _ => {
                            return Err(ParseError {
                                kind: ParseErrorKind::UnknownFunction(name),
                                offset: tok.offset,
                            })
                        }
                    };
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(TokenKind::RParen)?;
                    return Ok(Expr::Unary(op, Box::new(arg)));
                }
                self.variable(&name, tok.offset)
            }
            other => Err(ParseError { kind: ParseErrorKind::Unexpected(other.to_string()), offset: tok.offset }),
        }
    }

    fn variable(&self, name: &str, offset: usize) -> Result<Expr, ParseError> {
        let unknown = || ParseError { kind: ParseErrorKind::UnknownIdentifier(name.to_string()), offset };
        let digits = name.strip_prefix('x').ok_or_else(unknown)?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        let index: usize = digits.parse().map_err(|_| unknown())?;
        if index == 0 || index > self.m {
            return Err(ParseError { kind: ParseErrorKind::VariableOutOfRange { index, m: self.m }, offset });
        }
        Ok(Expr::Var(index - 1))
    }
}

impl Expr {
    pub fn constant(v: f64) -> Self {
        Expr::Const(v)
    }

    /// Variable `x<index>`, one-based as in the surface syntax.
    pub fn var(index: usize) -> Self {
        assert!(index >= 1, "variables are one-based");
        Expr::Var(index - 1)
    }

    pub fn sin(self) -> Self {
        Expr::Unary(UnaryOp::Sin, Box::new(self))
    }

    pub fn cos(self) -> Self {
        Expr::Unary(UnaryOp::Cos, Box::new(self))
    }

    pub fn sqrt(self) -> Self {
        Expr::Unary(UnaryOp::Sqrt, Box::new(self))
    }

    pub fn powi(self, k: u32) -> Self {
        match (self, k) {
            (_, 0) => Expr::Const(1.0),
            (e, 1) => e,
            (Expr::Const(c), k) => Expr::Const(c.powi(k as i32)),
            (e, k) => Expr::Pow(Box::new(e), k),
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    /// Highest variable index used, one-based; 0 for constant expressions.
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Unary(_, e) | Expr::Pow(e, _) => e.max_var(),
            Expr::Binary(_, l, r) => l.max_var().max(r.max_var()),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, e) | Expr::Pow(e, _) => 1 + e.size(),
            Expr::Binary(_, l, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        let needed = self.max_var();
        if needed > point.len() {
            return Err(EvalError::Dimension { needed, got: point.len() });
        }
        self.eval_unchecked(point)
    }

    fn eval_unchecked(&self, point: &[f64]) -> Result<f64, EvalError> {
        let value = match self {
            Expr::Const(c) => return Ok(*c),
            Expr::Var(i) => return Ok(point[*i]),
            Expr::Unary(op, e) => {
                let v = e.eval_unchecked(point)?;
                match op {
                    UnaryOp::Neg => -v,
                    UnaryOp::Sin => v.sin(),
                    UnaryOp::Cos => v.cos(),
                    UnaryOp::Sqrt => {
                        if v < 0.0 {
                            return Err(EvalError::SqrtOfNegative(self.to_string()));
                        }
                        v.sqrt()
                    }
                }
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval_unchecked(point)?;
                let b = r.eval_unchecked(point)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero(self.to_string()));
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(e, k) => e.eval_unchecked(point)?.powi(*k as i32),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::NonFinite(self.to_string()))
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Pow(..) => 4,
            // Negative literals print parenthesized, so they are atoms.
            _ => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Unary(UnaryOp::Neg, e) => {
                f.write_str("-")?;
                write_child(f, e, e.precedence() < 3)
            }
            Expr::Unary(op, e) => {
                let name = match op {
                    UnaryOp::Sin => "sin",
                    UnaryOp::Cos => "cos",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}({e})")
            }
            Expr::Binary(op, l, r) => {
                let prec = self.precedence();
                let sym = match op {
                    BinaryOp::Add => " + ",
                    BinaryOp::Sub => " - ",
                    BinaryOp::Mul => "*",
                    BinaryOp::Div => "/",
                };
                write_child(f, l, l.precedence() < prec)?;
                f.write_str(sym)?;
                // Right operands keep their own grouping so the tree is preserved exactly.
                write_child(f, r, r.precedence() <= prec)
            }
            Expr::Pow(e, k) => {
                write_child(f, e, e.precedence() < 5)?;
                write!(f, "^{k}")
            }
        }
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::Const(v)
    }
}

impl Add for Expr {
    type Output = Expr;

    fn add(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a + b),
            (Some(a), _) if a == 0.0 => rhs,
            (_, Some(b)) if b == 0.0 => self,
            _ => Expr::Binary(BinaryOp::Add, Box::new(self), Box::new(rhs)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;

    fn sub(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a - b),
            (Some(a), _) if a == 0.0 => -rhs,
            (_, Some(b)) if b == 0.0 => self,
            _ => Expr::Binary(BinaryOp::Sub, Box::new(self), Box::new(rhs)),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;

    fn mul(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => Expr::Const(0.0),
            (Some(a), _) if a == 1.0 => rhs,
            (_, Some(b)) if b == 1.0 => self,
            (Some(a), _) if a == -1.0 => -rhs,
            (_, Some(b)) if b == -1.0 => -self,
            _ => Expr::Binary(BinaryOp::Mul, Box::new(self), Box::new(rhs)),
        }
    }
}

impl Div for Expr {
    type Output = Expr;

    fn div(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) if b != 0.0 => Expr::Const(a / b),
            (Some(a), _) if a == 0.0 => Expr::Const(0.0),
            (_, Some(b)) if b == 1.0 => self,
            _ => Expr::Binary(BinaryOp::Div, Box::new(self), Box::new(rhs)),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;

    fn neg(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Unary(UnaryOp::Neg, e) => *e,
            e => Expr::Unary(UnaryOp::Neg, Box::new(e)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(text: &str, m: usize, p: &[f64]) -> f64 {
        parse(text, m).unwrap().eval(p).unwrap()
    }

    #[test]
    fn product_of_sum() {
        assert_eq!(ev("x1*(x1+x2)", 2, &[1.0, 2.0]), 3.0);
    }

    #[test]
    fn upsilon_entry() {
        let e = parse("x2*sin(x1)", 2).unwrap();
        assert_eq!(e.eval(&[1.0, 2.0]).unwrap(), 2.0 * 1f64.sin());
    }

    #[test]
    fn syntax_error_points_at_operator() {
        let err = parse("x1 + * x2", 2).unwrap_err();
        assert_eq!(err.offset, 5);
        assert!(matches!(err.kind, ParseErrorKind::Unexpected(ref s) if s == "*"));
    }

    #[test]
    fn constant_everywhere() {
        let e = parse("7", 3).unwrap();
        assert_eq!(e.eval(&[0.1, -4.0, 9.0]).unwrap(), 7.0);
    }

    #[test]
    fn sin_squared() {
        // sin(1)^2 = 0.7080734182735712
        let v = ev("sin(x1)^2", 1, &[1.0]);
        assert!((v - 0.708_073_418_273_571_2).abs() < 1e-15);
    }

    #[test]
    fn division_by_zero_reports_subexpression() {
        let e = parse("1/(x1+x2)", 2).unwrap();
        match e.eval(&[1.0, -1.0]) {
            Err(EvalError::DivisionByZero(s)) => assert_eq!(s, "1.0/(x1 + x2)"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sqrt_of_negative() {
        let e = parse("sqrt(x1 - 2)", 1).unwrap();
        assert!(matches!(e.eval(&[1.0]), Err(EvalError::SqrtOfNegative(_))));
    }

    #[test]
    fn precedence_rules() {
        assert_eq!(ev("-x1^2", 1, &[3.0]), -9.0);
        assert_eq!(ev("2^3", 1, &[0.0]), 8.0);
        assert_eq!(ev("1 - 2 - 3", 1, &[0.0]), -4.0);
        assert_eq!(ev("8 / 4 / 2", 1, &[0.0]), 1.0);
        assert_eq!(ev("1 + 2*3", 1, &[0.0]), 7.0);
        assert_eq!(ev("2*-x1", 1, &[3.0]), -6.0);
        assert_eq!(ev("-(x1+1)^2", 1, &[1.0]), -4.0);
        assert_eq!(ev("1.5e1 + .5", 1, &[0.0]), 15.5);
    }

    #[test]
    fn rejects_bad_input() {
        let kind = |t: &str| parse(t, 2).unwrap_err().kind;
        assert_eq!(kind(""), ParseErrorKind::Empty);
        assert_eq!(kind("   "), ParseErrorKind::Empty);
        assert_eq!(kind("tan(x1)"), ParseErrorKind::UnknownFunction("tan".into()));
        assert_eq!(kind("y + 1"), ParseErrorKind::UnknownIdentifier("y".into()));
        assert_eq!(kind("sin"), ParseErrorKind::UnknownIdentifier("sin".into()));
        assert_eq!(kind("x3"), ParseErrorKind::VariableOutOfRange { index: 3, m: 2 });
        assert_eq!(kind("x0"), ParseErrorKind::VariableOutOfRange { index: 0, m: 2 });
        assert_eq!(kind("x1^2.5"), ParseErrorKind::BadExponent);
        assert_eq!(kind("x1^-1"), ParseErrorKind::BadExponent);
        assert_eq!(kind("(x1"), ParseErrorKind::UnexpectedEnd);
        assert_eq!(kind("x1 x2"), ParseErrorKind::Unexpected("x2".into()));
        assert_eq!(kind("x1 # 2"), ParseErrorKind::Unexpected("#".into()));
        assert_eq!(kind("x1 + é"), ParseErrorKind::NonAscii);
    }

    #[test]
    fn builders_fold_constants() {
        let x = Expr::var(1);
        assert_eq!(Expr::from(0.0) * x.clone(), Expr::Const(0.0));
        assert_eq!(x.clone() * Expr::from(1.0), x);
        assert_eq!(Expr::from(0.0) + x.clone(), x);
        assert_eq!(-(-x.clone()), x);
        assert_eq!(Expr::from(2.0) * Expr::from(3.0), Expr::Const(6.0));
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-5.0f64..5.0).prop_map(Expr::Const),
            (0usize..3).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Unary(UnaryOp::Neg, Box::new(e))),
                inner.clone().prop_map(|e| Expr::Unary(UnaryOp::Sin, Box::new(e))),
                inner.clone().prop_map(|e| Expr::Unary(UnaryOp::Cos, Box::new(e))),
                (inner.clone(), 0u32..4).prop_map(|(e, k)| Expr::Pow(Box::new(e), k)),
                (inner.clone(), inner.clone(), 0..4).prop_map(|(l, r, op)| {
                    let op = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div][op as usize];
                    Expr::Binary(op, Box::new(l), Box::new(r))
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr(), pts in prop::collection::vec(prop::array::uniform3(-3.0f64..3.0), 100)) {
            let text = e.to_string();
            let back = parse(&text, 3).unwrap();
            for p in &pts {
                match (e.eval(p), back.eval(p)) {
                    (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300), "{text}: {a} vs {b}"),
                    (Err(_), Err(_)) => {}
                    (a, b) => prop_assert!(false, "{text}: {a:?} vs {b:?}"),
                }
            }
        }

        #[test]
        fn eval_is_pure(e in arb_expr(), p in prop::array::uniform3(-3.0f64..3.0)) {
            let a = e.eval(&p).map(f64::to_bits);
            let b = e.eval(&p).map(f64::to_bits);
            prop_assert_eq!(a, b);
        }
    }
}
