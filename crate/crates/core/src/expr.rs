//! Recursive-descent parser for the expression grammar used in every input
//! document:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | factor
//! factor := base ("^" nonneg-int)?
//! base   := rational-literal | identifier | "(" expr ")"
//! ```
//!
//! The Unicode minus sign is accepted as a synonym of `-`.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::fiber::{fconst, FiberPoly};
use crate::poly::Poly;
use crate::rational::Rational;
use crate::scalar::{Scalar, ScalarField};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let single = |t: Tok| Token { tok: t, line: l0, col: c0 };
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '+' => out.push(single(Tok::Plus)),
            '-' | '\u{2212}' => out.push(single(Tok::Minus)),
            '*' | '\u{00d7}' => out.push(single(Tok::Star)),
            '/' => out.push(single(Tok::Slash)),
            '^' => out.push(single(Tok::Caret)),
            '(' => out.push(single(Tok::LParen)),
            ')' => out.push(single(Tok::RParen)),
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += i - start;
                let value = parse_decimal(&text).ok_or(Error::Syntax {
                    line: l0,
                    col: c0,
                    msg: format!("malformed number '{text}'"),
                })?;
                out.push(Token { tok: Tok::Num(value), line: l0, col: c0 });
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Token { tok: Tok::Ident(text), line: l0, col: c0 });
                continue;
            }
            other => {
                return Err(Error::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character '{other}'"),
                })
            }
        }
        i += 1;
        col += 1;
    }
    out.push(Token { tok: Tok::End, line, col });
    Ok(out)
}

fn parse_decimal(text: &str) -> Option<Rational> {
    match text.split_once('.') {
        None => text.parse::<BigInt>().ok().map(Rational::from_integer),
        Some((a, b)) => {
            if b.contains('.') || (a.is_empty() && b.is_empty()) {
                return None;
            }
            let digits = format!("{a}{b}");
            let n: BigInt = digits.parse().ok()?;
            Some(Rational::new(n, num_traits::pow(BigInt::from(10), b.len())))
        }
    }
}

#[derive(Clone, Debug)]
enum Ast {
    Num(Rational),
    Ident(String, usize, usize),
    Neg(Box<Ast>),
    Bin(char, Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, u32),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        let t = self.peek();
        Err(Error::Syntax { line: t.line, col: t.col, msg: msg.to_string() })
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => '+',
                Tok::Minus => '-',
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.term()?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => '*',
                Tok::Slash => '/',
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Ast> {
        if self.peek().tok == Tok::Minus {
            self.next();
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Ast> {
        let base = self.base()?;
        if self.peek().tok == Tok::Caret {
            self.next();
            let t = self.next();
            return match t.tok {
                Tok::Num(r) if r.is_integer() => {
                    let e: u32 = r.to_integer().try_into().map_err(|_| Error::Syntax {
                        line: t.line,
                        col: t.col,
                        msg: "exponent too large".into(),
                    })?;
                    Ok(Ast::Pow(Box::new(base), e))
                }
                _ => Err(Error::Syntax {
                    line: t.line,
                    col: t.col,
                    msg: "expected a nonnegative integer exponent".into(),
                }),
            };
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Ast> {
        let t = self.next();
        match t.tok {
            Tok::Num(r) => Ok(Ast::Num(r)),
            Tok::Ident(s) => Ok(Ast::Ident(s, t.line, t.col)),
            Tok::LParen => {
                let e = self.expr()?;
                if self.peek().tok != Tok::RParen {
                    return self.err("expected ')'");
                }
                self.next();
                Ok(e)
            }
            Tok::End => Err(Error::Syntax { line: t.line, col: t.col, msg: "unexpected end of input".into() }),
            _ => Err(Error::Syntax { line: t.line, col: t.col, msg: "expected a number, symbol or '('".into() }),
        }
    }
}

fn parse_ast(src: &str) -> Result<Ast> {
    let mut p = Parser { toks: tokenize(src)?, pos: 0 };
    let e = p.expr()?;
    if p.peek().tok != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Parse and evaluate to a scalar over `field`.
pub fn parse_scalar(src: &str, field: &Arc<ScalarField>) -> Result<Scalar> {
    let ast = parse_ast(src)?;
    let fp = eval(&ast, field, None)?;
    Ok(fp.as_constant().cloned().unwrap_or_else(|| field.zero()))
}

/// Parse and evaluate to a fiber polynomial in `u1..un`.
pub fn parse_fiber(src: &str, field: &Arc<ScalarField>, n: usize) -> Result<FiberPoly> {
    let ast = parse_ast(src)?;
    eval(&ast, field, Some(n))
}

fn fiber_index(name: &str, n: usize) -> Option<usize> {
    let rest = name.strip_prefix('u')?;
    let k: usize = rest.parse().ok()?;
    (rest == k.to_string() && k >= 1 && k <= n).then(|| k - 1)
}

fn eval(ast: &Ast, field: &Arc<ScalarField>, fiber: Option<usize>) -> Result<FiberPoly> {
    let n = fiber.unwrap_or(0);
    Ok(match ast {
        Ast::Num(r) => fconst(n, field.constant(r.clone())),
        Ast::Ident(name, line, col) => {
            if let Some(i) = field.var_index(name) {
                fconst(n, field.var(i))
            } else if let Some(r) = field.radical_index(name) {
                fconst(n, field.radical(r))
            } else if let Some(k) = fiber.and_then(|n| fiber_index(name, n)) {
                Poly::var(n, k, field.one())
            } else {
                return Err(Error::UnknownSymbol { name: name.clone(), line: *line, col: *col });
            }
        }
        Ast::Neg(a) => eval(a, field, fiber)?.neg(),
        Ast::Pow(a, e) => eval(a, field, fiber)?.pow(*e, &field.one()),
        Ast::Bin(op, a, b) => {
            let x = eval(a, field, fiber)?;
            let y = eval(b, field, fiber)?;
            match op {
                '+' => x.add(&y),
                '-' => x.sub(&y),
                '*' => x.mul(&y),
                _ => {
                    if y.is_zero() {
                        return Err(Error::DivisionByZero);
                    }
                    let c = y.as_constant().ok_or_else(|| {
                        Error::BadInput("division by a polynomial in the fiber variables".into())
                    })?;
                    let inv = c.inv()?;
                    x.scale(&inv)
                }
            }
        }
    })
}

/// Parse a rational-valued expression with no symbols.
pub fn parse_rational_expr(src: &str) -> Result<Rational> {
    let f = ScalarField::new(vec![]);
    let s = parse_scalar(src, &f)?;
    s.as_const()
        .cloned()
        .ok_or_else(|| Error::BadInput(format!("'{src}' is not a rational constant")))
}
