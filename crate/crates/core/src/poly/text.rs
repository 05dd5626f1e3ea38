//! Text form: terms joined by `" + "`, each `"c * x^e*y"` with `c` written
//! as `num/den` (or `num` when integral). The zero polynomial prints as `0`.
//!
//! The parser accepts that form and ordinary infix expressions with `+ - * /`,
//! `^` with non-negative integer exponents, parentheses and decimal literals.
//! Division is only allowed by constants.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Monomial, PolyError, Polynomial, Rational};

pub fn format_rational(c: &Rational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Parses `"a"`, `"a/b"` or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, PolyError> {
    let p = Polynomial::parse(s, &[] as &[&str])?;
    Ok(p.constant_term())
}

impl Polynomial {
    pub fn to_text(&self, names: &[impl AsRef<str>]) -> String {
        assert_eq!(names.len(), self.nvars(), "variable name count");
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = Vec::with_capacity(self.len());
        for (m, c) in self.terms() {
            let coeff = format_rational(c);
            if m.is_one() {
                out.push(coeff);
                continue;
            }
            let vars: Vec<String> = m
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        names[i].as_ref().to_string()
                    } else {
                        format!("{}^{}", names[i].as_ref(), e)
                    }
                })
                .collect();
            out.push(format!("{} * {}", coeff, vars.join("*")));
        }
        out.join(" + ")
    }

    pub fn parse(text: &str, names: &[impl AsRef<str>]) -> Result<Polynomial, PolyError> {
        let names: Vec<&str> = names.iter().map(|n| n.as_ref()).collect();
        let tokens = tokenize(text)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            names: &names,
            end: text.len(),
        };
        let p = parser.expr()?;
        if parser.pos < parser.tokens.len() {
            return Err(PolyError::Parse {
                pos: parser.tokens[parser.pos].pos,
                message: "unexpected trailing input".into(),
            });
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
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
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, PolyError> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match ch {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                let lit = &text[start..i];
                out.push(Token {
                    tok: Tok::Num(decimal(lit).ok_or_else(|| PolyError::Parse {
                        pos: start,
                        message: format!("bad number `{lit}`"),
                    })?),
                    pos: start,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(text[start..i].to_string()),
                    pos: start,
                });
                continue;
            }
            other => {
                return Err(PolyError::Parse {
                    pos: start,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push(Token { tok, pos: start });
        i += 1;
    }
    Ok(out)
}

fn decimal(lit: &str) -> Option<Rational> {
    let mut parts = lit.splitn(2, '.');
    let whole = parts.next()?;
    let frac = parts.next().unwrap_or("");
    if frac.contains('.') || (whole.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Some(Rational::new(num, den))
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    names: &'a [&'a str],
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map(|t| t.pos).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, PolyError> {
        Err(PolyError::Parse {
            pos: self.here(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let at = self.here();
                    let d = self.unary()?;
                    if d.degree().unwrap_or(0) > 0 || d.is_zero() {
                        return Err(PolyError::Parse {
                            pos: at,
                            message: "division only by a nonzero constant".into(),
                        });
                    }
                    acc = acc.scale(&d.constant_term().recip());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, PolyError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial, PolyError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Num(e)) if e.denom().is_one() && e >= Rational::zero() => {
                    self.pos += 1;
                    let e: u32 = e
                        .numer()
                        .try_into()
                        .map_err(|_| PolyError::Parse {
                            pos: self.here(),
                            message: "exponent too large".into(),
                        })?;
                    Ok(base.pow(e))
                }
                _ => self.err("expected a non-negative integer exponent"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Polynomial, PolyError> {
        let n = self.names.len();
        match self.peek().cloned() {
            Some(Tok::Num(c)) => {
                self.pos += 1;
                Ok(Polynomial::constant(n, c))
            }
            Some(Tok::Ident(name)) => match self.names.iter().position(|v| *v == name) {
                Some(i) => {
                    self.pos += 1;
                    Ok(Polynomial::monomial(Monomial::var(n, i), Rational::one()))
                }
                None => self.err(format!("unknown variable `{name}`")),
            },
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => self.err("expected `)`"),
                }
            }
            Some(_) => self.err("expected a number, variable or `(`"),
            None => self.err("unexpected end of input"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    #[test]
    fn canonical_text() {
        let names = ["x", "y"];
        let p = Polynomial::parse("3/2*x^2*y - y + 7 + (x - y)*(x + y)", &names).unwrap();
        assert_eq!(p.to_text(&names), "3/2 * x^2*y + 1 * x^2 + -1 * y^2 + -1 * y + 7");
        let again = Polynomial::parse(&p.to_text(&names), &names).unwrap();
        assert_eq!(again, p);
        assert_eq!(Polynomial::zero(2).to_text(&names), "0");
    }

    #[test]
    fn literals() {
        assert_eq!(parse_rational("-3/4").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("12").unwrap(), int(12));
    }

    #[test]
    fn errors_carry_positions() {
        let names = ["x"];
        match Polynomial::parse("x + * 2", &names) {
            Err(PolyError::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        match Polynomial::parse("x + z", &names) {
            Err(PolyError::Parse { pos, message }) => {
                assert_eq!(pos, 4);
                assert!(message.contains('z'));
            }
            other => panic!("{other:?}"),
        }
        assert!(Polynomial::parse("x / x", &names).is_err());
        assert!(Polynomial::parse("x^-1", &names).is_err());
        assert!(Polynomial::parse("(x + 1", &names).is_err());
        assert!(Polynomial::parse("x $", &names).is_err());
    }
}
