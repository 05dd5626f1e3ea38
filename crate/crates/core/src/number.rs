//! Elements of a real quadratic field `ℚ(√d)`.
//!
//! Group matrices are allowed entries of the form `a + b·√d` so that
//! representations such as the dihedral group of the triangle can be written
//! orthogonally. Polynomials stay rational: every exact computation that
//! leaves the rationals is checked and rejected.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::poly::{format_rational, parse_rational, rational_to_f64, Rational};

/// `a + b·√d` with `d` square-free; `d == 0` whenever `b == 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Surd {
    a: Rational,
    b: Rational,
    d: u64,
}

impl Surd {
    pub fn rational(a: Rational) -> Self {
        Surd {
            a,
            b: Rational::zero(),
            d: 0,
        }
    }

    pub fn new(a: Rational, b: Rational, d: u64) -> Self {
        let (root, rest) = split_square(d);
        let b = b * Rational::from_integer(root.into());
        let mut s = Surd { a, b, d: rest };
        if s.d == 1 {
            s.a += s.b.clone();
            s.b = Rational::zero();
        }
        s.normalize()
    }

    fn normalize(mut self) -> Self {
        if self.b.is_zero() {
            self.d = 0;
        }
        self
    }

    pub fn from_int(n: i64) -> Self {
        Surd::rational(Rational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Surd::from_int(0)
    }

    pub fn one() -> Self {
        Surd::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn rational_part(&self) -> &Rational {
        &self.a
    }

    pub fn radical_part(&self) -> &Rational {
        &self.b
    }

    /// Square-free radicand, `0` for rationals.
    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.a.clone())
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * (self.d as f64).sqrt()
    }

    fn combine(d1: u64, d2: u64) -> u64 {
        match (d1, d2) {
            (0, d) | (d, 0) => d,
            (x, y) => {
                assert_eq!(x, y, "mixed radicands sqrt({x}) and sqrt({y})");
                x
            }
        }
    }

    pub fn add(&self, o: &Surd) -> Surd {
        Surd {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
            d: Surd::combine(self.d, o.d),
        }
        .normalize()
    }

    pub fn sub(&self, o: &Surd) -> Surd {
        Surd {
            a: &self.a - &o.a,
            b: &self.b - &o.b,
            d: Surd::combine(self.d, o.d),
        }
        .normalize()
    }

    pub fn mul(&self, o: &Surd) -> Surd {
        let d = Surd::combine(self.d, o.d);
        let dq = Rational::from_integer(d.into());
        Surd {
            a: &self.a * &o.a + &self.b * &o.b * dq,
            b: &self.a * &o.b + &self.b * &o.a,
            d,
        }
        .normalize()
    }

    pub fn neg(&self) -> Surd {
        Surd {
            a: -self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }

    pub fn inv(&self) -> Surd {
        assert!(!self.is_zero(), "inverse of zero");
        let dq = Rational::from_integer(self.d.into());
        let norm = &self.a * &self.a - &self.b * &self.b * dq;
        Surd {
            a: &self.a / &norm,
            b: -(&self.b / &norm),
            d: self.d,
        }
        .normalize()
    }

    pub fn div(&self, o: &Surd) -> Surd {
        self.mul(&o.inv())
    }

    /// Parses rationals and expressions with `sqrt(k)`, e.g. `"-sqrt(3)/2"`,
    /// `"1/2 + 1/2*sqrt(3)"`.
    pub fn parse(s: &str) -> Result<Surd, String> {
        let mut p = SurdParser {
            chars: s.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        };
        let v = p.expr()?;
        if p.pos != p.chars.len() {
            return Err(format!("unexpected input at position {} in `{s}`", p.pos));
        }
        Ok(v)
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return f.write_str(&format_rational(&self.a));
        }
        let rad = format!("{}*sqrt({})", format_rational(&self.b), self.d);
        if self.a.is_zero() {
            f.write_str(&rad)
        } else {
            write!(f, "{} + {}", format_rational(&self.a), rad)
        }
    }
}

/// `n = root² · rest` with `rest` square-free.
fn split_square(n: u64) -> (u64, u64) {
    if n == 0 {
        return (0, 0);
    }
    let mut root = 1u64;
    let mut rest = n;
    let mut f = 2u64;
    while f * f <= rest {
        while rest % (f * f) == 0 {
            rest /= f * f;
            root *= f;
        }
        f += 1;
    }
    (root, rest)
}

struct SurdParser {
    chars: Vec<char>,
    pos: usize,
}

impl SurdParser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Surd, String> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                '-' => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Surd, String> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                '*' => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                '/' => {
                    self.pos += 1;
                    let d = self.unary()?;
                    if d.is_zero() {
                        return Err("division by zero".into());
                    }
                    acc = acc.div(&d);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Surd, String> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Surd, String> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(format!("expected `)` at position {}", self.pos));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                let lit: String = self.chars[start..self.pos].iter().collect();
                parse_rational(&lit)
                    .map(Surd::rational)
                    .map_err(|e| e.to_string())
            }
            Some('s') => {
                let word: String = self.chars[self.pos..].iter().take(5).collect();
                if word != "sqrt(" {
                    return Err(format!("unexpected input at position {}", self.pos));
                }
                self.pos += 5;
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let lit: String = self.chars[start..self.pos].iter().collect();
                if self.peek() != Some(')') || lit.is_empty() {
                    return Err("sqrt takes a non-negative integer literal".into());
                }
                self.pos += 1;
                let n: u64 = lit.parse().map_err(|_| format!("bad radicand `{lit}`"))?;
                Ok(Surd::new(Rational::zero(), Rational::one(), n))
            }
            _ => Err(format!("unexpected input at position {}", self.pos)),
        }
    }
}

/// Best rational approximation with denominator at most `max_den`, when it
/// reproduces `x` to within `tol`.
pub fn snap_rational(x: f64, max_den: i64, tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor();
        if a.abs() > 1e12 {
            break;
        }
        let ai = a as i64;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if ((h1 as f64 / k1 as f64) - x).abs() <= tol {
            return Some(Rational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = v - a;
        if frac.abs() < 1e-300 {
            break;
        }
        v = 1.0 / frac;
    }
    None
}

/// Exact square root of a non-negative rational, when it is rational.
pub fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = int_sqrt(q.numer())?;
    let d = int_sqrt(q.denom())?;
    Some(Rational::new(n, d))
}

fn int_sqrt(n: &BigInt) -> Option<BigInt> {
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

pub fn rational_to_i64(q: &Rational) -> Option<i64> {
    if q.denom().is_one() {
        q.numer().to_i64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn field_arithmetic() {
        let h = Surd::parse("sqrt(3)/2").unwrap();
        let c = Surd::parse("-1/2").unwrap();
        // cos² + sin² = 1 for the rotation by 2π/3
        assert_eq!(h.mul(&h).add(&c.mul(&c)), Surd::one());
        assert_eq!(h.div(&h), Surd::one());
        assert_eq!(Surd::parse("sqrt(12)").unwrap(), Surd::parse("2*sqrt(3)").unwrap());
        assert_eq!(Surd::parse("sqrt(4)").unwrap(), Surd::from_int(2));
        assert!(Surd::parse("sqrt(x)").is_err());
        let s = Surd::parse("1/2 + -1/2*sqrt(3)").unwrap();
        assert_eq!(Surd::parse(&s.to_string()).unwrap(), s);
        assert!((s.to_f64() - (0.5 - 0.75f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn snapping() {
        assert_eq!(snap_rational(0.5, 100, 1e-12), Some(rat(1, 2)));
        assert_eq!(snap_rational(-2.0 / 3.0, 100, 1e-12), Some(rat(-2, 3)));
        assert_eq!(snap_rational(std::f64::consts::PI, 100, 1e-12), None);
        assert_eq!(rational_sqrt(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(rational_sqrt(&rat(2, 1)), None);
    }
}
