//! Exact sparse multivariate polynomials over the rationals.
//!
//! Terms are stored in a `BTreeMap` keyed by [`Monomial`], whose ordering is
//! graded reverse-lexicographic. Iteration through [`Polynomial::terms`] runs
//! from the leading (largest) monomial down, which is also the order used by
//! the text serialization.

mod eval;
mod map;
mod text;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use eval::{CompiledMap, CompiledPoly};
pub use map::{Pairing, PolyMap};
pub use text::{format_rational, parse_rational};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("variable index {index} out of range for {nvars} variables")]
    VarIndex { index: usize, nvars: usize },
    #[error("arity mismatch: polynomial has {expected} variables but {found} substitutions were given")]
    Arity { expected: usize, found: usize },
    #[error("poisson bracket needs an even dimension, got {0}")]
    OddDimension(usize),
    #[error("malformed pairing: {0}")]
    Pairing(String),
    #[error("parse error at position {pos}: {message}")]
    Parse { pos: usize, message: String },
}

/// Exponent vector of a monomial. Ordered graded reverse-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial {
            exps: vec![0; nvars],
        }
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[index] = 1;
        Monomial { exps }
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn weighted_degree(&self, weights: &[u32]) -> u32 {
        self.exps.iter().zip(weights).map(|(e, w)| e * w).sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut exps = Vec::with_capacity(self.exps.len());
        for (a, b) in self.exps.iter().zip(&other.exps) {
            if b > a {
                return None;
            }
            exps.push(a - b);
        }
        Some(Monomial { exps })
    }

    /// All monomials of total degree `degree` in `nvars` variables, largest first.
    pub fn all_of_degree(nvars: usize, degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; nvars];
        fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if i + 1 == cur.len() {
                cur[i] = left;
                out.push(Monomial { exps: cur.clone() });
                return;
            }
            for e in 0..=left {
                cur[i] = e;
                rec(i + 1, left - e, cur, out);
            }
            cur[i] = 0;
        }
        if nvars == 0 {
            if degree == 0 {
                out.push(Monomial { exps: vec![] });
            }
            return out;
        }
        rec(0, degree, &mut cur, &mut out);
        out.sort_by(|a, b| b.cmp(a));
        out
    }

    /// Monomials whose weighted degree equals `target`, largest first.
    pub fn all_of_weighted_degree(weights: &[u32], target: u32) -> Vec<Monomial> {
        let n = weights.len();
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fn rec(
            i: usize,
            left: u32,
            weights: &[u32],
            cur: &mut Vec<u32>,
            out: &mut Vec<Monomial>,
        ) {
            if i == weights.len() {
                if left == 0 {
                    out.push(Monomial { exps: cur.clone() });
                }
                return;
            }
            let w = weights[i];
            if w == 0 {
                // weightless variables are excluded from weighted enumeration
                cur[i] = 0;
                rec(i + 1, left, weights, cur, out);
                return;
            }
            let mut e = 0;
            while e * w <= left {
                cur[i] = e;
                rec(i + 1, left - e * w, weights, cur, out);
                e += 1;
            }
            cur[i] = 0;
        }
        rec(0, target, weights, &mut cur, &mut out);
        out.sort_by(|a, b| b.cmp(a));
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.exps.len().cmp(&other.exps.len()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for i in (0..self.exps.len()).rev() {
            if self.exps[i] != other.exps[i] {
                return other.exps[i].cmp(&self.exps[i]);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Checked binary arithmetic; scaling goes through [`Polynomial::scale`].
pub fn arithmetic(p: &Polynomial, q: &Polynomial, op: ArithOp) -> Result<Polynomial, PolyError> {
    p.check_same_dim(q)?;
    Ok(match op {
        ArithOp::Add => p + q,
        ArithOp::Sub => p - q,
        ArithOp::Mul => p * q,
    })
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Polynomial::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Polynomial::constant(nvars, Rational::one())
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut p = Polynomial::zero(nvars);
        p.add_term(Monomial::var(nvars, index), Rational::one());
        p
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut p = Polynomial::zero(m.nvars());
        p.add_term(m, c);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Polynomial::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial arity");
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms from the leading monomial downwards.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> + '_ {
        self.terms.iter().rev()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one(self.nvars))
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).min()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degree() == self.min_degree()
    }

    pub fn homogeneous_part(&self, degree: u32) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        debug_assert_eq!(m.nvars(), self.nvars);
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_same_dim(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.nvars != other.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        Ok(())
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a * c))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        if c.is_zero() {
            return out;
        }
        for (k, a) in &self.terms {
            out.terms.insert(k.mul(m), a * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn differentiate(&self, var: usize) -> Result<Polynomial, PolyError> {
        if var >= self.nvars {
            return Err(PolyError::VarIndex {
                index: var,
                nvars: self.nvars,
            });
        }
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exps[var];
            if e == 0 {
                continue;
            }
            let mut exps = m.exps.clone();
            exps[var] -= 1;
            out.add_term(Monomial { exps }, c * Rational::from_integer(e.into()));
        }
        Ok(out)
    }

    /// Partial derivative with the index already known to be valid.
    pub(crate) fn d(&self, var: usize) -> Polynomial {
        self.differentiate(var).expect("variable index in range")
    }

    pub fn gradient(&self) -> PolyMap {
        PolyMap::from_components(self.nvars, (0..self.nvars).map(|k| self.d(k)).collect())
    }

    pub fn evaluate_exact(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.exps) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// Floating evaluation; powers are tabulated once per variable.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        let maxdeg: Vec<u32> = (0..self.nvars)
            .map(|k| self.terms.keys().map(|m| m.exps[k]).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<f64>> = point
            .iter()
            .zip(&maxdeg)
            .map(|(&x, &d)| {
                let mut v = Vec::with_capacity(d as usize + 1);
                let mut acc = 1.0;
                v.push(acc);
                for _ in 0..d {
                    acc *= x;
                    v.push(acc);
                }
                v
            })
            .collect();
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut t = rational_to_f64(c);
            for (k, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    t *= powers[k][e as usize];
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// Substitutes `subs[i]` for variable `i`.
    pub fn compose(&self, subs: &PolyMap) -> Result<Polynomial, PolyError> {
        if subs.len() != self.nvars {
            return Err(PolyError::Arity {
                expected: self.nvars,
                found: subs.len(),
            });
        }
        let target = subs.nvars();
        let mut cache: Vec<Vec<Polynomial>> = subs
            .components()
            .iter()
            .map(|c| vec![Polynomial::one(target), c.clone()])
            .collect();
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (k, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while cache[k].len() <= e as usize {
                    let next = &cache[k][cache[k].len() - 1] * &subs.components()[k];
                    cache[k].push(next);
                }
                t = &t * &cache[k][e as usize];
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Canonical bracket `{p,q} = Σ ∂p/∂q_a ∂q/∂p_a − ∂p/∂p_a ∂q/∂q_a`.
    pub fn poisson_bracket(&self, other: &Polynomial, pairing: &Pairing) -> Result<Polynomial, PolyError> {
        self.check_same_dim(other)?;
        if pairing.dim() != self.nvars {
            return Err(PolyError::Pairing(format!(
                "pairing covers {} coordinates, polynomial has {}",
                pairing.dim(),
                self.nvars
            )));
        }
        let mut out = Polynomial::zero(self.nvars);
        for &(q, p) in pairing.pairs() {
            out = &out + &(&(&self.d(q) * &other.d(p)) - &(&self.d(p) * &other.d(q)));
        }
        Ok(out)
    }

    /// Re-embeds into `new_nvars` variables, sending variable `i` to `map[i]`.
    pub fn remap(&self, new_nvars: usize, map: &[usize]) -> Polynomial {
        assert_eq!(map.len(), self.nvars);
        let mut out = Polynomial::zero(new_nvars);
        for (m, c) in &self.terms {
            let mut exps = vec![0u32; new_nvars];
            for (i, &e) in m.exps.iter().enumerate() {
                exps[map[i]] += e;
            }
            out.add_term(Monomial { exps }, c.clone());
        }
        out
    }

    /// Appends `extra` unused variables at the end.
    pub fn extend_vars(&self, extra: usize) -> Polynomial {
        let map: Vec<usize> = (0..self.nvars).collect();
        self.remap(self.nvars + extra, &map)
    }

    /// Splits by the power of variable `var`: `self = Σ_k var^k · parts[k]`,
    /// where each part no longer involves `var` (but keeps the same arity).
    pub fn split_by_var(&self, var: usize) -> Vec<Polynomial> {
        let mut parts: Vec<Polynomial> = Vec::new();
        for (m, c) in &self.terms {
            let e = m.exps[var] as usize;
            while parts.len() <= e {
                parts.push(Polynomial::zero(self.nvars));
            }
            let mut exps = m.exps.clone();
            exps[var] = 0;
            parts[e].add_term(Monomial { exps }, c.clone());
        }
        parts
    }

    /// Drops variable `var`, which must not occur.
    pub fn drop_var(&self, var: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars - 1);
        for (m, c) in &self.terms {
            assert_eq!(m.exps[var], 0, "dropped variable occurs");
            let mut exps = m.exps.clone();
            exps.remove(var);
            out.add_term(Monomial { exps }, c.clone());
        }
        out
    }

    pub fn involves_var(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.exps[var] > 0)
    }

    /// Multiplies through so that coefficients are coprime integers with a
    /// positive leading coefficient.
    pub fn primitive(&self) -> Polynomial {
        use num_integer::Integer;
        if self.is_zero() {
            return self.clone();
        }
        let mut den = num_bigint::BigInt::one();
        let mut num = num_bigint::BigInt::zero();
        for c in self.terms.values() {
            den = den.lcm(c.denom());
            num = num.gcd(c.numer());
        }
        let mut factor = Rational::new(den, num);
        if self.leading_term().unwrap().1.is_negative() {
            factor = -factor;
        }
        self.scale(&factor)
    }

    pub fn monic(&self) -> Polynomial {
        match self.leading_term() {
            Some((_, c)) => self.scale(&c.recip()),
            None => self.clone(),
        }
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys().rev()
    }
}

pub fn rational_to_f64(c: &Rational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        let n = c.numer().to_f64().unwrap_or(f64::NAN);
        let d = c.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomial dimension mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomial dimension mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomial dimension mismatch");
        let mut out = Polynomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = default_names("x", self.nvars);
        f.write_str(&self.to_text(&names))
    }
}

/// `prefix1, prefix2, …`
pub fn default_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy(text: &str) -> Polynomial {
        Polynomial::parse(text, &["x", "y"]).unwrap()
    }

    #[test]
    fn cancellation_and_squares() {
        assert_eq!(&xy("x + y") + &xy("x - y"), xy("2*x"));
        let s = xy("x^2 + y^2");
        assert_eq!(&s * &s, xy("x^4 + 2*x^2*y^2 + y^4"));
        assert_eq!(s.scale(&rat(3, 2)), xy("3/2*x^2 + 3/2*y^2"));
        assert!(arithmetic(&s, &Polynomial::zero(3), ArithOp::Add).is_err());
    }

    #[test]
    fn derivatives() {
        let s = xy("x^2 + y^2");
        assert_eq!(s.differentiate(0).unwrap(), xy("2*x"));
        assert_eq!(s.differentiate(1).unwrap(), xy("2*y"));
        assert_eq!(xy("x^3*y - x*y").differentiate(0).unwrap(), xy("3*x^2*y - y"));
        assert!(matches!(s.differentiate(2), Err(PolyError::VarIndex { .. })));
        let g = Polynomial::constant(2, int(5)).gradient();
        assert!(g.components().iter().all(Polynomial::is_zero));
    }

    #[test]
    fn evaluation() {
        let s = xy("x^2 + y^2");
        assert_eq!(s.evaluate_exact(&[int(3), int(4)]).unwrap(), int(25));
        assert_eq!(s.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(xy("x^3*y - x*y").evaluate(&[2.0, 1.0]).unwrap(), 6.0);
        assert!(s.evaluate(&[1.0]).is_err());
    }

    #[test]
    fn composition() {
        let sq = Polynomial::parse("t^2", &["t"]).unwrap();
        let subs = PolyMap::from_components(2, vec![xy("x^2 + y^2")]);
        assert_eq!(sq.compose(&subs).unwrap(), xy("x^4 + 2*x^2*y^2 + y^4"));
        let id = Polynomial::parse("t", &["t"]).unwrap();
        assert_eq!(id.compose(&subs).unwrap(), xy("x^2 + y^2"));
        let prod = Polynomial::parse("a*b", &["a", "b"]).unwrap();
        let subs2 = PolyMap::from_components(2, vec![xy("x^2"), xy("y^2")]);
        assert_eq!(prod.compose(&subs2).unwrap(), xy("x^2*y^2"));
        assert!(matches!(prod.compose(&subs), Err(PolyError::Arity { .. })));
    }

    #[test]
    fn canonical_brackets() {
        let names = ["q1", "p1", "q2", "p2"];
        let pr = Pairing::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let q1 = Polynomial::parse("q1", &names).unwrap();
        let p1 = Polynomial::parse("p1", &names).unwrap();
        assert_eq!(q1.poisson_bracket(&p1, &pr).unwrap(), Polynomial::one(4));
        let t1 = Polynomial::parse("1/2*q1^2 + 1/2*p1^2", &names).unwrap();
        let t3 = Polynomial::parse("q1*q2 + p1*p2", &names).unwrap();
        let t4 = Polynomial::parse("q1*p2 - p1*q2", &names).unwrap();
        assert_eq!(t1.poisson_bracket(&t3, &pr).unwrap(), t4);
        assert!(t4.poisson_bracket(&t4, &pr).unwrap().is_zero());
        let g = Polynomial::parse("q1*q2 + p1*p2", &names).unwrap().gradient();
        let expect: Vec<Polynomial> = ["q2", "p2", "q1", "p1"]
            .iter()
            .map(|s| Polynomial::parse(s, &names).unwrap())
            .collect();
        assert_eq!(g.components(), &expect[..]);
    }

    #[test]
    fn grevlex_order() {
        let x = Monomial::var(2, 0);
        let y = Monomial::var(2, 1);
        assert!(x > y);
        assert!(x.mul(&y) > y.mul(&y));
        assert!(x.mul(&x) > x.mul(&y));
        // x*z^0*... vs y^2 in three variables: grevlex prefers smaller last exponent
        let a = Monomial::from_exponents(vec![1, 0, 1]);
        let b = Monomial::from_exponents(vec![0, 2, 0]);
        assert!(b > a);
        let deg2 = Monomial::all_of_degree(3, 2);
        assert_eq!(deg2.len(), 6);
        assert!(deg2.windows(2).all(|w| w[0] > w[1]));
    }
}
