//! Hilbert bases of invariants, module bases of equivariants, relations among
//! the generators, rewriting in the generators and lifting orbit-space points.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::groups::{GroupError, GroupRep};
use crate::linalg;
use crate::poly::{CompiledMap, Monomial, PolyError, PolyMap, Polynomial, Rational};

pub const DEFAULT_INVARIANT_CAP: u32 = 6;
pub const DEFAULT_EQUIVARIANT_CAP: u32 = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvariantError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("empty basis: only constants are invariant up to degree {0}")]
    EmptyBasis(u32),
    #[error("polynomial is not invariant")]
    NotInvariant,
    #[error("map is not equivariant")]
    NotEquivariant,
    #[error("no representation up to weighted degree {0}; the basis may be incomplete (raise the degree cap)")]
    NoRepresentation(u32),
    #[error("generator {0} is not homogeneous of positive degree")]
    NotHomogeneous(usize),
    #[error("generator {0} is redundant: it lies in the algebra of the others")]
    Redundant(usize),
    #[error("lift did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
}

/// Coordinates of homogeneous polynomials of a fixed degree with respect to
/// the monomials of that degree (largest first).
struct Slice {
    monomials: Vec<Monomial>,
    index: BTreeMap<Monomial, usize>,
}

impl Slice {
    fn new(nvars: usize, degree: u32) -> Self {
        let monomials = Monomial::all_of_degree(nvars, degree);
        let index = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Slice { monomials, index }
    }

    fn len(&self) -> usize {
        self.monomials.len()
    }

    fn coords(&self, p: &Polynomial) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.len()];
        for (m, c) in p.terms() {
            if let Some(&i) = self.index.get(m) {
                v[i] = c.clone();
            }
        }
        v
    }

    fn poly(&self, nvars: usize, c: &[Rational]) -> Polynomial {
        Polynomial::from_terms(
            nvars,
            self.monomials
                .iter()
                .zip(c)
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Map coordinates: index `monomial · n + component`.
    fn map_coords(&self, f: &PolyMap) -> Vec<Rational> {
        let n = f.len();
        let mut v = vec![Rational::zero(); self.len() * n];
        for (k, comp) in f.components().iter().enumerate() {
            for (m, c) in comp.terms() {
                if let Some(&i) = self.index.get(m) {
                    v[i * n + k] = c.clone();
                }
            }
        }
        v
    }

    fn map(&self, nvars: usize, ncomp: usize, c: &[Rational]) -> PolyMap {
        let comps = (0..ncomp)
            .map(|k| {
                Polynomial::from_terms(
                    nvars,
                    self.monomials
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !c[i * ncomp + k].is_zero())
                        .map(|(i, m)| (m.clone(), c[i * ncomp + k].clone())),
                )
            })
            .collect();
        PolyMap::from_components(nvars, comps)
    }
}

/// Rows of `candidates` reduced modulo `span`, then row-reduced; these span a
/// complement of `span` inside `span + candidates`.
fn quotient_rows(span: &[Vec<Rational>], candidates: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    if candidates.is_empty() {
        return Vec::new();
    }
    let mut s = span.to_vec();
    let pivots = linalg::rref(&mut s);
    let mut reduced: Vec<Vec<Rational>> = candidates
        .iter()
        .map(|c| {
            let mut c = c.clone();
            for (row, &p) in s.iter().zip(&pivots) {
                if !c[p].is_zero() {
                    let f = c[p].clone();
                    for (x, y) in c.iter_mut().zip(row) {
                        if !y.is_zero() {
                            *x -= &f * y;
                        }
                    }
                }
            }
            c
        })
        .collect();
    linalg::rref(&mut reduced);
    reduced
}

fn lin_rows_from_polys(polys: &[Polynomial], slice: &Slice) -> Vec<Vec<Rational>> {
    polys.iter().map(|p| slice.coords(p)).collect()
}

/// Invariant polynomials of degree `d` as row-reduced coordinates.
fn invariant_slice(g: &GroupRep, slice: &Slice, d: u32) -> Result<Vec<Vec<Rational>>, InvariantError> {
    let n = g.dim();
    let mut rows: Vec<Vec<Rational>> = if g.order() == 1 {
        linalg::identity(slice.len())
    } else {
        slice
            .monomials
            .iter()
            .map(|m| {
                g.average(&Polynomial::monomial(m.clone(), Rational::one()))
                    .map(|p| slice.coords(&p))
            })
            .collect::<Result<_, _>>()?
    };
    linalg::rref(&mut rows);
    if g.torus_rank() == 0 || rows.is_empty() || d == 0 {
        return Ok(rows);
    }
    // kernel of the derivations p ↦ ∇p·(ξ_a x) inside the span of `rows`
    let images: Vec<Vec<Polynomial>> = rows
        .iter()
        .map(|r| {
            let p = slice.poly(n, r);
            (0..g.torus_rank()).map(|a| g.lie_derivative(&p, a)).collect()
        })
        .collect();
    let mut constraint: Vec<Vec<Rational>> = Vec::new();
    for a in 0..g.torus_rank() {
        let mut by_mono: BTreeMap<Monomial, Vec<Rational>> = BTreeMap::new();
        for (k, img) in images.iter().enumerate() {
            for (m, c) in img[a].terms() {
                by_mono
                    .entry(m.clone())
                    .or_insert_with(|| vec![Rational::zero(); rows.len()])[k] = c.clone();
            }
        }
        constraint.extend(by_mono.into_values());
    }
    let ker = linalg::nullspace(&constraint, rows.len());
    let mut out: Vec<Vec<Rational>> = ker
        .iter()
        .map(|c| {
            let mut v = vec![Rational::zero(); slice.len()];
            for (ck, r) in c.iter().zip(&rows) {
                if !ck.is_zero() {
                    for (x, y) in v.iter_mut().zip(r) {
                        *x += ck * y;
                    }
                }
            }
            v
        })
        .collect();
    linalg::rref(&mut out);
    Ok(out)
}

/// Equivariant maps of degree `d` as row-reduced map coordinates.
fn equivariant_slice(g: &GroupRep, slice: &Slice) -> Result<Vec<Vec<Rational>>, InvariantError> {
    let n = g.dim();
    let width = slice.len() * n;
    let mut rows: Vec<Vec<Rational>> = if g.order() == 1 {
        linalg::identity(width)
    } else {
        let mut rows = Vec::with_capacity(width);
        for m in &slice.monomials {
            for k in 0..n {
                let mut comps = vec![Polynomial::zero(n); n];
                comps[k] = Polynomial::monomial(m.clone(), Rational::one());
                let f = g.average_equivariant(&PolyMap::from_components(n, comps))?;
                rows.push(slice.map_coords(&f));
            }
        }
        rows
    };
    linalg::rref(&mut rows);
    if g.torus_rank() == 0 || rows.is_empty() {
        return Ok(rows);
    }
    // ξ F(x) − DF(x) ξ x = 0
    let mut constraint: Vec<Vec<Rational>> = Vec::new();
    for (a, xi) in g.torus_generators().iter().enumerate() {
        let mut by_key: BTreeMap<(Monomial, usize), Vec<Rational>> = BTreeMap::new();
        for (k, r) in rows.iter().enumerate() {
            let f = slice.map(n, n, r);
            for i in 0..n {
                let mut lhs = Polynomial::zero(n);
                for (j, c) in xi[i].iter().enumerate() {
                    if !c.is_zero() {
                        lhs = &lhs + &f.component(j).scale(c);
                    }
                }
                let defect = &lhs - &g.lie_derivative(f.component(i), a);
                for (m, c) in defect.terms() {
                    by_key
                        .entry((m.clone(), i))
                        .or_insert_with(|| vec![Rational::zero(); rows.len()])[k] = c.clone();
                }
            }
        }
        constraint.extend(by_key.into_values());
    }
    let ker = linalg::nullspace(&constraint, rows.len());
    let mut out: Vec<Vec<Rational>> = ker
        .iter()
        .map(|c| {
            let mut v = vec![Rational::zero(); width];
            for (ck, r) in c.iter().zip(&rows) {
                if !ck.is_zero() {
                    for (x, y) in v.iter_mut().zip(r) {
                        *x += ck * y;
                    }
                }
            }
            v
        })
        .collect();
    linalg::rref(&mut out);
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct InvariantBasis {
    nvars: usize,
    generators: Vec<Polynomial>,
    degrees: Vec<u32>,
    relations: Vec<Polynomial>,
    map: PolyMap,
    gradients: Vec<PolyMap>,
    compiled: CompiledMap,
    compiled_gradients: Vec<CompiledMap>,
}

impl InvariantBasis {
    /// Wraps homogeneous generators without checking invariance; relations
    /// are discovered up to `relation_cap` (default twice the top degree).
    pub fn from_generators(
        nvars: usize,
        generators: Vec<Polynomial>,
        relation_cap: Option<u32>,
    ) -> Result<Self, InvariantError> {
        let mut degrees = Vec::with_capacity(generators.len());
        for (i, g) in generators.iter().enumerate() {
            if g.nvars() != nvars {
                return Err(InvariantError::Dimension {
                    expected: nvars,
                    found: g.nvars(),
                });
            }
            match g.degree() {
                Some(d) if d >= 1 && g.is_homogeneous() => degrees.push(d),
                _ => return Err(InvariantError::NotHomogeneous(i)),
            }
        }
        let map = PolyMap::from_components(nvars, generators.clone());
        let gradients: Vec<PolyMap> = generators.iter().map(Polynomial::gradient).collect();
        let mut basis = InvariantBasis {
            nvars,
            compiled: CompiledMap::new(&map),
            compiled_gradients: gradients.iter().map(CompiledMap::new).collect(),
            generators,
            degrees,
            relations: Vec::new(),
            map,
            gradients,
        };
        let cap = relation_cap.unwrap_or(2 * basis.degrees.iter().copied().max().unwrap_or(0));
        basis.relations = discover_relations(&basis, cap);
        Ok(basis)
    }

    /// Validates a supplied basis against the group: invariance and
    /// independence modulo products of lower-degree generators.
    pub fn validated(g: &GroupRep, generators: Vec<Polynomial>) -> Result<Self, InvariantError> {
        let basis = InvariantBasis::from_generators(g.dim(), generators, None)?;
        for (i, p) in basis.generators.iter().enumerate() {
            if !g.is_invariant(p)? {
                return Err(InvariantError::NotInvariant);
            }
            let others: Vec<usize> = (0..basis.len()).filter(|&j| j != i).collect();
            if basis.in_subalgebra(p, &others) {
                return Err(InvariantError::Redundant(i));
            }
        }
        Ok(basis)
    }

    /// Whether `p` is a polynomial in the listed generators.
    fn in_subalgebra(&self, p: &Polynomial, which: &[usize]) -> bool {
        let d = p.degree().unwrap_or(0);
        let weights: Vec<u32> = (0..self.len())
            .map(|i| if which.contains(&i) { self.degrees[i] } else { 0 })
            .collect();
        let slice = Slice::new(self.nvars, d);
        let cols: Vec<Polynomial> = Monomial::all_of_weighted_degree(&weights, d)
            .iter()
            .map(|m| self.expand_monomial(m))
            .collect();
        let a = linalg::transpose(&lin_rows_from_polys(&cols, &slice));
        linalg::solve(&a, &slice.coords(p), cols.len()).is_some()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn relations(&self) -> &[Polynomial] {
        &self.relations
    }

    pub fn as_map(&self) -> &PolyMap {
        &self.map
    }

    pub fn gradient(&self, i: usize) -> &PolyMap {
        &self.gradients[i]
    }

    /// `θ^α` expanded in `x`.
    pub fn expand_monomial(&self, m: &Monomial) -> Polynomial {
        let mut acc = Polynomial::one(self.nvars);
        for (i, &e) in m.exponents().iter().enumerate() {
            if e > 0 {
                acc = &acc * &self.generators[i].pow(e);
            }
        }
        acc
    }

    /// `q(θ(x))`.
    pub fn expand(&self, q: &Polynomial) -> Result<Polynomial, PolyError> {
        q.compose(&self.map)
    }

    pub fn hilbert_map(&self, v: &[f64]) -> Vec<f64> {
        self.compiled.eval(v)
    }

    /// `∂θ_i/∂v_k`, row-major `l × n`.
    pub fn jacobian(&self, v: &[f64]) -> DMatrix<f64> {
        let l = self.len();
        let mut j = DMatrix::zeros(l, self.nvars);
        for (i, g) in self.compiled_gradients.iter().enumerate() {
            for (k, x) in g.eval(v).into_iter().enumerate() {
                j[(i, k)] = x;
            }
        }
        j
    }

    /// Polynomial `q` in `l` variables with `q(θ) = p`. Each homogeneous part
    /// is solved separately; among several solutions the one supported on
    /// the smallest θ-monomials is returned.
    pub fn rewrite(&self, p: &Polynomial) -> Result<Polynomial, InvariantError> {
        if p.nvars() != self.nvars {
            return Err(InvariantError::Dimension {
                expected: self.nvars,
                found: p.nvars(),
            });
        }
        let l = self.len();
        let mut out = Polynomial::zero(l);
        let Some(top) = p.degree() else {
            return Ok(out);
        };
        for d in 0..=top {
            let part = p.homogeneous_part(d);
            if part.is_zero() {
                continue;
            }
            if d == 0 {
                out = &out + &Polynomial::constant(l, part.constant_term());
                continue;
            }
            let mut monos = Monomial::all_of_weighted_degree(&self.degrees, d);
            monos.reverse();
            let slice = Slice::new(self.nvars, d);
            let cols: Vec<Polynomial> = monos.iter().map(|m| self.expand_monomial(m)).collect();
            let a = linalg::transpose(&lin_rows_from_polys(&cols, &slice));
            let c = linalg::solve(&a, &slice.coords(&part), cols.len())
                .ok_or(InvariantError::NoRepresentation(d))?;
            for (m, c) in monos.into_iter().zip(c) {
                out.add_term(m, c);
            }
        }
        Ok(out)
    }

    /// Gauss–Newton on `v ↦ θ(v) − target` with minimum-norm steps.
    pub fn lift_point(&self, target: &[f64], guess: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>, InvariantError> {
        if target.len() != self.len() {
            return Err(InvariantError::Dimension {
                expected: self.len(),
                found: target.len(),
            });
        }
        if guess.len() != self.nvars {
            return Err(InvariantError::Dimension {
                expected: self.nvars,
                found: guess.len(),
            });
        }
        if linalg::max_abs(target) <= tol {
            return Ok(vec![0.0; self.nvars]);
        }
        let mut v = DVector::from_column_slice(guess);
        let tgt = DVector::from_column_slice(target);
        let scale = 1.0 + tgt.norm();
        for _ in 0..=max_iter {
            let r = DVector::from_vec(self.hilbert_map(v.as_slice())) - &tgt;
            if r.norm() <= tol {
                return Ok(v.iter().copied().collect());
            }
            let j = self.jacobian(v.as_slice());
            let step = linalg::lstsq(&j, &r, 1e-12);
            v -= step;
            if !v.iter().all(|x| x.is_finite()) || v.norm() > 1e8 * scale {
                break;
            }
        }
        Err(InvariantError::NoConvergence(max_iter))
    }

    /// Default starting point: a random direction scaled by the typical size
    /// `|θ_i|^(1/deg θ_i)`.
    pub fn default_guess<R: Rng + ?Sized>(&self, target: &[f64], rng: &mut R) -> Vec<f64> {
        let mags: Vec<f64> = target
            .iter()
            .zip(&self.degrees)
            .map(|(t, &d)| t.abs().powf(1.0 / d as f64))
            .collect();
        let scale = if mags.is_empty() {
            1.0
        } else {
            mags.iter().sum::<f64>() / mags.len() as f64
        };
        let mut v: Vec<f64> = (0..self.nvars).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nv = linalg::norm(&v).max(1e-12);
        for x in &mut v {
            *x *= scale / nv;
        }
        v
    }

    /// [`lift_point`](Self::lift_point) from `guess`, then from up to
    /// `retries` random guesses.
    pub fn lift_with_retries<R: Rng + ?Sized>(
        &self,
        target: &[f64],
        guess: Option<&[f64]>,
        tol: f64,
        max_iter: usize,
        retries: usize,
        rng: &mut R,
    ) -> Result<Vec<f64>, InvariantError> {
        if let Some(g) = guess {
            if let Ok(v) = self.lift_point(target, g, tol, max_iter) {
                return Ok(v);
            }
        }
        for _ in 0..retries {
            let g = self.default_guess(target, rng);
            if let Ok(v) = self.lift_point(target, &g, tol, max_iter) {
                return Ok(v);
            }
        }
        Err(InvariantError::NoConvergence(max_iter))
    }
}

/// Exact rewrite after checking invariance under `g`.
pub fn rewrite_in_generators(p: &Polynomial, basis: &InvariantBasis, g: &GroupRep) -> Result<Polynomial, InvariantError> {
    if !g.is_invariant(p)? {
        return Err(InvariantError::NotInvariant);
    }
    basis.rewrite(p)
}

/// Generators of the invariant ring up to `max_degree`: new invariants at
/// each degree modulo products of the generators already found.
pub fn discover_invariants(g: &GroupRep, max_degree: u32) -> Result<InvariantBasis, InvariantError> {
    let n = g.dim();
    let mut gens: Vec<Polynomial> = Vec::new();
    let mut degrees: Vec<u32> = Vec::new();
    for d in 1..=max_degree.max(1) {
        let slice = Slice::new(n, d);
        let inv = invariant_slice(g, &slice, d)?;
        if inv.is_empty() {
            continue;
        }
        let products: Vec<Vec<Rational>> = Monomial::all_of_weighted_degree(&degrees, d)
            .iter()
            .map(|m| {
                let mut p = Polynomial::one(n);
                for (i, &e) in m.exponents().iter().enumerate() {
                    if e > 0 {
                        p = &p * &gens[i].pow(e);
                    }
                }
                slice.coords(&p)
            })
            .collect();
        for row in quotient_rows(&products, &inv) {
            gens.push(slice.poly(n, &row));
            degrees.push(d);
        }
    }
    if gens.is_empty() {
        return Err(InvariantError::EmptyBasis(max_degree));
    }
    InvariantBasis::from_generators(n, gens, None)
}

/// Independent relations among the generators up to weighted degree `cap`,
/// each in primitive integer form, excluding multiples of lower ones.
pub fn discover_relations(basis: &InvariantBasis, cap: u32) -> Vec<Polynomial> {
    let l = basis.len();
    let mut relations: Vec<Polynomial> = Vec::new();
    let min_deg = basis.degrees.iter().copied().min().unwrap_or(1);
    for d in (2 * min_deg)..=cap {
        let monos = Monomial::all_of_weighted_degree(&basis.degrees, d);
        if monos.len() < 2 {
            continue;
        }
        let slice = Slice::new(basis.nvars, d);
        let cols: Vec<Polynomial> = monos.iter().map(|m| basis.expand_monomial(m)).collect();
        let a = linalg::transpose(&lin_rows_from_polys(&cols, &slice));
        let idx: BTreeMap<&Monomial, usize> = monos.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let kernel = linalg::nullspace(&a, monos.len());
        if kernel.is_empty() {
            continue;
        }
        let multiples: Vec<Vec<Rational>> = relations
            .iter()
            .flat_map(|r| {
                let rd = r
                    .leading_term()
                    .map(|(m, _)| m.weighted_degree(&basis.degrees))
                    .unwrap_or(0);
                Monomial::all_of_weighted_degree(&basis.degrees, d.saturating_sub(rd))
                    .into_iter()
                    .filter(move |_| rd < d)
                    .map(move |m| r.mul_monomial(&m, &Rational::one()))
            })
            .map(|p| {
                let mut v = vec![Rational::zero(); monos.len()];
                for (m, c) in p.terms() {
                    v[idx[m]] = c.clone();
                }
                v
            })
            .collect();
        for row in quotient_rows(&multiples, &kernel) {
            let p = Polynomial::from_terms(
                l,
                monos
                    .iter()
                    .zip(&row)
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(m, c)| (m.clone(), c.clone())),
            );
            relations.push(p.primitive());
        }
    }
    relations
}

#[derive(Clone, Debug)]
pub struct EquivariantBasis {
    nvars: usize,
    generators: Vec<PolyMap>,
    degrees: Vec<u32>,
}

impl EquivariantBasis {
    pub fn new(nvars: usize, generators: Vec<PolyMap>) -> Result<Self, InvariantError> {
        let mut degrees = Vec::new();
        for (i, f) in generators.iter().enumerate() {
            if f.nvars() != nvars || f.len() != nvars {
                return Err(InvariantError::Dimension {
                    expected: nvars,
                    found: f.len(),
                });
            }
            let d = f.degree().ok_or(InvariantError::NotHomogeneous(i))?;
            let homogeneous = f
                .components()
                .iter()
                .all(|c| c.is_zero() || (c.is_homogeneous() && c.degree() == Some(d)));
            if !homogeneous {
                return Err(InvariantError::NotHomogeneous(i));
            }
            degrees.push(d);
        }
        Ok(EquivariantBasis {
            nvars,
            generators,
            degrees,
        })
    }

    pub fn validated(g: &GroupRep, generators: Vec<PolyMap>) -> Result<Self, InvariantError> {
        let b = EquivariantBasis::new(g.dim(), generators)?;
        for f in &b.generators {
            if !g.is_equivariant(f)? {
                return Err(InvariantError::NotEquivariant);
            }
        }
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[PolyMap] {
        &self.generators
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Coefficients `q_j(θ)` with `f = Σ_j q_j(θ) F_j`, solved by homogeneous
    /// degree over the products `θ^α F_j`.
    pub fn rewrite(&self, f: &PolyMap, inv: &InvariantBasis) -> Result<Vec<Polynomial>, InvariantError> {
        let n = self.nvars;
        let l = inv.len();
        let mut out = vec![Polynomial::zero(l); self.len()];
        let Some(top) = f.degree() else {
            return Ok(out);
        };
        for d in 0..=top {
            let part = PolyMap::from_components(
                n,
                f.components().iter().map(|c| c.homogeneous_part(d)).collect(),
            );
            if part.is_zero() {
                continue;
            }
            let slice = Slice::new(n, d);
            let mut cols: Vec<(usize, Monomial)> = Vec::new();
            let mut rows_t: Vec<Vec<Rational>> = Vec::new();
            for (j, fj) in self.generators.iter().enumerate() {
                if self.degrees[j] > d {
                    continue;
                }
                let mut monos = Monomial::all_of_weighted_degree(inv.degrees(), d - self.degrees[j]);
                monos.reverse();
                for m in monos {
                    let scaled = fj.scale_by(&inv.expand_monomial(&m));
                    rows_t.push(slice.map_coords(&scaled));
                    cols.push((j, m));
                }
            }
            let a = linalg::transpose(&rows_t);
            let c = linalg::solve(&a, &slice.map_coords(&part), cols.len())
                .ok_or(InvariantError::NoRepresentation(d))?;
            for ((j, m), c) in cols.into_iter().zip(c) {
                out[j].add_term(m, c);
            }
        }
        Ok(out)
    }
}

/// Module generators of the equivariant maps up to `max_degree`, including
/// constant maps onto fixed vectors.
pub fn discover_equivariants(
    g: &GroupRep,
    inv: &InvariantBasis,
    max_degree: u32,
) -> Result<EquivariantBasis, InvariantError> {
    let n = g.dim();
    let mut gens: Vec<PolyMap> = Vec::new();
    let mut degrees: Vec<u32> = Vec::new();
    for d in 0..=max_degree {
        let slice = Slice::new(n, d);
        let eq = equivariant_slice(g, &slice)?;
        if eq.is_empty() {
            continue;
        }
        let mut products: Vec<Vec<Rational>> = Vec::new();
        for (j, fj) in gens.iter().enumerate() {
            if degrees[j] >= d {
                continue;
            }
            for m in Monomial::all_of_weighted_degree(inv.degrees(), d - degrees[j]) {
                products.push(slice.map_coords(&fj.scale_by(&inv.expand_monomial(&m))));
            }
        }
        for row in quotient_rows(&products, &eq) {
            gens.push(slice.map(n, n, &row));
            degrees.push(d);
        }
    }
    EquivariantBasis::new(n, gens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::Surd;
    use crate::poly::int;

    fn z2() -> GroupRep {
        GroupRep::new(1, &[vec![vec![Surd::from_int(-1)]]], vec![], 4).unwrap()
    }

    fn so2() -> GroupRep {
        GroupRep::new(2, &[], vec![vec![vec![int(0), int(-1)], vec![int(1), int(0)]]], 1).unwrap()
    }

    fn text(p: &Polynomial, names: &[&str]) -> String {
        p.to_text(names)
    }

    #[test]
    fn small_bases() {
        let b = discover_invariants(&z2(), 4).unwrap();
        assert_eq!(b.generators().len(), 1);
        assert_eq!(text(&b.generators()[0], &["x"]), "1 * x^2");
        let b = discover_invariants(&so2(), 4).unwrap();
        assert_eq!(text(&b.generators()[0], &["x", "y"]), "1 * x^2 + 1 * y^2");
        assert!(b.relations().is_empty());
        let b = discover_invariants(&GroupRep::trivial(2), 1).unwrap();
        assert_eq!(b.len(), 2);
        assert!(b.relations().is_empty());
    }

    #[test]
    fn small_equivariants() {
        let g = z2();
        let inv = discover_invariants(&g, 4).unwrap();
        let e = discover_equivariants(&g, &inv, 3).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.generators()[0].to_text(&["x"]), vec!["1 * x"]);
        let g = so2();
        let inv = discover_invariants(&g, 4).unwrap();
        let e = discover_equivariants(&g, &inv, 3).unwrap();
        let texts: Vec<Vec<String>> = e.generators().iter().map(|f| f.to_text(&["x", "y"])).collect();
        assert_eq!(
            texts,
            vec![vec!["1 * x", "1 * y"], vec!["-1 * y", "1 * x"]]
        );
        let g = GroupRep::trivial(1);
        let inv = discover_invariants(&g, 1).unwrap();
        let e = discover_equivariants(&g, &inv, 1).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.generators()[0].to_text(&["x"]), vec!["1"]);
    }

    #[test]
    fn rewrites_and_lifts() {
        let b = discover_invariants(&so2(), 4).unwrap();
        let p = Polynomial::parse("x^4 + 2*x^2*y^2 + y^4", &["x", "y"]).unwrap();
        assert_eq!(text(&b.rewrite(&p).unwrap(), &["t1"]), "1 * t1^2");
        let odd = Polynomial::parse("x", &["x", "y"]).unwrap();
        assert!(matches!(rewrite_in_generators(&odd, &b, &so2()), Err(InvariantError::NotInvariant)));
        assert_eq!(b.hilbert_map(&[3.0, 4.0]), vec![25.0]);
        let v = b.lift_point(&[25.0], &[1.0, 1.0], 1e-10, 50).unwrap();
        assert!((v[0] * v[0] + v[1] * v[1] - 25.0).abs() <= 1e-10);
        let bz = discover_invariants(&z2(), 4).unwrap();
        assert_eq!(bz.hilbert_map(&[2.0]), vec![4.0]);
        assert!(matches!(bz.lift_point(&[-1.0], &[0.3], 1e-10, 50), Err(InvariantError::NoConvergence(_))));
    }

    fn s1() -> GroupRep {
        let j = |i: i64| int(i);
        let xi = vec![
            vec![j(0), j(-1), j(0), j(0)],
            vec![j(1), j(0), j(0), j(0)],
            vec![j(0), j(0), j(0), j(-1)],
            vec![j(0), j(0), j(1), j(0)],
        ];
        GroupRep::new(4, &[], vec![xi], 1).unwrap()
    }

    const S1_NAMES: [&str; 4] = ["q1", "p1", "q2", "p2"];

    #[test]
    fn circle_on_c2() {
        let g = s1();
        let found = discover_invariants(&g, 4).unwrap();
        let texts: Vec<String> = found.generators().iter().map(|p| text(p, &S1_NAMES)).collect();
        assert_eq!(
            texts,
            vec![
                "1 * q1^2 + 1 * p1^2",
                "1 * q1*q2 + 1 * p1*p2",
                "1 * p1*q2 + -1 * q1*p2",
                "1 * q2^2 + 1 * p2^2",
            ]
        );
        let hand: Vec<Polynomial> = ["1/2*q1^2+1/2*p1^2", "1/2*q2^2+1/2*p2^2", "q1*q2+p1*p2", "q1*p2-p1*q2"]
            .iter()
            .map(|t| Polynomial::parse(t, &S1_NAMES).unwrap())
            .collect();
        let b = InvariantBasis::validated(&g, hand).unwrap();
        let t = ["t1", "t2", "t3", "t4"];
        let rel: Vec<String> = b.relations().iter().map(|r| text(r, &t)).collect();
        assert_eq!(rel, vec!["4 * t1*t2 + -1 * t3^2 + -1 * t4^2"]);
        let p = Polynomial::parse("(q1*q2+p1*p2)^2 + (q1*p2-p1*q2)^2", &S1_NAMES).unwrap();
        let q = b.rewrite(&p).unwrap();
        assert_eq!(text(&q, &t), "1 * t3^2 + 1 * t4^2");
        assert_eq!(b.expand(&q).unwrap(), p);
        let v = b.lift_point(&[0.5, 0.5, 1.0, 0.0], &[0.9, 0.1, 1.1, -0.2], 1e-10, 100).unwrap();
        let th = b.hilbert_map(&v);
        for (a, e) in th.iter().zip([0.5, 0.5, 1.0, 0.0]) {
            assert!((a - e).abs() <= 1e-10);
        }
    }

    #[test]
    fn dihedral_triangle() {
        let r: Vec<Vec<Surd>> = [["-1/2", "-sqrt(3)/2"], ["sqrt(3)/2", "-1/2"]]
            .iter()
            .map(|row| row.iter().map(|s| Surd::parse(s).unwrap()).collect())
            .collect();
        let s = vec![
            vec![Surd::from_int(1), Surd::from_int(0)],
            vec![Surd::from_int(0), Surd::from_int(-1)],
        ];
        let g = GroupRep::new(2, &[r, s], vec![], 10).unwrap();
        let b = discover_invariants(&g, 6).unwrap();
        let texts: Vec<String> = b.generators().iter().map(|p| text(p, &["x", "y"])).collect();
        assert_eq!(texts, vec!["1 * x^2 + 1 * y^2", "1 * x^3 + -3 * x*y^2"]);
        assert!(b.relations().is_empty());
        let e = discover_equivariants(&g, &b, 5).unwrap();
        let texts: Vec<Vec<String>> = e.generators().iter().map(|f| f.to_text(&["x", "y"])).collect();
        assert_eq!(
            texts,
            vec![vec!["1 * x", "1 * y"], vec!["1 * x^2 + -1 * y^2", "-2 * x*y"]]
        );
    }
}
