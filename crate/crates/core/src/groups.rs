//! Compact groups acting linearly on `V = ℝⁿ`: a finite group of orthogonal
//! matrices times a torus given by commuting antisymmetric generators.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use thiserror::Error;

use crate::linalg;
use crate::number::{snap_rational, Surd};
use crate::poly::{PolyError, PolyMap, Polynomial, Rational};

pub type Matrix = Vec<Vec<Surd>>;
pub type QMatrix = Vec<Vec<Rational>>;

/// Reported next to every `n_H` value.
pub const NH_FLAG: &str = "torus rank, finite-part quotient ignored";

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("{what}: expected dimension {expected}, found {found}")]
    Dimension {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("finite generator {0} is not orthogonal")]
    NotOrthogonal(usize),
    #[error("closure exceeded {0} elements")]
    ClosureExceeded(usize),
    #[error("torus generator {0} is not antisymmetric")]
    NotAntisymmetric(usize),
    #[error("torus generators {0} and {1} do not commute")]
    TorusNotCommuting(usize, usize),
    #[error("torus generator {torus} does not commute with finite element {element}")]
    TorusFiniteNotCommuting { torus: usize, element: usize },
    #[error("averaging left the rationals; the representation needs an orthonormal rational form")]
    NotRational,
    #[error("the group has a torus part; use the derivation kernel instead of averaging")]
    TorusPresent,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Closes a set of orthogonal matrices under multiplication. The identity
/// comes first, followed by elements in breadth-first order.
pub fn close_group(dim: usize, generators: &[Matrix], max_order: usize) -> Result<Vec<Matrix>, GroupError> {
    for (i, g) in generators.iter().enumerate() {
        check_square(g, dim, &format!("finite generator {i}"))?;
        let gtg = linalg::mat_mul(&linalg::transpose(g), g);
        if gtg != linalg::identity::<Surd>(dim) {
            return Err(GroupError::NotOrthogonal(i));
        }
    }
    let id = linalg::identity::<Surd>(dim);
    let mut seen: BTreeSet<Matrix> = BTreeSet::new();
    let mut out = vec![id.clone()];
    seen.insert(id);
    let mut head = 0;
    while head < out.len() {
        let h = out[head].clone();
        head += 1;
        for g in generators {
            let p = linalg::mat_mul(&h, g);
            if seen.insert(p.clone()) {
                out.push(p);
                if out.len() > max_order {
                    return Err(GroupError::ClosureExceeded(max_order));
                }
            }
        }
    }
    Ok(out)
}

fn check_square<S>(m: &[Vec<S>], dim: usize, what: &str) -> Result<(), GroupError> {
    if m.len() != dim {
        return Err(GroupError::Dimension {
            what: what.to_string(),
            expected: dim,
            found: m.len(),
        });
    }
    for row in m {
        if row.len() != dim {
            return Err(GroupError::Dimension {
                what: what.to_string(),
                expected: dim,
                found: row.len(),
            });
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct GroupRep {
    dim: usize,
    elements: Vec<Matrix>,
    numeric: Vec<DMatrix<f64>>,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    torus: Vec<QMatrix>,
    torus_numeric: Vec<DMatrix<f64>>,
}

impl GroupRep {
    pub fn new(
        dim: usize,
        generators: &[Matrix],
        torus: Vec<QMatrix>,
        max_order: usize,
    ) -> Result<Self, GroupError> {
        let elements = close_group(dim, generators, max_order)?;
        let index: BTreeMap<&Matrix, usize> = elements.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let mul: Vec<Vec<usize>> = elements
            .iter()
            .map(|a| {
                elements
                    .iter()
                    .map(|b| index[&linalg::mat_mul(a, b)])
                    .collect()
            })
            .collect();
        let inv = (0..elements.len())
            .map(|i| mul[i].iter().position(|&k| k == 0).expect("finite group"))
            .collect();
        for (a, xi) in torus.iter().enumerate() {
            check_square(xi, dim, &format!("torus generator {a}"))?;
            let neg: QMatrix = xi.iter().map(|r| r.iter().map(|x| -x.clone()).collect()).collect();
            if linalg::transpose(xi) != neg {
                return Err(GroupError::NotAntisymmetric(a));
            }
        }
        for a in 0..torus.len() {
            for b in a + 1..torus.len() {
                if linalg::mat_mul(&torus[a], &torus[b]) != linalg::mat_mul(&torus[b], &torus[a]) {
                    return Err(GroupError::TorusNotCommuting(a, b));
                }
            }
            let xs = to_surd(&torus[a]);
            for (e, g) in elements.iter().enumerate() {
                if linalg::mat_mul(&xs, g) != linalg::mat_mul(g, &xs) {
                    return Err(GroupError::TorusFiniteNotCommuting { torus: a, element: e });
                }
            }
        }
        let numeric = elements
            .iter()
            .map(|g| DMatrix::from_fn(dim, dim, |i, j| g[i][j].to_f64()))
            .collect();
        let torus_numeric = torus
            .iter()
            .map(|x| DMatrix::from_fn(dim, dim, |i, j| crate::poly::rational_to_f64(&x[i][j])))
            .collect();
        Ok(GroupRep {
            dim,
            elements,
            numeric,
            mul,
            inv,
            torus,
            torus_numeric,
        })
    }

    pub fn trivial(dim: usize) -> Self {
        GroupRep::new(dim, &[], Vec::new(), 1).expect("trivial group")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Matrix] {
        &self.elements
    }

    pub fn element_f64(&self, g: usize) -> &DMatrix<f64> {
        &self.numeric[g]
    }

    pub fn torus_generators(&self) -> &[QMatrix] {
        &self.torus
    }

    pub fn torus_f64(&self, a: usize) -> &DMatrix<f64> {
        &self.torus_numeric[a]
    }

    pub fn torus_rank(&self) -> usize {
        self.torus.len()
    }

    pub fn is_finite(&self) -> bool {
        self.torus.is_empty()
    }

    pub fn product(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inv[a]
    }

    /// `g h g⁻¹`.
    pub fn conjugate(&self, g: usize, h: usize) -> usize {
        self.mul[self.mul[g][h]][self.inv[g]]
    }

    /// Whether every matrix entry of the finite part is rational.
    pub fn is_rational(&self) -> bool {
        self.elements.iter().flatten().flatten().all(Surd::is_rational)
    }

    pub fn act(&self, g: usize, v: &[f64]) -> Result<Vec<f64>, GroupError> {
        self.check_vec(v)?;
        Ok((&self.numeric[g] * DVector::from_column_slice(v)).iter().copied().collect())
    }

    pub fn act_exact(&self, g: usize, v: &[Surd]) -> Result<Vec<Surd>, GroupError> {
        self.check_vec(v)?;
        Ok(linalg::mat_vec(&self.elements[g], v))
    }

    /// `ξ·v` for `ξ = Σ c_a ξ_a`.
    pub fn act_algebra(&self, c: &[f64], v: &[f64]) -> Result<Vec<f64>, GroupError> {
        self.check_vec(v)?;
        if c.len() != self.torus.len() {
            return Err(GroupError::Dimension {
                what: "algebra coefficients".into(),
                expected: self.torus.len(),
                found: c.len(),
            });
        }
        Ok((self.algebra_matrix(c) * DVector::from_column_slice(v)).iter().copied().collect())
    }

    pub fn algebra_matrix(&self, c: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (ci, x) in c.iter().zip(&self.torus_numeric) {
            m += x * *ci;
        }
        m
    }

    /// `exp(t·Σ c_a ξ_a)`.
    pub fn torus_element(&self, c: &[f64], t: f64) -> DMatrix<f64> {
        (self.algebra_matrix(c) * t).exp()
    }

    fn check_vec<T>(&self, v: &[T]) -> Result<(), GroupError> {
        if v.len() != self.dim {
            return Err(GroupError::Dimension {
                what: "vector".into(),
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    fn check_poly(&self, p: &Polynomial) -> Result<(), GroupError> {
        if p.nvars() != self.dim {
            return Err(GroupError::Dimension {
                what: "polynomial".into(),
                expected: self.dim,
                found: p.nvars(),
            });
        }
        Ok(())
    }

    /// The linear vector field `x ↦ ξ_a x`.
    pub fn generator_field(&self, a: usize) -> PolyMap {
        let n = self.dim;
        let comps = self.torus[a]
            .iter()
            .map(|row| {
                let mut p = Polynomial::zero(n);
                for (j, c) in row.iter().enumerate() {
                    if !c.is_zero() {
                        p = &p + &Polynomial::var(n, j).scale(c);
                    }
                }
                p
            })
            .collect();
        PolyMap::from_components(n, comps)
    }

    /// `∇p · (ξ_a x)`.
    pub fn lie_derivative(&self, p: &Polynomial, a: usize) -> Polynomial {
        let field = self.generator_field(a);
        let mut acc = Polynomial::zero(p.nvars());
        for (k, fk) in field.components().iter().enumerate() {
            if !fk.is_zero() {
                acc = &acc + &(&p.d(k) * fk);
            }
        }
        acc
    }

    /// `p ∘ g` with coefficients in `ℚ(√d)`.
    fn compose(&self, p: &Polynomial, g: usize) -> SurdPoly {
        compose_linear(p, &self.elements[g])
    }

    /// Average of `p ∘ g` over the finite part.
    pub fn reynolds(&self, p: &Polynomial) -> Result<Polynomial, GroupError> {
        if !self.is_finite() {
            return Err(GroupError::TorusPresent);
        }
        self.average(p)
    }

    /// Average over the finite part, ignoring any torus generators.
    pub fn average(&self, p: &Polynomial) -> Result<Polynomial, GroupError> {
        self.check_poly(p)?;
        let mut acc = SurdPoly::zero(self.dim);
        for g in 0..self.order() {
            acc = acc.add(&self.compose(p, g));
        }
        let r = acc.into_rational().ok_or(GroupError::NotRational)?;
        Ok(r.scale(&Rational::new(1.into(), (self.order() as i64).into())))
    }

    /// `(1/|G|) Σ gᵀ F(g x)` over the finite part.
    pub fn average_equivariant(&self, f: &PolyMap) -> Result<PolyMap, GroupError> {
        if f.len() != self.dim || f.nvars() != self.dim {
            return Err(GroupError::Dimension {
                what: "vector field".into(),
                expected: self.dim,
                found: f.len(),
            });
        }
        let n = self.dim;
        let mut acc = vec![SurdPoly::zero(n); n];
        for g in 0..self.order() {
            let fg: Vec<SurdPoly> = f.components().iter().map(|c| self.compose(c, g)).collect();
            let m = &self.elements[g];
            for (i, slot) in acc.iter_mut().enumerate() {
                for (k, fk) in fg.iter().enumerate() {
                    if !m[k][i].is_zero() {
                        *slot = slot.add(&fk.scale(&m[k][i]));
                    }
                }
            }
        }
        let scale = Rational::new(1.into(), (self.order() as i64).into());
        let comps = acc
            .into_iter()
            .map(|s| s.into_rational().map(|p| p.scale(&scale)).ok_or(GroupError::NotRational))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PolyMap::from_components(n, comps))
    }

    /// Exact invariance under every finite element and every torus generator.
    pub fn is_invariant(&self, p: &Polynomial) -> Result<bool, GroupError> {
        self.check_poly(p)?;
        for g in 1..self.order() {
            if self.compose(p, g).into_rational().as_ref() != Some(p) {
                return Ok(false);
            }
        }
        Ok((0..self.torus.len()).all(|a| self.lie_derivative(p, a).is_zero()))
    }

    /// Exact identities `g F(x) = F(g x)` and `ξ F(x) = DF(x) ξ x`.
    pub fn is_equivariant(&self, f: &PolyMap) -> Result<bool, GroupError> {
        if f.len() != self.dim || f.nvars() != self.dim {
            return Err(GroupError::Dimension {
                what: "vector field".into(),
                expected: self.dim,
                found: f.len(),
            });
        }
        let n = self.dim;
        for g in 1..self.order() {
            let m = &self.elements[g];
            for i in 0..n {
                let mut lhs = SurdPoly::zero(n);
                for k in 0..n {
                    if !m[i][k].is_zero() {
                        lhs = lhs.add(&SurdPoly::rational(f.component(k).clone()).scale(&m[i][k]));
                    }
                }
                let rhs = self.compose(f.component(i), g);
                if lhs.sub(&rhs).is_zero() {
                    continue;
                }
                return Ok(false);
            }
        }
        for (a, xi) in self.torus.iter().enumerate() {
            for (i, row) in xi.iter().enumerate() {
                let mut lhs = Polynomial::zero(n);
                for (k, c) in row.iter().enumerate() {
                    if !c.is_zero() {
                        lhs = &lhs + &f.component(k).scale(c);
                    }
                }
                if lhs != self.lie_derivative(f.component(i), a) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    // -----------------------------------------------------------------------
    // subgroups

    pub fn whole(&self) -> Subgroup {
        let m = self.torus.len();
        Subgroup {
            finite: (0..self.order()).collect(),
            torus: (0..m).map(|a| unit(m, a)).collect(),
        }
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        Subgroup {
            finite: vec![0],
            torus: Vec::new(),
        }
    }

    /// Stabilizer of `v`. Finite members move `v` by at most `tol·|v|`; the
    /// torus part is the numerical kernel of `c ↦ (Σ c_a ξ_a) v`.
    pub fn isotropy(&self, v: &[f64], tol: f64) -> Result<Subgroup, GroupError> {
        self.check_vec(v)?;
        let nv = linalg::norm(v);
        if nv == 0.0 {
            return Ok(self.whole());
        }
        let x = DVector::from_column_slice(v);
        let finite = (0..self.order())
            .filter(|&g| (&self.numeric[g] * &x - &x).norm() <= tol * nv)
            .collect();
        let m = self.torus.len();
        let torus = if m == 0 {
            Vec::new()
        } else {
            let unitv = &x / nv;
            let mut cols = DMatrix::zeros(self.dim, m);
            for a in 0..m {
                cols.set_column(a, &(&self.torus_numeric[a] * &unitv));
            }
            let ker = linalg::nullspace_f64(&cols, tol);
            linalg::orthonormalize(&ker, 1e-12)
                .into_iter()
                .map(|k| k.iter().copied().collect())
                .collect()
        };
        Ok(Subgroup { finite, torus })
    }

    fn conjugate_set(&self, g: usize, h: &[usize]) -> Vec<usize> {
        let mut s: Vec<usize> = h.iter().map(|&x| self.conjugate(g, x)).collect();
        s.sort_unstable();
        s
    }

    pub fn label(&self, h: &Subgroup) -> IsotropyLabel {
        let canon = (0..self.order())
            .map(|g| self.conjugate_set(g, &h.finite))
            .min()
            .unwrap_or_default();
        let d = h.torus.len();
        let m = self.torus.len();
        let key = if canon.len() == self.order() && d == m {
            "G".to_string()
        } else if canon.len() == 1 && d == 0 {
            "trivial".to_string()
        } else {
            let fin = if canon.len() == 1 {
                "e".to_string()
            } else if canon.len() == self.order() {
                "Gf".to_string()
            } else {
                let idx: Vec<String> = canon.iter().map(usize::to_string).collect();
                format!("H{}[{}]", canon.len(), idx.join("."))
            };
            if d > 0 {
                format!("{fin}xT{d}")
            } else {
                fin
            }
        };
        IsotropyLabel {
            key,
            finite_order: canon.len(),
            torus_dim: d,
        }
    }

    pub fn same_orbit_type(&self, a: &Subgroup, b: &Subgroup) -> bool {
        a.finite.len() == b.finite.len()
            && a.torus.len() == b.torus.len()
            && (0..self.order()).any(|g| self.conjugate_set(g, &a.finite) == b.finite)
    }

    /// Some conjugate of `a` is contained in `b` (torus parts by dimension).
    pub fn is_subconjugate(&self, a: &Subgroup, b: &Subgroup) -> bool {
        a.torus.len() <= b.torus.len()
            && (0..self.order()).any(|g| {
                self.conjugate_set(g, &a.finite)
                    .iter()
                    .all(|x| b.finite.binary_search(x).is_ok())
            })
    }

    /// Finite elements normalizing the finite part of `h`.
    pub fn normalizer(&self, h: &Subgroup) -> Vec<usize> {
        (0..self.order())
            .filter(|&g| self.conjugate_set(g, &h.finite) == h.finite)
            .collect()
    }

    /// `dim T − dim(torus part of G_v)`; see [`NH_FLAG`].
    pub fn torus_rank_nh(&self, v: &[f64], tol: f64) -> Result<usize, GroupError> {
        Ok(self.torus.len() - self.isotropy(v, tol)?.torus.len())
    }

    /// Fixed vectors of `h`: exact over `ℚ(√d)` whenever the torus part has a
    /// rational basis, always with an orthonormal floating basis.
    pub fn fixed_subspace(&self, h: &Subgroup) -> FixedSpace {
        let n = self.dim;
        let id = linalg::identity::<Surd>(n);
        let mut rows: Vec<Vec<Surd>> = Vec::new();
        for &g in h.finite.iter().filter(|&&g| g != 0) {
            for (r, idr) in self.elements[g].iter().zip(&id) {
                rows.push(r.iter().zip(idr).map(|(a, b)| a.sub(b)).collect());
            }
        }
        let exact_torus = rational_basis(&h.torus);
        if let Some(tb) = &exact_torus {
            for c in tb {
                let mut m: QMatrix = vec![vec![Rational::zero(); n]; n];
                for (ca, xi) in c.iter().zip(&self.torus) {
                    for i in 0..n {
                        for j in 0..n {
                            m[i][j] += ca * &xi[i][j];
                        }
                    }
                }
                rows.extend(to_surd(&m));
            }
            let exact = linalg::nullspace(&rows, n);
            let numeric: Vec<DVector<f64>> = exact
                .iter()
                .map(|v| DVector::from_iterator(n, v.iter().map(Surd::to_f64)))
                .collect();
            let basis = linalg::orthonormalize(&numeric, 1e-12)
                .into_iter()
                .map(|v| v.iter().copied().collect())
                .collect();
            return FixedSpace {
                exact: Some(exact),
                basis,
            };
        }
        let mut numeric_rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(Surd::to_f64).collect()).collect();
        for c in &h.torus {
            let m = self.algebra_matrix(c);
            for i in 0..n {
                numeric_rows.push(m.row(i).iter().copied().collect());
            }
        }
        let ker = linalg::nullspace_f64(&linalg::to_dmatrix(&numeric_rows, n), 1e-10);
        FixedSpace {
            exact: None,
            basis: linalg::orthonormalize(&ker, 1e-12)
                .into_iter()
                .map(|v| v.iter().copied().collect())
                .collect(),
        }
    }
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

pub fn to_surd(m: &QMatrix) -> Matrix {
    m.iter()
        .map(|r| r.iter().cloned().map(Surd::rational).collect())
        .collect()
}

/// Row-reduces a floating basis and snaps it to small rationals.
fn rational_basis(vectors: &[Vec<f64>]) -> Option<Vec<Vec<Rational>>> {
    if vectors.is_empty() {
        return Some(Vec::new());
    }
    let m = vectors[0].len();
    let mut rows: Vec<Vec<f64>> = vectors.to_vec();
    let mut r = 0;
    for c in 0..m {
        if r == rows.len() {
            break;
        }
        let p = (r..rows.len()).max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs()))?;
        if rows[p][c].abs() < 1e-9 {
            continue;
        }
        rows.swap(r, p);
        let piv = rows[r][c];
        for x in rows[r].iter_mut() {
            *x /= piv;
        }
        let pr = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                for (x, y) in row.iter_mut().zip(&pr) {
                    *x -= f * y;
                }
            }
        }
        r += 1;
    }
    if r < rows.len() {
        return None;
    }
    rows.iter()
        .map(|row| row.iter().map(|&x| snap_rational(x, 1000, 1e-9)).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subgroup {
    /// Sorted indices into the parent's finite elements.
    pub finite: Vec<usize>,
    /// Orthonormal basis of the torus subalgebra, in generator coefficients.
    pub torus: Vec<Vec<f64>>,
}

impl Subgroup {
    pub fn finite_order(&self) -> usize {
        self.finite.len()
    }

    pub fn torus_dim(&self) -> usize {
        self.torus.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct IsotropyLabel {
    pub key: String,
    pub finite_order: usize,
    pub torus_dim: usize,
}

impl std::fmt::Display for IsotropyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.key)
    }
}

#[derive(Clone, Debug)]
pub struct FixedSpace {
    pub exact: Option<Vec<Vec<Surd>>>,
    pub basis: Vec<Vec<f64>>,
}

impl FixedSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

// ---------------------------------------------------------------------------
// polynomials with coefficients in ℚ(√d), used only for linear substitutions

/// `a + √d·b`.
#[derive(Clone, Debug)]
pub(crate) struct SurdPoly {
    a: Polynomial,
    b: Polynomial,
    d: u64,
}

impl SurdPoly {
    fn zero(n: usize) -> Self {
        SurdPoly {
            a: Polynomial::zero(n),
            b: Polynomial::zero(n),
            d: 0,
        }
    }

    fn rational(p: Polynomial) -> Self {
        let n = p.nvars();
        SurdPoly {
            a: p,
            b: Polynomial::zero(n),
            d: 0,
        }
    }

    fn one(n: usize) -> Self {
        SurdPoly::rational(Polynomial::one(n))
    }

    fn linear(row: &[Surd]) -> Self {
        let n = row.len();
        let mut s = SurdPoly::zero(n);
        for (j, c) in row.iter().enumerate() {
            if !c.is_zero() {
                s = s.add(&SurdPoly::rational(Polynomial::var(n, j)).scale(c));
            }
        }
        s
    }

    fn combine(d1: u64, d2: u64) -> u64 {
        match (d1, d2) {
            (0, d) | (d, 0) => d,
            (x, y) => {
                assert_eq!(x, y, "mixed radicands");
                x
            }
        }
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn add(&self, o: &SurdPoly) -> SurdPoly {
        SurdPoly {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
            d: SurdPoly::combine(self.d, o.d),
        }
    }

    fn sub(&self, o: &SurdPoly) -> SurdPoly {
        SurdPoly {
            a: &self.a - &o.a,
            b: &self.b - &o.b,
            d: SurdPoly::combine(self.d, o.d),
        }
    }

    fn mul(&self, o: &SurdPoly) -> SurdPoly {
        let d = SurdPoly::combine(self.d, o.d);
        let mut a = &self.a * &o.a;
        if !self.b.is_zero() && !o.b.is_zero() {
            a = &a + &(&self.b * &o.b).scale(&Rational::from_integer(d.into()));
        }
        let b = &(&self.a * &o.b) + &(&self.b * &o.a);
        SurdPoly { a, b, d }
    }

    fn scale(&self, c: &Surd) -> SurdPoly {
        let d = SurdPoly::combine(self.d, c.radicand());
        let dq = Rational::from_integer(d.into());
        let (ca, cb) = (c.rational_part(), c.radical_part());
        let mut a = self.a.scale(ca);
        if !cb.is_zero() && !self.b.is_zero() {
            a = &a + &self.b.scale(&(cb * &dq));
        }
        let b = &self.a.scale(cb) + &self.b.scale(ca);
        SurdPoly { a, b, d }
    }

    fn into_rational(self) -> Option<Polynomial> {
        self.b.is_zero().then_some(self.a)
    }
}

/// `p(g x)` for a matrix `g`.
pub(crate) fn compose_linear(p: &Polynomial, g: &Matrix) -> SurdPoly {
    let n = g.len();
    let forms: Vec<SurdPoly> = g.iter().map(|row| SurdPoly::linear(row)).collect();
    let mut powers: Vec<Vec<SurdPoly>> = forms.iter().map(|_| vec![SurdPoly::one(n)]).collect();
    let mut acc = SurdPoly::zero(n);
    for (m, c) in p.terms() {
        let mut t = SurdPoly::rational(Polynomial::constant(n, c.clone()));
        for (i, &e) in m.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            while powers[i].len() <= e as usize {
                let next = powers[i].last().expect("nonempty").mul(&forms[i]);
                powers[i].push(next);
            }
            t = t.mul(&powers[i][e as usize]);
        }
        acc = acc.add(&t);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::int;

    fn q(rows: &[&[&str]]) -> Matrix {
        rows.iter()
            .map(|r| r.iter().map(|s| Surd::parse(s).unwrap()).collect())
            .collect()
    }

    fn d3() -> GroupRep {
        let r = q(&[&["-1/2", "-sqrt(3)/2"], &["sqrt(3)/2", "-1/2"]]);
        let s = q(&[&["1", "0"], &["0", "-1"]]);
        GroupRep::new(2, &[r, s], vec![], 100).unwrap()
    }

    fn so2() -> GroupRep {
        GroupRep::new(2, &[], vec![vec![vec![int(0), int(-1)], vec![int(1), int(0)]]], 1).unwrap()
    }

    #[test]
    fn closure() {
        let z2 = GroupRep::new(1, &[q(&[&["-1"]])], vec![], 10).unwrap();
        assert_eq!(z2.order(), 2);
        let c3 = q(&[&["-1/2", "-sqrt(3)/2"], &["sqrt(3)/2", "-1/2"]]);
        assert_eq!(close_group(2, &[c3], 10).unwrap().len(), 3);
        assert_eq!(d3().order(), 6);
        // rotation by the Pythagorean angle 2·atan(1/2) never closes
        let rot = q(&[&["3/5", "-4/5"], &["4/5", "3/5"]]);
        assert_eq!(close_group(2, &[rot], 1000), Err(GroupError::ClosureExceeded(1000)));
        let skew = q(&[&["1", "1"], &["0", "1"]]);
        assert_eq!(close_group(2, &[skew], 10), Err(GroupError::NotOrthogonal(0)));
    }

    #[test]
    fn reynolds_examples() {
        let z2 = GroupRep::new(1, &[q(&[&["-1"]])], vec![], 10).unwrap();
        let x = Polynomial::var(1, 0);
        assert!(z2.reynolds(&x).unwrap().is_zero());
        assert_eq!(z2.reynolds(&x.pow(2)).unwrap(), x.pow(2));
        assert!(z2.reynolds(&x.pow(3)).unwrap().is_zero());
        let g = d3();
        let names = ["x", "y"];
        let p = Polynomial::parse("x^3", &names).unwrap();
        let r = g.reynolds(&p).unwrap();
        assert_eq!(r, Polynomial::parse("1/4*x^3 - 3/4*x*y^2", &names).unwrap());
        assert!(g.is_invariant(&r).unwrap());
        assert_eq!(g.reynolds(&r).unwrap(), r);
        assert!(matches!(so2().reynolds(&p), Err(GroupError::TorusPresent)));
    }

    #[test]
    fn actions_and_isotropy() {
        let g = so2();
        assert_eq!(g.act_algebra(&[1.0], &[1.0, 0.0]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(g.act(0, &[2.0, 3.0]).unwrap(), vec![2.0, 3.0]);
        let minus = GroupRep::new(2, &[q(&[&["-1", "0"], &["0", "-1"]])], vec![], 4).unwrap();
        assert_eq!(minus.act(1, &[2.0, 3.0]).unwrap(), vec![-2.0, -3.0]);
        assert_eq!(g.torus_rank_nh(&[1.0, 0.0], DEFAULT_TOL).unwrap(), 1);
        assert_eq!(g.torus_rank_nh(&[0.0, 0.0], DEFAULT_TOL).unwrap(), 0);
        let z2 = GroupRep::new(1, &[q(&[&["-1"]])], vec![], 10).unwrap();
        assert_eq!(z2.label(&z2.isotropy(&[1.0], DEFAULT_TOL).unwrap()).key, "trivial");
        assert_eq!(z2.label(&z2.isotropy(&[0.0], DEFAULT_TOL).unwrap()).key, "G");
        assert_eq!(z2.torus_rank_nh(&[1.0], DEFAULT_TOL).unwrap(), 0);
    }

    #[test]
    fn fixed_spaces_and_conjugacy() {
        let g = d3();
        let refl: Vec<usize> = (1..g.order())
            .filter(|&i| g.product(i, i) == 0)
            .collect();
        assert_eq!(refl.len(), 3);
        let h1 = Subgroup { finite: vec![0, refl[0]], torus: vec![] };
        let h2 = Subgroup { finite: vec![0, refl[1]], torus: vec![] };
        assert!(g.same_orbit_type(&h1, &h2));
        assert!(g.same_orbit_type(&h1, &h1));
        assert!(!g.same_orbit_type(&g.trivial_subgroup(), &g.whole()));
        assert_eq!(g.label(&h1), g.label(&h2));
        assert_eq!(g.normalizer(&h1), vec![0, refl[0]]);
        assert_eq!(g.fixed_subspace(&g.trivial_subgroup()).dim(), 2);
        assert_eq!(g.fixed_subspace(&g.whole()).dim(), 0);
        for h in [&h1, &h2] {
            let fs = g.fixed_subspace(h);
            assert_eq!(fs.dim(), 1);
            for v in fs.exact.as_ref().unwrap() {
                for &e in &h.finite {
                    assert_eq!(&g.act_exact(e, v).unwrap(), v);
                }
            }
        }
    }
}
