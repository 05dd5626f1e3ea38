//! Equilibria of reduced fields: solving, continuation, classification of
//! the linearization at the origin, the codimension criterion, lifting and
//! branch-existence diagnostics.

mod classify;
mod codim;
mod continuation;
mod diagnostic;
mod lift;

pub use classify::{check_transversality, classify_linearization, ClassSpan, NondegeneracyClass, NondegeneracyReport, TransversalityReport};
pub use codim::{codim_criterion, CodimReport, CodimSettings, CodimWitness};
pub use continuation::{continue_branch, presweep_seeds, ContinuationPoint, ContinuationResult, ContinuationSettings, Seed};
pub use diagnostic::{branch_existence_diagnostic, isotropy_types, ExistenceReport, ExistenceVerdict, IsotropyType};
pub use lift::{lift_branch, BranchRecord};

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::invariants::{InvariantBasis, InvariantError};
use crate::linalg;
use crate::poly::{CompiledMap, PolyError, PolyMap, Polynomial, Rational};
use crate::reduction::{reduced_hamiltonian_field, PoissonStructure, ReducedSystem, ReductionError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BifurcationError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("iterates diverged after {0} iterations")]
    Diverged(usize),
    #[error("point is not an equilibrium (residual {0:.3e})")]
    NotEquilibrium(f64),
    #[error("seed is degenerate (condition number {0:.3e})")]
    DegenerateSeed(f64),
    #[error("no linearization class fits; theorem diagnostics do not apply")]
    NoClass,
    #[error("expected {expected} values, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("no seed equilibrium found")]
    NoSeed,
}

/// `g_j(θ, λ)` together with the constraints that cut out the orbit space
/// locally: the relations `R(θ) = 0` and, for Hamiltonian families, the
/// levels of the linear Casimirs `C(θ) = c`.
#[derive(Clone, Debug)]
pub struct GFunction {
    l: usize,
    components: PolyMap,
    relations: Vec<Polynomial>,
    casimirs: Vec<Polynomial>,
    compiled: CompiledMap,
    constraints: CompiledMap,
    jac_theta: Vec<CompiledMap>,
    jac_lambda: CompiledMap,
    constraint_jac: Vec<CompiledMap>,
}

impl GFunction {
    pub fn new(components: PolyMap, relations: Vec<Polynomial>, casimirs: Vec<Polynomial>) -> Result<Self, BifurcationError> {
        let l = components.len();
        if components.nvars() != l + 1 {
            return Err(BifurcationError::Arity {
                expected: l + 1,
                found: components.nvars(),
            });
        }
        for p in relations.iter().chain(&casimirs) {
            if p.nvars() != l {
                return Err(BifurcationError::Arity {
                    expected: l,
                    found: p.nvars(),
                });
            }
        }
        let cons: Vec<Polynomial> = relations.iter().chain(&casimirs).map(|p| p.extend_vars(1)).collect();
        let jac_theta = (0..l)
            .map(|i| CompiledMap::new(&components.differentiate(i).expect("index in range")))
            .collect();
        let jac_lambda = CompiledMap::new(&components.differentiate(l).expect("index in range"));
        let constraint_jac = (0..l)
            .map(|i| {
                let d: Vec<Polynomial> = cons.iter().map(|c| c.differentiate(i).expect("index in range")).collect();
                CompiledMap::from_polys(l + 1, &d)
            })
            .collect();
        Ok(GFunction {
            l,
            compiled: CompiledMap::new(&components),
            constraints: CompiledMap::from_polys(l + 1, &cons),
            components,
            relations,
            casimirs,
            jac_theta,
            jac_lambda,
            constraint_jac,
        })
    }

    /// The reduced field with its relations, plus linear Casimirs when the
    /// system is Hamiltonian.
    pub fn from_reduced(reduced: &ReducedSystem, basis: &InvariantBasis) -> Result<Self, BifurcationError> {
        let casimirs = match reduced {
            ReducedSystem::Hamiltonian(h) => linear_casimirs(&h.poisson, basis)?,
            ReducedSystem::General(_) => Vec::new(),
        };
        GFunction::new(reduced.field().clone(), basis.relations().to_vec(), casimirs)
    }

    pub fn dim(&self) -> usize {
        self.l
    }

    pub fn components(&self) -> &PolyMap {
        &self.components
    }

    pub fn relations(&self) -> &[Polynomial] {
        &self.relations
    }

    pub fn casimirs(&self) -> &[Polynomial] {
        &self.casimirs
    }

    fn point(&self, theta: &[f64], lambda: f64) -> Vec<f64> {
        let mut x = theta.to_vec();
        x.push(lambda);
        x
    }

    pub fn eval(&self, theta: &[f64], lambda: f64) -> Vec<f64> {
        self.compiled.eval(&self.point(theta, lambda))
    }

    /// Casimir values at `θ`.
    pub fn levels(&self, theta: &[f64]) -> Vec<f64> {
        let x = self.point(theta, 0.0);
        self.constraints.eval(&x)[self.relations.len()..].to_vec()
    }

    /// `[g; R; C − c]`; the Casimir rows are omitted when `levels` is `None`.
    pub fn stacked(&self, theta: &[f64], lambda: f64, levels: Option<&[f64]>) -> Vec<f64> {
        let x = self.point(theta, lambda);
        let mut out = self.compiled.eval(&x);
        let cons = self.constraints.eval(&x);
        let nr = self.relations.len();
        out.extend_from_slice(&cons[..nr]);
        if let Some(c) = levels {
            out.extend(cons[nr..].iter().zip(c).map(|(a, b)| a - b));
        }
        out
    }

    fn constraint_rows(&self, levels: Option<&[f64]>) -> usize {
        self.relations.len() + if levels.is_some() { self.casimirs.len() } else { 0 }
    }

    /// `∂[g; R; C]/∂θ` and `∂g/∂λ` (zero in the constraint rows).
    pub fn stacked_jacobian(&self, theta: &[f64], lambda: f64, levels: Option<&[f64]>) -> (DMatrix<f64>, DVector<f64>) {
        let x = self.point(theta, lambda);
        let l = self.l;
        let rows = l + self.constraint_rows(levels);
        let mut j = DMatrix::zeros(rows, l);
        for (i, col) in self.jac_theta.iter().enumerate() {
            for (r, v) in col.eval(&x).into_iter().enumerate() {
                j[(r, i)] = v;
            }
            let cons = self.constraint_jac[i].eval(&x);
            for (r, v) in cons.into_iter().take(rows - l).enumerate() {
                j[(l + r, i)] = v;
            }
        }
        let mut dl = DVector::zeros(rows);
        for (r, v) in self.jac_lambda.eval(&x).into_iter().enumerate() {
            dl[r] = v;
        }
        (j, dl)
    }

    /// `∂g/∂θ` alone.
    pub fn jacobian_g(&self, theta: &[f64], lambda: f64) -> DMatrix<f64> {
        let x = self.point(theta, lambda);
        let l = self.l;
        let mut j = DMatrix::zeros(l, l);
        for (i, col) in self.jac_theta.iter().enumerate() {
            for (r, v) in col.eval(&x).into_iter().enumerate() {
                j[(r, i)] = v;
            }
        }
        j
    }

    /// Orthonormal basis of the tangent space of the constraint set at `θ`.
    pub fn tangent_basis(&self, theta: &[f64], levels: Option<&[f64]>) -> DMatrix<f64> {
        let l = self.l;
        let nc = self.constraint_rows(levels);
        if nc == 0 {
            return DMatrix::identity(l, l);
        }
        let (j, _) = self.stacked_jacobian(theta, 0.0, levels);
        let dc = j.rows(l, nc).into_owned();
        let ns = linalg::nullspace_f64(&dc, 1e-10);
        let mut t = DMatrix::zeros(l, ns.len());
        for (k, v) in ns.iter().enumerate() {
            t.set_column(k, v);
        }
        t
    }
}

/// `assemble_g`: `g_j = Σ_i ∂F̃/∂θ_i P_ji`.
pub fn assemble_g(hamiltonian: &Polynomial, p: &PoissonStructure) -> Result<PolyMap, BifurcationError> {
    Ok(reduced_hamiltonian_field(hamiltonian, p)?)
}

/// Linear functions `C = Σ a_i θ_i` whose bracket with every generator
/// vanishes upstairs, in row-reduced form.
pub fn linear_casimirs(p: &PoissonStructure, basis: &InvariantBasis) -> Result<Vec<Polynomial>, BifurcationError> {
    let l = p.len();
    if l == 0 {
        return Ok(Vec::new());
    }
    let mut rows: std::collections::BTreeMap<(usize, crate::poly::Monomial), Vec<Rational>> = Default::default();
    for i in 0..l {
        for j in 0..l {
            let up = basis.expand(p.entry(i, j))?;
            for (m, c) in up.terms() {
                rows.entry((j, m.clone())).or_insert_with(|| vec![Rational::zero(); l])[i] = c.clone();
            }
        }
    }
    let a: Vec<Vec<Rational>> = rows.into_values().collect();
    let mut ker = linalg::nullspace(&a, l);
    linalg::rref(&mut ker);
    Ok(ker
        .into_iter()
        .map(|v| {
            Polynomial::from_terms(
                l,
                v.into_iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| (crate::poly::Monomial::var(l, i), c)),
            )
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-10,
            max_iter: 50,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Solution {
    pub theta: Vec<f64>,
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Stacked residual norm before each step and after the last one.
    pub history: Vec<f64>,
}

/// Gauss–Newton on the stacked system at fixed `λ`, with minimum-norm
/// least-squares steps.
pub fn solve_equilibrium(
    g: &GFunction,
    guess: &[f64],
    lambda: f64,
    levels: Option<&[f64]>,
    settings: &SolverSettings,
) -> Result<Solution, BifurcationError> {
    if guess.len() != g.dim() {
        return Err(BifurcationError::Arity {
            expected: g.dim(),
            found: guess.len(),
        });
    }
    let mut theta = DVector::from_column_slice(guess);
    let bound = 1e8 * (1.0 + theta.norm());
    let mut history = Vec::new();
    for it in 0..=settings.max_iter {
        let r = DVector::from_vec(g.stacked(theta.as_slice(), lambda, levels));
        let rn = r.norm();
        history.push(rn);
        if !rn.is_finite() {
            return Err(BifurcationError::Diverged(it));
        }
        if rn <= settings.tol {
            return Ok(Solution {
                theta: theta.iter().copied().collect(),
                lambda,
                residual: rn,
                iterations: it,
                history,
            });
        }
        if it == settings.max_iter {
            return Err(BifurcationError::NoConvergence {
                iterations: it,
                residual: rn,
            });
        }
        let (j, _) = g.stacked_jacobian(theta.as_slice(), lambda, levels);
        theta -= linalg::lstsq(&j, &r, 1e-12);
        if theta.norm() > bound {
            return Err(BifurcationError::Diverged(it + 1));
        }
    }
    unreachable!("loop returns")
}

#[derive(Clone, Debug, Serialize)]
pub struct Nondegeneracy {
    pub nondegenerate: bool,
    pub condition_number: f64,
    pub sigma_min: f64,
    /// Dimension of the constraint tangent space.
    pub tangent_dim: usize,
}

pub const CONDITION_LIMIT: f64 = 1e8;

/// `∂g/∂θ` restricted to the tangent space of the constraint set, with its
/// condition number. `levels` fixes the Casimir values, if any.
pub fn check_hvs_nondegeneracy(
    g: &GFunction,
    theta: &[f64],
    lambda: f64,
    levels: Option<&[f64]>,
) -> Result<Nondegeneracy, BifurcationError> {
    let r = linalg::norm(&g.stacked(theta, lambda, levels));
    if r > 1e-8 {
        return Err(BifurcationError::NotEquilibrium(r));
    }
    Ok(restricted_nondegeneracy(g, theta, lambda, levels).0)
}

/// Also returns the tangent basis and the square restricted matrix `Tᵀ Dg T`.
pub(crate) fn restricted_nondegeneracy(
    g: &GFunction,
    theta: &[f64],
    lambda: f64,
    levels: Option<&[f64]>,
) -> (Nondegeneracy, DMatrix<f64>, DMatrix<f64>) {
    let t = g.tangent_basis(theta, levels);
    let dg = g.jacobian_g(theta, lambda);
    let m = t.transpose() * &dg * &t;
    let r = t.ncols();
    if r == 0 {
        return (
            Nondegeneracy {
                nondegenerate: true,
                condition_number: 1.0,
                sigma_min: f64::INFINITY,
                tangent_dim: 0,
            },
            t,
            m,
        );
    }
    let s = linalg::singular_values(&(&dg * &t));
    let smax = s[0];
    let smin = s.get(r - 1).copied().unwrap_or(0.0);
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let rank_ok = smin > 1e-12 * smax.max(1.0);
    (
        Nondegeneracy {
            nondegenerate: rank_ok && cond < CONDITION_LIMIT,
            condition_number: cond,
            sigma_min: smin,
            tangent_dim: r,
        },
        t,
        m,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(text: &str) -> GFunction {
        let names = ["t1", "lambda"];
        let p = Polynomial::parse(text, &names).unwrap();
        GFunction::new(PolyMap::from_components(2, vec![p]), vec![], vec![]).unwrap()
    }

    #[test]
    fn pitchfork_roots() {
        let g = scalar("2*(lambda - t1)*t1");
        let s = solve_equilibrium(&g, &[0.9], 1.0, None, &SolverSettings::default()).unwrap();
        assert!((s.theta[0] - 1.0).abs() < 1e-12);
        let s = solve_equilibrium(&g, &[1.0], 1.0, None, &SolverSettings::default()).unwrap();
        assert!(s.iterations <= 1 && s.theta == vec![1.0]);
        let s = solve_equilibrium(&g, &[0.5], -1.0, None, &SolverSettings::default()).unwrap();
        assert!(s.theta[0].abs() < 1e-12);
        let nd = check_hvs_nondegeneracy(&g, &[1.0], 1.0, None).unwrap();
        assert!(nd.nondegenerate);
        assert!((nd.sigma_min - 2.0).abs() < 1e-12);
        assert!(!check_hvs_nondegeneracy(&g, &[0.0], 0.0, None).unwrap().nondegenerate);
        let z = scalar("0");
        assert!(!check_hvs_nondegeneracy(&z, &[0.3], 0.1, None).unwrap().nondegenerate);
        assert!(matches!(check_hvs_nondegeneracy(&g, &[0.5], 1.0, None), Err(BifurcationError::NotEquilibrium(_))));
    }

    #[test]
    fn quadratic_tail() {
        let g = scalar("2*(lambda - t1)*t1");
        let s = solve_equilibrium(&g, &[1.3], 1.0, None, &SolverSettings { tol: 1e-14, max_iter: 50 }).unwrap();
        let h = &s.history;
        let n = h.len();
        for k in n.saturating_sub(3)..n - 1 {
            if h[k] > 1e-12 {
                assert!(h[k + 1] <= 1e6 * h[k] * h[k], "{h:?}");
            }
        }
    }
}
