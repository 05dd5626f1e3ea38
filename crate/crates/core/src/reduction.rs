//! Projection of equivariant and Hamiltonian families onto the orbit space.
//!
//! Reduced polynomials live in `l + 1` variables: the invariants `t1..tl`
//! followed by the parameter `lambda`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::invariants::{EquivariantBasis, InvariantBasis, InvariantError};
use crate::poly::{CompiledMap, Pairing, PolyError, PolyMap, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("rewriting {what} failed: {source}")]
    Rewrite {
        what: String,
        #[source]
        source: InvariantError,
    },
    #[error("Poisson matrix is not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),
    #[error("expected {expected} {what}, found {found}")]
    Arity {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("pairing dimension {pairing} does not match the space dimension {space}")]
    PairingDimension { pairing: usize, space: usize },
}

#[derive(Clone, Debug)]
pub enum FieldFamily {
    /// `X(v, λ) = Σ_i f_i(θ(v), λ) F_i(v)`.
    General {
        coefficients: Vec<Polynomial>,
        equivariants: EquivariantBasis,
    },
    /// Hamiltonian vector field of `F̃(θ(v), λ)`.
    Hamiltonian { hamiltonian: Polynomial, pairing: Pairing },
}

impl FieldFamily {
    pub fn is_hamiltonian(&self) -> bool {
        matches!(self, FieldFamily::Hamiltonian { .. })
    }

    pub fn check(&self, basis: &InvariantBasis) -> Result<(), ReductionError> {
        let l = basis.len();
        match self {
            FieldFamily::General {
                coefficients,
                equivariants,
            } => {
                if coefficients.len() != equivariants.len() {
                    return Err(ReductionError::Arity {
                        what: "coefficients".into(),
                        expected: equivariants.len(),
                        found: coefficients.len(),
                    });
                }
                for c in coefficients {
                    arity(c, l + 1)?;
                }
            }
            FieldFamily::Hamiltonian { hamiltonian, pairing } => {
                arity(hamiltonian, l + 1)?;
                if pairing.dim() != basis.nvars() {
                    return Err(ReductionError::PairingDimension {
                        pairing: pairing.dim(),
                        space: basis.nvars(),
                    });
                }
            }
        }
        Ok(())
    }

    /// The family upstairs as a map in `(v, λ)`.
    pub fn full_field(&self, basis: &InvariantBasis) -> Result<PolyMap, ReductionError> {
        self.check(basis)?;
        let subs = upstairs_substitution(basis);
        let n = basis.nvars();
        match self {
            FieldFamily::General {
                coefficients,
                equivariants,
            } => {
                let mut acc = PolyMap::zero(n + 1, n);
                for (f, fi) in coefficients.iter().zip(equivariants.generators()) {
                    let coeff = f.compose(&subs)?;
                    acc = acc.add(&fi.extend_vars(1).scale_by(&coeff));
                }
                Ok(acc)
            }
            FieldFamily::Hamiltonian { hamiltonian, pairing } => {
                Ok(pairing.hamiltonian_field(&hamiltonian.compose(&subs)?))
            }
        }
    }

    /// `F̃(θ(v), λ)` for Hamiltonian families.
    pub fn full_hamiltonian(&self, basis: &InvariantBasis) -> Result<Option<Polynomial>, ReductionError> {
        match self {
            FieldFamily::Hamiltonian { hamiltonian, .. } => {
                Ok(Some(hamiltonian.compose(&upstairs_substitution(basis))?))
            }
            FieldFamily::General { .. } => Ok(None),
        }
    }
}

fn arity(p: &Polynomial, expected: usize) -> Result<(), ReductionError> {
    if p.nvars() != expected {
        return Err(ReductionError::Arity {
            what: "variables".into(),
            expected,
            found: p.nvars(),
        });
    }
    Ok(())
}

/// `(θ_1(v), …, θ_l(v), λ)` in the `n + 1` variables `(v, λ)`.
pub fn upstairs_substitution(basis: &InvariantBasis) -> PolyMap {
    let n = basis.nvars();
    let mut comps: Vec<Polynomial> = basis.generators().iter().map(|g| g.extend_vars(1)).collect();
    comps.push(Polynomial::var(n + 1, n));
    PolyMap::from_components(n + 1, comps)
}

#[derive(Clone, Debug)]
pub struct GeneralReducedField {
    /// `tables[i]` holds the rewritten column `⟨F_i, ∇θ_j⟩`, `j = 1..l`.
    pub tables: Vec<PolyMap>,
    pub coefficients: Vec<Polynomial>,
    pub field: PolyMap,
}

#[derive(Clone, Debug)]
pub struct PoissonStructure {
    pub matrix: Vec<Vec<Polynomial>>,
}

impl PoissonStructure {
    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Polynomial {
        &self.matrix[i][j]
    }

    pub fn is_antisymmetric(&self) -> bool {
        let l = self.len();
        (0..l).all(|i| (0..l).all(|j| (&self.matrix[i][j] + &self.matrix[j][i]).is_zero()))
    }
}

#[derive(Clone, Debug)]
pub struct HamiltonianReducedField {
    pub hamiltonian: Polynomial,
    pub poisson: PoissonStructure,
    pub field: PolyMap,
}

impl HamiltonianReducedField {
    pub fn new(hamiltonian: Polynomial, poisson: PoissonStructure) -> Result<Self, ReductionError> {
        let field = reduced_hamiltonian_field(&hamiltonian, &poisson)?;
        Ok(HamiltonianReducedField {
            hamiltonian,
            poisson,
            field,
        })
    }
}

#[derive(Clone, Debug)]
pub enum ReducedSystem {
    General(GeneralReducedField),
    Hamiltonian(HamiltonianReducedField),
}

impl ReducedSystem {
    /// `θ̇` as `l` polynomials in `(θ, λ)`.
    pub fn field(&self) -> &PolyMap {
        match self {
            ReducedSystem::General(g) => &g.field,
            ReducedSystem::Hamiltonian(h) => &h.field,
        }
    }

    pub fn dim(&self) -> usize {
        self.field().len()
    }

    pub fn evaluate(&self, theta: &[f64], lambda: f64) -> Result<Vec<f64>, ReductionError> {
        evaluate_reduced(self.field(), theta, lambda)
    }
}

pub fn evaluate_reduced(field: &PolyMap, theta: &[f64], lambda: f64) -> Result<Vec<f64>, ReductionError> {
    if theta.len() + 1 != field.nvars() {
        return Err(ReductionError::Arity {
            what: "invariant coordinates".into(),
            expected: field.nvars().saturating_sub(1),
            found: theta.len(),
        });
    }
    let mut x = theta.to_vec();
    x.push(lambda);
    Ok(field.evaluate(&x)?)
}

/// Floating-point form of a `(θ, λ)` field with the parameter fixed.
pub struct CompiledReduced {
    map: CompiledMap,
    lambda: f64,
}

impl CompiledReduced {
    pub fn new(field: &PolyMap, lambda: f64) -> Self {
        CompiledReduced {
            map: CompiledMap::new(field),
            lambda,
        }
    }

    pub fn eval(&self, theta: &[f64]) -> Vec<f64> {
        let mut x = theta.to_vec();
        x.push(self.lambda);
        self.map.eval(&x)
    }
}

pub fn project_general(
    coefficients: &[Polynomial],
    equivariants: &EquivariantBasis,
    basis: &InvariantBasis,
) -> Result<GeneralReducedField, ReductionError> {
    let l = basis.len();
    let family = FieldFamily::General {
        coefficients: coefficients.to_vec(),
        equivariants: equivariants.clone(),
    };
    family.check(basis)?;
    let mut tables = Vec::with_capacity(equivariants.len());
    for (i, fi) in equivariants.generators().iter().enumerate() {
        let mut col = Vec::with_capacity(l);
        for j in 0..l {
            let inner = fi.dot(basis.gradient(j))?;
            let r = basis.rewrite(&inner).map_err(|source| ReductionError::Rewrite {
                what: format!("<F_{}, grad theta_{}>", i + 1, j + 1),
                source,
            })?;
            col.push(r);
        }
        tables.push(PolyMap::from_components(l, col));
    }
    let mut field = PolyMap::zero(l + 1, l);
    for (f, t) in coefficients.iter().zip(&tables) {
        field = field.add(&t.extend_vars(1).scale_by(f));
    }
    Ok(GeneralReducedField {
        tables,
        coefficients: coefficients.to_vec(),
        field,
    })
}

pub fn poisson_matrix(basis: &InvariantBasis, pairing: &Pairing) -> Result<PoissonStructure, ReductionError> {
    if pairing.dim() != basis.nvars() {
        return Err(ReductionError::PairingDimension {
            pairing: pairing.dim(),
            space: basis.nvars(),
        });
    }
    let l = basis.len();
    let mut matrix = vec![vec![Polynomial::zero(l); l]; l];
    let g = basis.generators();
    for i in 0..l {
        for j in i + 1..l {
            let b = g[i].poisson_bracket(&g[j], pairing)?;
            let r = basis.rewrite(&b).map_err(|source| ReductionError::Rewrite {
                what: format!("{{theta_{}, theta_{}}}", i + 1, j + 1),
                source,
            })?;
            // the antisymmetry check is against an independent rewrite
            let back = g[j].poisson_bracket(&g[i], pairing)?;
            let rb = basis.rewrite(&back).map_err(|source| ReductionError::Rewrite {
                what: format!("{{theta_{}, theta_{}}}", j + 1, i + 1),
                source,
            })?;
            if !(&r + &rb).is_zero() {
                return Err(ReductionError::NotAntisymmetric(i, j));
            }
            matrix[i][j] = r;
            matrix[j][i] = rb;
        }
    }
    Ok(PoissonStructure { matrix })
}

/// `θ̇_j = Σ_i ∂F̃/∂θ_i · P_ji`.
pub fn reduced_hamiltonian_field(hamiltonian: &Polynomial, p: &PoissonStructure) -> Result<PolyMap, ReductionError> {
    let l = p.len();
    arity(hamiltonian, l + 1)?;
    let grad: Vec<Polynomial> = (0..l).map(|i| hamiltonian.d(i)).collect();
    let comps = (0..l)
        .map(|j| {
            let mut acc = Polynomial::zero(l + 1);
            for (i, gi) in grad.iter().enumerate() {
                let pji = &p.matrix[j][i];
                if !pji.is_zero() && !gi.is_zero() {
                    acc = &acc + &(gi * &pji.extend_vars(1));
                }
            }
            acc
        })
        .collect();
    Ok(PolyMap::from_components(l + 1, comps))
}

pub fn reduce(family: &FieldFamily, basis: &InvariantBasis) -> Result<ReducedSystem, ReductionError> {
    match family {
        FieldFamily::General {
            coefficients,
            equivariants,
        } => Ok(ReducedSystem::General(project_general(coefficients, equivariants, basis)?)),
        FieldFamily::Hamiltonian { hamiltonian, pairing } => {
            let p = poisson_matrix(basis, pairing)?;
            Ok(ReducedSystem::Hamiltonian(HamiltonianReducedField::new(hamiltonian.clone(), p)?))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TangencyReport {
    pub relations: usize,
    pub samples: usize,
    pub max_residual: f64,
    /// `(relation index, residual)` for samples above tolerance.
    pub violations: Vec<(usize, f64)>,
    /// Whether `∇R·θ̇` vanishes identically after substituting `θ(v)`.
    pub symbolic: Vec<bool>,
    pub passed: bool,
}

/// Tangency of the reduced field to the relation variety, sampled at
/// `θ = π(v)` for Gaussian `v` and `λ ∈ [−1, 1]`, plus the symbolic check.
pub fn check_tangency<R: Rng + ?Sized>(
    field: &PolyMap,
    basis: &InvariantBasis,
    sample_count: usize,
    tol: f64,
    rng: &mut R,
) -> Result<TangencyReport, ReductionError> {
    let l = basis.len();
    let rels = basis.relations();
    let subs = upstairs_substitution(basis);
    let mut symbolic = Vec::with_capacity(rels.len());
    let mut derivs: Vec<Polynomial> = Vec::with_capacity(rels.len());
    for r in rels {
        let mut acc = Polynomial::zero(l + 1);
        let re = r.extend_vars(1);
        for (j, fj) in field.components().iter().enumerate() {
            acc = &acc + &(&re.d(j) * fj);
        }
        symbolic.push(acc.compose(&subs)?.is_zero());
        derivs.push(acc);
    }
    let compiled = CompiledMap::from_polys(l + 1, &derivs);
    let mut max_residual = 0.0f64;
    let mut violations = Vec::new();
    if !rels.is_empty() {
        for _ in 0..sample_count {
            let v: Vec<f64> = (0..basis.nvars()).map(|_| StandardNormal.sample(rng)).collect();
            let mut x = basis.hilbert_map(&v);
            x.push(rng.gen_range(-1.0..1.0));
            for (k, r) in compiled.eval(&x).into_iter().enumerate() {
                max_residual = max_residual.max(r.abs());
                if r.abs() > tol {
                    violations.push((k, r.abs()));
                }
            }
        }
    }
    Ok(TangencyReport {
        relations: rels.len(),
        samples: if rels.is_empty() { 0 } else { sample_count },
        max_residual,
        passed: violations.is_empty() && symbolic.iter().all(|&s| s),
        violations,
        symbolic,
    })
}
