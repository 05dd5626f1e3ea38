use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{CodimReport, NondegeneracyReport, TransversalityReport};
use crate::groups::{GroupRep, IsotropyLabel, Subgroup, DEFAULT_TOL};
use crate::invariants::InvariantBasis;
use crate::linalg;
use crate::poly::{rational_to_f64, CompiledMap, PolyMap};
use crate::reduction::FieldFamily;

#[derive(Clone, Debug, Serialize)]
pub struct IsotropyType {
    pub label: IsotropyLabel,
    #[serde(skip)]
    pub subgroup: Subgroup,
    /// Orthonormal basis of the fixed space of the representative.
    #[serde(skip)]
    pub fixed_basis: Vec<Vec<f64>>,
}

/// Isotropy types of nonzero points, found from generic points of the
/// fixed spaces of cyclic subgroups of the finite part.
pub fn isotropy_types<R: Rng + ?Sized>(group: &GroupRep, rng: &mut R) -> Vec<IsotropyType> {
    let mut spaces: Vec<Vec<Vec<f64>>> = Vec::new();
    let n = group.dim();
    spaces.push((0..n).map(|i| (0..n).map(|k| if i == k { 1.0 } else { 0.0 }).collect()).collect());
    for g in 1..group.order() {
        let mut elems = vec![0usize];
        let mut x = g;
        while x != 0 {
            elems.push(x);
            x = group.product(x, g);
        }
        elems.sort_unstable();
        let fs = group.fixed_subspace(&Subgroup {
            finite: elems,
            torus: Vec::new(),
        });
        if fs.dim() > 0 {
            spaces.push(fs.basis);
        }
    }
    let mut out: Vec<IsotropyType> = Vec::new();
    for basis in spaces {
        let v = random_in(&basis, 1.0, rng);
        let Ok(h) = group.isotropy(&v, DEFAULT_TOL) else {
            continue;
        };
        if out.iter().any(|t| group.same_orbit_type(&t.subgroup, &h)) {
            continue;
        }
        let fs = group.fixed_subspace(&Subgroup {
            finite: h.finite.clone(),
            torus: Vec::new(),
        });
        out.push(IsotropyType {
            label: group.label(&h),
            subgroup: h,
            fixed_basis: fs.basis,
        });
    }
    out.sort_by(|a, b| a.label.cmp(&b.label));
    out
}

fn random_in<R: Rng + ?Sized>(basis: &[Vec<f64>], radius: f64, rng: &mut R) -> Vec<f64> {
    let n = basis.first().map(Vec::len).unwrap_or(0);
    let mut v = vec![0.0; n];
    for b in basis {
        let c: f64 = rng.sample(StandardNormal);
        for (x, y) in v.iter_mut().zip(b) {
            *x += c * y;
        }
    }
    let norm = linalg::norm(&v);
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x *= radius / norm);
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExistenceVerdict {
    ExistencePredicted,
    NonExistencePredicted,
    NonMembership,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExistenceReport {
    pub isotropy: IsotropyLabel,
    pub verdict: ExistenceVerdict,
    pub message: String,
    /// `(f_i(0,0))` or `(∂F̃/∂θ_i(0,0))`.
    pub gamma0: Vec<f64>,
    /// Smallest distance from `γ(0)` to a sampled t-set, per radius.
    pub membership: BTreeMap<String, f64>,
    /// Linear extrapolation of the distances to radius zero.
    pub membership_limit: f64,
    pub member: bool,
    /// `k − dim T_x` for the most common t-set dimension at the smallest radius.
    pub codim_estimate: Option<usize>,
    pub constrained_coordinates: Vec<usize>,
    pub transversal: bool,
}

pub const MEMBERSHIP_TOL: f64 = 1e-6;
pub const RADII: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// Maps codimension, transversality and `γ(0)`-membership evidence onto the
/// hypotheses of the branch-existence theorems. The verdict is evidence,
/// not proof.
#[allow(clippy::too_many_arguments)]
pub fn branch_existence_diagnostic<R: Rng + ?Sized>(
    family: &FieldFamily,
    basis: &InvariantBasis,
    group: &GroupRep,
    classification: &NondegeneracyReport,
    transversality: Option<&TransversalityReport>,
    codim: Option<&CodimReport>,
    h: &IsotropyType,
    samples: usize,
    rng: &mut R,
) -> ExistenceReport {
    let n = basis.nvars();
    let (columns, gamma0) = match family {
        FieldFamily::General {
            coefficients,
            equivariants,
        } => (
            equivariants.generators().to_vec(),
            coefficients.iter().map(|c| rational_to_f64(&c.constant_term())).collect::<Vec<f64>>(),
        ),
        FieldFamily::Hamiltonian { hamiltonian, pairing } => (
            basis.generators().iter().map(|t| pairing.hamiltonian_field(t)).collect::<Vec<PolyMap>>(),
            (0..basis.len())
                .map(|i| {
                    hamiltonian
                        .differentiate(i)
                        .map(|d| rational_to_f64(&d.constant_term()))
                        .unwrap_or(f64::NAN)
                })
                .collect(),
        ),
    };
    let k = columns.len();
    let compiled: Vec<CompiledMap> = columns.iter().map(CompiledMap::new).collect();
    let per_radius = (samples / RADII.len()).max(1);
    let mut membership = BTreeMap::new();
    let mut dists = Vec::new();
    let mut dims_small: BTreeMap<usize, usize> = BTreeMap::new();
    let g0 = DVector::from_column_slice(&gamma0);
    for (ri, &r) in RADII.iter().enumerate() {
        let mut best = f64::INFINITY;
        for _ in 0..per_radius {
            let x = random_in(&h.fixed_basis, r, rng);
            if x.is_empty() || linalg::norm(&x) == 0.0 {
                continue;
            }
            let Ok(iso) = group.isotropy(&x, DEFAULT_TOL) else {
                continue;
            };
            if !group.same_orbit_type(&iso, &h.subgroup) {
                continue;
            }
            let t = t_set(group, &compiled, &x, n, k);
            let dist = if t.ncols() == 0 {
                g0.norm()
            } else {
                (&g0 - &t * (t.transpose() * &g0)).norm()
            };
            best = best.min(dist);
            if ri == RADII.len() - 1 {
                *dims_small.entry(t.ncols()).or_default() += 1;
            }
        }
        membership.insert(format!("{r:e}"), best);
        dists.push(best);
    }
    let m = dists.len();
    let (d1, d2) = (dists[m - 2], dists[m - 1]);
    let (r1, r2) = (RADII[m - 2], RADII[m - 1]);
    let limit = if d1.is_finite() && d2.is_finite() {
        (d2 - (d1 - d2) * r2 / (r1 - r2)).max(0.0)
    } else {
        f64::INFINITY
    };
    let member = d2 <= MEMBERSHIP_TOL || (limit <= MEMBERSHIP_TOL && d2 <= d1);
    let codim_estimate = dims_small.iter().max_by_key(|(_, c)| **c).map(|(d, _)| k - d);
    let constrained = codim.map(|c| c.constrained_coordinates()).unwrap_or_default();
    let transversal = transversality.map(|t| t.transversal).unwrap_or(false);

    let (verdict, message) = if classification.class.is_none() {
        (ExistenceVerdict::Inconclusive, "inconclusive (no nondegeneracy class)".to_string())
    } else if h.label.key == "G" {
        (ExistenceVerdict::Inconclusive, "inconclusive (isotropy of the trivial solution)".to_string())
    } else if family.is_hamiltonian() && constrained.iter().any(|&i| gamma0[i - 1].abs() > 1e-12) {
        (
            ExistenceVerdict::NonMembership,
            "non-membership: no branch with isotropy (H) predicted through this seed".to_string(),
        )
    } else if (family.is_hamiltonian() && constrained.len() >= 2) || codim_estimate.is_some_and(|c| c >= 2) {
        (ExistenceVerdict::NonExistencePredicted, "non-existence predicted (codim ≥ 2 evidence)".to_string())
    } else if !transversal {
        (ExistenceVerdict::Inconclusive, "inconclusive (not transversal)".to_string())
    } else if codim_estimate == Some(1) && member {
        (
            ExistenceVerdict::ExistencePredicted,
            "existence predicted (codim A_(H)=1 evidence, transversal, γ(0)∈A_(H) witnessed numerically)".to_string(),
        )
    } else {
        (ExistenceVerdict::Inconclusive, "inconclusive".to_string())
    };
    ExistenceReport {
        isotropy: h.label.clone(),
        verdict,
        message,
        gamma0,
        membership,
        membership_limit: limit,
        member,
        codim_estimate,
        constrained_coordinates: constrained,
        transversal,
    }
}

/// Orthonormal basis of `{t : Σ t_i Φ_i(x) ∈ 𝔤·x}`.
fn t_set(group: &GroupRep, columns: &[CompiledMap], x: &[f64], n: usize, k: usize) -> DMatrix<f64> {
    let xv = DVector::from_column_slice(x);
    let tangent: Vec<DVector<f64>> = (0..group.torus_rank()).map(|a| group.torus_f64(a) * &xv).collect();
    let w = linalg::orthonormalize(&tangent, 1e-12 * xv.norm().max(1e-300));
    let mut phi = DMatrix::zeros(n, k);
    let mut scale = vec![0.0; k];
    for (i, c) in columns.iter().enumerate() {
        let mut col = DVector::from_vec(c.eval(x));
        for b in &w {
            col -= b * b.dot(&col);
        }
        let s = col.norm();
        if s > 1e-14 * (1.0 + linalg::norm(&c.eval(x))) {
            phi.set_column(i, &(col / s));
            scale[i] = s;
        }
    }
    let ns = linalg::nullspace_f64(&phi, 1e-9);
    let back: Vec<DVector<f64>> = ns
        .iter()
        .map(|v| DVector::from_iterator(k, (0..k).map(|i| if scale[i] > 0.0 { v[i] / scale[i] } else { v[i] })))
        .collect();
    let ortho = linalg::orthonormalize(&back, 1e-12);
    let mut t = DMatrix::zeros(k, ortho.len());
    for (j, v) in ortho.iter().enumerate() {
        t.set_column(j, v);
    }
    t
}
