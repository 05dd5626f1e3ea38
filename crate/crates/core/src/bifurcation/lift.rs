use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use super::ContinuationPoint;
use crate::groups::{GroupRep, IsotropyLabel, DEFAULT_TOL};
use crate::invariants::InvariantBasis;
use crate::linalg;
use crate::poly::{CompiledMap, PolyMap};

/// Lift tolerance on `|π(v) − θ|`.
pub const LIFT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct BranchRecord {
    pub lambda: f64,
    pub theta: Vec<f64>,
    /// `None` when the lift failed; the point is kept and flagged.
    pub v: Option<Vec<f64>>,
    pub isotropy: Option<IsotropyLabel>,
    /// Coefficients of the velocity in the torus-generator basis.
    pub velocity: Vec<f64>,
    pub residual_reduced: f64,
    pub residual_lift: f64,
    pub n_h: usize,
}

/// Lifts reduced branch points to `V`, warm-starting each lift from the
/// previous one, and measures the velocity `X(v) = Σ c_a ξ_a v`.
pub fn lift_branch<R: Rng + ?Sized>(
    points: &[ContinuationPoint],
    basis: &InvariantBasis,
    full_field: &PolyMap,
    group: &GroupRep,
    rng: &mut R,
) -> Vec<BranchRecord> {
    let n = basis.nvars();
    let m = group.torus_rank();
    let field = CompiledMap::new(full_field);
    let mut prev: Option<Vec<f64>> = None;
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let lifted = if linalg::norm(&p.theta) < 1e-12 {
            Some(vec![0.0; n])
        } else {
            basis
                .lift_with_retries(&p.theta, prev.as_deref(), LIFT_TOL, 100, 16, rng)
                .ok()
        };
        let Some(v) = lifted else {
            out.push(BranchRecord {
                lambda: p.lambda,
                theta: p.theta.clone(),
                v: None,
                isotropy: None,
                velocity: vec![f64::NAN; m],
                residual_reduced: p.residual,
                residual_lift: f64::INFINITY,
                n_h: 0,
            });
            continue;
        };
        let mut x = v.clone();
        x.push(p.lambda);
        let xv = DVector::from_vec(field.eval(&x));
        let mut cols = DMatrix::zeros(n, m);
        let vv = DVector::from_column_slice(&v);
        for a in 0..m {
            cols.set_column(a, &(group.torus_f64(a) * &vv));
        }
        let c = if m > 0 {
            linalg::lstsq(&cols, &xv, 1e-12)
        } else {
            DVector::zeros(0)
        };
        let vel_res = (&xv - &cols * &c).norm();
        let pi = basis.hilbert_map(&v);
        let proj_res = pi.iter().zip(&p.theta).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let isotropy = group.isotropy(&v, DEFAULT_TOL).ok().map(|h| group.label(&h));
        let n_h = group.torus_rank_nh(&v, DEFAULT_TOL).unwrap_or(0);
        out.push(BranchRecord {
            lambda: p.lambda,
            theta: p.theta.clone(),
            v: Some(v.clone()),
            isotropy,
            velocity: c.iter().copied().collect(),
            residual_reduced: p.residual,
            residual_lift: proj_res.max(vel_res),
            n_h,
        });
        prev = Some(v);
    }
    out
}
