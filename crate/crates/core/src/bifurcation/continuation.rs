use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{restricted_nondegeneracy, solve_equilibrium, BifurcationError, GFunction, SolverSettings};
use crate::invariants::InvariantBasis;
use crate::linalg;

#[derive(Clone, Debug, Serialize)]
pub struct Seed {
    pub theta: Vec<f64>,
    pub lambda: f64,
    /// Casimir values held fixed along the branch.
    pub levels: Option<Vec<f64>>,
    pub condition_number: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationSettings {
    pub step: f64,
    pub min_step: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub condition_limit: f64,
    /// Arclength resolution used when a singular point is being bracketed.
    pub localize: f64,
    pub max_points: usize,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        ContinuationSettings {
            step: 1e-2,
            min_step: 1e-8,
            tol: 1e-10,
            max_iter: 25,
            condition_limit: super::CONDITION_LIMIT,
            localize: 1e-6,
            max_points: 200_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationPoint {
    pub theta: Vec<f64>,
    pub lambda: f64,
    pub residual: f64,
    pub condition_number: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationResult {
    pub points: Vec<ContinuationPoint>,
    pub termination: String,
    /// `λ` near which a singular point was bracketed, if any.
    pub singular_lambda: Option<f64>,
}

/// Equilibria at `λ` found from Gauss–Newton started at `π(v)` for random
/// `v`, filtered to nondegenerate points in the image of `π`, deduplicated
/// and sorted by condition number. Nonzero equilibria come first.
pub fn presweep_seeds<R: Rng + ?Sized>(
    g: &GFunction,
    basis: &InvariantBasis,
    lambda: f64,
    samples: usize,
    rng: &mut R,
) -> Vec<Seed> {
    let settings = SolverSettings::default();
    let n = basis.nvars();
    let mut seeds: Vec<Seed> = Vec::new();
    for _ in 0..samples {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let guess = basis.hilbert_map(&v);
        let Ok(sol) = solve_equilibrium(g, &guess, lambda, None, &settings) else {
            continue;
        };
        if basis.lift_point(&sol.theta, &v, 1e-8, 100).is_err() {
            continue;
        }
        let levels = if g.casimirs().is_empty() {
            None
        } else {
            Some(g.levels(&sol.theta))
        };
        let (nd, _, _) = restricted_nondegeneracy(g, &sol.theta, lambda, levels.as_deref());
        if !nd.nondegenerate {
            continue;
        }
        let dup = seeds.iter().any(|s| {
            s.theta
                .iter()
                .zip(&sol.theta)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                < 1e-6
        });
        if !dup {
            seeds.push(Seed {
                theta: sol.theta,
                lambda,
                levels,
                condition_number: nd.condition_number,
            });
        }
    }
    seeds.sort_by(|a, b| {
        let za = linalg::norm(&a.theta) < 1e-8;
        let zb = linalg::norm(&b.theta) < 1e-8;
        za.cmp(&zb).then(a.condition_number.total_cmp(&b.condition_number))
    });
    seeds
}

/// Pseudo-arclength continuation from `seed` over `[lo, hi]`. When the seed
/// lies strictly inside the range both directions are followed and joined
/// so that `λ` increases along the returned points.
pub fn continue_branch(
    g: &GFunction,
    seed: &Seed,
    lo: f64,
    hi: f64,
    settings: &ContinuationSettings,
) -> Result<ContinuationResult, BifurcationError> {
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let l0 = seed.lambda;
    if l0 > lo && l0 < hi {
        let down = one_way(g, seed, lo, settings)?;
        let up = one_way(g, seed, hi, settings)?;
        let mut points: Vec<ContinuationPoint> = down.points.into_iter().skip(1).rev().collect();
        points.extend(up.points);
        let termination = if down.termination == up.termination {
            down.termination
        } else {
            format!("lower: {}; upper: {}", down.termination, up.termination)
        };
        return Ok(ContinuationResult {
            points,
            termination,
            singular_lambda: down.singular_lambda.or(up.singular_lambda),
        });
    }
    let target = if l0 >= hi { lo } else { hi };
    one_way(g, seed, target, settings)
}

fn join(theta: &[f64], lambda: f64) -> DVector<f64> {
    let mut u = DVector::zeros(theta.len() + 1);
    u.rows_mut(0, theta.len()).copy_from_slice(theta);
    u[theta.len()] = lambda;
    u
}

fn full_jacobian(g: &GFunction, u: &DVector<f64>, levels: Option<&[f64]>) -> DMatrix<f64> {
    let l = g.dim();
    let (j, dl) = g.stacked_jacobian(&u.as_slice()[..l], u[l], levels);
    let mut a = DMatrix::zeros(j.nrows(), l + 1);
    a.view_mut((0, 0), (j.nrows(), l)).copy_from(&j);
    a.set_column(l, &dl);
    a
}

fn corrector(
    g: &GFunction,
    pred: &DVector<f64>,
    tangent: &DVector<f64>,
    levels: Option<&[f64]>,
    settings: &ContinuationSettings,
) -> Option<DVector<f64>> {
    let l = g.dim();
    let mut u = pred.clone();
    for _ in 0..settings.max_iter {
        let s = g.stacked(&u.as_slice()[..l], u[l], levels);
        let m = s.len();
        let mut r = DVector::zeros(m + 1);
        r.rows_mut(0, m).copy_from_slice(&s);
        r[m] = tangent.dot(&(&u - pred));
        let rn = r.norm();
        if !rn.is_finite() {
            return None;
        }
        if rn <= settings.tol {
            return Some(u);
        }
        let a = full_jacobian(g, &u, levels);
        let mut j = DMatrix::zeros(m + 1, l + 1);
        j.view_mut((0, 0), (m, l + 1)).copy_from(&a);
        j.set_row(m, &tangent.transpose());
        u -= linalg::lstsq(&j, &r, 1e-12);
    }
    None
}

fn restricted_det(g: &GFunction, u: &DVector<f64>, levels: Option<&[f64]>) -> (f64, f64, bool) {
    let l = g.dim();
    let (nd, _, m) = restricted_nondegeneracy(g, &u.as_slice()[..l], u[l], levels);
    let det = if m.nrows() == 0 { 1.0 } else { m.determinant() };
    (det, nd.condition_number, nd.nondegenerate)
}

fn one_way(
    g: &GFunction,
    seed: &Seed,
    target: f64,
    settings: &ContinuationSettings,
) -> Result<ContinuationResult, BifurcationError> {
    let l = g.dim();
    let levels = seed.levels.as_deref();
    let solver = SolverSettings {
        tol: settings.tol,
        max_iter: 50,
    };
    let start = solve_equilibrium(g, &seed.theta, seed.lambda, levels, &solver)?;
    let mut u = join(&start.theta, seed.lambda);
    let (mut det, cond, nondeg) = restricted_det(g, &u, levels);
    if !nondeg {
        return Err(BifurcationError::DegenerateSeed(cond));
    }
    let mut points = vec![ContinuationPoint {
        theta: start.theta.clone(),
        lambda: seed.lambda,
        residual: start.residual,
        condition_number: cond,
    }];
    let dir = (target - seed.lambda).signum();
    if dir == 0.0 {
        return Ok(ContinuationResult {
            points,
            termination: "range end".into(),
            singular_lambda: None,
        });
    }

    let ns = linalg::nullspace_f64(&full_jacobian(g, &u, levels), 1e-10);
    if ns.is_empty() {
        return Err(BifurcationError::DegenerateSeed(cond));
    }
    let mut tangent = DVector::zeros(l + 1);
    for v in &ns {
        tangent += v * v[l];
    }
    if tangent.norm() < 1e-12 {
        tangent = ns[0].clone();
    }
    tangent /= tangent.norm();
    if tangent[l] * dir < 0.0 {
        tangent = -tangent;
    }

    let mut h = settings.step;
    let reason;
    let mut singular = None;
    loop {
        if points.len() >= settings.max_points {
            reason = "point limit";
            break;
        }
        if h < settings.min_step {
            reason = "step underflow";
            break;
        }
        let pred = &u + &tangent * h;
        let Some(next) = corrector(g, &pred, &tangent, levels, settings).filter(|n| (n - &u).norm() <= 4.0 * h) else {
            h /= 2.0;
            continue;
        };
        if (next[l] - target) * dir >= 0.0 {
            // Land exactly on the end of the range.
            let s = (target - u[l]) / (next[l] - u[l]);
            let guess: Vec<f64> = (0..l).map(|i| u[i] + s * (next[i] - u[i])).collect();
            match solve_equilibrium(g, &guess, target, levels, &solver) {
                Ok(sol) => {
                    let end = join(&sol.theta, target);
                    let (d, c, nd) = restricted_det(g, &end, levels);
                    if nd && d.signum() == det.signum() {
                        points.push(ContinuationPoint {
                            theta: sol.theta,
                            lambda: target,
                            residual: sol.residual,
                            condition_number: c,
                        });
                        reason = "range end";
                        break;
                    }
                    if h > settings.localize {
                        h /= 2.0;
                        continue;
                    }
                    singular = Some(target);
                    reason = "possible bifurcation";
                    break;
                }
                Err(_) => {
                    h /= 2.0;
                    continue;
                }
            }
        }
        let (d, c, nd) = restricted_det(g, &next, levels);
        if !nd || d.signum() != det.signum() {
            if h > settings.localize {
                h /= 2.0;
                continue;
            }
            singular = Some(next[l]);
            reason = "possible bifurcation";
            break;
        }
        let th: Vec<f64> = next.as_slice()[..l].to_vec();
        let residual = linalg::norm(&g.stacked(&th, next[l], levels));
        points.push(ContinuationPoint {
            theta: th,
            lambda: next[l],
            residual,
            condition_number: c,
        });
        let sec = &next - &u;
        tangent = &sec / sec.norm();
        u = next;
        det = d;
        h = (2.0 * h).min(settings.step);
    }
    Ok(ContinuationResult {
        points,
        termination: reason.into(),
        singular_lambda: singular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{PolyMap, Polynomial};

    fn scalar(text: &str) -> GFunction {
        let p = Polynomial::parse(text, &["t1", "lambda"]).unwrap();
        GFunction::new(PolyMap::from_components(2, vec![p]), vec![], vec![]).unwrap()
    }

    #[test]
    fn pitchfork_branch_stops_at_origin() {
        let g = scalar("2*(lambda - t1)*t1");
        let seed = Seed {
            theta: vec![1.0],
            lambda: 1.0,
            levels: None,
            condition_number: 1.0,
        };
        let r = continue_branch(&g, &seed, 1.0, 0.0, &ContinuationSettings::default()).unwrap();
        assert_eq!(r.termination, "possible bifurcation");
        let near = r.singular_lambda.unwrap();
        assert!(near.abs() < 1e-5, "{near}");
        for p in &r.points {
            assert!((p.theta[0] - p.lambda).abs() < 1e-9);
            assert!(p.condition_number < 1e6);
        }
        for w in r.points.windows(2) {
            assert!(w[1].lambda < w[0].lambda);
        }
    }

    #[test]
    fn both_directions() {
        let g = scalar("lambda - t1^3 - t1");
        let seed = Seed {
            theta: vec![0.0],
            lambda: 0.0,
            levels: None,
            condition_number: 1.0,
        };
        let r = continue_branch(&g, &seed, -1.0, 2.0, &ContinuationSettings::default()).unwrap();
        assert_eq!(r.termination, "range end");
        assert_eq!(r.points.first().unwrap().lambda, -1.0);
        assert_eq!(r.points.last().unwrap().lambda, 2.0);
        for w in r.points.windows(2) {
            assert!(w[1].lambda > w[0].lambda);
        }
        for p in &r.points {
            let t = p.theta[0];
            assert!((p.lambda - t * t * t - t).abs() < 1e-9);
        }
    }

    #[test]
    fn fold_is_flagged() {
        let g = scalar("lambda - t1^2");
        let seed = Seed {
            theta: vec![1.0],
            lambda: 1.0,
            levels: None,
            condition_number: 1.0,
        };
        let r = continue_branch(&g, &seed, 1.0, -1.0, &ContinuationSettings::default()).unwrap();
        assert_eq!(r.termination, "possible bifurcation");
        assert!(r.singular_lambda.unwrap().abs() < 1e-5);
    }
}
