use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::BifurcationError;
use crate::invariants::InvariantBasis;
use crate::linalg;
use crate::poly::{CompiledMap, CompiledPoly, PolyMap};
use crate::reduction::PoissonStructure;

#[derive(Clone, Debug, Serialize)]
pub struct CodimSettings {
    /// Base approach radius; the sampled radii are `scale · factors`.
    pub scale: f64,
    pub factors: Vec<f64>,
    pub directions: usize,
    pub random_candidates: usize,
    pub tol: f64,
}

impl Default for CodimSettings {
    fn default() -> Self {
        CodimSettings {
            scale: 1e-6,
            factors: vec![1.0, 0.5, 0.25, 0.125, 0.0625],
            directions: 8,
            random_candidates: 64,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CodimWitness {
    /// 1-based generator indices.
    pub i0: usize,
    pub i1: usize,
    pub x0: Vec<f64>,
    /// Largest ratio seen at the smallest radius.
    pub max_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CodimReport {
    pub found: bool,
    pub i0: Option<usize>,
    pub i1: Option<usize>,
    pub x0: Option<Vec<f64>>,
    pub max_residual: Option<f64>,
    pub conclusion: String,
    /// Every pair that admitted a witness, in search order.
    pub witnesses: Vec<CodimWitness>,
}

impl CodimReport {
    /// Distinct `i1` over all witnesses, sorted.
    pub fn constrained_coordinates(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.witnesses.iter().map(|w| w.i1).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

struct Pair {
    numerators: CompiledMap,
    numerator_jac: Vec<CompiledMap>,
    denominator: CompiledPoly,
    empty: bool,
}

fn pair(basis: &InvariantBasis, p: &PoissonStructure, i0: usize, i1: usize) -> Result<Pair, BifurcationError> {
    let n = basis.nvars();
    let mut nums = Vec::new();
    for i in 0..p.len() {
        if i == i1 {
            continue;
        }
        let up = basis.expand(p.entry(i0, i))?;
        if !up.is_zero() {
            nums.push(up);
        }
    }
    let den = basis.expand(p.entry(i0, i1))?;
    let map = PolyMap::from_components(n, nums);
    let numerator_jac = (0..n)
        .map(|k| CompiledMap::new(&map.differentiate(k).expect("index in range")))
        .collect();
    Ok(Pair {
        empty: map.is_empty(),
        numerators: CompiledMap::new(&map),
        numerator_jac,
        denominator: CompiledPoly::new(&den),
    })
}

impl Pair {
    fn ratio(&self, x: &[f64]) -> f64 {
        if self.empty {
            return 0.0;
        }
        let d = self.denominator.eval(x).abs();
        linalg::max_abs(&self.numerators.eval(x)) / d
    }

    /// Gauss–Newton towards a common zero of the numerators.
    fn refine(&self, x0: &[f64]) -> Vec<f64> {
        let n = x0.len();
        let mut x = DVector::from_column_slice(x0);
        if self.empty {
            return x0.to_vec();
        }
        for _ in 0..50 {
            let r = DVector::from_vec(self.numerators.eval(x.as_slice()));
            if r.norm() <= 1e-14 {
                break;
            }
            let mut j = DMatrix::zeros(r.len(), n);
            for (k, col) in self.numerator_jac.iter().enumerate() {
                for (row, v) in col.eval(x.as_slice()).into_iter().enumerate() {
                    j[(row, k)] = v;
                }
            }
            x -= linalg::lstsq(&j, &r, 1e-12);
        }
        x.iter().copied().collect()
    }
}

fn candidates<R: Rng + ?Sized>(n: usize, random: usize, rng: &mut R) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut grid = Vec::new();
    for a in 0..n {
        let mut e = vec![0.0; n];
        e[a] = 1.0;
        grid.push(e);
    }
    for a in 0..n {
        for b in a + 1..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[a] = 1.0;
                e[b] = s;
                grid.push(e);
            }
        }
    }
    let rand = (0..random)
        .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    (grid, rand)
}

/// Sampled ratios along approach sequences `x0 + r u`; `None` when the
/// denominator vanishes at `x0` or a ratio fails to shrink to `tol`.
fn approach<R: Rng + ?Sized>(pair: &Pair, x0: &[f64], settings: &CodimSettings, rng: &mut R) -> Option<f64> {
    let n = x0.len();
    let d0 = pair.denominator.eval(x0).abs();
    if d0 < 1e-6 * (1.0 + linalg::norm(x0)) {
        return None;
    }
    let mut worst = 0.0f64;
    for _ in 0..settings.directions {
        let mut u: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let un = linalg::norm(&u);
        u.iter_mut().for_each(|x| *x /= un);
        let ratios: Vec<f64> = settings
            .factors
            .iter()
            .map(|f| {
                let r = settings.scale * f;
                let x: Vec<f64> = x0.iter().zip(&u).map(|(a, b)| a + r * b).collect();
                pair.ratio(&x)
            })
            .collect();
        let last = *ratios.last()?;
        if !(last <= settings.tol) || last > ratios[0] * (1.0 + 1e-9) + 1e-15 {
            return None;
        }
        worst = worst.max(last);
    }
    Some(worst)
}

/// Searches pairs `(i0, i1)` with `{θ_i0, θ_i1} ≢ 0` (i0 ascending, i1
/// descending) for a point `x0` where every other bracket with `θ_i0`
/// vanishes while `{θ_i0, θ_i1}` does not.
pub fn codim_criterion<R: Rng + ?Sized>(
    basis: &InvariantBasis,
    p: &PoissonStructure,
    settings: &CodimSettings,
    rng: &mut R,
) -> Result<CodimReport, BifurcationError> {
    let l = p.len();
    let n = basis.nvars();
    let mut witnesses = Vec::new();
    for i0 in 0..l {
        for i1 in (0..l).rev() {
            if i1 == i0 || p.entry(i0, i1).is_zero() {
                continue;
            }
            let pr = pair(basis, p, i0, i1)?;
            let (grid, rand) = candidates(n, settings.random_candidates, rng);
            let refined: Vec<Vec<f64>> = rand.iter().map(|x| pr.refine(x)).collect();
            let mut hit = None;
            for x in grid.iter().chain(&refined) {
                let resid = if pr.empty {
                    0.0
                } else {
                    linalg::max_abs(&pr.numerators.eval(x))
                };
                if resid > 1e-12 * (1.0 + linalg::norm(x)) {
                    continue;
                }
                if let Some(m) = approach(&pr, x, settings, rng) {
                    hit = Some((x.clone(), m));
                    break;
                }
            }
            if let Some((x0, m)) = hit {
                witnesses.push(CodimWitness {
                    i0: i0 + 1,
                    i1: i1 + 1,
                    x0,
                    max_residual: m,
                });
            }
        }
    }
    Ok(match witnesses.first() {
        Some(w) => CodimReport {
            found: true,
            i0: Some(w.i0),
            i1: Some(w.i1),
            x0: Some(w.x0.clone()),
            max_residual: Some(w.max_residual),
            conclusion: format!("A_(H) ⊆ {{t_{}=0}}, codim ≥ 1", w.i1),
            witnesses,
        },
        None => CodimReport {
            found: false,
            i0: None,
            i1: None,
            x0: None,
            max_residual: None,
            conclusion: "no witness found; inconclusive".into(),
            witnesses,
        },
    })
}
