use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use super::BifurcationError;
use crate::groups::QMatrix;
use crate::linalg;
use crate::poly::{rational_to_f64, Monomial, Pairing, PolyMap, Polynomial, Rational};
use crate::reduction::FieldFamily;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum NondegeneracyClass {
    Stationary,
    Hopf,
    HamSteadyState,
    HamHopf,
}

/// A class of linearizations `DX_λ(0) = Σ c_s(λ) B_s`.
#[derive(Clone, Debug)]
pub struct ClassSpan {
    pub class: NondegeneracyClass,
    pub names: Vec<String>,
    pub matrices: Vec<QMatrix>,
}

fn zeros(n: usize) -> QMatrix {
    vec![vec![Rational::zero(); n]; n]
}

fn symplectic(pairing: &Pairing) -> QMatrix {
    pairing
        .poisson_tensor()
        .into_iter()
        .map(|row| row.into_iter().map(|k| Rational::from_integer(k.into())).collect())
        .collect()
}

impl ClassSpan {
    pub fn stationary(n: usize) -> Self {
        ClassSpan {
            class: NondegeneracyClass::Stationary,
            names: vec!["sigma".into()],
            matrices: vec![linalg::identity(n)],
        }
    }

    /// `{I, J}` for a complex structure `J`.
    pub fn hopf(j: QMatrix) -> Self {
        let n = j.len();
        ClassSpan {
            class: NondegeneracyClass::Hopf,
            names: vec!["sigma".into(), "rho".into()],
            matrices: vec![linalg::identity(n), j],
        }
    }

    pub fn ham_steady_state(pairing: &Pairing) -> Self {
        ClassSpan {
            class: NondegeneracyClass::HamSteadyState,
            names: vec!["sigma".into()],
            matrices: vec![symplectic(pairing)],
        }
    }

    /// `A_1, …, A_4` with `V_0` spanned by the first coordinate of every
    /// pair and `V_1` by the second, both in pair order. `j` acts on each
    /// half.
    pub fn ham_hopf(pairing: &Pairing, j: &QMatrix) -> Self {
        let n = pairing.dim();
        let k = n / 2;
        let mut pos = vec![0usize; n];
        for (a, &(q, p)) in pairing.pairs().iter().enumerate() {
            pos[a] = q;
            pos[k + a] = p;
        }
        let one = Rational::one();
        let mut mats = vec![zeros(n), zeros(n), zeros(n), zeros(n)];
        for a in 0..k {
            mats[0][pos[k + a]][pos[a]] = one.clone();
            mats[1][pos[a]][pos[k + a]] = one.clone();
            mats[2][pos[a]][pos[a]] = one.clone();
            mats[2][pos[k + a]][pos[k + a]] = -one.clone();
            for b in 0..k {
                let c = j.get(a).and_then(|r| r.get(b)).cloned().unwrap_or_default();
                mats[3][pos[a]][pos[b]] = c.clone();
                mats[3][pos[k + a]][pos[k + b]] = c;
            }
        }
        ClassSpan {
            class: NondegeneracyClass::HamHopf,
            names: vec!["sigma".into(), "rho".into(), "tau".into(), "psi".into()],
            matrices: mats,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientCurve {
    pub name: String,
    /// Exact polynomial in `lambda`.
    pub polynomial: String,
    pub samples: Vec<f64>,
    pub at_zero: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NondegeneracyReport {
    pub class: Option<NondegeneracyClass>,
    pub grid: Vec<f64>,
    pub coefficients: Vec<CoefficientCurve>,
    pub fit_residual: f64,
    pub sigma0: f64,
    pub sigma_prime0: f64,
    pub transversal: bool,
    /// Extra hypotheses of the class, recorded but not enforced.
    pub hypotheses: BTreeMap<String, bool>,
    /// Numeric residual of every candidate span tried.
    pub candidates: Vec<(NondegeneracyClass, f64)>,
}

pub const CLASS_TOL: f64 = 1e-10;
pub const GRID_STEP: f64 = 1e-2;

/// `DX_λ(0)` as a matrix of polynomials in `λ`; `field` lives in `(v, λ)`.
pub fn linearization_at_origin(field: &PolyMap) -> Result<Vec<Vec<Polynomial>>, BifurcationError> {
    let n = field.len();
    if field.nvars() != n + 1 {
        return Err(BifurcationError::Arity {
            expected: n + 1,
            found: field.nvars(),
        });
    }
    let mut subs = vec![Polynomial::zero(1); n];
    subs.push(Polynomial::var(1, 0));
    let subs = PolyMap::from_components(1, subs);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for k in 0..n {
            row.push(field.component(i).differentiate(k)?.compose(&subs)?);
        }
        rows.push(row);
    }
    Ok(rows)
}

fn eval1(p: &Polynomial, x: f64) -> f64 {
    p.evaluate(&[x]).expect("univariate")
}

struct Fit {
    coeffs: Vec<Polynomial>,
    exact: bool,
    residual: f64,
}

fn fit(a: &[Vec<Polynomial>], span: &ClassSpan, grid: &[f64]) -> Fit {
    let s = span.matrices.len();
    let n = a.len();
    let frob = |x: &QMatrix, y: &QMatrix| -> Rational {
        let mut acc = Rational::zero();
        for i in 0..n {
            for k in 0..n {
                acc += &x[i][k] * &y[i][k];
            }
        }
        acc
    };
    let gram: Vec<Vec<Rational>> = (0..s)
        .map(|p| (0..s).map(|q| frob(&span.matrices[p], &span.matrices[q])).collect())
        .collect();
    let rhs: Vec<Polynomial> = span
        .matrices
        .iter()
        .map(|b| {
            let mut acc = Polynomial::zero(1);
            for i in 0..n {
                for k in 0..n {
                    if !b[i][k].is_zero() {
                        acc = &acc + &a[i][k].scale(&b[i][k]);
                    }
                }
            }
            acc
        })
        .collect();
    let mut inv = vec![vec![Rational::zero(); s]; s];
    for c in 0..s {
        let mut e = vec![Rational::zero(); s];
        e[c] = Rational::one();
        let col = linalg::solve(&gram, &e, s).expect("span matrices are independent");
        for r in 0..s {
            inv[r][c] = col[r].clone();
        }
    }
    let coeffs: Vec<Polynomial> = (0..s)
        .map(|p| {
            let mut acc = Polynomial::zero(1);
            for q in 0..s {
                if !inv[p][q].is_zero() {
                    acc = &acc + &rhs[q].scale(&inv[p][q]);
                }
            }
            acc
        })
        .collect();
    let mut exact = true;
    let mut residual = 0.0f64;
    let mut resid_at = vec![0.0f64; grid.len()];
    for i in 0..n {
        for k in 0..n {
            let mut r = a[i][k].clone();
            for (c, b) in coeffs.iter().zip(&span.matrices) {
                if !b[i][k].is_zero() {
                    r = &r - &c.scale(&b[i][k]);
                }
            }
            if !r.is_zero() {
                exact = false;
            }
            for (acc, &x) in resid_at.iter_mut().zip(grid) {
                *acc += eval1(&r, x).powi(2);
            }
        }
    }
    for r in resid_at {
        residual = residual.max(r.sqrt());
    }
    Fit {
        coeffs,
        exact,
        residual,
    }
}

/// Fits `DX_λ(0)` against each span in order and reports the first that
/// matches exactly.
pub fn classify_linearization(field: &PolyMap, spans: &[ClassSpan]) -> Result<NondegeneracyReport, BifurcationError> {
    let a = linearization_at_origin(field)?;
    let h = GRID_STEP;
    let grid: Vec<f64> = (-2..=2).map(|k| k as f64 * h).collect();
    let mut candidates = Vec::new();
    let mut chosen = None;
    for span in spans {
        if span.matrices.iter().any(|m| m.len() != a.len()) {
            continue;
        }
        let f = fit(&a, span, &grid);
        candidates.push((span.class, f.residual));
        if chosen.is_none() && f.exact && f.residual <= CLASS_TOL {
            chosen = Some((span, f));
        }
    }
    let Some((span, f)) = chosen else {
        return Ok(NondegeneracyReport {
            class: None,
            grid,
            coefficients: Vec::new(),
            fit_residual: candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min),
            sigma0: f64::NAN,
            sigma_prime0: f64::NAN,
            transversal: false,
            hypotheses: BTreeMap::new(),
            candidates,
        });
    };
    let coefficients: Vec<CoefficientCurve> = span
        .names
        .iter()
        .zip(&f.coeffs)
        .map(|(name, c)| CoefficientCurve {
            name: name.clone(),
            polynomial: c.to_text(&["lambda"]),
            samples: grid.iter().map(|&x| eval1(c, x)).collect(),
            at_zero: rational_to_f64(&c.constant_term()),
        })
        .collect();
    let sig = &coefficients[0].samples;
    let sigma0 = sig[2];
    let sigma_prime0 = (sig[3] - sig[1]) / (2.0 * h);
    let mut hypotheses = BTreeMap::new();
    if span.class == NondegeneracyClass::HamHopf {
        let c0 = |i: usize| f.coeffs[i].constant_term();
        hypotheses.insert("rho(0) = -1".to_string(), c0(1) == -Rational::one());
        hypotheses.insert("tau(0) = 0".to_string(), c0(2).is_zero());
        hypotheses.insert("psi(0) < 0".to_string(), c0(3) < Rational::zero());
    }
    Ok(NondegeneracyReport {
        class: Some(span.class),
        grid,
        coefficients,
        fit_residual: f.residual,
        sigma0,
        sigma_prime0,
        transversal: sigma0.abs() <= 1e-8 && sigma_prime0.abs() >= 1e-6,
        hypotheses,
        candidates,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TransversalityReport {
    pub class: NondegeneracyClass,
    /// `f_1(0, 0)`, exact.
    pub f1_at_origin: String,
    /// `∂_λ f_1(0, 0)`, exact.
    pub df1_dlambda: String,
    pub transversal: bool,
}

/// `f_1(0,0) = 0` and `∂_λ f_1(0,0) ≠ 0`, with `f_1 = ∂F̃/∂θ_1` for
/// Hamiltonian families.
pub fn check_transversality(family: &FieldFamily, report: &NondegeneracyReport) -> Result<TransversalityReport, BifurcationError> {
    let class = report.class.ok_or(BifurcationError::NoClass)?;
    let f1 = match family {
        FieldFamily::General { coefficients, .. } => coefficients.first().cloned(),
        FieldFamily::Hamiltonian { hamiltonian, .. } => {
            if hamiltonian.nvars() < 2 {
                None
            } else {
                Some(hamiltonian.differentiate(0)?)
            }
        }
    }
    .ok_or(BifurcationError::Arity { expected: 1, found: 0 })?;
    let nv = f1.nvars();
    let lam = Monomial::var(nv, nv - 1);
    let c0 = f1.constant_term();
    let c1 = f1.coeff(&lam);
    let fmt = |c: &Rational| crate::poly::format_rational(c);
    Ok(TransversalityReport {
        class,
        f1_at_origin: fmt(&c0),
        df1_dlambda: fmt(&c1),
        transversal: c0.is_zero() && !c1.is_zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn map(n: usize, texts: &[&str]) -> PolyMap {
        let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        names.push("lambda".into());
        PolyMap::from_components(n + 1, texts.iter().map(|t| Polynomial::parse(t, &names).unwrap()).collect())
    }

    fn j2() -> QMatrix {
        vec![vec![rat(0, 1), rat(-1, 1)], vec![rat(1, 1), rat(0, 1)]]
    }

    #[test]
    fn general_classes() {
        let e1 = map(1, &["(lambda - x1^2)*x1"]);
        let r = classify_linearization(&e1, &[ClassSpan::stationary(1)]).unwrap();
        assert_eq!(r.class, Some(NondegeneracyClass::Stationary));
        assert_eq!(r.coefficients[0].polynomial, "1 * lambda");
        assert!(r.sigma0.abs() < 1e-15 && (r.sigma_prime0 - 1.0).abs() < 1e-12 && r.transversal);

        let e2 = map(2, &["(lambda - x1^2 - x2^2)*x1 - x2", "(lambda - x1^2 - x2^2)*x2 + x1"]);
        let spans = [ClassSpan::stationary(2), ClassSpan::hopf(j2())];
        let r = classify_linearization(&e2, &spans).unwrap();
        assert_eq!(r.class, Some(NondegeneracyClass::Hopf));
        assert_eq!(r.coefficients[1].at_zero, 1.0);
        assert!(r.candidates[0].1 > 0.5);

        let none = map(2, &["x2", "0"]);
        let r = classify_linearization(&none, &spans).unwrap();
        assert_eq!(r.class, None);
        assert!(!r.transversal);
    }

    #[test]
    fn hamiltonian_classes() {
        let pairing = Pairing::standard(2).unwrap();
        let x = map(2, &["lambda*x2", "-lambda*x1"]);
        let r = classify_linearization(&x, &[ClassSpan::ham_steady_state(&pairing)]).unwrap();
        assert_eq!(r.class, Some(NondegeneracyClass::HamSteadyState));
        assert_eq!(r.coefficients[0].polynomial, "1 * lambda");

        let p4 = Pairing::standard(4).unwrap();
        let span = ClassSpan::ham_hopf(&p4, &j2());
        // σ A1 + ρ A2 + τ A3 + ψ A4 with σ = λ, ρ = −1, τ = 0, ψ = −2
        let mut comps = vec![String::new(); 4];
        let coeffs = ["lambda", "-1", "0", "-2"];
        for (m, c) in span.matrices.iter().zip(coeffs) {
            for i in 0..4 {
                for k in 0..4 {
                    if !m[i][k].is_zero() {
                        comps[i].push_str(&format!(" + ({c})*({})*x{}", m[i][k], k + 1));
                    }
                }
            }
        }
        let texts: Vec<String> = comps.iter().map(|c| format!("0{c}")).collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let x = map(4, &refs);
        let r = classify_linearization(&x, &[ClassSpan::ham_steady_state(&p4), span]).unwrap();
        assert_eq!(r.class, Some(NondegeneracyClass::HamHopf));
        assert!(r.hypotheses.values().all(|&b| b));
        assert!(r.transversal);
    }
}
