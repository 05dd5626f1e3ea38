//! Fixed-step RK4 integration and the cross-checks built on it.

use thiserror::Error;

use crate::invariants::InvariantBasis;
use crate::poly::{CompiledMap, CompiledPoly, PolyMap, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulateError {
    #[error("step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("non-finite state at t = {0}")]
    BlowUp(f64),
    #[error("time grids differ")]
    GridMismatch,
    #[error("expected {expected} state components, found {found}")]
    Arity { expected: usize, found: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub dt: f64,
    pub method: &'static str,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectories hold the initial state")
    }
}

/// A polynomial field in `(x, params)` with the parameters frozen.
pub struct PolyField {
    map: CompiledMap,
    params: Vec<f64>,
    buf_len: usize,
}

impl PolyField {
    pub fn new(field: &PolyMap, params: &[f64]) -> Self {
        PolyField {
            map: CompiledMap::new(field),
            params: params.to_vec(),
            buf_len: field.nvars(),
        }
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let mut full = Vec::with_capacity(self.buf_len);
        full.extend_from_slice(x);
        full.extend_from_slice(&self.params);
        self.map.eval_into(&full, out);
    }
}

/// Classical RK4 with `round(t_end / dt)` steps, recording every `stride`-th
/// state (and always the last one).
pub fn integrate<F>(field: F, x0: &[f64], t_end: f64, dt: f64, stride: usize) -> Result<Trajectory, SimulateError>
where
    F: Fn(&[f64], &mut [f64]),
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SimulateError::BadStep(dt));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(SimulateError::BadHorizon(t_end));
    }
    let stride = stride.max(1);
    let steps = (t_end / dt).round().max(1.0) as usize;
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut times = vec![0.0];
    let mut states = vec![x.clone()];
    for s in 1..=steps {
        field(&x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        field(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        field(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + dt * k3[i];
        }
        field(&tmp, &mut k4);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = s as f64 * dt;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(SimulateError::BlowUp(t));
        }
        if s % stride == 0 || s == steps {
            times.push(t);
            states.push(x.clone());
        }
    }
    Ok(Trajectory {
        times,
        states,
        dt,
        method: "rk4",
    })
}

/// Integrates a polynomial field in `(x, params)`.
pub fn integrate_poly(
    field: &PolyMap,
    params: &[f64],
    x0: &[f64],
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory, SimulateError> {
    if x0.len() + params.len() != field.nvars() || field.len() != x0.len() {
        return Err(SimulateError::Arity {
            expected: field.len(),
            found: x0.len(),
        });
    }
    let f = PolyField::new(field, params);
    integrate(|x, out| f.eval_into(x, out), x0, t_end, dt, stride)
}

/// `max_t |π(full(t)) − reduced(t)|` (Euclidean norm).
pub fn commutation_error(full: &Trajectory, reduced: &Trajectory, basis: &InvariantBasis) -> Result<f64, SimulateError> {
    if full.times.len() != reduced.times.len()
        || full
            .times
            .iter()
            .zip(&reduced.times)
            .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
    {
        return Err(SimulateError::GridMismatch);
    }
    let mut err = 0.0f64;
    for (v, th) in full.states.iter().zip(&reduced.states) {
        if v.len() != basis.nvars() || th.len() != basis.len() {
            return Err(SimulateError::Arity {
                expected: basis.len(),
                found: th.len(),
            });
        }
        let pi = basis.hilbert_map(v);
        let d: f64 = pi.iter().zip(th).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        err = err.max(d);
    }
    Ok(err)
}

/// `max_t |Q(x(t)) − Q(x(0))|`.
pub fn conservation_drift(traj: &Trajectory, quantity: &Polynomial) -> Result<f64, SimulateError> {
    let q = CompiledPoly::new(quantity);
    let first = traj.states.first().map(Vec::len).unwrap_or(0);
    if first != quantity.nvars() {
        return Err(SimulateError::Arity {
            expected: quantity.nvars(),
            found: first,
        });
    }
    let q0 = q.eval(&traj.states[0]);
    Ok(traj
        .states
        .iter()
        .map(|x| (q.eval(x) - q0).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_decay() {
        let t = integrate(|x, o| o[0] = -x[0], &[1.0], 1.0, 1e-3, 1).unwrap();
        assert!((t.last()[0] - (-1.0f64).exp()).abs() < 1e-8);
        assert_eq!(t.times.len(), 1001);
        let c = integrate(|_, o| o[0] = 0.0, &[3.0], 1.0, 1e-2, 10).unwrap();
        assert!(c.states.iter().all(|s| s[0] == 3.0));
    }

    #[test]
    fn fourth_order() {
        let err = |dt: f64| {
            let t = integrate(|x, o| o[0] = -x[0], &[1.0], 1.0, dt, 1000).unwrap();
            (t.last()[0] - (-1.0f64).exp()).abs()
        };
        let e = [err(1e-2), err(5e-3), err(2.5e-3)];
        for w in e.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 16.0 / 4.0 && ratio < 16.0 * 4.0, "ratio {ratio}");
        }
    }

    #[test]
    fn oscillator_energy() {
        let names = ["q", "p"];
        let field = PolyMap::from_components(
            2,
            vec![
                Polynomial::parse("p", &names).unwrap(),
                Polynomial::parse("-q", &names).unwrap(),
            ],
        );
        let t = integrate_poly(&field, &[], &[1.0, 0.0], 10.0, 1e-3, 1).unwrap();
        let h = Polynomial::parse("1/2*q^2 + 1/2*p^2", &names).unwrap();
        assert!(conservation_drift(&t, &h).unwrap() <= 1e-8);
        let one = Polynomial::parse("3", &names).unwrap();
        assert_eq!(conservation_drift(&t, &one).unwrap(), 0.0);
    }

    #[test]
    fn blow_up_is_reported() {
        let r = integrate(|x, o| o[0] = x[0] * x[0], &[1.0], 2.0, 1e-2, 1);
        assert!(matches!(r, Err(SimulateError::BlowUp(_))));
        assert!(matches!(integrate(|_, _| {}, &[1.0], 1.0, 0.0, 1), Err(SimulateError::BadStep(_))));
    }
}
