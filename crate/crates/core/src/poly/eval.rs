use super::{rational_to_f64, PolyMap, Polynomial};

/// Floating-point snapshot of a polynomial for repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    nvars: usize,
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let factors = m
                    .exponents()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i, e as i32))
                    .collect();
                (rational_to_f64(c), factors)
            })
            .collect();
        CompiledPoly {
            nvars: p.nvars(),
            terms,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        let mut total = 0.0;
        for (c, factors) in &self.terms {
            let mut t = *c;
            for &(i, e) in factors {
                t *= if e == 1 { x[i] } else { x[i].powi(e) };
            }
            total += t;
        }
        total
    }
}

#[derive(Clone, Debug)]
pub struct CompiledMap {
    nvars: usize,
    components: Vec<CompiledPoly>,
}

impl CompiledMap {
    pub fn new(map: &PolyMap) -> Self {
        CompiledMap {
            nvars: map.nvars(),
            components: map.components().iter().map(CompiledPoly::new).collect(),
        }
    }

    pub fn from_polys(nvars: usize, polys: &[Polynomial]) -> Self {
        CompiledMap {
            nvars,
            components: polys.iter().map(CompiledPoly::new).collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(x);
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_evaluation() {
        let p = Polynomial::parse("x^3*y - 1/3*x*y + 2", &["x", "y"]).unwrap();
        let c = CompiledPoly::new(&p);
        for pt in [[2.0, 1.0], [-0.5, 3.0], [0.0, 0.0]] {
            assert!((c.eval(&pt) - p.evaluate(&pt).unwrap()).abs() < 1e-14);
        }
    }
}
