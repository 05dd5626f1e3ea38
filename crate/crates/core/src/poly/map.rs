use super::{PolyError, Polynomial, Rational};

/// A list of polynomials in a common set of variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyMap {
    nvars: usize,
    components: Vec<Polynomial>,
}

impl PolyMap {
    pub fn new(nvars: usize, components: Vec<Polynomial>) -> Result<Self, PolyError> {
        for c in &components {
            if c.nvars() != nvars {
                return Err(PolyError::DimensionMismatch {
                    expected: nvars,
                    found: c.nvars(),
                });
            }
        }
        Ok(PolyMap { nvars, components })
    }

    /// Panics if a component has the wrong arity.
    pub fn from_components(nvars: usize, components: Vec<Polynomial>) -> Self {
        PolyMap::new(nvars, components).expect("component arity")
    }

    pub fn zero(nvars: usize, len: usize) -> Self {
        PolyMap {
            nvars,
            components: vec![Polynomial::zero(nvars); len],
        }
    }

    /// The identity map `x ↦ x`.
    pub fn identity(nvars: usize) -> Self {
        PolyMap {
            nvars,
            components: (0..nvars).map(|i| Polynomial::var(nvars, i)).collect(),
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

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Polynomial {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<Polynomial> {
        self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<Vec<f64>, PolyError> {
        self.components.iter().map(|c| c.evaluate(point)).collect()
    }

    pub fn evaluate_exact(&self, point: &[Rational]) -> Result<Vec<Rational>, PolyError> {
        self.components.iter().map(|c| c.evaluate_exact(point)).collect()
    }

    pub fn compose(&self, subs: &PolyMap) -> Result<PolyMap, PolyError> {
        Ok(PolyMap {
            nvars: subs.nvars(),
            components: self
                .components
                .iter()
                .map(|c| c.compose(subs))
                .collect::<Result<_, _>>()?,
        })
    }

    /// Euclidean pairing `Σ_k self_k · other_k`.
    pub fn dot(&self, other: &PolyMap) -> Result<Polynomial, PolyError> {
        if self.len() != other.len() {
            return Err(PolyError::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        if self.nvars != other.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        let mut acc = Polynomial::zero(self.nvars);
        for (a, b) in self.components.iter().zip(&other.components) {
            acc = &acc + &(a * b);
        }
        Ok(acc)
    }

    /// Rows are the gradients of the components.
    pub fn jacobian(&self) -> Vec<PolyMap> {
        self.components.iter().map(Polynomial::gradient).collect()
    }

    /// Partial derivatives of every component with respect to `var`.
    pub fn differentiate(&self, var: usize) -> Result<PolyMap, PolyError> {
        Ok(PolyMap {
            nvars: self.nvars,
            components: self
                .components
                .iter()
                .map(|c| c.differentiate(var))
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn scale(&self, c: &Rational) -> PolyMap {
        PolyMap {
            nvars: self.nvars,
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn scale_by(&self, p: &Polynomial) -> PolyMap {
        PolyMap {
            nvars: self.nvars,
            components: self.components.iter().map(|c| c * p).collect(),
        }
    }

    pub fn add(&self, other: &PolyMap) -> PolyMap {
        assert_eq!(self.len(), other.len());
        PolyMap {
            nvars: self.nvars,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &PolyMap) -> PolyMap {
        assert_eq!(self.len(), other.len());
        PolyMap {
            nvars: self.nvars,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn remap(&self, new_nvars: usize, map: &[usize]) -> PolyMap {
        PolyMap {
            nvars: new_nvars,
            components: self.components.iter().map(|c| c.remap(new_nvars, map)).collect(),
        }
    }

    pub fn extend_vars(&self, extra: usize) -> PolyMap {
        PolyMap {
            nvars: self.nvars + extra,
            components: self.components.iter().map(|c| c.extend_vars(extra)).collect(),
        }
    }

    pub fn degree(&self) -> Option<u32> {
        self.components.iter().filter_map(Polynomial::degree).max()
    }

    pub fn to_text(&self, names: &[impl AsRef<str>]) -> Vec<String> {
        self.components.iter().map(|c| c.to_text(names)).collect()
    }
}

/// Canonical coordinate pairing: a list of `(position, momentum)` index pairs
/// that partitions `0..dim`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pairing {
    dim: usize,
    pairs: Vec<(usize, usize)>,
}

impl Pairing {
    pub fn new(dim: usize, pairs: Vec<(usize, usize)>) -> Result<Self, PolyError> {
        if dim % 2 != 0 {
            return Err(PolyError::OddDimension(dim));
        }
        if pairs.len() * 2 != dim {
            return Err(PolyError::Pairing(format!(
                "{} pairs cannot partition {} coordinates",
                pairs.len(),
                dim
            )));
        }
        let mut seen = vec![false; dim];
        for &(q, p) in &pairs {
            for i in [q, p] {
                if i >= dim {
                    return Err(PolyError::Pairing(format!("index {i} out of range")));
                }
                if seen[i] {
                    return Err(PolyError::Pairing(format!("index {i} used twice")));
                }
                seen[i] = true;
            }
        }
        Ok(Pairing { dim, pairs })
    }

    /// Pairs `(0,1), (2,3), …`.
    pub fn standard(dim: usize) -> Result<Self, PolyError> {
        Pairing::new(dim, (0..dim / 2).map(|a| (2 * a, 2 * a + 1)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Row-major matrix 𝕁 with `X_H = 𝕁 ∇H`, i.e. `q̇ = ∂H/∂p`, `ṗ = −∂H/∂q`.
    pub fn poisson_tensor(&self) -> Vec<Vec<i64>> {
        let mut j = vec![vec![0i64; self.dim]; self.dim];
        for &(q, p) in &self.pairs {
            j[q][p] = 1;
            j[p][q] = -1;
        }
        j
    }

    /// Hamiltonian vector field of `h` (same arity as the pairing, possibly
    /// with trailing parameter variables).
    pub fn hamiltonian_field(&self, h: &Polynomial) -> PolyMap {
        let n = h.nvars();
        let mut comps = vec![Polynomial::zero(n); self.dim];
        for &(q, p) in &self.pairs {
            comps[q] = h.d(p);
            comps[p] = -&h.d(q);
        }
        PolyMap::from_components(n, comps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_validation() {
        assert!(matches!(Pairing::new(3, vec![(0, 1)]), Err(PolyError::OddDimension(3))));
        assert!(Pairing::new(4, vec![(0, 1), (1, 2)]).is_err());
        assert!(Pairing::new(4, vec![(0, 1)]).is_err());
        assert!(Pairing::new(2, vec![(0, 5)]).is_err());
        let p = Pairing::new(4, vec![(0, 2), (1, 3)]).unwrap();
        assert_eq!(p.poisson_tensor()[0][2], 1);
    }

    #[test]
    fn harmonic_oscillator_field() {
        let pr = Pairing::standard(2).unwrap();
        let h = Polynomial::parse("1/2*q^2 + 1/2*p^2", &["q", "p"]).unwrap();
        let x = pr.hamiltonian_field(&h);
        assert_eq!(x.to_text(&["q", "p"]), vec!["1 * p".to_string(), "-1 * q".to_string()]);
    }
}
