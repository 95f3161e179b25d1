use super::coefficient::Coefficient;
use super::poly::MultiPoly;
use crate::error::{Error, Result};

/// A polynomial map `R^n -> R^m`, one [`MultiPoly`] per output component.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorPoly<C> {
    dimension: usize,
    components: Vec<MultiPoly<C>>,
}

impl<C: Coefficient> VectorPoly<C> {
    pub fn new(dimension: usize, components: Vec<MultiPoly<C>>) -> Result<Self> {
        if let Some(bad) = components.iter().find(|c| c.dimension() != dimension) {
            return Err(Error::Dimension { expected: dimension, got: bad.dimension() });
        }
        Ok(Self { dimension, components })
    }

    pub fn scalar(p: MultiPoly<C>) -> Self {
        Self { dimension: p.dimension(), components: vec![p] }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Codomain arity `m`.
    pub fn arity(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[MultiPoly<C>] {
        &self.components
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(MultiPoly::is_constant)
    }

    pub fn is_harmonic(&self) -> bool {
        self.components.iter().all(MultiPoly::is_harmonic)
    }

    /// Common total degree if every component is homogeneous of the same
    /// degree (zero components are ignored); `None` otherwise.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degree = None;
        for c in self.components.iter().filter(|c| !c.is_zero()) {
            let d = c.homogeneous_degree()?;
            match degree {
                None => degree = Some(d),
                Some(prev) if prev != d => return None,
                _ => {}
            }
        }
        degree
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.evaluate(point)).collect()
    }

    pub fn scale(&self, s: &C) -> Self {
        Self { dimension: self.dimension, components: self.components.iter().map(|c| c.scale(s)).collect() }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.arity() != other.arity() {
            return Err(Error::Dimension { expected: self.arity(), got: other.arity() });
        }
        let components =
            self.components.iter().zip(&other.components).map(|(a, b)| a.checked_add(b)).collect::<Result<_>>()?;
        Ok(Self { dimension: self.dimension, components })
    }

    /// `|∇u|^2 = Σ_{i,j} (∂u^i/∂x_j)^2`.
    pub fn grad_norm_sq(&self) -> MultiPoly<C> {
        let mut acc = MultiPoly::zero(self.dimension);
        for comp in &self.components {
            for d in comp.gradient() {
                acc = &acc + &(&d * &d);
            }
        }
        acc
    }

    /// `Σ_i ⟨x, ∇u^i⟩^2`, which equals `r^2 |∂_ν u|^2` on the sphere of radius `r`.
    pub fn radial_derivative_sq(&self) -> MultiPoly<C> {
        let mut acc = MultiPoly::zero(self.dimension);
        for comp in &self.components {
            let e = comp.euler();
            acc = &acc + &(&e * &e);
        }
        acc
    }

    /// `Σ_i u^i ⟨x, ∇u^i⟩`, which equals `r Σ_i u^i (∂_ν u)^i` on the sphere of radius `r`.
    pub fn flux_pairing(&self) -> MultiPoly<C> {
        let mut acc = MultiPoly::zero(self.dimension);
        for comp in &self.components {
            acc = &acc + &(comp * &comp.euler());
        }
        acc
    }

    /// `|u|^2 = Σ_i (u^i)^2`.
    pub fn norm_sq(&self) -> MultiPoly<C> {
        let mut acc = MultiPoly::zero(self.dimension);
        for comp in &self.components {
            acc = &acc + &(comp * comp);
        }
        acc
    }

    pub fn map_components<D: Coefficient>(&self, f: impl Fn(&MultiPoly<C>) -> MultiPoly<D>) -> VectorPoly<D> {
        VectorPoly { dimension: self.dimension, components: self.components.iter().map(f).collect() }
    }
}
