use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use super::coefficient::{Coefficient, Rational};
use super::multi_index::MultiIndex;
use crate::error::{Error, Result};

/// Coefficient tolerance used by [`MultiPoly::is_harmonic`] for floating polynomials.
pub const HARMONIC_TOL: f64 = 1e-12;

/// Sparse polynomial in `dimension` variables.
///
/// Terms are kept in canonical form: a graded-lex ordered map with no
/// negligible coefficients (exactly zero for rationals, below
/// [`FLOAT_PRUNE_REL`](super::coefficient::FLOAT_PRUNE_REL) of the largest
/// coefficient for floats). Two canonical polynomials are equal iff their
/// term maps are equal.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly<C> {
    dimension: usize,
    terms: BTreeMap<MultiIndex, C>,
}

pub type ExactPoly = MultiPoly<Rational>;
pub type FloatPoly = MultiPoly<f64>;

impl<C: Coefficient> MultiPoly<C> {
    pub fn zero(dimension: usize) -> Self {
        Self { dimension, terms: BTreeMap::new() }
    }

    pub fn constant(dimension: usize, c: C) -> Self {
        Self::from_terms(dimension, [(MultiIndex::zeros(dimension), c)]).expect("zero index has the right length")
    }

    pub fn one(dimension: usize) -> Self {
        Self::constant(dimension, C::one())
    }

    /// `x_{axis+1}`.
    pub fn variable(dimension: usize, axis: usize) -> Result<Self> {
        if axis >= dimension {
            return Err(Error::Axis { axis, dimension });
        }
        Self::from_terms(dimension, [(MultiIndex::unit(dimension, axis), C::one())])
    }

    pub fn monomial(exponents: Vec<u32>, c: C) -> Self {
        let dimension = exponents.len();
        Self::from_terms(dimension, [(MultiIndex::new(exponents), c)]).expect("length matches by construction")
    }

    /// `|x|^2 = x1^2 + ... + xn^2`.
    pub fn radius_sq(dimension: usize) -> Self {
        let terms = (0..dimension).map(|i| {
            let mut e = vec![0; dimension];
            e[i] = 2;
            (MultiIndex::new(e), C::one())
        });
        Self::from_terms(dimension, terms).expect("length matches by construction")
    }

    /// Build from arbitrary (possibly repeated) terms; duplicates are summed.
    pub fn from_terms<I>(dimension: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, C)>,
    {
        let mut map: BTreeMap<MultiIndex, C> = BTreeMap::new();
        for (idx, c) in terms {
            if idx.len() != dimension {
                return Err(Error::Dimension { expected: dimension, got: idx.len() });
            }
            accumulate(&mut map, idx, c);
        }
        Ok(Self::canonical(dimension, map))
    }

    fn canonical(dimension: usize, mut terms: BTreeMap<MultiIndex, C>) -> Self {
        let scale = if C::EXACT { 0.0 } else { terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max) };
        terms.retain(|_, c| !c.negligible(scale));
        Self { dimension, terms }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, &C)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn coefficient(&self, idx: &MultiIndex) -> C {
        self.terms.get(idx).cloned().unwrap_or_else(C::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(MultiIndex::degree)
    }

    /// `Some(k)` when every term has total degree `k`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let first = self.terms.keys().next()?.degree();
        let last = self.terms.keys().next_back()?.degree();
        (first == last).then_some(first)
    }

    pub fn is_constant(&self) -> bool {
        self.degree().is_none_or(|d| d == 0)
    }

    /// The degree-`d` homogeneous component.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        let terms = self.terms.iter().filter(|(k, _)| k.degree() == d).map(|(k, c)| (k.clone(), c.clone())).collect();
        Self { dimension: self.dimension, terms }
    }

    pub fn scale(&self, s: &C) -> Self {
        let map = self.terms.iter().map(|(k, c)| (k.clone(), c.clone() * s.clone())).collect();
        Self::canonical(self.dimension, map)
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> MultiPoly<D> {
        let map = self.terms.iter().map(|(k, c)| (k.clone(), f(c))).collect();
        MultiPoly::canonical(self.dimension, map)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_dimension(other)?;
        let mut map = self.terms.clone();
        for (k, c) in &other.terms {
            accumulate(&mut map, k.clone(), c.clone());
        }
        Ok(Self::canonical(self.dimension, map))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_dimension(other)?;
        let mut map = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                accumulate(&mut map, ka.mul(kb), ca.clone() * cb.clone());
            }
        }
        Ok(Self::canonical(self.dimension, map))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.dimension);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    fn same_dimension(&self, other: &Self) -> Result<()> {
        if self.dimension != other.dimension {
            return Err(Error::Dimension { expected: self.dimension, got: other.dimension });
        }
        Ok(())
    }

    /// Exact symbolic `∂p/∂x_{axis+1}`.
    pub fn partial_derivative(&self, axis: usize) -> Result<Self> {
        if axis >= self.dimension {
            return Err(Error::Axis { axis, dimension: self.dimension });
        }
        let terms = self.terms.iter().filter_map(|(k, c)| {
            let e = k.get(axis);
            k.lowered(axis).map(|lower| (lower, c.clone() * C::from_i64(e as i64)))
        });
        Self::from_terms(self.dimension, terms)
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.dimension).map(|j| self.partial_derivative(j).expect("axis in range")).collect()
    }

    /// `Δp = Σ_j ∂²p/∂x_j²`, computed termwise.
    pub fn laplacian(&self) -> Self {
        let mut map = BTreeMap::new();
        for (k, c) in &self.terms {
            for axis in 0..self.dimension {
                let e = k.get(axis);
                if e >= 2 {
                    let lower = k.lowered(axis).and_then(|l| l.lowered(axis)).expect("e >= 2");
                    accumulate(&mut map, lower, c.clone() * C::from_i64((e * (e - 1)) as i64));
                }
            }
        }
        Self::canonical(self.dimension, map)
    }

    /// `Δp == 0`: exact for rationals, every coefficient below
    /// [`HARMONIC_TOL`] for floats.
    pub fn is_harmonic(&self) -> bool {
        let lap = self.laplacian();
        if C::EXACT {
            lap.is_zero()
        } else {
            lap.terms.values().all(|c| c.to_f64().abs() < HARMONIC_TOL)
        }
    }

    /// Euler operator `⟨x, ∇p⟩`: every term of degree `d` is multiplied by `d`.
    pub fn euler(&self) -> Self {
        let map = self.terms.iter().map(|(k, c)| (k.clone(), c.clone() * C::from_i64(k.degree() as i64))).collect();
        Self::canonical(self.dimension, map)
    }

    /// Evaluate at `point`. Terms are accumulated in ascending graded-lex
    /// order, so the result is a deterministic function of the polynomial
    /// and the point.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.dimension {
            return Err(Error::Dimension { expected: self.dimension, got: point.len() });
        }
        Ok(self.evaluate_unchecked(point))
    }

    pub(crate) fn evaluate_unchecked(&self, point: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (k, c) in &self.terms {
            let mut m = c.to_f64();
            for (x, &e) in point.iter().zip(k.exponents()) {
                if e != 0 {
                    m *= x.powi(e as i32);
                }
            }
            acc += m;
        }
        acc
    }

    /// Composition `p(q_1(x), ..., q_n(x))`. Every `q_i` must share one
    /// dimension, which becomes the dimension of the result.
    pub fn substitute(&self, replacements: &[Self]) -> Result<Self> {
        if replacements.len() != self.dimension {
            return Err(Error::Dimension { expected: self.dimension, got: replacements.len() });
        }
        let out_dim = replacements.first().map_or(0, MultiPoly::dimension);
        if let Some(bad) = replacements.iter().find(|q| q.dimension != out_dim) {
            return Err(Error::Dimension { expected: out_dim, got: bad.dimension });
        }
        let max_exp = self.terms.keys().flat_map(|k| k.exponents().iter().copied()).max().unwrap_or(0);
        // powers[i][e] = q_i^e
        let powers: Vec<Vec<Self>> = replacements
            .iter()
            .map(|q| {
                let mut v = vec![Self::one(out_dim)];
                for e in 1..=max_exp as usize {
                    let next = &v[e - 1] * q;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = Self::zero(out_dim);
        for (k, c) in &self.terms {
            let mut term = Self::constant(out_dim, c.clone());
            for (i, &e) in k.exponents().iter().enumerate() {
                if e != 0 {
                    term = &term * &powers[i][e as usize];
                }
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// `p(Mx)` for a square matrix given by rows.
    pub fn compose_linear(&self, matrix: &[Vec<C>]) -> Result<Self> {
        let n = self.dimension;
        if matrix.len() != n {
            return Err(Error::Dimension { expected: n, got: matrix.len() });
        }
        let rows = matrix
            .iter()
            .map(|row| {
                if row.len() != n {
                    return Err(Error::Dimension { expected: n, got: row.len() });
                }
                Self::from_terms(n, row.iter().enumerate().map(|(j, c)| (MultiIndex::unit(n, j), c.clone())))
            })
            .collect::<Result<Vec<_>>>()?;
        self.substitute(&rows)
    }

    /// Largest coefficient magnitude (0 for the zero polynomial).
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }
}

impl MultiPoly<Rational> {
    /// Explicit lowering to floating coefficients.
    pub fn lower(&self) -> FloatPoly {
        self.map_coefficients(|c| c.to_f64())
    }
}

impl MultiPoly<f64> {
    /// Maximum coefficient difference, the metric used by tolerance-based
    /// equality of floating polynomials.
    pub fn max_coefficient_distance(&self, other: &Self) -> f64 {
        let diff = self - other;
        diff.max_abs_coefficient()
    }
}

fn accumulate<C: Coefficient>(map: &mut BTreeMap<MultiIndex, C>, k: MultiIndex, c: C) {
    use std::collections::btree_map::Entry;
    match map.entry(k) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            let sum = o.get().clone() + c;
            if sum.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

// Operator impls panic on dimension mismatch; use the `checked_*` methods
// when dimensions come from untrusted input.

impl<C: Coefficient> Add for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn add(self, rhs: Self) -> MultiPoly<C> {
        self.checked_add(rhs).expect("polynomial dimensions differ")
    }
}

impl<C: Coefficient> Sub for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn sub(self, rhs: Self) -> MultiPoly<C> {
        self.checked_add(&-rhs).expect("polynomial dimensions differ")
    }
}

impl<C: Coefficient> Mul for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn mul(self, rhs: Self) -> MultiPoly<C> {
        self.checked_mul(rhs).expect("polynomial dimensions differ")
    }
}

impl<C: Coefficient> Neg for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn neg(self) -> MultiPoly<C> {
        let terms = self.terms.iter().map(|(k, c)| (k.clone(), -c.clone())).collect();
        MultiPoly { dimension: self.dimension, terms }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl<C: Coefficient> $tr for MultiPoly<C> {
            type Output = MultiPoly<C>;
            fn $m(self, rhs: Self) -> MultiPoly<C> {
                (&self).$m(&rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);
