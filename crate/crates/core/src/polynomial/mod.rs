//! Exact sparse multivariate polynomials and polynomial maps.

mod coefficient;
mod multi_index;
mod poly;
pub mod text;
mod vector;

pub use coefficient::{ln_abs_rational, rational_to_f64, Coefficient, Rational, FLOAT_PRUNE_REL};
pub use multi_index::MultiIndex;
pub use poly::{ExactPoly, FloatPoly, MultiPoly, HARMONIC_TOL};
pub use vector::VectorPoly;

pub type ExactMap = VectorPoly<Rational>;
pub type FloatMap = VectorPoly<f64>;

/// Product of Givens rotations acting on consecutive coordinate pairs,
/// returned as matrix rows. Deterministic in `angles`; pair `(i, i+1)`
/// (cyclically) uses `angles[i % angles.len()]`.
pub fn givens_rotation(n: usize, angles: &[f64]) -> Vec<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    if n < 2 || angles.is_empty() {
        return m;
    }
    for (step, &theta) in angles.iter().enumerate() {
        let i = step % n;
        let j = (i + 1) % n;
        let (s, c) = theta.sin_cos();
        for row in m.iter_mut() {
            let (a, b) = (row[i], row[j]);
            row[i] = c * a - s * b;
            row[j] = s * a + c * b;
        }
    }
    m
}
