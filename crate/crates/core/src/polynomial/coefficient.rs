use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational coefficient.
pub type Rational = BigRational;

/// Coefficient ring for [`MultiPoly`](super::MultiPoly).
///
/// Two instances exist: [`Rational`] (exact, used for every constructed
/// harmonic) and `f64` (reached only through an explicit lowering, or for
/// rotated polynomials whose coefficients are irrational).
pub trait Coefficient:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Signed
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + 'static
{
    /// Is the coefficient exactly representable, i.e. no pruning tolerance applies?
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    /// `num / den`; `den` must be non-zero.
    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_rational(r: &Rational) -> Self;

    /// The exact value, when the coefficient type is exact.
    fn to_rational(&self) -> Option<Rational>;

    fn to_f64(&self) -> f64;

    /// Whether a coefficient is dropped from canonical form given the largest
    /// coefficient magnitude `scale` of the polynomial.
    fn negligible(&self, scale: f64) -> bool;
}

/// Relative pruning threshold for floating coefficients.
pub const FLOAT_PRUNE_REL: f64 = 1e-14;

impl Coefficient for Rational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }
}

impl Coefficient for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }

    fn to_rational(&self) -> Option<Rational> {
        None
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn negligible(&self, scale: f64) -> bool {
        *self == 0.0 || self.abs() <= FLOAT_PRUNE_REL * scale
    }
}

/// Nearest-ish `f64` for a big rational, robust to numerators and
/// denominators that individually overflow `f64`.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() && (v != 0.0 || r.is_zero()) {
            return v;
        }
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * ln_abs_rational(r).exp()
}

/// `ln |r|` computed without forming `r` as a float; `-inf` for zero.
pub fn ln_abs_rational(r: &Rational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_abs_bigint(r.numer()) - ln_abs_bigint(r.denom())
}

fn ln_abs_bigint(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    // keep the top 64 bits, account for the rest as a power of two
    let shift = bits - 64;
    let top = (v.abs() >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}
