use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::IntegralResult;
use crate::error::{domain, Error, Result};
use crate::geometry::{ln_gamma, ln_sphere_area, SignedLog};
use crate::polynomial::{ln_abs_rational, Coefficient, MultiIndex, MultiPoly, Rational};

/// `∫_{∂B_r} x^α dΣ` from the closed form
/// `2 Π Γ(β_i) / Γ(Σ β_i) · r^{n−1+|α|}` with `β_i = (α_i + 1)/2`,
/// evaluated in log-space. Zero when any exponent is odd.
pub fn sphere_monomial_integral(n: usize, alpha: &MultiIndex, r: f64) -> Result<IntegralResult> {
    check(n, alpha, r)?;
    if !alpha.is_even() {
        return Ok(IntegralResult::zero_exact());
    }
    let betas = alpha.exponents().iter().map(|&a| (a as f64 + 1.0) / 2.0);
    let ln_num: f64 = betas.clone().map(ln_gamma).sum();
    let ln_den = ln_gamma(betas.sum());
    let ln = std::f64::consts::LN_2 + ln_num - ln_den + (n as f64 - 1.0 + alpha.degree() as f64) * r.ln();
    Ok(IntegralResult::exact(SignedLog::from_ln(1, ln)))
}

/// `∫_{B_r} x^α dx = ∫_{S^{n−1}} ξ^α dΣ · r^{n+|α|} / (n + |α|)`.
pub fn ball_monomial_integral(n: usize, alpha: &MultiIndex, r: f64) -> Result<IntegralResult> {
    let s = sphere_monomial_integral(n, alpha, 1.0)?;
    if s.value == 0.0 && s.log_abs_value == f64::NEG_INFINITY {
        return Ok(s);
    }
    let k = (n as u32 + alpha.degree()) as f64;
    let ln = s.log_abs_value + k * r.ln() - k.ln();
    Ok(IntegralResult::exact(SignedLog::from_ln(1, ln)))
}

fn check(n: usize, alpha: &MultiIndex, r: f64) -> Result<()> {
    if alpha.len() != n {
        return Err(Error::Dimension { expected: n, got: alpha.len() });
    }
    if n == 0 {
        return domain("dimension must be positive");
    }
    if !(r > 0.0) {
        return domain(format!("radius {r} must be positive"));
    }
    Ok(())
}

/// Mean of `ξ^α` over the unit sphere `S^{n−1}` as an exact rational:
/// `Π (α_i − 1)!! / Π_{j < |α|/2} (n + 2j)`, or zero when some `α_i` is odd.
pub fn sphere_moment(alpha: &MultiIndex) -> Rational {
    if !alpha.is_even() {
        return Rational::zero();
    }
    let n = alpha.len() as u64;
    let mut num = BigInt::one();
    for &a in alpha.exponents() {
        let mut k = 1u64;
        while k < a as u64 {
            num *= k;
            k += 2;
        }
    }
    let mut den = BigInt::one();
    for j in 0..(alpha.degree() as u64 / 2) {
        den *= n + 2 * j;
    }
    Rational::new(num, den)
}

/// Per-degree sums `q_d = Σ_{|α| = d} c_α · mean(ξ^α)`, kept exact when the
/// coefficients are.
fn degree_moments<C: Coefficient>(p: &MultiPoly<C>) -> BTreeMap<u32, SignedLog> {
    let mut exact: BTreeMap<u32, Rational> = BTreeMap::new();
    let mut float: BTreeMap<u32, f64> = BTreeMap::new();
    for (idx, c) in p.terms().filter(|(idx, _)| idx.is_even()) {
        let m = sphere_moment(idx);
        match c.to_rational() {
            Some(q) => *exact.entry(idx.degree()).or_insert_with(Rational::zero) += q * m,
            None => *float.entry(idx.degree()).or_insert(0.0) += c.to_f64() * crate::polynomial::rational_to_f64(&m),
        }
    }
    let mut out: BTreeMap<u32, SignedLog> = BTreeMap::new();
    for (d, q) in exact {
        let sign = if q.is_zero() {
            0
        } else if q < Rational::zero() {
            -1
        } else {
            1
        };
        out.insert(d, SignedLog::from_ln(sign, ln_abs_rational(&q)));
    }
    for (d, v) in float {
        let s = SignedLog::from_f64(v);
        let e = out.entry(d).or_insert(SignedLog::ZERO);
        *e = *e + s;
    }
    out
}

pub(super) fn poly_sphere<C: Coefficient>(p: &MultiPoly<C>, r: f64) -> IntegralResult {
    let n = p.dimension();
    if p.is_zero() || n == 0 {
        return IntegralResult::zero_exact();
    }
    let ln_area = ln_sphere_area(n, 1.0);
    let terms: Vec<SignedLog> = degree_moments(p)
        .into_iter()
        .map(|(d, q)| q * SignedLog::from_ln(1, ln_area + (n as f64 - 1.0 + d as f64) * r.ln()))
        .collect();
    IntegralResult::exact(SignedLog::sum(&terms))
}

pub(super) fn poly_ball<C: Coefficient>(p: &MultiPoly<C>, r: f64) -> IntegralResult {
    let n = p.dimension();
    if p.is_zero() || n == 0 {
        return IntegralResult::zero_exact();
    }
    let ln_area = ln_sphere_area(n, 1.0);
    let terms: Vec<SignedLog> = degree_moments(p)
        .into_iter()
        .map(|(d, q)| {
            let k = n as f64 + d as f64;
            q * SignedLog::from_ln(1, ln_area + k * r.ln() - k.ln())
        })
        .collect();
    IntegralResult::exact(SignedLog::sum(&terms))
}
