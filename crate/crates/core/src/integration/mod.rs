//! Integration of polynomials over balls `B_r` and spheres `∂B_r`.
//!
//! The exact path reduces every polynomial to per-degree rational sums of
//! sphere moments; the Monte Carlo path exists as an independent oracle.

mod exact;
mod monte_carlo;

use serde::{Deserialize, Serialize};

pub use exact::{ball_monomial_integral, sphere_moment, sphere_monomial_integral};
pub use monte_carlo::{
    mc_ball_volume, mc_poly_ball, mc_poly_sphere, BallVolumeEstimator, StreamRng, HIT_OR_MISS_MAX_DIM, SHARD_SIZE,
};

use crate::error::{domain, Result};
use crate::geometry::SignedLog;
use crate::polynomial::{Coefficient, MultiPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte_carlo",
        })
    }
}

/// How an integral is evaluated. `samples` and `seed` are ignored by the exact method.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub method: Method,
    pub samples: u64,
    pub seed: u64,
    pub tolerance: f64,
}

impl QuadratureSpec {
    pub fn exact() -> Self {
        Self { method: Method::Exact, samples: 0, seed: 0, tolerance: 1e-12 }
    }

    pub fn monte_carlo(samples: u64, seed: u64) -> Self {
        Self { method: Method::MonteCarlo, samples, seed, tolerance: 3.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return domain("quadrature tolerance must be positive");
        }
        if self.method == Method::MonteCarlo && self.samples == 0 {
            return domain("Monte Carlo integration needs at least one sample");
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::exact()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    /// `ln |value|`, finite even where `value` underflows; `-inf` for 0.
    pub log_abs_value: f64,
    /// Zero for exact results.
    pub standard_error: f64,
    pub method: Method,
}

impl IntegralResult {
    pub(crate) fn exact(v: SignedLog) -> Self {
        Self { value: v.to_f64(), log_abs_value: v.ln_abs, standard_error: 0.0, method: Method::Exact }
    }

    pub(crate) fn zero_exact() -> Self {
        Self::exact(SignedLog::ZERO)
    }

    pub(crate) fn estimate(value: f64, standard_error: f64) -> Self {
        Self { value, log_abs_value: value.abs().ln(), standard_error, method: Method::MonteCarlo }
    }

    /// Multiply by a non-zero finite `factor`, keeping the log-magnitude exact.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            log_abs_value: self.log_abs_value + factor.abs().ln(),
            standard_error: self.standard_error * factor.abs(),
            method: self.method,
        }
    }

    /// `|self − reference| ≤ k σ`; for exact results, equality within `1e-12` relative.
    pub fn agrees_with(&self, reference: f64, k_sigma: f64) -> bool {
        let diff = (self.value - reference).abs();
        if self.standard_error > 0.0 {
            diff <= k_sigma * self.standard_error
        } else {
            diff <= 1e-12 * reference.abs().max(self.value.abs())
        }
    }
}

/// `∫_{B_r} p dx`.
pub fn integrate_poly_ball<C: Coefficient>(p: &MultiPoly<C>, r: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
    spec.validate()?;
    check_radius(r)?;
    match spec.method {
        Method::Exact => Ok(exact::poly_ball(p, r)),
        Method::MonteCarlo => mc_poly_ball(p, r, spec.samples, spec.seed),
    }
}

/// `∫_{∂B_r} p dΣ`.
pub fn integrate_poly_sphere<C: Coefficient>(
    p: &MultiPoly<C>,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    spec.validate()?;
    check_radius(r)?;
    match spec.method {
        Method::Exact => Ok(exact::poly_sphere(p, r)),
        Method::MonteCarlo => mc_poly_sphere(p, r, spec.samples, spec.seed),
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("radius {r} must be positive and finite"));
    }
    Ok(())
}
