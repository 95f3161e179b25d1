//! Dirichlet energy `E(r)`, surface energies on `∂B_r`, energy profiles,
//! decay-exponent fits and boundary concentration.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::harmonics::{HarmonicMap, MapKind};
use crate::integration::{integrate_poly_ball, integrate_poly_sphere, IntegralResult, Method, QuadratureSpec};
use crate::polynomial::{ExactPoly, Rational};

/// Energy integrands of one map, built once and reused across radii.
#[derive(Clone, Debug)]
pub struct MapEnergetics<'a> {
    map: &'a HarmonicMap,
    grad_sq: ExactPoly,
    radial_sq: ExactPoly,
    flux: ExactPoly,
}

impl<'a> MapEnergetics<'a> {
    pub fn new(map: &'a HarmonicMap) -> Self {
        let body = map.body();
        Self { map, grad_sq: body.grad_norm_sq(), radial_sq: body.radial_derivative_sq(), flux: body.flux_pairing() }
    }

    pub fn map(&self) -> &HarmonicMap {
        self.map
    }

    pub fn dimension(&self) -> usize {
        self.map.dimension()
    }

    /// `E(r) = ∫_{B_r} |∇u|^2`.
    pub fn dirichlet(&self, r: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
        check_ball_radius(r)?;
        integrate_poly_ball(&self.grad_sq, r, spec)
    }

    /// `∫_{∂B_r} |∇u|^2 dΣ`.
    pub fn surface_total(&self, r: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
        integrate_poly_sphere(&self.grad_sq, r, spec)
    }

    /// `∫_{∂B_r} |∂_ν u|^2 dΣ`.
    pub fn normal(&self, r: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
        Ok(integrate_poly_sphere(&self.radial_sq, r, spec)?.scaled(1.0 / (r * r)))
    }

    /// `H(r) = ∫_{∂B_r} |∇_tan u|^2 dΣ`.
    ///
    /// The difference `r^2 |∇u|^2 − Σ ⟨x,∇u^i⟩^2` is formed exactly before
    /// integrating, so no cancellation happens in floating point.
    pub fn surface_dirichlet(&self, r: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
        if !(r > 0.0 && r.is_finite()) {
            return domain(format!("radius {r} must be positive and finite"));
        }
        let r_q = Rational::from_float(r).expect("finite radius");
        let tangential = &self.grad_sq.scale(&(&r_q * &r_q)) - &self.radial_sq;
        Ok(integrate_poly_sphere(&tangential, r, spec)?.scaled(1.0 / (r * r)))
    }

    /// `Σ_i ∫_{∂B_r} u^i (∂_ν u)^i dΣ`.
    pub fn flux(&self, r: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
        Ok(integrate_poly_sphere(&self.flux, r, spec)?.scaled(1.0 / r))
    }
}

fn check_ball_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r <= 1.0) {
        return domain(format!("radius {r} outside ]0, 1]"));
    }
    Ok(())
}

pub fn dirichlet_energy(u: &HarmonicMap, r: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
    MapEnergetics::new(u).dirichlet(r, spec)
}

pub fn surface_energy_total(u: &HarmonicMap, r: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
    MapEnergetics::new(u).surface_total(r, spec)
}

pub fn normal_energy(u: &HarmonicMap, r: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
    MapEnergetics::new(u).normal(r, spec)
}

pub fn surface_dirichlet(u: &HarmonicMap, r: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
    MapEnergetics::new(u).surface_dirichlet(r, spec)
}

/// `{2^{-levels}, …, 1/2, 1}`.
pub fn dyadic_radii(levels: u32) -> Vec<f64> {
    (0..=levels).rev().map(|j| 0.5f64.powi(j as i32)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergySample {
    pub r: f64,
    pub energy: f64,
    pub log_energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyProfile {
    pub dimension: usize,
    pub degree: Option<u32>,
    pub map: MapKind,
    pub method: Method,
    pub samples: Vec<EnergySample>,
}

/// `E(r)` on every radius of the grid, evaluated in parallel and kept in grid order.
pub fn energy_profile(u: &HarmonicMap, radii: &[f64], spec: &QuadratureSpec) -> Result<EnergyProfile> {
    if radii.is_empty() {
        return domain("energy profile needs at least one radius");
    }
    if radii.windows(2).any(|w| !(w[0] < w[1])) {
        return domain("radii must be strictly increasing");
    }
    let me = MapEnergetics::new(u);
    let samples = radii
        .par_iter()
        .map(|&r| {
            let e = me.dirichlet(r, spec)?;
            Ok(EnergySample { r, energy: e.value, log_energy: e.log_abs_value })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnergyProfile {
        dimension: u.dimension(),
        degree: u.degree(),
        map: u.kind().clone(),
        method: spec.method,
        samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub beta_hat: f64,
    pub c_hat: f64,
    /// Largest `|log E − (c + β log r)|` over the fitted samples.
    pub max_residual: f64,
    pub used: usize,
    /// Samples with `E = 0`, left out of the fit.
    pub excluded: usize,
}

/// Least-squares line through `(log r, log E)`.
pub fn fit_decay_exponent(profile: &EnergyProfile) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> =
        profile.samples.iter().filter(|s| s.energy > 0.0).map(|s| (s.r.ln(), s.log_energy)).collect();
    let excluded = profile.samples.len() - pts.len();
    if pts.is_empty() {
        return Err(Error::ZeroEnergy("every sample of the profile has zero energy".into()));
    }
    if pts.len() < 2 {
        return domain("decay fit needs at least two samples with positive energy");
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return domain("decay fit needs at least two distinct radii");
    }
    let beta_hat = sxy / sxx;
    let c_hat = my - beta_hat * mx;
    let max_residual = pts.iter().map(|p| (p.1 - c_hat - beta_hat * p.0).abs()).fold(0.0, f64::max);
    Ok(DecayFit { beta_hat, c_hat, max_residual, used: pts.len(), excluded })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayBoundReport {
    pub beta: f64,
    pub c: f64,
    pub holds: bool,
    /// Smallest `(C (r/R)^β E(R) − E(r)) / E(R)` over pairs `r < R`.
    pub worst_margin: f64,
    pub worst_r: f64,
    pub worst_big_r: f64,
}

/// Relative slack allowed for rounding when the bound is tight.
pub const DECAY_BOUND_SLACK: f64 = 1e-12;

/// Check `E(r) ≤ C (r/R)^β E(R)` for all grid pairs `r < R`.
pub fn verify_decay_bound(
    u: &HarmonicMap,
    beta: f64,
    c: f64,
    radii: &[f64],
    spec: &QuadratureSpec,
) -> Result<DecayBoundReport> {
    if !(beta > 0.0 && c > 0.0) {
        return domain("decay bound needs beta > 0 and C > 0");
    }
    let profile = energy_profile(u, radii, spec)?;
    let mut report = DecayBoundReport {
        beta,
        c,
        holds: true,
        worst_margin: f64::INFINITY,
        worst_r: f64::NAN,
        worst_big_r: f64::NAN,
    };
    let s = &profile.samples;
    for (j, big) in s.iter().enumerate() {
        for small in &s[..j] {
            let margin = if big.energy > 0.0 {
                c * (small.r / big.r).powf(beta) - (small.log_energy - big.log_energy).exp()
            } else {
                // E(R) = 0 forces E(r) = 0 by monotonicity
                0.0
            };
            if margin < report.worst_margin {
                report.worst_margin = margin;
                report.worst_r = small.r;
                report.worst_big_r = big.r;
            }
        }
    }
    if report.worst_margin.is_infinite() {
        report.worst_margin = 0.0;
    }
    report.holds = report.worst_margin >= -DECAY_BOUND_SLACK;
    Ok(report)
}

fn nonzero_log_energy(me: &MapEnergetics, r: f64, spec: &QuadratureSpec) -> Result<f64> {
    let e = me.dirichlet(r, spec)?;
    if e.value == 0.0 && e.log_abs_value == f64::NEG_INFINITY {
        return Err(Error::ZeroEnergy(format!("E({r}) = 0 for a constant map")));
    }
    Ok(e.log_abs_value)
}

/// `(E(1) − E(r)) / E(1)`, computed as `−expm1(ln E(r) − ln E(1))`.
pub fn concentration_fraction(u: &HarmonicMap, r: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return domain(format!("radius {r} outside ]0, 1["));
    }
    let me = MapEnergetics::new(u);
    let one = nonzero_log_energy(&me, 1.0, spec)?;
    let at_r = me.dirichlet(r, spec)?.log_abs_value;
    Ok(-(at_r - one).exp_m1())
}

/// `θ = E(R/2) / E(R)`.
pub fn half_radius_theta(u: &HarmonicMap, big_r: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_ball_radius(big_r)?;
    let me = MapEnergetics::new(u);
    let full = nonzero_log_energy(&me, big_r, spec)?;
    let half = me.dirichlet(big_r / 2.0, spec)?.log_abs_value;
    Ok((half - full).exp())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::geometry::{sphere_area, unit_ball_volume};
    use crate::harmonics::{identity_map, zonal_on_axis};
    use crate::polynomial::text::parse_exact;

    fn exact() -> QuadratureSpec {
        QuadratureSpec::exact()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn scalar(text: &str, n: usize) -> HarmonicMap {
        HarmonicMap::scalar(parse_exact(text, n).unwrap(), MapKind::Custom)
    }

    #[test]
    fn identity_energies() {
        for n in [1usize, 2, 3, 7, 20] {
            let u = identity_map(n).unwrap();
            let v = unit_ball_volume(n).volume;
            let nf = n as f64;
            for r in [0.3, 0.7, 1.0] {
                let e = dirichlet_energy(&u, r, &exact()).unwrap().value;
                assert!(rel(e, nf * v * r.powi(n as i32)) < 1e-12, "n={n} r={r}");
            }
            assert!(rel(surface_energy_total(&u, 1.0, &exact()).unwrap().value, nf * nf * v) < 1e-12);
            assert!(rel(normal_energy(&u, 1.0, &exact()).unwrap().value, nf * v) < 1e-12);
            if n > 1 {
                assert!(rel(surface_dirichlet(&u, 1.0, &exact()).unwrap().value, (nf - 1.0) * nf * v) < 1e-12);
            }
        }
    }

    #[test]
    fn product_map_on_disk() {
        let u = scalar("x1*x2", 2);
        assert!(rel(dirichlet_energy(&u, 1.0, &exact()).unwrap().value, PI / 2.0) < 1e-14);
        assert!(rel(surface_energy_total(&u, 1.0, &exact()).unwrap().value, 2.0 * PI) < 1e-14);
        let mc = dirichlet_energy(&u, 1.0, &QuadratureSpec::monte_carlo(400_000, 3)).unwrap();
        assert!(mc.agrees_with(PI / 2.0, 4.0), "{mc:?}");
    }

    #[test]
    fn tangential_energy_of_a_coordinate() {
        let u = scalar("x1", 3);
        let h = surface_dirichlet(&u, 1.0, &exact()).unwrap().value;
        assert!(rel(h, 8.0 * PI / 3.0) < 1e-14);
    }

    #[test]
    fn euler_relation_for_normal_energy() {
        let u = zonal_on_axis(4, 3, 1).unwrap();
        let h_sq = u.body().norm_sq();
        for r in [0.3, 0.7, 1.0] {
            let normal = normal_energy(&u, r, &exact()).unwrap().value;
            let want = 9.0 / (r * r) * integrate_poly_sphere(&h_sq, r, &exact()).unwrap().value;
            assert!(rel(normal, want) < 1e-12);
        }
    }

    #[test]
    fn constant_maps_have_no_energy() {
        let c = scalar("5", 3);
        for r in [0.5, 1.0] {
            assert_eq!(dirichlet_energy(&c, r, &exact()).unwrap().value, 0.0);
            assert_eq!(surface_energy_total(&c, r, &exact()).unwrap().value, 0.0);
            assert_eq!(normal_energy(&c, r, &exact()).unwrap().value, 0.0);
            assert_eq!(surface_dirichlet(&c, r, &exact()).unwrap().value, 0.0);
        }
        assert!(matches!(concentration_fraction(&c, 0.5, &exact()), Err(Error::ZeroEnergy(_))));
        assert!(matches!(half_radius_theta(&c, 1.0, &exact()), Err(Error::ZeroEnergy(_))));
        let prof = energy_profile(&c, &dyadic_radii(3), &exact()).unwrap();
        assert!(prof.samples.iter().all(|s| s.energy == 0.0));
        assert!(matches!(fit_decay_exponent(&prof), Err(Error::ZeroEnergy(_))));
        assert!(verify_decay_bound(&c, 2.0, 1.0, &dyadic_radii(3), &exact()).unwrap().holds);
    }

    #[test]
    fn radius_checks() {
        let u = identity_map(2).unwrap();
        assert!(dirichlet_energy(&u, 0.0, &exact()).is_err());
        assert!(dirichlet_energy(&u, 1.5, &exact()).is_err());
        assert!(energy_profile(&u, &[], &exact()).is_err());
        assert!(energy_profile(&u, &[0.5, 0.5], &exact()).is_err());
        assert!(concentration_fraction(&u, 1.0, &exact()).is_err());
    }

    #[test]
    fn profile_ratios() {
        let p = energy_profile(&identity_map(3).unwrap(), &[0.5, 1.0], &exact()).unwrap();
        assert!(rel(p.samples[0].energy / p.samples[1].energy, 0.125) < 1e-14);
        let q = energy_profile(&scalar("x1^2 - x2^2", 2), &[0.5, 1.0], &exact()).unwrap();
        assert!(rel(q.samples[0].energy / q.samples[1].energy, 1.0 / 16.0) < 1e-14);
    }

    #[test]
    fn fitted_exponents() {
        let radii = dyadic_radii(6);
        for n in [2usize, 5, 9] {
            let f = fit_decay_exponent(&energy_profile(&identity_map(n).unwrap(), &radii, &exact()).unwrap()).unwrap();
            assert!((f.beta_hat - n as f64).abs() < 1e-9);
            assert!(f.max_residual < 1e-9);
        }
        let z = zonal_on_axis(4, 3, 0).unwrap();
        let f = fit_decay_exponent(&energy_profile(&z, &radii, &exact()).unwrap()).unwrap();
        assert!((f.beta_hat - 8.0).abs() < 1e-9);
    }

    #[test]
    fn mixture_fits_between_its_exponents() {
        let n = 3;
        let lin = parse_exact("x1", n).unwrap();
        let z5 = zonal_on_axis(n, 5, 2).unwrap().body().components()[0].clone();
        let mix = &lin + &z5.scale(&Rational::new(1.into(), 100.into()));
        let u = HarmonicMap::scalar(mix, MapKind::Custom);
        let f = fit_decay_exponent(&energy_profile(&u, &dyadic_radii(5), &exact()).unwrap()).unwrap();
        assert!(f.beta_hat > 3.0 && f.beta_hat < 11.0, "{f:?}");
        assert!(f.max_residual > 0.0);
    }

    #[test]
    fn decay_bound_direction() {
        let radii = dyadic_radii(5);
        for n in [2usize, 4, 8] {
            let u = identity_map(n).unwrap();
            let nf = n as f64;
            assert!(verify_decay_bound(&u, nf - 0.5, 1.0, &radii, &exact()).unwrap().holds);
            let bad = verify_decay_bound(&u, nf + 1.0, 1.0, &radii, &exact()).unwrap();
            assert!(!bad.holds && bad.worst_margin < 0.0);
        }
    }

    #[test]
    fn concentration_and_theta() {
        let u = identity_map(100).unwrap();
        let f = concentration_fraction(&u, 0.9, &exact()).unwrap();
        assert!((f - 0.999_973_438_601_112_4).abs() < 1e-12);
        let z = zonal_on_axis(10, 2, 0).unwrap();
        let f = concentration_fraction(&z, 0.5, &exact()).unwrap();
        assert!((f - (1.0 - 2f64.powi(-12))).abs() < 1e-12);
        for n in [2usize, 3, 6] {
            let t = half_radius_theta(&identity_map(n).unwrap(), 1.0, &exact()).unwrap();
            assert!(rel(t, 2f64.powi(-(n as i32))) < 1e-12);
            let t = half_radius_theta(&zonal_on_axis(n, 3, 0).unwrap(), 0.8, &exact()).unwrap();
            assert!(rel(t, 2f64.powi(-(n as i32 + 4))) < 1e-12);
        }
    }

    #[test]
    fn orthogonal_degrees_add() {
        let n = 4;
        let a = zonal_on_axis(n, 2, 0).unwrap().body().components()[0].clone();
        let b = zonal_on_axis(n, 3, 1).unwrap().body().components()[0].clone();
        let sum = HarmonicMap::scalar(&a + &b, MapKind::Custom);
        for r in [0.3, 0.7, 1.0] {
            let e = |p: &ExactPoly| {
                dirichlet_energy(&HarmonicMap::scalar(p.clone(), MapKind::Custom), r, &exact()).unwrap().value
            };
            let total = dirichlet_energy(&sum, r, &exact()).unwrap().value;
            assert!(rel(total, e(&a) + e(&b)) < 1e-10);
        }
    }

    #[test]
    fn area_matches_normal_energy_of_identity() {
        for n in 2..10 {
            let u = identity_map(n).unwrap();
            let a = sphere_area(n, 0.7).unwrap();
            assert!(rel(normal_energy(&u, 0.7, &exact()).unwrap().value, a) < 1e-12);
        }
    }
}
