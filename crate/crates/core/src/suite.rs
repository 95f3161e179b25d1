//! The full verification battery behind `harmonic-ball suite`.
//!
//! Every check is deterministic in the seed. A check never panics on
//! failure; it reports `passed = false` with the offending case.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energetics::{
    concentration_fraction, dirichlet_energy, dyadic_radii, energy_profile, fit_decay_exponent, half_radius_theta,
    verify_decay_bound,
};
use crate::error::Result;
use crate::geometry::{unit_ball_volume, volume_argmax};
use crate::harmonics::{identity_map, test_family, zonal_on_axis, HarmonicMap, MapKind};
use crate::identities::{c1_bound_report, minimiser_bound_check, run_identity_suite, IdentityName, IdentitySuite};
use crate::integration::{mc_poly_sphere, sphere_monomial_integral, QuadratureSpec};
use crate::mollifier::{
    mean_value_check, mean_value_defect, mollifier_gradient_scaling, sample_points, scaling_grid_h, MollifierSpec,
};
use crate::polynomial::{ExactPoly, MultiIndex, Rational};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, worst: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { name, passed, worst, threshold, detail: detail.into() }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn check_volume_maximum() -> Result<CheckResult> {
    let arg = volume_argmax(200)?;
    let v5 = unit_ball_volume(5).volume;
    let pi = std::f64::consts::PI;
    let err = rel(v5, 8.0 * pi * pi / 15.0);
    Ok(CheckResult::new("volume_maximum", arg == 5 && err < 1e-12, err, 1e-12, format!("argmax n = {arg}")))
}

pub fn check_identity_energy() -> Result<CheckResult> {
    let mut worst = (0.0, 0, 0.0);
    for n in 1..=50 {
        let u = identity_map(n)?;
        let v = unit_ball_volume(n).volume;
        for r in [0.3, 0.7, 1.0] {
            let e = dirichlet_energy(&u, r, &QuadratureSpec::exact())?.value;
            let err = rel(e, n as f64 * v * r.powi(n as i32));
            if err > worst.0 {
                worst = (err, n, r);
            }
        }
    }
    Ok(CheckResult::new(
        "identity_energy",
        worst.0 < 1e-12,
        worst.0,
        1e-12,
        format!("worst at n = {}, r = {}", worst.1, worst.2),
    ))
}

/// Pohozaev, Green and minimiser-bound checks over the standard family.
pub fn check_identities(seed: u64) -> Result<Vec<CheckResult>> {
    let suite = IdentitySuite { seed, ..IdentitySuite::default() };
    let reports = run_identity_suite(&suite, &QuadratureSpec::exact())?;
    let mut out = Vec::new();
    for (name, label) in [(IdentityName::Pohozaev, "pohozaev_identity"), (IdentityName::Green, "green_identity")] {
        let worst = reports
            .iter()
            .filter(|r| r.identity_name == name)
            .max_by(|a, b| a.normalized_residual.total_cmp(&b.normalized_residual))
            .expect("suite is non-empty");
        out.push(CheckResult::new(
            label,
            worst.normalized_residual < 1e-10,
            worst.normalized_residual,
            1e-10,
            format!("worst at n = {}, r = {}, map = {:?}", worst.n, worst.r, worst.map),
        ));
    }
    let bound: Vec<_> = reports.iter().filter(|r| r.identity_name == IdentityName::MinimiserBound).collect();
    let min_ratio = bound.iter().filter_map(|r| r.margin_ratio).fold(f64::INFINITY, f64::min);
    let mut id_err: f64 = 0.0;
    for n in 3..=50 {
        let rep = minimiser_bound_check(&identity_map(n)?, &QuadratureSpec::exact())?;
        let nf = n as f64;
        id_err = id_err.max(rel(rep.margin_ratio.unwrap_or(f64::NAN), 2.0 * (nf - 1.0) / (nf - 2.0)));
    }
    out.push(CheckResult::new(
        "minimiser_bound",
        min_ratio > 1.0 && id_err < 1e-12,
        id_err,
        1e-12,
        format!("smallest rhs/lhs over {} family members = {min_ratio}", bound.len()),
    ));
    Ok(out)
}

fn homogeneous_family(seed: u64) -> Result<Vec<HarmonicMap>> {
    let mut all = Vec::new();
    for n in 2..=10 {
        all.extend(test_family(n, seed)?.into_iter().filter(|u| u.degree().is_some_and(|k| k >= 1)));
    }
    Ok(all)
}

pub fn check_decay_law(seed: u64) -> Result<CheckResult> {
    let radii = dyadic_radii(6);
    let mut worst_fit = 0.0f64;
    for n in 2..=10 {
        for k in 1..=5 {
            let fit = fit_decay_exponent(&energy_profile(&zonal_on_axis(n, k, 0)?, &radii, &QuadratureSpec::exact())?)?;
            worst_fit = worst_fit.max((fit.beta_hat - (n as f64 + 2.0 * k as f64 - 2.0)).abs());
        }
    }
    let mut failures = Vec::new();
    for u in homogeneous_family(seed)? {
        let n = u.dimension() as f64;
        // (r/R)^β decreases in β, so β = n − 0.1 is the binding case
        for beta in [n - 0.1, n / 2.0, 0.5] {
            let rep = verify_decay_bound(&u, beta, 1.0, &radii, &QuadratureSpec::exact())?;
            if !rep.holds {
                failures.push(format!("n = {n}, {:?}, beta = {beta}", u.kind()));
            }
        }
    }
    Ok(CheckResult::new(
        "decay_law",
        worst_fit < 1e-9 && failures.is_empty(),
        worst_fit,
        1e-9,
        if failures.is_empty() { "decay bound holds with C = 1".into() } else { failures.join("; ") },
    ))
}

pub fn check_dyadic_contraction(seed: u64) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut all_below_one = true;
    for u in homogeneous_family(seed)? {
        let k = u.degree().expect("homogeneous") as i32;
        let n = u.dimension() as i32;
        let theta = half_radius_theta(&u, 1.0, &QuadratureSpec::exact())?;
        worst = worst.max(rel(theta, 2f64.powi(-(n + 2 * k - 2))));
        all_below_one &= theta < 1.0;
    }
    Ok(CheckResult::new("dyadic_contraction", worst < 1e-12 && all_below_one, worst, 1e-12, "theta = 2^-(n+2k-2)"))
}

pub fn check_concentration() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut prev = f64::NEG_INFINITY;
    let mut monotone = true;
    let mut tail = true;
    for n in 2..=200 {
        let f = concentration_fraction(&identity_map(n)?, 0.9, &QuadratureSpec::exact())?;
        worst = worst.max((f - (1.0 - 0.9f64.powi(n as i32))).abs());
        monotone &= f > prev;
        prev = f;
        if n >= 88 {
            tail &= f > 1.0 - 1e-4;
        }
    }
    Ok(CheckResult::new(
        "boundary_concentration",
        worst < 1e-12 && monotone && tail,
        worst,
        1e-12,
        format!("strictly increasing: {monotone}; above 1 - 1e-4 from n = 88: {tail}"),
    ))
}

pub fn check_c1_rate() -> Result<CheckResult> {
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    let mut worst = (0.0f64, 0usize);
    for n in 3..=200 {
        let rep = c1_bound_report(&identity_map(n)?)?;
        let c1n = rep.c1.expect("c1 reported") * n as f64;
        monotone &= c1n < prev && c1n > 2.0;
        prev = c1n;
        if n >= 22 {
            let gap = (c1n - 2.0).abs();
            if gap >= worst.0 {
                worst = (gap, n);
            }
        }
    }
    let passed = monotone && worst.0 < 0.2;
    Ok(CheckResult::new(
        "c1_rate",
        passed,
        worst.0,
        0.2,
        format!("c1*n decreasing to 2: {monotone}; largest |c1*n - 2| for n >= 22 is at n = {}", worst.1),
    ))
}

/// Harmonic maps used by the mean-value checks in the plane.
fn planar_harmonics(seed: u64) -> Result<Vec<HarmonicMap>> {
    test_family(2, seed)
}

pub fn check_mean_value(seed: u64) -> Result<CheckResult> {
    let spec = MollifierSpec::new(2, 0.25)?;
    let h = 1.0 / 256.0;
    let points = sample_points(2, 0.5, 20, seed);
    let mut sup = 0.0f64;
    let mut min_order = f64::INFINITY;
    for u in planar_harmonics(seed)? {
        let rep = mean_value_check(&u, &spec, h, &points)?;
        sup = sup.max(rep.max_error);
        min_order = min_order.min(rep.order);
    }
    let control = HarmonicMap::scalar(ExactPoly::radius_sq(2), MapKind::Custom);
    let defects = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0]
        .iter()
        .map(|&hh| mean_value_defect(&control, &spec, hh, &points))
        .collect::<Result<Vec<_>>>()?;
    let min_defect = defects.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(CheckResult::new(
        "mean_value_property",
        sup < 1e-4 && min_order >= 1.8 && min_defect > 1e-3,
        sup,
        1e-4,
        format!("min order {min_order:.3}; |x|^2 defect {min_defect:.6e}"),
    ))
}

/// `count` multi-indices in `n` variables with even entries and total degree ≤ `2 half_max`.
pub fn random_even_indices(n: usize, count: usize, half_max: u32, rng: &mut ChaCha8Rng) -> Vec<MultiIndex> {
    (0..count)
        .map(|_| {
            let mut e = vec![0u32; n];
            let total = rng.random_range(1..=half_max);
            for _ in 0..total {
                e[rng.random_range(0..n)] += 2;
            }
            MultiIndex::new(e)
        })
        .collect()
}

pub fn check_monte_carlo_oracle(seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_hits = usize::MAX;
    let mut detail = Vec::new();
    for n in [2usize, 5, 10] {
        let mut hits = 0;
        for (i, alpha) in random_even_indices(n, 10, 4, &mut rng).into_iter().enumerate() {
            let exact = sphere_monomial_integral(n, &alpha, 1.0)?.value;
            let p = ExactPoly::from_terms(n, [(alpha, Rational::from_integer(1.into()))])?;
            let mc = mc_poly_sphere(&p, 1.0, 1_000_000, seed.wrapping_add(100 * n as u64 + i as u64))?;
            if mc.agrees_with(exact, 3.0) {
                hits += 1;
            }
        }
        worst_hits = worst_hits.min(hits);
        detail.push(format!("n = {n}: {hits}/10"));
    }
    Ok(CheckResult::new("monte_carlo_oracle", worst_hits >= 9, worst_hits as f64, 9.0, detail.join(", ")))
}

pub fn check_mollifier_scaling() -> Result<CheckResult> {
    let deltas = [0.5, 0.25, 0.125];
    let mut worst = (0.0f64, 0usize, 0.0);
    for n in [2usize, 3] {
        for q in [1.0, 1.5, 2.0] {
            let fit = mollifier_gradient_scaling(n, q, &deltas, scaling_grid_h(n))?;
            let gap = (fit.exponent - fit.expected).abs();
            if gap > worst.0 {
                worst = (gap, n, q);
            }
        }
    }
    Ok(CheckResult::new(
        "mollifier_scaling",
        worst.0 < 0.05,
        worst.0,
        0.05,
        format!("exponent n/q - n - 1; worst at n = {}, q = {}", worst.1, worst.2),
    ))
}

/// Every check, in a fixed order.
pub fn run_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = vec![check_volume_maximum()?, check_identity_energy()?];
    out.extend(check_identities(seed)?);
    out.push(check_decay_law(seed)?);
    out.push(check_dyadic_contraction(seed)?);
    out.push(check_concentration()?);
    out.push(check_c1_rate()?);
    out.push(check_mean_value(seed)?);
    out.push(check_monte_carlo_oracle(seed)?);
    out.push(check_mollifier_scaling()?);
    Ok(out)
}
