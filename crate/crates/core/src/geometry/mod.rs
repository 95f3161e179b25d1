//! Volumes of unit balls, sphere areas and shell fractions, all carried in
//! log-space so that dimensions in the hundreds do not underflow.

mod special;

use std::f64::consts::PI;

use serde::Serialize;

pub use special::{ln_gamma, SignedLog};

use crate::error::{domain, Error, Result};

/// Volume of the unit ball `B^n`. `log_volume` is authoritative; `volume`
/// is its exponential and may underflow to 0 for very large `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallVolume {
    pub dimension: usize,
    pub log_volume: f64,
    pub volume: f64,
}

/// The shell `{ r < |x| < 1 }` in `R^n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellSpec {
    pub dimension: usize,
    pub inner_radius: f64,
}

impl ShellSpec {
    pub fn new(dimension: usize, inner_radius: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&inner_radius) {
            return domain(format!("shell inner radius {inner_radius} outside [0, 1]"));
        }
        Ok(Self { dimension, inner_radius })
    }
}

/// `ln Vol(B^n) = (n/2) ln π − ln Γ(n/2 + 1)`; `n = 0` gives 0 (the point has volume 1).
pub fn ln_unit_ball_volume(n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let h = n as f64 / 2.0;
    h * PI.ln() - ln_gamma(h + 1.0)
}

pub fn unit_ball_volume(n: usize) -> BallVolume {
    let log_volume = ln_unit_ball_volume(n);
    BallVolume { dimension: n, log_volume, volume: log_volume.exp() }
}

/// `ln Vol(B_r^n) = ln V_n + n ln r`.
pub fn ln_ball_volume(n: usize, r: f64) -> f64 {
    ln_unit_ball_volume(n) + n as f64 * r.ln()
}

/// Dimension in `[1, n_max]` with the largest unit-ball volume.
pub fn volume_argmax(n_max: usize) -> Result<usize> {
    if n_max == 0 {
        return domain("volume_argmax needs n_max >= 1");
    }
    let mut best = 1;
    let mut best_ln = ln_unit_ball_volume(1);
    for n in 2..=n_max {
        let v = ln_unit_ball_volume(n);
        if v > best_ln {
            best = n;
            best_ln = v;
        }
    }
    Ok(best)
}

/// `1 − r^n`, the fraction of `Vol(B^n)` outside `B_r`.
pub fn shell_volume_fraction(shell: ShellSpec) -> f64 {
    let ShellSpec { dimension: n, inner_radius: r } = shell;
    if r == 0.0 {
        return if n == 0 { 0.0 } else { 1.0 };
    }
    -(n as f64 * r.ln()).exp_m1()
}

/// Thinnest outer shell holding the fraction `mass` of the volume:
/// `1 − (1 − mass)^{1/n}`.
pub fn shell_width_for_mass(n: usize, mass: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    if !(mass > 0.0 && mass < 1.0) {
        return domain(format!("mass {mass} outside ]0, 1["));
    }
    Ok(-((-mass).ln_1p() / n as f64).exp_m1())
}

/// `ln |∂B_r^n| = ln 2 + (n/2) ln π − ln Γ(n/2) + (n−1) ln r`.
///
/// Evaluated through `Γ(n/2)` rather than `n V_n`, so the identity
/// `|∂B_1| = n V_n` is a genuine cross-check.
pub fn ln_sphere_area(n: usize, r: f64) -> f64 {
    assert!(n >= 1, "sphere area needs n >= 1");
    let h = n as f64 / 2.0;
    std::f64::consts::LN_2 + h * PI.ln() - ln_gamma(h) + (n as f64 - 1.0) * r.ln()
}

pub fn sphere_area(n: usize, r: f64) -> Result<f64> {
    if n == 0 {
        return domain("sphere area needs n >= 1");
    }
    if !(r > 0.0) {
        return domain(format!("radius {r} must be positive"));
    }
    Ok(ln_sphere_area(n, r).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn small_dimensions() {
        assert!(rel(unit_ball_volume(1).volume, 2.0) < 1e-14);
        assert!(rel(unit_ball_volume(2).volume, PI) < 1e-14);
        assert!(rel(unit_ball_volume(3).volume, 4.0 * PI / 3.0) < 1e-14);
        assert_eq!(unit_ball_volume(0).volume, 1.0);
    }

    #[test]
    fn five_ball_against_recursion() {
        // V1 = 2, V3 = (2π/3) V1, V5 = (2π/5) V3
        let v5_rec = 2.0 * (2.0 * PI / 3.0) * (2.0 * PI / 5.0);
        let v5 = unit_ball_volume(5).volume;
        assert!(rel(v5, 8.0 * PI * PI / 15.0) < 1e-13);
        assert!(rel(v5, v5_rec) < 1e-13);
        assert!((v5 - 5.263789013914324).abs() < 1e-12);
    }

    #[test]
    fn hundred_ball_in_log_space() {
        let b = unit_ball_volume(100);
        // mpmath: ln V_100 = -91.241272659303023...
        assert!((b.log_volume + 91.241_272_659_303_02).abs() < 1e-11);
        let n = 100.0;
        let stirling = (n / 2.0) * (2.0 * PI * std::f64::consts::E / n).ln() - 0.5 * (n * PI).ln();
        assert!(rel(b.log_volume, stirling) < 0.01);
        assert!(b.volume > 1e-41 && b.volume < 1e-39);
    }

    #[test]
    fn two_step_recursion() {
        for n in 3..=500usize {
            let lhs = ln_unit_ball_volume(n);
            let rhs = (2.0 * PI / n as f64).ln() + ln_unit_ball_volume(n - 2);
            assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "n={n}");
        }
    }

    #[test]
    fn argmax_is_five() {
        assert_eq!(volume_argmax(25).unwrap(), 5);
        assert_eq!(volume_argmax(5).unwrap(), 5);
        assert_eq!(volume_argmax(1000).unwrap(), 5);
        assert!(volume_argmax(0).is_err());
    }

    #[test]
    fn decay_beyond_five() {
        for n in 5..600 {
            assert!(ln_unit_ball_volume(n + 1) < ln_unit_ball_volume(n));
        }
        // ln V_n < -n first holds at n = 121 and for every n after it
        assert!(ln_unit_ball_volume(120) > -120.0);
        for n in 121..2000 {
            assert!(ln_unit_ball_volume(n) < -(n as f64), "n={n}");
        }
    }

    #[test]
    fn shell_fractions() {
        for n in 1..10 {
            assert_eq!(shell_volume_fraction(ShellSpec::new(n, 1.0).unwrap()), 0.0);
        }
        assert!((shell_volume_fraction(ShellSpec::new(2, 0.5).unwrap()) - 0.75).abs() < 1e-15);
        let f = shell_volume_fraction(ShellSpec::new(100, 0.9).unwrap());
        assert!((f - 0.999_973_438_601_112_4).abs() < 1e-15);
        assert!(ShellSpec::new(3, 1.5).is_err());
        assert!(ShellSpec::new(3, -0.1).is_err());
    }

    #[test]
    fn shell_fraction_increases_with_dimension() {
        for r in [0.5, 0.9, 0.99] {
            for n in 1..300 {
                let a = shell_volume_fraction(ShellSpec { dimension: n, inner_radius: r });
                let b = shell_volume_fraction(ShellSpec { dimension: n + 1, inner_radius: r });
                assert!(b > a || (a == 1.0 && b == 1.0), "r={r}, n={n}");
            }
        }
    }

    #[test]
    fn shell_widths() {
        assert!((shell_width_for_mass(1, 0.5).unwrap() - 0.5).abs() < 1e-15);
        let w = shell_width_for_mass(100, 0.5).unwrap();
        assert!((w - 0.006_907_504_562_964_098).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for n in 1..=1000 {
            let w = shell_width_for_mass(n, 0.5).unwrap();
            assert!(w < prev);
            prev = w;
        }
        assert!(shell_width_for_mass(10, 1e-300).unwrap() < 1e-299);
        assert!(shell_width_for_mass(10, 1.0).is_err());
        assert!(shell_width_for_mass(10, 0.0).is_err());
    }

    #[test]
    fn sphere_areas() {
        assert!(rel(sphere_area(2, 1.0).unwrap(), 2.0 * PI) < 1e-14);
        assert!(rel(sphere_area(3, 1.0).unwrap(), 4.0 * PI) < 1e-14);
        assert!(rel(sphere_area(10, 0.5).unwrap(), 0.049_807_891_403_854_4) < 1e-13);
        assert!(sphere_area(3, 0.0).is_err());
        for n in 1..=400 {
            let lhs = ln_sphere_area(n, 1.0);
            let rhs = (n as f64).ln() + ln_unit_ball_volume(n);
            assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0), "n={n}");
        }
    }

    #[test]
    fn sphere_area_is_derivative_of_volume() {
        for n in [2usize, 3, 7, 10, 25] {
            for r in [0.3, 0.5, 0.9] {
                let h = 1e-5;
                let v = |s: f64| ln_ball_volume(n, s).exp();
                // fourth-order central difference
                let d = (-v(r + 2.0 * h) + 8.0 * v(r + h) - 8.0 * v(r - h) + v(r - 2.0 * h)) / (12.0 * h);
                let a = sphere_area(n, r).unwrap();
                assert!(rel(d, a) < 1e-10, "n={n} r={r}: {d} vs {a}");
            }
        }
    }
}
