//! Grid experiments with the standard mollifier in dimensions `n ≤ 3`:
//! the mean-value property `u = J_δ ⋆ u` for harmonic `u`, the gradient
//! estimate ratio, the scaling of `‖∇J_δ‖_q` and a Young inequality instance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::geometry::sphere_area;
use crate::harmonics::HarmonicMap;
use crate::integration::{integrate_poly_ball, QuadratureSpec};
use crate::polynomial::{ExactPoly, FloatPoly};

/// Largest dimension a grid is built for.
pub const MAX_GRID_DIM: usize = 3;
/// Target absolute error of the radial normalisation integral.
pub const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `exp(−1/(1−|x|^2))` on `|x| < 1`.
    StandardBump,
}

impl Profile {
    /// Unnormalised profile as a function of `s = |x|^2`.
    fn at_sq(self, s: f64) -> f64 {
        match self {
            Profile::StandardBump => {
                if s >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - s)).exp()
                }
            }
        }
    }

    /// `|∇φ|` as a function of `ρ = |x|`.
    fn grad_abs(self, rho: f64) -> f64 {
        match self {
            Profile::StandardBump => {
                let s = rho * rho;
                if s >= 1.0 {
                    0.0
                } else {
                    self.at_sq(s) * 2.0 * rho / ((1.0 - s) * (1.0 - s))
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MollifierSpec {
    pub dimension: usize,
    pub profile: Profile,
    pub delta: f64,
    /// `∫_{B_1} φ`, so that `J = φ / normalization` has unit mass.
    pub normalization: f64,
    /// Error estimate reported by the radial quadrature.
    pub normalization_error: f64,
}

fn check_dimension(n: usize) -> Result<()> {
    if n == 0 || n > MAX_GRID_DIM {
        return Err(Error::Refused(format!(
            "grid experiments support 1 <= n <= {MAX_GRID_DIM}; n = {n} would need h^-{n} nodes"
        )));
    }
    Ok(())
}

/// `|S^{n−1}| ∫_0^1 g(ρ) ρ^{n−1+extra} dρ`.
fn radial_integral(n: usize, extra: i32, g: impl Fn(f64) -> f64) -> (f64, f64) {
    let area = sphere_area(n, 1.0).expect("n >= 1");
    let f = |rho: f64| g(rho) * rho.powi(n as i32 - 1 + extra);
    // the integrand is flat to all orders at ρ = 1; splitting keeps the
    // double-exponential rule's error estimate honest there
    let tol = 1e-3 * NORMALIZATION_TOL / area;
    let (mut value, mut err) = (0.0, 0.0);
    for w in [0.0, 0.5, 0.9, 1.0].windows(2) {
        let out = quadrature::double_exponential::integrate(f, w[0], w[1], tol);
        value += out.integral;
        err += out.error_estimate;
    }
    (area * value, area * err)
}

impl MollifierSpec {
    pub fn new(dimension: usize, delta: f64) -> Result<Self> {
        Self::with_profile(dimension, delta, Profile::StandardBump)
    }

    pub fn with_profile(dimension: usize, delta: f64, profile: Profile) -> Result<Self> {
        check_dimension(dimension)?;
        if !(delta > 0.0 && delta <= 0.5) {
            return domain(format!("delta {delta} outside ]0, 1/2]"));
        }
        let (normalization, normalization_error) = radial_integral(dimension, 0, |r| profile.at_sq(r * r));
        Ok(Self { dimension, profile, delta, normalization, normalization_error })
    }

    /// `J_δ(x) = δ^{-n} J(x/δ)` with `s = |x|^2`.
    pub fn kernel_at_sq(&self, s: f64) -> f64 {
        let d2 = self.delta * self.delta;
        self.profile.at_sq(s / d2) / (self.normalization * self.delta.powi(self.dimension as i32))
    }

    pub fn kernel(&self, x: &[f64]) -> f64 {
        self.kernel_at_sq(x.iter().map(|v| v * v).sum())
    }

    /// `|∇J_δ|(x) = δ^{-n-1} |∇J|(x/δ)`.
    pub fn kernel_grad_abs(&self, x: &[f64]) -> f64 {
        let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt() / self.delta;
        self.profile.grad_abs(rho) / (self.normalization * self.delta.powi(self.dimension as i32 + 1))
    }

    /// `∫ J_δ(y) |y|^2 dy`, by radial quadrature.
    pub fn second_moment(&self) -> f64 {
        let (m, _) = radial_integral(self.dimension, 2, |r| self.profile.at_sq(r * r));
        self.delta * self.delta * m / self.normalization
    }
}

/// Values on the nodes `h (i − m)`, `i ∈ [0, 2m]^n`, row-major with the
/// last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub dimension: usize,
    pub h: f64,
    pub half_width: usize,
    pub values: Vec<f64>,
    /// `false` where the value is undefined.
    pub mask: Vec<bool>,
}

impl GridField {
    /// Grid with spacing `h` whose nodes cover `[−1, 1]^n`.
    pub fn covering_unit_ball(dimension: usize, h: f64) -> Result<Self> {
        check_dimension(dimension)?;
        if !(h > 0.0 && h <= 1.0) {
            return domain(format!("grid spacing {h} outside ]0, 1]"));
        }
        let half_width = (1.0 / h).ceil() as usize;
        let len = (2 * half_width + 1).pow(dimension as u32);
        Ok(Self { dimension, h, half_width, values: vec![0.0; len], mask: vec![true; len] })
    }

    /// Sample `f` on every node.
    pub fn sample(dimension: usize, h: f64, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<Self> {
        let mut g = Self::covering_unit_ball(dimension, h)?;
        let side = g.side();
        let (n, m) = (dimension, g.half_width);
        g.values.par_iter_mut().enumerate().for_each(|(flat, v)| {
            let x = node_coords(flat, n, side, m, h);
            *v = f(&x);
        });
        Ok(g)
    }

    pub fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        node_coords(flat, self.dimension, self.side(), self.half_width, self.h)
    }

    fn flat_index(&self, idx: &[i64]) -> Option<usize> {
        let side = self.side() as i64;
        let mut flat = 0i64;
        for &i in idx {
            let shifted = i + self.half_width as i64;
            if !(0..side).contains(&shifted) {
                return None;
            }
            flat = flat * side + shifted;
        }
        Some(flat as usize)
    }

    /// Value at the node with signed index `idx` (`x = h idx`), if defined.
    pub fn at(&self, idx: &[i64]) -> Option<f64> {
        let f = self.flat_index(idx)?;
        self.mask[f].then(|| self.values[f])
    }
}

fn node_coords(mut flat: usize, n: usize, side: usize, m: usize, h: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for axis in (0..n).rev() {
        let i = flat % side;
        flat /= side;
        x[axis] = (i as i64 - m as i64) as f64 * h;
    }
    x
}

/// Offsets `j` with `|j h| < δ` and their weights `J_δ(j h) h^n`.
#[derive(Clone, Debug)]
struct Stencil {
    offsets: Vec<Vec<i64>>,
    weights: Vec<f64>,
}

impl Stencil {
    fn new(spec: &MollifierSpec, h: f64) -> Self {
        let n = spec.dimension;
        let reach = (spec.delta / h).ceil() as i64;
        let hn = h.powi(n as i32);
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![-reach; n];
        loop {
            let s: f64 = idx.iter().map(|&i| (i as f64 * h).powi(2)).sum();
            let w = spec.kernel_at_sq(s);
            if w > 0.0 {
                offsets.push(idx.clone());
                weights.push(w * hn);
            }
            let mut axis = n;
            loop {
                if axis == 0 {
                    return Self { offsets, weights };
                }
                axis -= 1;
                if idx[axis] < reach {
                    idx[axis] += 1;
                    break;
                }
                idx[axis] = -reach;
            }
        }
    }

    fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Discrete kernel on a grid of spacing `h`: its nodes (all inside `|x| < δ`)
/// and `Σ J_δ(x_j) h^n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelReport {
    pub h: f64,
    pub nodes: usize,
    pub grid_mass: f64,
    pub peak: f64,
}

pub fn build_mollifier(spec: &MollifierSpec, h: f64) -> Result<(GridField, KernelReport)> {
    check_dimension(spec.dimension)?;
    let field = GridField::sample(spec.dimension, h, |x| spec.kernel(x))?;
    let stencil = Stencil::new(spec, h);
    let report =
        KernelReport { h, nodes: stencil.weights.len(), grid_mass: stencil.mass(), peak: spec.kernel_at_sq(0.0) };
    Ok((field, report))
}

/// `J_δ ⋆ u` on the grid of `u`, by direct summation. Nodes whose
/// `δ`-neighbourhood leaves `B_1` are masked.
pub fn mollify(u: &GridField, spec: &MollifierSpec) -> Result<GridField> {
    if u.dimension != spec.dimension {
        return Err(Error::Dimension { expected: spec.dimension, got: u.dimension });
    }
    let stencil = Stencil::new(spec, u.h);
    let side = u.side() as i64;
    let m = u.half_width as i64;
    let n = u.dimension;
    let mut out = u.clone();
    let results: Vec<Option<f64>> = (0..u.len())
        .into_par_iter()
        .map(|flat| {
            let x = u.coords(flat);
            let radius = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if radius + spec.delta > 1.0 {
                return None;
            }
            let mut base = vec![0i64; n];
            let mut rest = flat as i64;
            for axis in (0..n).rev() {
                base[axis] = rest % side - m;
                rest /= side;
            }
            let mut acc = 0.0;
            let mut idx = vec![0i64; n];
            for (off, w) in stencil.offsets.iter().zip(&stencil.weights) {
                for a in 0..n {
                    idx[a] = base[a] + off[a];
                }
                acc += w * u.at(&idx)?;
            }
            Some(acc)
        })
        .collect();
    for (flat, r) in results.into_iter().enumerate() {
        match r {
            Some(v) => out.values[flat] = v,
            None => {
                out.values[flat] = f64::NAN;
                out.mask[flat] = false;
            }
        }
    }
    Ok(out)
}

/// `(J_δ ⋆ f)(x) ≈ Σ_j J_δ(x − y_j) f(y_j) h^n` over grid nodes `y_j = h j`.
/// Undefined (`None`) when `|x| + δ > 1`.
pub fn mollify_at(spec: &MollifierSpec, h: f64, x: &[f64], f: impl Fn(&[f64]) -> f64) -> Result<Option<f64>> {
    if x.len() != spec.dimension {
        return Err(Error::Dimension { expected: spec.dimension, got: x.len() });
    }
    if !(h > 0.0) {
        return domain("grid spacing must be positive");
    }
    if x.iter().map(|v| v * v).sum::<f64>().sqrt() + spec.delta > 1.0 {
        return Ok(None);
    }
    let n = spec.dimension;
    let lo: Vec<i64> = x.iter().map(|&c| ((c - spec.delta) / h).floor() as i64).collect();
    let hi: Vec<i64> = x.iter().map(|&c| ((c + spec.delta) / h).ceil() as i64).collect();
    let hn = h.powi(n as i32);
    let mut idx = lo.clone();
    let mut y = vec![0.0; n];
    let mut acc = 0.0;
    loop {
        let mut s = 0.0;
        for a in 0..n {
            y[a] = idx[a] as f64 * h;
            s += (x[a] - y[a]).powi(2);
        }
        let w = spec.kernel_at_sq(s);
        if w > 0.0 {
            acc += w * f(&y);
        }
        let mut axis = n;
        loop {
            if axis == 0 {
                return Ok(Some(acc * hn));
            }
            axis -= 1;
            if idx[axis] < hi[axis] {
                idx[axis] += 1;
                break;
            }
            idx[axis] = lo[axis];
        }
    }
}

/// `count` points drawn uniformly from `B_radius`, deterministic in `seed`.
pub fn sample_points(n: usize, radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let rho = radius * rng.random::<f64>().powf(1.0 / n as f64);
            g.into_iter().map(|v| v * rho / norm).collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanValueReport {
    pub n: usize,
    pub delta: f64,
    pub h: f64,
    pub points: usize,
    pub certified_harmonic: bool,
    /// `sup |J_δ ⋆ u − u|` at spacing `h`.
    pub max_error: f64,
    /// The same at spacing `h/2`.
    pub max_error_refined: f64,
    /// `log2(max_error / max_error_refined)`.
    pub order: f64,
    /// Set for non-harmonic input: a nonzero defect says nothing against the mean-value property.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<&'static str>,
}

pub const NOT_A_COUNTEREXAMPLE: &str = "NOT-A-COUNTEREXAMPLE";

/// Largest `|(J_δ ⋆ u)(x) − u(x)|` over `points` and the components of `u`.
pub fn mean_value_defect(u: &HarmonicMap, spec: &MollifierSpec, h: f64, points: &[Vec<f64>]) -> Result<f64> {
    if u.dimension() != spec.dimension {
        return Err(Error::Dimension { expected: spec.dimension, got: u.dimension() });
    }
    let comps: Vec<FloatPoly> = u.body().components().iter().map(ExactPoly::lower).collect();
    let errs = points
        .par_iter()
        .map(|x| {
            if x.iter().map(|v| v * v).sum::<f64>().sqrt() > 1.0 - spec.delta {
                return domain(format!("point {x:?} outside B_(1-delta)"));
            }
            let mut worst = 0.0f64;
            for c in &comps {
                let m = mollify_at(spec, h, x, |y| c.evaluate_unchecked(y))?.expect("inside B_(1-delta)");
                worst = worst.max((m - c.evaluate_unchecked(x)).abs());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(errs.into_iter().fold(0.0, f64::max))
}

/// Mean-value defect at `h` and `h/2` and the observed order. Non-harmonic
/// input is run anyway and flagged.
pub fn mean_value_check(u: &HarmonicMap, spec: &MollifierSpec, h: f64, points: &[Vec<f64>]) -> Result<MeanValueReport> {
    let coarse = mean_value_defect(u, spec, h, points)?;
    let fine = mean_value_defect(u, spec, h / 2.0, points)?;
    Ok(MeanValueReport {
        n: spec.dimension,
        delta: spec.delta,
        h,
        points: points.len(),
        certified_harmonic: u.certified(),
        max_error: coarse,
        max_error_refined: fine,
        order: (coarse / fine).log2(),
        flag: (!u.certified()).then_some(NOT_A_COUNTEREXAMPLE),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradientRatio {
    pub p: f64,
    pub ratio: f64,
    /// `true` when `|∇u|^p` was integrated exactly (even `p`).
    pub exact: bool,
    /// Difference between the grid values at `h` and `h/2`; 0 when exact.
    pub error_estimate: f64,
}

/// Grid spacing for the `L^p` norm when `p` is not an even integer.
pub const GRADIENT_GRID_H: f64 = 1.0 / 256.0;

/// `‖∇u‖_{L^p(B_{1/2})} / ‖u‖_{L^2(B_1)}`.
pub fn gradient_estimate_ratio(u: &HarmonicMap, p: f64) -> Result<GradientRatio> {
    if !(p > 2.0 && p.is_finite()) {
        return domain(format!("exponent p = {p} must exceed 2"));
    }
    let exact = QuadratureSpec::exact();
    let l2_sq = integrate_poly_ball(&u.body().norm_sq(), 1.0, &exact)?.value;
    if l2_sq == 0.0 {
        return Err(Error::ZeroEnergy("u vanishes identically".into()));
    }
    let grad_sq = u.body().grad_norm_sq();
    let even = p.fract() == 0.0 && (p as u64).is_multiple_of(2);
    let (num, err) = if even {
        let integrand = grad_sq.pow((p as u32) / 2);
        (integrate_poly_ball(&integrand, 0.5, &exact)?.value, 0.0)
    } else {
        check_dimension(u.dimension())?;
        let g = grad_sq.lower();
        let a =
            grid_ball_integral(u.dimension(), 0.5, GRADIENT_GRID_H, |x| g.evaluate_unchecked(x).max(0.0).powf(p / 2.0));
        let b = grid_ball_integral(u.dimension(), 0.5, GRADIENT_GRID_H / 2.0, |x| {
            g.evaluate_unchecked(x).max(0.0).powf(p / 2.0)
        });
        (b, (a - b).abs())
    };
    let ratio = num.powf(1.0 / p) / l2_sq.sqrt();
    let error_estimate = if even { 0.0 } else { ratio * err / (p * num) };
    Ok(GradientRatio { p, ratio, exact: even, error_estimate })
}

/// Midpoint rule on the cells of side `h` whose centres lie in `B_radius`.
fn grid_ball_integral(n: usize, radius: f64, h: f64, f: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
    let cells = (radius / h).ceil() as i64;
    let side = 2 * cells;
    let total = (side as usize).pow(n as u32);
    let r2 = radius * radius;
    let sum: f64 = (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let mut x = vec![0.0; n];
            for xa in x.iter_mut().rev() {
                let i = (flat % side as usize) as i64;
                flat /= side as usize;
                *xa = (i - cells) as f64 * h + h / 2.0;
            }
            if x.iter().map(|v| v * v).sum::<f64>() < r2 {
                f(&x)
            } else {
                0.0
            }
        })
        .sum();
    sum * h.powi(n as i32)
}

/// `‖g‖_{L^q}` by the node sum over the box `[−δ, δ]^n` at spacing `h`.
fn kernel_norm(spec: &MollifierSpec, h: f64, q: f64, g: impl Fn(&MollifierSpec, &[f64]) -> f64 + Sync) -> f64 {
    let reach = (spec.delta / h).ceil() as i64;
    let n = spec.dimension;
    let side = (2 * reach + 1) as usize;
    let total = side.pow(n as u32);
    let sum: f64 = (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let mut x = vec![0.0; n];
            for xa in x.iter_mut().rev() {
                let i = (flat % side) as i64;
                flat /= side;
                *xa = (i - reach) as f64 * h;
            }
            g(spec, &x).powf(q)
        })
        .sum();
    (sum * h.powi(n as i32)).powf(1.0 / q)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub n: usize,
    pub q: f64,
    pub h: f64,
    pub deltas: Vec<f64>,
    pub norms: Vec<f64>,
    pub exponent: f64,
    /// `n/q − n − 1`.
    pub expected: f64,
}

/// Fixed spacing used for the `‖∇J_δ‖_q` fit in dimension `n`.
pub fn scaling_grid_h(n: usize) -> f64 {
    match n {
        1 => 1.0 / 4096.0,
        2 => 1.0 / 512.0,
        _ => 1.0 / 128.0,
    }
}

/// Fit `log ‖∇J_δ‖_{L^q} ≈ a + e log δ` over `deltas` at a fixed grid spacing.
pub fn mollifier_gradient_scaling(n: usize, q: f64, deltas: &[f64], h: f64) -> Result<ScalingFit> {
    check_dimension(n)?;
    if !(q >= 1.0) {
        return domain(format!("q = {q} must be at least 1"));
    }
    if deltas.len() < 2 {
        return domain("scaling fit needs at least two deltas");
    }
    let mut norms = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let spec = MollifierSpec::new(n, d)?;
        norms.push(kernel_norm(&spec, h, q, |s, x| s.kernel_grad_abs(x)));
    }
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let nf = n as f64;
    Ok(ScalingFit { n, q, h, deltas: deltas.to_vec(), norms, exponent: sxy / sxx, expected: nf / q - nf - 1.0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct YoungReport {
    pub p: f64,
    pub q: f64,
    /// `‖J_δ ⋆ u‖_{L^p}` over the defined grid nodes.
    pub lhs: f64,
    /// `‖J_δ‖_{L^q} ‖u‖_{L^2(B_1)}`.
    pub rhs: f64,
    pub holds: bool,
}

/// `‖J_δ ⋆ u‖_p ≤ ‖J_δ‖_q ‖u‖_2` with `1/q = 1/p + 1/2`, for the first component of `u`.
pub fn young_inequality_check(u: &HarmonicMap, spec: &MollifierSpec, p: f64, h: f64) -> Result<YoungReport> {
    if !(p >= 2.0) {
        return domain(format!("p = {p} must be at least 2"));
    }
    let q = 1.0 / (1.0 / p + 0.5);
    let comp = &u.body().components()[0];
    let c = comp.lower();
    let field = GridField::sample(spec.dimension, h, |x| {
        if x.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            c.evaluate_unchecked(x)
        } else {
            0.0
        }
    })?;
    let conv = mollify(&field, spec)?;
    let hn = h.powi(spec.dimension as i32);
    let sum: f64 = conv.values.iter().zip(&conv.mask).filter(|(_, &m)| m).map(|(v, _)| v.abs().powf(p)).sum();
    let lhs = (sum * hn).powf(1.0 / p);
    let l2 = integrate_poly_ball(&(comp * comp), 1.0, &QuadratureSpec::exact())?.value.sqrt();
    let rhs = kernel_norm(spec, h, q, |s, x| s.kernel(x)) * l2;
    Ok(YoungReport { p, q, lhs, rhs, holds: lhs <= rhs })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::harmonics::MapKind;
    use crate::polynomial::text::parse_exact;

    fn scalar(text: &str, n: usize) -> HarmonicMap {
        HarmonicMap::scalar(parse_exact(text, n).unwrap(), MapKind::Custom)
    }

    #[test]
    fn normalization_constants() {
        // mpmath values of ∫_{B_1} exp(−1/(1−|x|^2)) dx
        let want = [0.443_993_816_168, 0.466_512_393_178, 0.441_088_887_277];
        for (n, w) in (1..=3).zip(want) {
            let s = MollifierSpec::new(n, 0.25).unwrap();
            assert!((s.normalization - w).abs() < 1e-11, "n={n}: {}", s.normalization);
        }
        assert!(matches!(MollifierSpec::new(4, 0.25), Err(Error::Refused(_))));
        assert!(MollifierSpec::new(2, 0.6).is_err());
        assert!(MollifierSpec::new(2, 0.0).is_err());
    }

    #[test]
    fn second_moments() {
        // per-coordinate second moments of J from mpmath
        let per_coord = [0.158_113_636, 0.130_655_602, 0.111_695_654];
        for (n, w) in (1..=3).zip(per_coord) {
            let s = MollifierSpec::new(n, 0.5).unwrap();
            assert!((s.second_moment() - 0.25 * n as f64 * w).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn discrete_kernel_mass_and_support() {
        for n in 1..=3 {
            let delta = 0.25;
            let spec = MollifierSpec::new(n, delta).unwrap();
            let h = delta / 32.0;
            let (field, rep) = build_mollifier(&spec, h).unwrap();
            assert!((rep.grid_mass - 1.0).abs() < 1e-6, "n={n}: {}", rep.grid_mass);
            assert_eq!(rep.peak, spec.kernel_at_sq(0.0));
            assert!((rep.peak - (-1.0f64).exp() / (spec.normalization * delta.powi(n as i32))).abs() < 1e-9);
            for (flat, v) in field.values.iter().enumerate() {
                let x = field.coords(flat);
                if x.iter().map(|c| c * c).sum::<f64>().sqrt() >= delta {
                    assert_eq!(*v, 0.0);
                }
            }
        }
    }

    #[test]
    fn node_coordinates_from_indices() {
        let g = GridField::covering_unit_ball(2, 0.25).unwrap();
        assert_eq!(g.side(), 9);
        assert_eq!(g.coords(0), vec![-1.0, -1.0]);
        assert_eq!(g.coords(1), vec![-1.0, -0.75]);
        assert_eq!(g.coords(g.len() - 1), vec![1.0, 1.0]);
        assert_eq!(g.flat_index(&[0, 0]), Some(40));
        assert_eq!(g.flat_index(&[5, 0]), None);
    }

    #[test]
    fn constants_and_affine_functions_are_reproduced() {
        let spec = MollifierSpec::new(2, 0.25).unwrap();
        let h = 1.0 / 128.0;
        let ones = GridField::sample(2, h, |_| 1.0).unwrap();
        let m = mollify(&ones, &spec).unwrap();
        let lin = GridField::sample(2, h, |x| x[0]).unwrap();
        let ml = mollify(&lin, &spec).unwrap();
        let mut defined = 0;
        for flat in 0..m.len() {
            if m.mask[flat] {
                defined += 1;
                assert!((m.values[flat] - 1.0).abs() < 1e-6);
                assert!((ml.values[flat] - lin.values[flat]).abs() < 1e-6);
            } else {
                assert!(m.values[flat].is_nan());
            }
        }
        assert!(defined > 0);
        let x = m.coords(m.len() / 2);
        assert_eq!(x, vec![0.0, 0.0]);
        assert!(!m.mask[0]);
    }

    #[test]
    fn direct_summation_agrees_with_pointwise() {
        let spec = MollifierSpec::new(2, 0.25).unwrap();
        let h = 1.0 / 32.0;
        let f = |x: &[f64]| x[0] * x[0] * x[1] - 0.3 * x[1];
        let field = GridField::sample(2, h, f).unwrap();
        let conv = mollify(&field, &spec).unwrap();
        for flat in (0..conv.len()).step_by(37) {
            if conv.mask[flat] {
                let x = conv.coords(flat);
                let p = mollify_at(&spec, h, &x, f).unwrap().unwrap();
                assert!((p - conv.values[flat]).abs() < 1e-12);
            }
        }
        assert_eq!(mollify_at(&spec, h, &[0.9, 0.0], f).unwrap(), None);
    }

    #[test]
    fn convolution_is_linear() {
        let spec = MollifierSpec::new(1, 0.25).unwrap();
        let h = 1.0 / 128.0;
        let a = GridField::sample(1, h, |x| x[0].sin()).unwrap();
        let b = GridField::sample(1, h, |x| x[0] * x[0]).unwrap();
        let ab = GridField::sample(1, h, |x| 2.0 * x[0].sin() - 3.0 * x[0] * x[0]).unwrap();
        let (ma, mb, mab) = (mollify(&a, &spec).unwrap(), mollify(&b, &spec).unwrap(), mollify(&ab, &spec).unwrap());
        for i in 0..ma.len() {
            if ma.mask[i] {
                assert!((2.0 * ma.values[i] - 3.0 * mb.values[i] - mab.values[i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn harmonic_cubic_mean_value() {
        let spec = MollifierSpec::new(2, 0.25).unwrap();
        let u = scalar("x1^3 - 3*x1*x2^2", 2);
        let pts = sample_points(2, 0.5, 20, 1);
        let err = mean_value_defect(&u, &spec, 1.0 / 256.0, &pts).unwrap();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn non_harmonic_defect_matches_second_moment() {
        let spec = MollifierSpec::new(2, 0.25).unwrap();
        let u = scalar("x1^2 + x2^2", 2);
        let pts = sample_points(2, 0.5, 5, 2);
        let rep = mean_value_check(&u, &spec, 1.0 / 64.0, &pts).unwrap();
        assert_eq!(rep.flag, Some(NOT_A_COUNTEREXAMPLE));
        let m2 = spec.second_moment();
        assert!((m2 - 0.016_331_950_25).abs() < 1e-9);
        assert!((rep.max_error - m2).abs() < 1e-6, "{rep:?}");
        assert!((rep.max_error_refined - m2).abs() < 1e-6);
    }

    #[test]
    fn points_outside_are_refused() {
        let spec = MollifierSpec::new(2, 0.25).unwrap();
        let u = scalar("x1", 2);
        assert!(mean_value_defect(&u, &spec, 0.01, &[vec![0.8, 0.0]]).is_err());
    }

    #[test]
    fn gradient_ratio_of_a_coordinate() {
        let u = scalar("x1", 2);
        let r = gradient_estimate_ratio(&u, 4.0).unwrap();
        assert!(r.exact);
        assert!((r.ratio - 1.062_251_932_027_197).abs() < 1e-13);
        let scaled = u.scaled(&crate::polynomial::Rational::from_integer(7.into()));
        assert!((gradient_estimate_ratio(&scaled, 4.0).unwrap().ratio - r.ratio).abs() < 1e-13);
        // grid route on a linear function: |∇u| = 1 on B_{1/2}
        let g = gradient_estimate_ratio(&u, 3.0).unwrap();
        let want = (PI / 4.0).powf(1.0 / 3.0) / (PI / 4.0).sqrt();
        assert!((g.ratio - want).abs() < 1e-3, "{g:?}");
        assert!(gradient_estimate_ratio(&scalar("0", 2), 4.0).is_err());
        assert!(gradient_estimate_ratio(&u, 2.0).is_err());
    }

    #[test]
    fn gradient_scaling_exponents() {
        let deltas = [0.5, 0.25, 0.125];
        for (n, q) in [(2usize, 1.0), (2, 2.0)] {
            let fit = mollifier_gradient_scaling(n, q, &deltas, scaling_grid_h(n)).unwrap();
            assert!((fit.exponent - fit.expected).abs() < 0.05, "{fit:?}");
        }
    }

    #[test]
    fn young_instance() {
        let spec = MollifierSpec::new(2, 0.25).unwrap();
        let u = scalar("x1^2 - x2^2 + 1/2", 2);
        let rep = young_inequality_check(&u, &spec, 4.0, 1.0 / 64.0).unwrap();
        assert!((rep.q - 4.0 / 3.0).abs() < 1e-15);
        assert!(rep.holds, "{rep:?}");
    }
}
