//! Variational identities of harmonic maps on `B_r` and the minimiser bound
//! `E(1) ≤ 2/(n−2) H(1)`, plus the volume chain built on the identity map.

use rayon::prelude::*;
use serde::Serialize;

use crate::energetics::MapEnergetics;
use crate::error::{Error, Result};
use crate::geometry::ln_unit_ball_volume;
use crate::harmonics::{test_family, HarmonicMap, MapKind};
use crate::integration::{Method, QuadratureSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityName {
    Pohozaev,
    Green,
    MinimiserBound,
    C1Bound,
}

impl std::fmt::Display for IdentityName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IdentityName::Pohozaev => "pohozaev",
            IdentityName::Green => "green",
            IdentityName::MinimiserBound => "minimiser_bound",
            IdentityName::C1Bound => "c1_bound",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub identity_name: IdentityName,
    pub n: usize,
    pub r: f64,
    pub map: MapKind,
    pub degree: Option<u32>,
    pub method: Method,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub normalized_residual: f64,
    /// `rhs / lhs` for the minimiser bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin_ratio: Option<f64>,
    /// `c_1 = 2/(n−2)` for the constant report.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
}

impl ResidualReport {
    fn new(name: IdentityName, u: &HarmonicMap, r: f64, method: Method, lhs: f64, rhs: f64, energy: f64) -> Self {
        let residual = lhs - rhs;
        let scale = lhs.abs().max(rhs.abs()).max(energy.abs());
        let normalized_residual = if scale == 0.0 { 0.0 } else { residual.abs() / scale };
        Self {
            identity_name: name,
            n: u.dimension(),
            r,
            map: u.kind().clone(),
            degree: u.degree(),
            method,
            lhs,
            rhs,
            residual,
            normalized_residual,
            margin_ratio: None,
            c1: None,
        }
    }

    /// Equalities pass when `normalized_residual < tol`; the minimiser bound
    /// passes when it holds strictly (`rhs / lhs > 1`).
    pub fn passes(&self, tol: f64) -> bool {
        match self.identity_name {
            IdentityName::Pohozaev | IdentityName::Green => self.normalized_residual < tol,
            IdentityName::MinimiserBound | IdentityName::C1Bound => self.margin_ratio.is_some_and(|m| m > 1.0),
        }
    }
}

/// `(n−2) E(r)` against `r ∫|∇u|^2 − 2r ∫|∂_ν u|^2` over `∂B_r`.
pub fn pohozaev_residual(u: &HarmonicMap, r: f64, spec: &QuadratureSpec) -> Result<ResidualReport> {
    u.require_certified("the Pohozaev identity")?;
    pohozaev_with(&MapEnergetics::new(u), r, spec)
}

fn pohozaev_with(me: &MapEnergetics, r: f64, spec: &QuadratureSpec) -> Result<ResidualReport> {
    let n = me.dimension() as f64;
    let e = me.dirichlet(r, spec)?.value;
    let total = me.surface_total(r, spec)?.value;
    let normal = me.normal(r, spec)?.value;
    let lhs = (n - 2.0) * e;
    let rhs = r * total - 2.0 * r * normal;
    Ok(ResidualReport::new(IdentityName::Pohozaev, me.map(), r, spec.method, lhs, rhs, e))
}

/// `E(r)` against `Σ_i ∫_{∂B_r} u^i (∂_ν u)^i`.
pub fn green_residual(u: &HarmonicMap, r: f64, spec: &QuadratureSpec) -> Result<ResidualReport> {
    u.require_certified("the Green identity")?;
    green_with(&MapEnergetics::new(u), r, spec)
}

fn green_with(me: &MapEnergetics, r: f64, spec: &QuadratureSpec) -> Result<ResidualReport> {
    let e = me.dirichlet(r, spec)?.value;
    let rhs = me.flux(r, spec)?.value;
    Ok(ResidualReport::new(IdentityName::Green, me.map(), r, spec.method, e, rhs, e))
}

fn require_minimiser_hypotheses(u: &HarmonicMap) -> Result<()> {
    if u.dimension() < 3 {
        return Err(Error::Refused(format!("the minimiser bound needs n >= 3, got n = {}", u.dimension())));
    }
    if u.is_constant() {
        return Err(Error::Refused("the minimiser bound excludes constant maps".into()));
    }
    u.require_certified("the minimiser bound")
}

/// `E(1)` against `2/(n−2) H(1)`; `margin_ratio = rhs / lhs` exceeds 1 when the bound holds strictly.
pub fn minimiser_bound_check(u: &HarmonicMap, spec: &QuadratureSpec) -> Result<ResidualReport> {
    require_minimiser_hypotheses(u)?;
    minimiser_with(&MapEnergetics::new(u), spec)
}

fn minimiser_with(me: &MapEnergetics, spec: &QuadratureSpec) -> Result<ResidualReport> {
    let n = me.dimension() as f64;
    let c1 = 2.0 / (n - 2.0);
    let e = me.dirichlet(1.0, spec)?.value;
    let h = me.surface_dirichlet(1.0, spec)?.value;
    let mut rep = ResidualReport::new(IdentityName::MinimiserBound, me.map(), 1.0, spec.method, e, c1 * h, e);
    rep.margin_ratio = Some(c1 * h / e);
    rep.c1 = Some(c1);
    Ok(rep)
}

/// The bound `E(1) ≤ c_1 H(1)` with `c_1 = 2/(n−2)`, by exact integration.
pub fn c1_bound_report(u: &HarmonicMap) -> Result<ResidualReport> {
    let mut rep = minimiser_bound_check(u, &QuadratureSpec::exact())?;
    rep.identity_name = IdentityName::C1Bound;
    Ok(rep)
}

/// `c_1 = 2/(n−2)`.
pub fn c1_constant(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::Refused(format!("c1 is defined for n >= 3, got n = {n}")));
    }
    Ok(2.0 / (n as f64 - 2.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChainRow {
    pub n: usize,
    pub log_volume: f64,
    pub volume: f64,
    /// `E(1) = n V_n` for the identity map.
    pub energy: f64,
    /// `H(1) = n (n−1) V_n` for the identity map.
    pub surface_dirichlet: f64,
    /// `2 H(1) / (n (n−2))`, the volume bound implied by `E(1) ≤ c_1 H(1)`.
    pub implied_volume_bound: f64,
    pub running_sup_h: f64,
    pub running_argmax_h: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeDecayChain {
    pub rows: Vec<ChainRow>,
    pub sup_h: f64,
    pub argmax_h: usize,
    /// The supremum is attained strictly inside the range and `H(1)` decreases
    /// after it, so the finite scan exhibits a bounded sequence.
    pub h_bounded_on_range: bool,
}

pub fn volume_decay_chain(n_min: usize, n_max: usize) -> Result<VolumeDecayChain> {
    if n_min < 3 || n_max < n_min {
        return Err(Error::Domain(format!("volume chain needs 3 <= n_min <= n_max, got [{n_min}, {n_max}]")));
    }
    let mut rows = Vec::with_capacity(n_max - n_min + 1);
    let (mut sup, mut arg) = (f64::NEG_INFINITY, n_min);
    for n in n_min..=n_max {
        let nf = n as f64;
        let lv = ln_unit_ball_volume(n);
        let volume = lv.exp();
        let h = (nf * (nf - 1.0)).ln() + lv;
        if h > sup {
            sup = h;
            arg = n;
        }
        rows.push(ChainRow {
            n,
            log_volume: lv,
            volume,
            energy: (nf.ln() + lv).exp(),
            surface_dirichlet: h.exp(),
            implied_volume_bound: (2.0f64.ln() + h - (nf * (nf - 2.0)).ln()).exp(),
            running_sup_h: sup.exp(),
            running_argmax_h: arg,
        });
    }
    let tail_decreasing = rows.iter().skip_while(|r| r.n <= arg).map(|r| r.surface_dirichlet).collect::<Vec<_>>();
    let h_bounded_on_range = arg > n_min && arg < n_max && tail_decreasing.windows(2).all(|w| w[1] < w[0]);
    Ok(VolumeDecayChain { rows, sup_h: sup.exp(), argmax_h: arg, h_bounded_on_range })
}

/// Which identities a suite run evaluates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentitySuite {
    pub dimensions: Vec<usize>,
    pub radii: Vec<f64>,
    pub seed: u64,
}

impl Default for IdentitySuite {
    fn default() -> Self {
        Self { dimensions: (2..=10).collect(), radii: vec![0.3, 0.7, 1.0], seed: 0 }
    }
}

/// Pohozaev and Green residuals for every member of [`test_family`] at every
/// radius, plus the minimiser bound for `n ≥ 3`. Output is sorted by
/// `(n, map, identity, r)` and does not depend on the thread count.
pub fn run_identity_suite(suite: &IdentitySuite, spec: &QuadratureSpec) -> Result<Vec<ResidualReport>> {
    let maps = suite
        .dimensions
        .iter()
        .map(|&n| test_family(n, suite.seed))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    let per_map = maps
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let me = MapEnergetics::new(u);
            let mut out = Vec::new();
            for &r in &suite.radii {
                out.push(pohozaev_with(&me, r, spec)?);
                out.push(green_with(&me, r, spec)?);
            }
            if u.dimension() >= 3 {
                out.push(minimiser_with(&me, spec)?);
            }
            Ok(out.into_iter().map(|rep| (i, rep)).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all: Vec<(usize, ResidualReport)> = per_map.into_iter().flatten().collect();
    all.sort_by(|a, b| {
        (a.1.n, a.0, a.1.identity_name).cmp(&(b.1.n, b.0, b.1.identity_name)).then(a.1.r.total_cmp(&b.1.r))
    });
    Ok(all.into_iter().map(|(_, r)| r).collect())
}
