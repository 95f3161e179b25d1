//! Harmonic polynomial maps in arbitrary dimension.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::polynomial::{Coefficient, ExactMap, ExactPoly, MultiIndex, MultiPoly, Rational, VectorPoly};

/// Where a map came from; carried into reports so a check can be re-run.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    Identity,
    Zonal { k: u32 },
    Random { k: u32, seed: u64 },
    Custom,
}

/// A polynomial map together with its harmonicity certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicMap {
    body: ExactMap,
    degree: Option<u32>,
    certified: bool,
    kind: MapKind,
}

impl HarmonicMap {
    /// Wrap an arbitrary polynomial map; `certified` is set iff every
    /// component has vanishing Laplacian (exact check).
    pub fn from_map(body: ExactMap, kind: MapKind) -> Self {
        let certified = body.is_harmonic();
        let degree = body.homogeneous_degree();
        Self { body, degree, certified, kind }
    }

    pub fn scalar(p: ExactPoly, kind: MapKind) -> Self {
        Self::from_map(VectorPoly::scalar(p), kind)
    }

    pub fn body(&self) -> &ExactMap {
        &self.body
    }

    pub fn dimension(&self) -> usize {
        self.body.dimension()
    }

    /// Homogeneous degree, if all non-zero components share one.
    pub fn degree(&self) -> Option<u32> {
        self.degree
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn is_constant(&self) -> bool {
        self.body.is_constant()
    }

    /// `λ u`, keeping provenance.
    pub fn scaled(&self, lambda: &Rational) -> Self {
        Self { body: self.body.scale(lambda), degree: self.degree, certified: self.certified, kind: self.kind.clone() }
    }

    pub(crate) fn require_certified(&self, what: &str) -> Result<()> {
        if !self.certified {
            return Err(Error::Refused(format!("{what} presumes a harmonic map; input has non-zero Laplacian")));
        }
        Ok(())
    }
}

/// `u(x) = x`.
pub fn identity_map(n: usize) -> Result<HarmonicMap> {
    if n == 0 {
        return domain("identity map needs n >= 1");
    }
    let comps = (0..n).map(|i| ExactPoly::variable(n, i)).collect::<Result<Vec<_>>>()?;
    Ok(HarmonicMap::from_map(VectorPoly::new(n, comps)?, MapKind::Identity))
}

/// Gegenbauer (Chebyshev for `n = 2`) recurrence in the formal variables
/// `(t, s)`, returning the degree-`k` homogeneous polynomial `P_k(t, s)` with
/// `P_k(⟨x,a⟩, |x|^2) = |x|^k C_k^{(n/2-1)}(⟨x,a⟩/|x|)` (`T_k` for `n = 2`).
fn zonal_in_t_s<C: Coefficient>(n: usize, k: u32) -> Result<MultiPoly<C>> {
    let t = MultiPoly::<C>::monomial(vec![1, 0], C::one());
    let s = MultiPoly::<C>::monomial(vec![0, 1], C::one());
    if n == 1 && k >= 2 {
        return Err(Error::Refused(format!(
            "no harmonic polynomial of degree {k} in one dimension (harmonic polynomials on the line are affine)"
        )));
    }
    let mut prev = MultiPoly::<C>::one(2);
    if k == 0 {
        return Ok(prev);
    }
    let mut cur = if n >= 3 { t.scale(&C::from_i64(n as i64 - 2)) } else { t.clone() };
    let n = n as i64;
    for j in 2..=k as i64 {
        let next = if n == 2 {
            &(&t * &cur).scale(&C::from_i64(2)) - &(&s * &prev)
        } else {
            let a = (&t * &cur).scale(&C::from_ratio(2 * j + n - 4, j));
            let b = (&s * &prev).scale(&C::from_ratio(j + n - 4, j));
            &a - &b
        };
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

fn zonal_generic<C: Coefficient>(n: usize, k: u32, axis: &[C]) -> Result<MultiPoly<C>> {
    if n == 0 {
        return domain("zonal harmonic needs n >= 1");
    }
    if axis.len() != n {
        return Err(Error::Dimension { expected: n, got: axis.len() });
    }
    let pts = zonal_in_t_s::<C>(n, k)?;
    let t = MultiPoly::from_terms(n, axis.iter().enumerate().map(|(j, a)| (MultiIndex::unit(n, j), a.clone())))?;
    pts.substitute(&[t, MultiPoly::radius_sq(n)])
}

/// Degree-`k` zonal solid harmonic about the unit vector `axis`, with the
/// leading Gegenbauer normalisation (Chebyshev `T_k` when `n = 2`).
pub fn zonal_solid_harmonic(n: usize, k: u32, axis: &[Rational]) -> Result<HarmonicMap> {
    let norm: Rational = axis.iter().map(|a| a * a).fold(Rational::zero(), |a, b| a + b);
    if norm != Rational::from_i64(1) {
        return domain("zonal axis must have unit norm");
    }
    let p = zonal_generic(n, k, axis)?;
    let h = HarmonicMap::scalar(p, MapKind::Zonal { k });
    debug_assert!(h.certified);
    Ok(h)
}

/// Zonal harmonic about the coordinate axis `e_{axis+1}`.
pub fn zonal_on_axis(n: usize, k: u32, axis: usize) -> Result<HarmonicMap> {
    if axis >= n {
        return Err(Error::Axis { axis, dimension: n });
    }
    let dir: Vec<Rational> = (0..n).map(|i| Rational::from_i64(i64::from(i == axis))).collect();
    zonal_solid_harmonic(n, k, &dir)
}

/// Floating-point variant for irrational axes (e.g. rotated coordinate axes).
pub fn zonal_solid_harmonic_f64(n: usize, k: u32, axis: &[f64]) -> Result<MultiPoly<f64>> {
    let norm: f64 = axis.iter().map(|a| a * a).sum();
    if (norm - 1.0).abs() > 1e-12 {
        return domain("zonal axis must have unit norm");
    }
    zonal_generic(n, k, axis)
}

/// Harmonic part of `p` in the decomposition `p = h + |x|^2 q`.
///
/// Applied per homogeneous component. For `p` of degree `m`,
/// `h = Σ_j c_j |x|^{2j} Δ^j p` with `c_0 = 1` and
/// `c_{j+1} = −c_j / (2 (j+1) (n + 2m − 2j − 4))`, which is exactly the
/// solution of `Δ(|x|^2 q) = Δp` obtained by peeling one power of `|x|^2`
/// at a time. Harmonic input is returned unchanged.
pub fn harmonic_projection(p: &ExactPoly) -> ExactPoly {
    let n = p.dimension() as i64;
    let r2 = ExactPoly::radius_sq(p.dimension());
    let Some(top) = p.degree() else { return p.clone() };
    let mut out = ExactPoly::zero(p.dimension());
    for m in 0..=top {
        let part = p.homogeneous_part(m);
        if part.is_zero() {
            continue;
        }
        let mut lap = part.laplacian();
        let mut acc = part;
        let mut coeff = Rational::from_i64(1);
        let mut r2j = ExactPoly::one(p.dimension());
        let mut j = 0i64;
        while !lap.is_zero() {
            coeff = -coeff / Rational::from_i64(2 * (j + 1) * (n + 2 * m as i64 - 2 * j - 4));
            r2j = &r2j * &r2;
            acc = &acc + &(&r2j * &lap).scale(&coeff);
            lap = lap.laplacian();
            j += 1;
        }
        out = &out + &acc;
    }
    out
}

/// Random homogeneous degree-`k` polynomial with coefficients in `[-3, 3]`,
/// projected onto its harmonic part. Draws repeat from the same stream until
/// the projection is nonzero, so the result is zero only when `n = 1, k >= 2`.
/// Deterministic in `seed`.
pub fn random_harmonic_polynomial(n: usize, k: u32, seed: u64) -> Result<HarmonicMap> {
    if n == 0 {
        return domain("random harmonic needs n >= 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = homogeneous_indices(n, k);
    let h = loop {
        let terms = indices.iter().map(|idx| (idx.clone(), Rational::from_i64(rng.random_range(-3..=3))));
        let h = harmonic_projection(&ExactPoly::from_terms(n, terms)?);
        if !h.is_zero() || (n == 1 && k >= 2) {
            break h;
        }
    };
    let mut map = HarmonicMap::scalar(h, MapKind::Random { k, seed });
    if map.degree.is_none() && map.body.components()[0].is_zero() {
        map.degree = Some(k);
    }
    Ok(map)
}

/// Highest zonal degree in [`test_family`].
pub const FAMILY_MAX_ZONAL: u32 = 5;
/// Highest random-harmonic degree in [`test_family`].
pub const FAMILY_MAX_RANDOM: u32 = 4;

/// The standard battery in dimension `n`: the identity map, zonal harmonics
/// about `e_1` of degrees `1..=5` and random harmonics of degrees `1..=4`.
/// Random members use the seed `seed + 1000 n + k`.
pub fn test_family(n: usize, seed: u64) -> Result<Vec<HarmonicMap>> {
    let mut out = vec![identity_map(n)?];
    for k in 1..=FAMILY_MAX_ZONAL {
        if n == 1 && k >= 2 {
            break;
        }
        out.push(zonal_on_axis(n, k, 0)?);
    }
    for k in 1..=FAMILY_MAX_RANDOM {
        let s = seed.wrapping_add(1000 * n as u64 + u64::from(k));
        let h = random_harmonic_polynomial(n, k, s)?;
        if !h.is_constant() {
            out.push(h);
        }
    }
    Ok(out)
}

/// All exponent vectors of total degree `k` in `n` variables, graded-lex order.
pub fn homogeneous_indices(n: usize, k: u32) -> Vec<MultiIndex> {
    fn rec(n: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() == n - 1 {
            prefix.push(k);
            out.push(MultiIndex::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in 0..=k {
            prefix.push(e);
            rec(n, k - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, k, &mut Vec::with_capacity(n), &mut out);
    }
    out.sort();
    out
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// `dim H_k(R^n) = C(n+k−1, k) − C(n+k−3, k−2)`, the second term absent for `k < 2`.
pub fn harmonic_space_dimension(n: usize, k: u32) -> Result<u128> {
    if n == 0 {
        return domain("dimension must be positive");
    }
    let (n, k) = (n as u64, u64::from(k));
    let all = binomial(n + k - 1, k);
    let traces = if k >= 2 { binomial(n + k - 3, k - 2) } else { 0 };
    Ok(all - traces)
}
