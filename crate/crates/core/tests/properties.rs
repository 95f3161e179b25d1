//! Invariants over random polynomial families.

use harmonic_ball::energetics::{dirichlet_energy, normal_energy, surface_dirichlet, surface_energy_total};
use harmonic_ball::harmonics::{
    harmonic_projection, random_harmonic_polynomial, zonal_on_axis, zonal_solid_harmonic_f64, HarmonicMap, MapKind,
};
use harmonic_ball::identities::{green_residual, pohozaev_residual};
use harmonic_ball::integration::{mc_poly_sphere, QuadratureSpec};
use harmonic_ball::polynomial::text::{format_exact, parse_exact};
use harmonic_ball::polynomial::{givens_rotation, ExactPoly, MultiIndex, Rational, VectorPoly};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(a, b)| Rational::new(a.into(), b.into()))
}

fn poly_in(n: usize) -> impl Strategy<Value = ExactPoly> {
    prop::collection::vec((prop::collection::vec(0u32..=3, n), rational()), 0..6).prop_map(move |terms| {
        ExactPoly::from_terms(n, terms.into_iter().map(|(e, c)| (MultiIndex::new(e), c))).unwrap()
    })
}

fn poly() -> impl Strategy<Value = ExactPoly> {
    (1usize..=4).prop_flat_map(poly_in)
}

fn poly_pair() -> impl Strategy<Value = (ExactPoly, ExactPoly)> {
    (1usize..=4).prop_flat_map(|n| (poly_in(n), poly_in(n)))
}

fn harmonic() -> impl Strategy<Value = HarmonicMap> {
    (2usize..=5, 1u32..=4, any::<u64>()).prop_map(|(n, k, seed)| random_harmonic_polynomial(n, k, seed).unwrap())
}

fn point(n: usize, radius: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-radius..radius, n)
}

/// Rotation by the angle with cosine 3/5 in the plane of the first two coordinates.
fn exact_rotation(n: usize) -> Vec<Vec<Rational>> {
    let r = |a: i64| Rational::new(a.into(), 5.into());
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (i, j) {
                    (0, 0) | (1, 1) => r(3),
                    (0, 1) => r(-4),
                    (1, 0) => r(4),
                    _ if i == j => r(5),
                    _ => r(0),
                })
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_is_linear((p, q) in poly_pair(), a in rational()) {
        let lhs = (&p.scale(&a) + &q).laplacian();
        let rhs = &p.laplacian().scale(&a) + &q.laplacian();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn add_then_subtract((p, q) in poly_pair()) {
        prop_assert_eq!(&(&p + &q) - &q, p);
    }

    #[test]
    fn text_round_trip(p in poly()) {
        let text = format_exact(&p);
        prop_assert_eq!(parse_exact(&text, p.dimension()).unwrap(), p);
    }

    #[test]
    fn projection_is_harmonic(p in poly()) {
        let h = harmonic_projection(&p);
        prop_assert!(h.is_harmonic());
        prop_assert_eq!(harmonic_projection(&h), h);
    }

    #[test]
    fn euler_relation_on_homogeneous_parts(p in poly(), t in 0.1f64..2.0) {
        for d in 0..=12 {
            let h = p.homogeneous_part(d);
            prop_assert_eq!(h.euler(), h.scale(&Rational::from_integer(d.into())));
            let x: Vec<f64> = (0..p.dimension()).map(|i| 0.3 - 0.1 * i as f64).collect();
            let tx: Vec<f64> = x.iter().map(|v| v * t).collect();
            let (a, b) = (h.evaluate(&tx).unwrap(), t.powi(d as i32) * h.evaluate(&x).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn zonal_rotation_invariance(n in 2usize..=5, k in 1u32..=5, angles in prop::collection::vec(-3.0f64..3.0, 1..4)) {
        let rot = givens_rotation(n, &angles);
        let axis: Vec<f64> = rot.iter().map(|row| row[0]).collect();
        let rotated = zonal_solid_harmonic_f64(n, k, &axis).unwrap().compose_linear(&rot).unwrap();
        let base = zonal_on_axis(n, k, 0).unwrap().body().components()[0].lower();
        prop_assert!(rotated.max_coefficient_distance(&base) < 1e-10);
    }

    #[test]
    fn energy_is_rotation_invariant(u in harmonic(), r in 0.2f64..=1.0) {
        let n = u.dimension();
        let rot = exact_rotation(n);
        let comps = u.body().components().iter().map(|c| c.compose_linear(&rot).unwrap()).collect();
        let v = HarmonicMap::from_map(VectorPoly::new(n, comps).unwrap(), MapKind::Custom);
        prop_assert!(v.certified());
        let exact = QuadratureSpec::exact();
        let (a, b) = (dirichlet_energy(&u, r, &exact).unwrap().value, dirichlet_energy(&v, r, &exact).unwrap().value);
        prop_assert!((a - b).abs() <= 1e-13 * a.abs());
    }

    #[test]
    fn energy_scales_quadratically(u in harmonic(), num in 1i64..9, r in 0.2f64..=1.0) {
        let lambda = Rational::new(num.into(), 3.into());
        let v = u.scaled(&lambda);
        let exact = QuadratureSpec::exact();
        let (a, b) = (dirichlet_energy(&u, r, &exact).unwrap().value, dirichlet_energy(&v, r, &exact).unwrap().value);
        let l2 = (num as f64 / 3.0).powi(2);
        prop_assert!((b - l2 * a).abs() <= 1e-13 * b.abs());
    }

    #[test]
    fn residuals_are_scale_invariant(u in harmonic(), num in 1i64..50, r in 0.2f64..=1.0) {
        let v = u.scaled(&Rational::new(num.into(), 7.into()));
        let exact = QuadratureSpec::exact();
        for w in [&u, &v] {
            prop_assert!(pohozaev_residual(w, r, &exact).unwrap().normalized_residual < 1e-10);
            prop_assert!(green_residual(w, r, &exact).unwrap().normalized_residual < 1e-10);
        }
    }

    #[test]
    fn energy_increases_with_radius(u in harmonic(), a in 0.05f64..0.95, gap in 0.01f64..0.05) {
        let exact = QuadratureSpec::exact();
        let b = (a + gap).min(1.0);
        prop_assert!(dirichlet_energy(&u, a, &exact).unwrap().value < dirichlet_energy(&u, b, &exact).unwrap().value);
    }

    #[test]
    fn surface_energy_splits(u in harmonic(), r in 0.2f64..=1.0) {
        let exact = QuadratureSpec::exact();
        let total = surface_energy_total(&u, r, &exact).unwrap().value;
        let parts = normal_energy(&u, r, &exact).unwrap().value + surface_dirichlet(&u, r, &exact).unwrap().value;
        prop_assert!((total - parts).abs() <= 1e-12 * total);
    }

    #[test]
    fn evaluation_matches_lowered(p in poly(), x in point(4, 1.0)) {
        let x = &x[..p.dimension()];
        let (a, b) = (p.evaluate(x).unwrap(), p.lower().evaluate(x).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn monte_carlo_is_deterministic_across_pools(u in harmonic(), seed in any::<u64>()) {
        let p = u.body().components()[0].clone();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| mc_poly_sphere(&p, 1.0, 100_000, seed).unwrap())
        };
        let (a, b) = (run(1), run(4));
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert_eq!(a.standard_error.to_bits(), b.standard_error.to_bits());
    }
}
