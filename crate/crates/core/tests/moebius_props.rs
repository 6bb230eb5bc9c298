use kleinian::geometry::{busemann, BPoint, BoundaryPoint, ChartValue, Vec3};
use kleinian::moebius::MoebiusMap;
use kleinian::presets::{build_preset, Disk, PresetSpec};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn map() -> impl Strategy<Value = MoebiusMap> {
    (complex(), complex(), complex(), complex())
        .prop_filter_map("singular", |(a, b, c, d)| {
            // Keep the matrices reasonably conditioned.
            let det = (a * d - b * c).norm();
            (det > 0.1).then(|| MoebiusMap::new(a, b, c, d).ok()).flatten()
        })
}

fn boundary_point() -> impl Strategy<Value = BoundaryPoint> {
    (-1.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(z, phi)| {
        let s = (1.0 - z * z).sqrt();
        BoundaryPoint::new(Vec3::new(s * phi.cos(), s * phi.sin(), z)).unwrap()
    })
}

fn ball_point() -> impl Strategy<Value = BPoint> {
    (boundary_point(), 0.0..8.0f64).prop_map(|(u, t)| BPoint::from_polar(&u, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn composition_matches_successive_application(g in map(), h in map(), xi in boundary_point(), x in ball_point()) {
        let gh = g * h;
        prop_assert!(gh.apply_boundary(&xi).chordal(&g.apply_boundary(&h.apply_boundary(&xi))) < 1e-9);
        let (a, b) = (gh.apply_ball(&x), g.apply_ball(&h.apply_ball(&x)));
        prop_assert!(a.dist(&b) < 1e-8 * (1.0 + x.radius()));
    }

    #[test]
    fn chordal_distances_scale_by_derivatives(g in map(), xi in boundary_point(), eta in boundary_point()) {
        let d = xi.chordal(&eta);
        prop_assume!(d > 1e-6);
        let lhs = g.apply_boundary(&xi).chordal(&g.apply_boundary(&eta)).powi(2);
        let rhs = g.conformal_derivative(&xi) * g.conformal_derivative(&eta) * d * d;
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-8, "lhs {lhs}, rhs {rhs}");
    }

    #[test]
    fn derivative_chain_rule(g in map(), h in map(), xi in boundary_point()) {
        let lhs = (g * h).conformal_derivative(&xi);
        let rhs = g.conformal_derivative(&h.apply_boundary(&xi)) * h.conformal_derivative(&xi);
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-9);
    }

    #[test]
    fn derivative_is_the_busemann_exponential(g in map(), xi in boundary_point()) {
        let b = busemann(&xi, g.inverse().image_of_origin(), BPoint::origin());
        let lhs = g.conformal_derivative(&xi);
        prop_assert!(((lhs - (-b).exp()) / lhs).abs() < 1e-8);
    }

    #[test]
    fn derivative_matches_the_chart_formula(g in map(), z in complex()) {
        // |g'(z)| (1 + |z|^2) / (1 + |g z|^2), with g'(z) = 1 / (c z + d)^2.
        let den = g.c * z + g.d;
        prop_assume!(den.norm() > 1e-3);
        let gz = (g.a * z + g.b) / den;
        let chart = (1.0 + z.norm_sqr()) / (den.norm_sqr() * (1.0 + gz.norm_sqr()));
        let sphere = g.conformal_derivative(&BoundaryPoint::from_chart(z));
        prop_assert!(((chart - sphere) / sphere).abs() < 1e-9);
    }

    #[test]
    fn isometries_preserve_distance(g in map(), x in ball_point(), y in ball_point()) {
        let d = x.dist(&y);
        prop_assert!((g.apply_ball(&x).dist(&g.apply_ball(&y)) - d).abs() <= 1e-9 * d.max(1.0));
    }
}

fn schottky() -> kleinian::presets::GeneratorSet {
    let c = |re, im| Complex64::new(re, im);
    build_preset(&PresetSpec::Schottky {
        pairs: vec![
            (Disk::new(c(-1.0, 0.0), 0.55), Disk::new(c(1.0, 0.0), 0.55)),
            (Disk::new(c(0.0, -1.0), 0.55), Disk::new(c(0.0, 1.0), 0.55)),
        ],
    })
    .unwrap()
}

proptest! {
    #[test]
    fn reduced_words_send_the_base_point_into_the_first_letter_region(
        letters in proptest::collection::vec(0usize..4, 1..12)
    ) {
        let gens = schottky();
        // Reduce: drop any letter that would cancel its predecessor.
        let mut word: Vec<usize> = Vec::new();
        for k in letters {
            if word.last().map_or(true, |&p| p ^ 1 != k) {
                word.push(k);
            }
        }
        let map = word.iter().fold(MoebiusMap::identity(), |m, &k| m * gens.generators[k].map);
        let image = map.apply_chart(ChartValue::Finite(Complex64::new(0.0, 0.0)));
        let first = word[0];
        let (pos, neg) = &gens.ping_pong[first / 2];
        let region = if first % 2 == 0 { pos } else { neg };
        prop_assert!(region.contains(image), "word {word:?} sent 0 to {image:?}");
    }
}
