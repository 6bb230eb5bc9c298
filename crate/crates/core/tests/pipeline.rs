use kleinian::checks::{box_counting_dimension, resolved_scales, sample_limit_set};
use kleinian::config::RunConfig;
use kleinian::geometry::ChartValue;
use kleinian::measure::{build_orbital_measure, schedule_s};
use kleinian::orbit::{enumerate_orbit, estimate_delta};
use kleinian::presets::{GeneratorSet, PresetSpec};
use kleinian::render::{pixel_bounds, render_points, ChartView};
use kleinian::verify::{run_suites, Status};
use num_complex::Complex64;

const SCHOTTKY: &str = include_str!("../../../configs/schottky_a.conf");

fn schottky() -> (RunConfig, GeneratorSet) {
    let cfg = RunConfig::parse(SCHOTTKY).unwrap();
    let gens = cfg.generators().unwrap();
    (cfg, gens)
}

#[test]
fn cyclic_radii_match_the_integer_scan() {
    let cfg = RunConfig::parse("preset.kind = cyclic_parabolic\npreset.alpha_re = 1\nrun.radius = 10\n").unwrap();
    let table = enumerate_orbit(&cfg.generators().unwrap(), 10.0, 1_000_000).unwrap();
    let mut got: Vec<f64> = table.atoms().iter().map(|a| a.radius).collect();
    got.sort_by(f64::total_cmp);
    // d(o, o + n) = 2 asinh(|n| / 2) for the translation by n.
    let mut want: Vec<f64> = (-1000i64..=1000)
        .map(|n| 2.0 * (n.abs() as f64 / 2.0).asinh())
        .filter(|&d| d <= 10.0)
        .collect();
    want.sort_by(f64::total_cmp);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12, "{g} vs {w}");
    }
}

#[test]
fn orbit_and_measure_files_are_reproducible() {
    let (_, gens) = schottky();
    let csv = |r| {
        let t = enumerate_orbit(&gens, r, 1_000_000).unwrap();
        let mut a = Vec::new();
        t.write_csv(&mut a).unwrap();
        let d = estimate_delta(&t).unwrap();
        let mu = build_orbital_measure(&t, schedule_s(d.delta_hat, t.stored_radius(), 2.0)).unwrap();
        let mut b = Vec::new();
        mu.write_csv(&mut b).unwrap();
        (a, b)
    };
    assert_eq!(csv(12.0), csv(12.0));
}

#[test]
fn schottky_samples_lie_in_the_disks() {
    let (_, gens) = schottky();
    let table = enumerate_orbit(&gens, 14.0, 1_000_000).unwrap();
    let sample = sample_limit_set(&table, 8.0).unwrap();
    assert!(sample.len() > 100);
    for p in &sample.points {
        assert!(gens.in_ping_pong_union(p.to_chart()), "{p:?} outside every disk");
    }
}

#[test]
fn schottky_image_lights_only_disk_pixels() {
    let (cfg, gens) = schottky();
    let PresetSpec::Schottky { pairs } = &cfg.preset else { unreachable!() };
    let disks: Vec<_> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let table = enumerate_orbit(&gens, 16.0, 1_000_000).unwrap();
    let sample = sample_limit_set(&table, 11.0).unwrap();
    let (w, h, view) = (400, 300, ChartView::default());
    let img = render_points(&sample.points, w, h, view).unwrap();
    let header = format!("P6\n{w} {h}\n255\n");
    assert!(img.starts_with(header.as_bytes()));
    let body = &img[header.len()..];
    assert_eq!(body.len(), w * h * 3);
    let background = &body[..3];
    let mut lit = 0;
    for (k, px) in body.chunks(3).enumerate() {
        if px == background {
            continue;
        }
        lit += 1;
        let (lo, hi) = pixel_bounds(w, h, view, k).unwrap();
        // Closest point of the pixel rectangle to each disk centre.
        let meets = disks.iter().any(|d| {
            let q = Complex64::new(d.center.re.clamp(lo.re, hi.re), d.center.im.clamp(lo.im, hi.im));
            (q - d.center).norm() <= d.radius
        });
        assert!(meets, "pixel {k} lit outside the disks");
    }
    assert!(lit > 20, "{lit} pixels lit");
    assert_eq!(img, render_points(&sample.points, w, h, view).unwrap());
}

#[test]
fn schottky_box_dimension_is_between_zero_and_one() {
    let (_, gens) = schottky();
    let table = enumerate_orbit(&gens, 20.0, 10_000_000).unwrap();
    let sample = sample_limit_set(&table, 13.0).unwrap();
    let bd = box_counting_dimension(&sample, &resolved_scales(13.0, 2f64.sqrt())).unwrap();
    assert!(bd.dim > 0.3 && bd.dim < 0.8, "{}", bd.dim);
    assert!(!bd.degenerate);
}

#[test]
fn verify_reports_are_reproducible() {
    let (mut cfg, _) = schottky();
    cfg.radius = 16.0;
    let suites = vec!["geometry-identities".to_string(), "shadow-lemma".to_string()];
    let a = run_suites(&cfg, &suites).unwrap();
    let b = run_suites(&cfg, &suites).unwrap();
    assert_eq!(a.to_text(), b.to_text());
    assert!(!a.any_failed(), "{}", a.summary());
    // Every enabled check appears exactly once.
    let mut names: Vec<_> = a.checks.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), a.checks.len());
}

#[test]
fn elementary_presets_skip_the_cusped_suites() {
    let cfg = RunConfig::parse("preset.kind = cyclic_parabolic\npreset.alpha_re = 1\nrun.radius = 12\n").unwrap();
    let suites: Vec<String> = ["dimension-agreement", "cusp-scaling", "global-formula"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let report = run_suites(&cfg, &suites).unwrap();
    assert!(report.checks.iter().all(|c| c.status == Status::Skip));
    assert!(!report.any_failed());
}

#[test]
fn ping_pong_region_of_the_chart_origin_is_empty() {
    let (_, gens) = schottky();
    assert!(!gens.in_ping_pong_union(ChartValue::Finite(Complex64::new(0.0, 0.0))));
}
