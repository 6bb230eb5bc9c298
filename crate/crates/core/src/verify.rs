//! Verification suites run by `kleinian verify`.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use crate::checks::{
    box_counting_dimension, cusp_scaling_check, global_measure_formula_check_with, resolved_scales,
    sample_fixed_points, sample_limit_set, GlobalFormulaOptions,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::geometry::{
    busemann, dist_to_geodesic, dist_to_ray, ray_point, side_from_cosine_rule,
    cosine_rule_constant, BPoint, BoundaryPoint, Ray, Vec3,
};
use crate::measure::{
    build_orbital_measure, conformality_check, schedule_s, shadow, shadow_lemma_report,
    AtomicMeasure, SphericalCap,
};
use crate::moebius::MoebiusMap;
use crate::orbit::{enumerate_orbit, estimate_delta, DeltaEstimate, OrbitTable};
use crate::presets::{GeneratorSet, PresetKind};
use crate::rng::SplitMix64;

pub const SUITES: [&str; 5] = [
    "geometry-identities",
    "shadow-lemma",
    "dimension-agreement",
    "cusp-scaling",
    "global-formula",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub value: f64,
    /// Human-readable pass condition, e.g. `<= 1e-9`.
    pub threshold: String,
    pub runtime: Duration,
    pub detail: String,
}

impl CheckResult {
    fn judged(name: &str, value: f64, threshold: &str, ok: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            value,
            threshold: threshold.to_string(),
            runtime: Duration::ZERO,
            detail,
        }
    }

    fn skipped(name: &str, reason: &str) -> Self {
        Self {
            name: name.to_string(),
            status: Status::Skip,
            value: f64::NAN,
            threshold: String::new(),
            runtime: Duration::ZERO,
            detail: reason.to_string(),
        }
    }

    fn failed(name: &str, err: &Error) -> Self {
        Self {
            name: name.to_string(),
            status: Status::Fail,
            value: f64::NAN,
            threshold: String::new(),
            runtime: Duration::ZERO,
            detail: err.to_string(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn any_failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    /// `key: value` lines. Runtimes are left out so that reruns are
    /// byte-identical; [`VerifyReport::summary`] shows them.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "{}.status: {}", c.name, c.status.name());
            let _ = writeln!(s, "{}.value: {:?}", c.name, c.value);
            if !c.threshold.is_empty() {
                let _ = writeln!(s, "{}.threshold: {}", c.name, c.threshold);
            }
            if !c.detail.is_empty() {
                let _ = writeln!(s, "{}.detail: {}", c.name, c.detail);
            }
        }
        let _ = writeln!(s, "failed: {}", self.checks.iter().filter(|c| c.status == Status::Fail).count());
        s
    }

    /// One line per check, with runtimes.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<4} {:<36} {:>12.4e} {:<22} {:>7.2}s {}",
                c.status.name(),
                c.name,
                c.value,
                c.threshold,
                c.runtime.as_secs_f64(),
                c.detail
            );
        }
        s
    }
}

/// Orbit, estimate and measure for one configuration, built on first use.
pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub gens: GeneratorSet,
    table: Option<OrbitTable>,
    delta: Option<DeltaEstimate>,
    measure: Option<AtomicMeasure>,
}

impl<'a> Context<'a> {
    pub fn new(config: &'a RunConfig) -> Result<Self> {
        Ok(Self {
            gens: config.generators()?,
            config,
            table: None,
            delta: None,
            measure: None,
        })
    }

    pub fn table(&mut self) -> Result<&OrbitTable> {
        if self.table.is_none() {
            self.table = Some(enumerate_orbit(&self.gens, self.config.radius, self.config.atom_cap)?);
        }
        Ok(self.table.as_ref().unwrap())
    }

    pub fn delta(&mut self) -> Result<&DeltaEstimate> {
        if self.delta.is_none() {
            let d = estimate_delta(self.table()?)?;
            self.delta = Some(d);
        }
        Ok(self.delta.as_ref().unwrap())
    }

    pub fn measure(&mut self) -> Result<&AtomicMeasure> {
        if self.measure.is_none() {
            let d = self.delta()?.delta_hat;
            let c = self.config.schedule_c;
            let table = self.table()?;
            let s = schedule_s(d, table.stored_radius(), c);
            self.measure = Some(build_orbital_measure(table, s)?);
        }
        Ok(self.measure.as_ref().unwrap())
    }
}

pub fn run_suites(config: &RunConfig, suites: &[String]) -> Result<VerifyReport> {
    for s in suites {
        if !SUITES.contains(&s.as_str()) {
            return Err(Error::UnknownSuite(s.clone()));
        }
    }
    let mut ctx = Context::new(config)?;
    let mut report = VerifyReport::default();
    for s in suites {
        let start = Instant::now();
        let mut checks = match s.as_str() {
            "geometry-identities" => geometry_identities(config.seed, &ctx.gens),
            "shadow-lemma" => shadow_suite(&mut ctx),
            "dimension-agreement" => dimension_suite(&mut ctx),
            "cusp-scaling" => cusp_suite(&mut ctx),
            _ => global_suite(&mut ctx),
        };
        let per = start.elapsed() / checks.len().max(1) as u32;
        for c in &mut checks {
            c.runtime = per;
        }
        report.checks.extend(checks);
    }
    Ok(report)
}

fn random_dir(rng: &mut SplitMix64) -> BoundaryPoint {
    BoundaryPoint::new(Vec3::new(rng.normal(), rng.normal(), rng.normal())).expect("nonzero")
}

fn random_point(rng: &mut SplitMix64, max_radius: f64) -> BPoint {
    BPoint::from_polar(&random_dir(rng), max_radius * rng.next_f64())
}

fn random_map(rng: &mut SplitMix64) -> MoebiusMap {
    let mut c = || Complex64::new(rng.normal(), rng.normal());
    MoebiusMap::new(c(), c(), c(), c()).expect("a random matrix is invertible")
}

const SAMPLES: usize = 500;

/// Sampled versions of the exact identities, on points within radius 8.
pub fn geometry_identities(seed: u64, gens: &GeneratorSet) -> Vec<CheckResult> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::new();
    let mut worst = |f: &mut dyn FnMut(&mut SplitMix64) -> f64| {
        (0..SAMPLES).map(|_| f(&mut rng)).fold(0.0, f64::max)
    };

    let e = worst(&mut |r| {
        let (x, y) = (random_point(r, 8.0), random_point(r, 8.0));
        (x.dist(&y) - y.dist(&x)).abs()
    });
    out.push(CheckResult::judged("geometry.distance_symmetry", e, "<= 1e-12", e <= 1e-12, String::new()));

    let e = worst(&mut |r| {
        let (x, y, z) = (random_point(r, 8.0), random_point(r, 8.0), random_point(r, 8.0));
        (x.dist(&z) - x.dist(&y) - y.dist(&z)).max(0.0)
    });
    out.push(CheckResult::judged("geometry.triangle_inequality", e, "<= 1e-9", e <= 1e-9, String::new()));

    let e = worst(&mut |r| {
        let (x, y) = (random_point(r, 8.0), random_point(r, 8.0));
        let models = (x.to_halfspace().dist(&y.to_halfspace()) - x.dist(&y)).abs();
        let g = if r.next_f64() < 0.5 && !gens.generators.is_empty() {
            gens.generators[r.below(gens.generators.len() as u64) as usize].map
        } else {
            random_map(r)
        };
        let moved = (g.apply_ball(&x).dist(&g.apply_ball(&y)) - x.dist(&y)).abs();
        models.max(moved) / x.dist(&y).max(1.0)
    });
    out.push(CheckResult::judged("geometry.model_equivariance", e, "<= 1e-9", e <= 1e-9, String::new()));

    let e = worst(&mut |r| {
        let xi = random_dir(r);
        let (x, y, z) = (random_point(r, 8.0), random_point(r, 8.0), random_point(r, 8.0));
        (busemann(&xi, x, z) - busemann(&xi, x, y) - busemann(&xi, y, z)).abs()
    });
    out.push(CheckResult::judged("geometry.busemann_cocycle", e, "<= 1e-10", e <= 1e-10, String::new()));

    let e = worst(&mut |r| {
        let xi = random_dir(r);
        let (x, y) = (random_point(r, 8.0), random_point(r, 8.0));
        let z = ray_point(&Ray::new(x, xi), 30.0);
        (busemann(&xi, x, y) - (x.dist(&z) - y.dist(&z))).abs()
    });
    out.push(CheckResult::judged("geometry.busemann_truncated_limit", e, "<= 1e-6", e <= 1e-6, String::new()));

    let e = worst(&mut |r| {
        let g = random_map(r);
        let (a, b) = (random_dir(r), random_dir(r));
        let lhs = g.apply_boundary(&a).chordal(&g.apply_boundary(&b)).powi(2);
        let rhs = g.conformal_derivative(&a) * g.conformal_derivative(&b) * a.chordal(&b).powi(2);
        ((lhs - rhs) / rhs).abs()
    });
    out.push(CheckResult::judged("geometry.cross_ratio", e, "<= 1e-8 relative", e <= 1e-8, String::new()));

    let e = worst(&mut |r| {
        let x = random_point(r, 6.0);
        let (xm, xp) = (random_dir(r), random_dir(r));
        if xm.chordal(&xp) < 1e-3 {
            return 0.0;
        }
        let Ok(d) = dist_to_geodesic(&x, &xm, &xp) else {
            return f64::INFINITY;
        };
        // The geodesic seen from its point nearest the centre.
        let mid = geodesic_base(&xm, &xp);
        let along = |t: f64| {
            let p = if t >= 0.0 {
                ray_point(&Ray::new(mid, xp), t)
            } else {
                ray_point(&Ray::new(mid, xm), -t)
            };
            x.dist(&p)
        };
        (d - golden_min(along, -40.0, 40.0)).abs() / d.max(1.0)
    });
    out.push(CheckResult::judged("geometry.dist_to_geodesic", e, "<= 1e-8", e <= 1e-8, String::new()));

    let e = worst(&mut |r| {
        let (a, b) = (12.0 * r.next_f64(), 12.0 * r.next_f64());
        let gamma = 0.05 + (std::f64::consts::PI - 0.1) * r.next_f64();
        let c = side_from_cosine_rule(a, b, gamma);
        let upper = (c - a - b).max(0.0);
        let lower = cosine_rule_constant(gamma).map_or(0.0, |k| (a + b - k - c).max(0.0));
        upper.max(lower)
    });
    out.push(CheckResult::judged("geometry.cosine_rule_bound", e, "<= 1e-9", e <= 1e-9, String::new()));

    let mut disagreements = 0usize;
    for _ in 0..50 {
        let y = random_point(&mut rng, 8.0);
        let k = 0.2 + 2.0 * rng.next_f64();
        let Ok(cap) = shadow(&y, k) else { continue };
        for _ in 0..200 {
            let eta = random_dir(&mut rng);
            if (eta.angle_to(&cap.center) - cap.angular_radius).abs() <= 1e-9 {
                continue;
            }
            let brute = dist_to_ray(&y, &Ray::from_origin(eta)) < k;
            disagreements += (brute != cap.contains(&eta)) as usize;
        }
    }
    out.push(CheckResult::judged(
        "geometry.shadow_membership",
        disagreements as f64,
        "== 0",
        disagreements == 0,
        String::new(),
    ));
    out
}

/// Point of the geodesic `(xm, xp)` closest to the centre.
fn geodesic_base(xm: &BoundaryPoint, xp: &BoundaryPoint) -> BPoint {
    let s = xm.u() + xp.u();
    if s.norm() < 1e-12 {
        return BPoint::origin();
    }
    // The closest point lies on the bisecting radius, at the distance where
    // the geodesic meets it.
    let dir = BoundaryPoint::new(s).expect("nonzero");
    let half_angle = 0.5 * xm.angle_to(xp);
    let t = (1.0 / half_angle.sin()).acosh();
    let p = BPoint::from_polar(&dir, t);
    debug_assert!(dist_to_geodesic(&p, xm, xp).map_or(true, |d| d < 1e-6));
    p
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}

fn shadow_suite(ctx: &mut Context) -> Vec<CheckResult> {
    let name = "shadow_lemma.spread";
    let run = |ctx: &mut Context| -> Result<Vec<CheckResult>> {
        let delta = ctx.delta()?.delta_hat;
        ctx.measure()?;
        let (table, mu) = (ctx.table.as_ref().unwrap(), ctx.measure.as_ref().unwrap());
        let rep = shadow_lemma_report(table, mu, delta, 2.0, (6.0, table.radius_cap() - 4.0))?;
        let mut out = vec![
            CheckResult::judged(
                name,
                rep.spread,
                "<= 1000",
                rep.spread <= 1000.0,
                format!("window [{:.3}, {:.3}], {} atoms", rep.window.0, rep.window.1, rep.ratios.len()),
            ),
            CheckResult::judged("shadow_lemma.min_ratio", rep.min, "> 0", rep.min > 0.0, String::new()),
        ];
        out.push(conformality(&ctx.gens, table, mu, delta));
        Ok(out)
    };
    run(ctx).unwrap_or_else(|e| vec![CheckResult::failed(name, &e)])
}

/// `sigma(g B) / int_B |g'|^delta` over shadows of orbit points at radius
/// 4 to 6, for the first generator; asserted on Schottky presets at R >= 16.
fn conformality(gens: &GeneratorSet, table: &OrbitTable, mu: &AtomicMeasure, delta: f64) -> CheckResult {
    let name = "shadow_lemma.conformality_spread";
    let caps: Vec<SphericalCap> = table
        .atoms()
        .iter()
        .filter(|a| (4.0..6.0).contains(&a.radius))
        .take(40)
        .filter_map(|a| shadow(&a.image(), 2.0).ok())
        .collect();
    if caps.is_empty() || gens.generators.is_empty() {
        return CheckResult::skipped(name, "no orbit points between radius 4 and 6");
    }
    let rep = conformality_check(mu, &gens.generators[0].map, delta, &caps);
    let asserted = gens.preset_kind == PresetKind::Schottky && table.stored_radius() >= 16.0;
    let mut c = CheckResult::judged(name, rep.spread, "<= 3", rep.spread <= 3.0, format!("{} caps", rep.ratios.len()));
    if !asserted {
        c.status = Status::Skip;
        c.detail.push_str("; reported only");
    }
    c
}

fn dimension_suite(ctx: &mut Context) -> Vec<CheckResult> {
    let name = "dimension.box_vs_delta";
    if ctx.gens.is_elementary() {
        return vec![CheckResult::skipped(name, "elementary group")];
    }
    let run = |ctx: &mut Context| -> Result<CheckResult> {
        let delta = ctx.delta()?.delta_hat;
        let depth = ctx.config.sample_depth.unwrap_or(ctx.config.radius - 7.0);
        let table = ctx.table()?;
        let sample = sample_limit_set(table, depth)?;
        let bd = box_counting_dimension(&sample, &resolved_scales(depth, 2f64.sqrt()))?;
        let gap = (bd.dim - delta).abs();
        Ok(CheckResult::judged(
            name,
            gap,
            "<= 0.05",
            gap <= 0.05,
            format!("box {:.4}, delta {:.4}, {} points", bd.dim, delta, sample.len()),
        ))
    };
    vec![run(ctx).unwrap_or_else(|e| CheckResult::failed(name, &e))]
}

fn cusp_suite(ctx: &mut Context) -> Vec<CheckResult> {
    let name = "cusp_scaling.slope";
    if ctx.gens.is_elementary() || !ctx.gens.cusps.iter().any(|c| c.rank() == 1) {
        return vec![CheckResult::skipped(name, "needs a non-elementary group with a rank-1 cusp")];
    }
    let run = |ctx: &mut Context| -> Result<Vec<CheckResult>> {
        let delta = ctx.delta()?.delta_hat;
        let t_max = (0.5 * ctx.config.radius - 2.0).min(9.0);
        let range = ctx.config.t_range.unwrap_or((3.0, t_max));
        let cusp = ctx.gens.cusps.iter().position(|c| c.rank() == 1).unwrap();
        let gens = ctx.gens.clone();
        let rep = cusp_scaling_check(&gens, cusp, ctx.measure()?, delta, range, 0.5)?;
        let gap = (rep.report.fitted_slope - rep.expected_slope).abs();
        let shift = (rep.translate_slope - rep.report.fitted_slope).abs();
        Ok(vec![
            CheckResult::judged(
                name,
                rep.report.fitted_slope,
                &format!("{:.4} +- 0.15", rep.expected_slope),
                gap <= 0.15,
                format!(
                    "t in [{}, {}]; direct cap-mass slope {}",
                    range.0,
                    range.1,
                    rep.direct_slope.map_or("n/a".into(), |s| format!("{s:.4}"))
                ),
            ),
            CheckResult::judged("cusp_scaling.translate_shift", shift, "<= 0.1", shift <= 0.1, String::new()),
        ])
    };
    run(ctx).unwrap_or_else(|e| vec![CheckResult::failed(name, &e)])
}

fn global_suite(ctx: &mut Context) -> Vec<CheckResult> {
    let name = "global_formula.slope";
    if ctx.gens.is_elementary() || ctx.gens.cusps.len() != 1 {
        return vec![CheckResult::skipped(name, "needs a non-elementary group with one cusp")];
    }
    let run = |ctx: &mut Context| -> Result<Vec<CheckResult>> {
        let delta = ctx.delta()?.delta_hat;
        let t_max = 0.5 * ctx.config.radius - 2.0;
        let (t0, t1) = ctx.config.t_range.map_or((2.0, t_max), |(a, b)| (a.min(2.0), b));
        let grid: Vec<f64> = (0..).map(|i| t0 + 0.5 * i as f64).take_while(|&t| t <= t1 + 1e-9).collect();
        let depth = ctx.config.anchor_depth.unwrap_or(8.0);
        let sample = sample_fixed_points(ctx.table()?, depth)?;
        let opts = GlobalFormulaOptions {
            seed: ctx.config.seed,
            ..GlobalFormulaOptions::default()
        };
        let gens = ctx.gens.clone();
        let rep = global_measure_formula_check_with(&gens, ctx.measure()?, delta, &sample, &grid, opts)?;
        let rows = rep.report.abscissas.len();
        let slope = rep.report.fitted_slope;
        let band = 1000f64.ln();
        Ok(vec![
            CheckResult::judged(
                name,
                slope,
                "1 +- 0.2, >= 300 rows",
                (slope - 1.0).abs() <= 0.2 && rows >= 300,
                format!("{rows} rows, {} skipped", rep.skipped),
            ),
            CheckResult::judged(
                "global_formula.thick_spread",
                rep.thick_spread,
                &format!("<= {band:.4}"),
                rep.thick_spread <= band,
                format!("{} thick rows", rep.thick_rows),
            ),
        ])
    };
    run(ctx).unwrap_or_else(|e| vec![CheckResult::failed(name, &e)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{build_preset, PresetSpec};

    #[test]
    fn geometry_identities_pass() {
        let g = build_preset(&PresetSpec::CyclicParabolic {
            alpha: Complex64::new(1.0, 0.0),
        })
        .unwrap();
        for c in geometry_identities(42, &g) {
            assert_eq!(c.status, Status::Pass, "{c:?}");
        }
    }

    #[test]
    fn geodesic_base_is_on_the_geodesic() {
        let mut rng = SplitMix64::new(8);
        for _ in 0..100 {
            let (a, b) = (random_dir(&mut rng), random_dir(&mut rng));
            let p = geodesic_base(&a, &b);
            assert!(dist_to_geodesic(&p, &a, &b).unwrap() < 1e-9);
        }
    }

    #[test]
    fn unknown_suite_is_rejected() {
        let cfg = RunConfig::parse("preset.kind = cyclic_parabolic\npreset.alpha_re = 1\n").unwrap();
        assert!(matches!(
            run_suites(&cfg, &["everything".to_string()]),
            Err(Error::UnknownSuite(_))
        ));
    }
}
