//! Acceptance criteria on the shipped preset configurations. Prints one
//! pass/fail line per criterion and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use kleinian::checks::{
    box_counting_dimension, cusp_scaling_check, global_measure_formula_check_with, resolved_scales,
    sample_fixed_points, sample_limit_set, GlobalFormulaOptions,
};
use kleinian::config::RunConfig;
use kleinian::error::Result;
use kleinian::measure::{build_orbital_measure, schedule_s, shadow_lemma_report, AtomicMeasure};
use kleinian::orbit::{cusp_series_diagnostic, enumerate_orbit, estimate_delta_with, DeltaEstimate, DeltaOptions, OrbitTable};
use kleinian::presets::GeneratorSet;
use kleinian::verify::{geometry_identities, Status};

const PRESETS: [(&str, &str); 5] = [
    ("p1", include_str!("../../../configs/p1.conf")),
    ("p1i", include_str!("../../../configs/p1i.conf")),
    ("schottky_a", include_str!("../../../configs/schottky_a.conf")),
    ("schottky_b", include_str!("../../../configs/schottky_b.conf")),
    ("free_product", include_str!("../../../configs/free_product.conf")),
];

struct Run {
    name: &'static str,
    cfg: RunConfig,
    gens: GeneratorSet,
    table: OrbitTable,
    delta: DeltaEstimate,
    mu: AtomicMeasure,
    /// Enumeration plus estimation.
    seconds: f64,
}

fn prepare(name: &'static str, text: &str) -> Result<Run> {
    let cfg = RunConfig::parse(text)?;
    let gens = cfg.generators()?;
    let start = Instant::now();
    let table = enumerate_orbit(&gens, cfg.radius, cfg.atom_cap)?;
    let delta = estimate_delta_with(&table, DeltaOptions { seed: cfg.seed, ..DeltaOptions::default() })?;
    let seconds = start.elapsed().as_secs_f64();
    let mu = build_orbital_measure(&table, schedule_s(delta.delta_hat, table.stored_radius(), cfg.schedule_c))?;
    Ok(Run { name, cfg, gens, table, delta, mu, seconds })
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn parabolic_exponents(runs: &[Run]) -> Result<Outcome> {
    let mut pass = true;
    let mut detail = Vec::new();
    for (run, target, limit) in [(&runs[0], 0.5, 10.0), (&runs[1], 1.0, 60.0)] {
        let d = run.delta.delta_hat;
        pass &= (d - target).abs() <= 0.05 && run.seconds < limit;
        detail.push(format!(
            "{} R={} delta {d:.4} (target {target}) in {:.2}s (< {limit}s)",
            run.name, run.cfg.radius, run.seconds
        ));
    }
    outcome(pass, detail.join("; "))
}

fn strict_cusp_bound(fp: &Run) -> Result<Outcome> {
    let (d, sd) = (fp.delta.delta_hat, fp.delta.bootstrap_sd);
    let z = (d - 0.5) / sd;
    outcome(z >= 3.0, format!("delta {d:.4}, bootstrap sd {sd:.2e}, excess {z:.1} sd"))
}

fn dimension_agreement(runs: &[Run]) -> Result<Outcome> {
    let mut pass = true;
    let mut detail = Vec::new();
    for run in &runs[2..4] {
        let start = Instant::now();
        let depth = run.cfg.sample_depth.expect("Schottky configs set a sample depth");
        let sample = sample_limit_set(&run.table, depth)?;
        let bd = box_counting_dimension(&sample, &resolved_scales(depth, 2f64.sqrt()))?;
        let seconds = run.seconds + start.elapsed().as_secs_f64();
        let gap = (bd.dim - run.delta.delta_hat).abs();
        pass &= gap <= 0.05 && sample.len() >= 10_000 && seconds < 300.0;
        detail.push(format!(
            "{} box {:.4} delta {:.4} gap {gap:.4} on {} points in {seconds:.1}s",
            run.name,
            bd.dim,
            run.delta.delta_hat,
            sample.len()
        ));
    }
    outcome(pass, detail.join("; "))
}

fn shadow_lemma(runs: &[Run]) -> Result<Outcome> {
    let mut pass = true;
    let mut detail = Vec::new();
    for run in runs {
        let rep = shadow_lemma_report(&run.table, &run.mu, run.delta.delta_hat, 2.0, (6.0, run.cfg.radius - 4.0))?;
        pass &= rep.spread <= 1e3 && rep.min > 0.0;
        detail.push(format!(
            "{} spread {:.2} min {:.3} over [{:.2}, {:.2}]",
            run.name, rep.spread, rep.min, rep.window.0, rep.window.1
        ));
    }
    outcome(pass, detail.join("; "))
}

fn cusp_scaling(fp: &Run) -> Result<Outcome> {
    let d = fp.delta.delta_hat;
    let rep = cusp_scaling_check(&fp.gens, 0, &fp.mu, d, (3.0, 9.0), 0.5)?;
    let slope = rep.report.fitted_slope;
    outcome(
        (slope - (1.0 - 2.0 * d)).abs() <= 0.15,
        format!("slope {slope:.4} vs 1 - 2 delta = {:.4} over t in [3, 9]", 1.0 - 2.0 * d),
    )
}

fn global_formula(fp: &Run) -> Result<Outcome> {
    let t_max = 0.5 * fp.cfg.radius - 2.0;
    let grid: Vec<f64> = (0..).map(|i| 2.0 + 0.5 * i as f64).take_while(|&t| t <= t_max + 1e-9).collect();
    let sample = sample_fixed_points(&fp.table, fp.cfg.anchor_depth.unwrap_or(8.0))?;
    let opts = GlobalFormulaOptions { seed: fp.cfg.seed, ..GlobalFormulaOptions::default() };
    let rep = global_measure_formula_check_with(&fp.gens, &fp.mu, fp.delta.delta_hat, &sample, &grid, opts)?;
    let rows = rep.report.abscissas.len();
    let slope = rep.report.fitted_slope;
    let band = 1e3f64.ln();
    outcome(
        (slope - 1.0).abs() <= 0.2 && rows >= 300 && rep.thick_spread <= band,
        format!(
            "slope {slope:.4} over {rows} pairs (t in [2, {t_max}]); thick spread {:.3} <= {band:.3} on {} rows",
            rep.thick_spread, rep.thick_rows
        ),
    )
}

fn exact_identities(runs: &[Run]) -> Result<Outcome> {
    let start = Instant::now();
    let mut failed = Vec::new();
    let mut checks = 0;
    for run in runs {
        for c in geometry_identities(run.cfg.seed ^ run.name.len() as u64, &run.gens) {
            checks += 1;
            if c.status != Status::Pass {
                failed.push(format!("{} {} = {:e}", run.name, c.name, c.value));
            }
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    let detail = if failed.is_empty() {
        format!("{checks} sampled identity checks in {seconds:.2}s")
    } else {
        failed.join("; ")
    };
    outcome(failed.is_empty() && seconds < 30.0, detail)
}

fn cusp_series(fp: &Run) -> Result<Outcome> {
    let d = fp.delta.delta_hat;
    let s = cusp_series_diagnostic(&fp.gens, d, fp.cfg.radius)?;
    let tail: Vec<String> = s.tail().iter().take(4).map(|b| format!("{:.3e}", b.sum)).collect();
    outcome(
        d > 0.5 && s.tail_decreasing,
        format!(
            "delta {d:.4}, {} tail blocks from radius {}, first {}",
            s.tail().len(),
            s.tail_start,
            tail.join(" > ")
        ),
    )
}

fn main() -> ExitCode {
    let runs: Vec<Run> = match PRESETS.iter().map(|&(n, t)| prepare(n, t)).collect() {
        Ok(r) => r,
        Err(e) => {
            println!("FAIL setup: {e}");
            return ExitCode::FAILURE;
        }
    };
    let fp = &runs[4];
    let criteria: [(&str, Box<dyn Fn() -> Result<Outcome>>); 8] = [
        ("1 parabolic exponents", Box::new(|| parabolic_exponents(&runs))),
        ("2 strict cusp bound", Box::new(|| strict_cusp_bound(fp))),
        ("3 box dimension vs delta", Box::new(|| dimension_agreement(&runs))),
        ("4 shadow lemma", Box::new(|| shadow_lemma(&runs))),
        ("5 cusp scaling", Box::new(|| cusp_scaling(fp))),
        ("6 global measure formula", Box::new(|| global_formula(fp))),
        ("7 exact identities", Box::new(|| exact_identities(&runs))),
        ("8 cusp series tail", Box::new(|| cusp_series(fp))),
    ];
    let mut failures = 0;
    for (name, check) in &criteria {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += !pass as usize;
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
