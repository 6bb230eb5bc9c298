use std::io;

use num_complex::Complex64;

use super::sample::LimitSetSample;
use crate::error::{Error, Result};
use crate::geometry::{BPoint, BoundaryPoint, ChartValue};
use crate::measure::{horizon_cap, shadow, AtomicMeasure, SphericalCap};
use crate::presets::{strip_coordinate, GeneratorSet};
use crate::regression::{linear_fit, LinearFit};
use crate::rng::SplitMix64;

/// Regression of log masses against an abscissa.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub abscissas: Vec<f64>,
    pub log_masses: Vec<f64>,
    pub fitted_slope: f64,
    pub residual: f64,
    pub fit: LinearFit,
    /// `d(xi(t), G o)` per row, when the rows come from sampled points.
    pub predictor: Option<Vec<f64>>,
}

impl ScalingReport {
    fn new(abscissas: Vec<f64>, log_masses: Vec<f64>, predictor: Option<Vec<f64>>) -> Result<Self> {
        let fit = linear_fit(&abscissas, &log_masses)
            .ok_or_else(|| Error::Range(format!("{} rows are too few to fit", abscissas.len())))?;
        Ok(Self {
            fitted_slope: fit.slope,
            residual: fit.residual_rms,
            fit,
            abscissas,
            log_masses,
            predictor,
        })
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["abscissa", "log_mass", "orbit_distance"])?;
        for (i, (x, y)) in self.abscissas.iter().zip(&self.log_masses).enumerate() {
            let p = self.predictor.as_ref().map_or(String::new(), |p| format!("{:?}", p[i]));
            w.write_record([format!("{x:?}"), format!("{y:?}"), p])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CuspScalingReport {
    /// `log sigma_o(V(o, xi, t))` against `t`, with the cusp sum transported
    /// from the base fundamental strip.
    pub report: ScalingReport,
    pub rank: usize,
    /// `k - 2 delta`.
    pub expected_slope: f64,
    /// The same fit with the strip `p D` in place of `D`.
    pub translate_slope: f64,
    /// The fit using cap masses of the orbital measure directly; it sags once
    /// the caps are smaller than the orbit resolves.
    pub direct_slope: Option<f64>,
    /// `sigma_o(D)`.
    pub strip_mass: f64,
}

/// Scaling of `sigma_o(V(o, xi, t))` at the parabolic point `xi` of cusp
/// `cusp`. The cap is a union of translates `p^n D` of a fundamental strip,
/// and `sigma_o(p^n A) = int_A |(p^n)'|^delta d sigma_o`; the sum over `n`
/// is carried out per atom of `D`, with its tail in closed form.
pub fn cusp_scaling_check(
    gens: &GeneratorSet,
    cusp: usize,
    mu: &AtomicMeasure,
    delta: f64,
    t_range: (f64, f64),
    t_step: f64,
) -> Result<CuspScalingReport> {
    if gens.is_elementary() {
        return Err(Error::Argument(
            "cusp scaling needs a non-elementary group".into(),
        ));
    }
    let c = gens
        .cusps
        .get(cusp)
        .ok_or_else(|| Error::Argument(format!("preset has no cusp {cusp}")))?;
    if c.rank() != 1 || c.point.chordal(&BoundaryPoint::infinity()) > 1e-12 {
        return Err(Error::Argument(
            "cusp scaling is implemented for rank-1 cusps at the chart's infinity".into(),
        ));
    }
    if !(delta > 0.5) {
        return Err(Error::Argument(format!(
            "delta = {delta} must exceed 1/2 for the cusp sum to converge"
        )));
    }
    let alpha = c.translations[0];
    let (t0, t1) = t_range;
    let t_max = 0.5 * mu.r_used - 2.0;
    if !(t0 >= 2.0 && t1 <= t_max && t0 < t1 && t_step > 0.0) {
        return Err(Error::Range(format!(
            "t range [{t0}, {t1}] must lie within [2, {t_max:.3}]"
        )));
    }
    let ts: Vec<f64> = (0..)
        .map(|i| t0 + i as f64 * t_step)
        .take_while(|&t| t <= t1 + 1e-9)
        .collect();

    let strip = |shift: f64| -> Vec<(Complex64, f64)> {
        mu.atoms()
            .iter()
            .filter_map(|a| match a.direction.to_chart() {
                ChartValue::Finite(z) => {
                    let x = strip_coordinate(z, alpha) / alpha.norm() - shift;
                    (-0.5..0.5).contains(&x).then_some((z, a.weight))
                }
                ChartValue::Infinity => None,
            })
            .collect()
    };
    let base = strip(0.0);
    let shifted = strip(1.0);
    if base.is_empty() || shifted.is_empty() {
        return Err(Error::Range("no atoms in the fundamental strip".into()));
    }
    let strip_mass = base.iter().map(|(_, w)| w).sum();

    let log_masses = |atoms: &[(Complex64, f64)]| -> Vec<f64> {
        ts.iter()
            .map(|&t| {
                let big = t.exp();
                atoms
                    .iter()
                    .map(|&(z, w)| w * translate_sum(z, alpha, delta, big))
                    .sum::<f64>()
                    .ln()
            })
            .collect()
    };
    let report = ScalingReport::new(ts.clone(), log_masses(&base), None)?;
    let translate = ScalingReport::new(ts.clone(), log_masses(&shifted), None)?;

    let direct: Vec<(f64, f64)> = ts
        .iter()
        .filter_map(|&t| {
            let m = mu.cap_mass(&horizon_cap(&c.point, t).ok()?);
            (m > 0.0).then(|| (t, m.ln()))
        })
        .collect();
    let direct_slope = linear_fit(
        &direct.iter().map(|p| p.0).collect::<Vec<_>>(),
        &direct.iter().map(|p| p.1).collect::<Vec<_>>(),
    )
    .map(|f| f.slope);

    Ok(CuspScalingReport {
        report,
        rank: 1,
        expected_slope: 1.0 - 2.0 * delta,
        translate_slope: translate.fitted_slope,
        direct_slope,
        strip_mass,
    })
}

/// `sum_{n : |z + n alpha| >= big} ((1 + |z|^2) / (1 + |z + n alpha|^2))^delta`.
pub(crate) fn translate_sum(z: Complex64, alpha: Complex64, delta: f64, big: f64) -> f64 {
    let b = alpha.norm_sqr();
    // |z + n alpha|^2 = b (n + c)^2 + h^2.
    let c = (z * alpha.conj()).re / b;
    let h2 = (z.norm_sqr() - b * c * c).max(0.0);
    let a = 1.0 + h2;
    let half = ((big * big - h2).max(0.0) / b).sqrt();
    let up = (-c + half).ceil();
    // Keep the two half-lines disjoint when the excluded interval is empty.
    let down = (c + half).ceil().max(1.0 - up);
    let f = |y: f64| (a + b * y * y).powf(-delta);
    let tail = |start: f64, offset: f64| {
        // Sum of f(n + offset) over n >= start.
        let direct = 32usize.max((2.0 * (a / b).sqrt()).ceil() as usize);
        let mut s = 0.0;
        for m in 0..direct {
            s += f(start + m as f64 + offset);
        }
        let y = start + direct as f64 + offset;
        s + integral_tail(a, b, delta, y) + 0.5 * f(y)
            - (-delta * (a + b * y * y).powf(-delta - 1.0) * 2.0 * b * y) / 12.0
    };
    let scale = (1.0 + z.norm_sqr()).powf(delta);
    scale * (tail(up, c) + tail(down, -c))
}

/// `int_y^inf (a + b x^2)^{-delta} dx` for `b y^2 > a`, by the binomial
/// series in `a / (b x^2)`.
fn integral_tail(a: f64, b: f64, delta: f64, y: f64) -> f64 {
    let q = a / (b * y * y);
    debug_assert!(q < 1.0);
    let mut coef = 1.0;
    let mut pow = 1.0;
    let mut total = 0.0;
    for k in 0..60 {
        let kf = k as f64;
        let term = coef * pow / (2.0 * delta + 2.0 * kf - 1.0);
        total += term;
        if term.abs() < 1e-17 * total.abs() {
            break;
        }
        coef *= -(delta + kf) / (kf + 1.0);
        pow *= q;
    }
    b.powf(-delta) * y.powf(1.0 - 2.0 * delta) * total
}

#[derive(Clone, Copy, Debug)]
pub struct GlobalFormulaOptions {
    /// Pairs whose nearest orbit point is within this of the stored radius
    /// are skipped.
    pub truncation_margin: f64,
    /// `d(xi(t), G o)` at or below this counts as the thick part.
    pub thick_bound: f64,
    /// Number of sample points used (subsampled with `seed`).
    pub max_points: usize,
    pub seed: u64,
}

impl Default for GlobalFormulaOptions {
    fn default() -> Self {
        Self {
            truncation_margin: 2.0,
            thick_bound: 1.5,
            max_points: 200,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlobalFormulaReport {
    /// Response `log sigma_o(V) + delta t` against `(k - delta) d(xi(t), G o)`.
    pub report: ScalingReport,
    pub ts: Vec<f64>,
    pub skipped: usize,
    /// `max - min` of the response over thick-part rows.
    pub thick_spread: f64,
    pub thick_rows: usize,
}

/// Pooled check of `sigma_o(V(o, xi, t)) ~ e^{-delta t + (k - delta) d(xi(t), G o)}`.
pub fn global_measure_formula_check(
    gens: &GeneratorSet,
    mu: &AtomicMeasure,
    delta: f64,
    sample: &LimitSetSample,
    t_grid: &[f64],
) -> Result<GlobalFormulaReport> {
    global_measure_formula_check_with(gens, mu, delta, sample, t_grid, GlobalFormulaOptions::default())
}

pub fn global_measure_formula_check_with(
    gens: &GeneratorSet,
    mu: &AtomicMeasure,
    delta: f64,
    sample: &LimitSetSample,
    t_grid: &[f64],
    opts: GlobalFormulaOptions,
) -> Result<GlobalFormulaReport> {
    let k = match gens.cusps.as_slice() {
        [c] => c.rank() as f64,
        _ => {
            return Err(Error::Argument(
                "global formula check needs a preset with exactly one cusp".into(),
            ))
        }
    };
    let points = subsample(&sample.points, opts.max_points, opts.seed);
    let mut ts = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut dists = Vec::new();
    let mut skipped = 0;
    for xi in &points {
        for &t in t_grid {
            let x = BPoint::from_polar(xi, t);
            let near = mu.orbit_distance(&x);
            let mass = mu.cap_mass(&horizon_cap(xi, t)?);
            if near.radius > mu.r_used - opts.truncation_margin || mass <= 0.0 {
                skipped += 1;
                continue;
            }
            ts.push(t);
            xs.push((k - delta) * near.distance);
            ys.push(mass.ln() + delta * t);
            dists.push(near.distance);
        }
    }
    let thick: Vec<f64> = ys
        .iter()
        .zip(&dists)
        .filter(|(_, &d)| d <= opts.thick_bound)
        .map(|(y, _)| *y)
        .collect();
    let thick_spread = thick.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - thick.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GlobalFormulaReport {
        report: ScalingReport::new(xs, ys, Some(dists))?,
        ts,
        skipped,
        thick_spread: if thick.is_empty() { 0.0 } else { thick_spread },
        thick_rows: thick.len(),
    })
}

/// Deterministic subsample of at most `n` points.
pub(crate) fn subsample<T: Clone>(pts: &[T], n: usize, seed: u64) -> Vec<T> {
    if pts.len() <= n {
        return pts.to_vec();
    }
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let mut rng = SplitMix64::new(seed);
    for i in 0..n {
        let j = i + rng.below((pts.len() - i) as u64) as usize;
        idx.swap(i, j);
    }
    let mut chosen = idx[..n].to_vec();
    chosen.sort_unstable();
    chosen.into_iter().map(|i| pts[i].clone()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpperBoundReport {
    /// `sigma_o(O(y, k)) / exp(-delta d(o, y) + delta d(y, G o))` per point.
    pub ratios: Vec<f64>,
    pub orbit_distances: Vec<f64>,
    pub max: f64,
    pub median: f64,
    /// No ratio exceeds ten times the median.
    pub within_tenfold: bool,
}

/// Shadow masses of arbitrary points against the bound
/// `C exp(-delta d(o, y) + delta d(y, G o))`.
pub fn upper_bound_check(
    mu: &AtomicMeasure,
    delta: f64,
    y_points: &[BPoint],
    k: f64,
) -> Result<UpperBoundReport> {
    let mut ratios = Vec::with_capacity(y_points.len());
    let mut orbit_distances = Vec::with_capacity(y_points.len());
    for y in y_points {
        let d = mu.orbit_distance(y).distance;
        let mass = mu.cap_mass(&shadow(y, k)?);
        ratios.push(mass / (-delta * y.radius() + delta * d).exp());
        orbit_distances.push(d);
    }
    if ratios.is_empty() {
        return Err(Error::Argument("no points given".into()));
    }
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let median = median(&ratios);
    Ok(UpperBoundReport {
        within_tenfold: max <= 10.0 * median,
        ratios,
        orbit_distances,
        max,
        median,
    })
}

pub(crate) fn median(v: &[f64]) -> f64 {
    quantile(v, 0.5)
}

pub(crate) fn quantile(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    if s.is_empty() {
        return f64::NAN;
    }
    let pos = q * (s.len() - 1) as f64;
    let (i, f) = (pos.floor() as usize, pos.fract());
    if i + 1 < s.len() {
        s[i] * (1.0 - f) + s[i + 1] * f
    } else {
        s[i]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalExponents {
    /// Per point, `(min, max)` of `log sigma(B(xi, r)) / log r` over the radii.
    pub ranges: Vec<(f64, f64)>,
    /// Per point `max - min`.
    pub spreads: Vec<f64>,
    /// Quartiles `(q10, q25, q50, q75, q90)` of all exponents.
    pub quantiles: [f64; 5],
}

impl LocalExponents {
    /// Share of points whose whole exponent range lies within `tol` of `delta`.
    pub fn fraction_near(&self, delta: f64, tol: f64) -> f64 {
        let n = self
            .ranges
            .iter()
            .filter(|(lo, hi)| (lo - delta).abs() <= tol && (hi - delta).abs() <= tol)
            .count();
        n as f64 / self.ranges.len().max(1) as f64
    }
}

/// Empirical local exponents of the measure on chordal balls about the
/// sample points.
pub fn local_exponent_statistics(
    mu: &AtomicMeasure,
    sample: &LimitSetSample,
    radii: &[f64],
) -> Result<LocalExponents> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::Argument("radii must lie in (0, 1)".into()));
    }
    let mut ranges = Vec::new();
    let mut all = Vec::new();
    for xi in &sample.points {
        let mut exps = Vec::with_capacity(radii.len());
        for &r in radii {
            let m = mu.cap_mass(&SphericalCap::from_chordal(*xi, r)?);
            if m > 0.0 {
                exps.push(m.ln() / r.ln());
            }
        }
        if exps.is_empty() {
            continue;
        }
        let lo = exps.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ranges.push((lo, hi));
        all.extend(exps);
    }
    if ranges.is_empty() {
        return Err(Error::Range("no sample point carries mass at these radii".into()));
    }
    let q = |p| quantile(&all, p);
    Ok(LocalExponents {
        spreads: ranges.iter().map(|(a, b)| b - a).collect(),
        ranges,
        quantiles: [q(0.1), q(0.25), q(0.5), q(0.75), q(0.9)],
    })
}
