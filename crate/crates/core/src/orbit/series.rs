//! Poincare series, critical-exponent estimation and the cusp series.

use super::enumerate::enumerate_orbit;
use super::table::{edge_index, OrbitTable, BIN_WIDTH};
use crate::error::{Error, Result};
use crate::presets::GeneratorSet;
use crate::regression::linear_fit;
use crate::rng::SplitMix64;

/// `sum_g exp(-s d(o, g o))` over the table.
pub fn poincare_partial_sum(table: &OrbitTable, s: f64) -> f64 {
    poincare_partial_sum_within(table, s, table.radius_cap())
}

/// The partial sum restricted to `d(o, g o) <= r`. Where the atom list is
/// truncated, bins of the complete histogram stand in for the missing atoms,
/// each counted at its midpoint.
pub fn poincare_partial_sum_within(table: &OrbitTable, s: f64, r: f64) -> f64 {
    let exact_limit = if table.truncated() { table.stored_radius() } else { f64::INFINITY };
    let mut sum: f64 = table
        .atoms()
        .iter()
        .take_while(|a| a.radius <= r)
        .filter(|a| a.radius < exact_limit)
        .map(|a| (-s * a.radius).exp())
        .sum();
    if table.truncated() && r > exact_limit {
        let bins = table.histogram().bins();
        let first = edge_index(exact_limit);
        let last = if r >= table.radius_cap() { bins.len() } else { edge_index(r).min(bins.len()) };
        for (k, &c) in bins.iter().enumerate().take(last).skip(first) {
            sum += c as f64 * (-s * (k as f64 + 0.5) * BIN_WIDTH).exp();
        }
    }
    sum
}

#[derive(Clone, Copy, Debug)]
pub struct DeltaOptions {
    pub bootstrap: usize,
    pub seed: u64,
    /// Spacing of the radii at which `log N(r)` is sampled.
    pub grid_step: f64,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        Self {
            bootstrap: 200,
            seed: 0x5eed,
            grid_step: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaEstimate {
    /// Least-squares slope of `log N(r)` over `[R/2, R]`.
    pub delta_hat: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub r_squared: f64,
    pub slope_se: f64,
    /// The `s` at which `P_R(s) = 2 P_{R/2}(s)`; at the critical exponent of a
    /// group with purely exponential growth the two halves carry equal mass.
    pub series_estimate: Option<f64>,
    /// Standard deviation of the slope over pairs-bootstrap resamples.
    pub bootstrap_sd: f64,
    pub fit_range: (f64, f64),
    pub points: usize,
}

pub fn estimate_delta(table: &OrbitTable) -> Result<DeltaEstimate> {
    estimate_delta_with(table, DeltaOptions::default())
}

pub fn estimate_delta_with(table: &OrbitTable, opts: DeltaOptions) -> Result<DeltaEstimate> {
    let r_max = table.radius_cap().min(table.histogram().max_radius());
    if r_max < 5.0 {
        return Err(Error::Range(format!(
            "orbit spans radii up to {r_max:.3}; at least 5 is needed to fit a growth rate"
        )));
    }
    let lo = 0.5 * r_max;
    let steps = ((r_max - lo) / opts.grid_step).floor() as usize;
    let xs: Vec<f64> = (0..=steps).map(|k| lo + k as f64 * opts.grid_step).collect();
    let ys: Vec<f64> = xs.iter().map(|&r| (table.count_within(r) as f64).ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or_else(|| Error::Range("degenerate radius grid".into()))?;

    let mut rng = SplitMix64::new(opts.seed);
    let mut slopes = Vec::with_capacity(opts.bootstrap);
    let (mut bx, mut by) = (vec![0.0; xs.len()], vec![0.0; xs.len()]);
    for _ in 0..opts.bootstrap {
        for k in 0..xs.len() {
            let i = rng.below(xs.len() as u64) as usize;
            bx[k] = xs[i];
            by[k] = ys[i];
        }
        if let Some(f) = linear_fit(&bx, &by) {
            slopes.push(f.slope);
        }
    }
    let bootstrap_sd = std_dev(&slopes);

    Ok(DeltaEstimate {
        delta_hat: fit.slope,
        intercept: fit.intercept,
        residual_rms: fit.residual_rms,
        r_squared: fit.r_squared,
        slope_se: fit.slope_se,
        series_estimate: series_transition(table, r_max),
        bootstrap_sd,
        fit_range: (lo, r_max),
        points: xs.len(),
    })
}

pub(crate) fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn series_transition(table: &OrbitTable, r: f64) -> Option<f64> {
    let ratio = |s: f64| {
        poincare_partial_sum_within(table, s, r) / poincare_partial_sum_within(table, s, 0.5 * r)
    };
    let (mut lo, mut hi) = (0.0, 4.0);
    if ratio(lo) < 2.0 || ratio(hi) > 2.0 {
        return None;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// One unit band of the cusp series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesBlock {
    pub lo: f64,
    pub hi: f64,
    /// `sum d e^{-delta d}` over parabolic elements with `lo <= d < hi`.
    pub sum: f64,
    /// Cumulative sum up to `hi`.
    pub partial: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CuspSeries {
    pub rank: usize,
    pub delta: f64,
    /// `delta <= rank / 2`: the series diverges.
    pub divergent: bool,
    pub blocks: Vec<SeriesBlock>,
    /// Radius past which the summand envelope `d e^{(rank/2 - delta) d}`
    /// decreases, plus one band.
    pub peak_radius: f64,
    /// Index of the first block at or beyond the peak.
    pub tail_start: usize,
    /// Successive tail blocks all shrink (and there are at least three).
    pub tail_decreasing: bool,
}

impl CuspSeries {
    pub fn tail(&self) -> &[SeriesBlock] {
        &self.blocks[self.tail_start.min(self.blocks.len())..]
    }
}

/// `sum_{p in P} d(o, p o) e^{-delta d(o, p o)}` in unit bands up to `radius`,
/// for the stabilizer of the first cusp of `gens`. Groups without cusps give
/// an empty table.
pub fn cusp_series_diagnostic(gens: &GeneratorSet, delta: f64, radius: f64) -> Result<CuspSeries> {
    if gens.cusps.is_empty() {
        return Ok(CuspSeries {
            rank: 0,
            delta,
            divergent: false,
            blocks: Vec::new(),
            peak_radius: 0.0,
            tail_start: 0,
            tail_decreasing: false,
        });
    }
    let sub = gens.cusp_subgroup(0)?;
    let rank = gens.cusps[0].rank();
    let table = enumerate_orbit(&sub, radius, 1)?;
    let bins = table.histogram().bins();
    let per = (1.0 / BIN_WIDTH).round() as usize;
    let full_bands = (radius.floor() as usize).min(bins.len() / per);
    let mut blocks = Vec::with_capacity(full_bands);
    let mut partial = 0.0;
    for j in 0..full_bands {
        let sum: f64 = bins[j * per..(j + 1) * per]
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let d = (j * per + i) as f64 * BIN_WIDTH + 0.5 * BIN_WIDTH;
                c as f64 * d * (-delta * d).exp()
            })
            .sum();
        partial += sum;
        blocks.push(SeriesBlock {
            lo: j as f64,
            hi: (j + 1) as f64,
            sum,
            partial,
        });
    }
    let excess = delta - 0.5 * rank as f64;
    let divergent = excess <= 1e-12;
    let peak_radius = if divergent { f64::INFINITY } else { 1.0 / excess + 1.0 };
    let tail_start = if divergent { blocks.len() } else { peak_radius.ceil() as usize };
    let tail = &blocks[tail_start.min(blocks.len())..];
    let tail_decreasing = tail.len() >= 3 && tail.windows(2).all(|w| w[1].sum < w[0].sum);
    Ok(CuspSeries {
        rank,
        delta,
        divergent,
        blocks,
        peak_radius,
        tail_start,
        tail_decreasing,
    })
}

/// Slowly increasing weight `h(t) = (1 + t)^beta` for modulated orbital
/// measures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Modulation {
    pub beta: f64,
}

impl Modulation {
    pub fn weight(&self, t: f64) -> f64 {
        (1.0 + t).powf(self.beta)
    }

    /// Beyond this `t`, `h(t + s) <= h(t) e^{eta s}` for every `s >= 0`.
    pub fn slow_growth_threshold(&self, eta: f64) -> f64 {
        (self.beta / eta - 1.0).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{build_preset, Disk, PresetSpec};
    use num_complex::Complex64;

    fn cyclic() -> GeneratorSet {
        build_preset(&PresetSpec::CyclicParabolic {
            alpha: Complex64::new(1.0, 0.0),
        })
        .unwrap()
    }

    #[test]
    fn identity_table_sums_to_one() {
        let t = enumerate_orbit(&cyclic(), 0.0, 10).unwrap();
        for s in [0.0, 0.5, 3.0] {
            assert_eq!(poincare_partial_sum(&t, s), 1.0);
        }
    }

    #[test]
    fn partial_sum_is_strictly_decreasing_in_s() {
        let t = enumerate_orbit(&cyclic(), 8.0, 1000).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let v = poincare_partial_sum(&t, 0.1 * k as f64);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn cyclic_partial_sum_matches_the_integer_scan() {
        let t = enumerate_orbit(&cyclic(), 20.0, usize::MAX).unwrap();
        let mut scan = 1.0;
        for n in 1..1_000_000i64 {
            let d = 2.0 * (0.5 * n as f64).asinh();
            if d > 20.0 {
                break;
            }
            scan += 2.0 * (-d).exp();
        }
        assert!((poincare_partial_sum(&t, 1.0) - scan).abs() < 1e-9);
    }

    #[test]
    fn truncated_tables_fall_back_on_the_histogram() {
        let full = enumerate_orbit(&cyclic(), 16.0, usize::MAX).unwrap();
        let capped = enumerate_orbit(&cyclic(), 16.0, 500).unwrap();
        assert!(capped.truncated());
        for s in [0.6, 1.0] {
            let a = poincare_partial_sum(&full, s);
            let b = poincare_partial_sum(&capped, s);
            assert!((a / b - 1.0).abs() < 1e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn short_tables_are_a_range_error() {
        let t = enumerate_orbit(&cyclic(), 4.0, 100).unwrap();
        assert!(matches!(estimate_delta(&t), Err(Error::Range(_))));
    }

    #[test]
    fn schottky_counts_grow_monotonically() {
        let g = build_preset(&PresetSpec::Schottky {
            pairs: vec![
                (Disk::new(Complex64::new(-1.0, 0.0), 0.5), Disk::new(Complex64::new(1.0, 0.0), 0.5)),
                (Disk::new(Complex64::new(0.0, -1.0), 0.5), Disk::new(Complex64::new(0.0, 1.0), 0.5)),
            ],
        })
        .unwrap();
        let t = enumerate_orbit(&g, 16.0, usize::MAX).unwrap();
        let counts: Vec<u64> = (0..=64).map(|k| t.count_within(0.25 * k as f64)).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        let est = estimate_delta(&t).unwrap();
        assert!(est.delta_hat > 0.2 && est.delta_hat < 1.0);
    }

    #[test]
    fn schottky_has_no_cusp_series() {
        let g = build_preset(&PresetSpec::Schottky {
            pairs: vec![
                (Disk::new(Complex64::new(-1.0, 0.0), 0.5), Disk::new(Complex64::new(1.0, 0.0), 0.5)),
                (Disk::new(Complex64::new(0.0, -1.0), 0.5), Disk::new(Complex64::new(0.0, 1.0), 0.5)),
            ],
        })
        .unwrap();
        let c = cusp_series_diagnostic(&g, 0.7, 20.0).unwrap();
        assert!(c.blocks.is_empty());
    }

    #[test]
    fn rank_one_series_at_three_quarters_has_shrinking_tail() {
        let c = cusp_series_diagnostic(&cyclic(), 0.75, 30.0).unwrap();
        assert!(!c.divergent);
        assert!(c.tail_decreasing);
        // exact per-band sums from the integer scan
        let mut oracle = vec![0.0; 30];
        for n in 1..10_000_000i64 {
            let d = 2.0 * (0.5 * n as f64).asinh();
            if d >= 30.0 {
                break;
            }
            oracle[d.floor() as usize] += 2.0 * d * (-0.75 * d).exp();
        }
        for (b, o) in c.blocks.iter().zip(&oracle).skip(5) {
            assert!((b.sum / o - 1.0).abs() < 5e-3, "{} vs {}", b.sum, o);
        }
        // block j is close to the integral of r e^{-r/4} over [j, j + 1]
        let t = c.tail();
        let (a, b) = (t[t.len() - 2], t[t.len() - 1]);
        let expected = (-0.25f64).exp() * (b.lo + 0.5) / (a.lo + 0.5);
        assert!((b.sum / a.sum - expected).abs() < 0.01);
    }

    #[test]
    fn critical_delta_is_flagged_divergent() {
        let c = cusp_series_diagnostic(&cyclic(), 0.5, 20.0).unwrap();
        assert!(c.divergent);
        assert!(!c.tail_decreasing);
    }

    #[test]
    fn modulation_grows_slowly_past_its_threshold() {
        let h = Modulation { beta: 2.0 };
        let eta = 0.3;
        let t0 = h.slow_growth_threshold(eta);
        for &t in &[t0, t0 + 1.0, t0 + 10.0] {
            for &s in &[0.0, 0.5, 3.0, 40.0] {
                assert!(h.weight(t + s) <= h.weight(t) * (eta * s).exp() * (1.0 + 1e-12));
            }
        }
    }
}
