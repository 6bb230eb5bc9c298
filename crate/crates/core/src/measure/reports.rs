use std::io;

use super::{build_orbital_measure, schedule_s, shadow, AtomicMeasure, SphericalCap};
use crate::error::{Error, Result};
use crate::geometry::BoundaryPoint;
use crate::moebius::MoebiusMap;
use crate::orbit::{enumerate_orbit, estimate_delta, OrbitTable};
use crate::presets::GeneratorSet;

#[derive(Clone, Copy, Debug)]
pub struct ShadowLemmaOptions {
    /// Smallest admissible shadow radius.
    pub r0: f64,
    /// Atoms closer than this to the stored radius are left out.
    pub margin: f64,
    /// Evenly spaced subsample when the window holds more atoms.
    pub max_atoms: usize,
}

impl Default for ShadowLemmaOptions {
    fn default() -> Self {
        Self {
            r0: 2.0,
            margin: 4.0,
            max_atoms: 20_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShadowRatio {
    /// Index into the orbit table.
    pub atom: usize,
    pub radius: f64,
    pub mass: f64,
    /// `mass * e^{delta * radius}`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShadowLemmaReport {
    pub r: f64,
    pub delta: f64,
    pub window: (f64, f64),
    pub ratios: Vec<ShadowRatio>,
    /// Atoms in the window before subsampling.
    pub window_atoms: usize,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

impl ShadowLemmaReport {
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["atom", "radius", "mass", "ratio"])?;
        for r in &self.ratios {
            w.write_record([
                r.atom.to_string(),
                format!("{:?}", r.radius),
                format!("{:?}", r.mass),
                format!("{:?}", r.ratio),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn shadow_lemma_report(
    table: &OrbitTable,
    mu: &AtomicMeasure,
    delta: f64,
    r: f64,
    window: (f64, f64),
) -> Result<ShadowLemmaReport> {
    shadow_lemma_report_with(table, mu, delta, r, window, ShadowLemmaOptions::default())
}

/// `sigma(O(g o, r)) e^{delta d(o, g o)}` for the orbit points in the window.
pub fn shadow_lemma_report_with(
    table: &OrbitTable,
    mu: &AtomicMeasure,
    delta: f64,
    r: f64,
    window: (f64, f64),
    opts: ShadowLemmaOptions,
) -> Result<ShadowLemmaReport> {
    if !(r >= opts.r0) {
        return Err(Error::Argument(format!(
            "shadow radius {r} is below r0 = {}",
            opts.r0
        )));
    }
    let lo = window.0.max(0.0);
    let hi = window.1.min(mu.r_used - opts.margin);
    let in_window: Vec<usize> = table
        .atoms()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.radius >= lo && a.radius <= hi && a.radius > 0.0)
        .map(|(i, _)| i)
        .collect();
    if in_window.is_empty() {
        return Err(Error::Range(format!(
            "no orbit points with radius in [{lo:.3}, {hi:.3}]"
        )));
    }
    let step = in_window.len().div_ceil(opts.max_atoms.max(1));
    let ratios: Vec<ShadowRatio> = in_window
        .iter()
        .step_by(step)
        .map(|&i| {
            let a = &table.atoms()[i];
            let cap = shadow(&a.image(), r).expect("r is positive");
            let mass = mu.cap_mass(&cap);
            ShadowRatio {
                atom: i,
                radius: a.radius,
                mass,
                ratio: mass * (delta * a.radius).exp(),
            }
        })
        .collect();
    let min = ratios.iter().map(|x| x.ratio).fold(f64::INFINITY, f64::min);
    let max = ratios.iter().map(|x| x.ratio).fold(0.0, f64::max);
    Ok(ShadowLemmaReport {
        r,
        delta,
        window: (lo, hi),
        window_atoms: in_window.len(),
        ratios,
        min,
        max,
        spread: if min > 0.0 { max / min } else { f64::INFINITY },
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayRow {
    pub angular_radius: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayTable {
    pub point: BoundaryPoint,
    pub s_used: f64,
    pub r_used: f64,
    pub rows: Vec<DecayRow>,
    /// Masses strictly decrease as the radii decrease.
    pub decreasing: bool,
}

impl DecayTable {
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "radius_cap", "angular_radius", "mass"])?;
        for r in &self.rows {
            w.write_record([self.s_used, self.r_used, r.angular_radius, r.mass].map(|x| format!("{x:?}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Masses of caps about `xi`, listed from the largest radius down.
pub fn parabolic_point_mass_diagnostic(
    mu: &AtomicMeasure,
    xi: &BoundaryPoint,
    radii: &[f64],
) -> Result<DecayTable> {
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| b.total_cmp(a));
    let rows = radii
        .iter()
        .map(|&r| {
            let cap = SphericalCap::new(*xi, r)?;
            Ok(DecayRow {
                angular_radius: r,
                mass: mu.cap_mass(&cap),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let decreasing = rows.windows(2).all(|w| w[1].mass < w[0].mass);
    Ok(DecayTable {
        point: *xi,
        s_used: mu.s_used,
        r_used: mu.r_used,
        rows,
        decreasing,
    })
}

/// The same diagnostic along the schedule `s = delta_hat(R) + c / R`, one
/// table per orbit radius.
pub fn parabolic_mass_schedule(
    gens: &GeneratorSet,
    xi: &BoundaryPoint,
    radii: &[f64],
    depths: &[f64],
    c: f64,
    atom_cap: usize,
) -> Result<Vec<DecayTable>> {
    depths
        .iter()
        .map(|&depth| {
            let table = enumerate_orbit(gens, depth, atom_cap)?;
            let est = estimate_delta(&table)?;
            let mu = build_orbital_measure(&table, schedule_s(est.delta_hat, depth, c))?;
            parabolic_point_mass_diagnostic(&mu, xi, radii)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConformalityReport {
    /// Per cap: `sigma(g B)` and `int_B |g'|^delta d sigma`.
    pub pairs: Vec<(f64, f64)>,
    pub ratios: Vec<f64>,
    /// `max / min` of the ratios.
    pub spread: f64,
}

/// Compares `sigma(g B)` with the transported mass `int_B |g'|^delta`,
/// which agree for a conformal density of exponent `delta`.
pub fn conformality_check(
    mu: &AtomicMeasure,
    g: &MoebiusMap,
    delta: f64,
    caps: &[SphericalCap],
) -> ConformalityReport {
    let ginv = g.inverse();
    let pulled: Vec<BoundaryPoint> = mu
        .atoms()
        .iter()
        .map(|a| ginv.apply_boundary(&a.direction))
        .collect();
    let mut pairs = Vec::new();
    for cap in caps {
        let image_mass: f64 = mu
            .atoms()
            .iter()
            .zip(&pulled)
            .filter(|(_, p)| cap.contains(p))
            .map(|(a, _)| a.weight)
            .sum();
        let transported: f64 = mu
            .atoms_in(cap)
            .into_iter()
            .map(|i| {
                let a = &mu.atoms()[i];
                a.weight * g.conformal_derivative(&a.direction).powf(delta)
            })
            .sum();
        if image_mass > 0.0 && transported > 0.0 {
            pairs.push((image_mass, transported));
        }
    }
    let ratios: Vec<f64> = pairs.iter().map(|(a, b)| a / b).collect();
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    ConformalityReport {
        spread: if ratios.is_empty() { f64::NAN } else { max / min },
        pairs,
        ratios,
    }
}
