//! Orbital approximations of the Patterson measure.

mod kdtree;
mod reports;
mod shadow;

use std::io;

use crate::error::{Error, Result};
use crate::geometry::{BPoint, BoundaryPoint, Vec3};
use crate::orbit::{estimate_delta_with, DeltaOptions, Modulation, OrbitTable};

use kdtree::CapIndex;

pub use reports::*;
pub use shadow::{horizon_cap, shadow, shadow_constant, SphericalCap};

/// Default constant `c` of the schedule `s = delta_hat + c / R`.
pub const DEFAULT_SCHEDULE_C: f64 = 2.0;

/// Exponent used for an orbit of radius `radius`.
pub fn schedule_s(delta_hat: f64, radius: f64, c: f64) -> f64 {
    delta_hat + c / radius
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureAtom {
    /// Radial projection of `g o`.
    pub direction: BoundaryPoint,
    pub weight: f64,
    /// `d(o, g o)`.
    pub radius: f64,
    pub image: BPoint,
}

/// Masses before normalization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalization {
    /// Partial Poincare sum over the stored orbit, identity included.
    pub partial_sum: f64,
    /// Term of the identity, which has no direction and is dropped.
    pub identity_weight: f64,
    /// Raw mass on the boundary atoms, `partial_sum - identity_weight`.
    pub mass_before: f64,
    pub mass_after: f64,
}

/// Weighted Dirac masses at the directions of orbit points.
#[derive(Clone, Debug)]
pub struct AtomicMeasure {
    atoms: Vec<MeasureAtom>,
    pub s_used: f64,
    pub r_used: f64,
    pub normalization: Normalization,
    pub warnings: Vec<String>,
    index: CapIndex,
}

/// `sum e^{-s d(o, g o)} D_{g o}`, normalized to a probability measure.
pub fn build_orbital_measure(table: &OrbitTable, s: f64) -> Result<AtomicMeasure> {
    build_weighted(table, s, |_| 1.0)
}

/// As [`build_orbital_measure`] with the extra factor `h(d(o, g o))`.
pub fn build_modulated_measure(
    table: &OrbitTable,
    s: f64,
    modulation: Modulation,
) -> Result<AtomicMeasure> {
    build_weighted(table, s, |r| modulation.weight(r))
}

fn build_weighted(table: &OrbitTable, s: f64, h: impl Fn(f64) -> f64) -> Result<AtomicMeasure> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Argument(format!("exponent s = {s} must be positive")));
    }
    let mut warnings = Vec::new();
    if let Ok(est) = estimate_delta_with(
        table,
        DeltaOptions {
            bootstrap: 0,
            ..DeltaOptions::default()
        },
    ) {
        if s <= est.delta_hat {
            warnings.push(format!(
                "s = {s} does not exceed the estimated critical exponent {:.4}",
                est.delta_hat
            ));
        }
    }
    if table.truncated() {
        warnings.push(format!(
            "orbit table truncated by the atom cap; measure uses radii up to {:.4} of {:.4}",
            table.stored_radius(),
            table.radius_cap()
        ));
    }

    let mut atoms = Vec::with_capacity(table.len());
    let mut identity_raw = 0.0;
    for a in table.atoms() {
        let image = a.image();
        match image.direction() {
            Some(direction) => atoms.push(MeasureAtom {
                direction,
                weight: h(a.radius),
                radius: a.radius,
                image,
            }),
            None => identity_raw += h(a.radius) * (-s * a.radius).exp(),
        }
    }
    if atoms.is_empty() {
        return Err(Error::Depth(
            "orbit table has no atoms besides the identity".into(),
        ));
    }
    // Weights relative to the smallest radius, so large s does not underflow.
    let r1 = atoms.iter().map(|a| a.radius).fold(f64::INFINITY, f64::min);
    for a in &mut atoms {
        a.weight *= (-s * (a.radius - r1)).exp();
    }
    let shifted: f64 = atoms.iter().map(|a| a.weight).sum();
    for a in &mut atoms {
        a.weight /= shifted;
    }
    let mass_before = shifted * (-s * r1).exp();
    let mass_after: f64 = atoms.iter().map(|a| a.weight).sum();

    let points: Vec<Vec3> = atoms.iter().map(|a| a.direction.u()).collect();
    let weights: Vec<f64> = atoms.iter().map(|a| a.weight).collect();
    Ok(AtomicMeasure {
        index: CapIndex::build(&points, &weights),
        atoms,
        s_used: s,
        r_used: table.stored_radius(),
        normalization: Normalization {
            partial_sum: mass_before + identity_raw,
            identity_weight: identity_raw,
            mass_before,
            mass_after,
        },
        warnings,
    })
}

/// Nearest orbit point to a query point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NearestAtom {
    pub distance: f64,
    /// `d(o, g o)` of the nearest orbit point (0 for the centre).
    pub radius: f64,
}

impl AtomicMeasure {
    pub fn atoms(&self) -> &[MeasureAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.normalization.mass_after
    }

    pub fn cap_mass(&self, cap: &SphericalCap) -> f64 {
        if cap.is_full() {
            return self.total_mass();
        }
        self.index.mass_within(&cap.center.u(), cap.chordal_radius())
    }

    /// Indices of the atoms in the cap, ascending.
    pub fn atoms_in(&self, cap: &SphericalCap) -> Vec<usize> {
        if cap.is_full() {
            return (0..self.atoms.len()).collect();
        }
        self.index.indices_within(&cap.center.u(), cap.chordal_radius())
    }

    /// `d(y, G o)` over the stored orbit, the centre included. Every orbit
    /// point within `D` of `y` has its direction in `shadow(y, D)`, so the
    /// search widens that shadow until it holds a point within `D`.
    pub fn orbit_distance(&self, y: &BPoint) -> NearestAtom {
        let mut best = NearestAtom {
            distance: y.radius(),
            radius: 0.0,
        };
        let mut reach = 1.0_f64;
        loop {
            let cap = shadow(y, reach).expect("reach is positive");
            for i in self.atoms_in(&cap) {
                let a = &self.atoms[i];
                let d = y.dist(&a.image);
                if d < best.distance || (d == best.distance && a.radius < best.radius) {
                    best = NearestAtom {
                        distance: d,
                        radius: a.radius,
                    };
                }
            }
            if best.distance <= reach || cap.is_full() {
                break;
            }
            reach *= 2.0;
        }
        best
    }

    /// Directions and weights as CSV (`ux, uy, uz, weight`).
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ux", "uy", "uz", "weight"])?;
        for a in &self.atoms {
            let u = a.direction.u();
            w.write_record([u.x, u.y, u.z, a.weight].map(|x| format!("{x:?}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn cap_mass(mu: &AtomicMeasure, cap: &SphericalCap) -> f64 {
    mu.cap_mass(cap)
}
