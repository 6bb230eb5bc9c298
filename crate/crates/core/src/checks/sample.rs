use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, ChartValue, Vec3};
use crate::moebius::Classification;
use crate::orbit::OrbitTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Radial projections of deep orbit points.
    OrbitProjection,
    /// Attracting (or parabolic) fixed points of group elements.
    WordFixedPoints,
}

impl Provenance {
    pub fn name(&self) -> &'static str {
        match self {
            Provenance::OrbitProjection => "orbit_projection",
            Provenance::WordFixedPoints => "word_fixed_points",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitSetSample {
    pub points: Vec<BoundaryPoint>,
    pub provenance: Provenance,
    /// Smallest orbit radius used.
    pub depth: f64,
}

impl LimitSetSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Directions of the atoms with radius at least `r_min`, thinned so that no
/// two kept points are within `e^{-r_min}` of each other.
pub fn sample_limit_set(table: &OrbitTable, r_min: f64) -> Result<LimitSetSample> {
    check_depth(table, r_min)?;
    let dirs = table
        .atoms()
        .iter()
        .filter(|a| a.radius >= r_min)
        .filter_map(|a| a.image().direction());
    finish(dirs, r_min, Provenance::OrbitProjection)
}

/// Attracting fixed points of the loxodromic elements with radius at least
/// `r_min`, and fixed points of the parabolic ones.
pub fn sample_fixed_points(table: &OrbitTable, r_min: f64) -> Result<LimitSetSample> {
    check_depth(table, r_min)?;
    let pts = table
        .atoms()
        .iter()
        .filter(|a| a.radius >= r_min)
        .filter_map(|a| match a.map.classify() {
            Classification::Loxodromic | Classification::Parabolic => {
                attracting_fixed_point(&a.map)
            }
            _ => None,
        });
    finish(pts, r_min, Provenance::WordFixedPoints)
}

fn attracting_fixed_point(g: &crate::moebius::MoebiusMap) -> Option<BoundaryPoint> {
    let fixed = g.fixed_points();
    let to_point = |z: &ChartValue| match z {
        ChartValue::Finite(z) => BoundaryPoint::from_chart(*z),
        ChartValue::Infinity => BoundaryPoint::infinity(),
    };
    match fixed.as_slice() {
        [p] => Some(to_point(p)),
        [p, q] => {
            let (p, q) = (to_point(p), to_point(q));
            // The attracting point has derivative below one.
            if g.conformal_derivative(&p) < g.conformal_derivative(&q) {
                Some(p)
            } else {
                Some(q)
            }
        }
        _ => None,
    }
}

fn check_depth(table: &OrbitTable, r_min: f64) -> Result<()> {
    if !(r_min >= 5.0) {
        return Err(Error::Argument(format!("r_min = {r_min} must be at least 5")));
    }
    if table.stored_radius() < r_min {
        return Err(Error::Depth(format!(
            "orbit stored to radius {:.3}, below r_min = {r_min}",
            table.stored_radius()
        )));
    }
    Ok(())
}

fn finish(
    pts: impl Iterator<Item = BoundaryPoint>,
    r_min: f64,
    provenance: Provenance,
) -> Result<LimitSetSample> {
    let eps = (-r_min).exp();
    let points = dedup(pts, eps);
    if points.is_empty() {
        return Err(Error::Depth(format!("no orbit points beyond radius {r_min}")));
    }
    Ok(LimitSetSample {
        points,
        provenance,
        depth: r_min,
    })
}

/// Greedy thinning in input order on a grid of cell size `eps`.
pub(crate) fn dedup(pts: impl Iterator<Item = BoundaryPoint>, eps: f64) -> Vec<BoundaryPoint> {
    let cell = |u: &Vec3| {
        [
            (u.x / eps).floor() as i64,
            (u.y / eps).floor() as i64,
            (u.z / eps).floor() as i64,
        ]
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut kept: Vec<BoundaryPoint> = Vec::new();
    for p in pts {
        let k = cell(&p.u());
        let mut close = false;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        if list.iter().any(|&i| kept[i].chordal(&p) < eps) {
                            close = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        if !close {
            grid.entry(k).or_default().push(kept.len());
            kept.push(p);
        }
    }
    kept
}
