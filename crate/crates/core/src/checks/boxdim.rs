use std::collections::HashSet;

use nalgebra::Matrix3;

use super::sample::LimitSetSample;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::regression::{linear_fit, LinearFit};

/// Coarsest scale used by the box counter.
pub const MAX_SCALE: f64 = 0.3;

/// Points needed before a dimension is fitted.
pub const MIN_POINTS: usize = 1000;

/// Scales needed inside the resolved range.
pub const MIN_SCALES: usize = 5;

/// The twenty faces of the icosahedron, each split into `n^2` triangles by
/// a barycentric grid after gnomonic projection onto the face.
struct Icosahedron {
    centers: Vec<Vec3>,
    inverses: Vec<Matrix3<f64>>,
    edge: f64,
}

impl Icosahedron {
    fn new() -> Self {
        let phi = 0.5 * (1.0 + 5f64.sqrt());
        let mut v = Vec::new();
        for a in [-1.0, 1.0] {
            for b in [-phi, phi] {
                v.push(Vec3::new(0.0, a, b).normalize());
                v.push(Vec3::new(a, b, 0.0).normalize());
                v.push(Vec3::new(b, 0.0, a).normalize());
            }
        }
        let edge = (v[0] - v[1..].iter().min_by(|x, y| (v[0] - **x).norm().total_cmp(&(v[0] - **y).norm())).unwrap()).norm();
        let adjacent = |i: usize, j: usize| ((v[i] - v[j]).norm() - edge).abs() < 1e-9;
        let (mut centers, mut inverses) = (Vec::new(), Vec::new());
        for i in 0..12 {
            for j in i + 1..12 {
                for k in j + 1..12 {
                    if adjacent(i, j) && adjacent(j, k) && adjacent(i, k) {
                        centers.push((v[i] + v[j] + v[k]).normalize());
                        let m = Matrix3::from_columns(&[v[i], v[j], v[k]]);
                        inverses.push(m.try_inverse().expect("face vertices are independent"));
                    }
                }
            }
        }
        debug_assert_eq!(centers.len(), 20);
        Self {
            centers,
            inverses,
            edge,
        }
    }

    fn cell(&self, u: &Vec3, n: usize) -> (u8, u32, u32, bool) {
        let face = (0..20)
            .max_by(|&a, &b| u.dot(&self.centers[a]).total_cmp(&u.dot(&self.centers[b])).then(b.cmp(&a)))
            .unwrap();
        let w = self.inverses[face] * u;
        let s = w.sum();
        let nf = n as f64;
        let (x, y) = ((w.y / s).clamp(0.0, 1.0) * nf, (w.z / s).clamp(0.0, 1.0) * nf);
        let i = (x.floor() as usize).min(n - 1);
        let j = (y.floor() as usize).min(n - 1 - i);
        let up = (x - i as f64) + (y - j as f64) < 1.0 || i + j == n - 1;
        (face as u8, i as u32, j as u32, up)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxDimension {
    pub dim: f64,
    pub fit: Option<LinearFit>,
    /// `(cell size, occupied cells)` per scale.
    pub counts: Vec<(f64, usize)>,
    /// All points coincide.
    pub degenerate: bool,
}

/// Geometric scales from [`MAX_SCALE`] down to `e^{2 - depth}`, by `ratio`.
pub fn resolved_scales(depth: f64, ratio: f64) -> Vec<f64> {
    let lo = (2.0 - depth).exp();
    let mut out = Vec::new();
    let mut s = MAX_SCALE;
    while s >= lo {
        out.push(s);
        s /= ratio;
    }
    out
}

/// Slope of `log(occupied cells)` against `log(1 / cell size)`.
pub fn box_counting_dimension(sample: &LimitSetSample, scales: &[f64]) -> Result<BoxDimension> {
    let pts = &sample.points;
    if let Some(first) = pts.first() {
        if pts.iter().all(|p| p.chordal(first) < 1e-15) {
            return Ok(BoxDimension {
                dim: 0.0,
                fit: None,
                counts: Vec::new(),
                degenerate: true,
            });
        }
    }
    if pts.len() < MIN_POINTS {
        return Err(Error::Argument(format!(
            "box counting needs at least {MIN_POINTS} points, got {}",
            pts.len()
        )));
    }
    let lo = (2.0 - sample.depth).exp();
    let ico = Icosahedron::new();
    let mut ns: Vec<usize> = scales
        .iter()
        .filter(|&&s| s >= lo && s <= MAX_SCALE)
        .map(|&s| (ico.edge / s).round().max(1.0) as usize)
        .collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < MIN_SCALES {
        return Err(Error::Argument(format!(
            "need {MIN_SCALES} distinct scales in [{lo:.3e}, {MAX_SCALE}], got {}",
            ns.len()
        )));
    }
    let counts: Vec<(f64, usize)> = ns
        .iter()
        .map(|&n| {
            let cells: HashSet<_> = pts.iter().map(|p| ico.cell(&p.u(), n)).collect();
            (ico.edge / n as f64, cells.len())
        })
        .collect();
    let xs: Vec<f64> = counts.iter().map(|(s, _)| -s.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|(_, c)| (*c as f64).ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or_else(|| Error::Range("degenerate scale list".into()))?;
    Ok(BoxDimension {
        dim: fit.slope,
        fit: Some(fit),
        counts,
        degenerate: false,
    })
}
