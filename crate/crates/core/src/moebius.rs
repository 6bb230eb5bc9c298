//! PSL(2, C) acting on the sphere at infinity and, by Poincare extension, on
//! hyperbolic 3-space.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BPoint, BoundaryPoint, ChartValue, HPoint, Vec3};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Grid used to bucket matrices when deduplicating orbit elements.
pub const KEY_GRID: f64 = 1e-7;

/// Tolerance for equality of group elements (up to sign).
pub const EQUALITY_TOL: f64 = 1e-9;

/// `z -> (a z + b) / (c z + d)` with `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoebiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Identity,
    Elliptic,
    Parabolic,
    Loxodromic,
}

impl MoebiusMap {
    /// Rescales to unit determinant; rejects singular matrices.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = (a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + d.norm_sqr()).max(f64::MIN_POSITIVE);
        if !(det.norm() > 1e-14 * scale) || !det.is_finite() {
            return Err(Error::Argument(format!("singular matrix, determinant {det}")));
        }
        let k = det.sqrt().inv();
        Ok(Self {
            a: a * k,
            b: b * k,
            c: c * k,
            d: d * k,
        })
    }

    pub fn identity() -> Self {
        Self {
            a: ONE,
            b: ZERO,
            c: ZERO,
            d: ONE,
        }
    }

    /// `z -> z + alpha`.
    pub fn translation(alpha: Complex64) -> Self {
        Self {
            a: ONE,
            b: alpha,
            c: ZERO,
            d: ONE,
        }
    }

    /// `z -> k z`, the loxodromic with multiplier `k` fixing `0` and infinity.
    pub fn dilation(k: Complex64) -> Result<Self> {
        let s = k.sqrt();
        Self::new(s, ZERO, ZERO, s.inv())
    }

    /// The map sending the exterior of the disk `(c1, r1)` onto the interior
    /// of the disk `(c2, r2)`, `z -> c2 + r1 r2 / (z - c1)`; it carries the
    /// first boundary circle onto the second.
    pub fn disk_pairing(c1: Complex64, r1: f64, c2: Complex64, r2: f64) -> Result<Self> {
        Self::new(c2, Complex64::from(r1 * r2) - c1 * c2, ONE, -c1)
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    /// Sum of squared moduli of the entries, `2 cosh d(o, g o)`.
    pub fn frobenius_sq(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }

    /// `d(o, g o)` for the base point `o`, from
    /// `4 sinh^2(d / 2) = |a - conj d|^2 + |b + conj c|^2`.
    pub fn displacement(&self) -> f64 {
        let s = (self.a - self.d.conj()).norm_sqr() + (self.b + self.c.conj()).norm_sqr();
        2.0 * (0.5 * s.sqrt()).asinh()
    }

    pub fn pow(&self, n: i64) -> Self {
        let mut base = if n < 0 { self.inverse() } else { *self };
        let mut k = n.unsigned_abs();
        let mut acc = Self::identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    pub fn apply_projective(&self, p: Complex64, q: Complex64) -> (Complex64, Complex64) {
        (self.a * p + self.b * q, self.c * p + self.d * q)
    }

    /// Boundary action, computed on homogeneous coordinates so the pole of
    /// `(a z + b) / (c z + d)` needs no special case.
    pub fn apply_boundary(&self, xi: &BoundaryPoint) -> BoundaryPoint {
        let (p, q) = xi.to_projective();
        let (p, q) = self.apply_projective(p, q);
        BoundaryPoint::from_projective(p, q)
    }

    pub fn apply_chart(&self, z: ChartValue) -> ChartValue {
        let (p, q) = match z {
            ChartValue::Finite(z) => self.apply_projective(z, ONE),
            ChartValue::Infinity => (self.a, self.c),
        };
        if q == ZERO {
            ChartValue::Infinity
        } else {
            ChartValue::Finite(p / q)
        }
    }

    /// Poincare extension to the upper half-space.
    pub fn apply_h3(&self, x: &HPoint) -> HPoint {
        let (z, w) = (x.z(), x.w());
        let cz_d = self.c * z + self.d;
        let den = cz_d.norm_sqr() + self.c.norm_sqr() * w * w;
        let num = (self.a * z + self.b) * cz_d.conj() + self.a * self.c.conj() * (w * w);
        HPoint::new_unchecked(num / den, w / den)
    }

    /// `g o` in the ball, from the entries directly:
    /// `v = (2 (a conj c + b conj d), |c|^2 + |d|^2 - |a|^2 - |b|^2) / (|g|^2 + 2)`
    /// and `1 - |v|^2 = 4 / (|g|^2 + 2)`.
    pub fn image_of_origin(&self) -> BPoint {
        let m = self.a.norm_sqr() + self.b.norm_sqr();
        let n = self.c.norm_sqr() + self.d.norm_sqr();
        let s = m + n + 2.0;
        let xy = (self.a * self.c.conj() + self.b * self.d.conj()) * (2.0 / s);
        BPoint::from_parts(Vec3::new(xy.re, xy.im, (n - m) / s), 4.0 / s)
    }

    /// Ball action, via a map carrying `o` to `x` so that the result keeps the
    /// precision of [`MoebiusMap::image_of_origin`].
    pub fn apply_ball(&self, x: &BPoint) -> BPoint {
        (*self * lift_of(x)).image_of_origin()
    }

    /// Spherical-metric derivative `|g'(xi)|`, equal to
    /// `exp(-B_xi(g^-1 o, o))`. For `xi = [p : q]` it is
    /// `(|p|^2 + |q|^2) / (|a p + b q|^2 + |c p + d q|^2)`.
    pub fn conformal_derivative(&self, xi: &BoundaryPoint) -> f64 {
        let (p, q) = xi.to_projective();
        let (gp, gq) = self.apply_projective(p, q);
        (p.norm_sqr() + q.norm_sqr()) / (gp.norm_sqr() + gq.norm_sqr())
    }

    pub fn classify(&self) -> Classification {
        if self.is_identity() {
            return Classification::Identity;
        }
        let t2 = self.trace() * self.trace();
        if (t2 - 4.0).norm() < EQUALITY_TOL {
            Classification::Parabolic
        } else if t2.im.abs() < EQUALITY_TOL && t2.re >= 0.0 && t2.re < 4.0 {
            Classification::Elliptic
        } else {
            Classification::Loxodromic
        }
    }

    pub fn is_identity(&self) -> bool {
        self.approx_eq(&Self::identity())
    }

    /// Equality in PSL(2, C): entries agree up to a global sign.
    pub fn approx_eq(&self, other: &Self) -> bool {
        let close = |s: f64| {
            (self.a - other.a * s).norm() < EQUALITY_TOL
                && (self.b - other.b * s).norm() < EQUALITY_TOL
                && (self.c - other.c * s).norm() < EQUALITY_TOL
                && (self.d - other.d * s).norm() < EQUALITY_TOL
        };
        close(1.0) || close(-1.0)
    }

    /// The sign representative whose first non-negligible coordinate (entries
    /// in order a, b, c, d, real part before imaginary) is positive.
    pub fn canonical(&self) -> Self {
        let entries = [self.a, self.b, self.c, self.d];
        for e in entries {
            for part in [e.re, e.im] {
                if part.abs() > KEY_GRID {
                    return if part > 0.0 { *self } else { self.negated() };
                }
            }
        }
        *self
    }

    fn negated(&self) -> Self {
        Self {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }

    /// Hash key of the canonical representative on a grid of side `1e-7`.
    pub fn canonical_key(&self) -> [i64; 8] {
        let g = self.canonical();
        let q = |x: f64| (x / KEY_GRID).round() as i64;
        [
            q(g.a.re),
            q(g.a.im),
            q(g.b.re),
            q(g.b.im),
            q(g.c.re),
            q(g.c.im),
            q(g.d.re),
            q(g.d.im),
        ]
    }

    /// Fixed points in the chart (one for parabolics, two otherwise).
    pub fn fixed_points(&self) -> Vec<ChartValue> {
        if self.c.norm() < 1e-300 {
            let mut out = vec![ChartValue::Infinity];
            let diff = self.d - self.a;
            if diff.norm() > EQUALITY_TOL {
                out.push(ChartValue::Finite(self.b / diff));
            }
            return out;
        }
        // c z^2 + (d - a) z - b = 0
        let disc = ((self.a - self.d) * (self.a - self.d) + 4.0 * self.b * self.c).sqrt();
        let z1 = (self.a - self.d + disc) / (2.0 * self.c);
        let z2 = (self.a - self.d - disc) / (2.0 * self.c);
        if disc.norm() < EQUALITY_TOL {
            vec![ChartValue::Finite(z1)]
        } else {
            vec![ChartValue::Finite(z1), ChartValue::Finite(z2)]
        }
    }
}

/// The map `R_u D_r` carrying `o` to `x`: a translation of length
/// `r = d(o, x)` towards the chart point `0`, then a rotation about `o`.
pub(crate) fn lift_of(x: &BPoint) -> MoebiusMap {
    let Some(u) = x.direction() else {
        return MoebiusMap::identity();
    };
    let r = x.radius();
    let (p, q) = u.to_projective();
    let n = (p.norm_sqr() + q.norm_sqr()).sqrt();
    let rot = MoebiusMap {
        a: q.conj() / n,
        b: p / n,
        c: -p.conj() / n,
        d: q / n,
    };
    let e = (0.5 * r).exp();
    rot * MoebiusMap {
        a: Complex64::from(1.0 / e),
        b: ZERO,
        c: ZERO,
        d: Complex64::from(e),
    }
}

impl Mul for MoebiusMap {
    type Output = MoebiusMap;

    fn mul(self, o: MoebiusMap) -> MoebiusMap {
        MoebiusMap {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

impl fmt::Display for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}
