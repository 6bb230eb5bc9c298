//! Hyperbolic 3-space in the upper half-space and Poincare ball models.
//!
//! Curvature is -1 in both models. The half-space carries the metric
//! `(|dz|^2 + dw^2) / w^2` at `(z, w)`, the ball carries
//! `4 |dx|^2 / (1 - |x|^2)^2`, and the two are identified by the inversion in
//! the sphere of radius `sqrt 2` centred at the south pole `(0, 0, -1)`. That
//! inversion is its own inverse, sends the base point `(0, 1)` to the ball
//! centre, and restricts on the boundary to the stereographic chart
//! `z <-> (2 Re z, 2 Im z, 1 - |z|^2) / (1 + |z|^2)`, with `infinity` at the
//! south pole.
//!
//! Ball points carry their *defect* `1 - |v|^2` alongside the coordinates.
//! Orbit points of interest sit within `1e-10` of the sphere, where recomputing
//! the defect from `v` would throw away most of the significant digits, so
//! every constructor that can produce it exactly (model conversion, Mobius
//! addition, ray points) does so.

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Separation below which two boundary points are treated as one geodesic end.
pub const DEGENERATE_GEODESIC_EPS: f64 = 1e-14;

const SOUTH_POLE: Vec3 = Vec3::new(0.0, 0.0, -1.0);

/// A point `(z, w)` of the upper half-space, `w > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint {
    z: Complex64,
    w: f64,
}

impl HPoint {
    pub fn new(z: Complex64, w: f64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite z = {z}")));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidPoint(format!("height w = {w} must be positive")));
        }
        Ok(Self { z, w })
    }

    /// The base point `o = (0, 1)`.
    pub fn origin() -> Self {
        Self {
            z: Complex64::new(0.0, 0.0),
            w: 1.0,
        }
    }

    pub(crate) fn new_unchecked(z: Complex64, w: f64) -> Self {
        debug_assert!(w > 0.0, "height {w}");
        Self { z, w }
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn to_ball(&self) -> BPoint {
        let denom = self.z.norm_sqr() + (self.w + 1.0) * (self.w + 1.0);
        let v = Vec3::new(
            2.0 * self.z.re / denom,
            2.0 * self.z.im / denom,
            -1.0 + 2.0 * (self.w + 1.0) / denom,
        );
        BPoint {
            v,
            defect: 4.0 * self.w / denom,
        }
    }

    pub fn dist(&self, other: &HPoint) -> f64 {
        let num = (self.z - other.z).norm_sqr() + (self.w - other.w).powi(2);
        2.0 * (num / (4.0 * self.w * other.w)).sqrt().asinh()
    }
}

/// A point of the open unit ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BPoint {
    v: Vec3,
    defect: f64,
}

impl BPoint {
    pub fn new(v: Vec3) -> Result<Self> {
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite ball coordinates {v:?}")));
        }
        let n = v.norm();
        if n >= 1.0 {
            return Err(Error::InvalidPoint(format!("ball point has norm {n} >= 1")));
        }
        Ok(Self {
            v,
            defect: (1.0 - n) * (1.0 + n),
        })
    }

    pub(crate) fn from_parts(v: Vec3, defect: f64) -> Self {
        Self { v, defect }
    }

    pub fn origin() -> Self {
        Self {
            v: Vec3::zeros(),
            defect: 1.0,
        }
    }

    /// The point at hyperbolic distance `t` from the centre in direction `u`.
    pub fn from_polar(u: &BoundaryPoint, t: f64) -> Self {
        let r = (0.5 * t).tanh();
        let sech = 1.0 / (0.5 * t).cosh();
        Self {
            v: u.u * r,
            defect: sech * sech,
        }
    }

    pub fn v(&self) -> Vec3 {
        self.v
    }

    /// `1 - |v|^2`, carried with full relative precision.
    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn is_origin(&self) -> bool {
        self.v == Vec3::zeros()
    }

    /// Radial projection to the boundary; `None` for the centre.
    pub fn direction(&self) -> Option<BoundaryPoint> {
        let n = self.v.norm();
        (n > 0.0).then(|| BoundaryPoint { u: self.v / n })
    }

    pub fn to_halfspace(&self) -> HPoint {
        let d = self.v - SOUTH_POLE;
        let denom = d.norm_squared();
        HPoint {
            z: Complex64::new(2.0 * d.x / denom, 2.0 * d.y / denom),
            w: self.defect / denom,
        }
    }

    pub fn dist(&self, other: &BPoint) -> f64 {
        let chord = (self.v - other.v).norm();
        2.0 * (chord / (self.defect * other.defect).sqrt()).asinh()
    }

    /// Distance to the ball centre.
    pub fn radius(&self) -> f64 {
        2.0 * (self.v.norm() / self.defect.sqrt()).asinh()
    }
}

/// A point of the sphere at infinity, stored as a unit vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    u: Vec3,
}

/// Where a boundary point sits in the stereographic chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChartValue {
    Finite(Complex64),
    Infinity,
}

impl BoundaryPoint {
    /// Renormalizes `u`; fails for zero or non-finite input.
    pub fn new(u: Vec3) -> Result<Self> {
        let n = u.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidPoint(format!("cannot normalize {u:?}")));
        }
        Ok(Self { u: u / n })
    }

    pub(crate) fn new_unchecked(u: Vec3) -> Self {
        Self { u }
    }

    pub fn infinity() -> Self {
        Self { u: SOUTH_POLE }
    }

    pub fn from_chart(z: Complex64) -> Self {
        Self::from_projective(z, Complex64::new(1.0, 0.0))
    }

    /// Boundary point with homogeneous chart coordinates `[p : q]`.
    pub fn from_projective(p: Complex64, q: Complex64) -> Self {
        let pq = p * q.conj();
        let np = p.norm_sqr();
        let nq = q.norm_sqr();
        let s = np + nq;
        Self {
            u: Vec3::new(2.0 * pq.re / s, 2.0 * pq.im / s, (nq - np) / s),
        }
    }

    /// Homogeneous chart coordinates, well conditioned on the whole sphere.
    pub fn to_projective(&self) -> (Complex64, Complex64) {
        let u = self.u;
        if u.z >= 0.0 {
            (Complex64::new(u.x, u.y), Complex64::new(1.0 + u.z, 0.0))
        } else {
            (Complex64::new(1.0 - u.z, 0.0), Complex64::new(u.x, -u.y))
        }
    }

    pub fn to_chart(&self) -> ChartValue {
        let (p, q) = self.to_projective();
        if q == Complex64::new(0.0, 0.0) {
            ChartValue::Infinity
        } else {
            ChartValue::Finite(p / q)
        }
    }

    pub fn u(&self) -> Vec3 {
        self.u
    }

    /// Euclidean distance in R^3, the boundary metric used throughout.
    pub fn chordal(&self, other: &BoundaryPoint) -> f64 {
        (self.u - other.u).norm()
    }

    /// Great-circle angle, accurate for nearby points.
    pub fn angle_to(&self, other: &BoundaryPoint) -> f64 {
        2.0 * (0.5 * self.chordal(other)).min(1.0).asin()
    }

    pub fn antipode(&self) -> BoundaryPoint {
        BoundaryPoint { u: -self.u }
    }
}

/// A point of H^3 in either model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Half(HPoint),
    Ball(BPoint),
}

impl Point {
    pub fn to_ball(&self) -> BPoint {
        match self {
            Point::Half(h) => h.to_ball(),
            Point::Ball(b) => *b,
        }
    }
}

impl From<HPoint> for Point {
    fn from(p: HPoint) -> Self {
        Point::Half(p)
    }
}

impl From<BPoint> for Point {
    fn from(p: BPoint) -> Self {
        Point::Ball(p)
    }
}

/// Hyperbolic distance; mixed-model arguments are compared in the ball.
pub fn dist(x: impl Into<Point>, y: impl Into<Point>) -> f64 {
    match (x.into(), y.into()) {
        (Point::Half(a), Point::Half(b)) => a.dist(&b),
        (a, b) => a.to_ball().dist(&b.to_ball()),
    }
}

/// Busemann cocycle `B_xi(x, y) = lim_{z -> xi} d(x, z) - d(y, z)`, in closed
/// form from the ball Poisson kernel `(1 - |x|^2) / |x - xi|^2`.
pub fn busemann(xi: &BoundaryPoint, x: impl Into<Point>, y: impl Into<Point>) -> f64 {
    let x = x.into().to_ball();
    let y = y.into().to_ball();
    horo_height(xi, &x) - horo_height(xi, &y)
}

/// `B_xi(x, o)`.
pub(crate) fn horo_height(xi: &BoundaryPoint, x: &BPoint) -> f64 {
    ((x.v - xi.u).norm_squared() / x.defect).ln()
}

/// The ball isometry `q -> a (+) q` (Mobius addition), which sends the centre
/// to `a`. `(-a) (+) .` is its inverse.
///
/// The usual denominator `1 + 2 a.q + |a|^2 |q|^2` is rewritten as
/// `|a + q|^2 + (1 - |a|^2)(1 - |q|^2)`, a sum of positive terms, so that it
/// keeps full relative precision when `a` and `-q` are both near the same
/// boundary point.
pub fn mobius_add(a: &BPoint, q: &BPoint) -> BPoint {
    let s = a.v + q.v;
    let s2 = s.norm_squared();
    let den = s2 + a.defect * q.defect;
    let v = (a.v * s2 + s * a.defect) / den;
    BPoint {
        v,
        defect: a.defect * q.defect / den,
    }
}

/// Boundary extension of [`mobius_add`].
pub fn mobius_add_boundary(a: &BPoint, xi: &BoundaryPoint) -> BoundaryPoint {
    let s = a.v + xi.u;
    let v = a.v * s.norm_squared() + s * a.defect;
    BoundaryPoint { u: v / v.norm() }
}

pub fn negate(a: &BPoint) -> BPoint {
    BPoint {
        v: -a.v,
        defect: a.defect,
    }
}

/// Distance from `x` to the complete geodesic with ends `xm`, `xp`.
///
/// Equivalent to `cosh d = 2 |x - xm| |x - xp| / (|xm - xp| (1 - |x|^2))`,
/// evaluated after moving `x` to the centre so that points on the geodesic
/// give `0` to rounding rather than to `sqrt(eps)`.
pub fn dist_to_geodesic(x: &BPoint, xm: &BoundaryPoint, xp: &BoundaryPoint) -> Result<f64> {
    let sep = xm.chordal(xp);
    if sep < DEGENERATE_GEODESIC_EPS {
        return Err(Error::DegenerateGeodesic(sep));
    }
    let back = negate(x);
    let em = mobius_add_boundary(&back, xm);
    let ep = mobius_add_boundary(&back, xp);
    Ok(centred_geodesic_distance(&em, &ep))
}

/// Distance from the centre to the geodesic `(em, ep)`.
fn centred_geodesic_distance(em: &BoundaryPoint, ep: &BoundaryPoint) -> f64 {
    let delta = (em.u - ep.u).norm();
    let sum = (em.u + ep.u).norm_squared();
    2.0 * (sum / (2.0 * delta * (2.0 + delta))).sqrt().asinh()
}

/// A geodesic ray `[origin, endpoint)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: BPoint,
    pub endpoint: BoundaryPoint,
}

impl Ray {
    pub fn new(origin: BPoint, endpoint: BoundaryPoint) -> Self {
        Self { origin, endpoint }
    }

    /// Ray from the ball centre.
    pub fn from_origin(endpoint: BoundaryPoint) -> Self {
        Self {
            origin: BPoint::origin(),
            endpoint,
        }
    }
}

/// The point of `ray` at distance `t >= 0` from its origin.
pub fn ray_point(ray: &Ray, t: f64) -> BPoint {
    assert!(t >= 0.0, "ray parameter must be nonnegative, got {t}");
    if ray.origin.is_origin() {
        return BPoint::from_polar(&ray.endpoint, t);
    }
    let dir = mobius_add_boundary(&negate(&ray.origin), &ray.endpoint);
    mobius_add(&ray.origin, &BPoint::from_polar(&dir, t))
}

/// Distance from `x` to the ray (not the full geodesic).
pub fn dist_to_ray(x: &BPoint, ray: &Ray) -> f64 {
    if ray.origin.is_origin() {
        return dist_to_origin_ray(x, &ray.endpoint);
    }
    let back = negate(&ray.origin);
    let xc = mobius_add(&back, x);
    let dir = mobius_add_boundary(&back, &ray.endpoint);
    if xc.v.dot(&dir.u) >= 0.0 {
        distance_to_diameter(&xc, &dir)
    } else {
        xc.radius()
    }
}

/// Rays from the centre: the right triangle with hypotenuse `d(o, x)` and
/// angle `theta` at `o` has opposite side `asinh(sinh d(o, x) sin theta)`.
fn dist_to_origin_ray(x: &BPoint, dir: &BoundaryPoint) -> f64 {
    let rho = x.radius();
    let Some(xd) = x.direction() else {
        return 0.0;
    };
    if xd.u.dot(&dir.u) < 0.0 {
        return rho;
    }
    let theta = xd.angle_to(dir);
    (rho.sinh() * theta.sin()).asinh()
}

/// Distance from `x` to the diameter through `dir`.
fn distance_to_diameter(x: &BPoint, dir: &BoundaryPoint) -> f64 {
    let back = negate(x);
    let em = mobius_add_boundary(&back, &dir.antipode());
    let ep = mobius_add_boundary(&back, dir);
    centred_geodesic_distance(&em, &ep)
}

/// Third side of a hyperbolic triangle from two sides and their included angle,
/// `cosh c = cosh a cosh b - sinh a sinh b cos gamma`.
pub fn side_from_cosine_rule(a: f64, b: f64, gamma: f64) -> f64 {
    let half = (0.5 * (a - b)).sinh();
    let s = (0.5 * gamma).sin();
    let sinh_half_c_sq = half * half + a.sinh() * b.sinh() * s * s;
    2.0 * sinh_half_c_sq.max(0.0).sqrt().asinh()
}

/// Additive constant `C_gamma = 2 log 2 - log(1 - |cos gamma|)` in
/// `a + b - C_gamma <= c <= a + b`; `None` when `|cos gamma| = 1`.
pub fn cosine_rule_constant(gamma: f64) -> Option<f64> {
    let slack = 1.0 - gamma.cos().abs();
    (slack > 0.0).then(|| 2.0 * std::f64::consts::LN_2 - slack.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + h * i as f64;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn vertical_segment_has_unit_length() {
        let a = HPoint::new(c(0.0, 0.0), 1.0).unwrap();
        let b = HPoint::new(c(0.0, 0.0), E).unwrap();
        let oracle = simpson(|w| 1.0 / w, 1.0, E, 2000);
        assert!((oracle - 1.0).abs() < 1e-12);
        assert!((a.dist(&b) - oracle).abs() < 1e-12);
    }

    #[test]
    fn horizontal_translation_distance_grows_like_two_log_n() {
        let n = 1e4;
        let a = HPoint::new(c(0.0, 1.0), 1.0).unwrap();
        let b = HPoint::new(c(n, 1.0), 1.0).unwrap();
        let d = a.dist(&b);
        assert!((d / (2.0 * f64::ln(n)) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn distance_matches_the_t_form() {
        // d = log((1 + t) / (1 - t)), t^2 = (|dz|^2 + dw^2) / (|dz|^2 + (w + w')^2)
        let a = HPoint::new(c(0.3, -1.2), 0.7).unwrap();
        let b = HPoint::new(c(-2.0, 0.5), 2.5).unwrap();
        let dz = (a.z - b.z).norm_sqr();
        let t = ((dz + (a.w - b.w).powi(2)) / (dz + (a.w + b.w).powi(2))).sqrt();
        let d = ((1.0 + t) / (1.0 - t)).ln();
        assert!((a.dist(&b) - d).abs() < 1e-12);
    }

    #[test]
    fn base_point_maps_to_ball_centre() {
        let o = HPoint::origin().to_ball();
        assert!(o.v().norm() < 1e-16);
        assert_eq!(o.defect(), 1.0);
        let back = BPoint::origin().to_halfspace();
        assert!((back.z().norm()) < 1e-16 && (back.w() - 1.0).abs() < 1e-16);
    }

    #[test]
    fn chart_is_the_boundary_of_the_conversion() {
        let z = c(0.7, -1.9);
        let xi = BoundaryPoint::from_chart(z);
        let near = HPoint::new(z, 1e-9).unwrap().to_ball();
        assert!((near.v() - xi.u()).norm() < 1e-8);
        match xi.to_chart() {
            ChartValue::Finite(w) => assert!((w - z).norm() < 1e-14),
            ChartValue::Infinity => panic!("finite point charted at infinity"),
        }
        assert_eq!(BoundaryPoint::infinity().to_chart(), ChartValue::Infinity);
        let far = HPoint::new(c(1e9, 0.0), 1.0).unwrap().to_ball();
        assert!((far.v() - BoundaryPoint::infinity().u()).norm() < 1e-8);
    }

    #[test]
    fn defect_survives_the_round_trip_near_the_boundary() {
        let p = HPoint::new(c(0.25, 0.5), 1e-11).unwrap();
        let b = p.to_ball();
        let exact = 4.0 * p.w() / (p.z().norm_sqr() + (p.w() + 1.0).powi(2));
        assert!((b.defect() / exact - 1.0).abs() < 1e-15);
        let back = b.to_halfspace();
        assert!((back.w() / p.w() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn busemann_is_zero_on_the_diagonal() {
        let xi = BoundaryPoint::from_chart(c(0.4, 2.0));
        let x = HPoint::new(c(1.0, -1.0), 0.3).unwrap();
        assert_eq!(busemann(&xi, x, x), 0.0);
    }

    #[test]
    fn busemann_at_infinity_is_log_height_ratio() {
        let x = HPoint::new(c(0.1, 3.0), 0.25).unwrap();
        let y = HPoint::new(c(-2.0, 0.0), 4.0).unwrap();
        let b = busemann(&BoundaryPoint::infinity(), x, y);
        assert!((b - (y.w() / x.w()).ln()).abs() < 1e-12);
    }

    #[test]
    fn ray_from_base_point_toward_zero_descends_exponentially() {
        let ray = Ray::from_origin(BoundaryPoint::from_chart(c(0.0, 0.0)));
        for &t in &[0.5, 2.0, 7.3] {
            let p = ray_point(&ray, t).to_halfspace();
            // arc length along the vertical geodesic from height 1 down to w
            let pieces = 64;
            let ratio = p.w().powf(1.0 / pieces as f64);
            let arc: f64 = (0..pieces)
                .map(|k| {
                    let hi = ratio.powi(k);
                    simpson(|w| 1.0 / w, hi * ratio, hi, 400)
                })
                .sum();
            assert!(p.z().norm() < 1e-14);
            assert!((p.w() - (-t).exp()).abs() < 1e-12);
            assert!((arc - t).abs() < 1e-9);
        }
    }

    #[test]
    fn ray_point_at_zero_is_origin() {
        let origin = HPoint::new(c(0.5, 0.5), 2.0).unwrap().to_ball();
        let ray = Ray::new(origin, BoundaryPoint::from_chart(c(3.0, 0.0)));
        let p = ray_point(&ray, 0.0);
        assert!((p.v() - origin.v()).norm() < 1e-15);
        assert!((p.dist(&origin)) < 1e-12);
        assert!((ray_point(&ray, 7.3).dist(&origin) - 7.3).abs() < 1e-10);
    }

    #[test]
    fn degenerate_geodesic_is_rejected() {
        let xi = BoundaryPoint::from_chart(c(1.0, 0.0));
        let err = dist_to_geodesic(&BPoint::origin(), &xi, &xi).unwrap_err();
        assert!(matches!(err, Error::DegenerateGeodesic(_)));
    }

    #[test]
    fn diameter_passes_through_origin() {
        let xi = BoundaryPoint::new(Vec3::new(0.3, -0.4, 0.5)).unwrap();
        let d = dist_to_geodesic(&BPoint::origin(), &xi.antipode(), &xi).unwrap();
        assert!(d.abs() < 1e-15);
    }

    #[test]
    fn geodesic_distance_matches_cosh_form() {
        let x = BPoint::new(Vec3::new(0.2, 0.1, -0.3)).unwrap();
        let xm = BoundaryPoint::new(Vec3::new(1.0, 2.0, 0.5)).unwrap();
        let xp = BoundaryPoint::new(Vec3::new(-0.3, 0.1, 1.0)).unwrap();
        let cosh = 2.0 * (x.v() - xm.u()).norm() * (x.v() - xp.u()).norm()
            / (xm.chordal(&xp) * x.defect());
        let d = dist_to_geodesic(&x, &xm, &xp).unwrap();
        assert!((d.cosh() - cosh).abs() < 1e-12 * cosh);
    }

    #[test]
    fn ray_distance_uses_origin_behind_the_foot() {
        let dir = BoundaryPoint::new(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let behind = BPoint::from_polar(&dir.antipode(), 3.0);
        let ray = Ray::from_origin(dir);
        assert!((dist_to_ray(&behind, &ray) - 3.0).abs() < 1e-12);
        let side = BPoint::from_polar(&BoundaryPoint::new(Vec3::new(1.0, 0.0, 0.0)).unwrap(), 2.0);
        assert!((dist_to_ray(&side, &ray) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_rule_degenerate_cases() {
        let (a, b) = (1.7, 4.2);
        assert!((side_from_cosine_rule(a, b, PI) - (a + b)).abs() < 1e-10);
        assert_eq!(side_from_cosine_rule(0.0, 0.0, PI / 2.0), 0.0);
        assert!((side_from_cosine_rule(a, b, 0.0) - (b - a)).abs() < 1e-10);
        assert!(cosine_rule_constant(0.0).is_none());
        assert!(cosine_rule_constant(PI).is_none());
    }

    #[test]
    fn invalid_points_are_rejected() {
        assert!(HPoint::new(c(0.0, 0.0), 0.0).is_err());
        assert!(HPoint::new(c(0.0, 0.0), -1.0).is_err());
        assert!(BPoint::new(Vec3::new(1.0, 0.0, 0.0)).is_err());
        assert!(BoundaryPoint::new(Vec3::zeros()).is_err());
    }
}
