use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{dist_to_ray, BPoint, BoundaryPoint, Ray, Vec3};

/// Closed cap `{eta : angle(eta, center) <= angular_radius}` on the sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalCap {
    pub center: BoundaryPoint,
    pub angular_radius: f64,
}

impl SphericalCap {
    pub fn new(center: BoundaryPoint, angular_radius: f64) -> Result<Self> {
        if !(angular_radius > 0.0 && angular_radius <= PI) {
            return Err(Error::Argument(format!(
                "cap angular radius {angular_radius} outside (0, pi]"
            )));
        }
        Ok(Self {
            center,
            angular_radius,
        })
    }

    pub fn full(center: BoundaryPoint) -> Self {
        Self {
            center,
            angular_radius: PI,
        }
    }

    /// Cap with the given chordal (Euclidean) radius, clamped to the sphere.
    pub fn from_chordal(center: BoundaryPoint, chord: f64) -> Result<Self> {
        if !(chord > 0.0) {
            return Err(Error::Argument(format!("chordal radius {chord} must be positive")));
        }
        Self::new(center, 2.0 * (0.5 * chord).min(1.0).asin())
    }

    pub fn chordal_radius(&self) -> f64 {
        2.0 * (0.5 * self.angular_radius).sin()
    }

    pub fn is_full(&self) -> bool {
        self.angular_radius >= PI
    }

    pub fn contains(&self, eta: &BoundaryPoint) -> bool {
        self.is_full() || self.center.chordal(eta) <= self.chordal_radius()
    }
}

/// Constant `C(k)` with chordal radius of `shadow(y, k)` at most
/// `C(k) e^{-d(o, y)}` whenever `d(o, y) >= k`.
pub fn shadow_constant(k: f64) -> f64 {
    PI * k.sinh() / (1.0 - (-2.0 * k).exp())
}

/// Boundary points whose ray from the centre passes within `k` of `y`.
pub fn shadow(y: &BPoint, k: f64) -> Result<SphericalCap> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Argument(format!("shadow radius k = {k} must be positive")));
    }
    let Some(center) = y.direction() else {
        return Ok(SphericalCap::full(BoundaryPoint::new_unchecked(Vec3::z())));
    };
    if y.radius() <= k {
        return Ok(SphericalCap::full(center));
    }
    let c = center.u();
    let helper = if c.x.abs() <= c.y.abs() && c.x.abs() <= c.z.abs() {
        Vec3::x()
    } else if c.y.abs() <= c.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let e = c.cross(&helper).normalize();
    let excess = |theta: f64| {
        let dir = BoundaryPoint::new_unchecked(c * theta.cos() + e * theta.sin());
        dist_to_ray(y, &Ray::from_origin(dir)) - k
    };
    // The distance grows with the angle up to pi/2, where the ray is as far
    // from y as the centre is.
    let (mut lo, mut hi) = (0.0_f64, 0.5 * PI);
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    SphericalCap::new(center, 0.5 * (lo + hi))
}

/// `V(o, xi, t)`: the boundary points on the far side of the hyperplane
/// orthogonal to `[o, xi)` at distance `t` from the centre. Its rim has
/// `cos(theta) = tanh(t)`.
pub fn horizon_cap(xi: &BoundaryPoint, t: f64) -> Result<SphericalCap> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Argument(format!("horizon depth t = {t} must be >= 0")));
    }
    SphericalCap::new(*xi, 2.0 * (-t).exp().atan())
}
