//! Binary PPM (P6) images in the stereographic chart.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, ChartValue};
use crate::measure::AtomicMeasure;

const BACKGROUND: [u8; 3] = [12, 12, 24];
const INK: [u8; 3] = [255, 255, 255];

/// Square chart window centred at `center` reaching `half_width` to each
/// side along the shorter image axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartView {
    pub center: Complex64,
    pub half_width: f64,
}

impl Default for ChartView {
    fn default() -> Self {
        Self {
            center: Complex64::new(0.0, 0.0),
            half_width: 2.0,
        }
    }
}

struct Raster {
    width: usize,
    height: usize,
    view: ChartView,
    scale: f64,
}

impl Raster {
    fn new(width: usize, height: usize, view: ChartView) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Argument(format!("image size {width}x{height} is empty")));
        }
        if !(view.half_width > 0.0) {
            return Err(Error::Argument("view half width must be positive".into()));
        }
        Ok(Self {
            width,
            height,
            view,
            scale: width.min(height) as f64 / (2.0 * view.half_width),
        })
    }

    /// Pixel containing a chart point; row 0 is the top (largest imaginary part).
    fn pixel(&self, xi: &BoundaryPoint) -> Option<usize> {
        let ChartValue::Finite(z) = xi.to_chart() else {
            return None;
        };
        let d = (z - self.view.center) * self.scale;
        let col = (d.re + 0.5 * self.width as f64).floor();
        let row = (0.5 * self.height as f64 - d.im).floor();
        let inside = col >= 0.0 && row >= 0.0 && col < self.width as f64 && row < self.height as f64;
        inside.then(|| row as usize * self.width + col as usize)
    }

    /// Chart coordinates of a pixel's corners `(min, max)`.
    fn bounds(&self, pixel: usize) -> (Complex64, Complex64) {
        let (row, col) = ((pixel / self.width) as f64, (pixel % self.width) as f64);
        let re0 = (col - 0.5 * self.width as f64) / self.scale + self.view.center.re;
        let im1 = (0.5 * self.height as f64 - row) / self.scale + self.view.center.im;
        (
            Complex64::new(re0, im1 - 1.0 / self.scale),
            Complex64::new(re0 + 1.0 / self.scale, im1),
        )
    }

    fn encode(&self, pixels: &[[u8; 3]]) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(pixels.iter().flatten());
        out
    }
}

/// Plot of boundary points, one lit pixel per occupied cell.
pub fn render_points(points: &[BoundaryPoint], width: usize, height: usize, view: ChartView) -> Result<Vec<u8>> {
    let r = Raster::new(width, height, view)?;
    let mut px = vec![BACKGROUND; width * height];
    for p in points {
        if let Some(k) = r.pixel(p) {
            px[k] = INK;
        }
    }
    Ok(r.encode(&px))
}

/// Measure weights binned per pixel, coloured on a log scale.
pub fn render_heatmap(mu: &AtomicMeasure, width: usize, height: usize, view: ChartView) -> Result<Vec<u8>> {
    let r = Raster::new(width, height, view)?;
    let mut mass = vec![0.0f64; width * height];
    for a in mu.atoms() {
        if let Some(k) = r.pixel(&a.direction) {
            mass[k] += a.weight;
        }
    }
    let lit = mass.iter().copied().filter(|&m| m > 0.0);
    let lo = lit.clone().fold(f64::INFINITY, f64::min).ln();
    let hi = lit.fold(0.0, f64::max).ln();
    let px: Vec<[u8; 3]> = mass
        .iter()
        .map(|&m| {
            if m <= 0.0 {
                return BACKGROUND;
            }
            let v = if hi > lo { (m.ln() - lo) / (hi - lo) } else { 1.0 };
            heat(v)
        })
        .collect();
    Ok(r.encode(&px))
}

/// Dark red through orange to pale yellow.
fn heat(v: f64) -> [u8; 3] {
    let c = |x: f64| (255.0 * x.clamp(0.0, 1.0)).round() as u8;
    [c(0.35 + 0.65 * v * 2.0), c(2.0 * v - 0.4), c(3.0 * v - 2.0)]
}

/// Chart rectangle covered by pixel `k` of an image, for callers checking
/// where ink may appear.
pub fn pixel_bounds(width: usize, height: usize, view: ChartView, k: usize) -> Result<(Complex64, Complex64)> {
    Ok(Raster::new(width, height, view)?.bounds(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body(img: &[u8]) -> &[u8] {
        let mut newlines = 0;
        let start = img
            .iter()
            .position(|&b| {
                newlines += (b == b'\n') as usize;
                newlines == 3
            })
            .unwrap();
        &img[start + 1..]
    }

    #[test]
    fn empty_sample_gives_uniform_background() {
        let img = render_points(&[], 8, 4, ChartView::default()).unwrap();
        assert!(img.starts_with(b"P6\n8 4\n255\n"));
        assert_eq!(body(&img).len(), 8 * 4 * 3);
        assert!(body(&img).chunks(3).all(|p| p == BACKGROUND));
        assert!(render_points(&[], 0, 4, ChartView::default()).is_err());
    }

    #[test]
    fn points_land_in_their_pixel() {
        let view = ChartView::default();
        let z = Complex64::new(0.7, -1.2);
        let img = render_points(&[BoundaryPoint::from_chart(z)], 40, 40, view).unwrap();
        let k = body(&img).chunks(3).position(|p| p == INK).unwrap();
        let (lo, hi) = pixel_bounds(40, 40, view, k).unwrap();
        assert!(lo.re <= z.re && z.re < hi.re && lo.im <= z.im && z.im < hi.im);
    }
}
