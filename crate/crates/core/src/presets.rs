//! Generator sets for the group families the library knows how to enumerate.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, ChartValue};
use crate::moebius::{Classification, MoebiusMap};

/// Largest power of `h` tried when looking for a ping-pong certificate.
pub const MAX_FREE_PRODUCT_POWER: i64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetKind {
    CyclicParabolic,
    Rank2Parabolic,
    Schottky,
    ParabolicHyperbolicFreeProduct,
    Custom,
}

impl PresetKind {
    pub fn name(&self) -> &'static str {
        match self {
            PresetKind::CyclicParabolic => "cyclic_parabolic",
            PresetKind::Rank2Parabolic => "rank2_parabolic",
            PresetKind::Schottky => "schottky",
            PresetKind::ParabolicHyperbolicFreeProduct => "parabolic_hyperbolic_free_product",
            PresetKind::Custom => "custom",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            PresetKind::CyclicParabolic,
            PresetKind::Rank2Parabolic,
            PresetKind::Schottky,
            PresetKind::ParabolicHyperbolicFreeProduct,
            PresetKind::Custom,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

impl fmt::Display for PresetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A closed disk in the chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }

    /// Closed disks meet (tangency counts).
    pub fn meets(&self, other: &Disk) -> bool {
        (self.center - other.center).norm() <= self.radius + other.radius
    }
}

/// Where the positive and negative powers of a base generator send
/// everything outside the other's region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PingPongRegion {
    Disk(Disk),
    /// Closed complement of the open strip `|Re(z conj(alpha))| / |alpha| < |alpha| / 2`
    /// (for a translation by `alpha`; both signs share it).
    OutsideStrip { alpha: Complex64 },
}

impl PingPongRegion {
    pub fn contains(&self, z: ChartValue) -> bool {
        match (self, z) {
            (PingPongRegion::Disk(d), ChartValue::Finite(z)) => d.contains(z),
            (PingPongRegion::Disk(_), ChartValue::Infinity) => false,
            (PingPongRegion::OutsideStrip { .. }, ChartValue::Infinity) => true,
            (PingPongRegion::OutsideStrip { alpha }, ChartValue::Finite(z)) => {
                strip_coordinate(z, *alpha).abs() >= 0.5 * alpha.norm()
            }
        }
    }
}

/// Signed position of `z` along the direction of `alpha`.
pub fn strip_coordinate(z: Complex64, alpha: Complex64) -> f64 {
    (z * alpha.conj()).re / alpha.norm()
}

/// Description of a preset, before validation.
#[derive(Clone, Debug, PartialEq)]
pub enum PresetSpec {
    CyclicParabolic { alpha: Complex64 },
    Rank2Parabolic { alpha: Complex64, beta: Complex64 },
    /// Each pair `(D, D')` yields the generator mapping the exterior of `D`
    /// onto the interior of `D'`.
    Schottky { pairs: Vec<(Disk, Disk)> },
    ParabolicHyperbolicFreeProduct { alpha: Complex64, h: MoebiusMap },
    Custom { generators: Vec<MoebiusMap> },
}

impl PresetSpec {
    pub fn kind(&self) -> PresetKind {
        match self {
            PresetSpec::CyclicParabolic { .. } => PresetKind::CyclicParabolic,
            PresetSpec::Rank2Parabolic { .. } => PresetKind::Rank2Parabolic,
            PresetSpec::Schottky { .. } => PresetKind::Schottky,
            PresetSpec::ParabolicHyperbolicFreeProduct { .. } => PresetKind::ParabolicHyperbolicFreeProduct,
            PresetSpec::Custom { .. } => PresetKind::Custom,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub label: String,
    pub map: MoebiusMap,
}

/// A parabolic fixed point, given in a chart where it sits at infinity, with
/// the translation lattice of its stabilizer.
#[derive(Clone, Debug, PartialEq)]
pub struct Cusp {
    pub point: BoundaryPoint,
    pub translations: Vec<Complex64>,
    /// Indices of the base generators spanning the stabilizer.
    pub generators: Vec<usize>,
}

impl Cusp {
    pub fn rank(&self) -> usize {
        self.translations.len()
    }
}

/// How the group is presented on its base generators, which decides the
/// enumeration strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    /// Free on the base generators.
    Free,
    /// Free abelian of rank 2 on two commuting translations.
    Lattice,
    /// No known normal form; enumeration deduplicates matrices.
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSet {
    /// Base generators and their inverses, interleaved (`a, A, b, B, ...`).
    pub generators: Vec<Generator>,
    pub symmetric: bool,
    pub preset_kind: PresetKind,
    pub cusp_ranks: Vec<u8>,
    pub cusps: Vec<Cusp>,
    pub structure: Structure,
    /// For each base generator, regions receiving its positive and negative
    /// powers. Empty unless a ping-pong certificate was checked.
    pub ping_pong: Vec<(PingPongRegion, PingPongRegion)>,
    pub unverified_discreteness: bool,
    /// Power of `h` used by the free-product construction.
    pub h_power: Option<i64>,
}

pub fn base_label(i: usize) -> char {
    (b'a' + i as u8) as char
}

pub fn inverse_label(i: usize) -> char {
    base_label(i).to_ascii_uppercase()
}

impl GeneratorSet {
    fn from_base(
        base: Vec<MoebiusMap>,
        kind: PresetKind,
        structure: Structure,
        cusps: Vec<Cusp>,
        ping_pong: Vec<(PingPongRegion, PingPongRegion)>,
    ) -> Self {
        let generators = base
            .iter()
            .enumerate()
            .flat_map(|(i, g)| {
                [
                    Generator {
                        label: base_label(i).to_string(),
                        map: *g,
                    },
                    Generator {
                        label: inverse_label(i).to_string(),
                        map: g.inverse(),
                    },
                ]
            })
            .collect();
        Self {
            generators,
            symmetric: true,
            preset_kind: kind,
            cusp_ranks: cusps.iter().map(|c| c.rank() as u8).collect(),
            cusps,
            structure,
            ping_pong,
            unverified_discreteness: kind == PresetKind::Custom,
            h_power: None,
        }
    }

    pub fn rank(&self) -> usize {
        self.generators.len() / 2
    }

    /// The `i`-th base generator.
    pub fn base(&self, i: usize) -> MoebiusMap {
        self.generators[2 * i].map
    }

    pub fn base_maps(&self) -> Vec<MoebiusMap> {
        (0..self.rank()).map(|i| self.base(i)).collect()
    }

    /// Largest displacement `max_s d(o, s o)` over the generators.
    pub fn max_displacement(&self) -> f64 {
        self.generators
            .iter()
            .map(|g| g.map.displacement())
            .fold(0.0, f64::max)
    }

    /// The subgroup generated by the cusp's stabilizer, as its own preset.
    pub fn cusp_subgroup(&self, cusp: usize) -> Result<GeneratorSet> {
        let c = &self.cusps[cusp];
        match c.translations.as_slice() {
            [alpha] => build_preset(&PresetSpec::CyclicParabolic { alpha: *alpha }),
            [alpha, beta] => build_preset(&PresetSpec::Rank2Parabolic {
                alpha: *alpha,
                beta: *beta,
            }),
            _ => Err(Error::Preset("cusp without translations".into())),
        }
    }

    /// Every chart point is in the union of the ping-pong regions (the limit
    /// set lies there).
    pub fn in_ping_pong_union(&self, z: ChartValue) -> bool {
        self.ping_pong
            .iter()
            .any(|(p, m)| p.contains(z) || m.contains(z))
    }

    /// True when the group is elementary (a single parabolic subgroup).
    pub fn is_elementary(&self) -> bool {
        matches!(
            self.preset_kind,
            PresetKind::CyclicParabolic | PresetKind::Rank2Parabolic
        )
    }
}

pub fn build_preset(spec: &PresetSpec) -> Result<GeneratorSet> {
    match spec {
        PresetSpec::CyclicParabolic { alpha } => {
            check_nonzero(*alpha, "alpha")?;
            Ok(GeneratorSet::from_base(
                vec![MoebiusMap::translation(*alpha)],
                PresetKind::CyclicParabolic,
                Structure::Free,
                vec![Cusp {
                    point: BoundaryPoint::infinity(),
                    translations: vec![*alpha],
                    generators: vec![0],
                }],
                Vec::new(),
            ))
        }
        PresetSpec::Rank2Parabolic { alpha, beta } => {
            check_nonzero(*alpha, "alpha")?;
            check_nonzero(*beta, "beta")?;
            let cross = (beta * alpha.conj()).im;
            if cross.abs() <= 1e-12 * alpha.norm() * beta.norm() {
                return Err(Error::DegenerateLattice(alpha.to_string(), beta.to_string()));
            }
            Ok(GeneratorSet::from_base(
                vec![MoebiusMap::translation(*alpha), MoebiusMap::translation(*beta)],
                PresetKind::Rank2Parabolic,
                Structure::Lattice,
                vec![Cusp {
                    point: BoundaryPoint::infinity(),
                    translations: vec![*alpha, *beta],
                    generators: vec![0, 1],
                }],
                Vec::new(),
            ))
        }
        PresetSpec::Schottky { pairs } => build_schottky(pairs),
        PresetSpec::ParabolicHyperbolicFreeProduct { alpha, h } => build_free_product(*alpha, h),
        PresetSpec::Custom { generators } => {
            if generators.is_empty() {
                return Err(Error::Preset("custom preset needs at least one generator".into()));
            }
            Ok(GeneratorSet::from_base(
                generators.clone(),
                PresetKind::Custom,
                Structure::Unknown,
                Vec::new(),
                Vec::new(),
            ))
        }
    }
}

fn check_nonzero(z: Complex64, name: &str) -> Result<()> {
    if z.norm() > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Preset(format!("{name} must be a nonzero finite complex number")))
    }
}

fn build_schottky(pairs: &[(Disk, Disk)]) -> Result<GeneratorSet> {
    if pairs.len() < 2 {
        return Err(Error::Preset(format!(
            "schottky preset needs at least 2 disk pairs, got {}",
            pairs.len()
        )));
    }
    let disks: Vec<Disk> = pairs.iter().flat_map(|(d, e)| [*d, *e]).collect();
    for d in &disks {
        if !(d.radius > 0.0 && d.radius.is_finite() && d.center.is_finite()) {
            return Err(Error::Preset(format!("invalid disk {d:?}")));
        }
    }
    for i in 0..disks.len() {
        for j in i + 1..disks.len() {
            if disks[i].meets(&disks[j]) {
                return Err(Error::PingPong(format!(
                    "disks {} and {} (centres {}, {}) are not disjoint",
                    i, j, disks[i].center, disks[j].center
                )));
            }
        }
    }
    let base = pairs
        .iter()
        .map(|(d, e)| MoebiusMap::disk_pairing(d.center, d.radius, e.center, e.radius))
        .collect::<Result<Vec<_>>>()?;
    let ping_pong = pairs
        .iter()
        .map(|(d, e)| (PingPongRegion::Disk(*e), PingPongRegion::Disk(*d)))
        .collect();
    Ok(GeneratorSet::from_base(
        base,
        PresetKind::Schottky,
        Structure::Free,
        Vec::new(),
        ping_pong,
    ))
}

/// Isometric circle `|c z + d| = 1` of `g`, as a disk.
fn isometric_disk(g: &MoebiusMap) -> Option<Disk> {
    (g.c.norm() > 0.0).then(|| Disk::new(-g.d / g.c, 1.0 / g.c.norm()))
}

fn build_free_product(alpha: Complex64, h: &MoebiusMap) -> Result<GeneratorSet> {
    check_nonzero(alpha, "alpha")?;
    if h.classify() != Classification::Loxodromic {
        return Err(Error::Preset(format!("h = {h} is not loxodromic")));
    }
    if h.fixed_points().contains(&ChartValue::Infinity) {
        return Err(Error::Preset("h must not fix infinity".into()));
    }
    let half = 0.5 * alpha.norm();
    let inside_strip = |d: &Disk| strip_coordinate(d.center, alpha).abs() + d.radius < half;
    for n in 1..=MAX_FREE_PRODUCT_POWER {
        let g = h.pow(n);
        let (Some(src), Some(dst)) = (isometric_disk(&g), isometric_disk(&g.inverse())) else {
            continue;
        };
        if !src.meets(&dst) && inside_strip(&src) && inside_strip(&dst) {
            let p = MoebiusMap::translation(alpha);
            let strip = PingPongRegion::OutsideStrip { alpha };
            let mut set = GeneratorSet::from_base(
                vec![p, g],
                PresetKind::ParabolicHyperbolicFreeProduct,
                Structure::Free,
                vec![Cusp {
                    point: BoundaryPoint::infinity(),
                    translations: vec![alpha],
                    generators: vec![0],
                }],
                vec![(strip, strip), (PingPongRegion::Disk(dst), PingPongRegion::Disk(src))],
            );
            set.h_power = Some(n);
            return Ok(set);
        }
    }
    Err(Error::PingPong(format!(
        "no power h^n with n <= {MAX_FREE_PRODUCT_POWER} has isometric circles disjoint and inside the strip of width {}",
        alpha.norm()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cyclic_parabolic_has_one_generator_pair() {
        let g = build_preset(&PresetSpec::CyclicParabolic { alpha: c(1.0, 0.0) }).unwrap();
        assert_eq!(g.generators.len(), 2);
        assert!(g.symmetric);
        assert_eq!(g.cusp_ranks, vec![1]);
        assert_eq!(g.generators[0].label, "a");
        assert_eq!(g.generators[1].label, "A");
        assert!((g.generators[0].map * g.generators[1].map).is_identity());
    }

    #[test]
    fn rank2_parabolic_has_two_generator_pairs() {
        let g = build_preset(&PresetSpec::Rank2Parabolic {
            alpha: c(1.0, 0.0),
            beta: c(0.0, 1.0),
        })
        .unwrap();
        assert_eq!(g.generators.len(), 4);
        assert_eq!(g.cusp_ranks, vec![2]);
        let err = build_preset(&PresetSpec::Rank2Parabolic {
            alpha: c(1.0, 0.0),
            beta: c(-2.0, 0.0),
        })
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateLattice(..)));
    }

    #[test]
    fn tangent_schottky_disks_are_rejected() {
        let pairs = vec![
            (Disk::new(c(-1.0, 0.0), 0.5), Disk::new(c(0.0, 0.0), 0.5)),
            (Disk::new(c(0.0, 3.0), 0.5), Disk::new(c(0.0, -3.0), 0.5)),
        ];
        let err = build_preset(&PresetSpec::Schottky { pairs }).unwrap_err();
        assert!(matches!(err, Error::PingPong(_)));
    }

    #[test]
    fn schottky_generators_pair_their_disks() {
        let pairs = vec![
            (Disk::new(c(-1.0, 0.0), 0.3), Disk::new(c(1.0, 0.0), 0.3)),
            (Disk::new(c(0.0, -1.0), 0.3), Disk::new(c(0.0, 1.0), 0.3)),
        ];
        let g = build_preset(&PresetSpec::Schottky { pairs }).unwrap();
        assert!(g.cusp_ranks.is_empty());
        let a = g.base(0);
        let ChartValue::Finite(w) = a.apply_chart(ChartValue::Finite(c(5.0, 5.0))) else {
            panic!()
        };
        assert!((w - c(1.0, 0.0)).norm() < 0.3);
    }

    #[test]
    fn free_product_finds_a_certified_power() {
        // h pairs the disks of radius 0.4 around -0.6i and 0.6i
        let h = MoebiusMap::disk_pairing(c(0.0, -0.6), 0.4, c(0.0, 0.6), 0.4).unwrap();
        let g = build_preset(&PresetSpec::ParabolicHyperbolicFreeProduct {
            alpha: c(1.0, 0.0),
            h,
        })
        .unwrap();
        assert_eq!(g.cusp_ranks, vec![1]);
        assert_eq!(g.h_power, Some(1));
        // a wide h needs a power before its circles fit in the strip
        let wide = MoebiusMap::disk_pairing(c(0.0, -0.8), 0.7, c(0.0, 0.8), 0.7).unwrap();
        let g = build_preset(&PresetSpec::ParabolicHyperbolicFreeProduct {
            alpha: c(1.0, 0.0),
            h: wide,
        })
        .unwrap();
        assert!(g.h_power.unwrap() > 1);
        assert!(g.base(1).approx_eq(&wide.pow(g.h_power.unwrap())));
    }

    #[test]
    fn free_product_rejects_parabolic_h() {
        let err = build_preset(&PresetSpec::ParabolicHyperbolicFreeProduct {
            alpha: c(1.0, 0.0),
            h: MoebiusMap::translation(c(0.0, 1.0)),
        })
        .unwrap_err();
        assert!(matches!(err, Error::Preset(_)));
    }
}
