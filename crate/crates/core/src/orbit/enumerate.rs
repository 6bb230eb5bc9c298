//! Orbit enumeration: a syllable tree for free groups, a lattice walk for
//! rank-2 parabolic groups, and a deduplicating breadth-first search for
//! everything else.

use std::collections::HashSet;

use num_complex::Complex64;
use rayon::prelude::*;

use super::table::{bin_of, Histogram, OrbitAtom, OrbitTable, Syllable, WordArena, BIN_WIDTH};
use crate::error::{Error, Result};
use crate::moebius::MoebiusMap;
use crate::presets::{GeneratorSet, Structure};

/// Default safety cap on the number of stored atoms.
pub const DEFAULT_ATOM_CAP: usize = 10_000_000;

#[derive(Clone, Copy, Debug, Default)]
pub struct EnumerateOptions {
    /// Pruning slack: a branch at `g` is cut once `d(o, g o) - slack > R`.
    /// Defaults to the largest generator displacement.
    pub slack: Option<f64>,
    /// Run first-level subtrees on the rayon pool.
    pub sequential: bool,
}

pub fn enumerate_orbit(gens: &GeneratorSet, radius: f64, atom_cap: usize) -> Result<OrbitTable> {
    enumerate_orbit_with(gens, radius, atom_cap, EnumerateOptions::default())
}

pub fn enumerate_orbit_with(
    gens: &GeneratorSet,
    radius: f64,
    atom_cap: usize,
    opts: EnumerateOptions,
) -> Result<OrbitTable> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::Argument(format!("radius must be finite and >= 0, got {radius}")));
    }
    if atom_cap == 0 {
        return Err(Error::Argument("atom_cap must be at least 1".into()));
    }
    let slack = opts.slack.unwrap_or_else(|| gens.max_displacement());
    match gens.structure {
        Structure::Free => Ok(enumerate_free(gens, radius, atom_cap, slack, !opts.sequential)),
        Structure::Lattice => Ok(enumerate_lattice(gens, radius, atom_cap)),
        Structure::Unknown => Ok(enumerate_dedup(gens, radius, atom_cap, slack)),
    }
}

const NO_NODE: u32 = u32::MAX;

struct Worker<'a> {
    steps: &'a [(MoebiusMap, MoebiusMap)],
    radius: f64,
    slack: f64,
    cap: usize,
    threshold: f64,
    atoms: Vec<OrbitAtom>,
    arena: WordArena,
    /// Syllables from the root to the current element; arena nodes are
    /// created only when an atom below them is stored.
    path: Vec<(Syllable, u32)>,
    histogram: Histogram,
    visited: u64,
}

impl<'a> Worker<'a> {
    fn new(steps: &'a [(MoebiusMap, MoebiusMap)], radius: f64, slack: f64, cap: usize) -> Self {
        Self {
            steps,
            radius,
            slack,
            cap,
            threshold: f64::INFINITY,
            atoms: Vec::new(),
            arena: WordArena::new(),
            path: Vec::new(),
            histogram: Histogram::new(radius),
            visited: 0,
        }
    }

    fn materialize(&mut self) -> u32 {
        let mut parent = 0;
        for entry in self.path.iter_mut() {
            if entry.1 == NO_NODE {
                entry.1 = self.arena.push(parent, entry.0);
            }
            parent = entry.1;
        }
        parent
    }

    fn store(&mut self, map: MoebiusMap, radius: f64) {
        self.histogram.add(radius);
        if radius < self.threshold {
            let node = self.materialize();
            self.atoms.push(OrbitAtom { map, radius, node });
            if self.atoms.len() >= self.cap.saturating_mul(2) {
                self.threshold = shrink_to_cap(&mut self.atoms, self.cap);
            }
        }
    }

    fn explore(&mut self, prefix: MoebiusMap, last: Option<usize>) {
        for j in 0..self.steps.len() {
            if Some(j) != last {
                self.run(prefix, j, 1);
                self.run(prefix, j, -1);
            }
        }
    }

    /// Walks `prefix g_j^{sign e}` for `e = 1, 2, ...` until pruned.
    fn run(&mut self, prefix: MoebiusMap, j: usize, sign: i32) {
        let step = if sign > 0 { self.steps[j].0 } else { self.steps[j].1 };
        let mut m = prefix;
        for e in 1.. {
            m = m * step;
            let r = m.displacement();
            self.visited += 1;
            if r - self.slack > self.radius {
                break;
            }
            let syllable = Syllable {
                generator: j as u8,
                exponent: sign * e,
            };
            self.path.push((syllable, NO_NODE));
            if r <= self.radius {
                self.store(m, r);
            }
            self.explore(m, Some(j));
            self.path.pop();
        }
    }
}

/// Keeps the atoms below the bin edge under the `cap + 1`-th smallest
/// radius; returns that edge.
fn shrink_to_cap(atoms: &mut Vec<OrbitAtom>, cap: usize) -> f64 {
    atoms.sort_by(|a, b| a.radius.total_cmp(&b.radius));
    let edge = bin_of(atoms[cap].radius) as f64 * BIN_WIDTH;
    atoms.retain(|a| a.radius < edge);
    edge
}

fn enumerate_free(gens: &GeneratorSet, radius: f64, cap: usize, slack: f64, parallel: bool) -> OrbitTable {
    let steps: Vec<(MoebiusMap, MoebiusMap)> =
        gens.base_maps().into_iter().map(|g| (g, g.inverse())).collect();
    let tasks: Vec<(usize, i32)> = (0..steps.len()).flat_map(|j| [(j, 1), (j, -1)]).collect();
    let work = |&(j, sign): &(usize, i32)| {
        let mut w = Worker::new(&steps, radius, slack, cap);
        w.run(MoebiusMap::identity(), j, sign);
        w
    };
    let workers: Vec<Worker> = if parallel {
        tasks.par_iter().map(work).collect()
    } else {
        tasks.iter().map(work).collect()
    };

    let mut arena = WordArena::new();
    let mut histogram = Histogram::new(radius);
    histogram.add(0.0);
    let mut atoms = vec![OrbitAtom {
        map: MoebiusMap::identity(),
        radius: 0.0,
        node: 0,
    }];
    let mut threshold = f64::INFINITY;
    let mut visited = 1;
    for w in workers {
        threshold = threshold.min(w.threshold);
        histogram.merge(&w.histogram);
        visited += w.visited;
        let offset = arena.absorb(w.arena);
        atoms.extend(w.atoms.into_iter().map(|mut a| {
            a.node += offset;
            a
        }));
    }
    finish(atoms, arena, histogram, threshold, cap, radius, gens, false, visited)
}

/// Sorts, applies the cap, and assembles the table. Atoms at radius 0 other
/// than the identity are kept whatever the cap.
#[allow(clippy::too_many_arguments)]
fn finish(
    mut atoms: Vec<OrbitAtom>,
    arena: WordArena,
    histogram: Histogram,
    mut threshold: f64,
    cap: usize,
    radius: f64,
    gens: &GeneratorSet,
    deduplicated: bool,
    visited: u64,
) -> OrbitTable {
    atoms.retain(|a| a.radius < threshold || a.node == 0);
    atoms.sort_by(|a, b| a.radius.total_cmp(&b.radius));
    if atoms.len() > cap {
        let edge = bin_of(atoms[cap].radius) as f64 * BIN_WIDTH;
        threshold = threshold.min(edge);
        atoms.retain(|a| a.radius < edge || a.node == 0);
    }
    let truncated = threshold <= radius;
    OrbitTable {
        atoms,
        arena,
        radius_cap: radius,
        stored_radius: if truncated { threshold } else { radius },
        preset: gens.clone(),
        truncated,
        deduplicated,
        histogram,
        nodes_visited: visited,
    }
}

/// Integers `m` with `|m alpha + n beta| < t`.
fn row_interval(alpha: Complex64, beta: Complex64, n: i64, t: f64) -> Option<(i64, i64)> {
    let a = alpha.norm_sqr();
    let b = n as f64 * (alpha * beta.conj()).re;
    let c = (n as f64 * beta).norm_sqr() - t * t;
    let disc = b * b - a * c;
    if disc <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let (lo, hi) = ((-b - s) / a, (-b + s) / a);
    let (mut m0, mut m1) = (lo.floor() as i64, hi.ceil() as i64);
    // tighten against direct evaluation so the interval is exact
    let inside = |m: i64| (alpha * m as f64 + beta * n as f64).norm() < t;
    while m0 <= m1 && !inside(m0) {
        m0 += 1;
    }
    while m1 >= m0 && !inside(m1) {
        m1 -= 1;
    }
    (m0 <= m1).then_some((m0, m1))
}

/// `|z|` of a translation by `z` moving `o` a distance `r`.
fn translation_length(r: f64) -> f64 {
    2.0 * (0.5 * r).sinh()
}

fn enumerate_lattice(gens: &GeneratorSet, radius: f64, cap: usize) -> OrbitTable {
    let alpha = gens.base(0).b;
    let beta = gens.base(1).b;
    let area = (alpha.conj() * beta).im.abs();
    let rho = translation_length(radius);
    // rows n with a lattice point inside the disk of radius rho
    let n_max = (rho * alpha.norm() / area).floor() as i64 + 1;

    let k_max = bin_of(radius);
    let mut thresholds: Vec<f64> = (1..=k_max)
        .map(|k| translation_length(k as f64 * BIN_WIDTH))
        .filter(|&t| t < rho)
        .collect();
    thresholds.push(rho * (1.0 + 1e-15));
    let mut histogram = Histogram::new(radius);
    let mut visited = 0u64;
    for n in -n_max..=n_max {
        let mut prev = 0u64;
        for (k, &t) in thresholds.iter().enumerate() {
            let count = row_interval(alpha, beta, n, t).map_or(0, |(a, b)| (b - a + 1) as u64);
            if count > prev {
                histogram.add_count(k, count - prev);
                prev = count;
            }
        }
        visited += prev;
    }

    // stored atoms: everything below the last bin edge whose cumulative
    // count fits under the cap
    let total = histogram.total();
    let (store_t, threshold) = if total as usize <= cap {
        (rho * (1.0 + 1e-15), f64::INFINITY)
    } else {
        let mut k = 0;
        while histogram.count_below_edge(k + 1) as usize <= cap {
            k += 1;
        }
        let edge = k as f64 * BIN_WIDTH;
        (translation_length(edge), edge)
    };
    let mut arena = WordArena::new();
    let mut atoms = Vec::new();
    for n in -n_max..=n_max {
        let Some((m0, m1)) = row_interval(alpha, beta, n, store_t) else {
            continue;
        };
        for m in m0..=m1 {
            let map = MoebiusMap::translation(alpha * m as f64 + beta * n as f64);
            let mut node = 0;
            if m != 0 {
                node = arena.push(
                    node,
                    Syllable {
                        generator: 0,
                        exponent: m as i32,
                    },
                );
            }
            if n != 0 {
                node = arena.push(
                    node,
                    Syllable {
                        generator: 1,
                        exponent: n as i32,
                    },
                );
            }
            let r = map.displacement();
            if r <= radius && r < threshold {
                atoms.push(OrbitAtom { map, radius: r, node });
            }
        }
    }
    finish(atoms, arena, histogram, threshold, usize::MAX, radius, gens, false, visited)
}

fn enumerate_dedup(gens: &GeneratorSet, radius: f64, cap: usize, slack: f64) -> OrbitTable {
    let letters: Vec<(usize, i32, MoebiusMap)> = gens
        .base_maps()
        .into_iter()
        .enumerate()
        .flat_map(|(j, g)| [(j, 1, g), (j, -1, g.inverse())])
        .collect();
    let mut arena = WordArena::new();
    let mut histogram = Histogram::new(radius);
    histogram.add(0.0);
    let id = MoebiusMap::identity();
    let mut atoms = vec![OrbitAtom {
        map: id,
        radius: 0.0,
        node: 0,
    }];
    let mut seen: HashSet<[i64; 8]> = HashSet::from([id.canonical_key()]);
    let mut frontier: Vec<(MoebiusMap, u32, Option<(usize, i32)>)> = vec![(id, 0, None)];
    let mut threshold = f64::INFINITY;
    let mut visited = 1u64;
    let budget = cap.saturating_mul(16).max(1 << 16);
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (g, node, last) in frontier {
            for &(j, sign, s) in &letters {
                let h = g * s;
                visited += 1;
                let r = h.displacement();
                if r - slack > radius || !seen.insert(h.canonical_key()) {
                    continue;
                }
                let child = match last {
                    Some((lj, le)) if lj == j && le.signum() == sign => {
                        let (parent, syl) = arena.tail(node);
                        arena.push(
                            parent,
                            Syllable {
                                generator: j as u8,
                                exponent: syl.exponent + sign,
                            },
                        )
                    }
                    _ => arena.push(
                        node,
                        Syllable {
                            generator: j as u8,
                            exponent: sign,
                        },
                    ),
                };
                let exp = arena.tail(child).1.exponent;
                if r <= radius {
                    histogram.add(r);
                    if r < threshold {
                        atoms.push(OrbitAtom {
                            map: h,
                            radius: r,
                            node: child,
                        });
                        if atoms.len() >= cap.saturating_mul(2) {
                            threshold = shrink_to_cap(&mut atoms, cap);
                        }
                    }
                }
                next.push((h, child, Some((j, exp))));
            }
        }
        if seen.len() > budget {
            threshold = threshold.min(0.0);
            break;
        }
        frontier = next;
    }
    finish(atoms, arena, histogram, threshold, cap, radius, gens, true, visited)
}
