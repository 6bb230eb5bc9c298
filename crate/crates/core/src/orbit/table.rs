use std::fmt::Write as _;
use std::io;

use crate::geometry::BPoint;
use crate::moebius::MoebiusMap;
use crate::presets::{base_label, inverse_label, GeneratorSet};

/// Width of the radius bins used for complete orbit counts.
pub const BIN_WIDTH: f64 = 1.0 / 64.0;

/// One syllable `g_i^e` of a reduced word, `e != 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Syllable {
    pub generator: u8,
    pub exponent: i32,
}

impl Syllable {
    pub fn label(&self) -> String {
        let i = self.generator as usize;
        let c = if self.exponent > 0 { base_label(i) } else { inverse_label(i) };
        match self.exponent.unsigned_abs() {
            1 => c.to_string(),
            k => format!("{c}^{k}"),
        }
    }
}

pub type Word = Vec<Syllable>;

/// Syllable notation (`a^3 B b`), `id` for the empty word.
pub fn format_word(w: &[Syllable]) -> String {
    if w.is_empty() {
        return "id".to_string();
    }
    let mut s = String::new();
    for (k, syl) in w.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{}", syl.label());
    }
    s
}

/// Words stored as a tree of syllables; node 0 is the empty word.
#[derive(Clone, Debug, Default)]
pub struct WordArena {
    parents: Vec<u32>,
    syllables: Vec<Syllable>,
}

impl WordArena {
    pub fn new() -> Self {
        Self {
            parents: vec![0],
            syllables: vec![Syllable {
                generator: 0,
                exponent: 0,
            }],
        }
    }

    pub fn push(&mut self, parent: u32, syllable: Syllable) -> u32 {
        let id = self.parents.len() as u32;
        self.parents.push(parent);
        self.syllables.push(syllable);
        id
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.len() <= 1
    }

    /// Parent and last syllable of a non-root node.
    pub fn tail(&self, node: u32) -> (u32, Syllable) {
        (self.parents[node as usize], self.syllables[node as usize])
    }

    pub fn word(&self, mut node: u32) -> Word {
        let mut w = Vec::new();
        while node != 0 {
            w.push(self.syllables[node as usize]);
            node = self.parents[node as usize];
        }
        w.reverse();
        w
    }

    /// Appends `other` (without its root), returning the index offset to add
    /// to its non-root node ids.
    pub(crate) fn absorb(&mut self, other: WordArena) -> u32 {
        let offset = self.parents.len() as u32 - 1;
        for (p, s) in other.parents.into_iter().zip(other.syllables).skip(1) {
            self.parents.push(if p == 0 { 0 } else { p + offset });
            self.syllables.push(s);
        }
        offset
    }
}

/// A group element with its displacement of the base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitAtom {
    pub map: MoebiusMap,
    /// `d(o, g o)`.
    pub radius: f64,
    pub(crate) node: u32,
}

impl OrbitAtom {
    /// `g o` in the ball.
    pub fn image(&self) -> BPoint {
        self.map.image_of_origin()
    }
}

/// Complete orbit counts in bins of width [`BIN_WIDTH`], kept even when the
/// atom list itself is truncated.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    counts: Vec<u64>,
}

impl Histogram {
    pub fn new(radius_cap: f64) -> Self {
        Self {
            counts: vec![0; bin_of(radius_cap) + 1],
        }
    }

    pub fn add(&mut self, radius: f64) {
        let k = bin_of(radius).min(self.counts.len() - 1);
        self.counts[k] += 1;
    }

    pub fn add_count(&mut self, bin: usize, n: u64) {
        let k = bin.min(self.counts.len() - 1);
        self.counts[k] += n;
    }

    pub(crate) fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn bins(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Number of orbit points with radius below the bin edge `k * BIN_WIDTH`.
    pub fn count_below_edge(&self, k: usize) -> u64 {
        self.counts[..k.min(self.counts.len())].iter().sum()
    }

    /// `N(r)`, with `r` rounded down to a bin edge.
    pub fn count_within(&self, r: f64) -> u64 {
        self.count_below_edge(edge_index(r))
    }

    /// Largest radius bin that is occupied, as its upper edge.
    pub fn max_radius(&self) -> f64 {
        self.counts
            .iter()
            .rposition(|&c| c > 0)
            .map_or(0.0, |k| (k + 1) as f64 * BIN_WIDTH)
    }

    /// Counts per unit-width band `[j, j + 1)`.
    pub fn unit_bands(&self) -> Vec<u64> {
        let per = (1.0 / BIN_WIDTH).round() as usize;
        self.counts.chunks(per).map(|c| c.iter().sum()).collect()
    }
}

pub(crate) fn bin_of(radius: f64) -> usize {
    (radius / BIN_WIDTH).floor().max(0.0) as usize
}

/// Index of the bin edge at or below `r`.
pub(crate) fn edge_index(r: f64) -> usize {
    (r / BIN_WIDTH + 1e-9).floor().max(0.0) as usize
}

/// The orbit `G o` inside the ball of radius `radius_cap` about `o`.
#[derive(Clone, Debug)]
pub struct OrbitTable {
    pub(crate) atoms: Vec<OrbitAtom>,
    pub(crate) arena: WordArena,
    pub(crate) radius_cap: f64,
    pub(crate) stored_radius: f64,
    pub(crate) preset: GeneratorSet,
    pub(crate) truncated: bool,
    pub(crate) deduplicated: bool,
    pub(crate) histogram: Histogram,
    pub(crate) nodes_visited: u64,
}

impl OrbitTable {
    /// Atoms sorted by radius; complete below [`OrbitTable::stored_radius`].
    pub fn atoms(&self) -> &[OrbitAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn radius_cap(&self) -> f64 {
        self.radius_cap
    }

    /// Every orbit point with radius at or below this value is in
    /// [`OrbitTable::atoms`]; equal to the radius cap unless truncated.
    pub fn stored_radius(&self) -> f64 {
        self.stored_radius
    }

    pub fn preset(&self) -> &GeneratorSet {
        &self.preset
    }

    /// Set when the atom cap forced the stored list to stop short of the
    /// radius cap. Counts in the histogram remain complete.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Set when elements were deduplicated by matrix key (non-free groups).
    pub fn deduplicated(&self) -> bool {
        self.deduplicated
    }

    pub fn histogram(&self) -> &Histogram {
        &self.histogram
    }

    pub fn nodes_visited(&self) -> u64 {
        self.nodes_visited
    }

    /// `N(r) = #{g : d(o, g o) <= r}`, complete up to the radius cap.
    pub fn count_within(&self, r: f64) -> u64 {
        if !self.truncated && r >= self.radius_cap {
            return self.atoms.len() as u64;
        }
        if !self.truncated {
            return self.atoms.partition_point(|a| a.radius <= r) as u64;
        }
        self.histogram.count_within(r)
    }

    pub fn word(&self, atom: &OrbitAtom) -> Word {
        self.arena.word(atom.node)
    }

    pub fn word_string(&self, atom: &OrbitAtom) -> String {
        format_word(&self.word(atom))
    }

    /// Orbit table as CSV: word, the matrix entries and the radius, with
    /// shortest round-trip decimal formatting.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "word", "a_re", "a_im", "b_re", "b_im", "c_re", "c_im", "d_re", "d_im", "radius",
        ])?;
        for atom in &self.atoms {
            let m = atom.map;
            let mut rec = vec![self.word_string(atom)];
            for x in [m.a.re, m.a.im, m.b.re, m.b.im, m.c.re, m.c.im, m.d.re, m.d.im, atom.radius] {
                rec.push(format!("{x:?}"));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
