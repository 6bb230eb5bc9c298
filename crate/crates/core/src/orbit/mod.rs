mod enumerate;
mod series;
mod table;

pub use enumerate::{enumerate_orbit, enumerate_orbit_with, EnumerateOptions, DEFAULT_ATOM_CAP};
pub use series::*;
pub use table::{format_word, Histogram, OrbitAtom, OrbitTable, Syllable, Word, WordArena, BIN_WIDTH};
