pub mod error;
pub mod geometry;
pub mod rng;
pub mod moebius;
pub mod presets;
pub mod orbit;
pub mod regression;
pub mod measure;
pub mod checks;
pub mod config;
pub mod render;
pub mod verify;
