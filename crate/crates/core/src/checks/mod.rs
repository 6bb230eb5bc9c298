//! Limit-set sampling, dimension and the quantitative measure laws.

mod boxdim;
mod sample;

pub use boxdim::*;
pub use sample::*;
mod scaling;
pub use scaling::*;
