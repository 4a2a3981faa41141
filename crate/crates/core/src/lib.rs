//! Exact arithmetic in finite purely inseparable extensions `L/K` of
//! rational function fields in positive characteristic, together with
//! differential operators on `L` and several independent tests of whether
//! `L/K` is modular.

pub mod coefffield;
pub mod field;
pub mod linalg;
mod modgcd;
pub mod poly;
pub mod spec;
pub mod linops;
pub mod semilinear;
pub mod tower;
pub mod modularity;
pub mod oracle;
