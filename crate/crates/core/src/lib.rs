//! Orbits of integer polynomial self-maps modulo primes, prime powers and
//! composites; cycle-length smoothness statistics; heuristic probability
//! calculators; and the search for a modulus `m` whose reduced orbit misses
//! a subvariety.

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod heuristics;
pub mod modarith;
pub mod obstruction;
pub mod rng;
pub mod scan;
pub mod smoothness;
pub mod variety;

pub use error::{Error, Result};
pub use exec::Exec;
