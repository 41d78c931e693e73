//! Computational arithmetic dynamics on projective space.
//!
//! The crate works with homogeneous integer lifts of polarized endomorphisms
//! of P^N (mostly N = 1) and provides:
//!
//! * exact and overflow-safe evaluation of lifts ([`dyncore`]),
//! * local Green's functions and canonical heights with error radii ([`heights`]),
//! * backward-orbit sampling of the equilibrium measure ([`measure`]),
//! * periodic points and Galois degree statistics ([`periodic`]),
//! * smooth test functions with order-3 jets and chart norms ([`testfn`]),
//! * discrepancy and rate experiments ([`equid`]),
//! * Gram matrices, Bergman kernels and volume differences on O(n) ([`bergman`]),
//! * the canonical spanning set, its lattice and chi lower bounds ([`canbasis`]).

pub mod bergman;
pub mod canbasis;
pub mod dyncore;
pub mod equid;
pub mod error;
pub mod factor;
pub mod heights;
pub mod lattice;
pub mod measure;
pub mod periodic;
pub mod poly;
pub mod primes;
pub mod quadrature;
pub mod roots;
pub mod seeds;
pub mod stats;
pub mod testfn;

pub use error::{Error, Result};
pub use num_complex::Complex64;
