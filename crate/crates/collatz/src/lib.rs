//! Collatz trajectory analytics.
//!
//! The crate is organized around the map T(n) = n/2 (n even) / 3n+1 (n odd):
//!
//! - [`core`]: the map, trajectories, and scalar statistics (iterations to 1,
//!   iterations to a value below the start, peak value, digit strings).
//! - [`laws`]: executable checkers for arithmetic identities the map
//!   satisfies on structured families of integers, reporting pass/fail with
//!   a minimal counterexample.
//! - [`descent`]: a symbolic engine over residue classes mod 2^s that
//!   certifies fixed-step descent (`T^m(class) < class`) by iterating
//!   affine forms a·t + c.
//! - [`peaks`]: structure of trajectory maxima — the (u, p, v) triple around
//!   a peak and the divisor/successor predictions from u's 4-adic shape.
//! - [`sweep`]: bulk analytics over ranges (per-n records, record curves,
//!   peak histograms, stopping-time outliers) with deterministic output.
//! - [`tree`]: the inverse tree (parent enumeration, doubling fans, DOT
//!   emission, and a line-oriented navigation loop).

pub mod core;
pub mod descent;
pub mod laws;
pub mod nat;
pub mod peaks;
pub mod sweep;
pub mod tree;

pub use crate::core::{Error, Trajectory, DEFAULT_STEP_CAP};
pub use crate::nat::Nat;
