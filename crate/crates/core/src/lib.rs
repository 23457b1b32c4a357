//! Exact kernels for finite-field distance problems: field arithmetic,
//! spheres and polynomial varieties, sumsets with representation counts,
//! additive energies, k-resultant distance sets, and the additive Fourier
//! transform of indicator functions. The [`harness`] module builds audits,
//! threshold scans and identity checks on top of these.

pub mod ambient;
pub mod bitset;
pub mod combinatorics;
pub mod error;
pub mod gf;
pub mod harness;
pub mod poly;
pub mod spectral;
pub mod variety;

pub use ambient::{Ambient, Point, PointSet};
pub use error::{Error, Result};
pub use gf::{Elem, FieldSpec};
