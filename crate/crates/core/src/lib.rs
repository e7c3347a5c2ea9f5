//! Exact computations with the Morava stabilizer groups `S_n = O_n^×` and the
//! `K(1)`-local sphere.
//!
//! The layers build on each other: [`padic`] arithmetic mod `p^M`, the Witt
//! vectors [`witt`], the maximal order [`order`], its unit group
//! [`stabilizer`], the graded Lie algebra [`grlie`], then the cohomology and
//! spectral sequence layers [`homalg`], [`specseq`] and [`k1`]. The [`cli`]
//! module holds the element parser and the command-line front end.

pub mod cli;
pub mod error;
pub mod grlie;
pub mod homalg;
pub mod k1;
pub mod order;
pub mod padic;
pub mod specseq;
pub mod stabilizer;
pub mod witt;

pub use error::{Error, Result};
