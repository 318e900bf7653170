//! Computational machinery for the truncated Hausdorff matrix moment
//! problem on a finite interval: block Hankel matrices of the four
//! perturbed moment transforms, orthogonal matrix polynomials of the first
//! and second kind, the resolvent matrices at the points 0 and a, the
//! explicit coupling between them, power-series expansions of both, and a
//! residual battery over the algebraic identities connecting all of it.

pub mod blockkit;
pub mod error;
pub mod expansions;
pub mod identities;
pub mod mat;
pub mod moments;
pub mod omp;
pub mod poly;
pub mod resolvent;

pub use error::{Error, Result};
