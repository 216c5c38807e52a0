//! Finite-volume lattice spin systems on `Z^d` at desk scale.
//!
//! Everything here is exact or comes with an explicit error bound:
//! translation-invariant interactions and their norms, finite Gibbs states
//! under boundary conditions by full enumeration, Dobrushin's uniqueness
//! criterion, the rectangle-hull regrouping of an interaction, Peierls
//! contours with the perturbed contour bound, entropy/pressure estimates,
//! and a seeded heat-bath sampler for volumes beyond enumeration reach.

pub mod contour;
pub mod dobrushin;
pub mod error;
pub mod gibbs;
pub mod interaction;
pub mod lattice;
pub mod montecarlo;
pub mod numeric;
pub mod spins;
pub mod thermo;

pub use error::{Error, Result};
pub use interaction::{Interaction, KernelNorm, LocalFunction, TwoBodyKernel};
pub use lattice::{Point, Rectangle, SiteSet};
pub use spins::Spin;
