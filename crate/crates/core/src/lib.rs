//! Harmonic analysis on compact groups and the sphere, isotropic Gaussian
//! field synthesis, and mean-square continuity diagnostics.

pub mod analysis;
pub mod error;
pub mod field;
pub mod group;
pub mod harness;
pub mod irreps;
pub mod quadrature;
pub mod spectrum;
pub mod stats;
pub mod wigner;

pub use error::{Error, Result};
pub use group::{Domain, Group, GroupElement, SpherePoint};
pub use irreps::{character, enumerate_dual, matrix, sph_harmonic, IrrepLabel, IrrepMatrix};
pub use quadrature::{haar_quadrature, sphere_quadrature, GroupRule, QuadratureRule, SphereRule};
pub use spectrum::{covariance_from_spectrum, PowerSpectrum};
