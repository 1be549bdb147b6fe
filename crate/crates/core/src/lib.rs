//! Beltrami/Reeb identities for ABC flows, hyperbolic orbits and separatrix
//! splitting in the integrable limit, monodromy annuli in the standard
//! contact structure, and knotted orbits on Lorenz-like templates.

pub mod beltrami;
pub mod contactgeom;
pub mod error;
pub mod flowdyn;
pub mod knotinv;
pub mod ode;
pub mod template;

pub use error::{Error, Result};
