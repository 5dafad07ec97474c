//! Numerical laboratory for energy conservation in the inviscid hydrostatic
//! primitive equations: anisotropic Hölder measurement, mollifier commutators,
//! hydrostatic pressure recovery, smoothed-cylinder geometry and viscous sweeps.

pub mod boundary;
pub mod commutator;
pub mod energy;
pub mod error;
pub mod field;
pub mod fit;
pub mod grid;
pub mod holder;
pub mod hydrostatics;
pub mod io;
pub mod mollify;
pub mod quad;
pub mod spectral;
pub mod synth;
pub mod visc;
pub mod weights;

mod par;

pub use error::{Error, Result};
pub use field::{FieldData, HField, SField};
pub use grid::{DomainMode, Grid3};
