//! Simulation and analysis toolkit for the one-dimensional compressible
//! Navier-Stokes-Fourier equations with Cattaneo heat flux and Maxwell
//! stress, written in Lagrangian mass coordinates on `[0, 1]`.

pub mod constitutive;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod initdata;
pub mod limit_solver;
pub mod solver;
pub mod state;
pub mod structure;

pub use error::{Error, Gate, Result};
