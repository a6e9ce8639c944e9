//! Two-dimensional incompressible Navier-Stokes solver with P2-P1
//! Taylor-Hood elements, several forms of the nonlinear term and local
//! conservation diagnostics for momentum and angular momentum.

pub mod balances;
pub mod basis;
pub mod config;
pub mod error;
pub mod field;
pub mod forms;
pub mod mesh;
pub mod output;
pub mod problems;
pub mod quadrature;
pub mod run;
pub mod solver;
pub mod sparse;
pub mod transport;

pub use error::{Error, Result};
