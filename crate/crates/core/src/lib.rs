//! One-dimensional viscous Burgers equation coupled to a kinetic (Vlasov)
//! particle phase through drag, with the diagnostics needed to study its
//! vanishing-viscosity limit.
//!
//! ```text
//! u_t + (u²/2)_x = ε u_xx + ∫ f (v - u) dv
//! f_t + v f_x + ((u - v) f)_v = 0
//! ```
//!
//! Numerical strategies (fluxes, characteristic integrators, initial-data
//! families) are registered by name in [`registry::Registries`] and chosen
//! through [`config::SimConfig`].

pub mod burgers;
pub mod config;
pub mod connector;
pub mod coupling;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod init;
pub mod registry;
pub mod study;
pub mod vlasov;

pub use config::SimConfig;
pub use coupling::{run, Simulation, Trajectory};
pub use error::{Error, Result};
pub use field::{FluidField, KineticField};
pub use grid::PhaseGrid;
pub use registry::Registries;
