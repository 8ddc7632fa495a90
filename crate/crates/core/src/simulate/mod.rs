//! Pseudospectral solver on a periodic box in one or two dimensions: exact linear
//! propagator, Strang splitting, a Duhamel fixed-point iteration, norms and the
//! scaling transform.

mod flow;
mod grid;
pub mod io;
mod norms;
mod picard;
mod scaling;
mod spectral;

pub use flow::{evolve, nonlinear_phase, strang_step, time_reversal_error, EvolveConfig, Stepper, Trajectory};
pub use grid::{default_rho, make_weight, Grid, GridField, Weight};
pub use norms::{energy, lebesgue_norm, mass, spacetime_norm};
pub use picard::{contraction_threshold, contracts, picard_solve, PicardConfig, PicardResult};
pub use scaling::{amplitude_exponent, scale_test, scaling_transform, scaling_transform_onto, ScaleReport};
pub use spectral::{linear_propagate, sobolev_norm, Spectral};
