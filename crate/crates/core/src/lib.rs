//! Exact well-posedness certificates and a pseudospectral simulator for the
//! inhomogeneous biharmonic nonlinear Schrödinger equation
//! `i u_t + Δ²u = λ |x|^{-b} |u|^σ u`.

pub mod admissible;
pub mod certify;
pub mod classify;
pub mod cli;
pub mod error;
pub mod exact;
pub mod simulate;
