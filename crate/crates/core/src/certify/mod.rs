//! Exact exponent certificates for the nonlinear estimates behind local
//! well-posedness, and an independent verifier.

mod build;
pub mod linear;
mod model;
mod verify;

pub use build::{
    build_full_certificate, certify_difference_exterior, difference_exterior_closed_form, certify_difference_local, certify_sobolev_exterior,
    certify_sobolev_local,
};
pub use model::{CaseTag, Constraint, FullCertificate, Lemma, Piece, Relation, SubCertificate};
pub use verify::{verify_certificate, VerifyReport, VerifyRow};
