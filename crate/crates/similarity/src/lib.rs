//! Similarity exponents and profiles for thin-film rupture.
//!
//! The profile H(eta) of the ansatz h = tau^alpha H((x - x_c) / tau^beta)
//! solves a fourth- or sixth-order ODE on [0, eta_max]. Both are integrated
//! once into a flux form and solved as a first-order system with a
//! second-order midpoint box scheme on a stretched mesh.

mod bvp;
mod error;
mod family;
mod jet;
mod profile;
mod scalings;

pub use bvp::{similarity_residual, solve_similarity, SimilarityProblem};
pub use error::SimilarityError;
pub use family::{enumerate_family, DISTINCT_H0, MAX_FARFIELD_DRIFT, MAX_RESIDUAL};
pub use profile::SimilarityProfile;
pub use scalings::{
    bending_rescaling, critical_exponents, robin_operator, scalings, similarity_source, Order, Scalings,
};
