use thiserror::Error;

use crate::profile::SimilarityProfile;
use crate::scalings::Order;

#[derive(Debug, Clone, Error)]
pub enum SimilarityError {
    #[error("{order} order similarity ansatz is invalid for m = {m}, n = {n}: {reason}")]
    InvalidRegime {
        order: Order,
        m: f64,
        n: f64,
        reason: &'static str,
    },
    #[error("invalid similarity problem: {0}")]
    InvalidInput(String),
    #[error("Newton did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        last: Box<SimilarityProfile>,
    },
    #[error("iterate lost positivity (min H = {min_h:.3e})")]
    PositivityLost { min_h: f64 },
    #[error("linear solve failed: {0}")]
    Singular(#[from] rupture_core::SingularMatrix),
    #[error("no valid solution found from {attempts} initial guesses ({rejected} converged but failed validation)")]
    EmptyFamily { attempts: usize, rejected: usize },
}
