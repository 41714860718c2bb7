//! Domain types shared by the rupture toolkit: model parameters, the
//! cell-centered grid, film states, initial conditions, discrete
//! difference stencils and a banded LU solver.

pub mod banded;
mod error;
mod grid;
mod initial;
mod params;
pub mod stencil;

pub use banded::{BandedLu, BandedMatrix, SingularMatrix};
pub use error::ModelError;
pub use grid::Grid;
pub use initial::{make_initial_condition, mass, FilmState, InitialCondition, InitialKind};
pub use params::ModelParams;

/// x^e using integer powers when the exponent is a small integer.
#[inline]
pub fn pow(x: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= 32.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}
