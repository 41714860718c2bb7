//! Backward-Euler finite-difference solver for
//! h_t = (h^n (B h_xxxx - h_xx + h^(-m)/m)_x)_x with no-flux walls.

mod error;
mod fields;
mod newton;
mod run;
mod timestep;

pub use error::PdeError;
pub use fields::{assemble_residual, DerivedFields};
pub use newton::{newton_step, StepReport};
pub use run::{run_to_rupture, RunOutcome, RunStatus};
pub use timestep::{adapt_dt, dt_cap, singular_time_exponent, MIN_DT};
