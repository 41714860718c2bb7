use rupture_core::{ModelError, SingularMatrix};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("film thickness must stay positive: h[{index}] = {value:.3e}")]
    NonPositive { index: usize, value: f64 },
    #[error("profiles have different lengths ({0} vs {1})")]
    Mismatch(usize, usize),
    #[error("time step underflow (dt = {dt:.3e})")]
    StepUnderflow { dt: f64 },
    #[error("evolution stalled at t = {t:.17e}, h_min = {h_min:.3e}: {source}")]
    Stalled {
        t: f64,
        h_min: f64,
        #[source]
        source: Box<PdeError>,
    },
    #[error(transparent)]
    Singular(#[from] SingularMatrix),
}
