use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("profile is not strictly positive (min {0:.3e})")]
    NonPositive(f64),
    #[error("fit window [{lo:.3e}, {hi:.3e}] holds {points} records spanning {decades:.2} decades; need at least {min_points} records over {min_decades} decades, run deeper")]
    InsufficientSpan {
        lo: f64,
        hi: f64,
        points: usize,
        decades: f64,
        min_points: usize,
        min_decades: f64,
    },
    #[error("trace too short: {0}")]
    ShortTrace(String),
    #[error("no snapshots to compare")]
    NoSnapshots,
}
