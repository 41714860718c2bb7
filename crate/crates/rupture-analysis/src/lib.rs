//! Post-processing of rupture runs.

mod collapse;
mod critical;
mod error;
mod fit;
mod trace;
mod transition;

pub use collapse::{collapse_error, CollapseMetric, COLLAPSE_ETA};
pub use critical::{locate_critical_point, CriticalPoint};
pub use error::AnalysisError;
pub use fit::{estimate_tc, fit_exponent, Field, ScalingFit};
pub use trace::{RuptureTrace, TraceRecord};
pub use transition::{
    detect_transition, Regime, TransitionConfig, TransitionOutcome, TransitionReport, WindowClass,
};
