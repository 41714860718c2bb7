use rupture_core::FilmState;
use rupture_similarity::{Scalings, SimilarityProfile};

use crate::critical::locate_critical_point;
use crate::error::AnalysisError;

/// Half-width of the comparison window in rescaled coordinates.
pub const COLLAPSE_ETA: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseMetric {
    pub t: f64,
    pub h_min: f64,
    /// max |h/h_min - H(eta H0^(beta/alpha))/H0| / (H/H0) over the window.
    pub error: f64,
    /// Half-width actually compared.
    pub eta_window: f64,
    /// The domain could not hold the full window.
    pub shrunk: bool,
    pub points: usize,
}

/// Rescales each snapshot about x_c by its minimum thickness and compares
/// it with the similarity profile normalised to unit minimum.
///
/// With eta = (x - x_c) / h_min^(beta/alpha), the ansatz predicts
/// h / h_min = H(eta H0^(beta/alpha)) / H0. Cells are mirrored across the
/// walls so a minimum on the boundary still sees both sides.
pub fn collapse_error(
    snapshots: &[FilmState],
    profile: &SimilarityProfile,
    scal: &Scalings,
    x_c: f64,
) -> Result<Vec<CollapseMetric>, AnalysisError> {
    if snapshots.is_empty() {
        return Err(AnalysisError::NoSnapshots);
    }
    let ratio = scal.beta / scal.alpha;
    let stretch = profile.h0.powf(ratio);
    snapshots
        .iter()
        .map(|s| {
            let hm = locate_critical_point(s)?.h;
            let width = hm.powf(ratio);
            let l = s.grid.length();
            // mirrored copies reach from -L to 2L
            let reach = (x_c + l).min(2.0 * l - x_c);
            let mut eta_window = COLLAPSE_ETA;
            let mut shrunk = false;
            if COLLAPSE_ETA * width > reach {
                eta_window = reach / width;
                shrunk = true;
            }
            let mut err = 0.0f64;
            let mut points = 0;
            for (&x, &h) in s.grid.centers().iter().zip(&s.h) {
                for xm in [x, -x, 2.0 * l - x] {
                    let eta = (xm - x_c) / width;
                    if eta.abs() > eta_window {
                        continue;
                    }
                    let target = profile.value_at(eta * stretch) / profile.h0;
                    err = err.max((h / hm - target).abs() / target);
                    points += 1;
                }
            }
            Ok(CollapseMetric {
                t: s.t,
                h_min: hm,
                error: err,
                eta_window,
                shrunk,
                points,
            })
        })
        .collect()
}
