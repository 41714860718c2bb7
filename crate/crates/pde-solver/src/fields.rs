use rupture_core::stencil::{cell_divergence, face_gradient};
use rupture_core::{pow, ModelParams};

use crate::error::PdeError;

/// Nested staggered derivatives of a profile.
///
/// Cell fields (`p`, `s`) have length N; face fields (`k`, `q`, `w`) have
/// length N + 1 and vanish on both walls.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedFields {
    pub k: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Dynamic pressure B q_x - p + h^(-m)/m.
    pub s: Vec<f64>,
    /// Flux h^n s_x with the mobility averaged onto faces.
    pub w: Vec<f64>,
}

pub(crate) fn check_positive(h: &[f64]) -> Result<(), PdeError> {
    match h.iter().position(|v| !(*v > 0.0)) {
        Some(index) => Err(PdeError::NonPositive { index, value: h[index] }),
        None => Ok(()),
    }
}

/// Face mobility: mean of h^n in the two adjacent cells.
#[inline]
pub(crate) fn face_mobility(a: f64, b: f64, n: f64) -> f64 {
    0.5 * (pow(a, n) + pow(b, n))
}

impl DerivedFields {
    pub fn compute(h: &[f64], params: &ModelParams) -> Result<Self, PdeError> {
        check_positive(h)?;
        let dx = params.dx();
        let m = params.disjoining_exp;
        let k = face_gradient(h, dx);
        let p = cell_divergence(&k, dx);
        let q = face_gradient(&p, dx);
        let qx = cell_divergence(&q, dx);
        let s: Vec<f64> = (0..h.len())
            .map(|i| params.bending * qx[i] - p[i] + pow(h[i], -m) / m)
            .collect();
        let mut w = face_gradient(&s, dx);
        for f in 1..h.len() {
            w[f] *= face_mobility(h[f - 1], h[f], params.mobility_exp);
        }
        Ok(DerivedFields { k, p, q, s, w })
    }
}

/// Backward-Euler residual (h_new - h_old)/dt - (w_{i+1/2} - w_{i-1/2})/dx
/// with the flux built from `h_new`.
pub fn assemble_residual(h_new: &[f64], h_old: &[f64], dt: f64, params: &ModelParams) -> Result<Vec<f64>, PdeError> {
    if h_new.len() != h_old.len() {
        return Err(PdeError::Mismatch(h_new.len(), h_old.len()));
    }
    check_positive(h_old)?;
    let f = DerivedFields::compute(h_new, params)?;
    let div = cell_divergence(&f.w, params.dx());
    Ok(h_new
        .iter()
        .zip(h_old)
        .zip(div)
        .map(|((a, b), d)| (a - b) / dt - d)
        .collect())
}
