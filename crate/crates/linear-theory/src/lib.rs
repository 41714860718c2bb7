//! Dispersion relation, critical thickness and discrete energy for flat
//! and perturbed films.

use std::f64::consts::PI;

use rupture_core::stencil::{cell_divergence, face_gradient};
use rupture_core::{FilmState, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub k: u32,
    pub rate: f64,
    /// Critical thickness of mode k; infinite for k = 0.
    pub h_c: f64,
}

fn wavenumber(k: u32, params: &ModelParams) -> f64 {
    k as f64 * PI / params.length
}

/// Growth rate of the mode cos(k pi x / L) on a flat film of thickness hbar.
pub fn dispersion_rate(k: u32, hbar: f64, params: &ModelParams) -> f64 {
    let q = wavenumber(k, params);
    let q2 = q * q;
    let m = params.disjoining_exp;
    -hbar.powf(params.mobility_exp) * q2 * (params.bending * q2 * q2 + q2 - hbar.powf(-(m + 1.0)))
}

/// Flat films thinner than this are unstable to mode k (k >= 1).
pub fn critical_thickness(k: u32, params: &ModelParams) -> f64 {
    let q = wavenumber(k, params);
    let q2 = q * q;
    (params.bending * q2 * q2 + q2).powf(-1.0 / (params.disjoining_exp + 1.0))
}

pub fn dispersion_table(hbar: f64, params: &ModelParams, k_max: u32) -> Vec<DispersionPoint> {
    (0..=k_max)
        .map(|k| DispersionPoint {
            k,
            rate: dispersion_rate(k, hbar, params),
            h_c: if k == 0 { f64::INFINITY } else { critical_thickness(k, params) },
        })
        .collect()
}

/// Disjoining potential with U'(h) = h^(-m) / m and zero integration constant.
pub fn potential(h: f64, m: f64) -> f64 {
    if m == 1.0 {
        h.ln() / m
    } else {
        h.powf(1.0 - m) / (m * (1.0 - m))
    }
}

/// Discrete energy sum[(B/2) p^2 + k^2 / 2 + U(h)] dx with the solver's stencils.
///
/// The slope term is summed over interior faces; boundary faces carry k = 0.
pub fn energy(state: &FilmState, params: &ModelParams) -> f64 {
    let dx = state.grid.dx();
    let k = face_gradient(&state.h, dx);
    let p = cell_divergence(&k, dx);
    let m = params.disjoining_exp;
    let bend: f64 = p.iter().map(|v| v * v).sum::<f64>() * 0.5 * params.bending;
    let slope: f64 = k.iter().map(|v| v * v).sum::<f64>() * 0.5;
    let pot: f64 = state.h.iter().map(|&h| potential(h, m)).sum();
    (bend + slope + pot) * dx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(b: f64, m: f64, l: f64) -> ModelParams {
        ModelParams::new(b, m, 3.0, l, 64).unwrap()
    }

    #[test]
    fn zero_mode_is_neutral() {
        assert_eq!(dispersion_rate(0, 0.4, &params(1e-5, 3.0, 2.0)), 0.0);
    }

    #[test]
    fn rate_vanishes_at_critical_thickness() {
        let p = params(1.0, 3.0, 0.6);
        for k in 1..6 {
            let hc = critical_thickness(k, &p);
            let scale = hc.powi(3) * (k as f64 * PI / 0.6).powi(2) * hc.powf(-4.0);
            assert!(dispersion_rate(k, hc, &p).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn weak_bending_limit_on_pi_domain() {
        let p = params(1e-300, 3.0, PI);
        assert_relative_eq!(critical_thickness(1, &p), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn logarithmic_potential_for_unit_exponent() {
        assert_relative_eq!(potential(2.0, 1.0), 2f64.ln());
        // derivative check for m != 1
        let (h, m, e) = (0.4, 3.0, 1e-6);
        let d = (potential(h + e, m) - potential(h - e, m)) / (2.0 * e);
        assert_relative_eq!(d, h.powf(-m) / m, max_relative = 1e-8);
    }
}
