use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;
use rupture_core::{make_initial_condition, Grid, InitialCondition, ModelParams};
use rupture_linear::{critical_thickness, dispersion_rate, dispersion_table, energy, potential};

#[test]
fn weak_bending_mode_one_rate_matches_direct_formula() {
    let p = ModelParams::new(1e-5, 3.0, 3.0, 2.0, 2000).unwrap();
    let q = PI / 2.0;
    let oracle = -(0.5f64.powi(3)) * q * q * (1e-5 * q.powi(4) + q * q - 0.5f64.powi(-4));
    assert_relative_eq!(dispersion_rate(1, 0.5, &p), oracle, max_relative = 1e-14);
    assert!(oracle > 0.0);
}

#[test]
fn rate_changes_sign_across_critical_thickness() {
    let p = ModelParams::new(1.0, 3.0, 3.0, 0.6, 1200).unwrap();
    let hc = critical_thickness(1, &p);
    // bracket the root of the rate as a function of hbar by bisection
    let (mut lo, mut hi) = (1e-3, 10.0);
    assert!(dispersion_rate(1, lo, &p) > 0.0 && dispersion_rate(1, hi, &p) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dispersion_rate(1, mid, &p) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert_relative_eq!(0.5 * (lo + hi), hc, max_relative = 1e-12);
}

#[test]
fn critical_thickness_decreases_with_mode() {
    let p = ModelParams::new(1e-5, 3.0, 3.0, 2.0, 100).unwrap();
    assert!(critical_thickness(1, &p) > critical_thickness(2, &p));
}

#[test]
fn short_waves_decay_ever_faster() {
    let p = ModelParams::new(1e-5, 3.0, 3.0, 2.0, 100).unwrap();
    let r: Vec<f64> = (40..45).map(|k| dispersion_rate(k, 0.5, &p)).collect();
    for w in r.windows(2) {
        assert!(w[1] < w[0] && w[0] < 0.0);
    }
}

#[test]
fn table_covers_requested_modes() {
    let p = ModelParams::new(1e-5, 3.0, 3.0, 2.0, 100).unwrap();
    let t = dispersion_table(0.5, &p, 20);
    assert_eq!(t.len(), 21);
    assert_eq!(t[0].rate, 0.0);
    assert!(t[0].h_c.is_infinite());
}

#[test]
fn flat_film_energy_is_pure_potential() {
    let p = ModelParams::new(1e-5, 3.0, 3.0, 2.0, 256).unwrap();
    let g = Grid::new(2.0, 256).unwrap();
    let s = make_initial_condition(&InitialCondition::cosine(0.5, 0.0), &g).unwrap();
    let want = 2.0 * 0.5f64.powi(-2) / (3.0 * -2.0);
    assert_relative_eq!(energy(&s, &p), want, max_relative = 1e-13);
}

#[test]
fn single_mode_energy_matches_quadratic_form() {
    // E - L U(hbar) ~ delta^2 L/4 (B q^4 + q^2 - hbar^(-m-1)) for one mode
    let (b, m, l, hbar, delta) = (0.3, 3.0, 2.0, 0.5, 1e-3);
    let cells = 4000;
    let p = ModelParams::new(b, m, 3.0, l, cells).unwrap();
    let g = Grid::new(l, cells).unwrap();
    let s = make_initial_condition(&InitialCondition::cosine(hbar, delta), &g).unwrap();
    let q = PI / l;
    let quad = delta * delta * l / 4.0 * (b * q.powi(4) + q * q - hbar.powf(-m - 1.0));
    let got = energy(&s, &p) - l * potential(hbar, m);
    assert_relative_eq!(got, quad, max_relative = 2e-3);
}

proptest! {
    #[test]
    fn rate_sign_agrees_with_critical_thickness(
        b in 1e-6f64..2.0,
        m in 0.5f64..6.0,
        hbar in 0.02f64..1.5,
        n in 0.5f64..4.0,
        l in 0.3f64..4.0,
    ) {
        let p = ModelParams::new(b, m, n, l, 64).unwrap();
        for k in 1..=10 {
            let hc = critical_thickness(k, &p);
            let rate = dispersion_rate(k, hbar, &p);
            if (hbar - hc).abs() > 1e-9 * hc {
                prop_assert_eq!(rate > 0.0, hbar < hc);
            }
        }
    }
}
