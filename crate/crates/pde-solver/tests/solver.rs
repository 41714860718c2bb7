use std::f64::consts::PI;

use approx::assert_relative_eq;
use rupture_core::{make_initial_condition, mass, Grid, InitialCondition, ModelParams};
use rupture_linear::{dispersion_rate, energy};
use rupture_pde::{assemble_residual, newton_step, run_to_rupture, DerivedFields, RunStatus};

fn params(b: f64, m: f64, n: f64, l: f64, cells: usize) -> ModelParams {
    ModelParams::new(b, m, n, l, cells).unwrap()
}

fn cosine(p: &ModelParams, hbar: f64, delta: f64, mode: u32) -> rupture_core::FilmState {
    let grid = Grid::new(p.length, p.cells).unwrap();
    make_initial_condition(&InitialCondition::cosine(hbar, delta).with_mode(mode), &grid).unwrap()
}

/// h_t of the discrete scheme: the residual with h_new = h_old is -h_t.
fn discrete_rate(h: &[f64], p: &ModelParams) -> Vec<f64> {
    assemble_residual(h, h, 1.0, p).unwrap().iter().map(|r| -r).collect()
}

#[test]
fn flat_film_does_not_move() {
    let mut p = params(1e-5, 3.0, 3.0, 2.0, 32);
    p.t_max = 1e-2;
    let out = run_to_rupture(&cosine(&p, 0.5, 0.0, 1), &p, &[]).unwrap();
    assert_eq!(out.status, RunStatus::NoRupture);
    assert!(out.final_state.h.iter().all(|&h| (h - 0.5).abs() < 1e-14));
    assert!(out.trace.len() > 1);
}

#[test]
fn nested_fields_by_hand_on_sixteen_cells() {
    let p = params(2.0, 3.0, 3.0, 1.6, 16);
    let dx = 0.1;
    // linear ramp: interior slope 1, zero slope on the walls
    let h: Vec<f64> = (0..16).map(|i| 1.0 + dx * i as f64).collect();
    let f = DerivedFields::compute(&h, &p).unwrap();
    assert_eq!(f.k[0], 0.0);
    assert_eq!(f.k[16], 0.0);
    for v in &f.k[1..16] {
        assert_relative_eq!(*v, 1.0, epsilon = 1e-12);
    }
    assert_relative_eq!(f.p[0], 10.0, epsilon = 1e-10);
    assert_relative_eq!(f.p[15], -10.0, epsilon = 1e-10);
    for v in &f.p[1..15] {
        assert!(v.abs() < 1e-10);
    }
    // q = p_x on faces: only the faces next to the walls see p change
    assert_relative_eq!(f.q[1], -100.0, epsilon = 1e-8);
    assert_relative_eq!(f.q[15], -100.0, epsilon = 1e-8);
    // s_0 = B (q_1 - q_0)/dx - p_0 + h_0^-3 / 3
    assert_relative_eq!(f.s[0], 2.0 * -1000.0 - 10.0 + 1.0 / 3.0, epsilon = 1e-8);
    // w_1 = mean(h^3) (s_1 - s_0)/dx
    let mob = 0.5 * (1.0f64 + 1.1f64.powi(3));
    assert_relative_eq!(f.w[1], mob * (f.s[1] - f.s[0]) / dx, max_relative = 1e-12);
}

#[test]
fn cosine_mode_is_an_eigenfunction_of_the_linearised_operator() {
    let (b, m, hbar) = (1e-3, 3.0, 0.5);
    let p = params(b, m, 3.0, 2.0, 100);
    // large enough to keep the sixth difference clear of round-off
    let eps = 1e-5;
    let s = cosine(&p, hbar, eps, 1);
    let rate = discrete_rate(&s.h, &p);
    let lambda = dispersion_rate(1, hbar, &p);
    for (x, r) in s.grid.centers().iter().zip(&rate) {
        let c = (PI * x / 2.0).cos();
        if c.abs() > 0.2 {
            assert_relative_eq!(r / (eps * c), lambda, max_relative = 1e-3);
        }
    }
}

fn exact_operator(x: f64, a: f64, b: f64, kappa: f64, p: &ModelParams) -> f64 {
    let (bend, m, n) = (p.bending, p.disjoining_exp, p.mobility_exp);
    let (c, s) = ((kappa * x).cos(), (kappa * x).sin());
    let k2 = kappa * kappa;
    let h = a + b * c;
    let d = [
        h,
        -b * kappa * s,
        -b * k2 * c,
        b * k2 * kappa * s,
        b * k2 * k2 * c,
        -b * k2 * k2 * kappa * s,
        -b * k2 * k2 * k2 * c,
    ];
    let p1 = bend * d[5] - d[3] - h.powf(-m - 1.0) * d[1];
    let p2 = bend * d[6] - d[4] + (m + 1.0) * h.powf(-m - 2.0) * d[1] * d[1] - h.powf(-m - 1.0) * d[2];
    n * h.powf(n - 1.0) * d[1] * p1 + h.powf(n) * p2
}

#[test]
fn manufactured_operator_converges_at_second_order() {
    let (a, b) = (0.6, 0.2);
    let mut errs = Vec::new();
    for cells in [24usize, 48, 96] {
        let p = params(0.01, 3.0, 3.0, 2.0, cells);
        let kappa = PI / p.length;
        let grid = Grid::new(p.length, cells).unwrap();
        let h: Vec<f64> = grid.centers().iter().map(|x| a + b * (kappa * x).cos()).collect();
        let rate = discrete_rate(&h, &p);
        let err = grid
            .centers()
            .iter()
            .zip(&rate)
            .map(|(&x, r)| (r - exact_operator(x, a, b, kappa, &p)).abs())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.8, "observed order {order} from errors {errs:?}");
    }
}

#[test]
fn first_step_matches_explicit_euler_to_second_order() {
    let p = params(1e-3, 3.0, 3.0, 2.0, 64);
    let s = cosine(&p, 0.5, 0.01, 2);
    let f0 = discrete_rate(&s.h, &p);
    let gap = |dt: f64| {
        let (h1, rep) = newton_step(&s.h, dt, &p).unwrap();
        assert!(rep.accepted);
        h1.iter()
            .zip(&s.h)
            .zip(&f0)
            .map(|((a, b), f)| (a - b - dt * f).abs())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (gap(1e-4), gap(5e-5));
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn huge_step_on_a_stable_film_is_safe() {
    let p = params(1.0, 3.0, 3.0, 1.0, 64);
    let s = cosine(&p, 2.0, 0.1, 1);
    let (h, rep) = newton_step(&s.h, 1e3, &p).unwrap();
    assert!(h.iter().all(|v| v.is_finite() && *v > 0.0));
    if rep.accepted {
        // a stable film relaxes towards flat within one giant implicit step
        let spread = h.iter().cloned().fold(f64::MIN, f64::max) - h.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-3);
    } else {
        assert_eq!(h, s.h);
    }
    let total: f64 = h.iter().sum::<f64>() * p.dx();
    assert_relative_eq!(total, 2.0, max_relative = 1e-12);
}

#[test]
fn rupture_run_conserves_mass_and_dissipates_energy() {
    let mut p = params(1.0, 3.0, 3.0, 0.6, 120);
    p.h_stop = 0.02;
    let ic = cosine(&p, 0.1, 0.01, 1);
    let out = run_to_rupture(&ic, &p, &[0.05]).unwrap();
    assert_eq!(out.status, RunStatus::Ruptured);
    let m0 = mass(&ic);
    assert_relative_eq!(mass(&out.final_state), m0, max_relative = 1e-12);
    let e: Vec<f64> = out.trace.column(|r| r.energy);
    for w in e.windows(2) {
        assert!(w[1] <= w[0] + 1e-10 * w[0].abs(), "{} -> {}", w[0], w[1]);
    }
    assert_relative_eq!(e[0], energy(&ic, &p), max_relative = 1e-14);
    assert_eq!(out.snapshots.len(), 1);
    assert!(out.snapshots[0].1.h_min() <= 0.06);
    assert!(out.t_c_estimate.unwrap() >= out.final_state.t);
}

#[test]
fn small_perturbation_grows_at_the_linear_rate() {
    let (hbar, delta) = (0.5, 1e-6);
    let mut p = params(1e-5, 3.0, 3.0, 2.0, 200);
    p.t_max = 0.2;
    p.time_tol = 1e-7;
    let ic = cosine(&p, hbar, delta, 1);
    let out = run_to_rupture(&ic, &p, &[]).unwrap();
    let amp = |h: &[f64]| {
        let c = ic.grid.centers();
        2.0 / c.len() as f64 * h.iter().zip(c).map(|(v, x)| (v - hbar) * (PI * x / 2.0).cos()).sum::<f64>()
    };
    let measured = (amp(&out.final_state.h) / amp(&ic.h)).ln() / out.final_state.t;
    let lambda = dispersion_rate(1, hbar, &p);
    assert!(lambda > 0.0);
    assert_relative_eq!(measured, lambda, max_relative = 0.02);
}

#[test]
fn mismatched_lengths_are_rejected() {
    let p = params(1.0, 3.0, 3.0, 1.0, 32);
    assert!(newton_step(&[0.5; 31], 1e-3, &p).is_err());
    assert!(assemble_residual(&[0.5; 32], &[0.5; 30], 1e-3, &p).is_err());
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(200))]

    #[test]
    fn discrete_flux_telescopes(
        b in 1e-6f64..1.0,
        m in 1.0f64..4.0,
        n in 1.0f64..4.0,
        amps in proptest::collection::vec(-0.2f64..0.2, 5),
    ) {
        let p = params(b, m, n, 1.0, 40);
        let grid = Grid::new(1.0, 40).unwrap();
        let h: Vec<f64> = grid
            .centers()
            .iter()
            .map(|x| 0.5 + amps.iter().enumerate().map(|(k, a)| 0.4 * a * (PI * (k + 1) as f64 * x * 1.3).sin()).sum::<f64>())
            .collect();
        let rate = discrete_rate(&h, &p);
        let scale = rate.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        let total: f64 = rate.iter().sum();
        proptest::prop_assert!(total.abs() <= 1e-11 * scale.max(1.0) * 40.0);
    }
}
