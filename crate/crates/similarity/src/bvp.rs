use rupture_core::BandedMatrix;

use crate::error::SimilarityError;
use crate::jet::bump_derivatives;
use crate::profile::SimilarityProfile;
use crate::scalings::{bending_rescaling, scalings, Order, Scalings};

/// Inputs of one similarity solve on [0, eta_max].
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityProblem {
    pub order: Order,
    pub m: f64,
    pub n: f64,
    /// Bending coefficient B; ignored at fourth order.
    pub bending: f64,
    pub eta_max: f64,
    pub intervals: usize,
    /// H(0) of the initial guess.
    pub h0_guess: f64,
    /// Tolerance on the pointwise residual of the discrete system.
    pub tol: f64,
    pub max_iter: usize,
}

impl SimilarityProblem {
    pub fn new(order: Order, m: f64, n: f64, bending: f64) -> Self {
        SimilarityProblem {
            order,
            m,
            n,
            bending,
            eta_max: match order {
                Order::Fourth => 40.0,
                Order::Sixth => 60.0,
            },
            intervals: 2000,
            h0_guess: 1.0,
            tol: 1e-9,
            max_iter: 80,
        }
    }

    pub fn with_eta_max(mut self, eta_max: f64) -> Self {
        self.eta_max = eta_max;
        self
    }

    pub fn with_intervals(mut self, intervals: usize) -> Self {
        self.intervals = intervals;
        self
    }

    pub fn with_guess(mut self, h0: f64) -> Self {
        self.h0_guess = h0;
        self
    }

    fn validate(&self) -> Result<Scalings, SimilarityError> {
        let s = scalings(self.order, self.m, self.n)?;
        let bad = |msg: String| Err(SimilarityError::InvalidInput(msg));
        if self.order == Order::Sixth && !(self.bending.is_finite() && self.bending > 0.0) {
            return bad(format!("bending must be > 0, got {}", self.bending));
        }
        if !(self.eta_max.is_finite() && self.eta_max > 1.0) {
            return bad(format!("eta_max must exceed 1, got {}", self.eta_max));
        }
        if self.intervals < 20 {
            return bad(format!("need at least 20 intervals, got {}", self.intervals));
        }
        if !(self.h0_guess.is_finite() && self.h0_guess > 0.0) {
            return bad(format!("H0 guess must be > 0, got {}", self.h0_guess));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return bad("tolerance and iteration cap must be positive".into());
        }
        Ok(s)
    }

    /// Width of the core region for a profile of height h0, from the
    /// balance of the highest derivative against the disjoining term.
    fn core_width(&self, h0: f64) -> f64 {
        let w = match self.order {
            Order::Fourth => h0.powf((self.m + 1.0) / 2.0),
            Order::Sixth => (self.bending * h0.powf(self.m + 1.0)).powf(0.25),
        };
        w.clamp(1e-3, self.eta_max / 4.0)
    }

    /// Mesh clustered near eta = 0: eta_j = a sinh(s_j asinh(eta_max / a)).
    pub fn mesh(&self) -> Vec<f64> {
        let a = self.core_width(self.h0_guess);
        let span = (self.eta_max / a).asinh();
        let k = self.intervals;
        let mut eta: Vec<f64> = (0..=k).map(|j| a * (span * j as f64 / k as f64).sinh()).collect();
        eta[k] = self.eta_max;
        eta
    }
}

// First-order system for (H, H', ..., Q) with Q = H^n P'.
struct System {
    order: Order,
    m: f64,
    n: f64,
    b: f64,
    s: Scalings,
}

impl System {
    fn new(pb: &SimilarityProblem, s: Scalings) -> Self {
        System {
            order: pb.order,
            m: pb.m,
            n: pb.n,
            b: pb.bending,
            s,
        }
    }

    fn d(&self) -> usize {
        self.order.dim()
    }

    // Highest derivative in terms of the state.
    fn top(&self, y: &[f64]) -> f64 {
        let h = y[0];
        let q = y[self.d() - 1];
        let a = q * h.powf(-self.n);
        let c = h.powf(-self.m - 1.0) * y[1];
        match self.order {
            Order::Fourth => -a - c,
            Order::Sixth => (a + c) / self.b,
        }
    }

    // Partial derivatives of `top` with respect to H, H' and Q.
    fn top_partials(&self, y: &[f64]) -> (f64, f64, f64) {
        let h = y[0];
        let q = y[self.d() - 1];
        let dh = -self.n * q * h.powf(-self.n - 1.0) - (self.m + 1.0) * h.powf(-self.m - 2.0) * y[1];
        let dh1 = h.powf(-self.m - 1.0);
        let dq = h.powf(-self.n);
        match self.order {
            Order::Fourth => (-dh, -dh1, -dq),
            Order::Sixth => (dh / self.b, dh1 / self.b, dq / self.b),
        }
    }

    fn rhs(&self, eta: f64, y: &[f64], out: &mut [f64]) {
        let d = self.d();
        out[..d - 2].copy_from_slice(&y[1..d - 1]);
        out[d - 2] = self.top(y);
        out[d - 1] = -self.s.alpha * y[0] + self.s.beta * eta * y[1];
    }

    // Dense d x d Jacobian of rhs, row-major.
    fn jac(&self, eta: f64, y: &[f64], out: &mut [f64]) {
        let d = self.d();
        out.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..d - 2 {
            out[r * d + r + 1] = 1.0;
        }
        let (th, th1, tq) = self.top_partials(y);
        out[(d - 2) * d] = th;
        out[(d - 2) * d + 1] = th1;
        out[(d - 2) * d + d - 1] = tq;
        out[(d - 1) * d] = -self.s.alpha;
        out[(d - 1) * d + 1] = self.s.beta * eta;
    }

    fn left_rows(&self) -> &'static [usize] {
        match self.order {
            Order::Fourth => &[1, 3],
            Order::Sixth => &[1, 3, 5],
        }
    }

    // Far-field conditions: Robin plus the power-law derivative hierarchy.
    fn right_bc(&self, eta: f64, y: &[f64], out: &mut [f64]) {
        let p = self.s.farfield_power;
        out[0] = self.s.alpha * y[0] - self.s.beta * eta * y[1];
        out[1] = eta * eta * y[2] - p * (p - 1.0) * y[0];
        if self.order == Order::Sixth {
            out[2] = eta.powi(3) * y[3] - p * (p - 1.0) * (p - 2.0) * y[0];
        }
    }

    fn right_bc_jac(&self, eta: f64) -> Vec<(usize, usize, f64)> {
        let p = self.s.farfield_power;
        let mut v = vec![
            (0, 0, self.s.alpha),
            (0, 1, -self.s.beta * eta),
            (1, 2, eta * eta),
            (1, 0, -p * (p - 1.0)),
        ];
        if self.order == Order::Sixth {
            v.push((2, 3, eta.powi(3)));
            v.push((2, 0, -p * (p - 1.0) * (p - 2.0)));
        }
        v
    }

    /// Residual of the box scheme. Interval rows are divided by the interval
    /// width so that they read as pointwise ODE residuals.
    fn residual(&self, eta: &[f64], y: &[f64]) -> Vec<f64> {
        let d = self.d();
        let k = eta.len() - 1;
        let half = d / 2;
        let mut r = vec![0.0; d * (k + 1)];
        for (i, &c) in self.left_rows().iter().enumerate() {
            r[i] = y[c];
        }
        let mut mid = vec![0.0; d];
        let mut f = vec![0.0; d];
        for i in 0..k {
            let h = eta[i + 1] - eta[i];
            let em = 0.5 * (eta[i] + eta[i + 1]);
            for c in 0..d {
                mid[c] = 0.5 * (y[i * d + c] + y[(i + 1) * d + c]);
            }
            self.rhs(em, &mid, &mut f);
            for c in 0..d {
                r[half + i * d + c] = (y[(i + 1) * d + c] - y[i * d + c]) / h - f[c];
            }
        }
        self.right_bc(eta[k], &y[k * d..], &mut r[half + k * d..]);
        r
    }

    fn jacobian(&self, eta: &[f64], y: &[f64]) -> BandedMatrix {
        let d = self.d();
        let k = eta.len() - 1;
        let half = d / 2;
        let bw = 3 * d / 2 - 1;
        let mut jm = BandedMatrix::zeros(d * (k + 1), bw, bw);
        for (i, &c) in self.left_rows().iter().enumerate() {
            jm.set(i, c, 1.0);
        }
        let mut mid = vec![0.0; d];
        let mut fj = vec![0.0; d * d];
        for i in 0..k {
            let h = eta[i + 1] - eta[i];
            let em = 0.5 * (eta[i] + eta[i + 1]);
            for c in 0..d {
                mid[c] = 0.5 * (y[i * d + c] + y[(i + 1) * d + c]);
            }
            self.jac(em, &mid, &mut fj);
            for r in 0..d {
                let row = half + i * d + r;
                jm.add(row, i * d + r, -1.0 / h);
                jm.add(row, (i + 1) * d + r, 1.0 / h);
                for c in 0..d {
                    let v = fj[r * d + c];
                    if v != 0.0 {
                        jm.add(row, i * d + c, -0.5 * v);
                        jm.add(row, (i + 1) * d + c, -0.5 * v);
                    }
                }
            }
        }
        for (r, c, v) in self.right_bc_jac(eta[k]) {
            jm.add(half + k * d + r, k * d + c, v);
        }
        jm
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn initial_guess(pb: &SimilarityProblem, sys: &System, eta: &[f64]) -> Vec<f64> {
    let d = sys.d();
    let p = sys.s.farfield_power;
    let w = pb.core_width(pb.h0_guess);
    let mut y = vec![0.0; d * eta.len()];
    for (j, &e) in eta.iter().enumerate() {
        let g = bump_derivatives(pb.h0_guess, p, w, e);
        let h = g[0];
        let slope_term = h.powf(-pb.m - 1.0) * g[1];
        // flux Q = H^n P' for the guess
        let dp = match pb.order {
            Order::Fourth => -g[3] - slope_term,
            Order::Sixth => pb.bending * g[5] - slope_term,
        };
        y[j * d..j * d + d - 1].copy_from_slice(&g[..d - 1]);
        y[j * d + d - 1] = h.powf(pb.n) * dp;
    }
    y
}

fn build_profile(pb: &SimilarityProblem, s: Scalings, eta: Vec<f64>, y: Vec<f64>, res: f64, iters: usize) -> SimilarityProfile {
    SimilarityProfile {
        order: pb.order,
        m: pb.m,
        n: pb.n,
        bending: if pb.order == Order::Sixth { pb.bending } else { 0.0 },
        scalings: s,
        h0: y[0],
        eta,
        state: y,
        residual_norm: res,
        branch_index: 0,
        newton_iters: iters,
    }
}

/// Solves the similarity boundary-value problem by damped Newton from a
/// bump-shaped initial guess of height `h0_guess`.
///
/// At sixth order with B != 1 the problem is first solved at B = 1 on the
/// stretched mesh and mapped back through the exact bending rescaling, which
/// gives Newton a starting point inside its convergence basin.
pub fn solve_similarity(pb: &SimilarityProblem) -> Result<SimilarityProfile, SimilarityError> {
    let s = pb.validate()?;
    let sys = System::new(pb, s);
    let eta = pb.mesh();
    if pb.order == Order::Sixth && pb.bending != 1.0 {
        if let Ok(p) = solve_via_unit_bending(pb, &sys, &eta) {
            return Ok(p);
        }
    }
    let y0 = initial_guess(pb, &sys, &eta);
    newton(pb, &sys, eta, y0)
}

fn solve_via_unit_bending(pb: &SimilarityProblem, sys: &System, eta: &[f64]) -> Result<SimilarityProfile, SimilarityError> {
    let (wa, hb) = bending_rescaling(pb.m, pb.n)?;
    let stretch = pb.bending.powf(wa);
    let lift = pb.bending.powf(hb);
    let unit = SimilarityProblem {
        bending: 1.0,
        eta_max: pb.eta_max / stretch,
        h0_guess: pb.h0_guess / lift,
        ..pb.clone()
    };
    let usys = System::new(&unit, sys.s);
    let ueta: Vec<f64> = eta.iter().map(|e| e / stretch).collect();
    let y0 = initial_guess(&unit, &usys, &ueta);
    let g = newton(&unit, &usys, ueta, y0)?;
    let d = sys.d();
    // H^(k) scales as B^(b - k a); Q = H^n P' as B^((n - m) b - a)
    let mut factors: Vec<f64> = (0..d - 1).map(|k| lift / stretch.powi(k as i32)).collect();
    factors.push(pb.bending.powf((pb.n - pb.m) * hb - wa));
    let y: Vec<f64> = g.state.iter().enumerate().map(|(i, v)| v * factors[i % d]).collect();
    newton(pb, sys, eta.to_vec(), y)
}

fn newton(pb: &SimilarityProblem, sys: &System, eta: Vec<f64>, mut y: Vec<f64>) -> Result<SimilarityProfile, SimilarityError> {
    let d = sys.d();
    let mut r = sys.residual(&eta, &y);
    let mut res = max_abs(&r);
    for it in 0..pb.max_iter {
        if !res.is_finite() {
            break;
        }
        if res <= pb.tol {
            return Ok(build_profile(pb, sys.s, eta, y, res, it));
        }
        let lu = sys.jacobian(&eta, &y).factor()?;
        let mut step: Vec<f64> = r.iter().map(|v| -v).collect();
        lu.solve_in_place(&mut step);
        // keep every H at least a tenth of its current value
        let mut lam = 1.0f64;
        for j in 0..eta.len() {
            let dh = step[j * d];
            if dh < 0.0 {
                lam = lam.min(0.9 * y[j * d] / -dh);
            }
        }
        let base = norm2(&r);
        let mut trial = vec![0.0; y.len()];
        loop {
            for (t, (a, b)) in trial.iter_mut().zip(y.iter().zip(&step)) {
                *t = a + lam * b;
            }
            let rt = sys.residual(&eta, &trial);
            let nt = norm2(&rt);
            if nt.is_finite() && nt <= (1.0 - 1e-4 * lam) * base {
                y.copy_from_slice(&trial);
                r = rt;
                res = max_abs(&r);
                break;
            }
            lam *= 0.5;
            if lam < 1e-10 {
                let min_h = (0..eta.len()).map(|j| y[j * d]).fold(f64::INFINITY, f64::min);
                if min_h <= 0.0 {
                    return Err(SimilarityError::PositivityLost { min_h });
                }
                return Err(SimilarityError::NotConverged {
                    iterations: it + 1,
                    residual: res,
                    last: Box::new(build_profile(pb, sys.s, eta, y, res, it + 1)),
                });
            }
        }
    }
    if res <= pb.tol {
        return Ok(build_profile(pb, sys.s, eta, y, res, pb.max_iter));
    }
    Err(SimilarityError::NotConverged {
        iterations: pb.max_iter,
        residual: res,
        last: Box::new(build_profile(pb, sys.s, eta, y, res, pb.max_iter)),
    })
}

/// Pointwise residuals of the discretized similarity ODE at the profile's
/// own mesh: boundary conditions first, then every first-order equation on
/// every interval (as a difference quotient minus the right-hand side), then
/// the far-field conditions.
pub fn similarity_residual(profile: &SimilarityProfile) -> Vec<f64> {
    let pb = SimilarityProblem {
        order: profile.order,
        m: profile.m,
        n: profile.n,
        bending: profile.bending,
        ..SimilarityProblem::new(profile.order, profile.m, profile.n, profile.bending)
    };
    let sys = System::new(&pb, profile.scalings);
    sys.residual(&profile.eta, &profile.state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_jacobian_matches_differences() {
        for order in [Order::Fourth, Order::Sixth] {
            let pb = SimilarityProblem::new(order, 3.0, 3.0, 0.3).with_intervals(20).with_eta_max(5.0);
            let s = pb.validate().unwrap();
            let sys = System::new(&pb, s);
            let eta = pb.mesh();
            let mut y = initial_guess(&pb, &sys, &eta);
            for (i, v) in y.iter_mut().enumerate() {
                *v += 1e-2 * ((i as f64) * 0.7).sin();
            }
            let jm = sys.jacobian(&eta, &y);
            let r0 = sys.residual(&eta, &y);
            for col in [0, 1, 3, 7, 11, y.len() - 1] {
                let e = 1e-6 * (1.0 + y[col].abs());
                let mut yp = y.clone();
                yp[col] += e;
                let rp = sys.residual(&eta, &yp);
                for row in 0..r0.len() {
                    let fd = (rp[row] - r0[row]) / e;
                    let an = jm.get(row, col);
                    assert!((fd - an).abs() <= 1e-4 * (1.0 + an.abs()), "{order} ({row},{col}): {fd} vs {an}");
                }
            }
        }
    }
}
