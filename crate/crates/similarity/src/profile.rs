use crate::scalings::{Order, Scalings};

/// Converged similarity profile on the half line [0, eta_max].
///
/// `state` is node-major: for each mesh point the first-order system
/// unknowns (H, H', H'', [H''', H''''], Q) where Q = H^n P' is the flux.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityProfile {
    pub order: Order,
    pub m: f64,
    pub n: f64,
    pub bending: f64,
    pub scalings: Scalings,
    pub eta: Vec<f64>,
    pub state: Vec<f64>,
    pub h0: f64,
    pub residual_norm: f64,
    pub branch_index: usize,
    pub newton_iters: usize,
}

impl SimilarityProfile {
    pub fn dim(&self) -> usize {
        self.order.dim()
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        let d = self.dim();
        self.state.iter().skip(c).step_by(d).copied().collect()
    }

    pub fn h(&self) -> Vec<f64> {
        self.component(0)
    }

    pub fn dh(&self) -> Vec<f64> {
        self.component(1)
    }

    pub fn d2h(&self) -> Vec<f64> {
        self.component(2)
    }

    pub fn eta_max(&self) -> f64 {
        *self.eta.last().unwrap()
    }

    pub fn min_h(&self) -> f64 {
        self.h().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// H / eta^p at the outer boundary.
    pub fn farfield_coeff(&self) -> f64 {
        let last = self.eta.len() - 1;
        self.state[last * self.dim()] / self.eta[last].powf(self.scalings.farfield_power)
    }

    /// Relative spread of H / eta^p over the last 20% of the domain.
    pub fn farfield_drift(&self) -> f64 {
        let p = self.scalings.farfield_power;
        let cut = 0.8 * self.eta_max();
        let ratios: Vec<f64> = self
            .eta
            .iter()
            .zip(self.h())
            .filter(|(e, _)| **e >= cut)
            .map(|(e, h)| h / e.powf(p))
            .collect();
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let last = *ratios.last().unwrap();
        (hi - lo) / last.abs()
    }

    /// Number of sign changes of H'' on (0, eta_max), ignoring values below
    /// a small fraction of max |H''|.
    pub fn d2h_sign_changes(&self) -> usize {
        let d2 = self.d2h();
        let scale = d2.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut last = 0.0f64;
        let mut count = 0;
        for v in d2 {
            if v.abs() <= 1e-8 * scale {
                continue;
            }
            if last != 0.0 && v.signum() != last.signum() {
                count += 1;
            }
            last = v;
        }
        count
    }

    /// Even extension of H, cubic Hermite between mesh points and the
    /// power law C |eta|^p beyond eta_max.
    pub fn value_at(&self, eta: f64) -> f64 {
        let x = eta.abs();
        let d = self.dim();
        let n = self.eta.len();
        if x >= self.eta[n - 1] {
            return self.farfield_coeff() * x.powf(self.scalings.farfield_power);
        }
        let j = match self.eta.binary_search_by(|e| e.total_cmp(&x)) {
            Ok(j) => return self.state[j * d],
            Err(j) => j - 1,
        };
        let (x0, x1) = (self.eta[j], self.eta[j + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (f0, f1) = (self.state[j * d], self.state[(j + 1) * d]);
        let (g0, g1) = (self.state[j * d + 1], self.state[(j + 1) * d + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * f0
            + (t3 - 2.0 * t2 + t) * h * g0
            + (-2.0 * t3 + 3.0 * t2) * f1
            + (t3 - t2) * h * g1
    }
}
