// Truncated Taylor series used to differentiate the analytic initial guess.

pub(crate) const ORDER: usize = 6;

/// Taylor coefficients of A (1 + z^2)^(p/2) about z0, up to z^(ORDER-1).
pub(crate) fn bump_coeffs(amp: f64, p: f64, z0: f64) -> [f64; ORDER] {
    let mut u = [0.0; ORDER];
    u[0] = 1.0 + z0 * z0;
    u[1] = 2.0 * z0;
    u[2] = 1.0;
    // f = u^a satisfies u f' = a u' f, which gives the recurrence below
    let a = p / 2.0;
    let mut f = [0.0; ORDER];
    f[0] = u[0].powf(a);
    for k in 1..ORDER {
        let mut s = 0.0;
        for j in 1..=k {
            s += ((a + 1.0) * j as f64 - k as f64) * u[j] * f[k - j];
        }
        f[k] = s / (k as f64 * u[0]);
    }
    f.map(|c| c * amp)
}

/// Derivatives d^k/deta^k of A (1 + (eta/w)^2)^(p/2) for k < ORDER.
pub(crate) fn bump_derivatives(amp: f64, p: f64, width: f64, eta: f64) -> [f64; ORDER] {
    let c = bump_coeffs(amp, p, eta / width);
    let mut out = [0.0; ORDER];
    let mut fact = 1.0;
    for k in 0..ORDER {
        if k > 0 {
            fact *= k as f64;
        }
        out[k] = c[k] * fact / width.powi(k as i32);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_finite_differences() {
        let (a, p, w, x) = (0.7, 0.5, 0.8, 1.3);
        let f = |e: f64| a * (1.0 + (e / w).powi(2)).powf(p / 2.0);
        let d = bump_derivatives(a, p, w, x);
        let e = 1e-4;
        assert!((d[0] - f(x)).abs() < 1e-14);
        assert!((d[1] - (f(x + e) - f(x - e)) / (2.0 * e)).abs() < 1e-8);
        assert!((d[2] - (f(x + e) - 2.0 * f(x) + f(x - e)) / (e * e)).abs() < 1e-6);
    }
}
