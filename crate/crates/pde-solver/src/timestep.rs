use rupture_core::ModelParams;
use rupture_similarity::{scalings, Order};

use crate::error::PdeError;
use crate::newton::StepReport;

pub const MIN_DT: f64 = 1e-16;

/// 1/alpha of the final (sixth-order) regime, so that tau ~ h_min^(1/alpha).
/// Falls back to the fourth-order exponent, then to 3, outside their ranges.
pub fn singular_time_exponent(params: &ModelParams) -> f64 {
    let (m, n) = (params.disjoining_exp, params.mobility_exp);
    scalings(Order::Sixth, m, n)
        .or_else(|_| scalings(Order::Fourth, m, n))
        .map(|s| 1.0 / s.alpha)
        .unwrap_or(3.0)
}

pub fn dt_cap(h_min: f64, params: &ModelParams) -> f64 {
    params.dt_cap_coeff * h_min.powf(singular_time_exponent(params))
}

/// Next step size.
///
/// Rejected steps halve dt. Accepted steps grow by 1.5 when Newton needed at
/// most three iterations and keep dt otherwise; in both cases dt is bounded
/// by the singular-time cap, by a relative-change controller that aims
/// for max |dh/h| = `max_rel_change` per step, and by the usual first-order
/// controller on the estimated truncation error against `time_tol`.
pub fn adapt_dt(report: &StepReport, dt: f64, h_min: f64, params: &ModelParams) -> Result<f64, PdeError> {
    let next = if !report.accepted {
        0.5 * dt
    } else {
        let grown = if report.newton_iters <= 3 { 1.5 * dt } else { dt };
        let mut next = grown.min(dt_cap(h_min, params));
        if report.max_rel_change > 0.0 {
            next = next.min(dt * params.max_rel_change / report.max_rel_change);
        }
        if report.time_error > 0.0 {
            next = next.min(0.9 * dt * (params.time_tol / report.time_error).sqrt());
        }
        next
    };
    if next < MIN_DT || !next.is_finite() {
        return Err(PdeError::StepUnderflow { dt: next });
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(accepted: bool, iters: usize) -> StepReport {
        StepReport {
            dt_used: 1e-4,
            newton_iters: iters,
            residual_norm: 0.0,
            accepted,
            max_rel_change: if accepted { 1e-6 } else { 0.0 },
            time_error: 0.0,
        }
    }

    #[test]
    fn halves_on_rejection() {
        let p = ModelParams::new(1e-5, 3.0, 3.0, 2.0, 100).unwrap();
        assert_eq!(adapt_dt(&report(false, 25), 1e-4, 0.4, &p).unwrap(), 5e-5);
    }

    #[test]
    fn grows_on_easy_steps_up_to_cap() {
        let p = ModelParams::new(1e-5, 3.0, 3.0, 2.0, 100).unwrap();
        assert!((adapt_dt(&report(true, 2), 1e-4, 0.4, &p).unwrap() - 1.5e-4).abs() < 1e-18);
        assert_eq!(adapt_dt(&report(true, 5), 1e-4, 0.4, &p).unwrap(), 1e-4);
        let cap = dt_cap(0.4, &p);
        assert_eq!(adapt_dt(&report(true, 2), cap, 0.4, &p).unwrap(), cap);
    }

    #[test]
    fn cap_follows_singular_time_scale() {
        let p = ModelParams::new(1e-5, 3.0, 3.0, 2.0, 100).unwrap();
        let r = dt_cap(1e-3, &p) / dt_cap(5e-4, &p);
        assert!((r - 8.0).abs() < 1e-12);
    }

    #[test]
    fn underflow_aborts() {
        let p = ModelParams::new(1e-5, 3.0, 3.0, 2.0, 100).unwrap();
        assert!(matches!(
            adapt_dt(&report(false, 25), 1.5e-16, 0.1, &p),
            Err(PdeError::StepUnderflow { .. })
        ));
    }
}
