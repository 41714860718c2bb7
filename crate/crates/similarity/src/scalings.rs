use std::fmt;

use crate::error::SimilarityError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    Fourth,
    Sixth,
}

impl Order {
    /// Size of the first-order system.
    pub fn dim(self) -> usize {
        match self {
            Order::Fourth => 4,
            Order::Sixth => 6,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Order::Fourth => "fourth",
            Order::Sixth => "sixth",
        })
    }
}

impl std::str::FromStr for Order {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fourth" | "4" => Ok(Order::Fourth),
            "sixth" | "6" => Ok(Order::Sixth),
            other => Err(format!("unknown order `{other}` (expected fourth or sixth)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalings {
    pub order: Order,
    pub alpha: f64,
    pub beta: f64,
    /// Exponent of h_xx(x_c) against h(x_c).
    pub nu: f64,
    /// Exponent of h_xxxx(x_c) against h(x_c).
    pub mu: f64,
    /// Far-field growth H ~ C eta^(alpha/beta).
    pub farfield_power: f64,
    /// For fourth order: whether 0 < n <= m, where the transient regime can occur.
    pub regime_valid: bool,
}

pub fn scalings(order: Order, m: f64, n: f64) -> Result<Scalings, SimilarityError> {
    if !(m.is_finite() && n.is_finite() && m > 0.0 && n > 0.0) {
        return Err(SimilarityError::InvalidRegime {
            order,
            m,
            n,
            reason: "exponents must be positive",
        });
    }
    let (alpha, beta, regime_valid) = match order {
        Order::Sixth => {
            let d = 3.0 * m - 2.0 * n + 3.0;
            if d <= 0.0 {
                return Err(SimilarityError::InvalidRegime {
                    order,
                    m,
                    n,
                    reason: "requires n < (3m + 3)/2",
                });
            }
            (2.0 / d, (m + 1.0) / (2.0 * d), true)
        }
        Order::Fourth => {
            let d = 2.0 * m - n + 2.0;
            if d <= 0.0 {
                return Err(SimilarityError::InvalidRegime {
                    order,
                    m,
                    n,
                    reason: "requires n < 2m + 2",
                });
            }
            (1.0 / d, (m + 1.0) / (2.0 * d), n <= m)
        }
    };
    let ratio = beta / alpha;
    Ok(Scalings {
        order,
        alpha,
        beta,
        nu: 1.0 - 2.0 * ratio,
        mu: 1.0 - 4.0 * ratio,
        farfield_power: alpha / beta,
        regime_valid,
    })
}

/// Curvature exponents (nu4, nu6) = (-m, (1 - m)/2).
pub fn critical_exponents(m: f64) -> (f64, f64) {
    (-m, (1.0 - m) / 2.0)
}

/// Far-field operator alpha H - beta eta H'.
pub fn robin_operator(s: &Scalings, eta: f64, h: f64, dh: f64) -> f64 {
    s.alpha * h - s.beta * eta * dh
}

/// Time-derivative terms -alpha H + beta eta H' of the similarity ODE.
pub fn similarity_source(s: &Scalings, eta: f64, h: f64, dh: f64) -> f64 {
    -robin_operator(s, eta, h, dh)
}

/// Exponents (a, b) such that the sixth-order profile at bending B is
/// H_B(eta) = B^b H_1(eta / B^a), with H_1 the profile at B = 1.
pub fn bending_rescaling(m: f64, n: f64) -> Result<(f64, f64), SimilarityError> {
    let s = scalings(Order::Sixth, m, n)?;
    Ok((-(n - m - 1.0) * s.alpha / 4.0, -s.alpha / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sixth_order_no_slip_cube() {
        let s = scalings(Order::Sixth, 3.0, 3.0).unwrap();
        assert_relative_eq!(s.alpha, 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(s.beta, 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(s.nu, -1.0, epsilon = 1e-15);
        assert_relative_eq!(s.mu, -3.0, epsilon = 1e-15);
    }

    #[test]
    fn fourth_order_no_slip_cube() {
        let s = scalings(Order::Fourth, 3.0, 3.0).unwrap();
        assert_relative_eq!(s.alpha, 0.2, epsilon = 1e-15);
        assert_relative_eq!(s.beta, 0.4, epsilon = 1e-15);
        assert_relative_eq!(s.nu, -3.0, epsilon = 1e-15);
        assert_relative_eq!(s.mu, -7.0, epsilon = 1e-15);
        assert!(s.regime_valid);
    }

    #[test]
    fn sixth_order_m2_n3() {
        let s = scalings(Order::Sixth, 2.0, 3.0).unwrap();
        assert_relative_eq!(s.alpha, 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(s.beta, 0.5, epsilon = 1e-15);
        assert_relative_eq!(s.nu, -0.5, epsilon = 1e-15);
        assert!(!scalings(Order::Fourth, 2.0, 3.0).unwrap().regime_valid);
    }

    #[test]
    fn invalid_sixth_order_regime() {
        assert!(scalings(Order::Sixth, 1.0, 3.0).is_err());
        assert!(scalings(Order::Sixth, 1.0, 2.9).is_ok());
    }

    #[test]
    fn critical_exponent_values() {
        assert_eq!(critical_exponents(3.0), (-3.0, -1.0));
        assert_eq!(critical_exponents(1.0), (-1.0, 0.0));
        assert_eq!(critical_exponents(4.0), (-4.0, -1.5));
    }
}
