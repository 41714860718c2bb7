use crate::error::ModelError;

/// Physical and numerical parameters of one simulation.
///
/// Fields are public for convenient struct-update construction; anything
/// built that way should go through [`ModelParams::validate`] before use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Bending-pressure coefficient B.
    pub bending: f64,
    /// Disjoining-pressure exponent m.
    pub disjoining_exp: f64,
    /// Mobility exponent n.
    pub mobility_exp: f64,
    /// Domain length L.
    pub length: f64,
    /// Number of grid cells N.
    pub cells: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub dt_init: f64,
    /// Simulation stops once min h falls to this value.
    pub h_stop: f64,
    /// Prefactor of the near-rupture step cap c * h_min^(1/alpha).
    pub dt_cap_coeff: f64,
    /// Target bound on max |dh/h| per accepted step.
    pub max_rel_change: f64,
    /// Target local truncation error, relative to max |h - mean(h)|.
    pub time_tol: f64,
    /// Give up (status "no rupture") once t reaches this value.
    pub t_max: f64,
}

impl ModelParams {
    pub const MIN_CELLS: usize = 16;

    pub fn new(
        bending: f64,
        disjoining_exp: f64,
        mobility_exp: f64,
        length: f64,
        cells: usize,
    ) -> Result<Self, ModelError> {
        let p = ModelParams {
            bending,
            disjoining_exp,
            mobility_exp,
            length,
            cells,
            ..Self::numerics_defaults()
        };
        p.validate()?;
        Ok(p)
    }

    // Numerical knobs only; physical fields are placeholders.
    fn numerics_defaults() -> Self {
        ModelParams {
            bending: 1.0,
            disjoining_exp: 3.0,
            mobility_exp: 3.0,
            length: 1.0,
            cells: 200,
            newton_tol: 1e-10,
            newton_max_iter: 25,
            dt_init: 1e-6,
            h_stop: 1e-4,
            dt_cap_coeff: 0.5,
            max_rel_change: 0.05,
            time_tol: 1e-5,
            t_max: 10.0,
        }
    }

    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        positive("B", self.bending)?;
        positive("m", self.disjoining_exp)?;
        positive("n", self.mobility_exp)?;
        positive("L", self.length)?;
        if self.cells < Self::MIN_CELLS {
            return Err(ModelError::param(
                "N",
                format!("must be at least {}, got {}", Self::MIN_CELLS, self.cells),
            ));
        }
        positive("newton_tol", self.newton_tol)?;
        if self.newton_max_iter == 0 {
            return Err(ModelError::param("newton_max_iter", "must be at least 1"));
        }
        positive("dt_init", self.dt_init)?;
        positive("h_stop", self.h_stop)?;
        if self.h_stop >= 1.0 {
            return Err(ModelError::param("h_stop", format!("must be below 1, got {}", self.h_stop)));
        }
        positive("dt_cap_coeff", self.dt_cap_coeff)?;
        positive("max_rel_change", self.max_rel_change)?;
        if self.max_rel_change >= 1.0 {
            return Err(ModelError::param(
                "max_rel_change",
                format!("must be below 1, got {}", self.max_rel_change),
            ));
        }
        positive("time_tol", self.time_tol)?;
        positive("t_max", self.t_max)?;
        Ok(())
    }
}

fn positive(name: &'static str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ModelError::param(name, format!("must be finite and > 0, got {v}")))
    }
}
