use std::f64::consts::PI;

use crate::error::ModelError;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    Cosine,
}

/// Perturbed flat film `hbar + delta * cos(mode * pi * x / L)`.
///
/// `mode = 1` puts the initial minimum at x = L; `mode = 2` puts it at the
/// domain midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialCondition {
    pub kind: InitialKind,
    pub hbar: f64,
    pub delta: f64,
    pub mode: u32,
}

impl InitialCondition {
    pub fn cosine(hbar: f64, delta: f64) -> Self {
        InitialCondition {
            kind: InitialKind::Cosine,
            hbar,
            delta,
            mode: 1,
        }
    }

    pub fn with_mode(mut self, mode: u32) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.hbar.is_finite() && self.delta.is_finite()) || self.delta < 0.0 || self.hbar <= self.delta {
            return Err(ModelError::NonPositiveFilm {
                hbar: self.hbar,
                delta: self.delta,
            });
        }
        Ok(())
    }

    pub fn value_at(&self, x: f64, length: f64) -> f64 {
        match self.kind {
            InitialKind::Cosine => self.hbar + self.delta * (self.mode as f64 * PI * x / length).cos(),
        }
    }
}

/// Film profile at a given time on its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FilmState {
    pub t: f64,
    pub h: Vec<f64>,
    pub grid: Grid,
}

impl FilmState {
    pub fn h_min(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn make_initial_condition(ic: &InitialCondition, grid: &Grid) -> Result<FilmState, ModelError> {
    ic.validate()?;
    let h = grid
        .centers()
        .iter()
        .map(|&x| ic.value_at(x, grid.length()))
        .collect();
    Ok(FilmState {
        t: 0.0,
        h,
        grid: grid.clone(),
    })
}

/// Midpoint-rule mass, sum of h_i * dx.
pub fn mass(state: &FilmState) -> f64 {
    state.h.iter().sum::<f64>() * state.grid.dx()
}
