use crate::error::ModelError;

/// Uniform cell-centered grid on [0, L].
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    cells: usize,
    dx: f64,
    length: f64,
    centers: Vec<f64>,
}

impl Grid {
    pub fn new(length: f64, cells: usize) -> Result<Self, ModelError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(ModelError::param("L", format!("must be finite and > 0, got {length}")));
        }
        if cells < 2 {
            return Err(ModelError::param("N", "a grid needs at least two cells"));
        }
        let dx = length / cells as f64;
        let centers = (0..cells).map(|i| (i as f64 + 0.5) * dx).collect();
        Ok(Grid { cells, dx, length, centers })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }
}
