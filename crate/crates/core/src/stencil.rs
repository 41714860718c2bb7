//! Second-order staggered differences on the cell-centered grid.
//!
//! Cell quantities live at x_i = (i + 1/2) dx, face quantities at x_f = f dx
//! for f = 0..=N. Even reflection of cell data across both walls makes every
//! boundary-face gradient vanish, so face vectors always carry zeros at
//! f = 0 and f = N.

/// Face gradient of a cell field; length N + 1 with zero boundary entries.
pub fn face_gradient(cell: &[f64], dx: f64) -> Vec<f64> {
    let n = cell.len();
    let mut out = vec![0.0; n + 1];
    for f in 1..n {
        out[f] = (cell[f] - cell[f - 1]) / dx;
    }
    out
}

/// Cell divergence of a face field; length N.
pub fn cell_divergence(face: &[f64], dx: f64) -> Vec<f64> {
    face.windows(2).map(|w| (w[1] - w[0]) / dx).collect()
}

/// Three-point second derivative with reflecting walls.
pub fn cell_laplacian(cell: &[f64], dx: f64) -> Vec<f64> {
    cell_divergence(&face_gradient(cell, dx), dx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_has_constant_interior_laplacian() {
        let dx = 0.1;
        let h: Vec<f64> = (0..10).map(|i| ((i as f64 + 0.5) * dx).powi(2)).collect();
        let lap = cell_laplacian(&h, dx);
        for v in &lap[1..9] {
            assert!((v - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn boundary_faces_vanish() {
        let k = face_gradient(&[1.0, 2.0, 4.0], 1.0);
        assert_eq!(k, vec![0.0, 1.0, 2.0, 0.0]);
    }
}
