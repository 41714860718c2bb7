use rupture_core::FilmState;

use crate::error::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub x_c: f64,
    pub h: f64,
    pub hxx: f64,
    pub hxxxx: f64,
    /// Cell holding the discrete minimum.
    pub cell: usize,
}

// Cell value with even reflection across both walls.
fn reflected(h: &[f64], i: isize) -> f64 {
    let n = h.len() as isize;
    let mut j = i;
    loop {
        if j < 0 {
            j = -1 - j;
        } else if j >= n {
            j = 2 * n - 1 - j;
        } else {
            return h[j as usize];
        }
    }
}

// Quadratic through (-1, a), (0, b), (1, c) evaluated at s.
fn quad(a: f64, b: f64, c: f64, s: f64) -> f64 {
    b + 0.5 * s * (c - a) + 0.5 * s * s * (c - 2.0 * b + a)
}

/// Sub-cell minimum of the profile with h, h_xx and h_xxxx there.
///
/// The argmin is refined by the parabola through the three cells around the
/// discrete minimum; derivatives use centered stencils with reflected ghost
/// cells and are interpolated to the refined point the same way. A minimum
/// in a wall cell lands exactly on the wall.
pub fn locate_critical_point(state: &FilmState) -> Result<CriticalPoint, AnalysisError> {
    let h = &state.h;
    let (cell, &hmin) = h
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("empty profile");
    if !(hmin > 0.0) {
        return Err(AnalysisError::NonPositive(hmin));
    }
    let dx = state.grid.dx();
    let i = cell as isize;
    let v = |k: isize| reflected(h, i + k);
    let (a, b, c) = (v(-1), v(0), v(1));
    let curv = a - 2.0 * b + c;
    let s = if curv > 0.0 { ((a - c) / (2.0 * curv)).clamp(-0.5, 0.5) } else { 0.0 };
    let d2 = |k: isize| (v(k + 1) - 2.0 * v(k) + v(k - 1)) / (dx * dx);
    let d4 = |k: isize| (v(k + 2) - 4.0 * v(k + 1) + 6.0 * v(k) - 4.0 * v(k - 1) + v(k - 2)) / dx.powi(4);
    let mut hc = quad(a, b, c, s);
    if !(hc > 0.0) || hc > b {
        hc = b;
    }
    let x_c = if s == 0.5 && cell + 1 == h.len() {
        state.grid.length()
    } else if s == -0.5 && cell == 0 {
        0.0
    } else {
        state.grid.centers()[cell] + s * dx
    };
    Ok(CriticalPoint {
        x_c,
        h: hc,
        hxx: quad(d2(-1), d2(0), d2(1), s),
        hxxxx: quad(d4(-1), d4(0), d4(1), s),
        cell,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rupture_core::Grid;

    #[test]
    fn reflection_indices() {
        let h = [1.0, 2.0, 3.0];
        assert_eq!(reflected(&h, -1), 1.0);
        assert_eq!(reflected(&h, -2), 2.0);
        assert_eq!(reflected(&h, 3), 3.0);
        assert_eq!(reflected(&h, 4), 2.0);
    }

    #[test]
    fn wall_minimum() {
        let g = Grid::new(2.0, 400).unwrap();
        let h = g.centers().iter().map(|x| 0.5 + 0.01 * (std::f64::consts::PI * x / 2.0).cos()).collect();
        let cp = locate_critical_point(&FilmState { t: 0.0, h, grid: g }).unwrap();
        assert_eq!(cp.x_c, 2.0);
        assert!((cp.h - 0.49).abs() < 1e-6);
    }
}
