//! Periodic 1D grid.
//!
//! Coordinates span [-L/2, L/2) with n points, n a power of two (the FFT
//! plans assume it and the default sizes keep the radix-4 path). Wavenumbers
//! follow the standard FFT layout 0, dk, .., (n/2-1) dk, -n/2 dk, .., -dk
//! with dk = 2 pi / L.

use crate::error::{Result, SgpeError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub n_points: usize,
    pub length: f64,
}

impl Grid1D {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(SgpeError::InvalidGrid(format!(
                "n_points must be a power of two >= 16, got {n_points}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(SgpeError::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        Ok(Grid1D { n_points, length })
    }

    /// Grid spacing; spacing * n_points == length by construction.
    pub fn spacing(&self) -> f64 {
        self.length / self.n_points as f64
    }

    /// Coordinate of sample j, zeta_j = -L/2 + j * spacing.
    pub fn coordinate(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.spacing()
    }

    /// All coordinates.
    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.coordinate(j)).collect()
    }

    /// Wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * std::f64::consts::PI / self.length;
        (0..n)
            .map(|j| {
                if j <= n / 2 - 1 {
                    j as f64 * dk
                } else {
                    (j as f64 - n as f64) * dk
                }
            })
            .collect()
    }

    /// Largest |k| on the grid (the Nyquist mode).
    pub fn k_max(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }

    /// Index of the Nyquist mode in FFT order.
    pub fn nyquist_index(&self) -> usize {
        self.n_points / 2
    }

    /// Wrap a coordinate into [-L/2, L/2).
    pub fn wrap(&self, zeta: f64) -> f64 {
        let l = self.length;
        let mut z = (zeta + 0.5 * l).rem_euclid(l) - 0.5 * l;
        if z >= 0.5 * l {
            z -= l;
        }
        z
    }

    /// Nearest sample index to a (wrapped) coordinate.
    pub fn nearest_index(&self, zeta: f64) -> usize {
        let z = self.wrap(zeta);
        let j = ((z + 0.5 * self.length) / self.spacing()).round() as isize;
        (j.rem_euclid(self.n_points as isize)) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_spacing_is_exact() {
        let g = Grid1D::new(4096, 600.0).unwrap();
        assert_eq!(g.spacing() * g.n_points as f64, g.length);
        assert_eq!(g.spacing(), 600.0 / 4096.0);
    }

    #[test]
    fn wavenumber_layout() {
        let g = Grid1D::new(16, 16.0).unwrap();
        let k = g.wavenumbers();
        let dk = 2.0 * std::f64::consts::PI / 16.0;
        assert_eq!(k[0], 0.0);
        assert!((k[1] - dk).abs() < 1e-15);
        assert!((k[7] - 7.0 * dk).abs() < 1e-14);
        assert!((k[8] + 8.0 * dk).abs() < 1e-14);
        assert!((k[15] + dk).abs() < 1e-14);
        assert_eq!(g.nyquist_index(), 8);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Grid1D::new(100, 10.0).is_err());
        assert!(Grid1D::new(8, 10.0).is_err());
        assert!(Grid1D::new(4096, -1.0).is_err());
    }

    #[test]
    fn wrap_and_nearest() {
        let g = Grid1D::new(16, 16.0).unwrap();
        assert_eq!(g.wrap(8.0), -8.0);
        assert_eq!(g.wrap(-8.5), 7.5);
        assert_eq!(g.nearest_index(-8.0), 0);
        assert_eq!(g.nearest_index(0.0), 8);
    }
}
