//! Pseudospectral operators on the periodic grid.
//!
//! Derivatives are exact for band-limited fields: multiply the spectrum by
//! (i k)^order and transform back. For odd orders the Nyquist mode is zeroed
//! (its derivative phase is ambiguous on the real grid); for even orders the
//! full (-k^2)^(order/2) weight applies.

use crate::error::{Result, SgpeError};
use crate::grid::Grid1D;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// FFT plans plus scratch buffers for one grid size.
pub struct FftWorkspace {
    pub grid: Grid1D,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    spec: Vec<Complex64>,
    /// i k with the Nyquist mode zeroed.
    d1_symbol: Vec<Complex64>,
    /// -k^2 (Nyquist kept).
    d2_symbol: Vec<f64>,
    /// -i k^3 with the Nyquist mode zeroed.
    d3_symbol: Vec<Complex64>,
}

impl FftWorkspace {
    pub fn new(grid: Grid1D) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n_points);
        let inv = planner.plan_fft_inverse(grid.n_points);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        let k = grid.wavenumbers();
        let nyq = grid.nyquist_index();
        let d1_symbol = k
            .iter()
            .enumerate()
            .map(|(j, &kj)| {
                if j == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, kj)
                }
            })
            .collect();
        let d2_symbol = k.iter().map(|&kj| -kj * kj).collect();
        let d3_symbol = k
            .iter()
            .enumerate()
            .map(|(j, &kj)| {
                if j == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, -kj * kj * kj)
                }
            })
            .collect();
        FftWorkspace {
            grid,
            fwd,
            inv,
            scratch: vec![Complex64::default(); scratch_len],
            spec: vec![Complex64::default(); grid.n_points],
            d1_symbol,
            d2_symbol,
            d3_symbol,
        }
    }

    #[inline]
    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.grid.n_points {
            return Err(SgpeError::InvalidGrid(format!(
                "field length {len} does not match grid size {}",
                self.grid.n_points
            )));
        }
        Ok(())
    }

    /// Unnormalized forward transform of `f` into the internal spectrum buffer.
    fn load_spectrum(&mut self, f: &[Complex64]) {
        self.spec.copy_from_slice(f);
        self.fwd.process_with_scratch(&mut self.spec, &mut self.scratch);
    }

    /// out = ifft(symbol .* fft(f)) with a purely real spectral symbol.
    pub fn apply_real_symbol(&mut self, f: &[Complex64], symbol: &[f64], out: &mut [Complex64]) {
        self.load_spectrum(f);
        let n_inv = 1.0 / self.grid.n_points as f64;
        for (s, &m) in self.spec.iter_mut().zip(symbol) {
            *s *= m * n_inv;
        }
        out.copy_from_slice(&self.spec);
        self.inv.process_with_scratch(out, &mut self.scratch);
    }

    /// out = ifft(symbol .* fft(f)) with a complex spectral symbol.
    pub fn apply_complex_symbol(
        &mut self,
        f: &[Complex64],
        symbol: &[Complex64],
        out: &mut [Complex64],
    ) {
        self.load_spectrum(f);
        let n_inv = 1.0 / self.grid.n_points as f64;
        for (s, &m) in self.spec.iter_mut().zip(symbol) {
            *s *= m * n_inv;
        }
        out.copy_from_slice(&self.spec);
        self.inv.process_with_scratch(out, &mut self.scratch);
    }

    /// Spectral derivative of order 1, 2 or 3.
    pub fn derivative(
        &mut self,
        f: &[Complex64],
        order: u32,
        out: &mut [Complex64],
    ) -> Result<()> {
        self.check_len(f.len())?;
        self.check_len(out.len())?;
        match order {
            1 => {
                let symbol = std::mem::take(&mut self.d1_symbol);
                self.apply_complex_symbol(f, &symbol, out);
                self.d1_symbol = symbol;
            }
            2 => {
                let symbol = std::mem::take(&mut self.d2_symbol);
                self.apply_real_symbol(f, &symbol, out);
                self.d2_symbol = symbol;
            }
            3 => {
                let symbol = std::mem::take(&mut self.d3_symbol);
                self.apply_complex_symbol(f, &symbol, out);
                self.d3_symbol = symbol;
            }
            _ => {
                return Err(SgpeError::InvalidParameter(format!(
                    "derivative order must be 1, 2 or 3, got {order}"
                )))
            }
        }
        Ok(())
    }

    /// Power spectrum sum(|F_hat|^2) / n, equal to sum(|F_j|^2) by Parseval.
    pub fn spectral_power(&mut self, f: &[Complex64]) -> f64 {
        self.load_spectrum(f);
        let n_inv = 1.0 / self.grid.n_points as f64;
        self.spec.iter().map(|c| c.norm_sqr() * n_inv).sum()
    }

    /// Periodic Gaussian smoothing of a real-valued sample array
    /// (multiplies the spectrum by exp(-k^2 sigma^2 / 2)).
    pub fn smooth_real(&mut self, values: &[f64], sigma: f64) -> Result<Vec<f64>> {
        self.check_len(values.len())?;
        if sigma == 0.0 {
            return Ok(values.to_vec());
        }
        if !(sigma > 0.0) {
            return Err(SgpeError::InvalidParameter(format!(
                "smoothing sigma must be non-negative, got {sigma}"
            )));
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process_with_scratch(&mut buf, &mut self.scratch);
        let n_inv = 1.0 / self.grid.n_points as f64;
        for (b, &k) in buf.iter_mut().zip(self.grid.wavenumbers().iter()) {
            *b *= (-0.5 * k * k * sigma * sigma).exp() * n_inv;
        }
        self.inv.process_with_scratch(&mut buf, &mut self.scratch);
        Ok(buf.iter().map(|c| c.re).collect())
    }
}
