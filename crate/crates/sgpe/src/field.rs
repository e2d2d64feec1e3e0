//! Complex field on the grid: densities, phases, snapshot serialization.

use crate::error::{Result, SgpeError};
use crate::grid::Grid1D;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Modulus below which the local phase is treated as undefined.
pub const PHASE_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct ComplexField {
    pub grid: Grid1D,
    pub data: Vec<Complex64>,
}

impl ComplexField {
    pub fn uniform(grid: Grid1D, value: Complex64) -> Self {
        ComplexField {
            grid,
            data: vec![value; grid.n_points],
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let data = grid.coordinates().iter().map(|&z| f(z)).collect();
        ComplexField { grid, data }
    }

    pub fn from_data(grid: Grid1D, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.n_points {
            return Err(SgpeError::InvalidGrid(format!(
                "field length {} does not match grid size {}",
                data.len(),
                grid.n_points
            )));
        }
        Ok(ComplexField { grid, data })
    }

    pub fn density(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Integral of |F|^2 over the domain (trapezoid = rectangle rule on a
    /// periodic grid).
    pub fn norm_sq_integral(&self) -> f64 {
        self.grid.spacing() * self.data.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn max_density(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Pointwise phase, unwrapped cumulatively from the left edge, plus a
    /// per-point flag marking where the modulus is large enough for the phase
    /// to mean anything. Undefined points repeat the last defined value.
    pub fn unwrapped_phase(&self) -> (Vec<f64>, Vec<bool>) {
        let mut phase = Vec::with_capacity(self.data.len());
        let mut defined = Vec::with_capacity(self.data.len());
        let mut prev = 0.0f64;
        let mut have_prev = false;
        for c in &self.data {
            if c.norm() < PHASE_FLOOR {
                phase.push(prev);
                defined.push(false);
                continue;
            }
            let raw = c.arg();
            let unwrapped = if have_prev {
                let two_pi = 2.0 * std::f64::consts::PI;
                raw - two_pi * ((raw - prev) / two_pi).round()
            } else {
                raw
            };
            phase.push(unwrapped);
            defined.push(true);
            prev = unwrapped;
            have_prev = true;
        }
        (phase, defined)
    }

    /// Total phase winding across the periodic domain, in units of 2*pi.
    pub fn winding_number(&self) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut total = 0.0;
        for j in 0..self.data.len() {
            let a = self.data[j];
            let b = self.data[(j + 1) % self.data.len()];
            if a.norm() < PHASE_FLOOR || b.norm() < PHASE_FLOOR {
                continue;
            }
            let d = (b / a).arg();
            total += d;
        }
        total / two_pi
    }
}

/// Metadata stored in the snapshot header line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub n_points: usize,
    pub length: f64,
    pub tau: f64,
    pub seed: u64,
}

/// Write a field as a single JSON header line followed by little-endian
/// f64 (re, im) pairs.
pub fn write_snapshot(path: &Path, field: &ComplexField, tau: f64, seed: u64) -> Result<()> {
    let meta = SnapshotMeta {
        n_points: field.grid.n_points,
        length: field.grid.length,
        tau,
        seed,
    };
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, &meta).map_err(|e| SgpeError::Serde(e.to_string()))?;
    w.write_all(b"\n")?;
    for c in &field.data {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(ComplexField, SnapshotMeta)> {
    let file = std::fs::File::open(path)?;
    let mut r = BufReader::new(file);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let meta: SnapshotMeta =
        serde_json::from_str(header.trim_end()).map_err(|e| SgpeError::Serde(e.to_string()))?;
    let grid = Grid1D::new(meta.n_points, meta.length)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != meta.n_points * 16 {
        return Err(SgpeError::Serde(format!(
            "snapshot payload is {} bytes, expected {}",
            bytes.len(),
            meta.n_points * 16
        )));
    }
    let mut data = Vec::with_capacity(meta.n_points);
    for chunk in bytes.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        data.push(Complex64::new(re, im));
    }
    Ok((ComplexField::from_data(grid, data)?, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_unwraps_through_branch_cut() {
        let grid = Grid1D::new(64, 32.0).unwrap();
        // winding plane wave: raw arg jumps by 2*pi; unwrapped must be smooth
        let k = 2.0 * std::f64::consts::PI * 3.0 / grid.length;
        let f = ComplexField::from_fn(grid, |z| Complex64::new(0.0, k * z).exp());
        let (phase, defined) = f.unwrapped_phase();
        assert!(defined.iter().all(|&d| d));
        for (p, &z) in phase.iter().zip(grid.coordinates().iter()) {
            // unwrapped phase = k z up to the overall branch at the left edge
            let diff = p - k * z - (phase[0] - k * grid.coordinate(0));
            assert!(diff.abs() < 1e-9, "diff {diff}");
        }
        assert!((f.winding_number() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn phase_flagged_undefined_at_zero() {
        let grid = Grid1D::new(16, 8.0).unwrap();
        let mut f = ComplexField::uniform(grid, Complex64::new(1.0, 0.0));
        f.data[5] = Complex64::new(0.0, 0.0);
        let (_, defined) = f.unwrapped_phase();
        assert!(!defined[5]);
        assert!(defined[4] && defined[6]);
    }

    #[test]
    fn snapshot_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.snap");
        let grid = Grid1D::new(32, 600.0).unwrap();
        let f = ComplexField::from_fn(grid, |z| {
            Complex64::new((0.37 * z).sin() * 1.0e-7, (1.0 + z * z).ln())
        });
        write_snapshot(&path, &f, 12.5, 99).unwrap();
        let (g, meta) = read_snapshot(&path).unwrap();
        assert_eq!(meta.n_points, 32);
        assert_eq!(meta.seed, 99);
        assert_eq!(meta.tau, 12.5);
        for (a, b) in f.data.iter().zip(&g.data) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
}
