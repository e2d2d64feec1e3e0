//! Linear excitation spectrum on a flowing uniform background.
//!
//! In transverse-oscillator units the two branches read
//!
//!   omega_pm(k) = v0 k +/- sqrt[ (k^2/2) (k^2/2 + 2 c_s^2) ]
//!
//! with small-k phase velocities v0 +/- |c_s|. A region is supersonic when
//! |v0| > |c_s|; there both low-k branches are dragged with the flow, which
//! is the horizon property. Excitations stay trapped in the downstream as
//! long as their group velocity cannot beat the flow; the trapping boundary
//! is the wavenumber where d omega_-/dk = 0, i.e. E'(k) = v0 for the
//! comoving dispersion E(k) = sqrt(k^4/4 + k^2 c_s^2). Since E' rises
//! monotonically from |c_s|, a root exists exactly in the supersonic case,
//! and the minimum trapped wavelength is 2 pi over that root.

use crate::error::{Result, SgpeError};
use serde::Serialize;

/// One row of a spectrum table.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BranchPoint {
    pub k: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub phase_velocity_plus: f64,
    pub phase_velocity_minus: f64,
}

/// Both branches of the Doppler-shifted spectrum.
pub fn dispersion(k: f64, v0: f64, c_s: f64) -> (f64, f64) {
    let root = excitation_energy(k, c_s);
    (v0 * k + root, v0 * k - root)
}

/// Comoving excitation energy E(k) = sqrt[(k^2/2)(k^2/2 + 2 c_s^2)].
pub fn excitation_energy(k: f64, c_s: f64) -> f64 {
    let half_k2 = 0.5 * k * k;
    (half_k2 * (half_k2 + 2.0 * c_s * c_s)).sqrt()
}

/// Comoving group velocity dE/dk.
pub fn group_velocity(k: f64, c_s: f64) -> f64 {
    if k == 0.0 {
        return c_s.abs();
    }
    let e = excitation_energy(k, c_s);
    k * (k * k + 2.0 * c_s * c_s) / (2.0 * e)
}

/// Spectrum table over a wavenumber list.
pub fn branch_table(ks: &[f64], v0: f64, c_s: f64) -> Vec<BranchPoint> {
    ks.iter()
        .map(|&k| {
            let (op, om) = dispersion(k, v0, c_s);
            let (pvp, pvm) = if k != 0.0 {
                (op / k, om / k)
            } else {
                (v0 + c_s.abs(), v0 - c_s.abs())
            };
            BranchPoint {
                k,
                omega_plus: op,
                omega_minus: om,
                phase_velocity_plus: pvp,
                phase_velocity_minus: pvm,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowClass {
    Subsonic,
    Supersonic,
    /// Exactly sonic: the marginal horizon-critical flow.
    Critical,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RegionClassification {
    pub class: FlowClass,
    pub mach: f64,
}

pub fn classify_region(v0: f64, c_s: f64) -> Result<RegionClassification> {
    if c_s == 0.0 || !c_s.is_finite() {
        return Err(SgpeError::InvalidParameter(format!(
            "sound speed must be finite and non-zero, got {c_s}"
        )));
    }
    let mach = v0 / c_s.abs();
    let class = if (mach.abs() - 1.0).abs() < 1.0e-12 {
        FlowClass::Critical
    } else if mach.abs() > 1.0 {
        FlowClass::Supersonic
    } else {
        FlowClass::Subsonic
    };
    Ok(RegionClassification { class, mach })
}

/// Shortest wavelength still trapped by a supersonic flow, in meters;
/// `scale` is the oscillator length that converts the dimensionless result.
pub fn min_trapped_wavelength(v0_d: f64, c_s_d: f64, scale: f64) -> Result<f64> {
    let v = v0_d.abs();
    let c = c_s_d.abs();
    if classify_region(v0_d, c_s_d)?.class != FlowClass::Supersonic {
        return Err(SgpeError::RootSolve(format!(
            "no trapped band: flow is not supersonic (v0 = {v0_d}, c_s = {c_s_d})"
        )));
    }
    // E' increases monotonically from c to infinity; bracket and bisect
    let mut lo = 0.0;
    let mut hi = 10.0;
    if group_velocity(hi, c) <= v {
        return Err(SgpeError::RootSolve(format!(
            "trapping boundary beyond k = 10: flow speed {v} out of the \
             hydrodynamic regime for c_s = {c}"
        )));
    }
    while hi - lo > 1.0e-10 {
        let mid = 0.5 * (lo + hi);
        if group_velocity(mid, c) < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k_star = 0.5 * (lo + hi);
    Ok(2.0 * std::f64::consts::PI / k_star * scale)
}
