//! Unit system and SI -> dimensionless parameter derivation.
//!
//! All simulation quantities are expressed in transverse-oscillator units:
//! lengths in l_perp = sqrt(hbar / (M omega_perp)), times in 1/omega_perp,
//! energies in hbar omega_perp. The effective 1D coupling is
//! g_1d = 2 hbar omega_perp a_s, so the dimensionless interaction strength is
//! g = 2 a_s rho0 and the uniform-background chemical potential is fixed to
//! mu = 1 + g, which makes |F| = 1 the stationary background.
//!
//! The thermal-bath strength enters twice, consistently: the dissipation rate
//! gamma = 3 M k_B T a_s^2 / (pi hbar^2) and the additive-noise correlator
//! <Lambda* Lambda> = Lambda0 delta(zeta - zeta') delta(tau - tau') with
//! Lambda0 = 2 gamma k_B T / (hbar omega_perp). Both scale with temperature,
//! so Lambda0 grows as T^2.

use crate::constants::{BOHR_RADIUS, HBAR, K_B};
use crate::error::{Result, SgpeError};
use serde::{Deserialize, Serialize};

/// Atom, trap and bath parameters in SI units.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Atomic mass [kg].
    pub mass: f64,
    /// s-wave scattering length [m].
    pub scattering_length: f64,
    /// Transverse (radial) trap angular frequency [rad/s].
    pub omega_perp: f64,
    /// Longitudinal trap angular frequency [rad/s].
    pub omega_z: f64,
    /// 1D line density of the background [1/m].
    pub line_density: f64,
    /// Bath temperature [K].
    pub temperature: f64,
    /// Background flow velocity [m/s].
    pub flow_velocity: f64,
    /// Atom number (used for the condensation temperature only).
    pub atom_number: f64,
}

impl PhysicalParams {
    /// Scattering length helper: `n` Bohr radii in metres.
    pub fn bohr_radii(n: f64) -> f64 {
        n * BOHR_RADIUS
    }

    /// Reference configuration: Rb-87, a_s = 94.8 Bohr radii, 133 Hz
    /// transverse trap, line density 10^8 /m, 5 nK bath, 0.25 mm/s flow.
    /// All bundled experiment configs start from this set.
    pub fn default_rb87() -> Self {
        PhysicalParams {
            mass: crate::constants::MASS_RB87,
            scattering_length: Self::bohr_radii(94.8),
            omega_perp: 2.0 * std::f64::consts::PI * 133.0,
            omega_z: 2.0 * std::f64::consts::PI * 5.9,
            line_density: 1.0e8,
            temperature: 5.0e-9,
            flow_velocity: 2.5e-4,
            atom_number: 5.0e4,
        }
    }

    /// Transverse oscillator length l_perp = sqrt(hbar / (M omega_perp)) [m].
    pub fn transverse_length(&self) -> f64 {
        (HBAR / (self.mass * self.omega_perp)).sqrt()
    }

    /// Time unit 1/omega_perp [s].
    pub fn time_scale(&self) -> f64 {
        1.0 / self.omega_perp
    }

    /// Velocity unit l_perp * omega_perp [m/s].
    pub fn velocity_scale(&self) -> f64 {
        self.transverse_length() * self.omega_perp
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("scattering_length", self.scattering_length),
            ("omega_perp", self.omega_perp),
            ("line_density", self.line_density),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SgpeError::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.temperature < 0.0 || !self.temperature.is_finite() {
            return Err(SgpeError::InvalidParameter(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        if self.omega_z < 0.0 || self.omega_z >= self.omega_perp {
            return Err(SgpeError::InvalidParameter(format!(
                "omega_z must satisfy 0 <= omega_z < omega_perp, got {} vs {}",
                self.omega_z, self.omega_perp
            )));
        }
        Ok(())
    }
}

/// Dimensionless coefficients of the scaled equation of motion.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScaledParams {
    /// Dissipation rate gamma (dimensionless).
    pub gamma: f64,
    /// Interaction strength g = 2 a_s rho0.
    pub g: f64,
    /// Trap anisotropy Omega = omega_z / omega_perp.
    pub omega_ratio: f64,
    /// Background flow wavenumber k0 = v0 / (l_perp omega_perp).
    pub k0_tilde: f64,
    /// Chemical potential mu = 1 + g (uniform background at |F| = 1).
    pub mu_tilde: f64,
    /// Noise strength Lambda0 = 2 gamma k_B T / (hbar omega_perp).
    pub lambda0: f64,
    /// Transverse oscillator length [m], kept for unit conversions on output.
    pub l_perp: f64,
    /// Time unit [s].
    pub t_unit: f64,
}

/// Derive the dimensionless equation coefficients from SI inputs.
pub fn derive_scales(p: &PhysicalParams) -> Result<ScaledParams> {
    p.validate()?;
    let l_perp = p.transverse_length();
    let gamma = dissipation_rate(p.temperature, p);
    let g = 2.0 * p.scattering_length * p.line_density;
    let lambda0 = 2.0 * gamma * K_B * p.temperature / (HBAR * p.omega_perp);
    Ok(ScaledParams {
        gamma,
        g,
        omega_ratio: p.omega_z / p.omega_perp,
        k0_tilde: p.flow_velocity / (l_perp * p.omega_perp),
        mu_tilde: 1.0 + g,
        lambda0,
        l_perp,
        t_unit: 1.0 / p.omega_perp,
    })
}

/// Noise strength Lambda0 = 2 gamma(T) k_B T / (hbar omega_perp) at an
/// arbitrary bath temperature (e.g. the Hawking temperature of a horizon run
/// where the emitted phonons, not the original cloud, drive the soliton).
/// Quadratic in T because gamma itself is linear in T.
pub fn noise_strength(temperature: f64, p: &PhysicalParams) -> f64 {
    2.0 * dissipation_rate(temperature, p) * K_B * temperature / (HBAR * p.omega_perp)
}

/// Thermal dissipation rate gamma = 3 M k_B T a_s^2 / (pi hbar^2).
pub fn dissipation_rate(temperature: f64, p: &PhysicalParams) -> f64 {
    3.0 * p.mass * K_B * temperature * p.scattering_length * p.scattering_length
        / (std::f64::consts::PI * HBAR * HBAR)
}

/// Speed of sound c_s = sqrt(g_1d rho0 / M) with g_1d = 2 hbar omega_perp a_s [m/s].
pub fn sound_speed(line_density: f64, omega_perp: f64, p: &PhysicalParams) -> f64 {
    (2.0 * HBAR * omega_perp * p.scattering_length * line_density / p.mass).sqrt()
}

/// Analogue Hawking temperature T_H = hbar u / (pi k_B l0) with the healing
/// length l0 = hbar / (M |c_s|) [K].
///
/// `u` is the velocity-offset scale of the horizon (how far the flow sits from
/// the sound speed on either side). The underlying gradient expansion assumes
/// u somewhat below |c_s|; callers probing u ~ |c_s| should treat the result
/// as an order-of-magnitude estimate.
pub fn hawking_temperature(u: f64, c_s: f64, p: &PhysicalParams) -> Result<f64> {
    if !(u > 0.0) {
        return Err(SgpeError::InvalidParameter(format!(
            "horizon velocity offset u must be positive, got {u}"
        )));
    }
    let l0 = HBAR / (p.mass * c_s.abs());
    Ok(HBAR * u / (std::f64::consts::PI * K_B * l0))
}

/// Condensation temperature of the finite 1D system,
/// T_c = N hbar omega_z / (ln(2N) k_B).
pub fn critical_temperature(p: &PhysicalParams) -> Result<f64> {
    if p.atom_number < 2.0 {
        return Err(SgpeError::InvalidParameter(format!(
            "atom_number must be at least 2 for T_c, got {}",
            p.atom_number
        )));
    }
    Ok(p.atom_number * HBAR * p.omega_z / ((2.0 * p.atom_number).ln() * K_B))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_params() -> PhysicalParams {
        PhysicalParams::default_rb87()
    }

    #[test]
    fn transverse_length_near_micron() {
        let p = paper_params();
        let l = p.transverse_length();
        assert!((l - 0.94e-6).abs() / 0.94e-6 < 0.05, "l_perp = {l:e}");
    }

    #[test]
    fn gamma_matches_quoted_value() {
        let p = paper_params();
        let gamma = dissipation_rate(p.temperature, &p);
        assert!((gamma - 0.22e-4).abs() / 0.22e-4 < 0.05, "gamma = {gamma:e}");
    }

    #[test]
    fn gamma_linear_in_temperature() {
        let p = paper_params();
        let g1 = dissipation_rate(5.0e-9, &p);
        let g2 = dissipation_rate(1.0e-8, &p);
        assert_eq!(g2, 2.0 * g1);
    }

    #[test]
    fn lambda0_quadratic_in_temperature() {
        let mut p = paper_params();
        let s1 = derive_scales(&p).unwrap();
        p.temperature *= 2.0;
        let s2 = derive_scales(&p).unwrap();
        assert!((s2.lambda0 / s1.lambda0 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn interaction_strength_near_unity() {
        let s = derive_scales(&paper_params()).unwrap();
        assert!((s.g - 1.0).abs() < 0.05, "g = {}", s.g);
        assert_eq!(s.mu_tilde, 1.0 + s.g);
    }

    #[test]
    fn upstream_sound_speed() {
        let p = paper_params();
        let c = sound_speed(p.line_density, p.omega_perp, &p);
        assert!((c - 0.78e-3).abs() / 0.78e-3 < 0.05, "c_s = {c:e}");
    }

    #[test]
    fn critical_temperature_microkelvin() {
        let tc = critical_temperature(&paper_params()).unwrap();
        assert!((tc - 1.2e-6).abs() / 1.2e-6 < 0.05, "T_c = {tc:e}");
    }

    #[test]
    fn critical_temperature_rejects_tiny_n() {
        let mut p = paper_params();
        p.atom_number = 1.0;
        assert!(critical_temperature(&p).is_err());
    }

    #[test]
    fn hawking_temperature_nanokelvin() {
        let p = paper_params();
        let th = hawking_temperature(0.527e-3, 0.78e-3, &p).unwrap();
        assert!((th - 1.4e-9).abs() / 1.4e-9 < 0.05, "T_H = {th:e}");
    }

    #[test]
    fn rejects_inverted_trap() {
        let mut p = paper_params();
        p.omega_z = p.omega_perp * 1.5;
        assert!(derive_scales(&p).is_err());
    }
}
