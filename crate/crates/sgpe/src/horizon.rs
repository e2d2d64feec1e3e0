//! Sonic-horizon construction: a step in the transverse confinement splits
//! the flow into a subsonic upstream and a supersonic downstream region.
//!
//! The downstream state follows from two conditions,
//!
//!   mass current:        rho_u v_u = rho_d v_d
//!   chemical potential:  M v^2/2 + hbar w_perp + 2 hbar w_perp a_s rho  equal
//!
//! solved for the supersonic (low-density) root. In upstream oscillator units
//! the matched two-region background with piecewise interaction g(z) and
//! transverse offset is then an exact stationary state of the flow equation,
//! which is what makes long horizon runs possible.
//!
//! The periodic domain closes the flow into a ring: the downstream region
//! returns to upstream values through a second transition placed inside the
//! absorbing layer near the domain edge, and the total phase winding is
//! rounded to a whole number of turns there.

use crate::dynamics::SgpeCoefficients;
use crate::error::{Result, SgpeError};
use crate::field::ComplexField;
use crate::grid::Grid1D;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Width of the downstream -> upstream return transition at the ring seam.
const RETURN_WIDTH: f64 = 4.0;
/// Distance of the return-transition center from the domain edge.
const RETURN_MARGIN: f64 = 18.0;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HorizonConfig {
    /// Upstream transverse trap frequency [rad/s].
    pub omega_perp_up: f64,
    /// Downstream transverse trap frequency [rad/s]; must exceed upstream.
    pub omega_perp_down: f64,
    /// Upstream line density [1/m].
    pub rho0_up: f64,
    /// Upstream flow speed [m/s].
    pub v0_up: f64,
    /// Horizon location in upstream oscillator units.
    pub horizon_position: f64,
    /// Width of the confinement step, upstream oscillator units.
    pub smoothing_width: f64,
}

impl HorizonConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_perp_up", self.omega_perp_up),
            ("omega_perp_down", self.omega_perp_down),
            ("rho0_up", self.rho0_up),
            ("v0_up", self.v0_up),
            ("smoothing_width", self.smoothing_width),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SgpeError::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.omega_perp_up >= self.omega_perp_down {
            return Err(SgpeError::InvalidParameter(format!(
                "horizon needs omega_perp_up < omega_perp_down, got {} >= {}",
                self.omega_perp_up, self.omega_perp_down
            )));
        }
        Ok(())
    }
}

/// Output of the matching solver, SI units.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HorizonMatch {
    pub rho0_down: f64,
    pub v0_down: f64,
    pub c_s_up: f64,
    pub c_s_down: f64,
    pub mach_up: f64,
    pub mach_down: f64,
    /// Velocity-offset scale: average of (|c_su| - v_u) and (v_d - |c_sd|).
    pub u: f64,
}

/// Solve current conservation + equal chemical potential for the downstream
/// density, selecting the supersonic branch.
pub fn solve_horizon_matching(h: &HorizonConfig, a_s: f64, mass: f64) -> Result<HorizonMatch> {
    use crate::constants::HBAR;
    h.validate()?;
    let current = h.rho0_up * h.v0_up;
    let mu_up = 0.5 * mass * h.v0_up * h.v0_up
        + HBAR * h.omega_perp_up
        + 2.0 * HBAR * h.omega_perp_up * a_s * h.rho0_up;
    // deficit(x) = mu_up - mu_down(x); supersonic root lies left of the
    // maximum x_star, where the kinetic and interaction terms balance
    let deficit = |x: f64| {
        mu_up
            - 0.5 * mass * (current / x) * (current / x)
            - HBAR * h.omega_perp_down
            - 2.0 * HBAR * h.omega_perp_down * a_s * x
    };
    let x_star = (mass * current * current / (2.0 * HBAR * h.omega_perp_down * a_s)).powf(1.0 / 3.0);
    if deficit(x_star) <= 0.0 {
        return Err(SgpeError::RootSolve(format!(
            "no supersonic downstream state: chemical potentials cannot match \
             (best deficit {:.3e} J at rho = {:.3e} /m)",
            deficit(x_star),
            x_star
        )));
    }
    let mut lo = x_star * 1.0e-12;
    let mut hi = x_star;
    if deficit(lo) >= 0.0 {
        return Err(SgpeError::RootSolve(
            "supersonic bracket failed: deficit non-negative at vanishing density".into(),
        ));
    }
    let mut iterations = 0;
    while (hi - lo) / x_star > 1.0e-14 {
        iterations += 1;
        if iterations > 200 {
            return Err(SgpeError::RootSolve(format!(
                "bisection failed to converge in 200 iterations; bracket [{lo:.6e}, {hi:.6e}]"
            )));
        }
        let mid = 0.5 * (lo + hi);
        if deficit(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho0_down = 0.5 * (lo + hi);
    let v0_down = current / rho0_down;
    let sound = |rho: f64, omega: f64| (2.0 * HBAR * omega * a_s * rho / mass).sqrt();
    let c_s_up = sound(h.rho0_up, h.omega_perp_up);
    let c_s_down = sound(rho0_down, h.omega_perp_down);
    let mach_up = h.v0_up / c_s_up;
    let mach_down = v0_down / c_s_down;
    if !(mach_up < 1.0 && mach_down > 1.0) {
        return Err(SgpeError::RootSolve(format!(
            "matched state is not a sonic horizon: m_u = {mach_up:.3}, m_d = {mach_down:.3}"
        )));
    }
    Ok(HorizonMatch {
        rho0_down,
        v0_down,
        c_s_up,
        c_s_down,
        mach_up,
        mach_down,
        u: 0.5 * ((c_s_up - h.v0_up) + (v0_down - c_s_down)),
    })
}

/// Smooth step 0 -> 1 centered at `c` with width `w`, normalized to hit the
/// endpoints exactly at the domain edges so the periodic continuation stays
/// smooth at machine precision.
fn normalized_step(grid: &Grid1D, c: f64, w: f64) -> Vec<f64> {
    let half = 0.5 * grid.length;
    let raw = |z: f64| 0.5 * (((z - c) / w).tanh() + 1.0);
    let lo = raw(-half);
    let hi = raw(half);
    grid.coordinates()
        .iter()
        .map(|&z| (raw(z) - lo) / (hi - lo))
        .collect()
}

/// The constructed two-region state plus everything needed to evolve it.
pub struct HorizonBackground {
    pub field: ComplexField,
    pub coeffs: SgpeCoefficients,
    pub matching: HorizonMatch,
    /// Target density profile (upstream units), for quiescence checks.
    pub density_profile: Vec<f64>,
    /// Dimensionless downstream/upstream quantities.
    pub k0_up: f64,
    pub density_ratio: f64,
    pub omega_ratio_down: f64,
}

impl HorizonBackground {
    /// Local Mach number of the target profile.
    pub fn mach_numbers(&self) -> Vec<f64> {
        self.density_profile
            .iter()
            .zip(self.coeffs.g_profile.iter())
            .map(|(&rho, &g)| {
                let v = self.k0_up / rho;
                v / (g * rho).sqrt()
            })
            .collect()
    }
}

/// Build the smoothed two-region background field and the matching piecewise
/// equation coefficients, in upstream oscillator units.
pub fn horizon_background(
    h: &HorizonConfig,
    a_s: f64,
    mass: f64,
    gamma: f64,
    grid: Grid1D,
) -> Result<HorizonBackground> {
    use crate::constants::HBAR;
    let matching = solve_horizon_matching(h, a_s, mass)?;
    let half = 0.5 * grid.length;
    if h.horizon_position.abs() > 0.8 * half {
        return Err(SgpeError::InvalidParameter(format!(
            "horizon at {} sits too close to the domain edge (|z| <= {} required)",
            h.horizon_position,
            0.8 * half
        )));
    }
    let l_perp = (HBAR / (mass * h.omega_perp_up)).sqrt();
    let k0_up = h.v0_up / (l_perp * h.omega_perp_up);
    let g_up = 2.0 * a_s * h.rho0_up;
    let omega_ratio = h.omega_perp_down / h.omega_perp_up;
    let density_ratio = matching.rho0_down / h.rho0_up;

    // profile shape: up-step at the horizon, return step inside the edge layer
    let enter = normalized_step(&grid, h.horizon_position, h.smoothing_width);
    let exit = normalized_step(&grid, half - RETURN_MARGIN, RETURN_WIDTH);
    let shape: Vec<f64> = enter.iter().zip(exit.iter()).map(|(&a, &b)| a - b).collect();

    let density_profile: Vec<f64> = shape
        .iter()
        .map(|&s| 1.0 + (density_ratio - 1.0) * s)
        .collect();
    let g_profile: Vec<f64> = shape
        .iter()
        .map(|&s| g_up * (1.0 + (omega_ratio - 1.0) * s))
        .collect();
    let offset_profile: Vec<f64> = shape
        .iter()
        .map(|&s| 1.0 + (omega_ratio - 1.0) * s)
        .collect();

    // phase: dS/dz = v(z) - k0 with rho v = k0 (current conservation);
    // accumulate by trapezoid, then round the total winding to a whole
    // number of 2*pi turns with a correction confined to the return step
    let hgrid = grid.spacing();
    let dphi: Vec<f64> = density_profile.iter().map(|&r| k0_up * (1.0 / r - 1.0)).collect();
    let n = grid.n_points;
    let mut phase = vec![0.0f64; n];
    for j in 1..n {
        phase[j] = phase[j - 1] + 0.5 * hgrid * (dphi[j - 1] + dphi[j]);
    }
    let total = phase[n - 1] + 0.5 * hgrid * (dphi[n - 1] + dphi[0]);
    let two_pi = 2.0 * std::f64::consts::PI;
    let target = two_pi * (total / two_pi).round();
    let correction = target - total;
    for j in 0..n {
        phase[j] += correction * exit[j];
    }

    let data: Vec<Complex64> = density_profile
        .iter()
        .zip(phase.iter())
        .map(|(&r, &s)| r.sqrt() * Complex64::new(0.0, s).exp())
        .collect();

    let coeffs = SgpeCoefficients {
        gamma,
        mu_tilde: 1.0 + g_up,
        k0_tilde: k0_up,
        omega: 0.0,
        g_profile,
        offset_profile,
    };

    Ok(HorizonBackground {
        field: ComplexField::from_data(grid, data)?,
        coeffs,
        matching,
        density_profile,
        k0_up,
        density_ratio,
        omega_ratio_down: omega_ratio,
    })
}

/// Absorbing-layer rate profile: zero in the interior, rising smoothly to
/// `sigma_max` over the outer `fraction` of the domain on both sides.
pub fn sponge_profile(grid: &Grid1D, fraction: f64, sigma_max: f64, width: f64) -> Vec<f64> {
    let half = 0.5 * grid.length;
    let start = (1.0 - fraction) * half;
    grid.coordinates()
        .iter()
        .map(|&z| sigma_max * 0.5 * (((z.abs() - start - 3.0 * width) / width).tanh() + 1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::MASS_RB87;
    use crate::units::PhysicalParams;

    fn paper_horizon() -> HorizonConfig {
        HorizonConfig {
            omega_perp_up: 2.0 * std::f64::consts::PI * 133.0,
            omega_perp_down: 2.0 * std::f64::consts::PI * 140.0,
            rho0_up: 1.0e8,
            v0_up: 2.5e-4,
            horizon_position: 0.0,
            smoothing_width: 2.0,
        }
    }

    fn a_s() -> f64 {
        PhysicalParams::bohr_radii(94.8)
    }

    #[test]
    fn matching_reproduces_quoted_state() {
        let m = solve_horizon_matching(&paper_horizon(), a_s(), MASS_RB87).unwrap();
        assert!((m.rho0_down - 2.67e7).abs() / 2.67e7 < 0.05, "rho_d {:e}", m.rho0_down);
        assert!((m.v0_down - 0.94e-3).abs() / 0.94e-3 < 0.05, "v_d {:e}", m.v0_down);
        assert!((m.mach_up - 0.3).abs() < 0.05, "m_u {}", m.mach_up);
        assert!((m.mach_down - 2.3).abs() / 2.3 < 0.05, "m_d {}", m.mach_down);
    }

    #[test]
    fn matching_equations_satisfied_to_tolerance() {
        use crate::constants::HBAR;
        let h = paper_horizon();
        let m = solve_horizon_matching(&h, a_s(), MASS_RB87).unwrap();
        let mu = |v: f64, omega: f64, rho: f64| {
            0.5 * MASS_RB87 * v * v + HBAR * omega + 2.0 * HBAR * omega * a_s() * rho
        };
        let mu_u = mu(h.v0_up, h.omega_perp_up, h.rho0_up);
        let mu_d = mu(m.v0_down, h.omega_perp_down, m.rho0_down);
        assert!((mu_u - mu_d).abs() / mu_u < 1.0e-12);
        let j_u = h.rho0_up * h.v0_up;
        let j_d = m.rho0_down * m.v0_down;
        assert!((j_u - j_d).abs() / j_u < 1.0e-12);
    }

    #[test]
    fn symmetric_trap_fails_sonic_condition() {
        let mut h = paper_horizon();
        h.omega_perp_down = h.omega_perp_up;
        assert!(solve_horizon_matching(&h, a_s(), MASS_RB87).is_err());
    }

    #[test]
    fn background_density_plateaus() {
        let grid = Grid1D::new(4096, 600.0).unwrap();
        let bg = horizon_background(&paper_horizon(), a_s(), MASS_RB87, 2.0e-5, grid).unwrap();
        let rho = bg.field.density();
        let at = |z: f64| rho[grid.nearest_index(z)];
        assert!((at(-150.0) - 1.0).abs() < 1e-10, "upstream {}", at(-150.0));
        let expect_down = bg.density_ratio;
        assert!(
            (at(150.0) - expect_down).abs() / expect_down < 1e-6,
            "downstream {} vs {}",
            at(150.0),
            expect_down
        );
        // machine-smooth at the seam
        let n = grid.n_points;
        let seam = (bg.field.data[0] - bg.field.data[n - 1]).norm();
        assert!(seam < 1e-3, "seam step {seam:e}");
        let winding = bg.field.winding_number();
        assert!((winding - winding.round()).abs() < 1e-6, "winding {winding}");
    }

    #[test]
    fn mach_crosses_unity_at_horizon() {
        let grid = Grid1D::new(4096, 600.0).unwrap();
        let bg = horizon_background(&paper_horizon(), a_s(), MASS_RB87, 2.0e-5, grid).unwrap();
        let mach = bg.mach_numbers();
        let up = mach[grid.nearest_index(-150.0)];
        let down = mach[grid.nearest_index(150.0)];
        assert!(up < 1.0 && down > 1.0, "mach {up} .. {down}");
        assert!((up - bg.matching.mach_up).abs() < 0.02);
        assert!((down - bg.matching.mach_down).abs() < 0.1);
    }

    #[test]
    fn sponge_vanishes_in_interior() {
        let grid = Grid1D::new(1024, 600.0).unwrap();
        let sp = sponge_profile(&grid, 0.1, 0.5, 4.0);
        assert!(sp[grid.nearest_index(0.0)] < 1e-12);
        assert!(sp[grid.nearest_index(250.0)] < 1e-3);
        assert!((sp[grid.nearest_index(299.0)] - 0.5).abs() < 0.05);
    }
}
