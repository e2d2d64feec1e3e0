//! Time evolution of the damped stochastic field equation
//!
//!   dF/dtau = -i (1 - i gamma) [ offset(z) - mu + (Omega^2/2) z^2 + g(z)|F|^2
//!                                - i k0 d/dz - (1/2) d^2/dz^2 ] F
//!             - sigma_sponge(z) (F - F_ref(z))  + noise
//!
//! The advection and kinetic terms are applied together in Fourier space
//! through the real symbol k0*k + k^2/2 (one FFT pair per evaluation), the
//! local terms pointwise, and the deterministic part is stepped with classical
//! RK4. Additive noise is injected after each full step (Euler-Maruyama):
//! each cell receives an independent complex Gaussian increment with
//! Var(Re) = Var(Im) = lambda0 * dt / (2 h), the lattice form of a
//! delta-correlated field.

use crate::error::{Result, SgpeError};
use crate::field::ComplexField;
use crate::grid::Grid1D;
use crate::spectral::FftWorkspace;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// RK4 on the imaginary axis is stable up to |dt * k_max^2 / 2| = 2*sqrt(2);
/// stay a little inside that.
pub const STABILITY_MARGIN: f64 = 2.8;

/// Coefficients of the field equation. Space-dependent interaction and
/// potential-offset profiles support two-region flow backgrounds; for a
/// homogeneous run they are constant.
#[derive(Clone, Debug)]
pub struct SgpeCoefficients {
    pub gamma: f64,
    pub mu_tilde: f64,
    pub k0_tilde: f64,
    /// Axial trap frequency in transverse units; 0 for a ring/untrapped run.
    pub omega: f64,
    pub g_profile: Vec<f64>,
    pub offset_profile: Vec<f64>,
}

impl SgpeCoefficients {
    pub fn uniform(grid: Grid1D, gamma: f64, mu_tilde: f64, k0_tilde: f64, g: f64) -> Self {
        SgpeCoefficients {
            gamma,
            mu_tilde,
            k0_tilde,
            omega: 0.0,
            g_profile: vec![g; grid.n_points],
            offset_profile: vec![1.0; grid.n_points],
        }
    }

    fn validate(&self, grid: &Grid1D) -> Result<()> {
        if self.g_profile.len() != grid.n_points || self.offset_profile.len() != grid.n_points {
            return Err(SgpeError::InvalidGrid(
                "coefficient profiles must match the grid size".into(),
            ));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(SgpeError::InvalidParameter(format!(
                "gamma must be finite and non-negative, got {}",
                self.gamma
            )));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(SgpeError::InvalidParameter(format!(
                "omega must be finite and non-negative, got {}",
                self.omega
            )));
        }
        Ok(())
    }
}

/// Absorbing / relaxation layer: drives the field toward a reference profile
/// at rate sigma(z). Used near the domain edge to keep a two-region flow
/// background steady and swallow outgoing radiation.
#[derive(Clone, Debug)]
pub struct Sponge {
    pub sigma: Vec<f64>,
    pub reference: Vec<Complex64>,
}

/// Deterministic right-hand side with preallocated spectral scratch.
pub struct RhsEvaluator {
    ws: FftWorkspace,
    /// k0*k + k^2/2; the odd (advection) part is zeroed at Nyquist.
    symbol: Vec<f64>,
    /// offset(z) - mu + (Omega^2/2) z^2.
    static_potential: Vec<f64>,
    g_profile: Vec<f64>,
    /// -i (1 - i gamma) = -gamma - i.
    prefactor: Complex64,
    sponge: Option<Sponge>,
}

impl RhsEvaluator {
    fn new(grid: Grid1D, coeffs: &SgpeCoefficients) -> Result<Self> {
        coeffs.validate(&grid)?;
        let nyq = grid.nyquist_index();
        let symbol = grid
            .wavenumbers()
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                let advect = if j == nyq { 0.0 } else { coeffs.k0_tilde * k };
                advect + 0.5 * k * k
            })
            .collect();
        let static_potential = grid
            .coordinates()
            .iter()
            .zip(coeffs.offset_profile.iter())
            .map(|(&z, &off)| off - coeffs.mu_tilde + 0.5 * coeffs.omega * coeffs.omega * z * z)
            .collect();
        Ok(RhsEvaluator {
            ws: FftWorkspace::new(grid),
            symbol,
            static_potential,
            g_profile: coeffs.g_profile.clone(),
            prefactor: Complex64::new(-coeffs.gamma, -1.0),
            sponge: None,
        })
    }

    pub fn set_sponge(&mut self, sponge: Option<Sponge>) {
        self.sponge = sponge;
    }

    pub fn eval(&mut self, f: &[Complex64], out: &mut [Complex64]) {
        // out <- (-i k0 d/dz - 1/2 d^2/dz^2) F
        self.ws.apply_real_symbol(f, &self.symbol, out);
        for j in 0..f.len() {
            let local = self.static_potential[j] + self.g_profile[j] * f[j].norm_sqr();
            out[j] = self.prefactor * (out[j] + local * f[j]);
        }
        if let Some(sp) = &self.sponge {
            for j in 0..f.len() {
                out[j] -= sp.sigma[j] * (f[j] - sp.reference[j]);
            }
        }
    }
}

/// Noise amplitude settings for stochastic runs.
#[derive(Clone, Copy, Debug)]
pub struct NoiseSpec {
    pub lambda0: f64,
}

/// One Euler-Maruyama noise kick after a deterministic step. Draw order is
/// fixed (cell by cell, re then im) so runs are reproducible for a given
/// generator state.
pub fn add_noise(field: &mut ComplexField, lambda0: f64, dt: f64, rng: &mut impl Rng) {
    let sigma = (lambda0 * dt / (2.0 * field.grid.spacing())).sqrt();
    for c in field.data.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c.re += sigma * re;
        c.im += sigma * im;
    }
}

pub struct Integrator {
    pub rhs: RhsEvaluator,
    grid: Grid1D,
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    ytmp: Vec<Complex64>,
}

impl Integrator {
    pub fn new(grid: Grid1D, coeffs: &SgpeCoefficients) -> Result<Self> {
        let rhs = RhsEvaluator::new(grid, coeffs)?;
        let zero = vec![Complex64::default(); grid.n_points];
        Ok(Integrator {
            rhs,
            grid,
            k1: zero.clone(),
            k2: zero.clone(),
            k3: zero.clone(),
            k4: zero.clone(),
            ytmp: zero,
        })
    }

    /// Largest stable step for the linear part on this grid.
    pub fn max_stable_dt(&self) -> f64 {
        let kmax = self.grid.k_max();
        STABILITY_MARGIN / (0.5 * kmax * kmax)
    }

    pub fn check_dt(&self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SgpeError::InvalidParameter(format!(
                "time step must be positive and finite, got {dt}"
            )));
        }
        let limit = self.max_stable_dt();
        if dt > limit {
            return Err(SgpeError::InvalidParameter(format!(
                "time step {dt} exceeds the spectral stability limit {limit:.5} \
                 for this grid (dt * k_max^2 / 2 must stay below {STABILITY_MARGIN})"
            )));
        }
        Ok(())
    }

    /// One deterministic RK4 step.
    pub fn rk4_step(&mut self, f: &mut [Complex64], dt: f64) {
        let n = f.len();
        self.rhs.eval(f, &mut self.k1);
        for j in 0..n {
            self.ytmp[j] = f[j] + 0.5 * dt * self.k1[j];
        }
        self.rhs.eval(&self.ytmp, &mut self.k2);
        for j in 0..n {
            self.ytmp[j] = f[j] + 0.5 * dt * self.k2[j];
        }
        self.rhs.eval(&self.ytmp, &mut self.k3);
        for j in 0..n {
            self.ytmp[j] = f[j] + dt * self.k3[j];
        }
        self.rhs.eval(&self.ytmp, &mut self.k4);
        let w = dt / 6.0;
        for j in 0..n {
            f[j] += w * (self.k1[j] + 2.0 * (self.k2[j] + self.k3[j]) + self.k4[j]);
        }
    }
}

/// Evolution settings shared by all experiments.
#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub dt: f64,
    pub n_steps: usize,
    pub noise: Option<NoiseSpec>,
    /// Health checks (finiteness, runaway density) run every this many steps.
    pub check_interval: usize,
    /// Abort when max density exceeds this multiple of its initial value.
    pub blow_up_factor: f64,
    /// Observer cadence in steps; 0 disables intermediate sampling.
    pub sample_every: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            dt: 1.0e-2,
            n_steps: 0,
            noise: None,
            check_interval: 50,
            blow_up_factor: 10.0,
            sample_every: 0,
        }
    }
}

impl Integrator {
    /// Advance `field` for `opts.n_steps` steps starting at time `tau0`.
    /// The observer fires after every `sample_every`-th step and after the
    /// final step, receiving (step index, tau, field).
    pub fn evolve(
        &mut self,
        field: &mut ComplexField,
        tau0: f64,
        opts: &EvolveOptions,
        rng: &mut impl Rng,
        mut observer: impl FnMut(usize, f64, &ComplexField),
    ) -> Result<()> {
        self.check_dt(opts.dt)?;
        let threshold = opts.blow_up_factor * field.max_density().max(1.0);
        for step in 1..=opts.n_steps {
            self.rk4_step(&mut field.data, opts.dt);
            if let Some(noise) = &opts.noise {
                add_noise(field, noise.lambda0, opts.dt, rng);
            }
            let tau = tau0 + step as f64 * opts.dt;
            if opts.check_interval > 0 && step % opts.check_interval == 0 {
                if !field.is_finite() {
                    return Err(SgpeError::NonFinite { tau });
                }
                let dmax = field.max_density();
                if dmax > threshold {
                    return Err(SgpeError::BlowUp {
                        tau,
                        max_density: dmax,
                        threshold,
                    });
                }
            }
            if (opts.sample_every > 0 && step % opts.sample_every == 0) || step == opts.n_steps {
                observer(step, tau, field);
            }
        }
        Ok(())
    }
}

/// Energy functional conserved by the gamma = 0, noiseless flow:
///
///   E = integral of  1/2 |F'|^2 + (offset - mu + Omega^2 z^2 / 2) |F|^2
///                    + g/2 |F|^4 + k0 Im(F* F')
pub fn energy(field: &ComplexField, coeffs: &SgpeCoefficients, ws: &mut FftWorkspace) -> f64 {
    let n = field.grid.n_points;
    let mut deriv = vec![Complex64::default(); n];
    ws.derivative(&field.data, 1, &mut deriv).expect("grid match");
    let z = field.grid.coordinates();
    let mut total = 0.0;
    for j in 0..n {
        let f = field.data[j];
        let d = f.norm_sqr();
        let pot = coeffs.offset_profile[j] - coeffs.mu_tilde
            + 0.5 * coeffs.omega * coeffs.omega * z[j] * z[j];
        total += 0.5 * deriv[j].norm_sqr()
            + pot * d
            + 0.5 * coeffs.g_profile[j] * d * d
            + coeffs.k0_tilde * (f.conj() * deriv[j]).im;
    }
    total * field.grid.spacing()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_background_is_stationary() {
        // F = 1 with mu = 1 + g solves the equation exactly, even with damping.
        let grid = Grid1D::new(64, 40.0).unwrap();
        let g = 1.0033;
        let coeffs = SgpeCoefficients::uniform(grid, 2.0e-5, 1.0 + g, 0.32, g);
        let mut itg = Integrator::new(grid, &coeffs).unwrap();
        let mut field = ComplexField::uniform(grid, Complex64::new(1.0, 0.0));
        let opts = EvolveOptions {
            dt: 0.02,
            n_steps: 500,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        itg.evolve(&mut field, 0.0, &opts, &mut rng, |_, _, _| {}).unwrap();
        for c in &field.data {
            assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn step_limit_enforced() {
        let grid = Grid1D::new(256, 10.0).unwrap(); // fine grid, large k_max
        let coeffs = SgpeCoefficients::uniform(grid, 0.0, 2.0, 0.0, 1.0);
        let itg = Integrator::new(grid, &coeffs).unwrap();
        assert!(itg.check_dt(0.01).is_err());
        assert!(itg.check_dt(itg.max_stable_dt() * 0.99).is_ok());
    }

    #[test]
    fn damping_relaxes_toward_background() {
        // small perturbation on the background decays when gamma > 0
        let grid = Grid1D::new(128, 60.0).unwrap();
        let g = 1.0;
        let coeffs = SgpeCoefficients::uniform(grid, 0.1, 1.0 + g, 0.0, g);
        let mut itg = Integrator::new(grid, &coeffs).unwrap();
        let kick = 2.0 * std::f64::consts::PI * 3.0 / grid.length;
        let mut field = ComplexField::from_fn(grid, |z| {
            Complex64::new(1.0 + 0.05 * (kick * z).cos(), 0.0)
        });
        let dev0: f64 = field
            .data
            .iter()
            .map(|c| (c - Complex64::new(1.0, 0.0)).norm_sqr())
            .sum();
        let opts = EvolveOptions {
            dt: 0.02,
            n_steps: 10_000,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        itg.evolve(&mut field, 0.0, &opts, &mut rng, |_, _, _| {}).unwrap();
        let dev1: f64 = field
            .data
            .iter()
            .map(|c| (c - Complex64::new(1.0, 0.0)).norm_sqr())
            .sum();
        assert!(
            dev1 < 0.05 * dev0,
            "perturbation energy should decay: {dev0:e} -> {dev1:e}"
        );
    }

    #[test]
    fn noise_variance_matches_lattice_rule() {
        let grid = Grid1D::new(4096, 600.0).unwrap();
        let mut field = ComplexField::uniform(grid, Complex64::default());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lambda0 = 3.4e-5;
        let dt = 0.01;
        let kicks = 400;
        for _ in 0..kicks {
            add_noise(&mut field, lambda0, dt, &mut rng);
        }
        let var: f64 =
            field.data.iter().map(|c| c.norm_sqr()).sum::<f64>() / grid.n_points as f64;
        let expect = lambda0 * dt * kicks as f64 / grid.spacing();
        let rel = (var - expect).abs() / expect;
        assert!(rel < 0.05, "noise variance off by {rel:.3}");
    }

    #[test]
    fn sponge_pulls_field_to_reference() {
        let grid = Grid1D::new(64, 40.0).unwrap();
        let coeffs = SgpeCoefficients::uniform(grid, 0.0, 2.0, 0.0, 1.0);
        let mut itg = Integrator::new(grid, &coeffs).unwrap();
        let reference = vec![Complex64::new(1.0, 0.0); grid.n_points];
        itg.rhs.set_sponge(Some(Sponge {
            sigma: vec![1.0; grid.n_points],
            reference: reference.clone(),
        }));
        let mut field = ComplexField::uniform(grid, Complex64::new(1.1, 0.05));
        let opts = EvolveOptions {
            dt: 0.02,
            n_steps: 1000,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        itg.evolve(&mut field, 0.0, &opts, &mut rng, |_, _, _| {}).unwrap();
        for c in &field.data {
            assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-3);
        }
    }
}
