//! TOML experiment configuration.
//!
//! All physical inputs are SI (the scattering length in Bohr radii, the one
//! deliberate exception); everything downstream of `units` is dimensionless.
//! Omitted `[physical]` keys fall back to the standard rubidium parameter set.

use crate::error::{Result, SgpeError};
use crate::grid::Grid1D;
use crate::horizon::HorizonConfig;
use crate::soliton::SolitonSpec;
use crate::units::PhysicalParams;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Diffusion,
    Spectrum,
    Horizon,
    SingleRun,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Diffusion => "diffusion",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Horizon => "horizon",
            ExperimentKind::SingleRun => "single-run",
        }
    }
}

#[derive(Clone, Debug)]
pub struct StepperConfig {
    pub dt: f64,
    pub tau_end: f64,
    /// Measurement times, sorted, deduplicated, within [0, tau_end].
    pub snapshot_times: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct EnsembleConfig {
    pub n_realizations: usize,
    pub base_seed: u64,
    /// Worker threads; 0 picks the hardware default.
    pub parallelism: usize,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    /// Bath temperatures [K] for the fixed-time width-vs-T scan.
    pub temperatures: Vec<f64>,
    /// Ensemble size per sweep point (defaults to the main ensemble size).
    pub n_realizations: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub output_dir: PathBuf,
    pub physical: PhysicalParams,
    pub soliton: Option<SolitonSpec>,
    pub horizon: Option<HorizonConfig>,
    pub grid: Grid1D,
    pub stepper: StepperConfig,
    pub ensemble: EnsembleConfig,
    pub sweep: Option<SweepConfig>,
    /// SHA-256 of the configuration text, recorded in run metadata.
    pub digest: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: ExperimentKind,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    physical: RawPhysical,
    soliton: Option<SolitonSpec>,
    horizon: Option<HorizonConfig>,
    grid: RawGrid,
    stepper: RawStepper,
    #[serde(default)]
    ensemble: RawEnsemble,
    sweep: Option<RawSweep>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysical {
    mass: Option<f64>,
    scattering_length_bohr: Option<f64>,
    omega_perp: Option<f64>,
    omega_z: Option<f64>,
    line_density: Option<f64>,
    temperature: Option<f64>,
    flow_velocity: Option<f64>,
    atom_number: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n_points: usize,
    length: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStepper {
    dt: f64,
    tau_end: f64,
    #[serde(default)]
    snapshot_times: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    n_realizations: Option<usize>,
    base_seed: Option<u64>,
    parallelism: Option<usize>,
}

impl Default for RawEnsemble {
    fn default() -> Self {
        RawEnsemble {
            n_realizations: None,
            base_seed: None,
            parallelism: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    temperatures: Vec<f64>,
    n_realizations: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)?;
        let defaults = PhysicalParams::default_rb87();
        let physical = PhysicalParams {
            mass: raw.physical.mass.unwrap_or(defaults.mass),
            scattering_length: raw
                .physical
                .scattering_length_bohr
                .map(PhysicalParams::bohr_radii)
                .unwrap_or(defaults.scattering_length),
            omega_perp: raw.physical.omega_perp.unwrap_or(defaults.omega_perp),
            omega_z: raw.physical.omega_z.unwrap_or(defaults.omega_z),
            line_density: raw.physical.line_density.unwrap_or(defaults.line_density),
            temperature: raw.physical.temperature.unwrap_or(defaults.temperature),
            flow_velocity: raw.physical.flow_velocity.unwrap_or(defaults.flow_velocity),
            atom_number: raw.physical.atom_number.unwrap_or(defaults.atom_number),
        };
        physical.validate()?;

        let grid = Grid1D::new(raw.grid.n_points, raw.grid.length)?;

        if !(raw.stepper.dt > 0.0 && raw.stepper.dt.is_finite()) {
            return Err(SgpeError::Config(format!(
                "stepper.dt must be positive, got {}",
                raw.stepper.dt
            )));
        }
        if !(raw.stepper.tau_end > 0.0 && raw.stepper.tau_end.is_finite()) {
            return Err(SgpeError::Config(format!(
                "stepper.tau_end must be positive, got {}",
                raw.stepper.tau_end
            )));
        }
        let mut snapshot_times = raw.stepper.snapshot_times;
        if snapshot_times.is_empty() {
            snapshot_times = (0..=10)
                .map(|i| raw.stepper.tau_end * i as f64 / 10.0)
                .collect();
        }
        snapshot_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        snapshot_times.dedup();
        for &t in &snapshot_times {
            if !(t >= 0.0 && t <= raw.stepper.tau_end * (1.0 + 1e-12)) {
                return Err(SgpeError::Config(format!(
                    "snapshot time {t} lies outside [0, {}]",
                    raw.stepper.tau_end
                )));
            }
        }

        let ensemble = EnsembleConfig {
            n_realizations: raw.ensemble.n_realizations.unwrap_or(1),
            base_seed: raw.ensemble.base_seed.unwrap_or(0),
            parallelism: raw.ensemble.parallelism.unwrap_or(0),
        };
        if ensemble.n_realizations < 1 {
            return Err(SgpeError::Config(
                "ensemble.n_realizations must be at least 1".into(),
            ));
        }

        if let Some(spec) = &raw.soliton {
            spec.validate()?;
        }
        if let Some(h) = &raw.horizon {
            h.validate()?;
        }

        let needs_soliton = matches!(
            raw.experiment,
            ExperimentKind::Diffusion | ExperimentKind::Horizon | ExperimentKind::SingleRun
        );
        if needs_soliton && raw.soliton.is_none() {
            return Err(SgpeError::Config(format!(
                "experiment '{}' requires a [soliton] block",
                raw.experiment.name()
            )));
        }
        let needs_horizon = matches!(
            raw.experiment,
            ExperimentKind::Horizon | ExperimentKind::Spectrum
        );
        if needs_horizon {
            let h = raw.horizon.as_ref().ok_or_else(|| {
                SgpeError::Config(format!(
                    "experiment '{}' requires a [horizon] block",
                    raw.experiment.name()
                ))
            })?;
            // the unit system is anchored to the upstream region, so the
            // horizon block must agree with the [physical] block about it
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
            if !close(h.omega_perp_up, physical.omega_perp)
                || !close(h.rho0_up, physical.line_density)
                || !close(h.v0_up, physical.flow_velocity)
            {
                return Err(SgpeError::Config(
                    "[horizon] upstream values (omega_perp_up, rho0_up, v0_up) must \
                     match [physical] (omega_perp, line_density, flow_velocity)"
                        .into(),
                ));
            }
        }

        if let Some(sweep) = &raw.sweep {
            if sweep.temperatures.is_empty() {
                return Err(SgpeError::Config(
                    "[sweep] needs at least one temperature".into(),
                ));
            }
            for &t in &sweep.temperatures {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(SgpeError::Config(format!(
                        "sweep temperature must be positive, got {t}"
                    )));
                }
            }
        }

        Ok(ExperimentConfig {
            experiment: raw.experiment,
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            physical,
            soliton: raw.soliton,
            horizon: raw.horizon,
            grid,
            stepper: StepperConfig {
                dt: raw.stepper.dt,
                tau_end: raw.stepper.tau_end,
                snapshot_times,
            },
            ensemble,
            sweep: raw.sweep.map(|s| SweepConfig {
                temperatures: s.temperatures,
                n_realizations: s.n_realizations,
            }),
            digest: crate::output::sha256_hex(text.as_bytes()),
        })
    }
}
