//! The canned experiments: free-soliton diffusion ensembles, horizon spectrum
//! tables, the two-region horizon run, and single trajectories.
//!
//! Determinism contract: realization i draws from ChaCha stream i+1 of the
//! base seed, parallel results are collected in index order, and every file
//! goes through the fixed-format writers in `output`. Identical configs give
//! byte-identical output trees at any thread count.

use crate::analytic::{self, KdvParams};
use crate::bogoliubov::{self, branch_table};
use crate::config::{EnsembleConfig, ExperimentConfig, StepperConfig};
use crate::diagnostics::{
    ensemble_stats, fit_gaussian_deficit, locate_in_density, Analyzer, EnsembleStats,
    GaussianDeficitFit, MeanProfileObservation, PowerLawFit, SearchWindow, SolitonObservation,
};
use crate::dynamics::{EvolveOptions, Integrator, NoiseSpec, SgpeCoefficients, Sponge};
use crate::error::{Result, SgpeError};
use crate::field::ComplexField;
use crate::grid::Grid1D;
use crate::horizon::{horizon_background, solve_horizon_matching, sponge_profile, HorizonMatch};
use crate::output::{write_csv, write_json};
use crate::soliton::{dark_soliton, imprint_soliton};
use crate::units::{
    derive_scales, dissipation_rate, hawking_temperature, noise_strength, PhysicalParams,
    ScaledParams,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Tracking window half-width around the predicted soliton position.
const TRACK_HALF_WIDTH: f64 = 20.0;
/// Averaging window half-width for ensemble-mean profile moments.
const PROFILE_HALF_WIDTH: f64 = 60.0;
/// Earliest time admitted to the late-time scaling fits.
const FIT_TAU_MIN_VARIANCE: f64 = 50.0;
const FIT_TAU_MIN_WIDTH: f64 = 250.0;

fn realization_rng(base_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index as u64 + 1);
    rng
}

fn build_pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| SgpeError::Config(format!("worker pool: {e}")))
}

/// Snapshot schedule: cumulative step targets so rounding never drifts.
#[derive(Clone, Debug)]
struct Schedule {
    dt: f64,
    /// (step index, tau = step * dt) per snapshot, ascending.
    points: Vec<(usize, f64)>,
}

fn plan_schedule(stepper: &StepperConfig) -> Schedule {
    let points = stepper
        .snapshot_times
        .iter()
        .map(|&t| {
            let step = (t / stepper.dt).round() as usize;
            (step, step as f64 * stepper.dt)
        })
        .collect();
    Schedule {
        dt: stepper.dt,
        points,
    }
}

/// Window half-widths covering four standard deviations of the predicted
/// center displacement accumulated since the previous snapshot, so a fix is
/// lost to window escape only a few times per thousand frames even at the
/// hottest sweep leg.
fn tracking_half_widths(kdv: &KdvParams, schedule: &Schedule) -> Vec<f64> {
    let mut prev_tau = 0.0;
    schedule
        .points
        .iter()
        .map(|&(_, tau)| {
            let dvar = (analytic::predicted_variance(kdv, tau)
                - analytic::predicted_variance(kdv, prev_tau))
            .max(0.0);
            prev_tau = tau;
            (4.0 * dvar.sqrt() + 8.0).clamp(TRACK_HALF_WIDTH, 60.0)
        })
        .collect()
}

/// Follows the dip from snapshot to snapshot; prediction falls back on the
/// deterministic drift when a measurement is missing.
struct Tracker {
    analyzer: Analyzer,
    drift: f64,
    predicted: f64,
    last_tau: f64,
}

impl Tracker {
    fn new(grid: Grid1D, smoothing: f64, start: f64, drift: f64) -> Self {
        Tracker {
            analyzer: Analyzer::new(grid, smoothing),
            drift,
            predicted: start,
            last_tau: 0.0,
        }
    }

    fn observe(
        &mut self,
        field: &ComplexField,
        tau: f64,
        half_width: f64,
    ) -> Option<SolitonObservation> {
        let grid = self.analyzer.grid();
        let center = grid.wrap(self.predicted + self.drift * (tau - self.last_tau));
        let window = SearchWindow { center, half_width };
        self.last_tau = tau;
        match self.analyzer.locate_soliton(field, tau, window) {
            Ok(obs) => {
                self.predicted = obs.center;
                Some(obs)
            }
            Err(_) => {
                self.predicted = center;
                None
            }
        }
    }
}

/// Everything recorded along one realization.
struct TrajectoryRecord {
    observations: Vec<Option<SolitonObservation>>,
    densities: Vec<Vec<f64>>,
    velocities: Vec<f64>,
    failure: Option<String>,
}

struct TrajectorySetup<'a> {
    initial: &'a ComplexField,
    coeffs: &'a SgpeCoefficients,
    sponge: Option<&'a Sponge>,
    schedule: &'a Schedule,
    noise: Option<NoiseSpec>,
    soliton_start: f64,
    drift: f64,
    /// Per-snapshot tracking window half-widths, sized so the window covers
    /// the expected center displacement since the previous fix.
    track_half_widths: &'a [f64],
    /// Measure the condensate velocity with this flow wavenumber.
    velocity_k0: Option<f64>,
}

fn run_trajectory(setup: &TrajectorySetup, rng: &mut ChaCha8Rng) -> TrajectoryRecord {
    let grid = setup.initial.grid;
    let mut field = setup.initial.clone();
    let mut integrator = match Integrator::new(grid, setup.coeffs) {
        Ok(i) => i,
        Err(e) => {
            return TrajectoryRecord {
                observations: Vec::new(),
                densities: Vec::new(),
                velocities: Vec::new(),
                failure: Some(e.to_string()),
            }
        }
    };
    integrator.rhs.set_sponge(setup.sponge.cloned());
    let mut tracker = Tracker::new(
        grid,
        crate::diagnostics::TRACK_SMOOTHING_SIGMA,
        setup.soliton_start,
        setup.drift,
    );

    let mut observations = Vec::with_capacity(setup.schedule.points.len());
    let mut densities = Vec::with_capacity(setup.schedule.points.len());
    let mut velocities = Vec::with_capacity(setup.schedule.points.len());
    let mut failure = None;
    let mut current_step = 0usize;
    for (s, &(step, tau)) in setup.schedule.points.iter().enumerate() {
        if step > current_step {
            let opts = EvolveOptions {
                dt: setup.schedule.dt,
                n_steps: step - current_step,
                noise: setup.noise,
                ..Default::default()
            };
            let tau0 = current_step as f64 * setup.schedule.dt;
            if let Err(e) = integrator.evolve(&mut field, tau0, &opts, rng, |_, _, _| {}) {
                failure = Some(e.to_string());
                break;
            }
            current_step = step;
        }
        let half_width = setup
            .track_half_widths
            .get(s)
            .copied()
            .unwrap_or(TRACK_HALF_WIDTH);
        observations.push(tracker.observe(&field, tau, half_width));
        densities.push(field.density());
        if let Some(k0) = setup.velocity_k0 {
            velocities.push(tracker.analyzer.com_velocity(&field, k0));
        }
    }
    TrajectoryRecord {
        observations,
        densities,
        velocities,
        failure,
    }
}

fn run_ensemble(
    setup: &TrajectorySetup,
    ensemble: &EnsembleConfig,
    n_realizations: usize,
) -> Result<Vec<TrajectoryRecord>> {
    let pool = build_pool(ensemble.parallelism)?;
    let records: Vec<TrajectoryRecord> = pool.install(|| {
        (0..n_realizations)
            .into_par_iter()
            .map(|i| {
                let mut rng = realization_rng(ensemble.base_seed, i);
                run_trajectory(setup, &mut rng)
            })
            .collect()
    });
    Ok(records)
}

/// Enforce the blow-up budget: more than 10% lost realizations fails the run.
fn check_failures(records: &[TrajectoryRecord]) -> Result<Vec<(usize, String)>> {
    let failed: Vec<(usize, String)> = records
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.failure.clone().map(|msg| (i, msg)))
        .collect();
    let n = records.len();
    if failed.len() * 10 > n {
        let survivors = n - failed.len();
        return Err(SgpeError::InsufficientEnsemble {
            got: survivors,
            need: n - n / 10,
        });
    }
    Ok(failed)
}

/// Variance of the tracked center over every realization with a fix at the
/// final snapshot (not just fully-tracked series), plus the contributing
/// count. Periodic-safe via deviations from the first center.
fn final_snapshot_spread(records: &[TrajectoryRecord], grid: &Grid1D) -> (f64, usize) {
    let centers: Vec<f64> = records
        .iter()
        .filter_map(|r| r.observations.last().copied().flatten())
        .map(|o| o.center)
        .collect();
    let n = centers.len();
    if n < 2 {
        return (f64::NAN, n);
    }
    let rel: Vec<f64> = centers.iter().map(|&c| grid.wrap(c - centers[0])).collect();
    let mean = rel.iter().sum::<f64>() / n as f64;
    let var = rel.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n as f64 - 1.0);
    (var, n)
}

/// Ensemble-mean density per snapshot over surviving realizations.
fn mean_densities(records: &[TrajectoryRecord], n_snapshots: usize, n_cells: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0f64; n_cells]; n_snapshots];
    let mut count = 0usize;
    for record in records.iter().filter(|r| r.failure.is_none()) {
        count += 1;
        for (s, density) in record.densities.iter().enumerate() {
            let sum = &mut sums[s];
            for (acc, &v) in sum.iter_mut().zip(density.iter()) {
                *acc += v;
            }
        }
    }
    if count > 0 {
        let inv = 1.0 / count as f64;
        for sum in sums.iter_mut() {
            for v in sum.iter_mut() {
                *v *= inv;
            }
        }
    }
    sums
}

fn complete_series(records: &[TrajectoryRecord]) -> Vec<Vec<SolitonObservation>> {
    records
        .iter()
        .filter(|r| r.failure.is_none() && r.observations.iter().all(|o| o.is_some()))
        .map(|r| r.observations.iter().map(|o| o.unwrap()).collect())
        .collect()
}

fn try_fit(series: &[(f64, f64)], tau_min: f64, seed: u64) -> Option<PowerLawFit> {
    let positive: Vec<(f64, f64)> = series
        .iter()
        .filter(|&&(t, v)| t > 0.0 && v > 0.0 && v.is_finite())
        .copied()
        .collect();
    crate::diagnostics::fit_power_law(&positive, tau_min, seed).ok()
}

// ---------------------------------------------------------------------------
// diffusion
// ---------------------------------------------------------------------------

/// Mean-profile observables plus the tracker's view of the averaged profile.
/// The Gaussian fit is the workhorse estimator for width, depth and area:
/// window moments and the dip locator are kept alongside for cross-checks.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProfileRow {
    pub tau: f64,
    pub moment: Option<MeanProfileObservation>,
    pub fit: Option<GaussianDeficitFit>,
    pub dip: Option<SolitonObservation>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub temperature: f64,
    pub lambda0: f64,
    /// FWHM of the fitted ensemble-mean dip at the final time.
    pub fit_width: f64,
    /// Fitted dip depth (density units) at the final time.
    pub fit_depth: f64,
    pub fit_area: f64,
    /// Width implied by the spread of tracked centers at the final time:
    /// 2.355 sqrt(Var + sigma0^2) with sigma0 the initial deficit sigma.
    /// Stays usable on hot legs where the direct profile fit washes out.
    pub stat_width: f64,
    /// Realizations contributing a final-snapshot fix to `stat_width`.
    pub n_located: usize,
    pub tracked_mean_width: f64,
    pub position_variance: f64,
}

#[derive(Serialize)]
pub struct DiffusionOutcome {
    pub taus: Vec<f64>,
    pub stats: Option<EnsembleStats>,
    pub profiles: Vec<ProfileRow>,
    pub variance_fit: Option<PowerLawFit>,
    pub width_fit: Option<PowerLawFit>,
    pub blackness_fit: Option<PowerLawFit>,
    pub kdv: KdvParams,
    pub n_realizations: usize,
    pub n_failed: usize,
    pub n_tracked: usize,
    pub sweep: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

struct DiffusionEnsembleResult {
    records: Vec<TrajectoryRecord>,
    stats: Option<EnsembleStats>,
    profiles: Vec<ProfileRow>,
    mean_profiles: Vec<Vec<f64>>,
    failed: Vec<(usize, String)>,
    n_tracked: usize,
}

fn diffusion_ensemble(
    cfg: &ExperimentConfig,
    physical: &PhysicalParams,
    n_realizations: usize,
) -> Result<(ScaledParams, KdvParams, Schedule, DiffusionEnsembleResult)> {
    let scaled = derive_scales(physical)?;
    let spec = cfg.soliton.as_ref().expect("validated by config");
    let kdv = KdvParams::from_soliton(spec, &scaled, 1.0)?;
    let schedule = plan_schedule(&cfg.stepper);
    let initial = dark_soliton(spec, &scaled, cfg.grid)?;
    let coeffs = SgpeCoefficients::uniform(
        cfg.grid,
        scaled.gamma,
        scaled.mu_tilde,
        scaled.k0_tilde,
        scaled.g,
    );
    let noise = (scaled.lambda0 > 0.0).then_some(NoiseSpec {
        lambda0: scaled.lambda0,
    });
    let track_hw = tracking_half_widths(&kdv, &schedule);
    let setup = TrajectorySetup {
        initial: &initial,
        coeffs: &coeffs,
        sponge: None,
        schedule: &schedule,
        noise,
        soliton_start: spec.zeta0(),
        drift: kdv.soliton_drift_term(),
        track_half_widths: &track_hw,
        velocity_k0: None,
    };
    let records = run_ensemble(&setup, &cfg.ensemble, n_realizations)?;
    let failed = check_failures(&records)?;

    let complete = complete_series(&records);
    let n_tracked = complete.len();
    let stats = if n_tracked >= 2 {
        Some(ensemble_stats(&complete, &cfg.grid)?)
    } else {
        None
    };

    let means = mean_densities(&records, schedule.points.len(), cfg.grid.n_points);
    let mut analyzer = Analyzer::new(cfg.grid, crate::diagnostics::SMOOTHING_SIGMA);
    let mut profiles = Vec::with_capacity(schedule.points.len());
    for (s, &(_, tau)) in schedule.points.iter().enumerate() {
        // periodic-safe mean of tracked centers, falling back on the drift
        let predicted = cfg.grid.wrap(spec.zeta0() + kdv.soliton_drift_term() * tau);
        let center = if n_tracked >= 2 {
            let mean_dev = complete
                .iter()
                .map(|r| cfg.grid.wrap(r[s].center - predicted))
                .sum::<f64>()
                / n_tracked as f64;
            cfg.grid.wrap(predicted + mean_dev)
        } else {
            predicted
        };
        // widen with the predicted spread so the Gaussian fit always sees
        // clean baseline beyond the deficit wings
        let spread = analytic::predicted_variance(&kdv, tau).sqrt();
        let window = SearchWindow {
            center,
            half_width: (3.5 * spread + 30.0).clamp(PROFILE_HALF_WIDTH, 120.0),
        };
        let moment = analyzer.mean_profile(&means[s], tau, window).ok();
        let fit = fit_gaussian_deficit(&means[s], &cfg.grid, tau, window).ok();
        let smoothed = analyzer.smoothed_density_raw(&means[s]).ok();
        let dip = smoothed
            .as_deref()
            .and_then(|d| locate_in_density(d, &cfg.grid, tau, window).ok());
        profiles.push(ProfileRow { tau, moment, fit, dip });
    }

    Ok((
        scaled,
        kdv,
        schedule,
        DiffusionEnsembleResult {
            records,
            stats,
            profiles,
            mean_profiles: means,
            failed,
            n_tracked,
        },
    ))
}

pub fn run_diffusion(cfg: &ExperimentConfig) -> Result<DiffusionOutcome> {
    let (scaled, kdv, schedule, result) =
        diffusion_ensemble(cfg, &cfg.physical, cfg.ensemble.n_realizations)?;
    let spec = cfg.soliton.as_ref().expect("validated by config");
    let mut warnings = spec.warnings();
    warnings.extend(analytic::profile_validity_warnings(&kdv, cfg.stepper.tau_end));

    // scaling fits
    let variance_series: Vec<(f64, f64)> = result
        .stats
        .as_ref()
        .map(|st| {
            st.taus
                .iter()
                .zip(st.variance_position.iter())
                .map(|(&t, &v)| (t, v))
                .collect()
        })
        .unwrap_or_default();
    let variance_fit = try_fit(&variance_series, FIT_TAU_MIN_VARIANCE, cfg.ensemble.base_seed);
    let width_series: Vec<(f64, f64)> = result
        .profiles
        .iter()
        .filter_map(|p| p.fit.map(|f| (p.tau, 2.355 * f.sigma)))
        .collect();
    let width_fit = try_fit(&width_series, FIT_TAU_MIN_WIDTH, cfg.ensemble.base_seed ^ 1);
    let blackness_series: Vec<(f64, f64)> = result
        .profiles
        .iter()
        .filter_map(|p| p.fit.map(|f| (p.tau, f.amplitude)))
        .collect();
    let blackness_fit = try_fit(&blackness_series, FIT_TAU_MIN_WIDTH, cfg.ensemble.base_seed ^ 2);

    // temperature sweep at fixed end time; the sweep shares the main run's
    // seeds, so width ratios across temperature ride on common noise paths
    let mut sweep_rows = Vec::new();
    if let Some(sweep) = &cfg.sweep {
        let n_sweep = sweep
            .n_realizations
            .unwrap_or(cfg.ensemble.n_realizations);
        for &temperature in &sweep.temperatures {
            let same_as_main = (temperature - cfg.physical.temperature).abs()
                < 1e-12 * temperature
                && n_sweep == cfg.ensemble.n_realizations;
            let (sw_scaled, sw_stats, sw_profiles);
            let recompute;
            if same_as_main {
                sw_scaled = scaled;
                recompute = None;
            } else {
                let mut physical = cfg.physical;
                physical.temperature = temperature;
                let (s, _, _, sw) = diffusion_ensemble(cfg, &physical, n_sweep)?;
                sw_scaled = s;
                recompute = Some(sw);
            }
            match &recompute {
                None => {
                    sw_stats = result.stats.clone();
                    sw_profiles = &result.profiles;
                }
                Some(sw) => {
                    sw_stats = sw.stats.clone();
                    sw_profiles = &sw.profiles;
                }
            }
            let sw_records = match &recompute {
                None => &result.records,
                Some(sw) => &sw.records,
            };
            let (final_var, n_located) = final_snapshot_spread(sw_records, &cfg.grid);
            let sigma0 = sw_profiles
                .first()
                .and_then(|p| p.fit.map(|f| f.sigma))
                .unwrap_or(f64::NAN);
            let last = sw_profiles.last();
            sweep_rows.push(SweepRow {
                temperature,
                lambda0: sw_scaled.lambda0,
                fit_width: last
                    .and_then(|p| p.fit.map(|f| 2.355 * f.sigma))
                    .unwrap_or(f64::NAN),
                fit_depth: last
                    .and_then(|p| p.fit.map(|f| f.amplitude))
                    .unwrap_or(f64::NAN),
                fit_area: last.and_then(|p| p.fit.map(|f| f.area)).unwrap_or(f64::NAN),
                stat_width: 2.355 * (final_var + sigma0 * sigma0).sqrt(),
                n_located,
                tracked_mean_width: sw_stats
                    .as_ref()
                    .and_then(|st| st.mean_width.last().copied())
                    .unwrap_or(f64::NAN),
                position_variance: sw_stats
                    .as_ref()
                    .and_then(|st| st.variance_position.last().copied())
                    .unwrap_or(f64::NAN),
            });
        }
    }

    let outcome = DiffusionOutcome {
        taus: schedule.points.iter().map(|&(_, t)| t).collect(),
        stats: result.stats,
        profiles: result.profiles,
        variance_fit,
        width_fit,
        blackness_fit,
        kdv,
        n_realizations: cfg.ensemble.n_realizations,
        n_failed: result.failed.len(),
        n_tracked: result.n_tracked,
        sweep: sweep_rows,
        warnings,
    };
    write_diffusion_outputs(cfg, &scaled, &outcome, &result.records, &result.mean_profiles)?;
    Ok(outcome)
}

fn observation_row(tau: f64, t_unit: f64, o: &SolitonObservation) -> Vec<f64> {
    vec![
        tau,
        tau * t_unit * 1.0e3,
        o.center,
        o.blackness,
        o.width,
        o.delta1,
        o.delta2,
        o.area,
    ]
}

const OBSERVATION_HEADER: [&str; 8] = [
    "tau", "t_ms", "center", "blackness", "width", "delta1", "delta2", "area",
];

const STATS_HEADER: [&str; 11] = [
    "tau",
    "t_ms",
    "mean_width",
    "std_width",
    "mean_blackness",
    "std_blackness",
    "mean_area",
    "std_area",
    "mean_delta_ratio",
    "std_delta_ratio",
    "variance_position",
];

fn stats_rows(stats: &EnsembleStats, t_unit: f64) -> Vec<Vec<f64>> {
    (0..stats.taus.len())
        .map(|s| {
            vec![
                stats.taus[s],
                stats.taus[s] * t_unit * 1.0e3,
                stats.mean_width[s],
                stats.std_width[s],
                stats.mean_blackness[s],
                stats.std_blackness[s],
                stats.mean_area[s],
                stats.std_area[s],
                stats.mean_delta_ratio[s],
                stats.std_delta_ratio[s],
                stats.variance_position[s],
            ]
        })
        .collect()
}

fn write_diffusion_outputs(
    cfg: &ExperimentConfig,
    scaled: &ScaledParams,
    outcome: &DiffusionOutcome,
    records: &[TrajectoryRecord],
    mean_profiles: &[Vec<f64>],
) -> Result<()> {
    let dir = &cfg.output_dir;
    let t_unit = scaled.t_unit;

    for (i, record) in records.iter().enumerate() {
        if record.failure.is_some() {
            continue;
        }
        let rows: Vec<Vec<f64>> = outcome
            .taus
            .iter()
            .zip(record.observations.iter())
            .filter_map(|(&tau, obs)| obs.as_ref().map(|o| observation_row(tau, t_unit, o)))
            .collect();
        write_csv(
            &dir.join(format!("realizations/realization_{i:03}.csv")),
            &OBSERVATION_HEADER,
            &rows,
        )?;
    }

    if let Some(stats) = &outcome.stats {
        write_csv(
            &dir.join("ensemble_stats.csv"),
            &STATS_HEADER,
            &stats_rows(stats, t_unit),
        )?;
    }

    let coords = cfg.grid.coordinates();
    let mut density_rows = Vec::new();
    for (s, &tau) in outcome.taus.iter().enumerate() {
        for (j, &z) in coords.iter().enumerate() {
            density_rows.push(vec![tau, z, z * scaled.l_perp * 1.0e6, mean_profiles[s][j]]);
        }
    }
    write_csv(
        &dir.join("mean_profiles.csv"),
        &["tau", "zeta", "zeta_um", "mean_density"],
        &density_rows,
    )?;

    write_csv(
        &dir.join("mean_profile_observables.csv"),
        &PROFILE_HEADER,
        &profile_rows(&outcome.profiles, t_unit),
    )?;

    // closed-form overlays
    let prediction_rows: Vec<Vec<f64>> = outcome
        .taus
        .iter()
        .map(|&tau| {
            let variance = analytic::predicted_variance(&outcome.kdv, tau);
            let (width, blackness) = analytic::mean_profile_shape(&outcome.kdv, tau)
                .map(|s| (2.355 * s.sigma, s.amplitude.abs() / outcome.kdv.u0))
                .unwrap_or((f64::NAN, f64::NAN));
            vec![tau, width, blackness, variance]
        })
        .collect();
    write_csv(
        &dir.join("predictions.csv"),
        &["tau", "predicted_width", "predicted_blackness", "predicted_variance"],
        &prediction_rows,
    )?;

    if !outcome.sweep.is_empty() {
        let rows: Vec<Vec<f64>> = outcome
            .sweep
            .iter()
            .map(|r| {
                vec![
                    r.temperature,
                    r.temperature * 1.0e9,
                    r.lambda0,
                    r.fit_width,
                    r.fit_depth,
                    r.fit_area,
                    r.stat_width,
                    r.n_located as f64,
                    r.tracked_mean_width,
                    r.position_variance,
                ]
            })
            .collect();
        write_csv(
            &dir.join("temperature_sweep.csv"),
            &[
                "temperature_k",
                "temperature_nk",
                "lambda0",
                "fit_width",
                "fit_depth",
                "fit_area",
                "stat_width",
                "n_located",
                "tracked_mean_width",
                "position_variance",
            ],
            &rows,
        )?;
    }

    #[derive(Serialize)]
    struct Meta<'a> {
        experiment: &'static str,
        config_digest: &'a str,
        base_seed: u64,
        n_realizations: usize,
        n_failed: usize,
        n_tracked: usize,
        scaled: &'a ScaledParams,
        kdv: &'a KdvParams,
        variance_fit: &'a Option<PowerLawFit>,
        width_fit: &'a Option<PowerLawFit>,
        blackness_fit: &'a Option<PowerLawFit>,
        warnings: &'a [String],
    }
    write_json(
        &dir.join("run_meta.json"),
        &Meta {
            experiment: "diffusion",
            config_digest: &cfg.digest,
            base_seed: cfg.ensemble.base_seed,
            n_realizations: outcome.n_realizations,
            n_failed: outcome.n_failed,
            n_tracked: outcome.n_tracked,
            scaled,
            kdv: &outcome.kdv,
            variance_fit: &outcome.variance_fit,
            width_fit: &outcome.width_fit,
            blackness_fit: &outcome.blackness_fit,
            warnings: &outcome.warnings,
        },
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct SpectrumOutcome {
    pub matching: HorizonMatch,
    pub mach_up: f64,
    pub mach_down: f64,
    pub hawking_temperature_k: f64,
    pub min_trapped_wavelength_m: f64,
    /// Dimensionless (flow, sound speed) per region, upstream units.
    pub upstream: (f64, f64),
    pub downstream: (f64, f64),
}

pub fn run_spectrum(cfg: &ExperimentConfig) -> Result<SpectrumOutcome> {
    let h = cfg.horizon.as_ref().expect("validated by config");
    let physical = &cfg.physical;
    let matching = solve_horizon_matching(h, physical.scattering_length, physical.mass)?;
    let scaled = derive_scales(physical)?;
    let velocity_unit = scaled.l_perp / scaled.t_unit;

    let up = (h.v0_up / velocity_unit, matching.c_s_up / velocity_unit);
    let down = (
        matching.v0_down / velocity_unit,
        matching.c_s_down / velocity_unit,
    );
    let t_h = hawking_temperature(matching.u, matching.c_s_up, physical)?;
    let lambda_min = bogoliubov::min_trapped_wavelength(down.0, down.1, scaled.l_perp)?;

    let ks: Vec<f64> = (-160..=160).map(|i| i as f64 * 0.025).collect();
    let table_rows = |v0: f64, c_s: f64| -> Vec<Vec<f64>> {
        branch_table(&ks, v0, c_s)
            .into_iter()
            .map(|b| {
                vec![
                    b.k,
                    b.omega_plus,
                    b.omega_minus,
                    b.phase_velocity_plus,
                    b.phase_velocity_minus,
                ]
            })
            .collect()
    };
    let header = [
        "k",
        "omega_plus",
        "omega_minus",
        "phase_velocity_plus",
        "phase_velocity_minus",
    ];
    write_csv(
        &cfg.output_dir.join("spectrum_upstream.csv"),
        &header,
        &table_rows(up.0, up.1),
    )?;
    write_csv(
        &cfg.output_dir.join("spectrum_downstream.csv"),
        &header,
        &table_rows(down.0, down.1),
    )?;

    let outcome = SpectrumOutcome {
        matching,
        mach_up: matching.mach_up,
        mach_down: matching.mach_down,
        hawking_temperature_k: t_h,
        min_trapped_wavelength_m: lambda_min,
        upstream: up,
        downstream: down,
    };

    #[derive(Serialize)]
    struct Meta<'a> {
        experiment: &'static str,
        config_digest: &'a str,
        outcome: &'a SpectrumOutcome,
        hawking_temperature_nk: f64,
        min_trapped_wavelength_um: f64,
    }
    write_json(
        &cfg.output_dir.join("spectrum_summary.json"),
        &Meta {
            experiment: "spectrum",
            config_digest: &cfg.digest,
            outcome: &outcome,
            hawking_temperature_nk: t_h * 1.0e9,
            min_trapped_wavelength_um: lambda_min * 1.0e6,
        },
    )?;
    Ok(outcome)
}

// ---------------------------------------------------------------------------
// horizon
// ---------------------------------------------------------------------------

/// Sponge layer shared by all horizon runs: the outer tenth of the ring,
/// strong enough to relax ramp shedding within a few time units.
const SPONGE_FRACTION: f64 = 0.10;
const SPONGE_RATE: f64 = 1.0;
const SPONGE_EDGE_WIDTH: f64 = 3.0;

#[derive(Serialize)]
pub struct HorizonOutcome {
    pub taus: Vec<f64>,
    pub matching: HorizonMatch,
    pub hawking_temperature_k: f64,
    pub gamma_hawking: f64,
    pub lambda0_hawking: f64,
    /// Mean-profile observables per snapshot (noisy ensemble).
    pub profiles: Vec<ProfileRow>,
    /// Same observables for the noiseless control trajectory.
    pub control: Vec<ProfileRow>,
    pub stats: Option<EnsembleStats>,
    /// Ensemble-mean condensate velocity per snapshot (dimensionless).
    pub mean_velocities: Vec<f64>,
    pub n_realizations: usize,
    pub n_failed: usize,
    pub warnings: Vec<String>,
}

pub fn run_horizon(cfg: &ExperimentConfig) -> Result<HorizonOutcome> {
    let h = cfg.horizon.as_ref().expect("validated by config");
    let spec = cfg.soliton.as_ref().expect("validated by config");
    let physical = &cfg.physical;
    let scaled = derive_scales(physical)?;

    // the emitted phonons set the bath: dissipation and noise at T_H
    let matching = solve_horizon_matching(h, physical.scattering_length, physical.mass)?;
    let t_h = hawking_temperature(matching.u, matching.c_s_up, physical)?;
    let gamma_h = dissipation_rate(t_h, physical);
    let lambda0_h = noise_strength(t_h, physical);

    let background = horizon_background(
        h,
        physical.scattering_length,
        physical.mass,
        gamma_h,
        cfg.grid,
    )?;
    let return_center = 0.5 * cfg.grid.length - 18.0;
    let imprinted = imprint_soliton(
        &background.field,
        spec,
        &scaled,
        &[h.horizon_position, return_center],
    )?;
    // the sponge holds the two-region background (with the soliton's
    // periodization winding folded in) fixed at the ring edge
    let sponge_reference: Vec<_> = background
        .field
        .data
        .iter()
        .zip(imprinted.ramp.iter())
        .map(|(&b, &r)| b * num_complex::Complex64::new(0.0, r).exp())
        .collect();
    let sponge = Sponge {
        sigma: sponge_profile(&cfg.grid, SPONGE_FRACTION, SPONGE_RATE, SPONGE_EDGE_WIDTH),
        reference: sponge_reference,
    };

    let kdv = KdvParams::from_soliton(spec, &scaled, 1.0)?;
    let schedule = plan_schedule(&cfg.stepper);
    let mut warnings = spec.warnings();
    let drift = kdv.soliton_drift_term();
    if drift.abs() > 0.01 {
        warnings.push(format!(
            "soliton drift {drift:.4} is nonzero; it will creep toward a \
             region boundary over long runs"
        ));
    }

    let track_hw = tracking_half_widths(&kdv, &schedule);
    let setup = TrajectorySetup {
        initial: &imprinted.field,
        coeffs: &background.coeffs,
        sponge: Some(&sponge),
        schedule: &schedule,
        noise: (lambda0_h > 0.0).then_some(NoiseSpec {
            lambda0: lambda0_h,
        }),
        soliton_start: spec.zeta0(),
        drift,
        track_half_widths: &track_hw,
        velocity_k0: Some(background.coeffs.k0_tilde),
    };
    let records = run_ensemble(&setup, &cfg.ensemble, cfg.ensemble.n_realizations)?;
    let failed = check_failures(&records)?;

    // noiseless control: same construction, no stochastic forcing
    let control_setup = TrajectorySetup {
        noise: None,
        ..setup
    };
    let mut control_rng = realization_rng(cfg.ensemble.base_seed, usize::MAX >> 1);
    let control_record = run_trajectory(&control_setup, &mut control_rng);
    if let Some(msg) = &control_record.failure {
        return Err(SgpeError::InvalidParameter(format!(
            "noiseless control trajectory failed: {msg}"
        )));
    }

    let complete = complete_series(&records);
    let stats = if complete.len() >= 2 {
        Some(ensemble_stats(&complete, &cfg.grid)?)
    } else {
        None
    };

    let means = mean_densities(&records, schedule.points.len(), cfg.grid.n_points);
    let mut analyzer = Analyzer::new(cfg.grid, crate::diagnostics::SMOOTHING_SIGMA);
    let profile_window = SearchWindow {
        center: spec.zeta0(),
        half_width: PROFILE_HALF_WIDTH.min(
            cfg.grid.wrap(spec.zeta0() - h.horizon_position).abs() - 5.0,
        ),
    };
    let mut profiles = Vec::new();
    for (s, &(_, tau)) in schedule.points.iter().enumerate() {
        let moment = analyzer.mean_profile(&means[s], tau, profile_window).ok();
        let fit = fit_gaussian_deficit(&means[s], &cfg.grid, tau, profile_window).ok();
        let smoothed = analyzer.smoothed_density_raw(&means[s]).ok();
        let dip = smoothed
            .as_deref()
            .and_then(|d| locate_in_density(d, &cfg.grid, tau, profile_window).ok());
        if dip.is_none() {
            return Err(SgpeError::NoSoliton(format!(
                "lost the soliton in the ensemble-mean profile at tau = {tau}"
            )));
        }
        profiles.push(ProfileRow { tau, moment, fit, dip });
    }
    let mut control = Vec::new();
    for (s, &(_, tau)) in schedule.points.iter().enumerate() {
        let moment = analyzer
            .mean_profile(&control_record.densities[s], tau, profile_window)
            .ok();
        let fit =
            fit_gaussian_deficit(&control_record.densities[s], &cfg.grid, tau, profile_window)
                .ok();
        let smoothed = analyzer
            .smoothed_density_raw(&control_record.densities[s])
            .ok();
        let dip = smoothed
            .as_deref()
            .and_then(|d| locate_in_density(d, &cfg.grid, tau, profile_window).ok());
        control.push(ProfileRow { tau, moment, fit, dip });
    }

    let survivors = records.iter().filter(|r| r.failure.is_none()).count();
    let mean_velocities: Vec<f64> = (0..schedule.points.len())
        .map(|s| {
            records
                .iter()
                .filter(|r| r.failure.is_none())
                .map(|r| r.velocities[s])
                .sum::<f64>()
                / survivors.max(1) as f64
        })
        .collect();

    let outcome = HorizonOutcome {
        taus: schedule.points.iter().map(|&(_, t)| t).collect(),
        matching,
        hawking_temperature_k: t_h,
        gamma_hawking: gamma_h,
        lambda0_hawking: lambda0_h,
        profiles,
        control,
        stats,
        mean_velocities,
        n_realizations: cfg.ensemble.n_realizations,
        n_failed: failed.len(),
        warnings,
    };
    write_horizon_outputs(cfg, &scaled, &outcome, &records, &control_record, &means)?;
    Ok(outcome)
}

fn profile_rows(rows: &[ProfileRow], t_unit: f64) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|p| {
            let m = p.moment;
            let f = p.fit;
            let d = p.dip;
            vec![
                p.tau,
                p.tau * t_unit * 1.0e3,
                m.map_or(f64::NAN, |m| m.centroid),
                m.map_or(f64::NAN, |m| m.moment_width),
                m.map_or(f64::NAN, |m| m.peak_depth),
                m.map_or(f64::NAN, |m| m.area),
                f.map_or(f64::NAN, |f| f.center),
                f.map_or(f64::NAN, |f| 2.355 * f.sigma),
                f.map_or(f64::NAN, |f| f.amplitude),
                f.map_or(f64::NAN, |f| f.area),
                f.map_or(f64::NAN, |f| f.residual_rms),
                d.map_or(f64::NAN, |d| d.blackness),
                d.map_or(f64::NAN, |d| d.width),
                d.map_or(f64::NAN, |d| d.delta1),
                d.map_or(f64::NAN, |d| d.delta2),
            ]
        })
        .collect()
}

const PROFILE_HEADER: [&str; 15] = [
    "tau",
    "t_ms",
    "centroid",
    "moment_width",
    "peak_depth",
    "area",
    "fit_center",
    "fit_width",
    "fit_depth",
    "fit_area",
    "fit_residual",
    "dip_blackness",
    "dip_width",
    "dip_delta1",
    "dip_delta2",
];

fn write_horizon_outputs(
    cfg: &ExperimentConfig,
    scaled: &ScaledParams,
    outcome: &HorizonOutcome,
    records: &[TrajectoryRecord],
    control: &TrajectoryRecord,
    means: &[Vec<f64>],
) -> Result<()> {
    let dir = &cfg.output_dir;
    let t_unit = scaled.t_unit;

    for (i, record) in records.iter().enumerate() {
        if record.failure.is_some() {
            continue;
        }
        let rows: Vec<Vec<f64>> = outcome
            .taus
            .iter()
            .zip(record.observations.iter())
            .filter_map(|(&tau, obs)| obs.as_ref().map(|o| observation_row(tau, t_unit, o)))
            .collect();
        write_csv(
            &dir.join(format!("realizations/realization_{i:03}.csv")),
            &OBSERVATION_HEADER,
            &rows,
        )?;
    }

    write_csv(
        &dir.join("mean_profile_observables.csv"),
        &PROFILE_HEADER,
        &profile_rows(&outcome.profiles, t_unit),
    )?;
    write_csv(
        &dir.join("control_observables.csv"),
        &PROFILE_HEADER,
        &profile_rows(&outcome.control, t_unit),
    )?;

    let coords = cfg.grid.coordinates();
    let mut rows = Vec::new();
    for (s, &tau) in outcome.taus.iter().enumerate() {
        for (j, &z) in coords.iter().enumerate() {
            rows.push(vec![
                tau,
                z,
                z * scaled.l_perp * 1.0e6,
                means[s][j],
                control.densities[s][j],
            ]);
        }
    }
    write_csv(
        &dir.join("mean_profiles.csv"),
        &["tau", "zeta", "zeta_um", "mean_density", "control_density"],
        &rows,
    )?;

    let velocity_unit = scaled.l_perp / scaled.t_unit;
    let vel_rows: Vec<Vec<f64>> = outcome
        .taus
        .iter()
        .enumerate()
        .map(|(s, &tau)| {
            vec![
                tau,
                tau * t_unit * 1.0e3,
                outcome.mean_velocities[s],
                outcome.mean_velocities[s] * velocity_unit * 1.0e3,
                control.velocities[s],
            ]
        })
        .collect();
    write_csv(
        &dir.join("com_velocity.csv"),
        &["tau", "t_ms", "mean_velocity", "mean_velocity_mm_s", "control_velocity"],
        &vel_rows,
    )?;

    if let Some(stats) = &outcome.stats {
        write_csv(
            &dir.join("ensemble_stats.csv"),
            &STATS_HEADER,
            &stats_rows(stats, t_unit),
        )?;
    }

    #[derive(Serialize)]
    struct Meta<'a> {
        experiment: &'static str,
        config_digest: &'a str,
        base_seed: u64,
        n_realizations: usize,
        n_failed: usize,
        matching: &'a HorizonMatch,
        hawking_temperature_k: f64,
        hawking_temperature_nk: f64,
        gamma_hawking: f64,
        lambda0_hawking: f64,
        scaled: &'a ScaledParams,
        warnings: &'a [String],
    }
    write_json(
        &dir.join("run_meta.json"),
        &Meta {
            experiment: "horizon",
            config_digest: &cfg.digest,
            base_seed: cfg.ensemble.base_seed,
            n_realizations: outcome.n_realizations,
            n_failed: outcome.n_failed,
            matching: &outcome.matching,
            hawking_temperature_k: outcome.hawking_temperature_k,
            hawking_temperature_nk: outcome.hawking_temperature_k * 1.0e9,
            gamma_hawking: outcome.gamma_hawking,
            lambda0_hawking: outcome.lambda0_hawking,
            scaled,
            warnings: &outcome.warnings,
        },
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// single trajectory
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct SingleOutcome {
    pub taus: Vec<f64>,
    pub observations: Vec<Option<SolitonObservation>>,
    pub warnings: Vec<String>,
}

pub fn run_single(cfg: &ExperimentConfig) -> Result<SingleOutcome> {
    let spec = cfg.soliton.as_ref().expect("validated by config");
    let scaled = derive_scales(&cfg.physical)?;
    let kdv = KdvParams::from_soliton(spec, &scaled, 1.0)?;
    let schedule = plan_schedule(&cfg.stepper);
    let initial = dark_soliton(spec, &scaled, cfg.grid)?;
    let coeffs = SgpeCoefficients::uniform(
        cfg.grid,
        scaled.gamma,
        scaled.mu_tilde,
        scaled.k0_tilde,
        scaled.g,
    );
    let track_hw = tracking_half_widths(&kdv, &schedule);
    let setup = TrajectorySetup {
        initial: &initial,
        coeffs: &coeffs,
        sponge: None,
        schedule: &schedule,
        noise: (scaled.lambda0 > 0.0).then_some(NoiseSpec {
            lambda0: scaled.lambda0,
        }),
        soliton_start: spec.zeta0(),
        drift: kdv.soliton_drift_term(),
        track_half_widths: &track_hw,
        velocity_k0: Some(scaled.k0_tilde),
    };
    let mut rng = realization_rng(cfg.ensemble.base_seed, 0);
    let record = run_trajectory(&setup, &mut rng);
    if let Some(msg) = record.failure {
        return Err(SgpeError::InvalidParameter(format!(
            "trajectory failed: {msg}"
        )));
    }

    let dir = &cfg.output_dir;
    crate::output::ensure_dir(dir)?;
    for (s, &(_, tau)) in schedule.points.iter().enumerate() {
        let field = ComplexField::from_data(
            cfg.grid,
            record.densities[s]
                .iter()
                .map(|&d| num_complex::Complex64::new(d.sqrt(), 0.0))
                .collect(),
        )?;
        // density-only record is enough for offline analysis of a single run
        crate::field::write_snapshot(
            &dir.join(format!("density_{s:03}.snap")),
            &field,
            tau,
            cfg.ensemble.base_seed,
        )?;
    }
    let rows: Vec<Vec<f64>> = schedule
        .points
        .iter()
        .zip(record.observations.iter())
        .filter_map(|(&(_, tau), obs)| {
            obs.as_ref().map(|o| observation_row(tau, scaled.t_unit, o))
        })
        .collect();
    write_csv(&dir.join("trajectory.csv"), &OBSERVATION_HEADER, &rows)?;

    Ok(SingleOutcome {
        taus: schedule.points.iter().map(|&(_, t)| t).collect(),
        observations: record.observations,
        warnings: spec.warnings(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use std::path::Path;

    #[test]
    fn schedule_steps_accumulate_without_drift() {
        let stepper = StepperConfig {
            dt: 0.01,
            tau_end: 2.5,
            snapshot_times: vec![0.0, 1.0, 2.5],
        };
        let plan = plan_schedule(&stepper);
        assert_eq!(
            plan.points.iter().map(|&(s, _)| s).collect::<Vec<_>>(),
            vec![0, 100, 250]
        );
        assert!((plan.points[2].1 - 2.5).abs() < 1e-12);
    }

    fn smoke_config(extra: &str) -> ExperimentConfig {
        let text = format!(
            r#"
experiment = "diffusion"
output_dir = "PLACEHOLDER"

[physical]
flow_velocity = 5.93e-4

[soliton]
kind = "gp_exact"
phi0 = -0.6847
zeta0 = 0.0

[grid]
n_points = 512
length = 160.0

[stepper]
dt = 0.01
tau_end = 2.0
snapshot_times = [0.0, 1.0, 2.0]

[ensemble]
n_realizations = 3
base_seed = 42
{extra}
"#
        );
        ExperimentConfig::from_toml_str(&text).unwrap()
    }

    #[test]
    fn diffusion_smoke_run_produces_tracked_ensemble() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = smoke_config("");
        cfg.output_dir = tmp.path().to_path_buf();
        let outcome = run_diffusion(&cfg).unwrap();
        assert_eq!(outcome.n_failed, 0);
        assert_eq!(outcome.n_tracked, 3);
        let stats = outcome.stats.unwrap();
        assert_eq!(stats.taus, vec![0.0, 1.0, 2.0]);
        // imprinted blackness is cos^2(0.6847) = 0.60; the tracker smooths
        // with sigma = 2, which costs this narrow dip over half its depth
        assert!(
            stats.mean_blackness[0] > 0.15 && stats.mean_blackness[0] < 0.45,
            "smoothed blackness {}",
            stats.mean_blackness[0]
        );
        assert!(tmp.path().join("ensemble_stats.csv").exists());
        assert!(tmp.path().join("realizations/realization_002.csv").exists());
        assert!(tmp.path().join("predictions.csv").exists());
        assert!(tmp.path().join("run_meta.json").exists());
    }

    #[test]
    fn diffusion_outputs_identical_across_thread_counts() {
        let read_tree = |dir: &Path| -> Vec<(String, Vec<u8>)> {
            let mut files = Vec::new();
            let mut stack = vec![dir.to_path_buf()];
            while let Some(d) = stack.pop() {
                for entry in std::fs::read_dir(&d).unwrap() {
                    let path = entry.unwrap().path();
                    if path.is_dir() {
                        stack.push(path);
                    } else {
                        let rel = path.strip_prefix(dir).unwrap().display().to_string();
                        files.push((rel, std::fs::read(&path).unwrap()));
                    }
                }
            }
            files.sort();
            files
        };
        // same config text (same digest); only the thread count differs,
        // mirroring a --threads override
        let tmp1 = tempfile::tempdir().unwrap();
        let tmp2 = tempfile::tempdir().unwrap();
        let mut cfg1 = smoke_config("");
        cfg1.output_dir = tmp1.path().to_path_buf();
        cfg1.ensemble.parallelism = 1;
        let mut cfg2 = smoke_config("");
        cfg2.output_dir = tmp2.path().to_path_buf();
        cfg2.ensemble.parallelism = 2;
        run_diffusion(&cfg1).unwrap();
        run_diffusion(&cfg2).unwrap();
        let a = read_tree(tmp1.path());
        let b = read_tree(tmp2.path());
        assert_eq!(a.len(), b.len());
        for ((name_a, bytes_a), (name_b, bytes_b)) in a.iter().zip(b.iter()) {
            assert_eq!(name_a, name_b);
            assert_eq!(bytes_a, bytes_b, "file {name_a} differs across thread counts");
        }
    }

    #[test]
    fn spectrum_run_reproduces_quoted_numbers() {
        let tmp = tempfile::tempdir().unwrap();
        let text = r#"
experiment = "spectrum"

[horizon]
omega_perp_up = 835.6636462366285
omega_perp_down = 879.645943005142
rho0_up = 1.0e8
v0_up = 2.5e-4
horizon_position = 0.0
smoothing_width = 2.0

[grid]
n_points = 512
length = 160.0

[stepper]
dt = 0.01
tau_end = 1.0
"#;
        let mut cfg = ExperimentConfig::from_toml_str(text).unwrap();
        cfg.output_dir = tmp.path().to_path_buf();
        let out = run_spectrum(&cfg).unwrap();
        assert!((out.mach_up - 0.3).abs() < 0.05);
        assert!((out.mach_down - 2.3).abs() / 2.3 < 0.05);
        assert!((out.hawking_temperature_k - 1.4e-9).abs() / 1.4e-9 < 0.05);
        assert!((out.min_trapped_wavelength_m - 5.5e-6).abs() / 5.5e-6 < 0.10);
        assert!(tmp.path().join("spectrum_upstream.csv").exists());
        assert!(tmp.path().join("spectrum_downstream.csv").exists());
    }
}
