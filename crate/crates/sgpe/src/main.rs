use clap::{Args, Parser, Subcommand};
use sgpe::config::{ExperimentConfig, ExperimentKind};
use sgpe::error::SgpeError;
use sgpe::experiments;
use std::path::PathBuf;
use std::process::ExitCode;

/// Stochastic 1D condensate dynamics: dark-soliton diffusion ensembles and
/// sonic-horizon detection runs.
#[derive(Parser)]
#[command(name = "sgpe", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Override the base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of realizations.
    #[arg(long)]
    realizations: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Free-soliton Brownian-diffusion ensemble with analytic overlays.
    Diffusion(RunArgs),
    /// Bogoliubov branch tables and horizon summary numbers (no evolution).
    Spectrum(RunArgs),
    /// Two-region sonic-horizon ensemble with noiseless control.
    Horizon(RunArgs),
    /// One trajectory with density snapshots.
    Run(RunArgs),
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Diffusion(_) => ExperimentKind::Diffusion,
            Command::Spectrum(_) => ExperimentKind::Spectrum,
            Command::Horizon(_) => ExperimentKind::Horizon,
            Command::Run(_) => ExperimentKind::SingleRun,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Diffusion(a) | Command::Spectrum(a) | Command::Horizon(a) | Command::Run(a) => {
                a
            }
        }
    }
}

fn load_config(command: &Command) -> sgpe::Result<ExperimentConfig> {
    let args = command.args();
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if cfg.experiment != command.kind() {
        return Err(SgpeError::Config(format!(
            "config declares experiment '{}' but the '{}' subcommand was invoked",
            cfg.experiment.name(),
            command.kind().name()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.ensemble.base_seed = seed;
    }
    if let Some(n) = args.realizations {
        cfg.ensemble.n_realizations = n;
    }
    if let Some(t) = args.threads {
        cfg.ensemble.parallelism = t;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn report_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn execute(command: &Command) -> sgpe::Result<()> {
    let cfg = load_config(command)?;
    match command {
        Command::Diffusion(_) => {
            let out = experiments::run_diffusion(&cfg)?;
            report_warnings(&out.warnings);
            println!(
                "diffusion: {} realizations ({} failed, {} fully tracked), {} snapshots",
                out.n_realizations,
                out.n_failed,
                out.n_tracked,
                out.taus.len()
            );
            if let Some(fit) = &out.variance_fit {
                println!(
                    "  variance exponent {:.3} [{:.3}, {:.3}] over {} points",
                    fit.exponent, fit.exponent_low, fit.exponent_high, fit.n_points
                );
            }
            if let Some(fit) = &out.width_fit {
                println!(
                    "  mean-profile width exponent {:.3} [{:.3}, {:.3}]",
                    fit.exponent, fit.exponent_low, fit.exponent_high
                );
            }
            if let Some(fit) = &out.blackness_fit {
                println!(
                    "  mean-profile depth exponent {:.3} [{:.3}, {:.3}]",
                    fit.exponent, fit.exponent_low, fit.exponent_high
                );
            }
            for row in &out.sweep {
                println!(
                    "  T = {:.2} nK: fitted width {:.3}, spread width {:.3} \
                     ({} fixes), depth {:.4}, area {:.3}",
                    row.temperature * 1e9,
                    row.fit_width,
                    row.stat_width,
                    row.n_located,
                    row.fit_depth,
                    row.fit_area
                );
            }
        }
        Command::Spectrum(_) => {
            let out = experiments::run_spectrum(&cfg)?;
            println!(
                "spectrum: mach {:.3} -> {:.3}, T_H = {:.3} nK, min trapped wavelength {:.2} um",
                out.mach_up,
                out.mach_down,
                out.hawking_temperature_k * 1e9,
                out.min_trapped_wavelength_m * 1e6
            );
        }
        Command::Horizon(_) => {
            let out = experiments::run_horizon(&cfg)?;
            report_warnings(&out.warnings);
            println!(
                "horizon: {} realizations ({} failed), T_H = {:.3} nK, gamma = {:.3e}",
                out.n_realizations,
                out.n_failed,
                out.hawking_temperature_k * 1e9,
                out.gamma_hawking
            );
            if let (Some(first), Some(last)) = (out.profiles.first(), out.profiles.last()) {
                if let (Some(d0), Some(d1)) = (first.dip, last.dip) {
                    println!(
                        "  dip width {:.3} -> {:.3}, blackness {:.4} -> {:.4} over tau = {:.0}",
                        d0.width, d1.width, d0.blackness, d1.blackness, last.tau
                    );
                }
            }
        }
        Command::Run(_) => {
            let out = experiments::run_single(&cfg)?;
            report_warnings(&out.warnings);
            let tracked = out.observations.iter().filter(|o| o.is_some()).count();
            println!(
                "run: {} snapshots, soliton tracked in {}",
                out.taus.len(),
                tracked
            );
        }
    }
    Ok(())
}

fn exit_code_for(err: &SgpeError) -> u8 {
    match err {
        SgpeError::Config(_)
        | SgpeError::InvalidParameter(_)
        | SgpeError::InvalidGrid(_)
        | SgpeError::Io(_)
        | SgpeError::Serde(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
