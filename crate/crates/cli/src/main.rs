mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Command, EchoSection, HcCurveSection, ModelSection, OmegaCSection, PhaseDiagramSection, RunConfig,
    ScalingSection, SearchSection};
use error::CliError;

/// Simulator for the periodically driven non-Hermitian Aubry-André-Harper chain.
///
/// Settings are merged as: command-line flags, then the `--config` file, then
/// built-in defaults. Every output embeds the merged config, so an output
/// file can be passed back to `--config` to reproduce it.
#[derive(Parser, Debug)]
#[command(name = "floquet-aah", version, about, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
struct Global {
    /// TOML config, or an earlier output file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Number of lattice sites.
    #[arg(long = "L", global = true)]
    sites: Option<usize>,
    /// Hopping amplitude.
    #[arg(long = "J", global = true)]
    hopping: Option<f64>,
    /// Potential strength.
    #[arg(long = "V", global = true)]
    strength: Option<f64>,
    /// Modulation frequency: "p/q" or a decimal.
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// Phase offset of the potential.
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Imaginary phase shift.
    #[arg(long, global = true)]
    h: Option<f64>,
    /// Drive frequency.
    #[arg(long, global = true)]
    omega: Option<f64>,
    /// Threshold on |Im eps| / J for calling a spectrum complex.
    #[arg(long, global = true)]
    eta: Option<f64>,
    /// Bisection resolution in h.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Pin L=610, alpha=377/610, theta=0, eta=1e-6.
    #[arg(long, global = true)]
    paper_repro: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Quasi-energies, IPRs and residuals of every Floquet mode.
    Spectrum,
    /// Grid of spectral diagnostics over (h, omega).
    PhaseDiagram {
        #[arg(long)]
        nh: Option<usize>,
        #[arg(long)]
        nomega: Option<usize>,
    },
    /// Critical h as a function of omega.
    HcCurve {
        /// "exact" or "effective".
        #[arg(long)]
        method: Option<String>,
    },
    /// Frequency of the largest critical h.
    OmegaM,
    /// Slope of omega_m against J.
    KappaFit,
    /// Frequency below which the critical h collapses.
    OmegaC {
        #[arg(long)]
        h_floor: Option<f64>,
    },
    /// IPR finite-size scaling of the two branches near a quasi-energy.
    Scaling {
        #[arg(long)]
        target: Option<f64>,
    },
    /// Loschmidt echo after a quench in h.
    Echo {
        #[arg(long)]
        pre_h: Option<f64>,
        #[arg(long)]
        post_h: Option<f64>,
        #[arg(long)]
        periods: Option<usize>,
        /// min-real, max-ipr, index:N, nearest:EPS or nearest-localized:EPS.
        #[arg(long)]
        selector: Option<String>,
    },
    /// Exact and second-order effective critical h side by side.
    CompareEffective,
}

impl Cli {
    /// The flags as a config layer, plus the command they select.
    fn flag_layer(&self) -> (Command, RunConfig) {
        let g = &self.global;
        let mut layer = RunConfig {
            paper_repro: g.paper_repro.then_some(true),
            out: g.out.clone(),
            workers: g.workers,
            model: ModelSection {
                sites: g.sites,
                hopping: g.hopping,
                strength: g.strength,
                alpha: g.alpha.clone(),
                theta: g.theta,
                h: g.h,
                omega: g.omega,
            },
            search: SearchSection { eta: g.eta, tol: g.tol, h_max: None },
            ..RunConfig::default()
        };
        let command = match &self.command {
            Cmd::Spectrum => Command::Spectrum,
            Cmd::PhaseDiagram { nh, nomega } => {
                layer.phase_diagram = PhaseDiagramSection { nh: *nh, nomega: *nomega, ..Default::default() };
                Command::PhaseDiagram
            }
            Cmd::HcCurve { method } => {
                layer.hc_curve = HcCurveSection { method: method.clone(), ..Default::default() };
                Command::HcCurve
            }
            Cmd::OmegaM => Command::OmegaM,
            Cmd::KappaFit => Command::KappaFit,
            Cmd::OmegaC { h_floor } => {
                layer.omega_c = OmegaCSection { h_floor: *h_floor, ..Default::default() };
                Command::OmegaC
            }
            Cmd::Scaling { target } => {
                layer.scaling = ScalingSection { target_eps_real: *target, ..Default::default() };
                Command::Scaling
            }
            Cmd::Echo { pre_h, post_h, periods, selector } => {
                layer.echo = EchoSection {
                    pre_h: *pre_h,
                    post_h: *post_h,
                    periods: *periods,
                    selector: selector.clone(),
                    ..Default::default()
                };
                Command::Echo
            }
            Cmd::CompareEffective => Command::CompareEffective,
        };
        (command, layer)
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let (command, flags) = cli.flag_layer();
    let file = match &cli.global.config {
        Some(path) => config::load(path)?,
        None => RunConfig::default(),
    };
    let resolved = config::overlay(&file, &flags).resolve(command)?;
    if resolved.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(resolved.workers)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", resolved.workers)))?;
    }
    let table = commands::run(&resolved)?;
    output::write(resolved.out.as_deref(), &output::render(&resolved, &table))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("floquet-aah: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
