//! Run configuration: TOML file sections, merged with command-line flags and
//! filled with defaults before anything runs.

use std::path::PathBuf;

use floquet_aah::phase::{linspace, OmegaMSettings};
use floquet_aah::{fibonacci_approximant, Alpha, HcMethod, InitialSelector, ModelParams, SearchSettings};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CONFIG_BEGIN: &str = "# --- config ---";
pub const CONFIG_END: &str = "# --- end config ---";

const PAPER_SITES: usize = 610;
const PAPER_ALPHA: Alpha = Alpha::Rational { p: 377, q: 610 };
const PAPER_ETA: f64 = 1e-6;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hopping: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
    /// `"p/q"` or a decimal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseDiagramSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nh: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nomega: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HcCurveSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omegas: Option<Vec<f64>>,
    /// `"exact"` or `"effective"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OmegaMSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coarse_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KappaFitSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hoppings: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coarse_n: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OmegaCSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_eps_real: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EchoSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pre_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub post_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periods: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
    /// `min-real`, `max-ipr`, `index:<n>`, `nearest:<eps>` or
    /// `nearest-localized:<eps>`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selector: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omegas: Option<Vec<f64>>,
}

/// Everything a run needs. Every field is optional on input;
/// [`RunConfig::resolve`] fills the ones the command uses.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paper_repro: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "is_default")]
    pub model: ModelSection,
    #[serde(skip_serializing_if = "is_default")]
    pub search: SearchSection,
    #[serde(skip_serializing_if = "is_default")]
    pub phase_diagram: PhaseDiagramSection,
    #[serde(skip_serializing_if = "is_default")]
    pub hc_curve: HcCurveSection,
    #[serde(skip_serializing_if = "is_default")]
    pub omega_m: OmegaMSection,
    #[serde(skip_serializing_if = "is_default")]
    pub kappa_fit: KappaFitSection,
    #[serde(skip_serializing_if = "is_default")]
    pub omega_c: OmegaCSection,
    #[serde(skip_serializing_if = "is_default")]
    pub scaling: ScalingSection,
    #[serde(skip_serializing_if = "is_default")]
    pub echo: EchoSection,
    #[serde(skip_serializing_if = "is_default")]
    pub compare_effective: CompareSection,
}

fn is_default<T: Default + PartialEq>(value: &T) -> bool {
    *value == T::default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    PhaseDiagram,
    HcCurve,
    OmegaM,
    KappaFit,
    OmegaC,
    Scaling,
    Echo,
    CompareEffective,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::PhaseDiagram => "phase-diagram",
            Command::HcCurve => "hc-curve",
            Command::OmegaM => "omega-m",
            Command::KappaFit => "kappa-fit",
            Command::OmegaC => "omega-c",
            Command::Scaling => "scaling",
            Command::Echo => "echo",
            Command::CompareEffective => "compare-effective",
        }
    }
}

/// Reads a TOML config, or the config echo embedded in an earlier output.
pub fn load(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn parse(text: &str) -> Result<RunConfig, String> {
    let body = match extract_echo(text) {
        Some(echo) => echo,
        None => text.to_string(),
    };
    toml::from_str(&body).map_err(|e| e.to_string())
}

fn extract_echo(text: &str) -> Option<String> {
    let mut lines = text.lines().skip_while(|l| l.trim_end() != CONFIG_BEGIN);
    lines.next()?;
    let mut body = String::new();
    for line in lines {
        if line.trim_end() == CONFIG_END {
            return Some(body);
        }
        let stripped = line.strip_prefix("# ").or_else(|| line.strip_prefix('#')).unwrap_or(line);
        body.push_str(stripped);
        body.push('\n');
    }
    None
}

/// Overlays every field set in `top` on `base`.
pub fn overlay(base: &RunConfig, top: &RunConfig) -> RunConfig {
    fn merge(into: &mut toml::Table, from: toml::Table) {
        for (key, value) in from {
            match (into.get_mut(&key), value) {
                (Some(toml::Value::Table(a)), toml::Value::Table(b)) => merge(a, b),
                (_, v) => {
                    into.insert(key, v);
                }
            }
        }
    }
    let to_table = |c: &RunConfig| toml::Table::try_from(c).expect("config serializes to a table");
    let mut merged = to_table(base);
    merge(&mut merged, to_table(top));
    merged.try_into().expect("merged config deserializes")
}

/// How the echo initial state is chosen, as written in configs.
pub fn parse_selector(text: &str) -> Result<InitialSelector, CliError> {
    let bad = || CliError::Config(format!("unknown echo selector {text:?}"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    match text.split_once(':') {
        None if text == "min-real" => Ok(InitialSelector::MinRealQuasiEnergy),
        None if text == "max-ipr" => Ok(InitialSelector::MaxIpr),
        Some(("index", n)) => n.trim().parse().map(InitialSelector::Index).map_err(|_| bad()),
        Some(("nearest", x)) => Ok(InitialSelector::NearestRealQuasiEnergy { target: number(x)?, prefer_localized: false }),
        Some(("nearest-localized", x)) => {
            Ok(InitialSelector::NearestRealQuasiEnergy { target: number(x)?, prefer_localized: true })
        }
        _ => Err(bad()),
    }
}

/// Work specific to one subcommand, with every knob resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Spectrum,
    PhaseDiagram { h_range: (f64, f64), omega_range: (f64, f64), nh: usize, nomega: usize },
    HcCurve { omegas: Vec<f64>, method: HcMethod },
    OmegaM { search: OmegaMSettings },
    KappaFit { hoppings: Vec<f64>, coarse_n: usize },
    OmegaC { h_floor: f64, bracket: (f64, f64), omega_tol: f64 },
    Scaling { target_eps_real: f64, lengths: Vec<usize> },
    Echo { pre_h: f64, post_h: f64, periods: usize, record_every: usize, selector: InitialSelector },
    CompareEffective { omegas: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub command: Command,
    pub params: ModelParams,
    pub search: SearchSettings,
    pub task: Task,
    pub out: Option<PathBuf>,
    pub workers: usize,
    /// The effective configuration, without output path and worker count,
    /// which do not affect results.
    pub echo: RunConfig,
}

fn require_positive(name: &str, value: f64) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {value}")))
    }
}

fn require_range(name: &str, [lo, hi]: [f64; 2], min: f64) -> Result<(f64, f64), CliError> {
    if lo >= min && hi >= lo && hi.is_finite() {
        Ok((lo, hi))
    } else {
        Err(CliError::Config(format!("{name} must satisfy {min} <= lo <= hi, got [{lo}, {hi}]")))
    }
}

fn require_nonempty<T>(name: &str, values: &[T]) -> Result<(), CliError> {
    if values.is_empty() {
        Err(CliError::Config(format!("{name} must not be empty")))
    } else {
        Ok(())
    }
}

impl RunConfig {
    /// Applies paper-repro pins and defaults, and validates everything the
    /// command will use.
    pub fn resolve(&self, command: Command) -> Result<Resolved, CliError> {
        let paper = self.paper_repro.unwrap_or(false);
        let m = &self.model;
        if paper {
            let conflict = |name: &str| CliError::Config(format!("--paper-repro pins {name}; remove the explicit value"));
            if m.sites.is_some_and(|l| l != PAPER_SITES) {
                return Err(conflict("L = 610"));
            }
            if let Some(a) = &m.alpha {
                if a.parse::<Alpha>().map_err(|e| CliError::Config(e.to_string()))? != PAPER_ALPHA {
                    return Err(conflict("alpha = 377/610"));
                }
            }
            if m.theta.is_some_and(|t| t != 0.0) {
                return Err(conflict("theta = 0"));
            }
            if self.search.eta.is_some_and(|e| e != PAPER_ETA) {
                return Err(conflict("eta = 1e-6"));
            }
            if command == Command::Echo && m.omega.is_none() {
                return Err(CliError::Config("--paper-repro echo runs need an explicit omega".into()));
            }
        }

        let sites = m.sites.unwrap_or(PAPER_SITES);
        let alpha = match &m.alpha {
            Some(text) => text.parse::<Alpha>().map_err(|e| CliError::Config(e.to_string()))?,
            None => fibonacci_approximant(sites).map_err(|e| CliError::Config(format!("{e}; set alpha explicitly")))?,
        };
        let params = ModelParams::from_parts(
            sites,
            m.hopping.unwrap_or(1.0),
            m.strength.unwrap_or(1.0),
            alpha,
            m.theta.unwrap_or(0.0),
            m.h.unwrap_or(0.0),
            m.omega.unwrap_or(10.0),
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        let search = SearchSettings {
            eta: require_positive("eta", self.search.eta.unwrap_or(PAPER_ETA))?,
            tol: require_positive("tol", self.search.tol.unwrap_or(1e-3))?,
            h_max: require_positive("h_max", self.search.h_max.unwrap_or(3.0))?,
        };

        let mut echo = RunConfig {
            paper_repro: paper.then_some(true),
            model: ModelSection {
                sites: Some(params.sites()),
                hopping: Some(params.hopping()),
                strength: Some(params.strength()),
                alpha: Some(params.alpha().to_string()),
                theta: Some(params.theta()),
                h: Some(params.h()),
                omega: Some(params.omega()),
            },
            search: SearchSection { eta: Some(search.eta), tol: Some(search.tol), h_max: Some(search.h_max) },
            ..RunConfig::default()
        };

        let j = params.hopping();
        let task = match command {
            Command::Spectrum => Task::Spectrum,
            Command::PhaseDiagram => {
                let s = &self.phase_diagram;
                let h_range = s.h_range.unwrap_or([0.0, 3.0]);
                let omega_range = s.omega_range.unwrap_or([1.0, 10.0]);
                let (nh, nomega) = (s.nh.unwrap_or(16), s.nomega.unwrap_or(19));
                if nh < 2 || nomega < 2 {
                    return Err(CliError::Config(format!("phase grid needs nh, nomega >= 2, got {nh} x {nomega}")));
                }
                echo.phase_diagram = PhaseDiagramSection {
                    h_range: Some(h_range),
                    omega_range: Some(omega_range),
                    nh: Some(nh),
                    nomega: Some(nomega),
                };
                Task::PhaseDiagram {
                    h_range: require_range("h_range", h_range, 0.0)?,
                    omega_range: require_range("omega_range", omega_range, f64::MIN_POSITIVE)?,
                    nh,
                    nomega,
                }
            }
            Command::HcCurve => {
                let s = &self.hc_curve;
                let omegas = s.omegas.clone().unwrap_or_else(|| linspace(2.2, 10.0, 40));
                require_nonempty("hc_curve.omegas", &omegas)?;
                let method_name = s.method.clone().unwrap_or_else(|| "exact".into());
                let method = match method_name.as_str() {
                    "exact" => HcMethod::ExactPropagator,
                    "effective" => HcMethod::EffectiveOrder2,
                    other => return Err(CliError::Config(format!("unknown hc_curve method {other:?}"))),
                };
                echo.hc_curve = HcCurveSection { omegas: Some(omegas.clone()), method: Some(method_name) };
                Task::HcCurve { omegas, method }
            }
            Command::OmegaM => {
                let s = &self.omega_m;
                let d = OmegaMSettings::for_hopping(j);
                let bracket = s.bracket.unwrap_or([d.bracket.0, d.bracket.1]);
                let search = OmegaMSettings {
                    bracket: require_range("omega_m.bracket", bracket, f64::MIN_POSITIVE)?,
                    coarse_n: s.coarse_n.unwrap_or(d.coarse_n),
                    omega_tol: require_positive("omega_m.omega_tol", s.omega_tol.unwrap_or(d.omega_tol))?,
                };
                echo.omega_m = OmegaMSection {
                    bracket: Some(bracket),
                    coarse_n: Some(search.coarse_n),
                    omega_tol: Some(search.omega_tol),
                };
                Task::OmegaM { search }
            }
            Command::KappaFit => {
                let s = &self.kappa_fit;
                let hoppings = s.hoppings.clone().unwrap_or_else(|| vec![0.6, 0.8, 1.0, 1.2]);
                let coarse_n = s.coarse_n.unwrap_or(15);
                echo.kappa_fit = KappaFitSection { hoppings: Some(hoppings.clone()), coarse_n: Some(coarse_n) };
                Task::KappaFit { hoppings, coarse_n }
            }
            Command::OmegaC => {
                let s = &self.omega_c;
                let h_floor = require_positive("omega_c.h_floor", s.h_floor.unwrap_or(0.05))?;
                let bracket = s.bracket.unwrap_or([1.6 * j, 3.0 * j]);
                let omega_tol = require_positive("omega_c.omega_tol", s.omega_tol.unwrap_or(0.01 * j))?;
                echo.omega_c = OmegaCSection { h_floor: Some(h_floor), bracket: Some(bracket), omega_tol: Some(omega_tol) };
                Task::OmegaC { h_floor, bracket: require_range("omega_c.bracket", bracket, f64::MIN_POSITIVE)?, omega_tol }
            }
            Command::Scaling => {
                let s = &self.scaling;
                let target_eps_real = s.target_eps_real.unwrap_or(-0.856);
                let lengths = s.lengths.clone().unwrap_or_else(|| vec![89, 144, 233, 377, 610]);
                echo.scaling = ScalingSection { target_eps_real: Some(target_eps_real), lengths: Some(lengths.clone()) };
                Task::Scaling { target_eps_real, lengths }
            }
            Command::Echo => {
                let s = &self.echo;
                let pre_h = s.pre_h.unwrap_or(params.h());
                let post_h = s.post_h.unwrap_or(params.h());
                let periods = s.periods.unwrap_or(floquet_aah::dynamics::DEFAULT_PERIODS);
                let record_every = s.record_every.unwrap_or(1);
                if periods == 0 || record_every == 0 {
                    return Err(CliError::Config("echo.periods and echo.record_every must be at least 1".into()));
                }
                let selector_text = s.selector.clone().unwrap_or_else(|| "min-real".into());
                let selector = parse_selector(&selector_text)?;
                echo.echo = EchoSection {
                    pre_h: Some(pre_h),
                    post_h: Some(post_h),
                    periods: Some(periods),
                    record_every: Some(record_every),
                    selector: Some(selector_text),
                };
                Task::Echo { pre_h, post_h, periods, record_every, selector }
            }
            Command::CompareEffective => {
                let omegas = self.compare_effective.omegas.clone().unwrap_or_else(|| vec![5.0, 6.0, 8.0, 10.0]);
                require_nonempty("compare_effective.omegas", &omegas)?;
                echo.compare_effective = CompareSection { omegas: Some(omegas.clone()) };
                Task::CompareEffective { omegas }
            }
        };

        Ok(Resolved { command, params, search, task, out: self.out.clone(), workers: self.workers.unwrap_or(0), echo })
    }
}

impl Resolved {
    pub fn echo_toml(&self) -> String {
        toml::to_string(&self.echo).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_override_defaults() {
        let file = parse("[model]\nsites = 89\nh = 0.4\n[search]\ntol = 0.01\n").unwrap();
        let flags = RunConfig { model: ModelSection { h: Some(0.9), ..Default::default() }, ..Default::default() };
        let r = overlay(&file, &flags).resolve(Command::Spectrum).unwrap();
        assert_eq!(r.params.sites(), 89);
        assert_eq!(r.params.h(), 0.9);
        assert_eq!(r.search.tol, 0.01);
        assert_eq!(r.search.eta, 1e-6);
        assert_eq!(r.params.alpha(), Alpha::Rational { p: 55, q: 89 });
    }

    #[test]
    fn echo_block_parses_back() {
        let r = parse("[model]\nsites = 34\n").unwrap().resolve(Command::CompareEffective).unwrap();
        let mut text = String::from("# header\n# --- config ---\n");
        for line in r.echo_toml().lines() {
            text.push_str(&format!("# {line}\n"));
        }
        text.push_str("# --- end config ---\nomega,hc_exact\n");
        let again = parse(&text).unwrap().resolve(Command::CompareEffective).unwrap();
        assert_eq!(again.echo, r.echo);
        assert_eq!(again.task, r.task);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(parse("[model]\nsitez = 3\n").is_err());
    }

    #[test]
    fn paper_repro_pins_and_requirements() {
        let paper = RunConfig { paper_repro: Some(true), ..Default::default() };
        let r = paper.resolve(Command::Spectrum).unwrap();
        assert_eq!((r.params.sites(), r.params.alpha(), r.params.theta(), r.search.eta), (610, PAPER_ALPHA, 0.0, 1e-6));
        assert!(matches!(paper.resolve(Command::Echo), Err(CliError::Config(_))));

        let conflicting = RunConfig { model: ModelSection { theta: Some(0.3), ..Default::default() }, ..paper.clone() };
        assert!(matches!(conflicting.resolve(Command::Spectrum), Err(CliError::Config(_))));

        let with_omega = RunConfig { model: ModelSection { omega: Some(3.6), ..Default::default() }, ..paper };
        assert!(with_omega.resolve(Command::Echo).is_ok());
    }

    #[test]
    fn selectors() {
        assert_eq!(parse_selector("min-real").unwrap(), InitialSelector::MinRealQuasiEnergy);
        assert_eq!(parse_selector("index:4").unwrap(), InitialSelector::Index(4));
        assert_eq!(
            parse_selector("nearest-localized:-0.5").unwrap(),
            InitialSelector::NearestRealQuasiEnergy { target: -0.5, prefer_localized: true }
        );
        assert!(parse_selector("nearest:x").is_err());
        assert!(parse_selector("largest").is_err());
    }

    #[test]
    fn empty_grid_is_a_config_error() {
        let c = parse("[phase_diagram]\nnh = 0\n").unwrap();
        assert!(matches!(c.resolve(Command::PhaseDiagram), Err(CliError::Config(_))));
    }
}
