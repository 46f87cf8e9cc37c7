//! Localization diagnostics: inverse participation ratios, per-mode tables
//! and finite-size scaling fits.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{fibonacci_approximant, ModelParams};
use crate::propagator::{check_normalized, one_period};
use crate::spectral::{eigendecompose, FloquetMode, QuasiSpectrum};

/// States with `IPR > LOCALIZED_IPR_FACTOR / L` are flagged localized.
pub const LOCALIZED_IPR_FACTOR: f64 = 10.0;

/// Ties in `|eps.re - target|` closer than this are broken by IPR.
pub(crate) const TIE_TOLERANCE: f64 = 1e-9;

/// `sum_i |psi_i|^4` of a normalized state.
pub fn ipr(psi: &[Complex64]) -> Result<f64> {
    check_normalized(psi)?;
    Ok(psi.iter().map(|z| z.norm_sqr().powi(2)).sum())
}

pub fn average_ipr(spec: &QuasiSpectrum) -> Result<f64> {
    if spec.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let total: f64 = spec.modes().iter().map(|m| ipr(&m.vector)).sum::<Result<f64>>()?;
    Ok(total / spec.len() as f64)
}

pub fn localized_threshold(sites: usize) -> f64 {
    LOCALIZED_IPR_FACTOR / sites as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRecord {
    pub eps_real: f64,
    pub eps_imag: f64,
    pub ipr: f64,
    pub localized: bool,
}

/// One record per mode in spectrum order (ascending `eps.re`), flagged
/// localized above `10 / L`.
pub fn mode_table(spec: &QuasiSpectrum) -> Result<Vec<ModeRecord>> {
    mode_table_with_threshold(spec, localized_threshold(spec.len()))
}

pub fn mode_table_with_threshold(spec: &QuasiSpectrum, ipr_threshold: f64) -> Result<Vec<ModeRecord>> {
    spec.modes()
        .iter()
        .map(|m| {
            let value = ipr(&m.vector)?;
            Ok(ModeRecord {
                eps_real: m.quasi_energy.re,
                eps_imag: m.quasi_energy.im,
                ipr: value,
                localized: value > ipr_threshold,
            })
        })
        .collect()
}

/// Least-squares power law `IPR ~ L^(-gamma)` in log-log space.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub lengths: Vec<usize>,
    pub iprs: Vec<f64>,
    pub gamma: f64,
    /// RMS of the residuals of `ln IPR`.
    pub fit_residual: f64,
}

pub fn fit_power_law(lengths: &[usize], iprs: &[f64]) -> Result<ScalingFit> {
    if lengths.len() != iprs.len() {
        return Err(Error::DimensionMismatch { expected: lengths.len(), got: iprs.len() });
    }
    if lengths.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: lengths.len() });
    }
    let xs: Vec<f64> = lengths.iter().map(|&l| (l as f64).ln()).collect();
    let ys: Vec<f64> = iprs.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParams("scaling fit needs distinct lengths".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(ScalingFit {
        lengths: lengths.to_vec(),
        iprs: iprs.to_vec(),
        gamma: -slope,
        fit_residual: (rss / n).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Real quasi-energy and `IPR <= 10/L`.
    Extended,
    /// `IPR > 10/L`.
    Localized,
}

/// Mode tracked at one lattice length.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedMode {
    pub sites: usize,
    pub quasi_energy: Complex64,
    pub ipr: f64,
}

/// Nearest mode to `target` in `eps.re` within one IPR class.
///
/// The extended branch only admits modes with `|eps.im| < eta`; ties in
/// distance go to the smaller IPR for the extended branch and the larger
/// one for the localized branch.
pub fn track_branch(spec: &QuasiSpectrum, target: f64, branch: Branch, eta: f64) -> Result<TrackedMode> {
    let sites = spec.len();
    let threshold = localized_threshold(sites);
    let mut best: Option<(f64, f64, &FloquetMode)> = None;
    for m in spec.modes() {
        let value = ipr(&m.vector)?;
        let admitted = match branch {
            Branch::Extended => value <= threshold && m.quasi_energy.im.abs() < eta,
            Branch::Localized => value > threshold,
        };
        if !admitted {
            continue;
        }
        let dist = (m.quasi_energy.re - target).abs();
        let better = match best {
            None => true,
            Some((d, v, _)) if (dist - d).abs() <= TIE_TOLERANCE => match branch {
                Branch::Extended => value < v,
                Branch::Localized => value > v,
            },
            Some((d, _, _)) => dist < d,
        };
        if better {
            best = Some((dist, value, m));
        }
    }
    let (_, value, m) = best.ok_or_else(|| Error::NoMatchingMode(format!("{branch:?} branch at L={sites}")))?;
    Ok(TrackedMode { sites, quasi_energy: m.quasi_energy, ipr: value })
}

/// How modes are matched across lattice lengths; reported in outputs.
pub const MATCHING_RULE: &str = "nearest eps_real to target within IPR class (extended: real and IPR<=10/L; localized: IPR>10/L); ties to larger IPR for localized";

#[derive(Debug, Clone, PartialEq)]
pub struct BranchScaling {
    pub tracked: Vec<TrackedMode>,
    pub fit: ScalingFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub target_eps_real: f64,
    pub extended: BranchScaling,
    pub localized: BranchScaling,
}

/// Follows the extended and localized modes nearest `target_eps_real`
/// across Fibonacci lattice lengths and fits `IPR ~ L^(-gamma)` for each.
///
/// Lengths are diagonalized concurrently on the current rayon pool.
pub fn ipr_scaling(
    params_base: &ModelParams,
    target_eps_real: f64,
    lengths: &[usize],
    eta: f64,
) -> Result<ScalingResult> {
    if lengths.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: lengths.len() });
    }
    let per_length: Vec<(TrackedMode, TrackedMode)> = lengths
        .par_iter()
        .map(|&sites| {
            let p = params_base.with_sites(sites, fibonacci_approximant(sites)?)?;
            let spec = eigendecompose(&one_period(&p)?, p.omega())?;
            Ok((
                track_branch(&spec, target_eps_real, Branch::Extended, eta)?,
                track_branch(&spec, target_eps_real, Branch::Localized, eta)?,
            ))
        })
        .collect::<Result<_>>()?;
    let (ext, loc): (Vec<_>, Vec<_>) = per_length.into_iter().unzip();
    let fit = |modes: Vec<TrackedMode>| -> Result<BranchScaling> {
        let iprs: Vec<f64> = modes.iter().map(|m| m.ipr).collect();
        Ok(BranchScaling { fit: fit_power_law(lengths, &iprs)?, tracked: modes })
    };
    Ok(ScalingResult { target_eps_real, extended: fit(ext)?, localized: fit(loc)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ipr_examples() {
        let mut delta = vec![c(0.0, 0.0); 10];
        delta[3] = c(0.0, 1.0);
        assert!((ipr(&delta).unwrap() - 1.0).abs() < 1e-15);
        let uniform = vec![c(1.0 / 10f64.sqrt(), 0.0); 10];
        assert!((ipr(&uniform).unwrap() - 0.1).abs() < 1e-15);
        let pair = vec![c(0.5f64.sqrt(), 0.0), c(0.0, -(0.5f64.sqrt())), c(0.0, 0.0)];
        assert!((ipr(&pair).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ipr_rejects_unnormalized() {
        assert!(matches!(ipr(&[c(1.0, 0.0), c(1.0, 0.0)]), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn power_law_fits() {
        let lengths = [89, 144, 233];
        let uniform: Vec<f64> = lengths.iter().map(|&l| 1.0 / l as f64).collect();
        let fit = fit_power_law(&lengths, &uniform).unwrap();
        assert!((fit.gamma - 1.0).abs() < 1e-12);
        assert!(fit.fit_residual < 1e-12);
        let fit = fit_power_law(&lengths, &[1.0, 1.0, 1.0]).unwrap();
        assert!(fit.gamma.abs() < 1e-12);
        assert_eq!(
            fit_power_law(&lengths[..2], &[1.0, 1.0]),
            Err(Error::TooFewPoints { needed: 3, got: 2 })
        );
    }

    #[test]
    fn scaling_needs_three_lengths() {
        let p = ModelParams::new(89).unwrap();
        assert!(matches!(ipr_scaling(&p, 0.0, &[89, 144], 1e-6), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn small_lattice_average_ipr_is_at_least_half() {
        let p = ModelParams::new(2).unwrap().with_h(0.3).unwrap();
        let spec = eigendecompose(&one_period(&p).unwrap(), p.omega()).unwrap();
        assert!(average_ipr(&spec).unwrap() >= 0.5 - 1e-12);
    }
}
