//! Critical-parameter searches and `(h, omega)` sweeps.
//!
//! The onset of complex quasi-energies is located by bisection in `h` of
//! `g(h) = max |eps.im| / J - eta`, assuming a single sign change on
//! `[0, h_max]`. Dividing by `J` makes the threshold scale-free, so searches
//! are covariant under `(J, V, omega) -> (sJ, sV, s omega)`.

use rayon::prelude::*;

use crate::effective::effective_hc;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::observables::average_ipr;
use crate::propagator::one_period;
use crate::spectral::{classify_quasi_energies, classify_spectrum, eigendecompose, max_abs_imag, quasi_energy_values};

/// Tolerances shared by the `h` bisections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSettings {
    /// Threshold on `max |eps.im| / J`.
    pub eta: f64,
    /// Resolution of the bisection in `h`.
    pub tol: f64,
    /// Upper end of the `h` bracket.
    pub h_max: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self { eta: crate::spectral::DEFAULT_ETA, tol: 1e-3, h_max: 3.0 }
    }
}

impl SearchSettings {
    fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.tol > 0.0 && self.h_max > 0.0) {
            return Err(Error::InvalidParams(format!("eta, tol and h_max must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Number of concurrent workers for sweeps. `0` uses the ambient rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Workers(pub usize);

/// Maps `f` over `items` on `workers` threads, returning results in input
/// order regardless of completion order.
pub fn par_map_ordered<T, R, F>(workers: Workers, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match workers.0 {
        1 => items.iter().map(f).collect(),
        0 => items.par_iter().map(f).collect(),
        n => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(_) => items.iter().map(f).collect(),
        },
    }
}

/// Outcome of an onset bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Onset {
    /// `g(0) > 0`.
    AlreadyComplex,
    /// Bracket midpoint after bisection to the requested resolution.
    Crossing { h_c: f64, probes: usize },
    /// `g(h_max) < 0`.
    Censored,
}

/// Bisection of `probe(h) - eta` on `[0, h_max]` down to width `tol`.
pub fn bisect_onset(mut probe: impl FnMut(f64) -> Result<f64>, eta: f64, tol: f64, h_max: f64) -> Result<Onset> {
    if probe(0.0)? > eta {
        return Ok(Onset::AlreadyComplex);
    }
    if probe(h_max)? < eta {
        return Ok(Onset::Censored);
    }
    let (mut lo, mut hi) = (0.0, h_max);
    let mut probes = 2;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        probes += 1;
        if probe(mid)? > eta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Onset::Crossing { h_c: 0.5 * (lo + hi), probes })
}

fn require_hopping(p: &ModelParams) -> Result<()> {
    if p.hopping() > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams("critical searches need J > 0".into()))
    }
}

/// `max |eps.im|` of the exact propagator at `p`, from eigenvalues only.
pub fn exact_max_imag(p: &ModelParams) -> Result<f64> {
    let eps = quasi_energy_values(&one_period(p)?, p.omega())?;
    Ok(max_abs_imag(&eps))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalH {
    pub h_c: f64,
    /// No onset below `h_max`; `h_c` is then `h_max`.
    pub censored: bool,
    pub probes: usize,
}

/// Frequency-dependent critical shift `h_{c,omega}` of the exact propagator.
pub fn critical_h(p_base: &ModelParams, omega: f64, settings: &SearchSettings) -> Result<CriticalH> {
    settings.validate()?;
    require_hopping(p_base)?;
    let base = p_base.with_omega(omega)?;
    let j = base.hopping();
    let onset = bisect_onset(|h| Ok(exact_max_imag(&base.with_h(h)?)? / j), settings.eta, settings.tol, settings.h_max)?;
    Ok(match onset {
        Onset::AlreadyComplex => CriticalH { h_c: 0.0, censored: false, probes: 1 },
        Onset::Censored => CriticalH { h_c: settings.h_max, censored: true, probes: 2 },
        Onset::Crossing { h_c, probes } => CriticalH { h_c, censored: false, probes },
    })
}

/// Result of rescanning `g(h)` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub hs: Vec<f64>,
    pub values: Vec<f64>,
    /// Grid points where `g` drops back below `eta` after having exceeded it.
    pub violations: Vec<f64>,
}

impl MonotonicityReport {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Rescans `max |eps.im| / J` on `n` points of `[0, h_max]` and flags any
/// return to the real side after the first onset.
pub fn verify_monotone_onset(
    p_base: &ModelParams,
    omega: f64,
    settings: &SearchSettings,
    n: usize,
    workers: Workers,
) -> Result<MonotonicityReport> {
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    require_hopping(p_base)?;
    let base = p_base.with_omega(omega)?;
    let hs = linspace(0.0, settings.h_max, n);
    let values = par_map_ordered(workers, &hs, |&h| Ok(exact_max_imag(&base.with_h(h)?)? / base.hopping()))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let mut seen_complex = false;
    let mut violations = Vec::new();
    for (&h, &g) in hs.iter().zip(&values) {
        if g > settings.eta {
            seen_complex = true;
        } else if seen_complex {
            violations.push(h);
        }
    }
    Ok(MonotonicityReport { hs, values, violations })
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub h: f64,
    pub omega: f64,
    pub max_abs_imag: f64,
    pub avg_ipr: f64,
    pub complex_fraction: f64,
}

/// One grid cell; numerical failures are kept in place instead of aborting
/// the sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseCell {
    Point(PhasePoint),
    Failed { h: f64, omega: f64, reason: String },
}

impl PhaseCell {
    pub fn point(&self) -> Option<&PhasePoint> {
        match self {
            PhaseCell::Point(p) => Some(p),
            PhaseCell::Failed { .. } => None,
        }
    }
}

/// Cells in row-major order: `h` is the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub hs: Vec<f64>,
    pub omegas: Vec<f64>,
    pub cells: Vec<PhaseCell>,
}

impl PhaseGrid {
    pub fn cell(&self, ih: usize, iomega: usize) -> &PhaseCell {
        &self.cells[ih * self.omegas.len() + iomega]
    }
}

/// Diagnostics of the exact propagator at one `(h, omega)`.
pub fn phase_point(p_base: &ModelParams, h: f64, omega: f64, eta: f64) -> Result<PhasePoint> {
    let p = p_base.with_h(h)?.with_omega(omega)?;
    let spec = eigendecompose(&one_period(&p)?, omega)?;
    let class = classify_spectrum(&spec, eta);
    Ok(PhasePoint {
        h,
        omega,
        max_abs_imag: class.max_abs_imag,
        avg_ipr: average_ipr(&spec)?,
        complex_fraction: class.complex_fraction,
    })
}

/// Grid of [`PhasePoint`]s over `nh` values of `h` and `nomega` values of
/// `omega` (both ranges inclusive).
pub fn phase_grid(
    p_base: &ModelParams,
    h_range: (f64, f64),
    omega_range: (f64, f64),
    nh: usize,
    nomega: usize,
    eta: f64,
    workers: Workers,
) -> Result<PhaseGrid> {
    if nh < 2 || nomega < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: nh.min(nomega) });
    }
    if !(h_range.0 >= 0.0 && h_range.1 >= h_range.0 && omega_range.0 > 0.0 && omega_range.1 >= omega_range.0) {
        return Err(Error::InvalidParams(format!("invalid ranges h={h_range:?}, omega={omega_range:?}")));
    }
    if !(eta > 0.0) {
        return Err(Error::InvalidParams(format!("eta must be positive, got {eta}")));
    }
    let hs = linspace(h_range.0, h_range.1, nh);
    let omegas = linspace(omega_range.0, omega_range.1, nomega);
    let work: Vec<(f64, f64)> = hs.iter().flat_map(|&h| omegas.iter().map(move |&w| (h, w))).collect();
    let cells = par_map_ordered(workers, &work, |&(h, omega)| match phase_point(p_base, h, omega, eta) {
        Ok(point) => PhaseCell::Point(point),
        Err(e) => PhaseCell::Failed { h, omega, reason: e.to_string() },
    });
    Ok(PhaseGrid { hs, omegas, cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcMethod {
    ExactPropagator,
    EffectiveOrder2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HcCurve {
    pub omegas: Vec<f64>,
    pub hc_values: Vec<f64>,
    pub censored: Vec<bool>,
    pub method: HcMethod,
    pub settings: SearchSettings,
}

pub fn hc_curve(
    p_base: &ModelParams,
    omegas: &[f64],
    method: HcMethod,
    settings: &SearchSettings,
    workers: Workers,
) -> Result<HcCurve> {
    let results = par_map_ordered(workers, omegas, |&omega| match method {
        HcMethod::ExactPropagator => critical_h(p_base, omega, settings),
        HcMethod::EffectiveOrder2 => {
            let h_c = effective_hc(&p_base.with_omega(omega)?, 2, settings.eta, settings.tol, settings.h_max)?;
            Ok(CriticalH { h_c, censored: false, probes: 0 })
        }
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(HcCurve {
        omegas: omegas.to_vec(),
        hc_values: results.iter().map(|r| r.h_c).collect(),
        censored: results.iter().map(|r| r.censored).collect(),
        method,
        settings: *settings,
    })
}

/// Exact and second-order effective critical shifts side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveComparison {
    pub omegas: Vec<f64>,
    pub hc_exact: Vec<f64>,
    pub hc_effective: Vec<f64>,
}

pub fn compare_effective(
    p_base: &ModelParams,
    omegas: &[f64],
    settings: &SearchSettings,
    workers: Workers,
) -> Result<EffectiveComparison> {
    let exact = hc_curve(p_base, omegas, HcMethod::ExactPropagator, settings, workers)?;
    let effective = hc_curve(p_base, omegas, HcMethod::EffectiveOrder2, settings, workers)?;
    Ok(EffectiveComparison { omegas: omegas.to_vec(), hc_exact: exact.hc_values, hc_effective: effective.hc_values })
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns the midpoint of the final bracket and every evaluation made.
pub fn golden_section_max(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, Vec<(f64, f64)>)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut evals = vec![(c, fc), (d, fd)];
    while b - a > tol {
        if fc >= fd {
            b = d;
            (d, fd) = (c, fc);
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
            evals.push((c, fc));
        } else {
            a = c;
            (c, fc) = (d, fd);
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
            evals.push((d, fd));
        }
    }
    Ok((0.5 * (a + b), evals))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaMSettings {
    pub bracket: (f64, f64),
    pub coarse_n: usize,
    /// Resolution of the golden-section refinement in `omega`.
    pub omega_tol: f64,
}

impl OmegaMSettings {
    /// Default bracket `[2.2 J, 5.0 J]`.
    pub fn for_hopping(hopping: f64) -> Self {
        Self { bracket: (2.2 * hopping, 5.0 * hopping), coarse_n: 15, omega_tol: 0.01 * hopping }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaM {
    pub omega_m: f64,
    pub hc_max: f64,
    /// Every `(omega, h_c)` evaluated, coarse scan first.
    pub evaluations: Vec<(f64, f64)>,
}

/// Frequency `omega_m` at which `h_{c,omega}` peaks: coarse scan, then
/// golden-section refinement between the neighbours of the coarse maximum.
pub fn omega_m_search(
    p_base: &ModelParams,
    search: &OmegaMSettings,
    settings: &SearchSettings,
    workers: Workers,
) -> Result<OmegaM> {
    let (lo, hi) = search.bracket;
    if search.coarse_n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: search.coarse_n });
    }
    if !(lo > 0.0 && hi > lo && search.omega_tol > 0.0) {
        return Err(Error::InvalidParams(format!("invalid omega_m search settings {search:?}")));
    }
    let coarse = linspace(lo, hi, search.coarse_n);
    let hcs = par_map_ordered(workers, &coarse, |&w| critical_h(p_base, w, settings).map(|c| c.h_c))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    // first maximum wins ties, so the result does not depend on scheduling
    let best = hcs.iter().enumerate().fold(0, |best, (i, &v)| if v > hcs[best] { i } else { best });
    if best == 0 || best == coarse.len() - 1 {
        return Err(Error::NoInteriorMaximum { at: coarse[best], lo, hi });
    }
    let (omega_m, refined) =
        golden_section_max(|w| Ok(critical_h(p_base, w, settings)?.h_c), coarse[best - 1], coarse[best + 1], search.omega_tol)?;
    let mut evaluations: Vec<(f64, f64)> = coarse.into_iter().zip(hcs).collect();
    evaluations.extend(refined);
    let hc_max = evaluations.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(OmegaM { omega_m, hc_max, evaluations })
}

/// Least-squares slope of `y = k x` and the RMS residual.
pub fn fit_slope_through_origin(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
    }
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParams("slope fit needs a nonzero abscissa".into()));
    }
    let slope = xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>() / sxx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x).powi(2)).sum();
    Ok((slope, (rss / xs.len() as f64).sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaFit {
    pub kappa: f64,
    pub fit_residual: f64,
    pub hoppings: Vec<f64>,
    pub peaks: Vec<OmegaM>,
}

/// Slope `kappa` of `omega_m = kappa J`. Each search uses the bracket from
/// [`OmegaMSettings::for_hopping`] with `coarse_n` points.
pub fn kappa_fit(
    hoppings: &[f64],
    p_base: &ModelParams,
    coarse_n: usize,
    settings: &SearchSettings,
    workers: Workers,
) -> Result<KappaFit> {
    if hoppings.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: hoppings.len() });
    }
    let mut peaks = Vec::with_capacity(hoppings.len());
    for &j in hoppings {
        let search = OmegaMSettings { coarse_n, ..OmegaMSettings::for_hopping(j) };
        peaks.push(omega_m_search(&p_base.with_hopping(j)?, &search, settings, workers)?);
    }
    let omegas: Vec<f64> = peaks.iter().map(|p| p.omega_m).collect();
    let (kappa, fit_residual) = fit_slope_through_origin(hoppings, &omegas)?;
    Ok(KappaFit { kappa, fit_residual, hoppings: hoppings.to_vec(), peaks })
}

/// Bisection for the boundary of a boolean indicator that is true at `lo`
/// and false at `hi`; returns the midpoint of the final bracket.
pub fn bisect_indicator(mut indicator: impl FnMut(f64) -> Result<bool>, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let at_lo = indicator(lo)?;
    let at_hi = indicator(hi)?;
    if at_lo == at_hi || !at_lo {
        return Err(Error::ConstantIndicator { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if indicator(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaC {
    pub omega_c: f64,
    pub h_floor: f64,
}

/// Largest `omega` in the bracket with `h_{c,omega} < h_floor`.
///
/// Under the monotone-onset assumption `h_{c,omega} < h_floor` is the same
/// as the spectrum already being complex at `h = h_floor`, so each probe is
/// a single eigenvalue solve.
pub fn omega_c_search(
    p_base: &ModelParams,
    h_floor: f64,
    bracket: (f64, f64),
    tol: f64,
    eta: f64,
) -> Result<OmegaC> {
    require_hopping(p_base)?;
    let base = p_base.with_h(h_floor)?;
    let j = base.hopping();
    let omega_c = bisect_indicator(
        |omega| Ok(exact_max_imag(&base.with_omega(omega)?)? / j > eta),
        bracket.0,
        bracket.1,
        tol,
    )?;
    Ok(OmegaC { omega_c, h_floor })
}

/// Spectrum classification of the exact propagator from eigenvalues only.
pub fn exact_classification(p: &ModelParams, eta: f64) -> Result<crate::spectral::SpectrumClass> {
    let eps = quasi_energy_values(&one_period(p)?, p.omega())?;
    Ok(classify_quasi_energies(&eps, eta))
}
