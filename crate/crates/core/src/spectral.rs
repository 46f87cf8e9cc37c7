//! Eigendecomposition of the (generally non-unitary) Floquet propagator and
//! quasi-energy extraction.
//!
//! Quasi-energies are `eps = i ln(mu) / T` on the principal branch, so
//! `eps.re = -arg(mu)/T` lies in `(-omega/2, omega/2]` and
//! `eps.im = ln|mu|/T` is positive for growing modes.
//!
//! Every eigenpair returned by [`eigendecompose`] carries a residual
//! `||U v - mu v||_2` and is rejected if it exceeds
//! `1e-8 * max|U_ij| * sqrt(L)`, whatever backend produced it.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::propagator::l2_norm;

/// Default `|eps.im|` threshold separating real from complex quasi-energies.
pub const DEFAULT_ETA: f64 = 1e-6;

/// Relative residual bound for an accepted eigenpair.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Components below this fraction of the largest one are skipped when
/// fixing the eigenvector phase.
const GAUGE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetMode {
    /// Eigenvalue `mu` of `U(T)`.
    pub eigenvalue: Complex64,
    pub quasi_energy: Complex64,
    /// Right eigenvector with unit 2-norm, first significant component real positive.
    pub vector: Vec<Complex64>,
    pub residual: f64,
}

/// Full spectrum of a one-period propagator, sorted by `eps.re` then `eps.im`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiSpectrum {
    omega: f64,
    modes: Vec<FloquetMode>,
}

impl QuasiSpectrum {
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn branch_halfwidth(&self) -> f64 {
        self.omega / 2.0
    }

    pub fn modes(&self) -> &[FloquetMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.modes.iter().map(|m| m.eigenvalue).collect()
    }

    pub fn quasi_energies(&self) -> Vec<Complex64> {
        self.modes.iter().map(|m| m.quasi_energy).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.modes.iter().map(|m| m.residual).fold(0.0, f64::max)
    }
}

fn by_quasi_energy(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Quasi-energy of a single eigenvalue.
pub fn quasi_energy(mu: Complex64, omega: f64) -> Option<Complex64> {
    if mu.norm() == 0.0 || !mu.is_finite() {
        return None;
    }
    let period = TAU / omega;
    let mut re = -mu.arg() / period;
    // arg(mu) = pi maps to -omega/2; the zone is (-omega/2, omega/2]
    if re <= -omega / 2.0 {
        re = omega / 2.0;
    }
    Some(Complex64::new(re, mu.norm().ln() / period))
}

/// Quasi-energies `i ln(mu) / T` for each eigenvalue, in input order.
pub fn quasi_energies(mu: &[Complex64], omega: f64) -> Result<Vec<Complex64>> {
    mu.iter()
        .enumerate()
        .map(|(index, &m)| quasi_energy(m, omega).ok_or(Error::SingularPropagator { index }))
        .collect()
}

fn residual_bound(u: &ComplexMatrix) -> f64 {
    RESIDUAL_TOLERANCE * u.max_abs() * (u.dim() as f64).sqrt()
}

fn check_finite(u: &ComplexMatrix) -> Result<()> {
    if u.entries().iter().all(|z| z.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParams("matrix has non-finite entries".into()))
    }
}

fn fix_gauge(v: &mut [Complex64]) {
    let norm = l2_norm(v);
    if norm == 0.0 {
        return;
    }
    let biggest = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(first) = v.iter().find(|z| z.norm() > GAUGE_FLOOR * biggest) {
        let phase = first.conj() / first.norm();
        let s = phase / norm;
        v.iter_mut().for_each(|z| *z *= s);
    }
}

/// Full right eigendecomposition of `u`, with quasi-energies for drive
/// frequency `omega`.
pub fn eigendecompose(u: &ComplexMatrix, omega: f64) -> Result<QuasiSpectrum> {
    check_finite(u)?;
    let n = u.dim();
    let evd = u.to_faer().eigen().map_err(|_| Error::NoConvergence { unresolved: n, dim: n })?;
    let values = evd.S().column_vector();
    let vectors = evd.U();
    let bound = residual_bound(u);

    let mut modes = Vec::with_capacity(n);
    for j in 0..n {
        let mu = values[j];
        let quasi = quasi_energy(mu, omega).ok_or(Error::SingularPropagator { index: j })?;
        let mut v: Vec<Complex64> = (0..n).map(|i| vectors[(i, j)]).collect();
        fix_gauge(&mut v);
        let uv = u.matvec(&v);
        let residual = uv.iter().zip(&v).map(|(a, b)| (a - mu * b).norm_sqr()).sum::<f64>().sqrt();
        if !(residual <= bound) {
            return Err(Error::UnverifiedEigenpair { index: j, residual, bound });
        }
        modes.push(FloquetMode { eigenvalue: mu, quasi_energy: quasi, vector: v, residual });
    }
    modes.sort_by(|a, b| by_quasi_energy(&a.quasi_energy, &b.quasi_energy));
    Ok(QuasiSpectrum { omega, modes })
}

/// Eigenvalues only, checked against the trace, converted to sorted
/// quasi-energies.
///
/// Cheaper than [`eigendecompose`]; used by bisection searches that only
/// need `max |eps.im|`.
pub fn quasi_energy_values(u: &ComplexMatrix, omega: f64) -> Result<Vec<Complex64>> {
    let mu = certified_eigenvalues(u)?;
    let mut eps = quasi_energies(&mu, omega)?;
    eps.sort_by(by_quasi_energy);
    Ok(eps)
}

/// Eigenvalues of a general complex matrix, certified by
/// `|sum mu - tr U| <= 1e-8 * max|U_ij| * L`.
pub fn certified_eigenvalues(u: &ComplexMatrix) -> Result<Vec<Complex64>> {
    check_finite(u)?;
    let n = u.dim();
    let mu = u.to_faer().eigenvalues().map_err(|_| Error::NoConvergence { unresolved: n, dim: n })?;
    let sum: Complex64 = mu.iter().sum();
    let mismatch = (sum - u.trace()).norm();
    let bound = RESIDUAL_TOLERANCE * u.max_abs() * n as f64;
    if !(mismatch <= bound) {
        return Err(Error::UnverifiedEigenvalues { mismatch, bound });
    }
    Ok(mu)
}

pub fn max_abs_imag(eps: &[Complex64]) -> f64 {
    eps.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumLabel {
    Real,
    Complex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumClass {
    pub label: SpectrumLabel,
    pub max_abs_imag: f64,
    pub complex_fraction: f64,
    /// `|eps.im| >= eta`, one flag per mode in spectrum order.
    pub complex_modes: Vec<bool>,
}

/// Labels a set of quasi-energies `Real` iff every `|eps.im| < eta`.
pub fn classify_quasi_energies(eps: &[Complex64], eta: f64) -> SpectrumClass {
    assert!(eta > 0.0, "eta must be positive");
    let complex_modes: Vec<bool> = eps.iter().map(|z| z.im.abs() >= eta).collect();
    let count = complex_modes.iter().filter(|&&c| c).count();
    let max_abs_imag = max_abs_imag(eps);
    SpectrumClass {
        label: if max_abs_imag < eta { SpectrumLabel::Real } else { SpectrumLabel::Complex },
        max_abs_imag,
        complex_fraction: if eps.is_empty() { 0.0 } else { count as f64 / eps.len() as f64 },
        complex_modes,
    }
}

pub fn classify_spectrum(spec: &QuasiSpectrum, eta: f64) -> SpectrumClass {
    classify_quasi_energies(&spec.quasi_energies(), eta)
}
