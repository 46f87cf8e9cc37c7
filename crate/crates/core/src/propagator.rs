//! Half-step exponentials, the one-period Floquet propagator, and
//! stroboscopic evolution of states.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::model::{potential_values, ModelParams};

/// Largest `|Im V_n| * tau` accepted by [`step_potential_exponential`].
pub const MAX_GROWTH_EXPONENT: f64 = 700.0;

const NORM_TOLERANCE: f64 = 1e-10;

/// A state on the lattice together with the log of the normalization that
/// has been divided out of it.
///
/// The raw (never renormalized) state is `exp(log_norm) * amplitudes`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    log_norm: f64,
}

impl StateVector {
    /// Wraps amplitudes that must already satisfy `sum |psi_i|^2 = 1`.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_normalized(&amplitudes)?;
        Ok(Self { amplitudes, log_norm: 0.0 })
    }

    /// Normalizes arbitrary nonzero amplitudes, recording the removed norm
    /// in `log_norm`.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = l2_norm(&amplitudes);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized { norm_sq: norm * norm });
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Ok(Self { amplitudes, log_norm: norm.ln() })
    }

    /// Localized at a single site.
    pub fn site(sites: usize, index: usize) -> Result<Self> {
        if index >= sites {
            return Err(Error::IndexOutOfRange { index, len: sites });
        }
        let mut a = vec![Complex64::new(0.0, 0.0); sites];
        a[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes: a, log_norm: 0.0 })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn check_normalized(v: &[Complex64]) -> Result<()> {
    let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sq - 1.0).abs() > NORM_TOLERANCE || !norm_sq.is_finite() {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(())
}

/// `exp(-i H_A tau)` in closed form.
///
/// `H_A` is circulant with plane-wave eigenvectors and band `2J cos(2 pi k / L)`,
/// so the exponential is circulant too:
/// `E[n][m] = c[(n - m) mod L]`, `c[d] = (1/L) sum_k exp(-i 2J cos(2 pi k/L) tau) exp(i 2 pi k d / L)`.
pub fn step_hopping_exponential(p: &ModelParams, tau: f64) -> Result<ComplexMatrix> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParams(format!("tau must be non-negative, got {tau}")));
    }
    let l = p.sites();
    // unit roots indexed exactly by (k * d) mod L
    let roots: Vec<Complex64> = (0..l).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / l as f64)).collect();
    let band: Vec<Complex64> = (0..l)
        .map(|k| {
            let e = 2.0 * p.hopping() * roots[k].re;
            Complex64::from_polar(1.0, -e * tau)
        })
        .collect();
    let scale = 1.0 / l as f64;
    let first_col: Vec<Complex64> = (0..l)
        .map(|d| {
            let s: Complex64 = band.iter().enumerate().map(|(k, b)| b * roots[(k * d) % l]).sum();
            s * scale
        })
        .collect();
    Ok(ComplexMatrix::from_fn(l, |n, m| first_col[(n + l - m) % l]))
}

/// Diagonal entries `exp(-i V_n tau)` of the potential half-step.
pub fn step_potential_diagonal(p: &ModelParams, tau: f64) -> Result<Vec<Complex64>> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParams(format!("tau must be non-negative, got {tau}")));
    }
    let v = potential_values(p);
    let growth = v.iter().map(|z| z.im.abs()).fold(0.0, f64::max) * tau;
    if growth > MAX_GROWTH_EXPONENT {
        return Err(Error::StepOverflow { exponent: growth });
    }
    Ok(v.iter().map(|z| (Complex64::new(0.0, -tau) * z).exp()).collect())
}

/// `exp(-i H_B tau)`.
pub fn step_potential_exponential(p: &ModelParams, tau: f64) -> Result<ComplexMatrix> {
    Ok(ComplexMatrix::from_diagonal(&step_potential_diagonal(p, tau)?))
}

/// One-period propagator `U(T) = exp(-i H_B T/2) exp(-i H_A T/2)`.
///
/// `H_A` acts during the first half period, so its factor is on the right.
pub fn one_period(p: &ModelParams) -> Result<ComplexMatrix> {
    let half = p.period() / 2.0;
    let hop = step_hopping_exponential(p, half)?;
    let pot = step_potential_diagonal(p, half)?;
    Ok(hop.scale_rows(&pot))
}

/// State after `period` drive periods.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub period: usize,
    pub state: StateVector,
}

/// Applies `U(T)` `periods` times, renormalizing after each period.
///
/// Snapshots are taken at period 0, every `record_every` periods, and at the
/// final period.
pub fn evolve_state(
    psi0: &StateVector,
    propagator: &ComplexMatrix,
    periods: usize,
    record_every: usize,
) -> Result<Vec<Snapshot>> {
    check_normalized(psi0.amplitudes())?;
    if propagator.dim() != psi0.len() {
        return Err(Error::DimensionMismatch { expected: propagator.dim(), got: psi0.len() });
    }
    if record_every == 0 {
        return Err(Error::InvalidParams("record_every must be at least 1".into()));
    }
    let mut out = vec![Snapshot { period: 0, state: psi0.clone() }];
    let mut current = psi0.amplitudes.clone();
    let mut next = vec![Complex64::new(0.0, 0.0); current.len()];
    let mut log_norm = psi0.log_norm;
    for m in 1..=periods {
        propagator.matvec_into(&current, &mut next);
        let norm = l2_norm(&next);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized { norm_sq: norm * norm });
        }
        next.iter_mut().for_each(|z| *z /= norm);
        log_norm += norm.ln();
        std::mem::swap(&mut current, &mut next);
        if m % record_every == 0 || m == periods {
            out.push(Snapshot {
                period: m,
                state: StateVector { amplitudes: current.clone(), log_norm },
            });
        }
    }
    Ok(out)
}

/// Builds `U(T)` for `p` and evolves `psi0` under it.
pub fn evolve(psi0: &StateVector, p: &ModelParams, periods: usize, record_every: usize) -> Result<Vec<Snapshot>> {
    evolve_state(psi0, &one_period(p)?, periods, record_every)
}
