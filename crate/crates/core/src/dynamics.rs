//! Loschmidt-echo quenches: prepare an eigenstate of one drive, evolve it
//! stroboscopically under another, and record
//! `L(t) = |<psi0|psi(t)>|^2 / (<psi(t)|psi(t)> <psi0|psi0>)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::observables::{ipr, TIE_TOLERANCE};
use crate::propagator::{evolve_state, one_period, StateVector};
use crate::spectral::{eigendecompose, QuasiSpectrum};

/// Default number of drive periods per quench.
pub const DEFAULT_PERIODS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialSelector {
    /// Smallest `eps.re`.
    MinRealQuasiEnergy,
    /// `argmin |eps.re - target|`; with `prefer_localized`, ties go to the
    /// larger IPR.
    NearestRealQuasiEnergy { target: f64, prefer_localized: bool },
    MaxIpr,
    /// Position in the sorted spectrum.
    Index(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuenchSpec {
    /// Drive whose eigenstate is the initial state.
    pub pre: ModelParams,
    /// Drive used for the evolution.
    pub post: ModelParams,
    pub selector: InitialSelector,
    pub periods: usize,
    pub record_every: usize,
}

impl QuenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.pre.sites() != self.post.sites() {
            return Err(Error::DimensionMismatch { expected: self.pre.sites(), got: self.post.sites() });
        }
        if self.periods == 0 || self.record_every == 0 {
            return Err(Error::InvalidParams("periods and record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// The selected right eigenvector, normalized, with its mode index.
pub fn select_initial_state(spec: &QuasiSpectrum, selector: InitialSelector) -> Result<(usize, StateVector)> {
    if spec.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let modes = spec.modes();
    let index = match selector {
        InitialSelector::Index(i) => {
            if i >= modes.len() {
                return Err(Error::IndexOutOfRange { index: i, len: modes.len() });
            }
            i
        }
        InitialSelector::MinRealQuasiEnergy => {
            (0..modes.len()).fold(0, |best, i| {
                if modes[i].quasi_energy.re < modes[best].quasi_energy.re { i } else { best }
            })
        }
        InitialSelector::MaxIpr => {
            let iprs = modes.iter().map(|m| ipr(&m.vector)).collect::<Result<Vec<f64>>>()?;
            (0..iprs.len()).fold(0, |best, i| if iprs[i] > iprs[best] { i } else { best })
        }
        InitialSelector::NearestRealQuasiEnergy { target, prefer_localized } => {
            let dist: Vec<f64> = modes.iter().map(|m| (m.quasi_energy.re - target).abs()).collect();
            let nearest = dist.iter().copied().fold(f64::INFINITY, f64::min);
            let tied: Vec<usize> = (0..modes.len()).filter(|&i| dist[i] - nearest <= TIE_TOLERANCE).collect();
            if prefer_localized {
                let iprs = tied.iter().map(|&i| ipr(&modes[i].vector)).collect::<Result<Vec<f64>>>()?;
                let k = (0..tied.len()).fold(0, |best, k| if iprs[k] > iprs[best] { k } else { best });
                tied[k]
            } else {
                tied[0]
            }
        }
    };
    Ok((index, StateVector::new(modes[index].vector.clone())?))
}

fn overlap(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sq(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Normalized echo between two (not necessarily normalized) states, clamped
/// to `[0, 1]` against rounding.
pub fn echo_value(initial: &[Complex64], evolved: &[Complex64]) -> f64 {
    let value = overlap(initial, evolved).norm_sqr() / (norm_sq(initial) * norm_sq(evolved));
    value.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoPoint {
    pub period: usize,
    pub time: f64,
    pub echo: f64,
    /// Accumulated log of the norm removed by renormalization.
    pub log_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoSeries {
    pub initial_index: usize,
    pub initial_quasi_energy: Complex64,
    pub initial_ipr: f64,
    pub points: Vec<EchoPoint>,
}

impl EchoSeries {
    pub fn final_echo(&self) -> f64 {
        self.points.last().map_or(1.0, |p| p.echo)
    }

    /// Mean echo over the recorded points after `t = 0`.
    pub fn time_average(&self) -> f64 {
        let tail = &self.points[1.min(self.points.len())..];
        if tail.is_empty() {
            return 1.0;
        }
        tail.iter().map(|p| p.echo).sum::<f64>() / tail.len() as f64
    }
}

/// Stroboscopic Loschmidt echo at `t = m T` of the post-quench drive.
pub fn loschmidt_echo(q: &QuenchSpec) -> Result<EchoSeries> {
    q.validate()?;
    let pre_spec = eigendecompose(&one_period(&q.pre)?, q.pre.omega())?;
    let (index, psi0) = select_initial_state(&pre_spec, q.selector)?;
    let mode = &pre_spec.modes()[index];
    let post_u = one_period(&q.post)?;
    let period = q.post.period();
    let snapshots = evolve_state(&psi0, &post_u, q.periods, q.record_every)?;
    let points = snapshots
        .iter()
        .map(|s| EchoPoint {
            period: s.period,
            time: s.period as f64 * period,
            echo: if s.period == 0 { 1.0 } else { echo_value(psi0.amplitudes(), s.state.amplitudes()) },
            log_norm: s.state.log_norm(),
        })
        .collect();
    Ok(EchoSeries {
        initial_index: index,
        initial_quasi_energy: mode.quasi_energy,
        initial_ipr: ipr(psi0.amplitudes())?,
        points,
    })
}
