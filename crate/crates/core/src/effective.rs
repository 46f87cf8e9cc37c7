//! Effective Hamiltonians from the Baker-Campbell-Hausdorff expansion of
//! `U(T) = exp(-i H_B T/2) exp(-i H_A T/2)`, truncated at first or second
//! order in `T`.
//!
//! `H_F1 = (H_A + H_B) / 2`, and `H_F2 = -(i pi / 4 omega) [H_B, H_A]`,
//! whose only nonzero entries sit on the (periodic) nearest-neighbour bonds.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::model::{build_hopping, build_potential, potential_values, ModelParams};
use crate::phase::{bisect_onset, Onset};
use crate::spectral::{certified_eigenvalues, max_abs_imag};

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub order: u8,
    pub matrix: ComplexMatrix,
    pub params: ModelParams,
}

pub fn build_hf1(p: &ModelParams) -> EffectiveHamiltonian {
    let sum = &build_hopping(p) + &build_potential(p);
    EffectiveHamiltonian { order: 1, matrix: sum.scale(Complex64::new(0.5, 0.0)), params: p.clone() }
}

/// Second-order correction alone:
/// `(n, n+1) -> +i pi J (V_{n+1} - V_n) / (4 omega)` and the negated value at
/// `(n+1, n)`, including the wrap bond `(L-1, 0)`.
pub fn build_hf2(p: &ModelParams) -> ComplexMatrix {
    let l = p.sites();
    let v = potential_values(p);
    let coupling = Complex64::new(0.0, std::f64::consts::PI * p.hopping() / (4.0 * p.omega()));
    let mut m = ComplexMatrix::zeros(l);
    for n in 0..l {
        let next = (n + 1) % l;
        let entry = coupling * (v[next] - v[n]);
        m[(n, next)] += entry;
        m[(next, n)] -= entry;
    }
    m
}

/// `H_F1` for order 1, `H_F1 + H_F2` for order 2.
pub fn effective_hamiltonian(p: &ModelParams, order: u8) -> Result<EffectiveHamiltonian> {
    match order {
        1 => Ok(build_hf1(p)),
        2 => {
            let hf1 = build_hf1(p);
            Ok(EffectiveHamiltonian { order: 2, matrix: &hf1.matrix + &build_hf2(p), params: p.clone() })
        }
        _ => Err(Error::InvalidParams(format!("effective order must be 1 or 2, got {order}"))),
    }
}

impl EffectiveHamiltonian {
    /// `exp(-i H T)`, the one-period propagator this truncation predicts.
    pub fn propagator(&self) -> ComplexMatrix {
        self.matrix.scale(Complex64::new(0.0, -self.params.period())).expm()
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        certified_eigenvalues(&self.matrix)
    }
}

/// High-frequency critical shift `ln(2J / V)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HcInfinity {
    pub value: f64,
    /// `2J < V`: the static model has no extended phase and the transition
    /// sits at `h = 0`.
    pub no_extended_phase: bool,
}

pub fn hc_infinity(hopping: f64, strength: f64) -> Result<HcInfinity> {
    if !(hopping > 0.0 && strength > 0.0) {
        return Err(Error::InvalidParams(format!("J and V must be positive, got J={hopping}, V={strength}")));
    }
    let ratio = 2.0 * hopping / strength;
    if ratio < 1.0 {
        Ok(HcInfinity { value: 0.0, no_extended_phase: true })
    } else {
        Ok(HcInfinity { value: ratio.ln(), no_extended_phase: false })
    }
}

/// Largest `|Im E|` of the truncated effective Hamiltonian at `p`.
pub fn effective_max_imag(p: &ModelParams, order: u8) -> Result<f64> {
    let energies = effective_hamiltonian(p, order)?.eigenvalues()?;
    Ok(max_abs_imag(&energies))
}

/// Critical `h` of the effective Hamiltonian by bisection of
/// `max |Im E| - eta` over `[0, h_max]`.
pub fn effective_hc(p: &ModelParams, order: u8, eta: f64, tol: f64, h_max: f64) -> Result<f64> {
    effective_hamiltonian(p, order)?;
    let probe = |h: f64| effective_max_imag(&p.with_h(h)?, order);
    match bisect_onset(probe, eta, tol, h_max)? {
        Onset::Crossing { h_c, .. } => Ok(h_c),
        Onset::AlreadyComplex | Onset::Censored => Err(Error::NoTransition { lo: 0.0, hi: h_max }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::one_period;

    fn params(sites: usize) -> ModelParams {
        ModelParams::new(sites).unwrap()
    }

    #[test]
    fn hf1_examples() {
        let p = params(13).with_hopping(0.0).unwrap().with_strength(0.0).unwrap();
        assert_eq!(build_hf1(&p).matrix, ComplexMatrix::zeros(13));

        let p = params(13).with_hopping(0.8).unwrap().with_h(0.4).unwrap();
        let h = build_hf1(&p).matrix;
        let v = potential_values(&p);
        for n in 0..13 {
            assert!((h[(n, (n + 1) % 13)] - Complex64::new(0.4, 0.0)).norm() < 1e-15);
            assert!((h[(n, n)] - v[n] / 2.0).norm() < 1e-15);
        }
        assert!(build_hf1(&p.with_h(0.0).unwrap()).matrix.is_hermitian(1e-15));
    }

    #[test]
    fn hf2_examples() {
        let p = params(21).with_strength(0.0).unwrap();
        assert_eq!(build_hf2(&p), ComplexMatrix::zeros(21));

        let p = params(21).with_h(0.6).unwrap().with_theta(0.2).unwrap().with_omega(4.0).unwrap();
        let a = build_hf2(&p);
        let b = build_hf2(&p.with_omega(8.0).unwrap());
        assert!(a.scale(Complex64::new(0.5, 0.0)).max_abs_diff(&b) < 1e-15);
        assert!((a.max_abs() * 4.0 - b.max_abs() * 8.0).abs() < 1e-14);
    }

    #[test]
    fn hf2_entry_formula_with_wrap_bond() {
        let p = params(13).with_h(0.9).unwrap().with_omega(3.0).unwrap();
        let m = build_hf2(&p);
        let v = potential_values(&p);
        let k = Complex64::new(0.0, std::f64::consts::PI / 12.0);
        assert!((m[(12, 0)] - k * (v[0] - v[12])).norm() < 1e-15);
        assert!((m[(0, 12)] + k * (v[0] - v[12])).norm() < 1e-15);
        assert!((m[(4, 5)] - k * (v[5] - v[4])).norm() < 1e-15);
        assert_eq!(m[(3, 7)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn hf2_equals_commutator() {
        let p = params(21).with_h(0.7).unwrap().with_omega(5.0).unwrap();
        let a = build_hopping(&p);
        let b = build_potential(&p);
        let comm = &b.matmul(&a) - &a.matmul(&b);
        let expected = comm.scale(Complex64::new(0.0, -std::f64::consts::PI / (4.0 * p.omega())));
        assert!(build_hf2(&p).max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn hf2_is_hermitian_for_real_potential() {
        let p = params(34).with_omega(3.0).unwrap();
        assert!(build_hf2(&p).is_hermitian(1e-15));
    }

    #[test]
    fn hc_infinity_examples() {
        assert!((hc_infinity(1.0, 1.0).unwrap().value - 2f64.ln()).abs() < 1e-15);
        assert_eq!(hc_infinity(1.0, 2.0).unwrap(), HcInfinity { value: 0.0, no_extended_phase: false });
        assert!((hc_infinity(2.0, 1.0).unwrap().value - 4f64.ln()).abs() < 1e-15);
        assert_eq!(hc_infinity(0.4, 1.0).unwrap(), HcInfinity { value: 0.0, no_extended_phase: true });
        assert!(hc_infinity(0.0, 1.0).is_err());
    }

    #[test]
    fn invalid_order() {
        assert!(effective_hamiltonian(&params(13), 3).is_err());
    }

    #[test]
    fn bch_truncation_is_third_order() {
        let p = params(34).with_h(0.3).unwrap();
        let defect = |omega: f64| {
            let q = p.with_omega(omega).unwrap();
            let exact = one_period(&q).unwrap();
            effective_hamiltonian(&q, 2).unwrap().propagator().max_abs_diff(&exact)
        };
        let ratio = defect(20.0) / defect(40.0);
        assert!((6.0..=10.0).contains(&ratio), "ratio {ratio}");
    }
}
