//! Lattice parameters, the complex quasi-periodic potential, and the two
//! Hamiltonians of the two-step drive.
//!
//! The drive alternates between uniform hopping `H_A` (first half period)
//! and the on-site potential `H_B` (second half period), on a ring of
//! `sites` sites with periodic boundary conditions.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Inverse golden ratio `(sqrt(5) - 1) / 2`.
pub const INVERSE_GOLDEN_RATIO: f64 = 0.618_033_988_749_894_9;

/// Incommensurate ratio of the potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    /// Exact rational `p/q` in lowest terms. The potential is then
    /// `q`-periodic, so `q` must equal the lattice length.
    Rational { p: u64, q: u64 },
    /// A floating-point ratio; the ring has a seam at the wrap bond.
    Irrational(f64),
}

impl Alpha {
    pub fn rational(p: u64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParams("alpha denominator must be positive".into()));
        }
        let g = gcd(p, q);
        Ok(Alpha::Rational { p: p / g, q: q / g })
    }

    pub fn value(&self) -> f64 {
        match *self {
            Alpha::Rational { p, q } => p as f64 / q as f64,
            Alpha::Irrational(a) => a,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Alpha::Rational { .. })
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Rational { p, q } => write!(f, "{p}/{q}"),
            Alpha::Irrational(a) => write!(f, "{a}"),
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    /// Parses `"p/q"` as a rational and anything else as a decimal.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParams(format!("cannot parse alpha from {s:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p = p.trim().parse::<u64>().map_err(|_| bad())?;
            let q = q.trim().parse::<u64>().map_err(|_| bad())?;
            Alpha::rational(p, q)
        } else {
            let a = s.parse::<f64>().map_err(|_| bad())?;
            if !a.is_finite() {
                return Err(bad());
            }
            Ok(Alpha::Irrational(a))
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Fibonacci numbers `F_1 = F_2 = 1, F_3 = 2, ...` up to (and one past) `limit`.
fn fibonacci_up_to(limit: usize) -> Vec<usize> {
    let mut fib = vec![1usize, 1];
    while *fib.last().unwrap() <= limit {
        let n = fib.len();
        fib.push(fib[n - 1] + fib[n - 2]);
    }
    fib
}

/// Rational approximant `F_{m-1}/F_m` of the inverse golden ratio for a
/// lattice of `sites = F_m` sites (`m >= 3`).
pub fn fibonacci_approximant(sites: usize) -> Result<Alpha> {
    let fib = fibonacci_up_to(sites);
    if sites >= 2 {
        if let Some(m) = fib.iter().position(|&f| f == sites) {
            return Alpha::rational(fib[m - 1] as u64, sites as u64);
        }
    }
    let above = *fib.iter().find(|&&f| f > sites).unwrap();
    let below = fib.iter().rev().find(|&&f| f < sites).copied().unwrap_or(1);
    Err(Error::NotFibonacci { sites, below, above })
}

/// Continued-fraction convergents `p/q` of `x` with `q <= max_den`.
///
/// Used to build ring-compatible approximants of ratios other than the
/// golden one (pair each `q` with a lattice of `q` sites).
pub fn convergents(x: f64, max_den: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as u64;
        let p2 = ai * p1 + p0;
        let q2 = ai * q1 + q0;
        if q2 > max_den {
            break;
        }
        out.push((p2, q2));
        let frac = r - a;
        if frac < 1e-12 {
            break;
        }
        r = 1.0 / frac;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    out
}

/// All physical and numerical parameters of one simulation instance.
///
/// Constructed through [`ModelParams::new`] and the `with_*` methods, each
/// of which revalidates.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    sites: usize,
    hopping: f64,
    strength: f64,
    alpha: Alpha,
    theta: f64,
    h: f64,
    omega: f64,
}

impl ModelParams {
    /// Parameters with `J = V = 1`, `theta = h = 0`, `omega = 10` and the
    /// Fibonacci approximant for `sites`.
    pub fn new(sites: usize) -> Result<Self> {
        let alpha = fibonacci_approximant(sites)?;
        Self::from_parts(sites, 1.0, 1.0, alpha, 0.0, 0.0, 10.0)
    }

    pub fn from_parts(
        sites: usize,
        hopping: f64,
        strength: f64,
        alpha: Alpha,
        theta: f64,
        h: f64,
        omega: f64,
    ) -> Result<Self> {
        let p = Self { sites, hopping, strength, alpha, theta, h, omega };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.sites < 2 {
            return bad(format!("lattice needs at least 2 sites, got {}", self.sites));
        }
        for (name, x) in [("J", self.hopping), ("V", self.strength)] {
            if !(x.is_finite() && x >= 0.0) {
                return bad(format!("{name} must be non-negative and finite, got {x}"));
            }
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return bad(format!("omega must be positive and finite, got {}", self.omega));
        }
        if !self.theta.is_finite() {
            return bad(format!("theta must be finite, got {}", self.theta));
        }
        if !self.h.is_finite() || self.h < 0.0 {
            return bad(format!("h must be finite and non-negative, got {}", self.h));
        }
        match self.alpha {
            Alpha::Rational { q, .. } if q as usize != self.sites => bad(format!(
                "rational alpha {} needs a lattice of {q} sites, got {}",
                self.alpha, self.sites
            )),
            Alpha::Irrational(a) if !a.is_finite() => bad(format!("alpha must be finite, got {a}")),
            _ => Ok(()),
        }
    }

    pub fn with_sites(&self, sites: usize, alpha: Alpha) -> Result<Self> {
        Self::from_parts(sites, self.hopping, self.strength, alpha, self.theta, self.h, self.omega)
    }

    pub fn with_hopping(&self, hopping: f64) -> Result<Self> {
        Self::from_parts(self.sites, hopping, self.strength, self.alpha, self.theta, self.h, self.omega)
    }

    pub fn with_strength(&self, strength: f64) -> Result<Self> {
        Self::from_parts(self.sites, self.hopping, strength, self.alpha, self.theta, self.h, self.omega)
    }

    pub fn with_alpha(&self, alpha: Alpha) -> Result<Self> {
        Self::from_parts(self.sites, self.hopping, self.strength, alpha, self.theta, self.h, self.omega)
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::from_parts(self.sites, self.hopping, self.strength, self.alpha, theta, self.h, self.omega)
    }

    pub fn with_h(&self, h: f64) -> Result<Self> {
        Self::from_parts(self.sites, self.hopping, self.strength, self.alpha, self.theta, h, self.omega)
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::from_parts(self.sites, self.hopping, self.strength, self.alpha, self.theta, self.h, omega)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Tunneling amplitude `J`.
    pub fn hopping(&self) -> f64 {
        self.hopping
    }

    /// Potential strength `V`.
    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Imaginary phase shift `h`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Drive period `T = 2 pi / omega`.
    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    /// Real part of the potential phase at site `n`, `2 pi alpha n + theta`.
    ///
    /// For rational alpha the product `p n` is reduced modulo `q` in integer
    /// arithmetic, so the phase is exactly `L`-periodic in `n`.
    pub fn site_phase(&self, n: i64) -> f64 {
        match self.alpha {
            Alpha::Rational { p, q } => {
                let r = (p as i128 * n as i128).rem_euclid(q as i128);
                TAU * (r as f64 / q as f64) + self.theta
            }
            Alpha::Irrational(a) => TAU * a * n as f64 + self.theta,
        }
    }

    /// `V cos(x + i h)` without index or sign checks.
    fn potential_at(&self, n: i64, h: f64) -> Complex64 {
        let x = self.site_phase(n);
        Complex64::new(x.cos() * h.cosh(), -x.sin() * h.sinh()) * self.strength
    }
}

/// Complex on-site energy `V_n = V cos(2 pi alpha n + theta + i h)`.
pub fn onsite_potential(n: usize, p: &ModelParams) -> Result<Complex64> {
    if n >= p.sites {
        return Err(Error::IndexOutOfRange { index: n, len: p.sites });
    }
    Ok(p.potential_at(n as i64, p.h))
}

/// All on-site energies `V_0, ..., V_{L-1}`.
pub fn potential_values(p: &ModelParams) -> Vec<Complex64> {
    (0..p.sites as i64).map(|n| p.potential_at(n, p.h)).collect()
}

/// On-site energy with the sign of `h` flipped. `h < 0` is rejected by
/// [`ModelParams`]; this exists to check the conjugation symmetry
/// `V_n(theta, -h) = conj(V_n(theta, h))`.
pub fn mirrored_potential(n: usize, p: &ModelParams) -> Result<Complex64> {
    if n >= p.sites {
        return Err(Error::IndexOutOfRange { index: n, len: p.sites });
    }
    Ok(p.potential_at(n as i64, -p.h))
}

/// Uniform nearest-neighbour hopping on the ring.
///
/// For `L = 2` the bulk bond and the wrap bond connect the same pair of
/// sites and add up to `2J`.
pub fn build_hopping(p: &ModelParams) -> ComplexMatrix {
    let l = p.sites;
    let mut m = ComplexMatrix::zeros(l);
    let j = Complex64::new(p.hopping, 0.0);
    for n in 0..l {
        let next = (n + 1) % l;
        m[(n, next)] += j;
        m[(next, n)] += j;
    }
    m
}

pub fn build_potential(p: &ModelParams) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&potential_values(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden(sites: usize) -> ModelParams {
        ModelParams::new(sites).unwrap()
    }

    #[test]
    fn fibonacci_approximants() {
        assert_eq!(fibonacci_approximant(610).unwrap(), Alpha::Rational { p: 377, q: 610 });
        assert_eq!(fibonacci_approximant(1597).unwrap(), Alpha::Rational { p: 987, q: 1597 });
        assert_eq!(fibonacci_approximant(2).unwrap(), Alpha::Rational { p: 1, q: 2 });
        assert_eq!(
            fibonacci_approximant(100),
            Err(Error::NotFibonacci { sites: 100, below: 89, above: 144 })
        );
        assert!(fibonacci_approximant(1).is_err());
        assert!(fibonacci_approximant(0).is_err());
    }

    #[test]
    fn approximants_converge_to_golden_ratio() {
        let a = fibonacci_approximant(1597).unwrap().value();
        assert!((a - INVERSE_GOLDEN_RATIO).abs() < 1e-6);
    }

    #[test]
    fn convergents_of_inverse_sqrt3() {
        let c = convergents(3f64.sqrt() / 3.0, 1000);
        assert!(c.contains(&(209, 362)));
        assert!(c.contains(&(571, 989)));
        let c = convergents(INVERSE_GOLDEN_RATIO, 700);
        assert_eq!(*c.last().unwrap(), (377, 610));
    }

    #[test]
    fn alpha_parsing() {
        assert_eq!("377/610".parse::<Alpha>().unwrap(), Alpha::Rational { p: 377, q: 610 });
        assert_eq!("6/10".parse::<Alpha>().unwrap(), Alpha::Rational { p: 3, q: 5 });
        assert_eq!("0.5".parse::<Alpha>().unwrap(), Alpha::Irrational(0.5));
        assert!("x/3".parse::<Alpha>().is_err());
        assert!("1/0".parse::<Alpha>().is_err());
        assert!("inf".parse::<Alpha>().is_err());
    }

    #[test]
    fn validation() {
        let p = golden(89);
        assert!(p.with_h(-0.1).is_err());
        assert!(p.with_hopping(-0.5).is_err());
        assert!(p.with_hopping(0.0).is_ok());
        assert!(p.with_strength(-1.0).is_err());
        assert!(p.with_omega(0.0).is_err());
        assert!(p.with_alpha(Alpha::Rational { p: 89, q: 144 }).is_err());
        assert!(p.with_alpha(Alpha::Irrational(INVERSE_GOLDEN_RATIO)).is_ok());
        assert!(ModelParams::from_parts(1, 1.0, 1.0, Alpha::Irrational(0.3), 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn potential_values_examples() {
        let p = golden(89);
        assert_eq!(onsite_potential(0, &p).unwrap(), Complex64::new(1.0, 0.0));
        // cosh(0.5) from an independent high-precision evaluation
        let v = onsite_potential(0, &p.with_h(0.5).unwrap()).unwrap();
        assert!((v.re - 1.127_625_965_206_380_8).abs() < 1e-15);
        assert!(v.im.abs() < 1e-15);
        assert_eq!(
            onsite_potential(89, &p),
            Err(Error::IndexOutOfRange { index: 89, len: 89 })
        );
    }

    #[test]
    fn potential_is_complex_cosine() {
        let p = golden(21).with_theta(0.3).unwrap().with_h(0.7).unwrap();
        for n in 0..21 {
            let arg = Complex64::new(TAU * (13.0 * n as f64) / 21.0 + 0.3, 0.7);
            assert!((onsite_potential(n, &p).unwrap() - arg.cos()).norm() < 1e-12);
        }
    }

    #[test]
    fn potential_sums_to_zero_for_approximant() {
        for (theta, h) in [(0.0, 0.0), (0.4, 0.9), (2.0, 2.5)] {
            let p = golden(610).with_theta(theta).unwrap().with_h(h).unwrap();
            let s: Complex64 = potential_values(&p).into_iter().sum();
            assert!(s.norm() < 1e-10 * 610.0 * h.cosh(), "sum = {s}");
        }
    }

    #[test]
    fn potential_is_exactly_periodic() {
        let p = golden(144).with_theta(1.1).unwrap().with_h(0.8).unwrap();
        for n in -300..300 {
            assert_eq!(p.site_phase(n + 144), p.site_phase(n));
            assert_eq!(p.potential_at(n + 144, p.h()), p.potential_at(n, p.h()));
        }
    }

    #[test]
    fn conjugation_symmetry() {
        let p = golden(55).with_theta(0.37).unwrap().with_h(1.2).unwrap();
        for n in 0..55 {
            let a = onsite_potential(n, &p).unwrap();
            let b = mirrored_potential(n, &p).unwrap();
            assert!((a.conj() - b).norm() < 1e-14);
        }
    }

    #[test]
    fn hopping_matrices() {
        let m2 = build_hopping(&golden(2));
        assert_eq!(m2[(0, 1)], Complex64::new(2.0, 0.0));
        assert_eq!(m2[(1, 0)], Complex64::new(2.0, 0.0));
        assert_eq!(m2[(0, 0)], Complex64::new(0.0, 0.0));

        let p4 = ModelParams::from_parts(4, 1.0, 1.0, Alpha::Irrational(0.3), 0.0, 0.0, 1.0).unwrap();
        let m4 = build_hopping(&p4);
        let expected = [0.0, 1.0, 0.0, 1.0];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m4[(i, j)].re, expected[(j + 4 - i) % 4]);
                assert_eq!(m4[(i, j)].im, 0.0);
            }
        }
        let m = build_hopping(&golden(89).with_hopping(0.7).unwrap());
        assert_eq!(m, m.transpose());
    }

    #[test]
    fn hopping_spectrum_is_circulant() {
        let p = ModelParams::from_parts(6, 1.0, 1.0, Alpha::Irrational(0.3), 0.0, 0.0, 1.0).unwrap();
        let evd = build_hopping(&p).to_faer().self_adjoint_eigen(faer::Side::Lower).unwrap();
        let mut got: Vec<f64> = (0..6).map(|i| evd.S().column_vector()[i].re).collect();
        let mut want: Vec<f64> = (0..6).map(|k| 2.0 * (TAU * k as f64 / 6.0).cos()).collect();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn potential_matrices() {
        let p = golden(34);
        let b = build_potential(&p);
        assert!(b.is_diagonal());
        assert!(b.is_hermitian(0.0));
        assert!(b.trace().norm() < 1e-12);
        let b = build_potential(&p.with_h(0.9).unwrap());
        assert!(!b.is_hermitian(1e-6));
        assert!(b.trace().norm() < 1e-12 * 34.0);
    }

    #[test]
    fn zero_strength_gives_zero_potential() {
        let p = golden(13).with_strength(0.0).unwrap().with_h(0.7).unwrap();
        assert_eq!(build_potential(&p), ComplexMatrix::zeros(13));
    }
}
