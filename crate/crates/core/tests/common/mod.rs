//! Reference implementations used only by the tests. Nothing here calls into
//! the crate's linear algebra: matrices are plain `Vec<Vec<_>>`, products are
//! triple loops and exponentials are truncated Taylor series.

#![allow(dead_code)]

use std::f64::consts::TAU;

use num_complex::Complex64;

pub type Dense = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros(n: usize) -> Dense {
    vec![vec![c(0.0, 0.0); n]; n]
}

pub fn identity(n: usize) -> Dense {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == c(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn scaled(a: &Dense, s: Complex64) -> Dense {
    a.iter().map(|row| row.iter().map(|z| z * s).collect()).collect()
}

fn inf_norm(a: &Dense) -> f64 {
    a.iter().map(|row| row.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(a)` by halving until the norm is below 1/2, summing the Taylor
/// series until terms vanish, then squaring back.
pub fn taylor_expm(a: &Dense) -> Dense {
    let n = a.len();
    let mut squarings = 0;
    let norm = inf_norm(a);
    while norm / 2f64.powi(squarings) > 0.5 {
        squarings += 1;
    }
    let small = scaled(a, c(0.5f64.powi(squarings), 0.0));
    let mut sum = identity(n);
    let mut term = identity(n);
    for k in 1..60 {
        term = scaled(&matmul(&term, &small), c(1.0 / k as f64, 0.0));
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += term[i][j];
            }
        }
        if inf_norm(&term) < 1e-20 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = matmul(&sum, &sum);
    }
    sum
}

/// Drive parameters in the reference convention.
#[derive(Debug, Clone, Copy)]
pub struct Drive {
    pub sites: usize,
    pub hopping: f64,
    pub strength: f64,
    pub p: u64,
    pub q: u64,
    pub theta: f64,
    pub h: f64,
    pub omega: f64,
}

impl Drive {
    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    /// `V cos(2 pi (p n / q) + theta + i h)` through the complex cosine.
    pub fn potential(&self, n: usize) -> Complex64 {
        let frac = ((self.p as u128 * n as u128) % self.q as u128) as f64 / self.q as f64;
        c(TAU * frac + self.theta, self.h).cos() * self.strength
    }

    pub fn hopping_matrix(&self) -> Dense {
        let l = self.sites;
        let mut m = zeros(l);
        for n in 0..l {
            m[n][(n + 1) % l] += c(self.hopping, 0.0);
            m[(n + 1) % l][n] += c(self.hopping, 0.0);
        }
        m
    }

    pub fn potential_matrix(&self) -> Dense {
        let mut m = zeros(self.sites);
        for (n, row) in m.iter_mut().enumerate() {
            row[n] = self.potential(n);
        }
        m
    }

    /// `exp(-i H_B T/2) exp(-i H_A T/2)` from two Taylor exponentials.
    pub fn propagator(&self) -> Dense {
        let half = c(0.0, -self.period() / 2.0);
        let ua = taylor_expm(&scaled(&self.hopping_matrix(), half));
        let ub = taylor_expm(&scaled(&self.potential_matrix(), half));
        matmul(&ub, &ua)
    }
}

/// Coefficients `[c_0, ..., c_n]` of `det(z I - a) = sum c_k z^k` by the
/// Faddeev-LeVerrier recursion; `c_n = 1`.
pub fn characteristic_polynomial(a: &Dense) -> Vec<Complex64> {
    let n = a.len();
    let mut coeffs = vec![c(0.0, 0.0); n + 1];
    coeffs[n] = c(1.0, 0.0);
    let mut m = zeros(n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = matmul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += coeffs[n - k + 1];
        }
        m = next;
        let am = matmul(a, &m);
        let trace: Complex64 = (0..n).map(|i| am[i][i]).sum();
        coeffs[n - k] = -trace / k as f64;
    }
    coeffs
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut value = c(0.0, 0.0);
    let mut deriv = c(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        deriv = deriv * z + value;
        value = value * z + a;
    }
    (value, deriv)
}

/// All roots of a monic polynomial by Aberth-Ehrlich iteration followed by
/// Newton polishing.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let radius = 1.0 + coeffs[..n].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius * 0.5, TAU * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner(coeffs, roots[i]);
            if p == c(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (roots[i] - roots[j])).sum();
            let step = ratio / (c(1.0, 0.0) - ratio * repulsion);
            roots[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-15 {
            break;
        }
    }
    for r in &mut roots {
        for _ in 0..5 {
            let (p, dp) = horner(coeffs, *r);
            if dp.norm() == 0.0 {
                break;
            }
            *r -= p / dp;
        }
    }
    roots
}

pub fn oracle_eigenvalues(a: &Dense) -> Vec<Complex64> {
    polynomial_roots(&characteristic_polynomial(a))
}

/// Largest distance from a point of `a` to its nearest unused partner in `b`
/// (greedy matching; adequate for well-separated spectra).
pub fn matched_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// Solves `a x = b` for each column of `b` with Gaussian elimination and
/// partial pivoting.
pub fn solve(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = (0..n).map(|i| [a[i].clone(), b[i].clone()].concat()).collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| m[x][col].norm().total_cmp(&m[y][col].norm())).unwrap();
        m.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..2 * n {
                    let v = m[col][k];
                    m[r][k] -= f * v;
                }
            }
        }
    }
    (0..n).map(|i| (0..n).map(|j| m[i][n + j] / m[i][i]).collect()).collect()
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Random normalized vector with Gaussian-like amplitudes.
pub fn random_state(rng: &mut impl rand::Rng, len: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> =
        (0..len).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}
