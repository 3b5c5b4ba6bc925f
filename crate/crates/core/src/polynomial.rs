//! Polynomials stored by their Chebyshev coefficients on an interval.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::alternance::Sign;
use crate::error::{Error, Result};
use crate::scalar::{Function, Interval};

/// `p(t) = sum c_j T_j(u)` with `u = (2t - a - b) / (b - a)`.
///
/// The number of coefficients is the degree bound plus one.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    domain: Interval,
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Empty `coeffs` is read as the zero polynomial of degree bound 0.
    pub fn new(domain: Interval, coeffs: Vec<f64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        Polynomial { domain, coeffs }
    }

    pub fn zero(domain: Interval, degree_bound: usize) -> Self {
        Polynomial { domain, coeffs: vec![0.0; degree_bound + 1] }
    }

    pub fn constant(domain: Interval, c: f64) -> Self {
        Polynomial { domain, coeffs: vec![c] }
    }

    /// The line through `(a, fa)` and `(b, fb)` where `[a, b]` is the domain.
    pub fn linear_interpolant(domain: Interval, fa: f64, fb: f64) -> Self {
        Polynomial { domain, coeffs: vec![0.5 * (fa + fb), 0.5 * (fb - fa)] }
    }

    /// Interpolates `f` at the `n + 1` Chebyshev points of the domain.
    pub fn interpolate<F: Fn(f64) -> f64>(domain: Interval, n: usize, f: F) -> Self {
        let m = n + 1;
        let nodes: Vec<f64> = (0..m)
            .map(|k| libm::cos(core::f64::consts::PI * (k as f64 + 0.5) / m as f64))
            .collect();
        let vals: Vec<f64> = nodes.iter().map(|&u| f(domain.mid() + 0.5 * domain.len() * u)).collect();
        let mut coeffs = vec![0.0; m];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let mut s = 0.0;
            for (k, &v) in vals.iter().enumerate() {
                s += v * libm::cos(core::f64::consts::PI * j as f64 * (k as f64 + 0.5) / m as f64);
            }
            *c = 2.0 * s / m as f64;
        }
        coeffs[0] *= 0.5;
        Polynomial { domain, coeffs }
    }

    /// From monomial coefficients `c0 + c1 t + ...` in the variable `t`.
    pub fn from_monomial(domain: Interval, mono: &[f64]) -> Self {
        let n = mono.len().saturating_sub(1);
        let horner = |t: f64| mono.iter().rev().fold(0.0, |acc, &c| acc * t + c);
        Self::interpolate(domain, n, horner)
    }

    /// Monomial coefficients in `t`, lowest degree first.
    pub fn to_monomial(&self) -> Vec<f64> {
        // u = alpha t + beta0
        let alpha = 2.0 / self.domain.len();
        let beta0 = -(self.domain.lo() + self.domain.hi()) / self.domain.len();
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        let mut t_prev = vec![1.0];
        let mut t_cur = vec![beta0, alpha];
        for (j, &c) in self.coeffs.iter().enumerate() {
            let tj: &[f64] = match j {
                0 => &t_prev,
                _ => &t_cur,
            };
            for (o, &x) in out.iter_mut().zip(tj) {
                *o += c * x;
            }
            if j >= 1 {
                // T_{j+1} = 2 u T_j - T_{j-1}
                let mut next = vec![0.0; t_cur.len() + 1];
                for (i, &x) in t_cur.iter().enumerate() {
                    next[i] += 2.0 * beta0 * x;
                    next[i + 1] += 2.0 * alpha * x;
                }
                for (i, &x) in t_prev.iter().enumerate() {
                    next[i] -= x;
                }
                t_prev = core::mem::replace(&mut t_cur, next);
            }
        }
        out
    }

    /// `eps * prod (xi_i - t)`; `xi` must be strictly increasing.
    pub fn from_roots(domain: Interval, eps: Sign, xi: &[f64]) -> Result<Self> {
        if xi.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition(format!("roots {xi:?} are not strictly increasing")));
        }
        let mut p = Polynomial::constant(domain, eps.value());
        for &x in xi {
            p = p.mul_linear(x);
        }
        Ok(p)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Index of the last nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    /// Same polynomial with degree bound `n`; higher coefficients are dropped.
    pub fn with_degree_bound(&self, n: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n + 1, 0.0);
        Polynomial { domain: self.domain, coeffs }
    }

    /// Clenshaw recurrence.
    pub fn eval(&self, t: f64) -> f64 {
        let u = (2.0 * t - self.domain.lo() - self.domain.hi()) / self.domain.len();
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs[1..].iter().rev() {
            let b0 = c + 2.0 * u * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + u * b1 - b2
    }

    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len() - 1;
        if n == 0 {
            return Polynomial::constant(self.domain, 0.0);
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..=n).rev() {
            d[k - 1] = d.get(k + 1).copied().unwrap_or(0.0) + 2.0 * k as f64 * self.coeffs[k];
        }
        d.truncate(n);
        d[0] *= 0.5;
        let scale = 2.0 / self.domain.len();
        Polynomial { domain: self.domain, coeffs: d.into_iter().map(|x| x * scale).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Polynomial { domain: self.domain, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_constant(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// `self + lambda * other`; both must share the domain.
    pub fn add_scaled(&self, other: &Polynomial, lambda: f64) -> Result<Self> {
        if self.domain != other.domain {
            return Err(Error::Precondition("polynomials live on different intervals".into()));
        }
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n, 0.0);
        for (c, &o) in coeffs.iter_mut().zip(&other.coeffs) {
            *c += lambda * o;
        }
        Ok(Polynomial { domain: self.domain, coeffs })
    }

    /// `(xi - t) * self`, raising the degree bound by one.
    pub fn mul_linear(&self, xi: f64) -> Self {
        let half = 0.5 * self.domain.len();
        let shift = xi - self.domain.mid();
        let n = self.coeffs.len();
        let mut out = vec![0.0; n + 1];
        for (j, &c) in self.coeffs.iter().enumerate() {
            out[j] += shift * c;
            // u T_0 = T_1, u T_j = (T_{j+1} + T_{j-1}) / 2
            if j == 0 {
                out[1] -= half * c;
            } else {
                out[j + 1] -= 0.5 * half * c;
                out[j - 1] -= 0.5 * half * c;
            }
        }
        Polynomial { domain: self.domain, coeffs: out }
    }

    /// The same polynomial expressed on another interval.
    pub fn rebase(&self, domain: Interval) -> Self {
        if domain == self.domain {
            return self.clone();
        }
        Self::interpolate(domain, self.degree_bound(), |t| self.eval(t))
    }
}

impl Function for Polynomial {
    fn domain(&self) -> Interval {
        self.domain
    }
    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }
}
