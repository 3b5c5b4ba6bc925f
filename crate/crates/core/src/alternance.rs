//! β-alternating sequences of a recentred residual.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::polynomial::Polynomial;
use crate::scalar::{Axpy, Function, Sampling, Scan};
use crate::search::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// `self * (-1)^i`.
    pub fn alternate(self, i: usize) -> Sign {
        if i % 2 == 0 {
            self
        } else {
            self.flip()
        }
    }
}

/// The unique sequence `t_0^- <= t_0^+ < t_1^- <= ... <= t_k^+` on which the
/// residual alternately reaches `±βM`, starting with sign `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternatingSequence {
    pub beta: f64,
    pub eps: Sign,
    /// `βM`.
    pub level: f64,
    pub big_m: f64,
    pub pairs: Vec<(f64, f64)>,
}

impl AlternatingSequence {
    pub fn k(&self) -> usize {
        self.pairs.len() - 1
    }

    /// Sign of the residual on pair `i`.
    pub fn sign(&self, i: usize) -> Sign {
        self.eps.alternate(i)
    }

    /// The left ends `t_i^-`, which form a β-alternating point set.
    pub fn points(&self) -> BetaAlternatingPoints {
        BetaAlternatingPoints {
            eps: self.eps,
            points: self.pairs.iter().map(|p| p.0).collect(),
            level: self.level,
        }
    }
}

/// Points `t_0 < ... < t_k` with `eps (-1)^i g(t_i) >= level`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaAlternatingPoints {
    pub eps: Sign,
    pub points: Vec<f64>,
    pub level: f64,
}

/// Default band for [`build_beta_alternance`]: `1e-9 M`.
pub fn default_tol(big_m: f64) -> f64 {
    1e-9 * big_m
}

/// Builds the β-alternating sequence of a recentred `g` on the default grid.
pub fn build_beta_alternance<G: Function + ?Sized>(g: &G, beta: f64, tol: f64) -> Result<AlternatingSequence> {
    build_beta_alternance_with(g, beta, tol, &Sampling::default())
}

pub fn build_beta_alternance_with<G: Function + ?Sized>(
    g: &G,
    beta: f64,
    tol: f64,
    sampling: &Sampling,
) -> Result<AlternatingSequence> {
    let scan = Scan::new(g, sampling);
    alternance_from_scan(g, &scan, beta, tol)
}

/// Runs the construction on existing samples of `g` (see [`Scan`]).
///
/// A sample counts as reaching the level when it is within `tol` of it.
/// Crossings that pass the level strictly are refined by bisection; samples
/// that only touch the band are taken as they are.
pub fn alternance_from_scan<G: Function + ?Sized>(
    g: &G,
    scan: &Scan,
    beta: f64,
    tol: f64,
) -> Result<AlternatingSequence> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} is outside (0, 1]")));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tol = {tol} is negative")));
    }
    let (mx, mn) = (scan.max(), scan.min());
    if (mx + mn).abs() > tol {
        return Err(Error::NotRecentred(mx + mn));
    }
    let big_m = mx.max(-mn);
    if big_m <= tol {
        return Err(Error::DegenerateResidual(big_m));
    }
    let level = beta * big_m;
    let thr = level - tol;
    let ts = scan.abscissae();
    let vs = scan.values();
    let n = ts.len();

    let reaches = |q: usize, s: Sign| s.value() * vs[q] >= thr;
    let first_from = |start: usize, s: Sign| (start..n).find(|&q| reaches(q, s));
    // Left end of a pair first detected at sample q; sample q - 1 is below the band.
    let left_end = |q: usize, s: Sign| -> f64 {
        if q == 0 || s.value() * vs[q] < level {
            ts[q]
        } else {
            bisect(|t| s.value() * g.value(t) >= level, ts[q - 1], ts[q]).1
        }
    };
    // Right end of a pair whose last reaching sample is r.
    let right_end = |r: usize, s: Sign| -> f64 {
        if r + 1 >= n || s.value() * vs[r] < level {
            ts[r]
        } else {
            bisect(|t| s.value() * g.value(t) < level, ts[r], ts[r + 1]).0
        }
    };

    let q0 = (0..n).find(|&q| vs[q].abs() >= thr).expect("the extremal sample reaches the level");
    let eps = Sign::of(vs[q0]);
    let mut pairs = Vec::new();
    let mut s = eps;
    let mut q = q0;
    let mut t_minus = left_end(q0, s);
    loop {
        let next = first_from(q + 1, s.flip());
        let stop = next.unwrap_or(n);
        let r = (q..stop).rev().find(|&r| reaches(r, s)).unwrap_or(q);
        pairs.push((t_minus, right_end(r, s)));
        match next {
            Some(q_next) => {
                s = s.flip();
                t_minus = left_end(q_next, s);
                q = q_next;
            }
            None => break,
        }
    }
    Ok(AlternatingSequence { beta, eps, level, big_m, pairs })
}

/// `k(β)` of the sequence built by [`build_beta_alternance`].
pub fn count_k<G: Function + ?Sized>(g: &G, beta: f64, tol: f64) -> Result<usize> {
    Ok(build_beta_alternance(g, beta, tol)?.k())
}

/// Checks `||g - p|| >= βM (1 - 1e-9)` for a polynomial of degree below `k`.
pub fn min_polynomial_deviation_check<G: Function + ?Sized>(
    g: &G,
    seq: &AlternatingSequence,
    p: &Polynomial,
) -> Result<bool> {
    if p.degree() >= seq.k() {
        return Err(Error::Precondition(format!(
            "degree {} is not below k = {}",
            p.degree(),
            seq.k()
        )));
    }
    let r = Axpy { g, d: p, lambda: 1.0 };
    let norm = Scan::new(&r, &Sampling::default()).norm();
    Ok(norm >= seq.level * (1.0 - 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::scalar::{from_fn, Interval};
    use core::f64::consts::PI;

    fn cos3() -> impl Function {
        from_fn(Interval::new(0.0, 1.0).unwrap(), |t| libm::cos(3.0 * PI * t))
    }

    #[test]
    fn identity_has_one_sign_change() {
        let g = from_fn(Interval::new(-1.0, 1.0).unwrap(), |t| t);
        let s = build_beta_alternance(&g, 1.0, 1e-9).unwrap();
        assert_eq!(s.eps, Sign::Minus);
        assert_eq!(s.pairs, vec![(-1.0, -1.0), (1.0, 1.0)]);
        for beta in [0.1, 0.5, 0.99] {
            assert_eq!(count_k(&g, beta, 1e-9).unwrap(), 1);
        }
    }

    #[test]
    fn cosine_at_full_level() {
        let s = build_beta_alternance(&cos3(), 1.0, 1e-9).unwrap();
        assert_eq!(s.eps, Sign::Plus);
        assert_eq!(s.k(), 3);
        let want = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        for (p, w) in s.pairs.iter().zip(want) {
            assert!((p.0 - w).abs() < 1e-4 && (p.1 - w).abs() < 1e-4, "{p:?} vs {w}");
        }
    }

    #[test]
    fn cosine_at_half_level() {
        let s = build_beta_alternance(&cos3(), 0.5, 1e-9).unwrap();
        assert_eq!(s.k(), 3);
        assert_eq!(s.pairs[0].0, 0.0);
        assert!((s.pairs[0].1 - 1.0 / 9.0).abs() < 1e-12);
        assert!((s.pairs[1].0 - 2.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let c = from_fn(Interval::new(0.0, 1.0).unwrap(), |_| 0.0);
        assert!(matches!(build_beta_alternance(&c, 1.0, 1e-9), Err(Error::DegenerateResidual(_))));
        let off = from_fn(Interval::new(0.0, 1.0).unwrap(), |t| t);
        assert!(matches!(build_beta_alternance(&off, 1.0, 1e-9), Err(Error::NotRecentred(_))));
        assert!(build_beta_alternance(&cos3(), 0.0, 1e-9).is_err());
    }

    #[test]
    fn deviation_check() {
        let d = Interval::new(-1.0, 1.0).unwrap();
        let g = from_fn(d, |t| t);
        let s = build_beta_alternance(&g, 1.0, 1e-9).unwrap();
        for c in [-0.7, 0.0, 0.4] {
            assert!(min_polynomial_deviation_check(&g, &s, &Polynomial::constant(d, c)).unwrap());
        }
        let lin = Polynomial::new(d, vec![0.0, 1.0]);
        assert!(min_polynomial_deviation_check(&g, &s, &lin).is_err());
    }
}
