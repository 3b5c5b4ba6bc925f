//! Best uniform polynomial approximation by alternance-driven descent.

use alloc::format;
use alloc::vec::Vec;

use crate::alternance::{alternance_from_scan, default_tol, AlternatingSequence, Sign};
use crate::error::{Error, Result};
use crate::polynomial::Polynomial;
use crate::scalar::{inverse_modulus, Axpy, Difference, Function, Sampling, Scan};
use crate::search::golden_min;

/// Parameters shared by the polynomial and fixed-knot fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParams {
    pub beta_minus: f64,
    pub beta_plus: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub max_iter: usize,
    /// Relative tolerance; the residual counts as zero below `tol * max(1, ||f||)`.
    pub tol: f64,
    pub sampling: Sampling,
}

impl Default for FitParams {
    fn default() -> Self {
        FitParams {
            beta_minus: 0.5,
            beta_plus: 0.99,
            gamma_minus: 0.9,
            gamma_plus: 1.1,
            max_iter: 500,
            tol: 1e-10,
            sampling: Sampling::default(),
        }
    }
}

impl FitParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(0.0 < self.beta_minus && self.beta_minus < self.beta_plus && self.beta_plus < 1.0) {
            return bad("need 0 < beta_minus < beta_plus < 1");
        }
        if !(0.0 < self.gamma_minus && self.gamma_minus <= 1.0 && 1.0 < self.gamma_plus && self.gamma_plus.is_finite()) {
            return bad("need 0 < gamma_minus <= 1 < gamma_plus");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol must be positive");
        }
        self.sampling.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    BetaPlusOptimal,
    MaxIterations,
    Degenerate,
    /// No decreasing step could be found although no certificate was reached.
    Stalled,
}

impl FitStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FitStatus::BetaPlusOptimal => "beta-plus-optimal",
            FitStatus::MaxIterations => "max-iterations",
            FitStatus::Degenerate => "degenerate",
            FitStatus::Stalled => "stalled",
        }
    }
}

/// Diagnostics of one correction step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub beta: f64,
    pub k: usize,
    pub norm_before: f64,
    pub norm_after: f64,
    pub lambda: f64,
    pub lambda_bar: f64,
    /// `||g - lambda_bar gamma||`.
    pub safe_norm: f64,
    /// `(1 + beta rho) / (1 + rho) ||g||`.
    pub safe_bound: f64,
    pub rho: f64,
    /// Estimate of the inverse modulus of the residual at `2 beta ||g||`.
    pub mu: f64,
    pub rate_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub polynomial: Polynomial,
    pub final_norm: f64,
    pub iterations: usize,
    pub beta_history: Vec<f64>,
    /// Alternance of the final residual; absent when the fit is exact.
    pub alternation: Option<AlternatingSequence>,
    pub status: FitStatus,
    pub steps: Vec<StepRecord>,
}

/// The line through `(a, f(a))` and `(b, f(b))`.
pub fn init_linear<F: Function + ?Sized>(f: &F) -> Polynomial {
    let d = f.domain();
    Polynomial::linear_interpolant(d, f.value(d.lo()), f.value(d.hi()))
}

/// `(t_i^+ + t_{i+1}^-) / 2` for consecutive pairs.
pub fn midpoints(seq: &AlternatingSequence) -> Vec<f64> {
    seq.pairs.windows(2).map(|w| 0.5 * (w[0].1 + w[1].0)).collect()
}

/// `gamma(t) = eps * prod (xi_i - t)`.
pub fn gamma_from_xi(eps: Sign, xi: &[f64], domain: crate::scalar::Interval) -> Result<Polynomial> {
    Polynomial::from_roots(domain, eps, xi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafeStep {
    pub lambda_bar: f64,
    pub bound: f64,
    pub m_minus: f64,
    pub m_plus: f64,
    pub rho: f64,
}

/// The guaranteed step `lambda_bar = ||g|| (1 - beta) / (m_- + m_+)` and its bound.
///
/// `m_-` is the smallest `|gamma|` over the pairs; since `log |gamma|` is
/// concave between consecutive roots it is attained at a pair end.
pub fn safe_step(gamma: &Polynomial, seq: &AlternatingSequence, sampling: &Sampling) -> Result<SafeStep> {
    let m_minus = seq
        .pairs
        .iter()
        .flat_map(|&(a, b)| [gamma.eval(a).abs(), gamma.eval(b).abs()])
        .fold(f64::INFINITY, f64::min);
    let m_plus = Scan::new(gamma, sampling).norm();
    if !(m_plus > 0.0) {
        return Err(Error::Precondition("correction polynomial vanishes".into()));
    }
    let norm = seq.big_m;
    let rho = m_minus / m_plus;
    Ok(SafeStep {
        lambda_bar: norm * (1.0 - seq.beta) / (m_minus + m_plus),
        bound: (1.0 + seq.beta * rho) / (1.0 + rho) * norm,
        m_minus,
        m_plus,
        rho,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSearchResult {
    pub lambda: f64,
    pub mu: f64,
    pub evaluations: usize,
}

/// Approximately minimises `||g - lambda d||` over `lambda` in `[0, lambda_hi]`.
pub fn line_search_lambda<G: Function + ?Sized, D: Function + ?Sized>(
    g: &G,
    d: &D,
    lambda_hi: f64,
    sampling: &Sampling,
) -> StepSearchResult {
    let mut evaluations = 0;
    let mut phi = |lambda: f64| {
        evaluations += 1;
        Scan::new(&Axpy { g, d, lambda }, sampling).norm()
    };
    let at_zero = phi(0.0);
    if !(lambda_hi > 0.0) {
        return StepSearchResult { lambda: 0.0, mu: at_zero, evaluations };
    }
    let (lambda, mu) = golden_min(&mut phi, 0.0, lambda_hi, 1e-10 * lambda_hi);
    let (lambda, mu) = if mu <= at_zero { (lambda, mu) } else { (0.0, at_zero) };
    StepSearchResult { lambda, mu, evaluations }
}

/// Minimises a convex `phi` over `lambda >= 0`, seeded at `2 lambda_0`: the
/// bracket is doubled while `phi` still decreases, then refined by golden section.
/// Returns the best point seen, `(0, phi(0))` included.
pub(crate) fn convex_search<P: FnMut(f64) -> f64>(mut phi: P, lambda_0: f64) -> (f64, f64) {
    let at_zero = phi(0.0);
    if !(lambda_0 > 0.0) {
        return (0.0, at_zero);
    }
    let mut hi = 2.0 * lambda_0;
    let mut prev = phi(lambda_0);
    for _ in 0..60 {
        let cur = phi(hi);
        if !(cur < prev) {
            break;
        }
        prev = cur;
        hi *= 2.0;
    }
    let (lambda, mu) = golden_min(&mut phi, 0.0, hi, 1e-10 * hi);
    if mu <= at_zero {
        (lambda, mu)
    } else {
        (0.0, at_zero)
    }
}

/// `Gamma_k(r) = c_k r^k` with `c_{2q} = (1*3*...*(2q-1))^2` and `c_{2q+1} = (2q+1) c_{2q}`.
pub fn gamma_k_bound(k: usize, r: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::Precondition(format!("Gamma_k needs k >= 2, got {k}")));
    }
    let q = k / 2;
    let mut c = 1.0;
    for j in 1..=q {
        let odd = (2 * j - 1) as f64;
        c *= odd * odd;
    }
    if k % 2 == 1 {
        c *= (2 * q + 1) as f64;
    }
    Ok(c * libm::pow(r, k as f64))
}

/// `1 - (1 - beta) tau / (1 + tau)` with `tau = (e/k) ((k-1) mu / (2 e len))^k`.
pub fn reduction_rate_bound(k: usize, mu: f64, beta: f64, domain_len: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let e = core::f64::consts::E;
    let kf = k as f64;
    let tau = e / kf * libm::pow((kf - 1.0) * mu / (2.0 * e * domain_len), kf);
    1.0 - (1.0 - beta) * tau / (1.0 + tau)
}

/// Fits a polynomial of degree at most `n` to `f` in the uniform norm.
pub fn remez_fit<F: Function + ?Sized>(f: &F, n: usize, params: &FitParams) -> Result<FitReport> {
    params.validate()?;
    let d = f.domain();
    let sampling = &params.sampling;
    let f_norm = Scan::new(f, sampling).norm();
    let zero_tol = params.tol * f_norm.max(1.0);

    let mut sigma = if n == 0 {
        Polynomial::constant(d, 0.5 * (f.value(d.lo()) + f.value(d.hi())))
    } else {
        init_linear(f).with_degree_bound(n)
    };
    let mut beta = params.beta_minus;
    let mut beta_history = Vec::new();
    let mut steps = Vec::new();
    let mut iterations = 0;

    loop {
        let scan = Scan::new(&Difference { a: &sigma, b: f }, sampling);
        let shift = 0.5 * (scan.max() + scan.min());
        sigma = sigma.add_constant(-shift);
        let scan = scan.shifted(shift);
        let norm = scan.norm();
        if norm <= zero_tol {
            return Ok(FitReport {
                polynomial: sigma,
                final_norm: norm,
                iterations,
                beta_history,
                alternation: None,
                status: FitStatus::Degenerate,
                steps,
            });
        }
        let g = Difference { a: &sigma, b: f };
        let band = default_tol(norm);
        let seq = loop {
            beta_history.push(beta);
            let seq = alternance_from_scan(&g, &scan, beta, band)?;
            if seq.k() < n + 1 || beta >= params.beta_plus {
                break seq;
            }
            beta = (params.gamma_plus * beta).min(params.beta_plus);
        };
        if seq.k() >= n + 1 {
            return Ok(FitReport {
                polynomial: sigma,
                final_norm: norm,
                iterations,
                beta_history,
                alternation: Some(seq),
                status: FitStatus::BetaPlusOptimal,
                steps,
            });
        }
        if iterations >= params.max_iter {
            return Ok(FitReport {
                polynomial: sigma,
                final_norm: norm,
                iterations,
                beta_history,
                alternation: Some(seq),
                status: FitStatus::MaxIterations,
                steps,
            });
        }

        let gamma = gamma_from_xi(seq.eps, &midpoints(&seq), d)?;
        let safe = safe_step(&gamma, &seq, sampling)?;
        let safe_norm = Scan::new(&Axpy { g: &g, d: &gamma, lambda: safe.lambda_bar }, sampling).norm();
        let search = convex_search(|lambda| Scan::new(&Axpy { g: &g, d: &gamma, lambda }, sampling).norm(), safe.lambda_bar);
        let (lambda, norm_after) = if search.1 <= safe_norm { search } else { (safe.lambda_bar, safe_norm) };
        let mu = inverse_modulus(&g, 2.0 * seq.beta * norm, sampling.grid_size)?;
        steps.push(StepRecord {
            beta: seq.beta,
            k: seq.k(),
            norm_before: norm,
            norm_after,
            lambda,
            lambda_bar: safe.lambda_bar,
            safe_norm,
            safe_bound: safe.bound,
            rho: safe.rho,
            mu,
            rate_bound: reduction_rate_bound(seq.k(), mu, seq.beta, d.len()),
        });
        sigma = sigma.add_scaled(&gamma, -lambda)?;
        beta = (params.gamma_minus * beta).max(params.beta_minus);
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::scalar::{from_fn, Interval};

    #[test]
    fn gamma_closed_forms() {
        for r in [0.1, 1.0, 2.0] {
            assert_eq!(gamma_k_bound(2, r).unwrap(), r * r);
            assert_eq!(gamma_k_bound(3, r).unwrap(), 3.0 * r * r * r);
            assert_eq!(gamma_k_bound(4, r).unwrap(), 9.0 * libm::pow(r, 4.0));
            assert_eq!(gamma_k_bound(5, r).unwrap(), 45.0 * libm::pow(r, 5.0));
        }
        assert!(gamma_k_bound(1, 1.0).is_err());
    }

    #[test]
    fn rate_bound_examples() {
        assert_eq!(reduction_rate_bound(1, 0.3, 0.5, 1.0), 1.0);
        let e = core::f64::consts::E;
        let got = reduction_rate_bound(2, e, 0.5, 1.0);
        let tau = e / 8.0;
        assert!((got - (1.0 - 0.5 * tau / (1.0 + tau))).abs() < 1e-15);
        assert!(reduction_rate_bound(3, 0.5, 1.0 - 1e-12, 1.0) > 1.0 - 1e-11);
    }

    #[test]
    fn midpoint_examples() {
        let seq = |pairs: Vec<(f64, f64)>| AlternatingSequence { beta: 1.0, eps: Sign::Plus, level: 1.0, big_m: 1.0, pairs };
        assert_eq!(midpoints(&seq(vec![(0.0, 0.0), (1.0, 1.0)])), vec![0.5]);
        assert_eq!(midpoints(&seq(vec![(0.0, 0.2), (0.8, 1.0)])), vec![0.5]);
    }

    #[test]
    fn line_search_cancels_identity() {
        let d = Interval::new(-1.0, 1.0).unwrap();
        let g = from_fn(d, |t| t);
        let r = line_search_lambda(&g, &g, 2.0, &Sampling::default());
        assert!((r.lambda - 1.0).abs() < 1e-8 && r.mu < 1e-8);
        let r = line_search_lambda(&g, &g, 0.0, &Sampling::default());
        assert_eq!((r.lambda, r.mu), (0.0, 1.0));
    }

    #[test]
    fn safe_step_formula() {
        let d = Interval::new(0.0, 1.0).unwrap();
        let seq = AlternatingSequence { beta: 0.5, eps: Sign::Plus, level: 0.5, big_m: 1.0, pairs: vec![(0.0, 0.0), (1.0, 1.0)] };
        let gamma = Polynomial::from_roots(d, Sign::Plus, &[0.5]).unwrap();
        let s = safe_step(&gamma, &seq, &Sampling::default()).unwrap();
        assert!((s.rho - 1.0).abs() < 1e-15);
        assert!((s.bound - 0.75).abs() < 1e-15);
        assert!((s.lambda_bar - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fits_line_to_parabola() {
        let d = Interval::new(0.0, 1.0).unwrap();
        let f = from_fn(d, |t| t * t);
        let r = remez_fit(&f, 1, &FitParams::default()).unwrap();
        assert_eq!(r.status, FitStatus::BetaPlusOptimal);
        assert!(r.final_norm >= 0.125 - 1e-12 && 0.99 * r.final_norm <= 0.125);
    }

    #[test]
    fn exact_when_in_space() {
        let d = Interval::new(-1.0, 1.0).unwrap();
        let f = from_fn(d, |t| t * t * t);
        let r = remez_fit(&f, 3, &FitParams::default()).unwrap();
        assert_eq!(r.status, FitStatus::Degenerate);
        assert!(r.final_norm <= 1e-10);
    }

    #[test]
    fn rejects_bad_params() {
        let d = Interval::new(-1.0, 1.0).unwrap();
        let f = from_fn(d, |t| t);
        let p = FitParams { beta_minus: 0.99, beta_plus: 0.5, ..FitParams::default() };
        assert!(remez_fit(&f, 1, &p).is_err());
    }
}
