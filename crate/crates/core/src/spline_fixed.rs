//! Best uniform approximation by splines with fixed knots.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::alternance::{alternance_from_scan, default_tol, AlternatingSequence, Sign};
use crate::error::{Error, Result};
use crate::poly_approx::{convex_search, FitParams, FitStatus};
use crate::polynomial::Polynomial;
use crate::scalar::{Axpy, Difference, Function, Sampling, Scan};
use crate::spline::{KnotVector, Spline};

/// A pair of knot indices `i1 < i2` on which the counting condition holds:
/// at least `n_{i1} + ... + n_{i2-1} + 2` alternation pairs touch `[x_{i1}, x_{i2}]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsCertificate {
    pub i1: usize,
    pub i2: usize,
    pub count: usize,
    pub required: usize,
    pub witness_js: Vec<usize>,
}

/// Roots `xi_j` separating consecutive pairs, grouped by the piece holding them.
#[derive(Debug, Clone, PartialEq)]
pub struct IntermediaryPoints {
    pub xi: Vec<f64>,
    /// For each piece, the indices `j` of the roots it holds.
    pub assignment: Vec<Vec<usize>>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntermediaryOutcome {
    Certificate {
        certificate: CsCertificate,
        /// Piece and step at which the fourth case fired.
        piece: usize,
        step: usize,
        counts: Vec<usize>,
    },
    Points(IntermediaryPoints),
}

/// Indices of pairs with an end in `[x_{i1}, x_{i2}]`.
pub fn j_set(seq: &AlternatingSequence, kv: &KnotVector, i1: usize, i2: usize) -> Vec<usize> {
    let x = kv.knots();
    let (lo, hi) = (x[i1], x[i2]);
    let inside = |t: f64| lo <= t && t <= hi;
    seq.pairs
        .iter()
        .enumerate()
        .filter(|(_, &(a, b))| inside(a) || inside(b))
        .map(|(j, _)| j)
        .collect()
}

fn certificate_at(seq: &AlternatingSequence, kv: &KnotVector, i1: usize, i2: usize) -> Option<CsCertificate> {
    let js = j_set(seq, kv, i1, i2);
    let required = kv.degrees()[i1..i2].iter().sum::<usize>() + 2;
    (js.len() >= required).then(|| CsCertificate { i1, i2, count: js.len(), required, witness_js: js })
}

/// Searches all `i1 < i2`, shortest spans first, for the counting condition.
pub fn check_cs(seq: &AlternatingSequence, kv: &KnotVector) -> Option<CsCertificate> {
    let p1 = kv.pieces();
    (1..=p1).find_map(|w| (0..=p1 - w).find_map(|i1| certificate_at(seq, kv, i1, i1 + w)))
}

/// Places one root between each pair of consecutive alternation pairs, at most
/// `n_i` per piece, or stops with a counting certificate when a piece overflows.
pub fn build_intermediary_points(seq: &AlternatingSequence, kv: &KnotVector) -> IntermediaryOutcome {
    let x = kv.knots();
    let n = kv.degrees();
    let np = kv.pieces();
    let mut r = vec![0usize; np];
    let mut xi = Vec::with_capacity(seq.k());
    let mut assignment = vec![Vec::new(); np];
    for j in 0..seq.k() {
        let tp = seq.pairs[j].1;
        let tm = seq.pairs[j + 1].0;
        let i = (x.partition_point(|&v| v <= tp).max(1) - 1).min(np - 1);
        let (root, piece) = if tm <= x[i + 1] {
            if r[i] == n[i] {
                let certificate = backtrack(seq, kv, &r, i);
                return IntermediaryOutcome::Certificate { certificate, piece: i, step: j, counts: r };
            }
            (0.5 * (tp + tm), i)
        } else if r[i] < n[i] {
            (0.5 * (tp + x[i + 1]), i)
        } else {
            (0.5 * (x[i + 1] + x[i + 2].min(tm)), i + 1)
        };
        r[piece] += 1;
        assignment[piece].push(j);
        xi.push(root);
    }
    IntermediaryOutcome::Points(IntermediaryPoints { xi, assignment, counts: r })
}

// The fourth case at piece i: walk left through full pieces until the count
// over [x_{i1}, x_{i+1}] reaches the requirement.
fn backtrack(seq: &AlternatingSequence, kv: &KnotVector, r: &[usize], i: usize) -> CsCertificate {
    let n = kv.degrees();
    let mut i1 = i;
    loop {
        if let Some(c) = certificate_at(seq, kv, i1, i + 1) {
            return c;
        }
        if i1 == 0 || r[i1 - 1] != n[i1 - 1] {
            break;
        }
        i1 -= 1;
    }
    check_cs(seq, kv).unwrap_or_else(|| {
        let js = j_set(seq, kv, i, i + 1);
        CsCertificate { i1: i, i2: i + 1, count: js.len(), required: n[i] + 2, witness_js: js }
    })
}

/// The correction spline: on piece `i`, a multiple of `prod_{j in J(i)} (xi_j - t)`
/// with the sign of `-eps prod_j (xi_j - t)`, scaled to be continuous.
pub fn delta_from_xi(ip: &IntermediaryPoints, eps: Sign, kv: &KnotVector) -> Result<Spline> {
    let x = kv.knots();
    let mut pieces: Vec<Polynomial> = Vec::with_capacity(kv.pieces());
    for i in 0..kv.pieces() {
        let d = kv.piece_interval(i);
        let before = ip.xi.iter().filter(|&&v| v < x[i]).count();
        let eps_i = eps.alternate(before);
        let roots: Vec<f64> = ip.assignment[i].iter().map(|&j| ip.xi[j]).collect();
        let gamma_i = Polynomial::from_roots(d, eps_i, &roots)?;
        let alpha = if i == 0 {
            1.0
        } else {
            let left = pieces[i - 1].eval(x[i]);
            let here = -gamma_i.eval(x[i]);
            if here == 0.0 || left == 0.0 {
                return Err(Error::Precondition(format!("correction vanishes at knot {i}")));
            }
            left / here
        };
        if !(alpha > 0.0) {
            return Err(Error::Precondition(format!("correction changes sign at knot {i}")));
        }
        pieces.push(gamma_i.scale(-alpha).with_degree_bound(kv.degrees()[i]));
    }
    Spline::new(kv.clone(), pieces)
}

/// Sup norm of `g` sampled on the grid plus the knots.
pub(crate) fn knot_norm<G: Function + ?Sized>(g: &G, kv: &KnotVector, sampling: &Sampling) -> f64 {
    Scan::with_points(g, sampling, kv.knots()).norm()
}

/// Finds `lambda > 0` with `||sigma + lambda delta - f|| < ||sigma - f||`.
///
/// Starts from the analogue of the polynomial safe step, halves until the norm
/// decreases, then polishes by a convex line search.
pub fn spline_step<F: Function + ?Sized>(
    sigma: &Spline,
    f: &F,
    delta: &Spline,
    seq: &AlternatingSequence,
    sampling: &Sampling,
) -> Result<(f64, f64)> {
    let kv = sigma.knot_vector();
    let g = Difference { a: sigma, b: f };
    let phi = |lambda: f64| knot_norm(&Axpy { g: &g, d: delta, lambda: -lambda }, kv, sampling);
    let norm0 = phi(0.0);
    let m_minus = seq
        .pairs
        .iter()
        .flat_map(|&(a, b)| [delta.value(a).abs(), delta.value(b).abs()])
        .fold(f64::INFINITY, f64::min);
    let m_plus = knot_norm(delta, kv, sampling);
    if !(m_plus > 0.0) {
        return Err(Error::Precondition("correction spline vanishes".into()));
    }
    let slack = if seq.beta < 1.0 { 1.0 - seq.beta } else { 1.0 };
    let lambda_0 = norm0 * slack / (m_minus + m_plus);
    let mut lambda = lambda_0;
    let mut found = None;
    for _ in 0..64 {
        let v = phi(lambda);
        if v < norm0 {
            found = Some((lambda, v));
            break;
        }
        lambda *= 0.5;
    }
    let (lh, vh) = found.ok_or(Error::StepFailure)?;
    let (lp, vp) = convex_search(phi, lh);
    Ok(if vp < vh { (lp, vp) } else { (lh, vh) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplineStepRecord {
    pub beta: f64,
    pub k: usize,
    pub norm_before: f64,
    pub norm_after: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplineFitReport {
    pub spline: Spline,
    pub final_norm: f64,
    pub iterations: usize,
    pub beta_history: Vec<f64>,
    pub alternation: Option<AlternatingSequence>,
    pub certificate: Option<CsCertificate>,
    /// Step `j` at which the fourth case fired, with `k(β)` at that point.
    pub case4: Option<(usize, usize)>,
    pub status: FitStatus,
    pub steps: Vec<SplineStepRecord>,
}

/// Fits a spline on fixed knots, starting from the piecewise linear interpolant.
pub fn fixed_knot_fit<F: Function + ?Sized>(f: &F, kv: &KnotVector, params: &FitParams) -> Result<SplineFitReport> {
    fixed_knot_fit_from(f, Spline::linear_interpolant(f, kv), params)
}

/// Same as [`fixed_knot_fit`] from a given starting spline.
pub fn fixed_knot_fit_from<F: Function + ?Sized>(f: &F, start: Spline, params: &FitParams) -> Result<SplineFitReport> {
    params.validate()?;
    let kv = start.knot_vector().clone();
    if kv.domain() != f.domain() {
        return Err(Error::Precondition("knots do not span the domain of f".into()));
    }
    let sampling = &params.sampling;
    let f_norm = Scan::new(f, sampling).norm().max(1.0);
    let zero_tol = params.tol * f_norm;
    // Decreases below this are rounding noise in the residual.
    let noise = 16.0 * f64::EPSILON * f_norm;
    let mut sigma = start;
    let mut beta = params.beta_minus;
    let mut beta_history = Vec::new();
    let mut steps = Vec::new();
    let mut iterations = 0;
    let report = |spline, final_norm, iterations, beta_history, alternation, certificate, case4, status, steps| SplineFitReport {
        spline,
        final_norm,
        iterations,
        beta_history,
        alternation,
        certificate,
        case4,
        status,
        steps,
    };

    loop {
        let scan = Scan::with_points(&Difference { a: &sigma, b: f }, sampling, kv.knots());
        let shift = 0.5 * (scan.max() + scan.min());
        sigma = sigma.add_constant(-shift);
        let scan = scan.shifted(shift);
        let norm = scan.norm();
        if norm <= zero_tol {
            return Ok(report(sigma, norm, iterations, beta_history, None, None, None, FitStatus::Degenerate, steps));
        }
        let g = Difference { a: &sigma, b: f };
        let band = default_tol(norm);
        let (seq, ip) = loop {
            beta_history.push(beta);
            let seq = alternance_from_scan(&g, &scan, beta, band)?;
            match build_intermediary_points(&seq, &kv) {
                IntermediaryOutcome::Points(ip) => break (seq, ip),
                IntermediaryOutcome::Certificate { certificate, step, .. } => {
                    if beta >= params.beta_plus {
                        let case4 = Some((step, seq.k()));
                        return Ok(report(
                            sigma,
                            norm,
                            iterations,
                            beta_history,
                            Some(seq),
                            Some(certificate),
                            case4,
                            FitStatus::BetaPlusOptimal,
                            steps,
                        ));
                    }
                    beta = (params.gamma_plus * beta).min(params.beta_plus);
                }
            }
        };
        if iterations >= params.max_iter {
            return Ok(report(sigma, norm, iterations, beta_history, Some(seq), None, None, FitStatus::MaxIterations, steps));
        }
        let delta = delta_from_xi(&ip, seq.eps, &kv)?;
        let (lambda, norm_after) = match spline_step(&sigma, f, &delta, &seq, sampling) {
            Ok(v) => v,
            Err(Error::StepFailure) => {
                return Ok(report(sigma, norm, iterations, beta_history, Some(seq), None, None, FitStatus::Stalled, steps));
            }
            Err(e) => return Err(e),
        };
        if norm - norm_after <= noise {
            return Ok(report(sigma, norm, iterations, beta_history, Some(seq), None, None, FitStatus::Stalled, steps));
        }
        steps.push(SplineStepRecord { beta: seq.beta, k: seq.k(), norm_before: norm, norm_after, lambda });
        sigma = sigma.add_scaled(&delta, lambda)?;
        beta = (params.gamma_minus * beta).max(params.beta_minus);
        iterations += 1;
    }
}
