//! Free knots: the optimal deviation `theta(x)` as a function of the interior
//! knots, extreme-knot analysis, and knot moves that lower `theta`.

mod existence;

pub use existence::{
    counting_blocks, existence, exists_delta_left, exists_delta_right, DeltaFamily, Direction, Existence,
};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alternance::{alternance_from_scan, AlternatingSequence, Sign};
use crate::error::{Error, Result};
use crate::poly_approx::{FitParams, FitStatus};
use crate::scalar::{Difference, Function, Interval, Sampling, Scan};
use crate::search::bisect;
use crate::spline::{KnotVector, Spline};
use crate::spline_fixed::{
    build_intermediary_points, fixed_knot_fit_from, j_set, knot_norm, IntermediaryOutcome,
};

/// Interior knots strictly inside the domain, with piece degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeKnotConfig {
    kv: KnotVector,
}

impl FreeKnotConfig {
    pub fn new(domain: Interval, interior: &[f64], degrees: Vec<usize>) -> Result<Self> {
        Ok(FreeKnotConfig { kv: KnotVector::from_interior(domain, interior, degrees)? })
    }

    pub fn from_knot_vector(kv: KnotVector) -> Self {
        FreeKnotConfig { kv }
    }

    pub fn knot_vector(&self) -> &KnotVector {
        &self.kv
    }

    pub fn interior(&self) -> &[f64] {
        self.kv.interior()
    }

    pub fn degrees(&self) -> &[usize] {
        self.kv.degrees()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeKnotParams {
    /// Parameters of the inner fixed-knot fits.
    pub fit: FitParams,
    /// A knot is extreme when its deviation is within this fraction of `theta`.
    pub extreme_rel_tol: f64,
    /// Jumps below this (relative to the slopes) count as neutral.
    pub neutral_tol: f64,
    /// Number of sampled configurations used to test the barrier property.
    pub barrier_samples: usize,
    pub seed: u64,
}

impl Default for FreeKnotParams {
    fn default() -> Self {
        FreeKnotParams {
            fit: FitParams { beta_plus: 1.0 - 1e-8, max_iter: 5000, ..FitParams::default() },
            extreme_rel_tol: 1e-6,
            neutral_tol: 1e-8,
            barrier_samples: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaResult {
    pub value: f64,
    pub sigma: Spline,
    pub status: FitStatus,
    pub iterations: usize,
}

/// Best deviation on the knots of `cfg`, with the spline attaining it.
pub fn theta<F: Function + ?Sized>(f: &F, cfg: &FreeKnotConfig, params: &FreeKnotParams) -> Result<ThetaResult> {
    theta_from(f, Spline::linear_interpolant(f, &cfg.kv), params)
}

pub fn theta_from<F: Function + ?Sized>(f: &F, start: Spline, params: &FreeKnotParams) -> Result<ThetaResult> {
    let r = fixed_knot_fit_from(f, start, &params.fit)?;
    Ok(ThetaResult { value: r.final_norm, sigma: r.spline, status: r.status, iterations: r.iterations })
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Largest `|theta(y) - theta(x)| / ||y - x||_1` over random `y` with every
/// knot moved by at most `radius`. Samples leaving the admissible set are skipped.
pub fn lipschitz_probe<F: Function + ?Sized>(
    f: &F,
    cfg: &FreeKnotConfig,
    radius: f64,
    samples: usize,
    seed: u64,
    params: &FreeKnotParams,
) -> Result<f64> {
    if radius == 0.0 || cfg.interior().is_empty() {
        return Ok(0.0);
    }
    let base = theta(f, cfg, params)?.value;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = cfg.kv.domain();
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let y: Vec<f64> = cfg.interior().iter().map(|&x| x + radius * (2.0 * uniform(&mut rng) - 1.0)).collect();
        let Ok(cy) = FreeKnotConfig::new(d, &y, cfg.degrees().to_vec()) else { continue };
        let dist: f64 = y.iter().zip(cfg.interior()).map(|(a, b)| (a - b).abs()).sum();
        if dist == 0.0 {
            continue;
        }
        let ty = theta(f, &cy, params)?.value;
        best = best.max((ty - base).abs() / dist);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnotKind {
    Unstable,
    Neutral,
    Stable,
    NonExtreme,
}

impl KnotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KnotKind::Unstable => "unstable",
            KnotKind::Neutral => "neutral",
            KnotKind::Stable => "stable",
            KnotKind::NonExtreme => "non-extreme",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnotClassification {
    /// Knot index `i` in `1..=p`.
    pub index: usize,
    pub x: f64,
    pub is_extreme: bool,
    /// Sign of `sigma(x_i) - f(x_i)`.
    pub s: Sign,
    pub deviation: f64,
    /// `s (sigma_{i-1}'(x_i) - sigma_i'(x_i))`.
    pub jump: f64,
    pub kind: KnotKind,
}

/// Classifies the interior knots of `sigma`. Returns nothing when `theta` is zero.
pub fn classify_knots<F: Function + ?Sized>(
    sigma: &Spline,
    f: &F,
    theta: f64,
    params: &FreeKnotParams,
) -> Vec<KnotClassification> {
    if !(theta > 0.0) {
        return Vec::new();
    }
    let x = sigma.knot_vector().knots();
    (1..x.len() - 1)
        .map(|i| {
            let dev = sigma.value(x[i]) - f.value(x[i]);
            let s = Sign::of(dev);
            let is_extreme = dev.abs() >= theta * (1.0 - params.extreme_rel_tol);
            let (dl, dr) = sigma.knot_slopes(i);
            let jump = s.value() * (dl - dr);
            let band = params.neutral_tol * 1f64.max(dl.abs()).max(dr.abs());
            let kind = if !is_extreme {
                KnotKind::NonExtreme
            } else if jump > band {
                KnotKind::Unstable
            } else if jump < -band {
                KnotKind::Stable
            } else {
                KnotKind::Neutral
            };
            KnotClassification { index: i, x: x[i], is_extreme, s, deviation: dev, jump, kind }
        })
        .collect()
}

/// A knot displaced by lowering the residual on one side.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotMove {
    pub knot: usize,
    pub direction: Direction,
    pub lambda: f64,
    /// `y_i - x_i`.
    pub displacement: f64,
    /// First-order prediction `t'(0)` of the displacement per unit `lambda`.
    pub slope: f64,
    pub config: FreeKnotConfig,
    pub spline: Spline,
    pub tau_norm: f64,
}

/// `t'(0) = delta(x_i) / (sigma_moving - sigma_other)'(x_i)`.
pub fn displacement_slope(sigma: &Spline, family: &DeltaFamily) -> Result<f64> {
    let i = family.knot;
    let x = sigma.knot_vector().knots()[i];
    let (dl, dr) = sigma.knot_slopes(i);
    let denom = match family.direction {
        Direction::Right => dl - dr,
        Direction::Left => dr - dl,
    };
    if denom == 0.0 {
        return Err(Error::MoveFailure(String::from("neutral knot: the pieces meet tangentially")));
    }
    Ok(family.adjacent().eval(x) / denom)
}

/// Moves knot `family.knot` to the point where the corrected moving-side piece
/// meets the other piece.
pub fn knot_move<F: Function + ?Sized>(
    sigma: &Spline,
    f: &F,
    lambda: f64,
    family: &DeltaFamily,
    sampling: &Sampling,
) -> Result<KnotMove> {
    let kv = sigma.knot_vector();
    let x = kv.knots();
    let i = family.knot;
    let dir = family.direction;
    let (moving, other) = match dir {
        Direction::Right => (i - 1, i),
        Direction::Left => (i, i - 1),
    };
    let slope = displacement_slope(sigma, family)?;
    let (a, b, d) = (sigma.piece(moving), sigma.piece(other), family.adjacent());
    let h = |u: f64| {
        let t = x[i] + u;
        a.eval(t) - lambda * d.eval(t) - b.eval(t)
    };
    let t = if lambda == 0.0 {
        0.0
    } else {
        let sgn = match dir {
            Direction::Right => 1.0,
            Direction::Left => -1.0,
        };
        if slope * sgn <= 0.0 {
            return Err(Error::MoveFailure(String::from("predicted displacement points the wrong way")));
        }
        let room = match dir {
            Direction::Right => x[i + 1] - x[i],
            Direction::Left => x[i] - x[i - 1],
        };
        let h0 = h(0.0);
        let crossed = |u: f64| {
            let v = h(sgn * u);
            v == 0.0 || (v > 0.0) != (h0 > 0.0)
        };
        let limit = room * (1.0 - 1e-12);
        let mut prev = 0.0;
        let mut u = (0.5 * (lambda * slope).abs()).min(0.5 * room);
        loop {
            if crossed(u) {
                break;
            }
            if u >= limit {
                return Err(Error::MoveFailure(String::from("no crossing before the neighbouring knot")));
            }
            prev = u;
            u = (2.0 * u).min(limit);
        }
        let (_, hi) = bisect(crossed, prev, u);
        sgn * hi
    };
    let y = x[i] + t;
    if !(x[i - 1] < y && y < x[i + 1]) {
        return Err(Error::MoveFailure(format!("moved knot {y} leaves ({}, {})", x[i - 1], x[i + 1])));
    }
    let new_kv = kv.with_knot(i, y)?;
    let pieces = (0..kv.pieces())
        .map(|q| match family.delta_of(q) {
            Some(dq) => sigma.piece(q).add_scaled(dq, -lambda),
            None => Ok(sigma.piece(q).clone()),
        })
        .collect::<Result<Vec<_>>>()?;
    let spline = Spline::new(new_kv.clone(), pieces)?;
    let tau_norm = knot_norm(&Difference { a: &spline, b: f }, &new_kv, sampling);
    Ok(KnotMove {
        knot: i,
        direction: dir,
        lambda,
        displacement: t,
        slope,
        config: FreeKnotConfig { kv: new_kv },
        spline,
        tau_norm,
    })
}

// Largest lambda in 2 theta / max|delta| * 2^-h for which the move keeps the
// deviation within theta and leaves the new knot non-extreme.
fn plan_move<F: Function + ?Sized>(
    f: &F,
    sigma: &Spline,
    theta: f64,
    family: &DeltaFamily,
    params: &FreeKnotParams,
) -> Result<KnotMove> {
    let sampling = &params.fit.sampling;
    let dmax = family.deltas.iter().map(|d| Scan::new(d, sampling).norm()).fold(0.0, f64::max);
    if !(dmax > 0.0) {
        return Err(Error::MoveFailure(String::from("correction vanishes")));
    }
    let mut lambda = 2.0 * theta / dmax;
    let ceiling = theta * (1.0 + 1e-10) + 1e-15;
    for _ in 0..60 {
        if let Ok(mv) = knot_move(sigma, f, lambda, family, sampling) {
            let y = mv.config.knot_vector().knots()[mv.knot];
            let at_knot = (mv.spline.value(y) - f.value(y)).abs();
            if mv.tau_norm <= ceiling && at_knot < theta * (1.0 - params.extreme_rel_tol) {
                return Ok(mv);
            }
        }
        lambda *= 0.5;
    }
    Err(Error::MoveFailure(String::from("no admissible step size")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoveAttempt {
    pub knot: usize,
    pub direction: Direction,
    pub exists: bool,
    pub reason: Option<String>,
    pub witness_degrees: Vec<usize>,
    pub lambda: Option<f64>,
    pub new_knot: Option<f64>,
    pub theta_after: Option<f64>,
    pub improved: bool,
}

/// Automaton verdict next to the counting form, for one knot and direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingCheck {
    pub knot: usize,
    pub direction: Direction,
    pub family_exists: bool,
    pub counting_blocks: bool,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Barrier {
    pub i_minus: usize,
    pub i0: usize,
    pub i_plus: usize,
    pub j_minus: usize,
    pub j_plus: usize,
    pub samples: usize,
    pub min_theta: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `theta` is zero: the knots are globally optimal.
    Degenerate,
    NecessaryConditionHolds,
    /// A move at this knot was replayed and lowered `theta` or the number of extreme knots.
    ViolatedAt { knot: usize, direction: Direction },
    /// A family exists but no replayed move confirmed an improvement.
    Inconclusive { knot: usize, direction: Direction },
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Degenerate => "degenerate",
            Verdict::NecessaryConditionHolds => "necessary-condition-holds",
            Verdict::ViolatedAt { .. } => "violated-at",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// The move behind a violated verdict and the refit after it.
#[derive(Debug, Clone, PartialEq)]
pub struct AppliedMove {
    pub family: DeltaFamily,
    pub mv: KnotMove,
    pub theta_after: f64,
    pub sigma_after: Spline,
    pub extreme_after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WMinimalityReport {
    pub theta: f64,
    pub sigma: Spline,
    pub alternation: Option<AlternatingSequence>,
    pub classifications: Vec<KnotClassification>,
    pub moves: Vec<MoveAttempt>,
    pub counting: Vec<CountingCheck>,
    pub formulations_agree: bool,
    pub barrier: Option<Barrier>,
    pub verdict: Verdict,
    pub applied: Option<AppliedMove>,
}

/// Tests the necessary condition for local w-minimality at the knots of `cfg`.
pub fn check_w_minimality<F: Function + ?Sized>(
    f: &F,
    cfg: &FreeKnotConfig,
    params: &FreeKnotParams,
) -> Result<WMinimalityReport> {
    check_w_minimality_from(f, Spline::linear_interpolant(f, &cfg.kv), params)
}

/// Same as [`check_w_minimality`], warm-starting the inner fit from `start`.
pub fn check_w_minimality_from<F: Function + ?Sized>(
    f: &F,
    start: Spline,
    params: &FreeKnotParams,
) -> Result<WMinimalityReport> {
    let sampling = &params.fit.sampling;
    let zero_tol = params.fit.tol * Scan::new(f, sampling).norm().max(1.0);
    let fit = theta_from(f, start, params)?;
    let theta = fit.value;
    let sigma = fit.sigma;
    let kv = sigma.knot_vector().clone();
    let mut report = WMinimalityReport {
        theta,
        sigma: sigma.clone(),
        alternation: None,
        classifications: Vec::new(),
        moves: Vec::new(),
        counting: Vec::new(),
        formulations_agree: true,
        barrier: None,
        verdict: Verdict::Degenerate,
        applied: None,
    };
    if theta <= zero_tol {
        return Ok(report);
    }
    let g = Difference { a: &sigma, b: f };
    let scan = Scan::with_points(&g, sampling, kv.knots());
    let scan = scan.shifted(0.5 * (scan.max() + scan.min()));
    let seq = alternance_from_scan(&g, &scan, 1.0, params.extreme_rel_tol * theta)?;
    report.classifications = classify_knots(&sigma, f, theta, params);

    let mut first_family = None;
    for c in report.classifications.clone().iter().filter(|c| c.kind == KnotKind::Unstable) {
        for dir in [Direction::Right, Direction::Left] {
            let ex = existence(&seq, &kv, c.index, c.s, dir);
            let blocks = counting_blocks(&seq, &kv, c.index, dir);
            report.counting.push(CountingCheck {
                knot: c.index,
                direction: dir,
                family_exists: ex.exists(),
                counting_blocks: blocks,
                agree: ex.exists() != blocks,
            });
            let mut attempt = MoveAttempt {
                knot: c.index,
                direction: dir,
                exists: ex.exists(),
                reason: None,
                witness_degrees: Vec::new(),
                lambda: None,
                new_knot: None,
                theta_after: None,
                improved: false,
            };
            match &ex {
                Existence::Refused(r) => attempt.reason = Some(r.clone()),
                Existence::Exists(fam) => {
                    attempt.witness_degrees = fam.degrees();
                    first_family.get_or_insert((c.index, dir));
                    if report.applied.is_none() {
                        match replay(f, &sigma, theta, fam, params) {
                            Ok(applied) => {
                                attempt.lambda = Some(applied.mv.lambda);
                                attempt.new_knot = Some(applied.mv.config.knot_vector().knots()[c.index]);
                                attempt.theta_after = Some(applied.theta_after);
                                let before = report.classifications.iter().filter(|k| k.is_extreme).count();
                                attempt.improved = applied.theta_after <= theta * (1.0 + 1e-9)
                                    && (applied.theta_after < theta * (1.0 - 1e-9) || applied.extreme_after < before);
                                if attempt.improved {
                                    report.verdict = Verdict::ViolatedAt { knot: c.index, direction: dir };
                                    report.applied = Some(applied);
                                }
                            }
                            Err(e) => attempt.reason = Some(format!("{e}")),
                        }
                    }
                }
            }
            report.moves.push(attempt);
        }
    }
    report.formulations_agree = report.counting.iter().all(|c| c.agree);
    if report.applied.is_none() {
        report.verdict = match first_family {
            Some((knot, direction)) => Verdict::Inconclusive { knot, direction },
            None => Verdict::NecessaryConditionHolds,
        };
    }
    report.barrier = barrier(f, &seq, &kv, theta, params)?;
    report.alternation = Some(seq);
    Ok(report)
}

fn replay<F: Function + ?Sized>(
    f: &F,
    sigma: &Spline,
    theta: f64,
    family: &DeltaFamily,
    params: &FreeKnotParams,
) -> Result<AppliedMove> {
    let mv = plan_move(f, sigma, theta, family, params)?;
    let after = theta_from(f, mv.spline.clone(), params)?;
    let extreme_after = classify_knots(&after.sigma, f, after.value, params).iter().filter(|k| k.is_extreme).count();
    Ok(AppliedMove { family: family.clone(), mv, theta_after: after.value, sigma_after: after.sigma, extreme_after })
}

// Indices around the piece where the fourth case fires on the exact
// alternance, and a sampled check that moving the outer knots within their
// allowed ranges does not lower theta.
fn barrier<F: Function + ?Sized>(
    f: &F,
    seq: &AlternatingSequence,
    kv: &KnotVector,
    theta: f64,
    params: &FreeKnotParams,
) -> Result<Option<Barrier>> {
    let IntermediaryOutcome::Certificate { piece: i0, counts, .. } = build_intermediary_points(seq, kv) else {
        return Ok(None);
    };
    let n = kv.degrees();
    let x = kv.knots();
    let last = kv.pieces() - 1;
    let mut i_minus = i0;
    while i_minus > 0 && counts[i_minus - 1] == n[i_minus - 1] {
        i_minus -= 1;
    }
    let mut i_plus = i0;
    while i_plus < last && j_set(seq, kv, i_plus + 1, i_plus + 2).len() >= n[i_plus + 1] {
        i_plus += 1;
    }
    let j_minus = seq.pairs.iter().position(|p| x[i_minus] <= p.1).unwrap_or(0);
    let j_plus = seq.pairs.iter().rposition(|p| p.0 <= x[i_plus + 1]).unwrap_or(seq.k());
    let (lo_pin, hi_pin) = (seq.pairs[j_minus].1, seq.pairs[j_plus].0);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x5eed);
    let floor = theta * params.fit.beta_plus - 1e-12;
    let mut min_theta: Option<f64> = None;
    let p = x.len() - 2;
    for _ in 0..params.barrier_samples {
        let mut y = x.to_vec();
        for k in 1..=p {
            let pinned = lo_pin <= x[k] && x[k] <= hi_pin;
            if pinned {
                continue;
            }
            let (lo, hi) = if k == i_minus {
                (x[k], lo_pin.min(0.5 * (x[k] + x[k + 1])))
            } else if k == i_plus + 1 {
                (hi_pin.max(0.5 * (x[k - 1] + x[k])), x[k])
            } else if k < i_minus || k > i_plus + 1 {
                (x[k] - (x[k] - x[k - 1]) / 3.0, x[k] + (x[k + 1] - x[k]) / 3.0)
            } else {
                (x[k], x[k])
            };
            y[k] = lo + (hi - lo) * uniform(&mut rng);
        }
        let Ok(ky) = KnotVector::new(y, n.to_vec()) else { continue };
        let ty = theta_from(f, Spline::linear_interpolant(f, &ky), params)?.value;
        min_theta = Some(min_theta.map_or(ty, |m| m.min(ty)));
    }
    Ok(Some(Barrier {
        i_minus,
        i0,
        i_plus,
        j_minus,
        j_plus,
        samples: params.barrier_samples,
        min_theta,
        holds: min_theta.is_none_or(|m| m >= floor),
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentReport {
    /// `theta` at every visited configuration.
    pub trajectory: Vec<f64>,
    pub knots: Vec<Vec<f64>>,
    pub moves: usize,
    pub final_report: WMinimalityReport,
}

/// Repeats check-and-move until the necessary condition holds, the fit is
/// exact, or `max_moves` moves have been made.
pub fn descend<F: Function + ?Sized>(
    f: &F,
    cfg: &FreeKnotConfig,
    params: &FreeKnotParams,
    max_moves: usize,
) -> Result<DescentReport> {
    let mut start = Spline::linear_interpolant(f, &cfg.kv);
    let mut trajectory = Vec::new();
    let mut knots = Vec::new();
    let mut moves = 0;
    loop {
        let rep = check_w_minimality_from(f, start, params)?;
        trajectory.push(rep.theta);
        knots.push(rep.sigma.knot_vector().interior().to_vec());
        match &rep.applied {
            Some(app) if moves < max_moves => {
                start = app.sigma_after.clone();
                moves += 1;
            }
            _ => return Ok(DescentReport { trajectory, knots, moves, final_report: rep }),
        }
    }
}
