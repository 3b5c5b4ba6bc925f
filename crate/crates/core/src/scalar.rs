//! Black-box functions on an interval and the extremum machinery built on them.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::search::{bisect, golden_max, golden_min};

/// A closed interval `[lo, hi]` with `lo < hi`, both finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    /// Slack allowed when clamping points that fell outside by round-off.
    pub fn round_off(&self) -> f64 {
        1e-12 * (self.len() + self.lo.abs() + self.hi.abs())
    }

    /// Clamps `t` to the interval if it lies within round-off of it.
    pub fn clamp_checked(&self, t: f64) -> Result<f64> {
        let eta = self.round_off();
        if t.is_nan() || t < self.lo - eta || t > self.hi + eta {
            return Err(Error::OutOfDomain { t, lo: self.lo, hi: self.hi });
        }
        Ok(t.clamp(self.lo, self.hi))
    }

    /// `n` equispaced points including both endpoints.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.hi
                } else {
                    self.lo + self.len() * (i as f64 / last)
                }
            })
            .collect()
    }
}

/// A real function on a closed interval, evaluated as a black box.
///
/// Implementations must be deterministic and finite on the domain.
pub trait Function {
    fn domain(&self) -> Interval;
    fn value(&self, t: f64) -> f64;
}

impl<T: Function + ?Sized> Function for &T {
    fn domain(&self) -> Interval {
        (**self).domain()
    }
    fn value(&self, t: f64) -> f64 {
        (**self).value(t)
    }
}

impl<T: Function + ?Sized> Function for Box<T> {
    fn domain(&self) -> Interval {
        (**self).domain()
    }
    fn value(&self, t: f64) -> f64 {
        (**self).value(t)
    }
}

/// Evaluates `g` at `t`, clamping points within round-off of the domain.
pub fn eval<G: Function + ?Sized>(g: &G, t: f64) -> Result<f64> {
    let t = g.domain().clamp_checked(t)?;
    Ok(g.value(t))
}

/// A closure wrapped as a [`Function`].
#[derive(Clone, Copy)]
pub struct FromFn<F> {
    domain: Interval,
    f: F,
}

pub fn from_fn<F: Fn(f64) -> f64>(domain: Interval, f: F) -> FromFn<F> {
    FromFn { domain, f }
}

impl<F: Fn(f64) -> f64> Function for FromFn<F> {
    fn domain(&self) -> Interval {
        self.domain
    }
    fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

/// `g - shift`.
#[derive(Debug, Clone, Copy)]
pub struct Shifted<G> {
    pub inner: G,
    pub shift: f64,
}

impl<G: Function> Function for Shifted<G> {
    fn domain(&self) -> Interval {
        self.inner.domain()
    }
    fn value(&self, t: f64) -> f64 {
        self.inner.value(t) - self.shift
    }
}

/// The residual `a - b`, on the domain of `a`.
#[derive(Debug, Clone, Copy)]
pub struct Difference<A, B> {
    pub a: A,
    pub b: B,
}

impl<A: Function, B: Function> Function for Difference<A, B> {
    fn domain(&self) -> Interval {
        self.a.domain()
    }
    fn value(&self, t: f64) -> f64 {
        self.a.value(t) - self.b.value(t)
    }
}

/// `g - lambda * d`.
#[derive(Debug, Clone, Copy)]
pub struct Axpy<G, D> {
    pub g: G,
    pub d: D,
    pub lambda: f64,
}

impl<G: Function, D: Function> Function for Axpy<G, D> {
    fn domain(&self) -> Interval {
        self.g.domain()
    }
    fn value(&self, t: f64) -> f64 {
        self.g.value(t) - self.lambda * self.d.value(t)
    }
}

/// Functions available by name from the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    Abs,
    /// `1 / (1 + c t^2)`, with `c = 25` by default.
    Runge { c: f64 },
    Sin { w: f64 },
    Cos { w: f64 },
    Exp { w: f64 },
    /// Monomial coefficients `c0 + c1 t + ...`.
    Poly(Vec<f64>),
}

impl Builtin {
    fn value(&self, t: f64) -> f64 {
        match self {
            Builtin::Abs => t.abs(),
            Builtin::Runge { c } => 1.0 / (1.0 + c * t * t),
            Builtin::Sin { w } => libm::sin(w * t),
            Builtin::Cos { w } => libm::cos(w * t),
            Builtin::Exp { w } => libm::exp(w * t),
            Builtin::Poly(c) => c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Builtin(Builtin),
    Tabulated { ts: Vec<f64>, vs: Vec<f64> },
}

/// A target function: a named builtin or tabulated data.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluableFunction {
    source: Source,
    domain: Interval,
}

impl EvaluableFunction {
    pub fn builtin(b: Builtin, domain: Interval) -> Self {
        EvaluableFunction { source: Source::Builtin(b), domain }
    }

    /// Parses a registry name: `abs`, `runge[:c]`, `sin[:w]`, `cos[:w]`,
    /// `exp[:w]` or `poly:c0,c1,...`. A parameter may carry a `pi` suffix,
    /// as in `cos:3pi`.
    pub fn parse(spec: &str, domain: Interval) -> Result<Self> {
        let spec = spec.trim();
        let (name, arg) = match spec.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (spec, None),
        };
        let scalar = |default: f64| -> Result<f64> {
            match arg {
                None => Ok(default),
                Some(a) => parse_number(a),
            }
        };
        let b = match name {
            "abs" if arg.is_none() => Builtin::Abs,
            "runge" => Builtin::Runge { c: scalar(25.0)? },
            "sin" => Builtin::Sin { w: scalar(1.0)? },
            "cos" => Builtin::Cos { w: scalar(1.0)? },
            "exp" => Builtin::Exp { w: scalar(1.0)? },
            "poly" => {
                let a = arg.ok_or_else(|| Error::BadFunctionSpec("poly needs coefficients".to_string()))?;
                let c = a.split(',').map(parse_number).collect::<Result<Vec<_>>>()?;
                if c.is_empty() {
                    return Err(Error::BadFunctionSpec("poly needs coefficients".to_string()));
                }
                Builtin::Poly(c)
            }
            "abs" => return Err(Error::BadFunctionSpec("abs takes no parameter".to_string())),
            _ => return Err(Error::UnknownFunction(name.to_string())),
        };
        Ok(Self::builtin(b, domain))
    }

    /// Piecewise-linear interpolation of `(ts[i], vs[i])`; `ts` strictly increasing.
    pub fn tabulated(ts: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if ts.len() != vs.len() {
            return Err(Error::BadSamples("abscissae and values differ in length"));
        }
        if ts.len() < 2 {
            return Err(Error::BadSamples("at least two samples are needed"));
        }
        if ts.iter().chain(vs.iter()).any(|x| !x.is_finite()) {
            return Err(Error::BadSamples("non-finite sample"));
        }
        if ts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadSamples("abscissae must be strictly increasing"));
        }
        let domain = Interval::new(ts[0], ts[ts.len() - 1])?;
        Ok(EvaluableFunction { source: Source::Tabulated { ts, vs }, domain })
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::BadFunctionSpec(format!("bad number `{s}`"));
    let v = if let Some(head) = s.strip_suffix("pi") {
        let k = if head.is_empty() { 1.0 } else { head.parse::<f64>().map_err(|_| bad())? };
        k * core::f64::consts::PI
    } else {
        s.parse::<f64>().map_err(|_| bad())?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

impl Function for EvaluableFunction {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn value(&self, t: f64) -> f64 {
        match &self.source {
            Source::Builtin(b) => b.value(t),
            Source::Tabulated { ts, vs } => {
                let n = ts.len();
                let j = ts.partition_point(|&x| x <= t).clamp(1, n - 1);
                let (t0, t1) = (ts[j - 1], ts[j]);
                let w = (t - t0) / (t1 - t0);
                vs[j - 1] + w * (vs[j] - vs[j - 1])
            }
        }
    }
}

/// Grid used to estimate extrema: `grid_size` equispaced samples, each local
/// extremum refined by golden-section search to `refine_rel * len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub grid_size: usize,
    pub refine_rel: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { grid_size: 4097, refine_rel: 1e-12 }
    }
}

impl Sampling {
    pub fn refine_tol(&self, d: Interval) -> f64 {
        self.refine_rel * d.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 33 {
            return Err(Error::InvalidParameter(format!("grid size {} is below 33", self.grid_size)));
        }
        if !(self.refine_rel > 0.0 && self.refine_rel.is_finite()) {
            return Err(Error::InvalidParameter("refinement tolerance must be positive".to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub t: f64,
    pub value: f64,
    pub kind: PeakKind,
}

/// Samples of a function on a grid, augmented with refined local extrema.
#[derive(Debug, Clone)]
pub struct Scan {
    ts: Vec<f64>,
    vs: Vec<f64>,
    peaks: Vec<Peak>,
}

impl Scan {
    pub fn new<G: Function + ?Sized>(g: &G, sampling: &Sampling) -> Scan {
        Self::with_points(g, sampling, &[])
    }

    /// Like [`Scan::new`] with `extra` abscissae (e.g. knots) added to the grid.
    pub fn with_points<G: Function + ?Sized>(g: &G, sampling: &Sampling, extra: &[f64]) -> Scan {
        let d = g.domain();
        let mut ts = d.grid(sampling.grid_size);
        if !extra.is_empty() {
            ts.extend(extra.iter().copied().filter(|&t| d.contains(t)));
            ts.sort_by(f64::total_cmp);
            ts.dedup();
        }
        let vs: Vec<f64> = ts.iter().map(|&t| g.value(t)).collect();
        let tol = sampling.refine_tol(d);
        let peaks = find_peaks(g, &ts, &vs, tol);

        let mut extra_pts: Vec<(f64, f64)> = peaks
            .iter()
            .filter(|p| ts.binary_search_by(|x| x.total_cmp(&p.t)).is_err())
            .map(|p| (p.t, p.value))
            .collect();
        let (ts, vs) = if extra_pts.is_empty() {
            (ts, vs)
        } else {
            extra_pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            extra_pts.dedup_by(|a, b| a.0 == b.0);
            merge(&ts, &vs, &extra_pts)
        };
        Scan { ts, vs, peaks }
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.ts
    }

    pub fn values(&self) -> &[f64] {
        &self.vs
    }

    pub fn peaks(&self) -> &[Peak] {
        &self.peaks
    }

    pub fn max(&self) -> f64 {
        self.vs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.vs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Estimated sup norm.
    pub fn norm(&self) -> f64 {
        self.max().max(-self.min())
    }

    /// The same scan for `g - c`.
    pub fn shifted(&self, c: f64) -> Scan {
        Scan {
            ts: self.ts.clone(),
            vs: self.vs.iter().map(|v| v - c).collect(),
            peaks: self.peaks.iter().map(|p| Peak { value: p.value - c, ..*p }).collect(),
        }
    }

    fn estimate(&self, kind: PeakKind, refine_tol: f64, grid_size: usize) -> ExtremumEstimate {
        let sel = |p: &&Peak| p.kind == kind;
        let value = match kind {
            PeakKind::Max => self.max(),
            PeakKind::Min => self.min(),
        };
        let mut argpoints: Vec<f64> = self
            .peaks
            .iter()
            .filter(sel)
            .filter(|p| (p.value - value).abs() <= refine_tol)
            .map(|p| p.t)
            .collect();
        argpoints.sort_by(f64::total_cmp);
        argpoints.dedup();
        ExtremumEstimate { value, argpoints, grid_size, refine_tol }
    }
}

fn merge(ts: &[f64], vs: &[f64], extra: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>) {
    let mut out_t = Vec::with_capacity(ts.len() + extra.len());
    let mut out_v = Vec::with_capacity(ts.len() + extra.len());
    let mut j = 0;
    for (i, &t) in ts.iter().enumerate() {
        while j < extra.len() && extra[j].0 < t {
            out_t.push(extra[j].0);
            out_v.push(extra[j].1);
            j += 1;
        }
        out_t.push(t);
        out_v.push(vs[i]);
    }
    for &(t, v) in &extra[j..] {
        out_t.push(t);
        out_v.push(v);
    }
    (out_t, out_v)
}

// Local extrema of the samples. Runs of equal values count as one extremum
// reported at both ends of the run; isolated extrema are refined by
// golden-section search on the neighbouring grid cells.
fn find_peaks<G: Function + ?Sized>(g: &G, ts: &[f64], vs: &[f64], tol: f64) -> Vec<Peak> {
    let n = ts.len();
    let mut peaks = Vec::new();
    let mut s = 0;
    while s < n {
        let mut e = s;
        while e + 1 < n && vs[e + 1] == vs[s] {
            e += 1;
        }
        let v = vs[s];
        let left = if s > 0 { Some(vs[s - 1]) } else { None };
        let right = if e + 1 < n { Some(vs[e + 1]) } else { None };
        let is_max = left.is_none_or(|l| l < v) && right.is_none_or(|r| r < v);
        let is_min = left.is_none_or(|l| l > v) && right.is_none_or(|r| r > v);
        for (flag, kind) in [(is_max, PeakKind::Max), (is_min, PeakKind::Min)] {
            if !flag {
                continue;
            }
            if s == e {
                peaks.push(refine(g, ts, s, v, kind, tol));
            } else {
                peaks.push(Peak { t: ts[s], value: v, kind });
                peaks.push(Peak { t: ts[e], value: v, kind });
            }
        }
        s = e + 1;
    }
    peaks
}

fn refine<G: Function + ?Sized>(g: &G, ts: &[f64], i: usize, v: f64, kind: PeakKind, tol: f64) -> Peak {
    let n = ts.len();
    let lo = ts[i.saturating_sub(1)];
    let hi = ts[(i + 1).min(n - 1)];
    let (t, w) = match kind {
        PeakKind::Max => golden_max(|x| g.value(x), lo, hi, tol),
        PeakKind::Min => golden_min(|x| g.value(x), lo, hi, tol),
    };
    let better = match kind {
        PeakKind::Max => w > v,
        PeakKind::Min => w < v,
    };
    if better {
        Peak { t, value: w, kind }
    } else {
        Peak { t: ts[i], value: v, kind }
    }
}

/// Estimated maximum or minimum of a function, with its attainment points.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremumEstimate {
    pub value: f64,
    pub argpoints: Vec<f64>,
    pub grid_size: usize,
    pub refine_tol: f64,
}

/// Estimated maximum and minimum of `g`. `refine_tol` is absolute.
pub fn extrema<G: Function + ?Sized>(g: &G, grid_size: usize, refine_tol: f64) -> Result<(ExtremumEstimate, ExtremumEstimate)> {
    let d = g.domain();
    let sampling = Sampling { grid_size, refine_rel: refine_tol / d.len() };
    sampling.validate()?;
    let scan = Scan::new(g, &sampling);
    Ok((
        scan.estimate(PeakKind::Max, refine_tol, grid_size),
        scan.estimate(PeakKind::Min, refine_tol, grid_size),
    ))
}

/// Subtracts `(M + m) / 2` from `g`.
pub fn recentre<G: Function>(g: G, sampling: &Sampling) -> (f64, Shifted<G>) {
    let scan = Scan::new(&g, sampling);
    let shift = 0.5 * (scan.max() + scan.min());
    (shift, Shifted { inner: g, shift })
}

/// Estimate of `inf { |t - s| : |g(t) - g(s)| >= delta }` over a uniform grid,
/// with the closest grid pair tightened by bisection. Returns the domain length
/// when no pair reaches `delta`.
pub fn inverse_modulus<G: Function + ?Sized>(g: &G, delta: f64, grid_size: usize) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".to_string()));
    }
    let d = g.domain();
    let ts = d.grid(grid_size.max(2));
    let vs: Vec<f64> = ts.iter().map(|&t| g.value(t)).collect();
    let n = ts.len();
    let mut best = d.len();
    let mut found = false;
    for i in 0..n {
        for j in i + 1..n {
            if ts[j] - ts[i] >= best {
                break;
            }
            if (vs[j] - vs[i]).abs() >= delta {
                best = ts[j] - ts[i];
                found = true;
                // A tighter partner may exist between ts[j-1] and ts[j].
                let (vi, ti) = (vs[i], ts[i]);
                let (_, hi) = bisect(|s| (g.value(s) - vi).abs() >= delta, ts[j - 1], ts[j]);
                if (g.value(hi) - vi).abs() >= delta {
                    best = best.min(hi - ti);
                }
                break;
            }
        }
        for j in (0..i).rev() {
            if ts[i] - ts[j] >= best {
                break;
            }
            if (vs[j] - vs[i]).abs() >= delta {
                best = ts[i] - ts[j];
                found = true;
                let (vi, ti) = (vs[i], ts[i]);
                let (lo, _) = bisect(|s| (g.value(s) - vi).abs() < delta, ts[j], ts[j + 1]);
                if (g.value(lo) - vi).abs() >= delta {
                    best = best.min(ti - lo);
                }
                break;
            }
        }
    }
    Ok(if found { best } else { d.len() })
}
