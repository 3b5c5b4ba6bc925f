//! Reference solvers used to check the main algorithms: discrete minimax fits
//! on a fixed grid, a grid scan for alternation, and an exhaustive search for
//! knot-move corrections.

use std::f64::consts::PI;

use alternant_core::spline_free::Direction;
use alternant_core::{AlternatingSequence, Error, Function, Interval, KnotVector, Polynomial, Result, Sign};
use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};

/// Result of a discretized minimax fit.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMinimaxResult {
    /// One polynomial per piece; a single one for polynomial fits.
    pub pieces: Vec<Polynomial>,
    /// Largest deviation on the grid.
    pub value: f64,
    pub grid: Vec<f64>,
}

impl GridMinimaxResult {
    /// Chebyshev coefficients of all pieces, concatenated.
    pub fn coefficients(&self) -> Vec<f64> {
        self.pieces.iter().flat_map(|p| p.coefficients().iter().copied()).collect()
    }
}

/// `size` Chebyshev-Lobatto points of `d`, increasing. With `size - 1`
/// divisible by `m`, the extrema of `T_m` are among them.
pub fn lobatto_grid(d: Interval, size: usize) -> Vec<f64> {
    let m = (size - 1) as f64;
    (0..size)
        .map(|k| {
            let u = -(PI * k as f64 / m).cos();
            let t = d.mid() + 0.5 * d.len() * u;
            if k == 0 {
                d.lo()
            } else if k == size - 1 {
                d.hi()
            } else {
                t
            }
        })
        .collect()
}

/// Default oracle grid size: `5040` divides by every `m <= 10`.
pub const ORACLE_GRID: usize = 5041;

fn cheb_row(d: Interval, n: usize, t: f64) -> Vec<f64> {
    let u = (2.0 * t - d.lo() - d.hi()) / d.len();
    let mut row = vec![0.0; n + 1];
    row[0] = 1.0;
    if n >= 1 {
        row[1] = u;
    }
    for j in 2..=n {
        row[j] = 2.0 * u * row[j - 1] - row[j - 2];
    }
    row
}

// Extremal sample of each maximal run of equal residual sign.
fn run_extrema(r: &[f64]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for (q, &v) in r.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        match out.last_mut() {
            Some(last) if (r[*last] > 0.0) == (v > 0.0) => {
                if v.abs() > r[*last].abs() {
                    *last = q;
                }
            }
            _ => out.push(q),
        }
    }
    out
}

/// Discrete best approximation by polynomials of degree `n` on a Lobatto grid,
/// by the multiple-exchange iteration on `n + 2` point references.
pub fn grid_minimax_poly<F: Function + ?Sized>(f: &F, n: usize, grid_size: usize) -> Result<GridMinimaxResult> {
    if grid_size < 4 * (n + 2) {
        return Err(Error::InvalidParameter(format!("grid of {grid_size} points is too small for degree {n}")));
    }
    let d = f.domain();
    let grid = lobatto_grid(d, grid_size);
    let fv: Vec<f64> = grid.iter().map(|&t| f.value(t)).collect();
    let rows: Vec<Vec<f64>> = grid.iter().map(|&t| cheb_row(d, n, t)).collect();
    let scale = fv.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let m = n + 2;
    let mut best: Option<(f64, Vec<f64>)> = None;
    // A symmetric start can leave fewer than n + 2 sign runs (odd targets);
    // later attempts start from warped, asymmetric references.
    for attempt in 0..4 {
        let warp = 1.0 + 0.15 * attempt as f64;
        let refs: Vec<usize> = (0..m)
            .map(|i| ((i as f64 / (m - 1) as f64).powf(warp) * (grid_size - 1) as f64).round() as usize)
            .collect();
        if refs.windows(2).any(|w| w[0] >= w[1]) {
            continue;
        }
        if exchange(&rows, &fv, refs, n, scale, &mut best)? {
            break;
        }
    }
    let (value, coeffs) = best.expect("at least one reference was solved");
    Ok(GridMinimaxResult { pieces: vec![Polynomial::new(d, coeffs)], value, grid })
}

// Runs the exchange from `refs`; true when it converged to a levelled reference.
fn exchange(
    rows: &[Vec<f64>],
    fv: &[f64],
    mut refs: Vec<usize>,
    n: usize,
    scale: f64,
    best: &mut Option<(f64, Vec<f64>)>,
) -> Result<bool> {
    let m = n + 2;
    let mut coeffs = vec![0.0; n + 1];
    for _ in 0..200 {
        let sol = solve_reference(rows, fv, &refs).or_else(|_| {
            let shifted: Vec<usize> = refs.iter().enumerate().map(|(i, &q)| if i + 1 < m { q + 1 } else { q }).collect();
            solve_reference(rows, fv, &shifted)
        })?;
        coeffs.copy_from_slice(&sol[..n + 1]);
        let h = sol[n + 1].abs();
        let r: Vec<f64> = rows.iter().zip(fv).map(|(row, &y)| y - dot(row, &coeffs)).collect();
        let (qmax, rmax) = r.iter().enumerate().fold((0, 0.0f64), |acc, (q, v)| if v.abs() > acc.1 { (q, v.abs()) } else { acc });
        if best.as_ref().is_none_or(|b| rmax < b.0) {
            *best = Some((rmax, coeffs.clone()));
        }
        if rmax <= 1e-13 * scale || rmax - h <= 1e-13 * scale {
            return Ok(true);
        }
        let ext = run_extrema(&r);
        if ext.len() < m {
            return Ok(false);
        }
        let pos = ext.iter().position(|&q| q == qmax).unwrap_or(0);
        let (mut lo, mut hi) = (0usize, ext.len());
        while hi - lo > m {
            let drop_left = if pos == lo {
                false
            } else if pos == hi - 1 {
                true
            } else {
                r[ext[lo]].abs() <= r[ext[hi - 1]].abs()
            };
            if drop_left {
                lo += 1;
            } else {
                hi -= 1;
            }
        }
        let next = ext[lo..hi].to_vec();
        if next == refs {
            return Ok(true);
        }
        refs = next;
    }
    Ok(true)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn solve_reference(rows: &[Vec<f64>], fv: &[f64], refs: &[usize]) -> Result<Vec<f64>> {
    let m = refs.len();
    let a = DMatrix::from_fn(m, m, |i, j| if j + 1 < m { rows[refs[i]][j] } else if i % 2 == 0 { 1.0 } else { -1.0 });
    let b = DVector::from_fn(m, |i, _| fv[refs[i]]);
    let x = a.lu().solve(&b).ok_or_else(|| Error::Precondition("singular reference system".into()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("singular reference system".into()));
    }
    Ok(x.iter().copied().collect())
}

/// Discrete best approximation by continuous splines on fixed knots, as a
/// linear program in the piece coefficients solved by adding violated grid
/// points until the grid deviation matches the program value.
pub fn grid_minimax_spline<F: Function + ?Sized>(f: &F, kv: &KnotVector, grid_size: usize) -> Result<GridMinimaxResult> {
    let np = kv.pieces();
    let per_piece: Vec<usize> = (0..np)
        .map(|i| (grid_size / np).max(4 * (kv.degrees()[i] + 2)))
        .collect();
    let global = lobatto_grid(kv.domain(), grid_size);
    let grids: Vec<Vec<f64>> = (0..np)
        .map(|i| {
            let d = kv.piece_interval(i);
            let mut g = lobatto_grid(d, per_piece[i]);
            g.extend(global.iter().filter(|&&t| d.lo() < t && t < d.hi()));
            g.sort_by(f64::total_cmp);
            g.dedup();
            g
        })
        .collect();
    let per_piece: Vec<usize> = grids.iter().map(Vec::len).collect();
    let fvals: Vec<Vec<f64>> = grids.iter().map(|g| g.iter().map(|&t| f.value(t)).collect()).collect();
    let rows: Vec<Vec<Vec<f64>>> = (0..np)
        .map(|i| grids[i].iter().map(|&t| cheb_row(kv.piece_interval(i), kv.degrees()[i], t)).collect())
        .collect();
    let scale = fvals.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let h = lp.add_var(1.0, (0.0, f64::INFINITY));
    let vars: Vec<Vec<minilp::Variable>> = (0..np)
        .map(|i| (0..=kv.degrees()[i]).map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect())
        .collect();
    let expr = |i: usize, row: &[f64], hc: f64| {
        let mut e = LinearExpr::empty();
        for (v, &c) in vars[i].iter().zip(row) {
            e.add(*v, c);
        }
        e.add(h, hc);
        e
    };
    for i in 1..np {
        let x = kv.knots()[i];
        let left = cheb_row(kv.piece_interval(i - 1), kv.degrees()[i - 1], x);
        let right = cheb_row(kv.piece_interval(i), kv.degrees()[i], x);
        let mut e = LinearExpr::empty();
        for (v, &c) in vars[i - 1].iter().zip(&left) {
            e.add(*v, c);
        }
        for (v, &c) in vars[i].iter().zip(&right) {
            e.add(*v, -c);
        }
        lp.add_constraint(e, ComparisonOp::Eq, 0.0);
    }
    let mut active: Vec<Vec<bool>> = per_piece.iter().map(|&m| vec![false; m]).collect();
    for i in 0..np {
        let m = per_piece[i];
        let step = (m / (8 * (kv.degrees()[i] + 2))).max(1);
        for q in (0..m).step_by(step).chain([m - 1]) {
            if !active[i][q] {
                active[i][q] = true;
                lp.add_constraint(expr(i, &rows[i][q], -1.0), ComparisonOp::Le, fvals[i][q]);
                lp.add_constraint(expr(i, &rows[i][q], 1.0), ComparisonOp::Ge, fvals[i][q]);
            }
        }
    }
    let lp_err = |e: minilp::Error| Error::Precondition(format!("linear program failed: {e}"));
    let mut sol = lp.solve().map_err(lp_err)?;
    let mut value = f64::INFINITY;
    let mut pieces = Vec::new();
    for _ in 0..200 {
        let coeffs: Vec<Vec<f64>> = vars.iter().map(|vs| vs.iter().map(|v| *sol.var_value(*v)).collect()).collect();
        let hv = *sol.var_value(h);
        let mut worst = Vec::new();
        value = 0.0;
        for i in 0..np {
            let r: Vec<f64> = rows[i].iter().zip(&fvals[i]).map(|(row, &y)| y - dot(row, &coeffs[i])).collect();
            for (q, v) in r.iter().enumerate() {
                value = value.max(v.abs());
                let local = (q == 0 || r[q - 1].abs() <= v.abs()) && (q + 1 == r.len() || r[q + 1].abs() <= v.abs());
                if local && v.abs() > hv + 1e-12 * scale && !active[i][q] {
                    worst.push((i, q));
                }
            }
        }
        pieces = (0..np).map(|i| Polynomial::new(kv.piece_interval(i), coeffs[i].clone())).collect();
        if worst.is_empty() {
            break;
        }
        for (i, q) in worst {
            active[i][q] = true;
            sol = sol.add_constraint(expr(i, &rows[i][q], -1.0), ComparisonOp::Le, fvals[i][q]).map_err(lp_err)?;
            sol = sol.add_constraint(expr(i, &rows[i][q], 1.0), ComparisonOp::Ge, fvals[i][q]).map_err(lp_err)?;
        }
    }
    // The simplex works to an absolute 1e-8; re-level on the peaks it left tight.
    for _ in 0..3 {
        let Some((p2, v2)) = polish(kv, &rows, &fvals, &pieces, value, scale) else { break };
        if v2 >= value {
            break;
        }
        pieces = p2;
        value = v2;
    }
    Ok(GridMinimaxResult { pieces, value, grid: grids.concat() })
}

fn polish(
    kv: &KnotVector,
    rows: &[Vec<Vec<f64>>],
    fvals: &[Vec<f64>],
    pieces: &[Polynomial],
    value: f64,
    scale: f64,
) -> Option<(Vec<Polynomial>, f64)> {
    let np = kv.pieces();
    let offs: Vec<usize> = (0..np).scan(0, |acc, i| {
        let o = *acc;
        *acc += kv.degrees()[i] + 1;
        Some(o)
    })
    .collect();
    let nvar = offs[np - 1] + kv.degrees()[np - 1] + 2;
    let mut eqs: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..np {
        let c = pieces[i].coefficients();
        let r: Vec<f64> = rows[i].iter().zip(&fvals[i]).map(|(row, &y)| y - dot(row, c)).collect();
        for (q, v) in r.iter().enumerate() {
            let local = (q == 0 || r[q - 1].abs() <= v.abs()) && (q + 1 == r.len() || r[q + 1].abs() < v.abs());
            if local && v.abs() >= value - 1e-6 * scale {
                let mut a = vec![0.0; nvar];
                a[offs[i]..offs[i] + rows[i][q].len()].copy_from_slice(&rows[i][q]);
                a[nvar - 1] = v.signum();
                eqs.push((a, fvals[i][q]));
            }
        }
    }
    for i in 1..np {
        let x = kv.knots()[i];
        let mut a = vec![0.0; nvar];
        let left = cheb_row(kv.piece_interval(i - 1), kv.degrees()[i - 1], x);
        let right = cheb_row(kv.piece_interval(i), kv.degrees()[i], x);
        a[offs[i - 1]..offs[i - 1] + left.len()].copy_from_slice(&left);
        for (k, v) in right.iter().enumerate() {
            a[offs[i] + k] -= v;
        }
        eqs.push((a, 0.0));
    }
    if eqs.len() < nvar {
        return None;
    }
    let a = DMatrix::from_fn(eqs.len(), nvar, |r, c| eqs[r].0[c]);
    let b = DVector::from_fn(eqs.len(), |r, _| eqs[r].1);
    let x = a.svd(true, true).solve(&b, 1e-13).ok()?;
    let new: Vec<Polynomial> = (0..np)
        .map(|i| Polynomial::new(kv.piece_interval(i), x.as_slice()[offs[i]..offs[i] + kv.degrees()[i] + 1].to_vec()))
        .collect();
    if new.windows(2).zip(&kv.knots()[1..]).any(|(w, &t)| (w[0].eval(t) - w[1].eval(t)).abs() > 1e-12 * scale) {
        return None;
    }
    let v = (0..np)
        .flat_map(|i| {
            let c = new[i].coefficients().to_vec();
            rows[i].iter().zip(&fvals[i]).map(move |(row, &y)| (y - dot(row, &c)).abs())
        })
        .fold(0.0, f64::max);
    Some((new, v))
}

/// Result of [`scan_alternance`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScannedAlternance {
    pub k: usize,
    pub eps: Sign,
    pub points: Vec<f64>,
    pub big_m: f64,
}

/// Greedy left-to-right scan for a longest sign-alternating point set on
/// which `|g| >= beta M - tol`. Local extrema of the samples are polished by
/// ternary search on `g` before the comparison.
pub fn scan_alternance<G: Function + ?Sized>(g: &G, beta: f64, grid_size: usize, tol: f64) -> Result<ScannedAlternance> {
    let d = g.domain();
    let ts = d.grid(grid_size);
    let vs: Vec<f64> = ts.iter().map(|&t| g.value(t)).collect();
    let n = ts.len();
    let mut cands: Vec<(f64, f64)> = Vec::new();
    for q in 0..n {
        for s in [1.0, -1.0] {
            let v = s * vs[q];
            let left_ok = q == 0 || s * vs[q - 1] <= v;
            let right_ok = q + 1 == n || s * vs[q + 1] <= v;
            if !(left_ok && right_ok) {
                continue;
            }
            let (lo, hi) = (ts[q.saturating_sub(1)], ts[(q + 1).min(n - 1)]);
            let (t, _) = ternary_max(|t| s * g.value(t), lo, hi);
            let (t, v) = if s * g.value(t) > v { (t, g.value(t)) } else { (ts[q], vs[q]) };
            cands.push((t, v));
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    let big_m = cands.iter().fold(0.0f64, |m, c| m.max(c.1.abs()));
    if big_m <= tol {
        return Err(Error::DegenerateResidual(big_m));
    }
    let thr = beta * big_m - tol;
    let mut points: Vec<f64> = Vec::new();
    let mut signs: Vec<f64> = Vec::new();
    for &(t, v) in &cands {
        if v.abs() < thr {
            continue;
        }
        let s = v.signum();
        if signs.last() != Some(&s) {
            points.push(t);
            signs.push(s);
        }
    }
    Ok(ScannedAlternance { k: points.len() - 1, eps: Sign::of(signs[0]), points, big_m })
}

fn ternary_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    for _ in 0..100 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if f(a) < f(b) {
            lo = a;
        } else {
            hi = b;
        }
        if hi - lo <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, f(t))
}

/// Exhaustive search for knot-move corrections.
///
/// Each moving piece is either zero or `±prod (r - t)` with at most `n_q`
/// roots taken from a lattice of candidate points: one per gap between the
/// alternation points and knots of the piece, plus the piece ends. Positive
/// rescaling of the pieces makes continuity a matter of equal signs at the
/// shared knots, so only signs are compared.
pub fn brute_force_delta_exists(seq: &AlternatingSequence, kv: &KnotVector, i: usize, s: Sign, dir: Direction) -> bool {
    let x = kv.knots();
    let p1 = kv.pieces();
    let family: Vec<usize> = match dir {
        Direction::Left => (i..p1).collect(),
        Direction::Right => (0..i).collect(),
    };
    let on_moving_side = |t: f64| match dir {
        Direction::Left => t >= x[i],
        Direction::Right => t <= x[i],
    };
    // (point, required sign, strict)
    let mut checks: Vec<Vec<(f64, f64, bool)>> = vec![Vec::new(); p1];
    for (j, &(a, b)) in seq.pairs.iter().enumerate() {
        let sj = seq.sign(j).value();
        let knots_in: Vec<usize> = (1..x.len() - 1).filter(|&k| a <= x[k] && x[k] <= b).collect();
        if knots_in.contains(&i) {
            continue;
        }
        if knots_in.is_empty() {
            for t in [a, b] {
                if on_moving_side(t) {
                    checks[kv.piece_of(t)].push((t, sj, true));
                }
            }
        } else {
            for &k in &knots_in {
                for q in [k - 1, k] {
                    if family.contains(&q) {
                        checks[q].push((x[k], sj, false));
                    }
                }
            }
        }
    }
    let candidates: Vec<Vec<Candidate>> = family
        .iter()
        .map(|&q| piece_candidates(kv, q, seq, &checks[q]))
        .collect();
    let adjacent = match dir {
        Direction::Left => 0,
        Direction::Right => family.len() - 1,
    };
    let moving_end = |c: &Candidate| match dir {
        Direction::Left => c.at_lo,
        Direction::Right => c.at_hi,
    };
    // Walk the pieces in order, matching signs at shared knots.
    fn walk(cands: &[Vec<Candidate>], k: usize, prev_hi: Option<f64>, chosen: &mut Vec<usize>, accept: &dyn Fn(&[usize]) -> bool) -> bool {
        if k == cands.len() {
            return accept(chosen);
        }
        for (c, cand) in cands[k].iter().enumerate() {
            if let Some(ph) = prev_hi {
                if sign_of(ph) != sign_of(cand.at_lo) {
                    continue;
                }
            }
            chosen.push(c);
            if walk(cands, k + 1, Some(cand.at_hi), chosen, accept) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    let accept = |chosen: &[usize]| {
        let c = &candidates[adjacent][chosen[adjacent]];
        s.value() * moving_end(c) > 0.0
    };
    walk(&candidates, 0, None, &mut Vec::new(), &accept)
}

// `signum` maps -0.0 to -1, and a root on a knot evaluates to -0.0.
fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    at_lo: f64,
    at_hi: f64,
}

fn piece_candidates(kv: &KnotVector, q: usize, seq: &AlternatingSequence, checks: &[(f64, f64, bool)]) -> Vec<Candidate> {
    let (lo, hi) = (kv.knots()[q], kv.knots()[q + 1]);
    let mut events: Vec<f64> = vec![lo, hi];
    for &(a, b) in &seq.pairs {
        for t in [a, b] {
            if lo < t && t < hi {
                events.push(t);
            }
        }
    }
    events.sort_by(f64::total_cmp);
    events.dedup();
    let mut lattice: Vec<f64> = events.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    lattice.push(lo);
    lattice.push(hi);
    let n = kv.degrees()[q];
    let mut out = vec![Candidate { at_lo: 0.0, at_hi: 0.0 }];
    let mut subset: Vec<usize> = Vec::new();
    fn subsets(m: usize, n: usize, start: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        visit(cur);
        if cur.len() == n {
            return;
        }
        for r in start..m {
            cur.push(r);
            subsets(m, n, r + 1, cur, visit);
            cur.pop();
        }
    }
    subsets(lattice.len(), n, 0, &mut subset, &mut |roots: &[usize]| {
        let eval = |t: f64| roots.iter().map(|&r| lattice[r] - t).product::<f64>();
        for sign in [1.0, -1.0] {
            let ok = checks.iter().all(|&(t, sj, strict)| {
                let v = sign * sj * eval(t);
                if strict { v > 0.0 } else { v >= 0.0 }
            });
            if ok {
                out.push(Candidate { at_lo: sign * eval(lo), at_hi: sign * eval(hi) });
            }
        }
    });
    out
}
