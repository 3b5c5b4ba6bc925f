//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! failure status if any criterion fails. Randomized parts read their seed from
//! ALTERNANT_SEED.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use alternant::oracle::{brute_force_delta_exists, grid_minimax_poly, scan_alternance, ORACLE_GRID};
use alternant_core::alternance::{alternance_from_scan, default_tol};
use alternant_core::poly_approx::{gamma_k_bound, reduction_rate_bound};
use alternant_core::scalar::{from_fn, Difference, Scan};
use alternant_core::spline_fixed::{build_intermediary_points, delta_from_xi, spline_step, IntermediaryOutcome};
use alternant_core::spline_free::{
    check_w_minimality, descend, existence, theta, exists_delta_left, knot_move, lipschitz_probe, DeltaFamily, Direction,
    FreeKnotConfig, FreeKnotParams, Verdict,
};
use alternant_core::{
    build_beta_alternance, count_k, fixed_knot_fit, recentre, remez_fit, AlternatingSequence, FitParams, FitReport,
    FitStatus, Function, Interval, KnotVector, Polynomial, Sampling, Sign, Spline,
};
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn seed() -> u64 {
    std::env::var("ALTERNANT_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(20240607)
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

fn pick(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> usize {
    lo + (rng.next_u64() % (hi - lo + 1) as u64) as usize
}

fn sym() -> Interval {
    Interval::new(-1.0, 1.0).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

type Target = (&'static str, Box<dyn Function>);

fn test_functions() -> Vec<Target> {
    vec![
        ("t", Box::new(from_fn(sym(), |t| t))),
        ("cos(3 pi t)", Box::new(from_fn(sym(), |t: f64| (3.0 * PI * t).cos()))),
        ("runge", Box::new(from_fn(sym(), |t: f64| 1.0 / (1.0 + 25.0 * t * t)))),
        ("|t| - 1/2", Box::new(from_fn(sym(), |t: f64| t.abs() - 0.5))),
    ]
}

fn check_invariants(g: &dyn Function, s: &AlternatingSequence, tol: f64) -> Result<(), String> {
    let d = g.domain();
    let (lvl, m) = (s.level, s.big_m);
    ensure(d.lo() <= s.pairs[0].0 && s.pairs[s.k()].1 <= d.hi(), || "pairs leave the interval".into())?;
    for (i, &(a, b)) in s.pairs.iter().enumerate() {
        ensure(a <= b, || format!("pair {i} reversed"))?;
        if i + 1 < s.pairs.len() {
            ensure(b < s.pairs[i + 1].0, || format!("pairs {i} and {} overlap", i + 1))?;
        }
        let sg = s.sign(i).value();
        for t in [a, b] {
            ensure(sg * g.value(t) >= lvl - tol, || format!("pair {i} end {t} below the level"))?;
        }
        for k in 0..=200 {
            let t = a + (b - a) * k as f64 / 200.0;
            let v = sg * g.value(t);
            ensure(v > -lvl - tol && v <= m + tol, || format!("pair {i} leaves (-bM, M] at {t}"))?;
        }
    }
    for t in d.grid(20001) {
        if s.pairs.iter().any(|&(a, b)| a <= t && t <= b) {
            continue;
        }
        ensure(g.value(t).abs() < lvl + tol, || format!("|g({t})| reaches the level outside the pairs"))?;
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let tol = 1e-8;
    let mut slowest = Duration::ZERO;
    for (name, f) in test_functions() {
        let (_, g) = recentre(&*f, &Sampling::default());
        for beta in [0.5, 0.9, 1.0] {
            let start = Instant::now();
            let s = build_beta_alternance(&g, beta, tol).map_err(|e| format!("{name}, beta {beta}: {e}"))?;
            check_invariants(&g, &s, tol).map_err(|e| format!("{name}, beta {beta}: {e}"))?;
            let elapsed = start.elapsed();
            slowest = slowest.max(elapsed);
            ensure(elapsed < Duration::from_secs(1), || format!("{name}, beta {beta}: took {elapsed:?}"))?;
            let scan = scan_alternance(&g, beta, 20001, tol).map_err(|e| e.to_string())?;
            ensure(scan.k == s.k() && scan.eps == s.eps, || {
                format!("{name}, beta {beta}: k/eps {}/{:?} vs scan {}/{:?}", s.k(), s.eps, scan.k, scan.eps)
            })?;
        }
    }
    Ok(format!("4 functions x 3 betas, slowest {slowest:.2?}"))
}

fn criterion_2() -> Outcome {
    for (name, f) in test_functions() {
        let (_, g) = recentre(&*f, &Sampling::default());
        let ks: Vec<usize> = [0.3, 0.6, 0.9, 0.99]
            .iter()
            .map(|&b| count_k(&g, b, 1e-8))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure(ks.windows(2).all(|w| w[0] >= w[1]), || format!("{name}: k = {ks:?}"))?;
    }
    Ok("k(0.3) >= k(0.6) >= k(0.9) >= k(0.99) on all functions".into())
}

fn criterion_3() -> Outcome {
    for r in [0.1f64, 1.0, 2.0] {
        let want = [(2, r * r), (3, 3.0 * r * r * r), (4, 9.0 * r.powi(4)), (5, 45.0 * r.powi(5))];
        for (k, w) in want {
            let got = gamma_k_bound(k, r).map_err(|e| e.to_string())?;
            ensure((got - w).abs() <= 4.0 * f64::EPSILON * w, || format!("Gamma_{k}({r}) = {got}, want {w}"))?;
        }
    }
    Ok("Gamma_2..5 at r = 0.1, 1, 2".into())
}

// Remez runs reused by criteria 4 to 6.
struct Run {
    name: String,
    f: Box<dyn Function>,
    n: usize,
    params: FitParams,
    report: FitReport,
    elapsed: Duration,
}

fn tight() -> FitParams {
    FitParams { beta_plus: 1.0 - 1e-9, max_iter: 2000, ..FitParams::default() }
}

fn remez_runs() -> Vec<Run> {
    let mut cases: Vec<(String, Box<dyn Function>, usize, FitParams)> = Vec::new();
    for n in 1..=6 {
        let f = from_fn(sym(), move |t: f64| t.powi(n as i32 + 1));
        cases.push((format!("t^{}", n + 1), Box::new(f), n, tight()));
    }
    let unit_iv = Interval::new(0.0, 1.0).unwrap();
    cases.push(("t^2 on [0,1]".into(), Box::new(from_fn(unit_iv, |t| t * t)), 1, tight()));
    cases.push(("|t|".into(), Box::new(from_fn(sym(), f64::abs)), 1, tight()));
    cases.push(("runge".into(), Box::new(from_fn(sym(), |t: f64| 1.0 / (1.0 + 25.0 * t * t))), 6, FitParams::default()));
    cases.push(("exp".into(), Box::new(from_fn(sym(), f64::exp)), 4, FitParams::default()));
    cases.push(("sin(3t)".into(), Box::new(from_fn(sym(), |t: f64| (3.0 * t).sin())), 3, FitParams::default()));
    cases
        .into_iter()
        .map(|(name, f, n, params)| {
            let start = Instant::now();
            let report = remez_fit(&*f, n, &params).expect("remez_fit runs");
            Run { name, f, n, params, report, elapsed: start.elapsed() }
        })
        .collect()
}

fn criterion_4(runs: &[Run]) -> Outcome {
    let mut steps = 0;
    for r in runs {
        for (j, s) in r.report.steps.iter().enumerate() {
            let len = r.f.domain().len();
            let bound = reduction_rate_bound(s.k, s.mu, s.beta, len);
            ensure((bound - s.rate_bound).abs() <= 1e-15, || format!("{}: step {j} records a stale rate bound", r.name))?;
            let ratio = s.norm_after / s.norm_before;
            ensure(ratio <= bound + 1e-9, || format!("{}: step {j} ratio {ratio} above bound {bound}", r.name))?;
            ensure(s.safe_norm <= s.safe_bound + 1e-9, || {
                format!("{}: step {j} safe step {} above {}", r.name, s.safe_norm, s.safe_bound)
            })?;
            steps += 1;
        }
    }
    Ok(format!("{steps} steps over {} runs", runs.len()))
}

fn criterion_5(runs: &[Run]) -> Outcome {
    let by = |name: &str| runs.iter().find(|r| r.name == name).unwrap();
    for n in 1..=6 {
        let r = by(&format!("t^{}", n + 1));
        let want = 0.5f64.powi(n as i32);
        let oracle = grid_minimax_poly(&*r.f, n, ORACLE_GRID).map_err(|e| e.to_string())?.value;
        ensure((oracle - want).abs() <= 1e-7, || format!("n = {n}: oracle {oracle}, want {want}"))?;
        let fin = r.report.final_norm;
        ensure(r.report.status == FitStatus::BetaPlusOptimal, || format!("n = {n}: status {:?}", r.report.status))?;
        ensure(r.params.beta_plus * fin <= oracle + 1e-12 && oracle <= fin + 1e-12, || {
            format!("n = {n}: sandwich fails, final {fin}, oracle {oracle}")
        })?;
    }
    let sq = by("t^2 on [0,1]");
    ensure((sq.report.final_norm - 0.125).abs() <= 1e-8, || format!("t^2: value {}", sq.report.final_norm))?;
    let alt = sq.report.alternation.as_ref().ok_or("t^2: no alternation")?;
    let mids: Vec<f64> = alt.pairs.iter().map(|&(a, b)| 0.5 * (a + b)).collect();
    ensure(mids.len() == 3 && mids.iter().zip([0.0, 0.5, 1.0]).all(|(m, w)| (m - w).abs() <= 1e-5), || {
        format!("t^2: alternation at {mids:?}")
    })?;
    let ab = by("|t|");
    ensure((ab.report.final_norm - 0.5).abs() <= 1e-6, || format!("|t|: value {}", ab.report.final_norm))?;
    let slowest = runs.iter().take(8).map(|r| r.elapsed).max().unwrap();
    ensure(slowest < Duration::from_secs(5), || format!("slowest run took {slowest:?}"))?;
    Ok(format!("benchmarks match, slowest {slowest:.2?}"))
}

fn criterion_6(runs: &[Run]) -> Outcome {
    let mut checked = 0;
    for r in runs.iter().filter(|r| r.report.status == FitStatus::BetaPlusOptimal) {
        let g = Difference { a: &r.report.polynomial, b: &*r.f };
        let scan = scan_alternance(&g, r.params.beta_plus, 20001, default_tol(r.report.final_norm))
            .map_err(|e| format!("{}: {e}", r.name))?;
        let own = r.report.alternation.as_ref().map_or(0, |s| s.pairs.len());
        ensure(own >= r.n + 2 && scan.k + 1 >= r.n + 2, || {
            format!("{}: {own} pairs, scan finds {} points, need {}", r.name, scan.k + 1, r.n + 2)
        })?;
        checked += 1;
    }
    Ok(format!("{checked} certified fits carry n + 2 points"))
}

fn random_kv(rng: &mut ChaCha8Rng, d: Interval, p: usize, max_deg: usize) -> KnotVector {
    loop {
        let mut x: Vec<f64> = (0..p).map(|_| uniform(rng, d.lo(), d.hi())).collect();
        x.sort_by(f64::total_cmp);
        let mut all = vec![d.lo()];
        all.extend(&x);
        all.push(d.hi());
        if all.windows(2).all(|w| w[1] - w[0] > 0.08 * d.len()) {
            let degs = (0..=p).map(|_| pick(rng, 1, max_deg)).collect();
            return KnotVector::new(all, degs).unwrap();
        }
    }
}

fn random_spline(rng: &mut ChaCha8Rng, kv: &KnotVector, amp: f64) -> Spline {
    let x = kv.knots();
    let vals: Vec<f64> = x.iter().map(|_| uniform(rng, -amp, amp)).collect();
    let pieces = (0..kv.pieces())
        .map(|i| {
            let d = kv.piece_interval(i);
            let mut p = Polynomial::linear_interpolant(d, vals[i], vals[i + 1]).with_degree_bound(kv.degrees()[i]);
            if kv.degrees()[i] >= 2 {
                let mut bump = Polynomial::constant(d, uniform(rng, -amp, amp)).mul_linear(x[i]).mul_linear(x[i + 1]);
                if kv.degrees()[i] >= 3 {
                    bump = bump.add_scaled(&bump.mul_linear(d.mid()).scale(uniform(rng, -2.0, 2.0)), 1.0).unwrap();
                }
                p = p.add_scaled(&bump, 1.0).unwrap();
            }
            p.with_degree_bound(kv.degrees()[i])
        })
        .collect();
    Spline::new(kv.clone(), pieces).unwrap()
}

fn sup_norm(g: &dyn Function, kv: &KnotVector) -> f64 {
    Scan::with_points(g, &Sampling::default(), kv.knots()).norm()
}

fn analyse(sigma: &Spline, f: &dyn Function, sampling: &Sampling) -> Result<(Spline, AlternatingSequence), String> {
    let kv = sigma.knot_vector();
    let g = Difference { a: sigma, b: f };
    let scan = Scan::with_points(&g, sampling, kv.knots());
    let shift = 0.5 * (scan.max() + scan.min());
    let centred = sigma.add_constant(-shift);
    let g = Difference { a: &centred, b: f };
    let scan = Scan::with_points(&g, sampling, kv.knots());
    let m = scan.norm();
    let seq = alternance_from_scan(&g, &scan, 1.0, 1e-9 * m).map_err(|e| e.to_string())?;
    Ok((centred, seq))
}

fn valid_xi(seq: &AlternatingSequence, kv: &KnotVector, xi: &[f64], counts: &[usize]) -> Result<(), String> {
    ensure(xi.len() == seq.k(), || format!("{} roots for k = {}", xi.len(), seq.k()))?;
    for (j, &r) in xi.iter().enumerate() {
        ensure(seq.pairs[j].1 < r && r < seq.pairs[j + 1].0, || format!("root {j} = {r} not between its pairs"))?;
    }
    let mut per = vec![0; kv.pieces()];
    for &r in xi {
        per[kv.piece_of(r)] += 1;
    }
    ensure(per == counts, || format!("counts {counts:?} but roots fall as {per:?}"))?;
    ensure(counts.iter().zip(kv.degrees()).all(|(c, n)| c <= n), || format!("counts {counts:?} exceed degrees"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed() ^ 7);
    let sampling = Sampling::default();
    let d = Interval::new(0.0, 1.0).unwrap();
    let (mut certs, mut steps) = (0, 0);
    for inst in 0..50 {
        let p = pick(&mut rng, 1, 3);
        let kv = random_kv(&mut rng, d, p, 3);
        let (sigma, f): (Spline, Box<dyn Function>) = if inst % 2 == 0 {
            let a: Vec<(f64, f64, f64)> =
                (0..4).map(|_| (uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, 1.0, 12.0), uniform(&mut rng, 0.0, PI))).collect();
            let f = from_fn(d, move |t: f64| a.iter().map(|&(c, w, ph)| c * (w * t + ph).sin()).sum());
            (Spline::linear_interpolant(&f, &kv), Box::new(f))
        } else {
            // s* plus theta T_{n+1} on one piece, constant continuation elsewhere:
            // s* is optimal and the counting certificate holds.
            let s_star = random_spline(&mut rng, &kv, 1.0);
            let i0 = pick(&mut rng, 0, p);
            let iv = kv.piece_interval(i0);
            let m = kv.degrees()[i0] as f64 + 1.0;
            let theta = uniform(&mut rng, 0.05, 0.5);
            let s2 = s_star.clone();
            let f = from_fn(d, move |t: f64| {
                let u = ((2.0 * t - iv.lo() - iv.hi()) / iv.len()).clamp(-1.0, 1.0);
                s2.value(t) + theta * (m * u.acos()).cos()
            });
            (s_star, Box::new(f))
        };
        let (sigma, seq) = analyse(&sigma, &*f, &sampling)?;
        match build_intermediary_points(&seq, &kv) {
            IntermediaryOutcome::Points(ip) => {
                ensure(inst % 2 == 0, || format!("instance {inst}: constructed optimum gave roots"))?;
                valid_xi(&seq, &kv, &ip.xi, &ip.counts).map_err(|e| format!("instance {inst}: {e}"))?;
                let delta = delta_from_xi(&ip, seq.eps, &kv).map_err(|e| e.to_string())?;
                let before = Scan::with_points(&Difference { a: &sigma, b: &*f }, &sampling, kv.knots()).norm();
                let (_, after) =
                    spline_step(&sigma, &*f, &delta, &seq, &sampling).map_err(|e| format!("instance {inst}: {e}"))?;
                ensure(after < before, || format!("instance {inst}: step {before} -> {after}"))?;
                steps += 1;
            }
            IntermediaryOutcome::Certificate { .. } => {
                let base = sup_norm(&Difference { a: &sigma, b: &*f }, &kv);
                for _ in 0..200 {
                    let delta = random_spline(&mut rng, &kv, 1.0);
                    let lambda = base * 10f64.powf(uniform(&mut rng, -6.0, -1.0));
                    let moved = sigma.add_scaled(&delta, lambda).unwrap();
                    let v = sup_norm(&Difference { a: &moved, b: &*f }, &kv);
                    ensure(v >= base - 1e-9, || format!("instance {inst}: perturbation improves {base} to {v}"))?;
                }
                certs += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{certs} certificates, {steps} decreasing steps, {elapsed:.2?}"))
}

fn criterion_8() -> Outcome {
    let f = from_fn(sym(), f64::abs);
    let params = FreeKnotParams::default();
    let cfg = FreeKnotConfig::new(sym(), &[0.3], vec![1, 1]).map_err(|e| e.to_string())?;
    let r = check_w_minimality(&f, &cfg, &params).map_err(|e| e.to_string())?;
    ensure(matches!(r.verdict, Verdict::ViolatedAt { knot: 1, .. }), || format!("knot 0.3: verdict {:?}", r.verdict))?;
    let d = descend(&f, &cfg, &params, 30).map_err(|e| e.to_string())?;
    let last = *d.trajectory.last().unwrap();
    ensure(d.trajectory.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)), || format!("trajectory {:?}", d.trajectory))?;
    ensure(last < 0.02 && d.moves <= 30, || format!("theta {last} after {} moves", d.moves))?;
    let zero = FreeKnotConfig::new(sym(), &[0.0], vec![1, 1]).unwrap();
    let z = check_w_minimality(&f, &zero, &params).map_err(|e| e.to_string())?;
    ensure(matches!(z.verdict, Verdict::Degenerate | Verdict::NecessaryConditionHolds), || {
        format!("knot 0: verdict {:?}", z.verdict)
    })?;
    Ok(format!("theta {:.4} -> {last:.2e} in {} moves; knot 0 {}", d.trajectory[0], d.moves, z.verdict.as_str()))
}

// Alternation points with random signs, one of them on knot `i`.
fn synthetic_instance(rng: &mut ChaCha8Rng) -> (AlternatingSequence, KnotVector, usize) {
    let d = Interval::new(0.0, 1.0).unwrap();
    let p = pick(rng, 1, 2);
    let kv = random_kv(rng, d, p, 2);
    let i = pick(rng, 1, p);
    let x = kv.knots().to_vec();
    let mut pts: Vec<f64> = vec![x[i]];
    for _ in 0..pick(rng, 0, 6) {
        let t = if unit(rng) < 0.2 { x[pick(rng, 0, p + 1)] } else { (uniform(rng, 0.0, 1.0) * 200.0).round() / 200.0 };
        pts.push(t);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let eps = if unit(rng) < 0.5 { Sign::Plus } else { Sign::Minus };
    let seq = AlternatingSequence { beta: 1.0, eps, level: 1.0, big_m: 1.0, pairs: pts.iter().map(|&t| (t, t)).collect() };
    (seq, kv, i)
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed() ^ 9);
    let mut compared = 0;
    let mut disagreements = Vec::new();
    let mut compare = |seq: &AlternatingSequence, kv: &KnotVector, i: usize, s: Sign, label: &str| {
        for dir in [Direction::Left, Direction::Right] {
            let a = existence(seq, kv, i, s, dir).exists();
            let b = brute_force_delta_exists(seq, kv, i, s, dir);
            compared += 1;
            if a != b {
                disagreements.push(format!("{label} knot {i} {}: automaton {a}, oracle {b}", dir.as_str()));
                if std::env::var("ACC_DEBUG").is_ok() {
                    eprintln!("{seq:?} {:?} {:?} s {s:?}", kv.knots(), kv.degrees());
                }
            }
        }
    };
    for inst in 0..300 {
        let (seq, kv, i) = synthetic_instance(&mut rng);
        let j = seq.pairs.iter().position(|&(a, _)| a == kv.knots()[i]).unwrap();
        compare(&seq, &kv, i, seq.sign(j), &format!("synthetic {inst}"));
    }
    let d = Interval::new(0.0, 1.0).unwrap();
    let params = FitParams { beta_plus: 1.0 - 1e-8, max_iter: 3000, ..FitParams::default() };
    for inst in 0..12 {
        let p = pick(&mut rng, 1, 2);
        let kv = random_kv(&mut rng, d, p, 2);
        let (w, ph) = (uniform(&mut rng, 2.0, 9.0), uniform(&mut rng, 0.0, PI));
        let f = from_fn(d, move |t: f64| (w * t + ph).sin() + 0.3 * t * t);
        let fit = fixed_knot_fit(&f, &kv, &params).map_err(|e| e.to_string())?;
        if fit.final_norm <= 1e-9 {
            continue;
        }
        let (sigma, seq) = analyse(&fit.spline, &f, &params.sampling)?;
        for i in 1..kv.knots().len() - 1 {
            let t = kv.knots()[i];
            let dev = sigma.value(t) - f.value(t);
            if dev.abs() >= seq.big_m * (1.0 - 1e-6) {
                compare(&seq, &kv, i, Sign::of(dev), &format!("fitted {inst}"));
            }
        }
    }
    ensure(disagreements.is_empty(), || format!("{} of {compared}: {}", disagreements.len(), disagreements.join("; ")))?;
    Ok(format!("{compared} verdicts, zero disagreements"))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed() ^ 10);
    let sampling = Sampling::default();
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 10 {
        let d = Interval::new(0.0, 1.0).unwrap();
        let kv = random_kv(&mut rng, d, 1, 3);
        let x1 = kv.knots()[1];
        let sigma = random_spline(&mut rng, &kv, 1.0);
        let (dl, dr) = sigma.knot_slopes(1);
        if (dl - dr).abs() < 0.1 {
            continue;
        }
        let s = Sign::of(dl - dr);
        // The knot is an extreme point of sign s; a few further points to its right.
        let mut pairs = vec![(x1, x1)];
        let mut t = x1;
        for _ in 0..pick(&mut rng, 0, kv.degrees()[1]) {
            t += uniform(&mut rng, 0.02, (1.0 - t) / 2.0);
            pairs.push((t, t));
        }
        let seq = AlternatingSequence { beta: 1.0, eps: s, level: 1.0, big_m: 1.0, pairs };
        let Some(fam): Option<DeltaFamily> = exists_delta_left(&seq, &kv, 1, s) else { continue };
        let sig2 = sigma.clone();
        let f = from_fn(d, move |t| sig2.value(t));
        let slope = alternant_core::spline_free::displacement_slope(&sigma, &fam).map_err(|e| e.to_string())?;
        let h = 1e-6 / slope.abs().max(1.0);
        let mv = knot_move(&sigma, &f, h, &fam, &sampling).map_err(|e| e.to_string())?;
        let fd = mv.displacement / h;
        let rel = (fd - slope).abs() / slope.abs();
        ensure(rel <= 1e-4, || format!("instance {done}: finite difference {fd}, formula {slope}"))?;
        ensure(fd < 0.0, || format!("instance {done}: left move went right"))?;
        worst = worst.max(rel);
        done += 1;
    }
    Ok(format!("10 instances, worst relative error {worst:.1e}"))
}

fn criterion_11() -> Outcome {
    let f = from_fn(sym(), f64::abs);
    let cfg = FreeKnotConfig::new(sym(), &[0.3], vec![1, 1]).unwrap();
    let params = FreeKnotParams::default();
    let vals: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&r| lipschitz_probe(&f, &cfg, r, 6, seed(), &params))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    ensure(vals.iter().all(|v| v.is_finite()) && lo > 0.0 && hi < 10.0 * lo, || format!("probe values {vals:?}"))?;
    Ok(format!("probe values {:.3?}", vals))
}

fn run_cli(args: &[&str], out: &std::path::Path) -> (i32, Option<serde_json::Value>, Vec<u8>) {
    let mut argv: Vec<String> = std::iter::once("alternant").chain(args.iter().copied()).map(String::from).collect();
    argv.push("--out".into());
    argv.push(out.to_str().unwrap().into());
    let _ = std::fs::remove_file(out);
    let code = alternant::run(argv);
    let bytes = std::fs::read(out).unwrap_or_default();
    (code, serde_json::from_slice(&bytes).ok(), bytes)
}

fn field(v: &Option<serde_json::Value>, path: &[&str]) -> Option<serde_json::Value> {
    path.iter().try_fold(v.clone()?, |v, k| v.get(*k).cloned())
}

fn number(v: &Option<serde_json::Value>, path: &[&str]) -> f64 {
    field(v, path).and_then(|v| v.as_f64()).unwrap_or(f64::NAN)
}

type CliCase = (Vec<&'static str>, i32, Option<(&'static [&'static str], &'static str)>);

fn criterion_12() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("r.json");
    let abs03 = ["--func", "abs", "--knots", "0.3", "--degrees", "1,1"];
    let cases: Vec<CliCase> = vec![
        (
            vec!["fit-poly", "--func", "runge", "--degree", "5", "--interval", "-1,1", "--oracle"],
            0,
            Some((&["status"], "beta-plus-optimal")),
        ),
        (vec!["fit-poly", "--func", "runge", "--degree", "-1"], 1, None),
        (vec!["fit-poly", "--func", "nosuch", "--degree", "2"], 1, None),
        (vec!["fit-poly", "--func", "poly:0,0,1", "--degree", "2"], 0, None),
        (vec!["fit-spline", "--func", "abs", "--knots", "0", "--degrees", "1,1", "--interval", "-1,1"], 0, None),
        (vec!["fit-spline", "--func", "abs", "--knots", "0.5", "--degrees", "1,1", "--oracle"], 0, None),
        (vec!["fit-spline", "--func", "abs", "--knots", "0.5", "--degrees", "1,1,1"], 1, None),
        ([&["free-knots", "check"][..], &abs03].concat(), 0, Some((&["verdict", "kind"], "violated-at"))),
        (
            vec!["free-knots", "check", "--func", "abs", "--knots", "0", "--degrees", "1,1"],
            0,
            Some((&["verdict", "kind"], "degenerate")),
        ),
        ([&["free-knots", "descend"][..], &abs03, &["--max-moves", "3"]].concat(), 2, None),
    ];
    for (args, want_code, want_field) in &cases {
        let cmd = args.join(" ");
        let (code, json, bytes) = run_cli(args, &out);
        ensure(code == *want_code, || format!("`{cmd}` exited with {code}, expected {want_code}"))?;
        if code == 1 {
            continue;
        }
        ensure(json.is_some(), || format!("`{cmd}` wrote no parseable report"))?;
        if let Some((path, value)) = want_field {
            let got = field(&json, path);
            ensure(got.as_ref().and_then(|v| v.as_str()) == Some(*value), || format!("`{cmd}`: {path:?} = {got:?}"))?;
        }
        let (_, _, again) = run_cli(args, &out);
        ensure(bytes == again, || format!("`{cmd}` is not reproducible"))?;
    }

    let (_, json, _) = run_cli(&cases[3].0, &out);
    let norm = number(&json, &["final_norm"]);
    ensure(norm <= 1e-10, || format!("poly:0,0,1 final_norm {norm}"))?;
    let (_, json, _) = run_cli(&cases[4].0, &out);
    let norm = number(&json, &["final_norm"]);
    ensure(norm <= 1e-10, || format!("abs with knot 0: final_norm {norm}"))?;
    let (_, json, _) = run_cli(&cases[5].0, &out);
    let (norm, oracle) = (number(&json, &["final_norm"]), number(&json, &["oracle", "value"]));
    ensure(field(&json, &["certificate"]).is_some_and(|c| !c.is_null()), || "knot 0.5: no certificate".into())?;
    ensure((norm - oracle).abs() <= 1e-6 && norm > 0.3, || format!("knot 0.5: norm {norm}, oracle {oracle}"))?;

    // Replay the reported witness move from the JSON alone.
    let (_, json, _) = run_cli(&cases[7].0, &out);
    let dto: alternant::report::FreeCheckDto = serde_json::from_value(json.unwrap()).map_err(|e| e.to_string())?;
    let w = dto.check.witness.as_ref().ok_or("check report carries no witness")?;
    let f = from_fn(sym(), f64::abs);
    let params = FreeKnotParams::default();
    let after = FreeKnotConfig::new(sym(), &w.knots_after[1..w.knots_after.len() - 1], vec![1, 1]).unwrap();
    let replayed = theta(&f, &after, &params).map_err(|e| e.to_string())?.value;
    ensure((replayed - w.theta_after).abs() <= 1e-9, || format!("replayed theta {replayed}, reported {}", w.theta_after))?;
    let before = FreeKnotConfig::new(sym(), &w.knots_before[1..w.knots_before.len() - 1], vec![1, 1]).unwrap();
    let r = check_w_minimality(&f, &before, &params).map_err(|e| e.to_string())?;
    ensure(r.verdict.as_str() == dto.check.verdict.kind, || "verdict does not replay".into())?;

    let (code, json, _) = run_cli(&[&["free-knots", "descend"][..], &abs03, &["--max-moves", "30"]].concat(), &out);
    let traj: Vec<f64> = field(&json, &["trajectory"])
        .and_then(|v| serde_json::from_value(v).ok())
        .unwrap_or_default();
    let knots = field(&json, &["knots"]).and_then(|v| serde_json::from_value::<Vec<Vec<f64>>>(v).ok()).unwrap_or_default();
    let last_knot = knots.last().map_or(f64::NAN, |k| k[0]);
    ensure(traj.windows(2).all(|w| w[1] <= w[0]) && last_knot.abs() < 0.05, || {
        format!("descend: exit {code}, final knot {last_knot}, trajectory {traj:?}")
    })?;
    Ok(format!("{} CLI examples, byte-identical reruns, witness replays, descent ends at knot {last_knot:.1e}", cases.len()))
}

fn main() {
    println!("acceptance seed {}", seed());
    let mut failed = 0;
    let mut report = |n: usize, out: Outcome| {
        match out {
            Ok(msg) => println!("criterion {n:>2}: PASS  {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n:>2}: FAIL  {msg}");
            }
        }
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    let runs = remez_runs();
    report(4, criterion_4(&runs));
    report(5, criterion_5(&runs));
    report(6, criterion_6(&runs));
    report(7, criterion_7());
    report(8, criterion_8());
    report(9, criterion_9());
    report(10, criterion_10());
    report(11, criterion_11());
    report(12, criterion_12());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
