// One-dimensional searches shared by the extremum scan and the line searches.

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_ITER: usize = 200;

/// Maximum of a unimodal `f` on `[lo, hi]`, located to within `tol`.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut it = 0;
    while b - a > tol && it < MAX_ITER {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        it += 1;
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

pub(crate) fn golden_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (t, v) = golden_max(|x| -f(x), lo, hi, tol);
    (t, -v)
}

/// Shrinks `[lo, hi]` around the switch of `pred`, assuming `!pred(lo)` and `pred(hi)`.
/// Returns the final bracket.
pub(crate) fn bisect<P: FnMut(f64) -> bool>(mut pred: P, mut lo: f64, mut hi: f64) -> (f64, f64) {
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}
