//! Existence of correction families that let an extreme knot move.
//!
//! A left move displaces knot `x_i` to the left by lowering the residual on
//! pieces `i..=p`; a right move does the same with pieces `0..i`. Right moves
//! are handled by mirroring the instance `t -> -t` and running the left-move
//! chain.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::alternance::{AlternatingSequence, Sign};
use crate::error::{Error, Result};
use crate::polynomial::Polynomial;
use crate::spline::KnotVector;
use crate::spline_fixed::j_set;

/// Direction in which the knot is displaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }
}

/// Corrections `delta_q` on the pieces that move with the knot; pieces past
/// the point where the family terminates carry the zero polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaFamily {
    pub direction: Direction,
    pub knot: usize,
    /// Piece indices, increasing.
    pub pieces: Vec<usize>,
    pub deltas: Vec<Polynomial>,
    pub roots: Vec<Vec<f64>>,
}

impl DeltaFamily {
    pub fn delta_of(&self, piece: usize) -> Option<&Polynomial> {
        self.pieces.iter().position(|&q| q == piece).map(|k| &self.deltas[k])
    }

    /// The piece adjacent to the knot on the moving side.
    pub fn adjacent(&self) -> &Polynomial {
        let q = match self.direction {
            Direction::Left => self.knot,
            Direction::Right => self.knot - 1,
        };
        self.delta_of(q).expect("family covers the adjacent piece")
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.deltas.iter().map(|d| d.degree()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Existence {
    Exists(DeltaFamily),
    Refused(String),
}

impl Existence {
    pub fn witness(&self) -> Option<&DeltaFamily> {
        match self {
            Existence::Exists(d) => Some(d),
            Existence::Refused(_) => None,
        }
    }

    pub fn exists(&self) -> bool {
        matches!(self, Existence::Exists(_))
    }
}

// Instance seen from the moving knot, with the moving side on the right.
struct Oriented {
    knots: Vec<f64>,
    degrees: Vec<usize>,
    pairs: Vec<(f64, f64)>,
    signs: Vec<Sign>,
    i: usize,
}

fn orient(seq: &AlternatingSequence, kv: &KnotVector, i: usize, dir: Direction) -> Oriented {
    let signs: Vec<Sign> = (0..seq.pairs.len()).map(|j| seq.sign(j)).collect();
    match dir {
        Direction::Left => Oriented {
            knots: kv.knots().to_vec(),
            degrees: kv.degrees().to_vec(),
            pairs: seq.pairs.clone(),
            signs,
            i,
        },
        Direction::Right => Oriented {
            knots: kv.knots().iter().rev().map(|x| -x).collect(),
            degrees: kv.degrees().iter().rev().copied().collect(),
            pairs: seq.pairs.iter().rev().map(|&(a, b)| (-b, -a)).collect(),
            signs: signs.into_iter().rev().collect(),
            i: kv.knots().len() - 1 - i,
        },
    }
}

// Roots per oriented piece `i..=last`, and whether the family ends with a
// root at knot `last + 1`.
struct Plan {
    last: usize,
    at_knot: bool,
    roots: Vec<Vec<f64>>,
}

fn containing(pairs: &[(f64, f64)], t: f64) -> Option<usize> {
    pairs.iter().position(|&(a, b)| a <= t && t <= b)
}

fn chain(o: &Oriented, s: Sign) -> core::result::Result<Plan, String> {
    let x = &o.knots;
    let n = &o.degrees;
    let last_piece = n.len() - 1;
    let j0 = containing(&o.pairs, x[o.i]).ok_or_else(|| String::from("knot is not extreme"))?;
    if o.signs[j0] != s {
        return Err(String::from("residual at the knot has the opposite sign"));
    }
    let mut cap = 0;
    for q in o.i..=last_piece {
        cap += n[q];
        let m = 1 + o.pairs[j0 + 1..].iter().filter(|p| p.0 <= x[q + 1]).count();
        if q == last_piece {
            if m <= cap + 1 {
                return assign(o, j0, q, false);
            }
            return Err(format!("{m} alternation pairs need more than {cap} roots up to the end"));
        }
        if m >= cap + 2 {
            return Err(format!("{m} alternation pairs need more than {cap} roots up to knot {}", q + 1));
        }
        if m <= cap || containing(&o.pairs, x[q + 1]).is_some() {
            return assign(o, j0, q, true);
        }
    }
    unreachable!("the last piece always decides")
}

fn assign(o: &Oriented, j0: usize, last: usize, at_knot: bool) -> core::result::Result<Plan, String> {
    let x = &o.knots;
    let end = x[last + 1];
    let mut j_last = j0 + o.pairs[j0 + 1..].iter().filter(|p| p.0 <= end).count();
    if at_knot && j_last > j0 && o.pairs[j_last].1 >= end {
        j_last -= 1;
    }
    let mut caps: Vec<usize> = o.degrees[o.i..=last].to_vec();
    if at_knot {
        caps[last - o.i] -= 1;
    }
    let mut roots = vec![Vec::new(); last - o.i + 1];
    let mut ptr = o.i;
    for j in j0..j_last {
        let (lo, hi) = (o.pairs[j].1, o.pairs[j + 1].0);
        let slot = (ptr..=last).find(|&q| caps[q - o.i] > 0 && lo.max(x[q]) < hi.min(x[q + 1]));
        let q = slot.ok_or_else(|| format!("no room for a root between pairs {j} and {}", j + 1))?;
        roots[q - o.i].push(0.5 * (lo.max(x[q]) + hi.min(x[q + 1])));
        caps[q - o.i] -= 1;
        ptr = q;
    }
    if at_knot {
        roots[last - o.i].push(end);
    }
    Ok(Plan { last, at_knot, roots })
}

fn build(kv: &KnotVector, i: usize, s: Sign, dir: Direction, plan: &Plan) -> Result<DeltaFamily> {
    let x = kv.knots();
    let np = kv.pieces();
    let oriented_to_piece = |q: usize| match dir {
        Direction::Left => q,
        Direction::Right => np - 1 - q,
    };
    let oi = match dir {
        Direction::Left => i,
        Direction::Right => np - i,
    };
    let walk: Vec<usize> = (oi..np).collect();
    let mut out: Vec<(usize, Polynomial, Vec<f64>)> = Vec::with_capacity(walk.len());
    let mut carry = s.value();
    for &oq in &walk {
        let q = oriented_to_piece(oq);
        let d = kv.piece_interval(q);
        let (entry, exit) = match dir {
            Direction::Left => (x[q], x[q + 1]),
            Direction::Right => (x[q + 1], x[q]),
        };
        let mut roots: Vec<f64> = if oq <= plan.last {
            plan.roots[oq - oi]
                .iter()
                .map(|&r| if dir == Direction::Left { r } else { -r })
                .collect()
        } else {
            Vec::new()
        };
        roots.sort_by(f64::total_cmp);
        if carry == 0.0 {
            out.push((q, Polynomial::zero(d, kv.degrees()[q]), Vec::new()));
            continue;
        }
        let base = Polynomial::from_roots(d, Sign::Plus, &roots)?;
        let at_entry = base.eval(entry);
        if at_entry == 0.0 {
            return Err(Error::Precondition(format!("root placed on knot entering piece {q}")));
        }
        let poly = base.scale(carry / at_entry).with_degree_bound(kv.degrees()[q]);
        carry = if plan.at_knot && oq == plan.last { 0.0 } else { poly.eval(exit) };
        out.push((q, poly, roots));
    }
    out.sort_by_key(|e| e.0);
    let mut pieces = Vec::with_capacity(out.len());
    let mut deltas = Vec::with_capacity(out.len());
    let mut roots = Vec::with_capacity(out.len());
    for (q, d, r) in out {
        pieces.push(q);
        deltas.push(d);
        roots.push(r);
    }
    Ok(DeltaFamily { direction: dir, knot: i, pieces, deltas, roots })
}

/// Decides whether corrections on the moving side of knot `i` exist, and builds them.
pub fn existence(seq: &AlternatingSequence, kv: &KnotVector, i: usize, s: Sign, dir: Direction) -> Existence {
    if i == 0 || i >= kv.knots().len() - 1 {
        return Existence::Refused(String::from("not an interior knot"));
    }
    let o = orient(seq, kv, i, dir);
    match chain(&o, s) {
        Ok(plan) => match build(kv, i, s, dir, &plan) {
            Ok(f) => Existence::Exists(f),
            Err(e) => Existence::Refused(format!("{e}")),
        },
        Err(reason) => Existence::Refused(reason),
    }
}

/// Corrections `delta_0..delta_{i-1}` for moving knot `i` to the right.
pub fn exists_delta_right(seq: &AlternatingSequence, kv: &KnotVector, i: usize, s: Sign) -> Option<DeltaFamily> {
    existence(seq, kv, i, s, Direction::Right).witness().cloned()
}

/// Corrections `delta_i..delta_p` for moving knot `i` to the left.
pub fn exists_delta_left(seq: &AlternatingSequence, kv: &KnotVector, i: usize, s: Sign) -> Option<DeltaFamily> {
    existence(seq, kv, i, s, Direction::Left).witness().cloned()
}

/// The counting obstruction: some span starting (left move) or ending (right
/// move) at knot `i` holds two more alternation pairs than its pieces have
/// degrees, with every shorter span holding at least one more.
pub fn counting_blocks(seq: &AlternatingSequence, kv: &KnotVector, i: usize, dir: Direction) -> bool {
    let n = kv.degrees();
    let last = kv.knots().len() - 1;
    match dir {
        Direction::Left => {
            for k in i + 1..=last {
                let need: usize = n[i..k].iter().sum();
                let c = j_set(seq, kv, i, k).len();
                if c >= need + 2 {
                    return true;
                }
                if c < need + 1 {
                    return false;
                }
            }
            false
        }
        Direction::Right => {
            for k in (0..i).rev() {
                let need: usize = n[k..i].iter().sum();
                let c = j_set(seq, kv, k, i).len();
                if c >= need + 2 {
                    return true;
                }
                if c < need + 1 {
                    return false;
                }
            }
            false
        }
    }
}
