//! Continuous piecewise polynomials on a knot vector.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::polynomial::Polynomial;
use crate::scalar::{Function, Interval};

/// Knots `a = x_0 < x_1 < ... < x_{p+1} = b` and piece degrees `n_0..n_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degrees: Vec<usize>,
}

impl KnotVector {
    /// `knots` includes both ends of the interval.
    pub fn new(knots: Vec<f64>, degrees: Vec<usize>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidKnots("need at least the two end points".into()));
        }
        if degrees.len() + 1 != knots.len() {
            return Err(Error::InvalidKnots(format!(
                "{} pieces need {} degrees, got {}",
                knots.len() - 1,
                knots.len() - 1,
                degrees.len()
            )));
        }
        if knots.iter().any(|x| !x.is_finite()) || knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidKnots("knots must be finite and strictly increasing".into()));
        }
        if degrees.contains(&0) {
            return Err(Error::InvalidKnots("piece degrees must be at least 1".into()));
        }
        Ok(KnotVector { knots, degrees })
    }

    pub fn from_interior(domain: Interval, interior: &[f64], degrees: Vec<usize>) -> Result<Self> {
        let mut knots = Vec::with_capacity(interior.len() + 2);
        knots.push(domain.lo());
        knots.extend_from_slice(interior);
        knots.push(domain.hi());
        Self::new(knots, degrees)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn interior(&self) -> &[f64] {
        &self.knots[1..self.knots.len() - 1]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Number of pieces, `p + 1`.
    pub fn pieces(&self) -> usize {
        self.degrees.len()
    }

    pub fn domain(&self) -> Interval {
        Interval::new(self.knots[0], self.knots[self.knots.len() - 1]).expect("validated")
    }

    pub fn piece_interval(&self, i: usize) -> Interval {
        Interval::new(self.knots[i], self.knots[i + 1]).expect("validated")
    }

    /// Piece holding `t`; a knot belongs to the piece on its left.
    pub fn piece_of(&self, t: f64) -> usize {
        let j = self.knots.partition_point(|&x| x < t);
        j.saturating_sub(1).min(self.pieces() - 1)
    }

    /// Same degrees with the interior knot `i` moved to `y`.
    pub fn with_knot(&self, i: usize, y: f64) -> Result<Self> {
        let mut knots = self.knots.clone();
        knots[i] = y;
        Self::new(knots, self.degrees.clone())
    }
}

/// An element of the spline space: one polynomial per piece, continuous at knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline {
    kv: KnotVector,
    pieces: Vec<Polynomial>,
}

impl Spline {
    /// Each piece is re-expressed on its knot interval with degree bound `n_i`.
    pub fn new(kv: KnotVector, pieces: Vec<Polynomial>) -> Result<Self> {
        if pieces.len() != kv.pieces() {
            return Err(Error::InvalidKnots(format!("{} pieces for {} intervals", pieces.len(), kv.pieces())));
        }
        let pieces = pieces
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let n = kv.degrees()[i];
                if p.degree() > n {
                    return Err(Error::InvalidKnots(format!("piece {i} has degree {} above {n}", p.degree())));
                }
                Ok(p.rebase(kv.piece_interval(i)).with_degree_bound(n))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Spline { kv, pieces })
    }

    pub fn zero(kv: KnotVector) -> Self {
        let pieces = (0..kv.pieces()).map(|i| Polynomial::zero(kv.piece_interval(i), kv.degrees()[i])).collect();
        Spline { kv, pieces }
    }

    /// Interpolates `f` linearly on every piece.
    pub fn linear_interpolant<F: Function + ?Sized>(f: &F, kv: &KnotVector) -> Self {
        let x = kv.knots();
        let fx: Vec<f64> = x.iter().map(|&t| f.value(t)).collect();
        let pieces = (0..kv.pieces())
            .map(|i| Polynomial::linear_interpolant(kv.piece_interval(i), fx[i], fx[i + 1]).with_degree_bound(kv.degrees()[i]))
            .collect();
        Spline { kv: kv.clone(), pieces }
    }

    pub fn knot_vector(&self) -> &KnotVector {
        &self.kv
    }

    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    pub fn piece(&self, i: usize) -> &Polynomial {
        &self.pieces[i]
    }

    /// Largest jump `|sigma_i(x_{i+1}) - sigma_{i+1}(x_{i+1})|`.
    pub fn continuity_defect(&self) -> f64 {
        (1..self.kv.pieces())
            .map(|i| {
                let x = self.kv.knots()[i];
                (self.pieces[i - 1].eval(x) - self.pieces[i].eval(x)).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn add_constant(&self, c: f64) -> Self {
        Spline { kv: self.kv.clone(), pieces: self.pieces.iter().map(|p| p.add_constant(c)).collect() }
    }

    /// `self + lambda * other` on the same knot vector.
    pub fn add_scaled(&self, other: &Spline, lambda: f64) -> Result<Self> {
        if self.kv != other.kv {
            return Err(Error::Precondition("splines live on different knot vectors".into()));
        }
        let pieces = self
            .pieces
            .iter()
            .zip(&other.pieces)
            .map(|(a, b)| a.add_scaled(b, lambda))
            .collect::<Result<Vec<_>>>()?;
        Ok(Spline { kv: self.kv.clone(), pieces })
    }

    /// Slopes of the pieces meeting at interior knot `i`: `(sigma_{i-1}', sigma_i')`.
    pub fn knot_slopes(&self, i: usize) -> (f64, f64) {
        let x = self.kv.knots()[i];
        (self.pieces[i - 1].derivative().eval(x), self.pieces[i].derivative().eval(x))
    }
}

impl Function for Spline {
    fn domain(&self) -> Interval {
        self.kv.domain()
    }
    fn value(&self, t: f64) -> f64 {
        self.pieces[self.kv.piece_of(t)].eval(t)
    }
}

/// Evaluates `s` at `t`, rejecting points outside the domain.
pub fn spline_eval(s: &Spline, t: f64) -> Result<f64> {
    crate::scalar::eval(s, t)
}
