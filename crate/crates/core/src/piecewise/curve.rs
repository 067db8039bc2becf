//! Piecewise-polynomial curves `γ: [0, 1] → R^n` and exact compositions `F ∘ γ`.

use rand::Rng;

use super::polynomial::UniPoly;
use super::{PiecewiseError, SignVector};

/// Continuity tolerance at curve breakpoints.
pub const EPS_CURVE: f64 = 1e-9;

/// Curve given by polynomials in the global parameter `t` on each interval
/// `[t_j, t_{j+1}]` of a partition `0 = t_0 < ... < t_p = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<UniPoly>>,
}

impl Curve {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Vec<UniPoly>>) -> Result<Self, PiecewiseError> {
        let invalid = |msg: &str| Err(PiecewiseError::InvalidCurve(msg.to_string()));
        if breakpoints.len() < 2 || breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return invalid("breakpoints must run from 0 to 1");
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid("breakpoints must be strictly increasing");
        }
        if pieces.len() != breakpoints.len() - 1 {
            return invalid("one polynomial list per interval required");
        }
        let dim = pieces[0].len();
        if dim == 0 || pieces.iter().any(|p| p.len() != dim) {
            return invalid("every interval needs one polynomial per coordinate");
        }
        for (j, t) in breakpoints[1..breakpoints.len() - 1].iter().enumerate() {
            for (a, b) in pieces[j].iter().zip(&pieces[j + 1]) {
                if (a.eval(*t) - b.eval(*t)).abs() > EPS_CURVE {
                    return Err(PiecewiseError::InvalidCurve(format!(
                        "discontinuous at t = {t}"
                    )));
                }
            }
        }
        Ok(Curve {
            breakpoints,
            pieces,
        })
    }

    /// Single polynomial piece on `[0, 1]`.
    pub fn polynomial(coords: Vec<UniPoly>) -> Result<Self, PiecewiseError> {
        Curve::new(vec![0.0, 1.0], vec![coords])
    }

    /// Straight segment `t ↦ a + t (b - a)`.
    pub fn segment(a: &[f64], b: &[f64]) -> Self {
        let coords = a
            .iter()
            .zip(b)
            .map(|(x, y)| UniPoly::new(vec![*x, y - x]))
            .collect();
        Curve::polynomial(coords).expect("segments are valid curves")
    }

    /// Cubic `x0 + a t + b t² + c t³` with coefficients uniform in
    /// `[-spread, spread]`.
    pub fn random_cubic(x0: &[f64], spread: f64, rng: &mut impl Rng) -> Self {
        let coords = x0
            .iter()
            .map(|&x| {
                let mut cs = vec![x];
                cs.extend((0..3).map(|_| rng.random_range(-spread..spread)));
                UniPoly::new(cs)
            })
            .collect();
        Curve::polynomial(coords).expect("polynomial curves are valid")
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<UniPoly>] {
        &self.pieces
    }

    /// Index of the interval used at `t`: the first one at `t = 0`, otherwise
    /// the interval whose right end is at or beyond `t`.
    pub fn interval_index(&self, t: f64) -> usize {
        let last = self.pieces.len() - 1;
        (0..=last)
            .find(|&j| t <= self.breakpoints[j + 1])
            .unwrap_or(last)
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let j = self.interval_index(t);
        self.pieces[j].iter().map(|p| p.eval(t)).collect()
    }

    /// Right derivative at `t = 0`, left derivative at other breakpoints.
    pub fn velocity(&self, t: f64) -> Vec<f64> {
        let j = self.interval_index(t);
        self.pieces[j].iter().map(|p| p.derivative().eval(t)).collect()
    }
}

/// One interval of `F ∘ γ` on which a single piece of `F` is active.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub components: Vec<UniPoly>,
    /// Piece of `F` substituted on this interval.
    pub cell: SignVector,
    /// Hyperplanes containing `γ([start, end])`; nonempty marks a boundary
    /// segment travelling inside a lower-dimensional stratum.
    pub inside: Vec<usize>,
}

impl Segment {
    pub fn is_boundary(&self) -> bool {
        !self.inside.is_empty()
    }
}

/// Exact composition `F ∘ γ` as a piecewise-polynomial map `[0, 1] → R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    pub segments: Vec<Segment>,
    /// Parameter values at which `γ` meets a hyperplane it does not travel in.
    pub crossings: Vec<f64>,
}

impl Composition {
    fn index(&self, t: f64) -> usize {
        let last = self.segments.len() - 1;
        (0..=last)
            .find(|&j| t <= self.segments[j].end)
            .unwrap_or(last)
    }

    pub fn segment_at(&self, t: f64) -> &Segment {
        &self.segments[self.index(t)]
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        self.segment_at(t).components.iter().map(|p| p.eval(t)).collect()
    }

    /// Derivative with the same one-sided conventions as [`Curve::velocity`].
    pub fn derivative(&self, t: f64) -> Vec<f64> {
        self.segment_at(t)
            .components
            .iter()
            .map(|p| p.derivative().eval(t))
            .collect()
    }

    /// Distance from `t` to the nearest transversal crossing.
    pub fn distance_to_crossing(&self, t: f64) -> f64 {
        self.crossings
            .iter()
            .map(|c| (c - t).abs())
            .fold(f64::INFINITY, f64::min)
    }
}
