//! Piecewise-polynomial maps over hyperplane arrangements.
//!
//! A [`PiecewiseFunction`] assigns one polynomial map to every full-dimensional
//! cell of an [`Arrangement`]. Lower-dimensional cells carry no data of their
//! own: values and derivatives there come from the adjacent full-dimensional
//! pieces, which agree on shared facets.

mod arrangement;
mod curve;
mod polynomial;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use thiserror::Error;

pub use arrangement::{
    Arrangement, BoundingBox, Cell, Hyperplane, Sign, SignVector, EPS_CELL, MAX_HYPERPLANES,
};
pub use curve::{Composition, Curve, Segment, EPS_CURVE};
pub use polynomial::{Polynomial, UniPoly, MAX_DEGREE};

use crate::geometry::{self, GeometryError, MatrixPolytope, Polytope};

/// Agreement tolerance for piece values on shared facets.
pub const EPS_EQ: f64 = 1e-9;
/// Points sampled per facet by [`PiecewiseFunction::validate_continuity`].
pub const FACET_SAMPLES: usize = 50;
/// Seed intervals for crossing detection in [`PiecewiseFunction::compose_exact`].
pub const ROOT_GRID: usize = 1024;
/// Bisection width for crossing times.
pub const ROOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PiecewiseError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ambient dimension {0} is not supported")]
    UnsupportedDimension(usize),
    #[error("non-finite number")]
    NonFinite,
    #[error("hyperplane normal is zero")]
    ZeroNormal,
    #[error("bounding box needs lo < hi in every coordinate")]
    InvalidBoundingBox,
    #[error("too many hyperplanes ({0}, limit {MAX_HYPERPLANES})")]
    TooManyHyperplanes(usize),
    #[error("invalid sign vector {0:?}")]
    InvalidSignVector(String),
    #[error("piece {0} has degree {1}, limit is {MAX_DEGREE}")]
    DegreeTooHigh(SignVector, u32),
    #[error("no piece for the nonempty full-dimensional cell {0}")]
    MissingPiece(SignVector),
    #[error("piece {0} belongs to an empty or lower-dimensional cell")]
    UnexpectedPiece(SignVector),
    #[error("no full-dimensional piece is adjacent to {0:?}")]
    NoAdjacentPiece(Vec<f64>),
    #[error("the directional cell at {x:?} along {u:?} is empty")]
    EmptyDirectionalCell { x: Vec<f64>, u: Vec<f64> },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("output index {0} out of range")]
    OutputIndex(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T> = std::result::Result<T, PiecewiseError>;

/// A facet on which adjacent pieces disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityViolation {
    pub cells: (SignVector, SignVector),
    pub witness: Vec<f64>,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub facets_checked: usize,
    pub violations: Vec<ContinuityViolation>,
}

impl ContinuityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Continuous piecewise-polynomial map `R^n → R^m`.
#[derive(Debug, Clone)]
pub struct PiecewiseFunction {
    arrangement: Arrangement,
    output_dim: usize,
    pieces: BTreeMap<SignVector, Vec<Polynomial>>,
    lipschitz_hint: Option<f64>,
    bbox: BoundingBox,
    cells: Vec<Cell>,
}

impl PiecewiseFunction {
    /// Validates shapes and degrees, enumerates the cells meeting `bbox`, and
    /// checks that the pieces are keyed by exactly the full-dimensional ones.
    pub fn new(
        arrangement: Arrangement,
        output_dim: usize,
        pieces: BTreeMap<SignVector, Vec<Polynomial>>,
        bbox: BoundingBox,
        lipschitz_hint: Option<f64>,
    ) -> Result<Self> {
        let n = arrangement.dim();
        if bbox.dim() != n {
            return Err(PiecewiseError::DimensionMismatch {
                expected: n,
                found: bbox.dim(),
            });
        }
        if output_dim == 0 || output_dim > geometry::MAX_DIM {
            return Err(PiecewiseError::UnsupportedDimension(output_dim));
        }
        for (sv, polys) in &pieces {
            if sv.len() != arrangement.len() || !sv.is_full() {
                return Err(PiecewiseError::UnexpectedPiece(sv.clone()));
            }
            if polys.len() != output_dim {
                return Err(PiecewiseError::DimensionMismatch {
                    expected: output_dim,
                    found: polys.len(),
                });
            }
            for p in polys {
                if p.num_vars() != n {
                    return Err(PiecewiseError::DimensionMismatch {
                        expected: n,
                        found: p.num_vars(),
                    });
                }
                if p.degree() > MAX_DEGREE {
                    return Err(PiecewiseError::DegreeTooHigh(sv.clone(), p.degree()));
                }
            }
        }
        let cells = arrangement.enumerate_cells(&bbox);
        for c in cells.iter().filter(|c| c.sign_vector.is_full()) {
            if !pieces.contains_key(&c.sign_vector) {
                return Err(PiecewiseError::MissingPiece(c.sign_vector.clone()));
            }
        }
        for sv in pieces.keys() {
            if !cells.iter().any(|c| &c.sign_vector == sv) {
                return Err(PiecewiseError::UnexpectedPiece(sv.clone()));
            }
        }
        Ok(PiecewiseFunction {
            arrangement,
            output_dim,
            pieces,
            lipschitz_hint,
            bbox,
            cells,
        })
    }

    pub fn dim(&self) -> usize {
        self.arrangement.dim()
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn arrangement(&self) -> &Arrangement {
        &self.arrangement
    }

    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn pieces(&self) -> &BTreeMap<SignVector, Vec<Polynomial>> {
        &self.pieces
    }

    pub fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz_hint
    }

    /// Highest total degree over all pieces and components.
    pub fn max_degree(&self) -> u32 {
        self.pieces
            .values()
            .flatten()
            .map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn is_piecewise_linear(&self) -> bool {
        self.max_degree() <= 1
    }

    pub fn sign_vector(&self, x: &[f64]) -> SignVector {
        self.arrangement.sign_vector(x)
    }

    /// Whether `x` lies on a lower-dimensional cell.
    pub fn on_stratum(&self, x: &[f64]) -> bool {
        !self.sign_vector(x).is_full()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(PiecewiseError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Pieces of the full-dimensional cells whose closure contains `x`, in
    /// lexicographic sign-vector order.
    pub fn adjacent_pieces(&self, x: &[f64]) -> Vec<(&SignVector, &[Polynomial])> {
        let sv = self.sign_vector(x);
        self.pieces
            .iter()
            .filter(|(key, _)| sv.refines_to(key))
            .map(|(k, v)| (k, v.as_slice()))
            .collect()
    }

    fn first_adjacent(&self, x: &[f64]) -> Result<(&SignVector, &[Polynomial])> {
        self.adjacent_pieces(x)
            .into_iter()
            .next()
            .ok_or_else(|| PiecewiseError::NoAdjacentPiece(x.to_vec()))
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let (_, piece) = self.first_adjacent(x)?;
        Ok(piece.iter().map(|p| p.eval(x)).collect())
    }

    pub fn piece(&self, sv: &SignVector) -> Option<&[Polynomial]> {
        self.pieces.get(sv).map(|v| v.as_slice())
    }

    pub fn piece_jacobian(piece: &[Polynomial], x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let mut j = DMatrix::zeros(piece.len(), n);
        for (i, p) in piece.iter().enumerate() {
            for (c, g) in p.gradient(x).into_iter().enumerate() {
                j[(i, c)] = g;
            }
        }
        j
    }

    /// Full-dimensional cell active on a segment `(x, x + εu]`.
    ///
    /// Zero signs at `x` are resolved by the sign of `⟨a_i, u⟩`, and residual
    /// ties (the segment runs inside the hyperplane) by `+`. When that cell is
    /// empty the smallest adjacent cell compatible with the segment is used;
    /// continuity makes the tangential derivative independent of the choice.
    pub fn directional_cell(&self, x: &[f64], u: &[f64]) -> Result<SignVector> {
        self.check_point(x)?;
        self.check_point(u)?;
        let at_x = self.sign_vector(x);
        let u_tol = EPS_CELL * geometry::norm(u);
        let mut along = at_x.clone();
        let mut preferred = at_x.clone();
        for (i, h) in self.arrangement.hyperplanes().iter().enumerate() {
            if at_x.0[i] == Sign::Zero {
                let s = Sign::of(geometry::dot(h.normal(), u), u_tol);
                along.0[i] = s;
                preferred.0[i] = if s == Sign::Zero { Sign::Pos } else { s };
            }
        }
        if self.pieces.contains_key(&preferred) {
            return Ok(preferred);
        }
        self.pieces
            .keys()
            .find(|k| along.refines_to(k))
            .cloned()
            .ok_or_else(|| PiecewiseError::EmptyDirectionalCell {
                x: x.to_vec(),
                u: u.to_vec(),
            })
    }

    /// One-sided directional derivative `F'(x, u)`.
    pub fn directional_derivative(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.check_point(u)?;
        if u.iter().all(|c| *c == 0.0) {
            return Ok(vec![0.0; self.output_dim]);
        }
        let sv = self.directional_cell(x, u)?;
        let piece = &self.pieces[&sv];
        Ok(piece
            .iter()
            .map(|p| geometry::dot(&p.gradient(x), u))
            .collect())
    }

    /// Clarke Jacobian: convex hull of the Jacobians of all adjacent pieces.
    pub fn clarke_jacobian(&self, x: &[f64]) -> Result<MatrixPolytope> {
        self.check_point(x)?;
        let vertices: Vec<DMatrix<f64>> = self
            .adjacent_pieces(x)
            .into_iter()
            .map(|(_, piece)| Self::piece_jacobian(piece, x))
            .collect();
        if vertices.is_empty() {
            return Err(PiecewiseError::NoAdjacentPiece(x.to_vec()));
        }
        Ok(MatrixPolytope::new(vertices)?)
    }

    /// Clarke subdifferential of the scalar component `F_i` (0-based).
    pub fn component_clarke(&self, x: &[f64], i: usize) -> Result<Polytope> {
        self.check_point(x)?;
        if i >= self.output_dim {
            return Err(PiecewiseError::OutputIndex(i));
        }
        let vertices: Vec<Vec<f64>> = self
            .adjacent_pieces(x)
            .into_iter()
            .map(|(_, piece)| piece[i].gradient(x))
            .collect();
        if vertices.is_empty() {
            return Err(PiecewiseError::NoAdjacentPiece(x.to_vec()));
        }
        Ok(Polytope::new(vertices)?)
    }

    /// `F(x + h) - F(x)`.
    ///
    /// When the piece active at `x + h` is also adjacent to `x`, the
    /// difference is taken on that piece's expansion about `x`, so a linear
    /// piece yields its exact linear increment.
    pub fn increment(&self, x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.check_point(h)?;
        let y = geometry::add(x, h);
        let at_x = self.sign_vector(x);
        let (key, piece) = self.first_adjacent(&y)?;
        if at_x.refines_to(key) {
            return Ok(piece.iter().map(|p| p.increment(x, h)).collect());
        }
        let fy: Vec<f64> = piece.iter().map(|p| p.eval(&y)).collect();
        let fx = self.eval(x)?;
        Ok(geometry::sub(&fy, &fx))
    }

    /// Samples every facet and compares the values of the pieces on both
    /// sides.
    pub fn validate_continuity(&self, eps: f64, rng: &mut impl Rng) -> ContinuityReport {
        let n = self.dim();
        let mut report = ContinuityReport {
            facets_checked: 0,
            violations: Vec::new(),
        };
        for facet in self.cells.iter().filter(|c| c.dimension + 1 == n) {
            report.facets_checked += 1;
            let sides: Vec<(&SignVector, &Vec<Polynomial>)> = self
                .pieces
                .iter()
                .filter(|(k, _)| facet.sign_vector.refines_to(k))
                .collect();
            let samples = if facet.dimension == 0 { 1 } else { FACET_SAMPLES };
            'pairs: for a in 0..sides.len() {
                for b in a + 1..sides.len() {
                    for _ in 0..samples {
                        let Some(x) = self.arrangement.sample_in_cell(
                            facet,
                            &self.bbox,
                            1e-6,
                            100_000,
                            rng,
                        ) else {
                            continue;
                        };
                        let gap = sides[a]
                            .1
                            .iter()
                            .zip(sides[b].1)
                            .map(|(p, q)| (p.eval(&x) - q.eval(&x)).abs())
                            .fold(0.0, f64::max);
                        if gap > eps {
                            report.violations.push(ContinuityViolation {
                                cells: (sides[a].0.clone(), sides[b].0.clone()),
                                witness: x,
                                gap,
                            });
                            continue 'pairs;
                        }
                    }
                }
            }
        }
        report
    }

    /// Exact composition `F ∘ γ`.
    ///
    /// `[0, 1]` is cut at `γ`'s breakpoints and at every time `γ` crosses a
    /// hyperplane (sign changes over a 1024-interval grid, refined by
    /// bisection). On each resulting interval the active piece is substituted
    /// symbolically. Intervals on which `γ` travels inside a hyperplane are
    /// marked as boundary segments.
    pub fn compose_exact(&self, curve: &Curve) -> Result<Composition> {
        if curve.dim() != self.dim() {
            return Err(PiecewiseError::DimensionMismatch {
                expected: self.dim(),
                found: curve.dim(),
            });
        }
        let mut segments = Vec::new();
        let mut crossings = Vec::new();
        let bps = curve.breakpoints();
        for (j, coords) in curve.pieces().iter().enumerate() {
            let (ta, tb) = (bps[j], bps[j + 1]);
            let mut cuts = vec![ta, tb];
            let mut inside = Vec::new();
            for (i, h) in self.arrangement.hyperplanes().iter().enumerate() {
                let mut g = UniPoly::constant(-h.offset());
                for (a, c) in h.normal().iter().zip(coords) {
                    g = g.add(&c.scale(*a));
                }
                let scale = 1.0 + coords.iter().map(UniPoly::max_abs_coeff).fold(0.0, f64::max);
                if g.is_zero(1e-12 * scale) {
                    inside.push(i);
                    continue;
                }
                for r in crossing_times(&g, ta, tb) {
                    crossings.push(r);
                    if r > ta + ROOT_TOL && r < tb - ROOT_TOL {
                        cuts.push(r);
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() <= ROOT_TOL);
            for w in cuts.windows(2) {
                let (s0, s1) = (w[0], w[1]);
                let tm = 0.5 * (s0 + s1);
                let x: Vec<f64> = coords.iter().map(|c| c.eval(tm)).collect();
                let v: Vec<f64> = coords.iter().map(|c| c.derivative().eval(tm)).collect();
                let sv = if v.iter().all(|c| *c == 0.0) {
                    self.first_adjacent(&x)?.0.clone()
                } else {
                    self.directional_cell(&x, &v)?
                };
                let components = self.pieces[&sv].iter().map(|p| p.compose(coords)).collect();
                segments.push(Segment {
                    start: s0,
                    end: s1,
                    components,
                    cell: sv,
                    inside: inside.clone(),
                });
            }
        }
        crossings.sort_by(f64::total_cmp);
        crossings.dedup_by(|a, b| (*a - *b).abs() <= ROOT_TOL);
        Ok(Composition {
            segments,
            crossings,
        })
    }
}

/// Zeros of `g` in `[ta, tb]`: exact zeros on the seed grid plus bisected sign
/// changes between consecutive seeds.
fn crossing_times(g: &UniPoly, ta: f64, tb: f64) -> Vec<f64> {
    let zero_tol = 1e-14 * (1.0 + g.max_abs_coeff());
    let mut seeds = vec![ta];
    for k in 1..ROOT_GRID {
        let s = k as f64 / ROOT_GRID as f64;
        if s > ta && s < tb {
            seeds.push(s);
        }
    }
    seeds.push(tb);
    let vals: Vec<f64> = seeds.iter().map(|&s| g.eval(s)).collect();
    let mut roots = Vec::new();
    for (s, v) in seeds.iter().zip(&vals) {
        if v.abs() <= zero_tol {
            roots.push(*s);
        }
    }
    for k in 0..seeds.len() - 1 {
        let (mut lo, mut hi) = (seeds[k], seeds[k + 1]);
        let (mut flo, fhi) = (vals[k], vals[k + 1]);
        if flo.abs() <= zero_tol || fhi.abs() <= zero_tol || flo.signum() == fhi.signum() {
            continue;
        }
        while hi - lo > ROOT_TOL {
            let mid = 0.5 * (lo + hi);
            let fm = g.eval(mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots.sort_by(f64::total_cmp);
    roots
}
