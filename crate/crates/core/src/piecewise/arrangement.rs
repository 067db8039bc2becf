//! Hyperplane arrangements, sign vectors and their cells.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PiecewiseError;
use crate::geometry::{self, dot, norm, Subspace};

/// Zero threshold for `⟨a, x⟩ - b` when classifying points.
pub const EPS_CELL: f64 = 1e-10;
/// Largest arrangement the cell enumerator accepts.
pub const MAX_HYPERPLANES: usize = 16;

const ENUMERATION_SEED: u64 = 0x5eed_ce11;
const SAMPLES_PER_FLAT: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of(value: f64, tol: f64) -> Sign {
        if value > tol {
            Sign::Pos
        } else if value < -tol {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Neg => '-',
            Sign::Zero => '0',
            Sign::Pos => '+',
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Neg => -1.0,
            Sign::Zero => 0.0,
            Sign::Pos => 1.0,
        }
    }
}

/// Element of `{-, 0, +}^k`, ordered lexicographically with `- < 0 < +`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignVector(pub Vec<Sign>);

impl SignVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// No zero entries: the sign vector of a full-dimensional cell.
    pub fn is_full(&self) -> bool {
        self.0.iter().all(|s| *s != Sign::Zero)
    }

    pub fn zeros(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Sign::Zero)
            .map(|(i, _)| i)
    }

    /// Every nonzero entry of `self` agrees with `other`.
    ///
    /// With `self` the sign vector of a point and `other` that of a nonempty
    /// cell, this says the point lies in the closure of the cell.
    pub fn refines_to(&self, other: &SignVector) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| *a == Sign::Zero || a == b)
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for SignVector {
    type Err = PiecewiseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '-' => Ok(Sign::Neg),
                '0' => Ok(Sign::Zero),
                '+' => Ok(Sign::Pos),
                _ => Err(PiecewiseError::InvalidSignVector(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(SignVector)
    }
}

/// `{x : ⟨a, x⟩ = b}` with `‖a‖ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: Vec<f64>,
    offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self, PiecewiseError> {
        let len = norm(&normal);
        if !len.is_finite() || !offset.is_finite() {
            return Err(PiecewiseError::NonFinite);
        }
        if len == 0.0 {
            return Err(PiecewiseError::ZeroNormal);
        }
        Ok(Hyperplane {
            normal: normal.iter().map(|a| a / len).collect(),
            offset: offset / len,
        })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `⟨a, x⟩ - b`
    pub fn value(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    fn same_as(&self, other: &Hyperplane, tol: f64) -> bool {
        (self.offset - other.offset).abs() <= tol
            && self
                .normal
                .iter()
                .zip(&other.normal)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Axis-aligned sampling window.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, PiecewiseError> {
        if lo.len() != hi.len() {
            return Err(PiecewiseError::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(PiecewiseError::InvalidBoundingBox);
        }
        Ok(BoundingBox { lo, hi })
    }

    /// `[-10, 10]^n`
    pub fn symmetric(n: usize, half_width: f64) -> Self {
        BoundingBox {
            lo: vec![-half_width; n],
            hi: vec![half_width; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h))
            .collect()
    }

    pub fn half_diagonal(&self) -> f64 {
        0.5 * geometry::dist(&self.lo, &self.hi)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| rng.random_range(*l..*h))
            .collect()
    }
}

/// Relatively open polyhedron `{x : sign(⟨a_i, x⟩ - b_i) = s_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub sign_vector: SignVector,
    pub dimension: usize,
    pub tangent: Subspace,
    pub affine_point: Vec<f64>,
}

impl Cell {
    pub fn normal_space(&self) -> Subspace {
        self.tangent.complement()
    }
}

/// Ordered list of hyperplanes in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Arrangement {
    dim: usize,
    hyperplanes: Vec<Hyperplane>,
}

impl Arrangement {
    pub fn new(dim: usize, hyperplanes: Vec<Hyperplane>) -> Result<Self, PiecewiseError> {
        if dim == 0 || dim > geometry::MAX_DIM {
            return Err(PiecewiseError::UnsupportedDimension(dim));
        }
        for h in &hyperplanes {
            if h.normal.len() != dim {
                return Err(PiecewiseError::DimensionMismatch {
                    expected: dim,
                    found: h.normal.len(),
                });
            }
        }
        if hyperplanes.len() > MAX_HYPERPLANES {
            return Err(PiecewiseError::TooManyHyperplanes(hyperplanes.len()));
        }
        Ok(Arrangement { dim, hyperplanes })
    }

    pub fn empty(dim: usize) -> Self {
        Arrangement {
            dim,
            hyperplanes: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn len(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperplanes.is_empty()
    }

    pub fn sign_vector(&self, x: &[f64]) -> SignVector {
        self.sign_vector_tol(x, EPS_CELL)
    }

    pub fn sign_vector_tol(&self, x: &[f64], tol: f64) -> SignVector {
        SignVector(
            self.hyperplanes
                .iter()
                .map(|h| Sign::of(h.value(x), tol))
                .collect(),
        )
    }

    /// Common refinement: concatenation with duplicate hyperplanes removed.
    pub fn refine(&self, other: &Arrangement) -> Result<Arrangement, PiecewiseError> {
        if self.dim != other.dim {
            return Err(PiecewiseError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut out: Vec<Hyperplane> = Vec::new();
        for h in self.hyperplanes.iter().chain(&other.hyperplanes) {
            if !out.iter().any(|g| g.same_as(h, EPS_CELL)) {
                out.push(h.clone());
            }
        }
        Arrangement::new(self.dim, out)
    }

    /// Tangent space of the cell with sign vector `sv`: the null space of the
    /// normals of its zero constraints.
    pub fn tangent(&self, sv: &SignVector) -> Subspace {
        let normals: Vec<Vec<f64>> = sv
            .zeros()
            .map(|i| self.hyperplanes[i].normal.clone())
            .collect();
        Subspace::span(self.dim, &normals)
            .expect("normals have the ambient dimension")
            .complement()
    }

    /// Least-norm point of the affine flat `{⟨a_i, x⟩ = b_i, i ∈ zeros}`, or
    /// `None` when the equations are inconsistent.
    fn flat_point(&self, zeros: &[usize]) -> Option<Vec<f64>> {
        if zeros.is_empty() {
            return Some(vec![0.0; self.dim]);
        }
        let a = DMatrix::from_fn(zeros.len(), self.dim, |r, c| {
            self.hyperplanes[zeros[r]].normal[c]
        });
        let b = DVector::from_fn(zeros.len(), |r, _| self.hyperplanes[zeros[r]].offset);
        let svd = a.clone().svd(true, true);
        let x = svd.solve(&b, 1e-12).ok()?;
        let residual = (&a * &x - &b).amax();
        if residual > 1e-9 {
            return None;
        }
        Some(x.iter().copied().collect())
    }

    /// Draws a point of the flat through `zeros` near the window.
    fn sample_flat(
        &self,
        point: &[f64],
        tangent: &Subspace,
        bbox: &BoundingBox,
        rng: &mut impl Rng,
    ) -> Vec<f64> {
        if tangent.dim() == self.dim {
            return bbox.sample(rng);
        }
        let center = bbox.center();
        let offset = tangent
            .project(&geometry::sub(&center, point))
            .expect("dims match");
        let anchor = geometry::add(point, &offset);
        let r = bbox.half_diagonal();
        let mut x = anchor;
        for b in tangent.basis() {
            let z = rng.random_range(-r..r);
            x = geometry::axpy(&x, z, b);
        }
        x
    }

    /// Enumerates the cells meeting the window.
    ///
    /// Each cell is relatively open with affine hull equal to the flat cut out
    /// by its zero constraints, so sampling generic points on every flat
    /// (intersections of at most `n` hyperplanes) visits every cell of
    /// non-negligible size. Deterministic: uses a fixed internal seed.
    pub fn enumerate_cells(&self, bbox: &BoundingBox) -> Vec<Cell> {
        let mut rng = ChaCha8Rng::seed_from_u64(ENUMERATION_SEED);
        let mut found: BTreeMap<SignVector, Vec<f64>> = BTreeMap::new();
        let k = self.hyperplanes.len();
        for size in 0..=self.dim.min(k) {
            for zeros in subsets(k, size) {
                let Some(point) = self.flat_point(&zeros) else {
                    continue;
                };
                let normals: Vec<Vec<f64>> = zeros
                    .iter()
                    .map(|&i| self.hyperplanes[i].normal.clone())
                    .collect();
                let tangent = Subspace::span(self.dim, &normals)
                    .expect("dims match")
                    .complement();
                let samples = if tangent.dim() == 0 {
                    1
                } else {
                    SAMPLES_PER_FLAT
                };
                for _ in 0..samples {
                    let x = if tangent.dim() == 0 {
                        point.clone()
                    } else {
                        self.sample_flat(&point, &tangent, bbox, &mut rng)
                    };
                    if !bbox.contains(&x) {
                        continue;
                    }
                    let sv = self.sign_vector(&x);
                    found.entry(sv).or_insert(x);
                }
            }
        }
        found
            .into_iter()
            .map(|(sv, x)| {
                let tangent = self.tangent(&sv);
                Cell {
                    dimension: tangent.dim(),
                    sign_vector: sv,
                    tangent,
                    affine_point: x,
                }
            })
            .collect()
    }

    /// Rejection-samples a point of `cell` inside the window whose nonzero
    /// constraints clear `margin`.
    pub fn sample_in_cell(
        &self,
        cell: &Cell,
        bbox: &BoundingBox,
        margin: f64,
        max_tries: usize,
        rng: &mut impl Rng,
    ) -> Option<Vec<f64>> {
        if cell.dimension == 0 {
            return Some(cell.affine_point.clone());
        }
        for _ in 0..max_tries {
            let x = self.sample_flat(&cell.affine_point, &cell.tangent, bbox, rng);
            if !bbox.contains(&x) {
                continue;
            }
            let ok = self
                .hyperplanes
                .iter()
                .zip(&cell.sign_vector.0)
                .all(|(h, s)| match s {
                    Sign::Zero => h.value(&x).abs() <= EPS_CELL,
                    _ => s.as_f64() * h.value(&x) > margin,
                });
            if ok {
                return Some(x);
            }
        }
        None
    }
}

fn subsets(k: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            rec(i + 1, k, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, size, &mut Vec::new(), &mut out);
    out
}
