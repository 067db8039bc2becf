//! Small-dimension convex geometry on vertex-represented sets.
//!
//! Everything here works on plain `&[f64]` coordinates. Set values (Clarke
//! Jacobians, outputs of generalized derivatives) are [`Polytope`]s given by a
//! vertex list whose convex hull is the set; redundant vertices are allowed and
//! never pruned.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Tolerance for orthonormality of subspace bases.
pub const EPS_ORTH: f64 = 1e-12;
/// Tolerance for min-norm-point distances and containment tests.
pub const EPS_QP: f64 = 1e-10;
/// Iteration cap of the min-norm-point solver.
pub const MAX_QP_ITERS: usize = 10_000;
/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("a polytope needs at least one vertex")]
    EmptyPolytope,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("ambient dimension {0} outside the supported range 1..={MAX_DIM}")]
    UnsupportedDimension(usize),
    #[error("basis is not orthonormal within {EPS_ORTH}")]
    NotOrthonormal,
}

pub type Result<T> = std::result::Result<T, GeometryError>;

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(GeometryError::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(c: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| c * x).collect()
}

/// `a + c * b`
pub fn axpy(a: &[f64], c: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + c * y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Lexicographic comparison of coordinate lists, with `total_cmp` per entry.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Linear subspace given by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<f64>>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                let mut e = vec![0.0; ambient_dim];
                e[i] = 1.0;
                e
            })
            .collect();
        Subspace { ambient_dim, basis }
    }

    /// Wraps an already orthonormal basis, checking it within [`EPS_ORTH`].
    pub fn from_orthonormal(ambient_dim: usize, basis: Vec<Vec<f64>>) -> Result<Self> {
        if basis.len() > ambient_dim {
            return Err(GeometryError::NotOrthonormal);
        }
        for (i, b) in basis.iter().enumerate() {
            check_dim(ambient_dim, b.len())?;
            if (norm(b) - 1.0).abs() > EPS_ORTH {
                return Err(GeometryError::NotOrthonormal);
            }
            for c in &basis[..i] {
                if dot(b, c).abs() > EPS_ORTH {
                    return Err(GeometryError::NotOrthonormal);
                }
            }
        }
        Ok(Subspace { ambient_dim, basis })
    }

    /// Span of arbitrary vectors. Modified Gram-Schmidt with one
    /// re-orthogonalization pass; vectors whose remainder falls below `1e-10`
    /// of their length are treated as dependent.
    pub fn span(ambient_dim: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in vectors {
            check_dim(ambient_dim, v.len())?;
            let len = norm(v);
            if len == 0.0 {
                continue;
            }
            let mut w = v.clone();
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&w, b);
                    w = axpy(&w, -c, b);
                }
            }
            let rem = norm(&w);
            if rem > 1e-10 * len {
                basis.push(scale(1.0 / rem, &w));
            }
            if basis.len() == ambient_dim {
                break;
            }
        }
        Ok(Subspace { ambient_dim, basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.ambient_dim, v.len())?;
        let mut out = vec![0.0; self.ambient_dim];
        for b in &self.basis {
            let c = dot(v, b);
            for (o, bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        Ok(out)
    }

    /// Projection onto the orthogonal complement, `v - project(v)`.
    pub fn reject(&self, v: &[f64]) -> Result<Vec<f64>> {
        let p = self.project(v)?;
        Ok(sub(v, &p))
    }

    pub fn complement(&self) -> Subspace {
        let mut vectors = self.basis.clone();
        vectors.extend(Subspace::full(self.ambient_dim).basis);
        let all = Subspace::span(self.ambient_dim, &vectors).expect("dims checked");
        Subspace {
            ambient_dim: self.ambient_dim,
            basis: all.basis[self.basis.len()..].to_vec(),
        }
    }

    /// Whether `v` lies in the subspace, i.e. `‖v - project(v)‖ ≤ tol·(1 + ‖v‖)`.
    pub fn contains(&self, v: &[f64], tol: f64) -> Result<bool> {
        let r = self.reject(v)?;
        Ok(norm(&r) <= tol * (1.0 + norm(v)))
    }
}

/// Convex hull of a finite vertex list.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    ambient_dim: usize,
    vertices: Vec<Vec<f64>>,
}

impl Polytope {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let first = vertices.first().ok_or(GeometryError::EmptyPolytope)?;
        let ambient_dim = first.len();
        if ambient_dim == 0 || ambient_dim > MAX_DIM {
            return Err(GeometryError::UnsupportedDimension(ambient_dim));
        }
        for v in &vertices {
            check_dim(ambient_dim, v.len())?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err(GeometryError::NonFinite);
            }
        }
        Ok(Polytope {
            ambient_dim,
            vertices,
        })
    }

    pub fn point(v: Vec<f64>) -> Result<Self> {
        Polytope::new(vec![v])
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Polytope {
            ambient_dim,
            vertices: vec![vec![0.0; ambient_dim]],
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Largest pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(dist(a, b));
            }
        }
        d
    }

    pub fn is_singleton(&self, tol: f64) -> bool {
        self.diameter() <= tol
    }

    pub fn map(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Polytope> {
        Polytope::new(self.vertices.iter().map(|v| f(v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Polytope {
        Polytope {
            ambient_dim: self.ambient_dim,
            vertices: self.vertices.iter().map(|v| scale(c, v)).collect(),
        }
    }

    pub fn negated(&self) -> Polytope {
        self.scaled(-1.0)
    }

    /// Lexicographically smallest vertex.
    pub fn lex_min_vertex(&self) -> &[f64] {
        self.vertices
            .iter()
            .min_by(|a, b| lex_cmp(a, b))
            .expect("polytopes are nonempty")
    }

    /// Vertex-set deduplicated up to exact equality, in lexicographic order.
    pub fn dedup(&self) -> Polytope {
        let mut vs = self.vertices.clone();
        vs.sort_by(|a, b| lex_cmp(a, b));
        vs.dedup();
        Polytope {
            ambient_dim: self.ambient_dim,
            vertices: vs,
        }
    }
}

/// Convex hull of a finite set of `rows × cols` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolytope {
    rows: usize,
    cols: usize,
    vertices: Vec<DMatrix<f64>>,
}

impl MatrixPolytope {
    pub fn new(vertices: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = vertices.first().ok_or(GeometryError::EmptyPolytope)?;
        let (rows, cols) = first.shape();
        for v in &vertices {
            check_dim(rows, v.nrows())?;
            check_dim(cols, v.ncols())?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err(GeometryError::NonFinite);
            }
        }
        Ok(MatrixPolytope {
            rows,
            cols,
            vertices,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn vertices(&self) -> &[DMatrix<f64>] {
        &self.vertices
    }

    /// Lexicographically smallest vertex in row-major order.
    pub fn lex_min_vertex(&self) -> &DMatrix<f64> {
        self.vertices
            .iter()
            .min_by(|a, b| lex_cmp(&row_major(a), &row_major(b)))
            .expect("polytopes are nonempty")
    }

    /// Polytope of `i`-th rows.
    pub fn row_polytope(&self, i: usize) -> Polytope {
        Polytope {
            ambient_dim: self.cols,
            vertices: self
                .vertices
                .iter()
                .map(|a| a.row(i).iter().copied().collect())
                .collect(),
        }
    }
}

pub fn row_major(a: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len());
    for i in 0..a.nrows() {
        out.extend(a.row(i).iter());
    }
    out
}

pub fn project(v: &[f64], space: &Subspace) -> Result<Vec<f64>> {
    space.project(v)
}

/// Minimum-norm point of the convex hull of `points` (Wolfe's algorithm).
///
/// Returns the point together with its convex weights over `points`.
pub fn min_norm_point(points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let k = points.len();
    let max_sq = points.iter().map(|p| dot(p, p)).fold(0.0, f64::max);
    let gap_tol = 1e-24 + 1e-15 * max_sq;
    let weight_tol = 1e-14;

    let start = (0..k)
        .min_by(|&a, &b| dot(&points[a], &points[a]).total_cmp(&dot(&points[b], &points[b])))
        .expect("nonempty point set");
    let mut corral = vec![start];
    let mut lambda = vec![1.0];
    let mut x = points[start].clone();

    let combine = |corral: &[usize], w: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; points[0].len()];
        for (&i, &wi) in corral.iter().zip(w) {
            for (o, p) in out.iter_mut().zip(&points[i]) {
                *o += wi * p;
            }
        }
        out
    };

    for _ in 0..MAX_QP_ITERS {
        let xx = dot(&x, &x);
        let (j, best) = (0..k)
            .map(|j| (j, dot(&x, &points[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty point set");
        if xx - best <= gap_tol || corral.contains(&j) {
            break;
        }
        corral.push(j);
        lambda.push(0.0);

        let mut minor = 0;
        loop {
            minor += 1;
            let alpha = affine_min_weights(points, &corral);
            if alpha.iter().all(|&a| a > weight_tol) || minor > MAX_QP_ITERS {
                lambda = alpha;
                x = combine(&corral, &lambda);
                break;
            }
            let mut theta: f64 = 1.0;
            for (l, a) in lambda.iter().zip(&alpha) {
                if *a <= weight_tol && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            let mut next: Vec<(usize, f64)> = corral
                .iter()
                .zip(lambda.iter().zip(&alpha))
                .map(|(&i, (l, a))| (i, theta * a + (1.0 - theta) * l))
                .collect();
            // drop at least the weight that hit zero
            let drop = next
                .iter()
                .enumerate()
                .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
                .map(|(pos, _)| pos)
                .expect("corral nonempty");
            next.remove(drop);
            next.retain(|(_, w)| *w > weight_tol);
            if next.is_empty() {
                next.push((corral[0], 1.0));
            }
            let total: f64 = next.iter().map(|(_, w)| w).sum();
            corral = next.iter().map(|(i, _)| *i).collect();
            lambda = next.iter().map(|(_, w)| w / total).collect();
        }
    }

    let mut weights = vec![0.0; k];
    for (&i, &w) in corral.iter().zip(&lambda) {
        weights[i] += w;
    }
    (x, weights)
}

/// Weights of the min-norm point of the affine hull of `points[corral]`.
fn affine_min_weights(points: &[Vec<f64>], corral: &[usize]) -> Vec<f64> {
    if corral.len() == 1 {
        return vec![1.0];
    }
    let n = points[0].len();
    let base = &points[corral[0]];
    let cols = corral.len() - 1;
    let b = DMatrix::from_fn(n, cols, |r, c| points[corral[c + 1]][r] - base[r]);
    let rhs = DVector::from_fn(n, |r, _| -base[r]);
    let svd = b.svd(true, true);
    let beta = svd
        .solve(&rhs, 1e-13)
        .unwrap_or_else(|_| DVector::zeros(cols));
    let mut alpha = Vec::with_capacity(corral.len());
    alpha.push(1.0 - beta.sum());
    alpha.extend(beta.iter());
    alpha
}

/// Euclidean distance from `v` to the convex hull of `p`.
pub fn dist_point_polytope(v: &[f64], p: &Polytope) -> Result<f64> {
    check_dim(p.ambient_dim, v.len())?;
    let shifted: Vec<Vec<f64>> = p.vertices.iter().map(|q| sub(q, v)).collect();
    let (x, _) = min_norm_point(&shifted);
    Ok(norm(&x))
}

/// Hausdorff distance between the convex hulls of two polytopes.
///
/// The sup over a polytope of the convex function `dist(·, conv Q)` is attained
/// at a vertex, so only vertices are scanned.
pub fn hausdorff(p: &Polytope, q: &Polytope) -> Result<f64> {
    check_dim(p.ambient_dim, q.ambient_dim)?;
    let mut h: f64 = 0.0;
    for v in &p.vertices {
        h = h.max(dist_point_polytope(v, q)?);
    }
    for v in &q.vertices {
        h = h.max(dist_point_polytope(v, p)?);
    }
    Ok(h)
}

/// `A ⊂ B + V`, decided by projecting both sets onto `V⊥` and testing
/// containment of the projected vertices of `A` in the projected `B`.
pub fn subset_mod_subspace(a: &Polytope, b: &Polytope, v: &Subspace) -> Result<bool> {
    subset_mod_subspace_tol(a, b, v, EPS_QP)
}

pub fn subset_mod_subspace_tol(
    a: &Polytope,
    b: &Polytope,
    v: &Subspace,
    tol: f64,
) -> Result<bool> {
    check_dim(a.ambient_dim, b.ambient_dim)?;
    check_dim(a.ambient_dim, v.ambient_dim)?;
    let b_proj = Polytope {
        ambient_dim: b.ambient_dim,
        vertices: b
            .vertices
            .iter()
            .map(|q| v.reject(q))
            .collect::<Result<_>>()?,
    };
    for p in &a.vertices {
        let pp = v.reject(p)?;
        if dist_point_polytope(&pp, &b_proj)? > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Image of `conv J` under `A ↦ A u`.
pub fn linear_image(j: &MatrixPolytope, u: &[f64]) -> Result<Polytope> {
    check_dim(j.cols, u.len())?;
    let uv = DVector::from_column_slice(u);
    let vertices = j
        .vertices
        .iter()
        .map(|a| (a * &uv).iter().copied().collect())
        .collect();
    Polytope::new(vertices)
}

/// Closed interval `[min, max]` of `⟨p, u⟩` over `conv P`.
pub fn linear_range_over_polytope(p: &Polytope, u: &[f64]) -> Result<(f64, f64)> {
    check_dim(p.ambient_dim, u.len())?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in &p.vertices {
        let s = dot(v, u);
        lo = lo.min(s);
        hi = hi.max(s);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(vs: &[&[f64]]) -> Polytope {
        Polytope::new(vs.iter().map(|v| v.to_vec()).collect()).unwrap()
    }

    fn span(n: usize, vs: &[&[f64]]) -> Subspace {
        Subspace::span(n, &vs.iter().map(|v| v.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn project_examples() {
        let v = span(2, &[&[1.0, 0.0]]);
        assert_eq!(project(&[1.0, 1.0], &v).unwrap(), vec![1.0, 0.0]);
        assert_eq!(
            project(&[3.0, 4.0], &Subspace::zero(2)).unwrap(),
            vec![0.0, 0.0]
        );
        let diag = span(3, &[&[1.0, 1.0, 1.0]]);
        let p = project(&[1.0, 2.0, 3.0], &diag).unwrap();
        for x in p {
            assert!((x - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn project_rejects_wrong_dimension() {
        let v = Subspace::full(2);
        assert_eq!(
            v.project(&[1.0, 2.0, 3.0]),
            Err(GeometryError::DimensionMismatch {
                expected: 2,
                found: 3
            })
        );
    }

    #[test]
    fn complement_is_orthogonal() {
        let v = span(3, &[&[1.0, 1.0, 0.0]]);
        let c = v.complement();
        assert_eq!(c.dim(), 2);
        for b in c.basis() {
            assert!(dot(b, &v.basis()[0]).abs() < 1e-14);
        }
        assert!(Subspace::from_orthonormal(3, c.basis().to_vec()).is_ok());
    }

    #[test]
    fn from_orthonormal_rejects_skewed_basis() {
        assert_eq!(
            Subspace::from_orthonormal(2, vec![vec![1.0, 0.0], vec![0.6, 0.8]]),
            Err(GeometryError::NotOrthonormal)
        );
    }

    #[test]
    fn dist_examples() {
        let seg = poly(&[&[0.0], &[1.0]]);
        assert!(dist_point_polytope(&[0.5], &seg).unwrap() < EPS_QP);
        let p = poly(&[&[0.0, 0.0], &[0.0, 1.0]]);
        assert!((dist_point_polytope(&[2.0, 0.0], &p).unwrap() - 2.0).abs() < EPS_QP);
        let q = poly(&[&[0.0, 0.0], &[2.0, 0.0]]);
        assert!((dist_point_polytope(&[1.0, 1.0], &q).unwrap() - 1.0).abs() < EPS_QP);
    }

    #[test]
    fn dist_to_interior_of_simplex_is_zero() {
        let tri = poly(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert!(dist_point_polytope(&[0.2, 0.2, 0.2], &tri).unwrap() < EPS_QP);
        let d = dist_point_polytope(&[1.0, 1.0, 1.0], &tri).unwrap();
        // nearest point is (1/3, 1/3, 1/3)
        assert!((d - (3.0f64 * (2.0 / 3.0) * (2.0 / 3.0)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hausdorff_examples() {
        let p = poly(&[&[0.0], &[1.0]]);
        assert_eq!(hausdorff(&p, &p).unwrap(), 0.0);
        let q = poly(&[&[0.0], &[2.0]]);
        assert!((hausdorff(&p, &q).unwrap() - 1.0).abs() < EPS_QP);
        let a = poly(&[&[0.0, 0.0]]);
        let b = poly(&[&[3.0, 4.0]]);
        assert!((hausdorff(&a, &b).unwrap() - 5.0).abs() < EPS_QP);
    }

    #[test]
    fn subset_mod_subspace_examples() {
        let e2 = span(2, &[&[0.0, 1.0]]);
        assert!(subset_mod_subspace(&poly(&[&[1.0, 5.0]]), &poly(&[&[1.0, 0.0]]), &e2).unwrap());
        assert!(!subset_mod_subspace(
            &poly(&[&[0.0, 0.0], &[1.0, 0.0]]),
            &poly(&[&[0.0, 0.0]]),
            &e2
        )
        .unwrap());
    }

    #[test]
    fn linear_image_examples() {
        let j = MatrixPolytope::new(vec![
            DMatrix::from_row_slice(1, 1, &[-1.0]),
            DMatrix::from_row_slice(1, 1, &[1.0]),
        ])
        .unwrap();
        let img = linear_image(&j, &[2.0]).unwrap();
        assert_eq!(img.vertices(), &[vec![-2.0], vec![2.0]]);
        let zero = linear_image(&j, &[0.0]).unwrap();
        assert!(zero.vertices().iter().all(|v| v[0] == 0.0));
        let rows = MatrixPolytope::new(vec![
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DMatrix::from_row_slice(1, 2, &[0.0, 1.0]),
        ])
        .unwrap();
        let img = linear_image(&rows, &[1.0, 1.0]).unwrap();
        assert!(img.is_singleton(0.0));
        assert_eq!(img.vertices()[0], vec![1.0]);
        assert!(matches!(
            linear_image(&rows, &[1.0]),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn linear_range_examples() {
        assert_eq!(
            linear_range_over_polytope(&poly(&[&[-1.0], &[1.0]]), &[1.0]).unwrap(),
            (-1.0, 1.0)
        );
        assert_eq!(
            linear_range_over_polytope(&poly(&[&[2.0, 3.0]]), &[1.0, -1.0]).unwrap(),
            (-1.0, -1.0)
        );
        assert_eq!(
            linear_range_over_polytope(&poly(&[&[1.0, 0.0], &[0.0, 1.0]]), &[2.0, 1.0]).unwrap(),
            (1.0, 2.0)
        );
    }

    #[test]
    fn polytope_rejects_bad_input() {
        assert_eq!(Polytope::new(vec![]), Err(GeometryError::EmptyPolytope));
        assert_eq!(
            Polytope::new(vec![vec![f64::NAN]]),
            Err(GeometryError::NonFinite)
        );
        assert!(matches!(
            Polytope::new(vec![vec![0.0], vec![0.0, 1.0]]),
            Err(GeometryError::DimensionMismatch { .. })
        ));
        assert_eq!(
            Polytope::new(vec![vec![0.0; 9]]),
            Err(GeometryError::UnsupportedDimension(9))
        );
    }

    #[test]
    fn lex_min_vertex_orders_row_major() {
        let j = MatrixPolytope::new(vec![
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 5.0, 5.0]),
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 9.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, -3.0, 0.0, 0.0]),
        ])
        .unwrap();
        assert_eq!(row_major(j.lex_min_vertex()), vec![0.0, 1.0, -1.0, 9.0]);
    }
}
