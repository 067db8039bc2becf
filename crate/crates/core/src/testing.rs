//! Programmatic builders for the standard example functions, shared by unit
//! tests, integration tests and the built-in self-test.

pub mod fixtures {
    use std::collections::BTreeMap;

    use crate::piecewise::{
        Arrangement, BoundingBox, Hyperplane, PiecewiseFunction, Polynomial, SignVector,
    };

    type Terms<'a> = &'a [(&'a [u32], f64)];

    /// Builds a function on the default `[-10, 10]^n` window.
    pub fn build(
        dim: usize,
        hyperplanes: &[(&[f64], f64)],
        pieces: &[(&str, &[Terms<'_>])],
    ) -> PiecewiseFunction {
        let arrangement = Arrangement::new(
            dim,
            hyperplanes
                .iter()
                .map(|(a, b)| Hyperplane::new(a.to_vec(), *b).expect("valid hyperplane"))
                .collect(),
        )
        .expect("valid arrangement");
        let mut map: BTreeMap<SignVector, Vec<Polynomial>> = BTreeMap::new();
        let mut output_dim = 0;
        for (key, comps) in pieces {
            output_dim = comps.len();
            let polys = comps
                .iter()
                .map(|terms| {
                    Polynomial::new(dim, terms.iter().map(|(e, c)| (e.to_vec(), *c)))
                        .expect("valid polynomial")
                })
                .collect();
            map.insert(key.parse().expect("valid sign vector"), polys);
        }
        PiecewiseFunction::new(
            arrangement,
            output_dim,
            map,
            BoundingBox::symmetric(dim, 10.0),
            None,
        )
        .expect("valid function")
    }

    /// `|x|`
    pub fn abs1d() -> PiecewiseFunction {
        build(
            1,
            &[(&[1.0], 0.0)],
            &[("-", &[&[(&[1], -1.0)]]), ("+", &[&[(&[1], 1.0)]])],
        )
    }

    /// `x`
    pub fn id1d() -> PiecewiseFunction {
        build(1, &[], &[("", &[&[(&[1], 1.0)]])])
    }

    /// `max(x, y)` over the arrangement `{x = y}`.
    pub fn max2d() -> PiecewiseFunction {
        build(
            2,
            &[(&[1.0, -1.0], 0.0)],
            &[("-", &[&[(&[0, 1], 1.0)]]), ("+", &[&[(&[1, 0], 1.0)]])],
        )
    }

    /// `x |x|`
    pub fn xabsx() -> PiecewiseFunction {
        build(
            1,
            &[(&[1.0], 0.0)],
            &[("-", &[&[(&[2], -1.0)]]), ("+", &[&[(&[2], 1.0)]])],
        )
    }

    /// `(|x|, x)`
    pub fn abs_and_identity() -> PiecewiseFunction {
        build(
            1,
            &[(&[1.0], 0.0)],
            &[
                ("-", &[&[(&[1], -1.0)], &[(&[1], 1.0)]]),
                ("+", &[&[(&[1], 1.0)], &[(&[1], 1.0)]]),
            ],
        )
    }

    /// `x` on `x > 0`, `x + 1` on `x < 0`: discontinuous.
    pub fn jump1d() -> PiecewiseFunction {
        build(
            1,
            &[(&[1.0], 0.0)],
            &[
                ("-", &[&[(&[1], 1.0), (&[0], 1.0)]]),
                ("+", &[&[(&[1], 1.0)]]),
            ],
        )
    }

    /// `|x| + |y|`
    pub fn l1norm2d() -> PiecewiseFunction {
        build(
            2,
            &[(&[1.0, 0.0], 0.0), (&[0.0, 1.0], 0.0)],
            &[
                ("--", &[&[(&[1, 0], -1.0), (&[0, 1], -1.0)]]),
                ("-+", &[&[(&[1, 0], -1.0), (&[0, 1], 1.0)]]),
                ("+-", &[&[(&[1, 0], 1.0), (&[0, 1], -1.0)]]),
                ("++", &[&[(&[1, 0], 1.0), (&[0, 1], 1.0)]]),
            ],
        )
    }

    /// `max(x, y) + (x² + y²) / 2`
    pub fn maxreg2d() -> PiecewiseFunction {
        build(
            2,
            &[(&[1.0, -1.0], 0.0)],
            &[
                ("-", &[&[(&[0, 1], 1.0), (&[2, 0], 0.5), (&[0, 2], 0.5)]]),
                ("+", &[&[(&[1, 0], 1.0), (&[2, 0], 0.5), (&[0, 2], 0.5)]]),
            ],
        )
    }

    /// Three-piece piecewise-quadratic map `R² → R²` over `{x = 0, x = 1}`.
    pub fn pwquad2d() -> PiecewiseFunction {
        build(
            2,
            &[(&[1.0, 0.0], 0.0), (&[1.0, 0.0], 1.0)],
            &[
                (
                    "--",
                    &[
                        &[(&[1, 0], 1.0), (&[0, 2], 1.0)],
                        &[(&[0, 1], 1.0), (&[1, 1], 1.0)],
                    ],
                ),
                (
                    "+-",
                    &[
                        &[(&[2, 0], 1.0), (&[1, 0], 2.0), (&[0, 2], 1.0)],
                        &[(&[0, 1], 1.0), (&[1, 1], -1.0)],
                    ],
                ),
                (
                    "++",
                    &[
                        &[(&[2, 0], 1.0), (&[0, 0], 2.0), (&[0, 2], 1.0)],
                        &[(&[2, 0], 1.0), (&[1, 1], 1.0), (&[1, 0], -1.0), (&[0, 1], -1.0)],
                    ],
                ),
            ],
        )
    }

    /// `x² y + y`, no kinks.
    pub fn smooth2d() -> PiecewiseFunction {
        build(2, &[], &[("", &[&[(&[2, 1], 1.0), (&[0, 1], 1.0)]])])
    }

    /// `x + |x| - 1`
    pub fn absplus() -> PiecewiseFunction {
        build(
            1,
            &[(&[1.0], 0.0)],
            &[
                ("-", &[&[(&[0], -1.0)]]),
                ("+", &[&[(&[1], 2.0), (&[0], -1.0)]]),
            ],
        )
    }

    /// `x |x| + x - 2`
    pub fn relukink() -> PiecewiseFunction {
        build(
            1,
            &[(&[1.0], 0.0)],
            &[
                ("-", &[&[(&[2], -1.0), (&[1], 1.0), (&[0], -2.0)]]),
                ("+", &[&[(&[2], 1.0), (&[1], 1.0), (&[0], -2.0)]]),
            ],
        )
    }

    /// `(max(x, y) - 1, x - y)`
    pub fn maxeq2d() -> PiecewiseFunction {
        build(
            2,
            &[(&[1.0, -1.0], 0.0)],
            &[
                (
                    "-",
                    &[&[(&[0, 1], 1.0), (&[0, 0], -1.0)], &[(&[1, 0], 1.0), (&[0, 1], -1.0)]],
                ),
                (
                    "+",
                    &[&[(&[1, 0], 1.0), (&[0, 0], -1.0)], &[(&[1, 0], 1.0), (&[0, 1], -1.0)]],
                ),
            ],
        )
    }

    /// `max(x, 0) - 1`: flat on `x < 0`.
    pub fn flatstall() -> PiecewiseFunction {
        build(
            1,
            &[(&[1.0], 0.0)],
            &[("-", &[&[(&[0], -1.0)]]), ("+", &[&[(&[1], 1.0), (&[0], -1.0)]])],
        )
    }
}

/// Reference implementations used to cross-check the library.
pub mod reference {
    use nalgebra::{DMatrix, DVector};
    use rand::Rng;

    use crate::geometry::{Polytope, Subspace};
    use crate::piecewise::PiecewiseFunction;

    /// `A ⊂ conv(B) + V` by direct search: for every vertex `a` of `A`, try
    /// each subset `S` of `B`'s vertices and solve
    /// `a = Σ_{i∈S} λ_i b_i + Σ_j μ_j v_j`, `Σ λ_i = 1` in least squares,
    /// accepting an exact solution with `λ ≥ 0`. A minimal representation of
    /// a member uses affinely independent vertices, for which the solution
    /// is unique, so the subset search is complete.
    pub fn subset_mod_subspace_brute(a: &Polytope, b: &Polytope, v: &Subspace, tol: f64) -> bool {
        let bs = b.vertices();
        a.vertices().iter().all(|p| {
            (1u32..(1 << bs.len())).any(|mask| {
                let s: Vec<&Vec<f64>> = (0..bs.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| &bs[i])
                    .collect();
                affine_member(p, &s, v.basis(), tol)
            })
        })
    }

    fn affine_member(p: &[f64], s: &[&Vec<f64>], vb: &[Vec<f64>], tol: f64) -> bool {
        let n = p.len();
        let cols = s.len() + vb.len();
        // rows: n coordinates plus the affine constraint
        let mut m = DMatrix::zeros(n + 1, cols);
        let mut rhs = DVector::zeros(n + 1);
        for r in 0..n {
            for (c, q) in s.iter().enumerate() {
                m[(r, c)] = q[r];
            }
            for (c, w) in vb.iter().enumerate() {
                m[(r, s.len() + c)] = w[r];
            }
            rhs[r] = p[r];
        }
        for c in 0..s.len() {
            m[(n, c)] = 1.0;
        }
        rhs[n] = 1.0;
        let Ok(sol) = m.clone().svd(true, true).solve(&rhs, 1e-12) else {
            return false;
        };
        let residual = (&m * &sol - &rhs).norm();
        residual <= tol * (1.0 + rhs.norm()) && (0..s.len()).all(|c| sol[c] >= -tol)
    }

    /// Minimum of a scalar function over the box `[lo, hi]` by a coarse grid
    /// followed by a grid of spacing `resolution` around the coarse optimum.
    pub fn grid_minimum(f: &PiecewiseFunction, lo: &[f64], hi: &[f64], resolution: f64) -> (Vec<f64>, f64) {
        let coarse = resolution * 20.0;
        let (x, _) = grid(f, lo, hi, coarse);
        let lo2: Vec<f64> = x.iter().zip(lo).map(|(c, l)| (c - coarse).max(*l)).collect();
        let hi2: Vec<f64> = x.iter().zip(hi).map(|(c, h)| (c + coarse).min(*h)).collect();
        grid(f, &lo2, &hi2, resolution)
    }

    fn grid(f: &PiecewiseFunction, lo: &[f64], hi: &[f64], h: f64) -> (Vec<f64>, f64) {
        let counts: Vec<usize> = lo
            .iter()
            .zip(hi)
            .map(|(l, u)| ((u - l) / h).round() as usize + 1)
            .collect();
        let total: usize = counts.iter().product();
        let mut best = (lo.to_vec(), f64::INFINITY);
        for mut idx in 0..total {
            let x: Vec<f64> = counts
                .iter()
                .zip(lo)
                .map(|(c, l)| {
                    let k = idx % c;
                    idx /= c;
                    l + k as f64 * h
                })
                .collect();
            let v = f.eval(&x).expect("point inside the domain")[0];
            if v < best.1 {
                best = (x, v);
            }
        }
        best
    }

    /// Random subspace of `R^n` spanned by `k` random vectors.
    pub fn random_subspace(n: usize, k: usize, rng: &mut impl Rng) -> Subspace {
        let vs: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        Subspace::span(n, &vs).expect("dimensions agree")
    }

    pub fn random_polytope(n: usize, count: usize, rng: &mut impl Rng) -> Polytope {
        Polytope::new(
            (0..count)
                .map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect(),
        )
        .expect("nonempty")
    }
}
