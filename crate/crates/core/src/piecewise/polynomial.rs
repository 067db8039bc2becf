//! Multivariate and univariate real polynomials.

use std::collections::BTreeMap;

use super::PiecewiseError;

/// Default cap on the total degree of a piece.
pub const MAX_DEGREE: u32 = 6;

/// Sparse multivariate polynomial, terms sorted by exponent multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    num_vars: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl Polynomial {
    /// Builds a polynomial, merging duplicate exponents and dropping zero
    /// coefficients.
    pub fn new(
        num_vars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, f64)>,
    ) -> Result<Self, PiecewiseError> {
        let mut merged: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (exp, coef) in terms {
            if exp.len() != num_vars {
                return Err(PiecewiseError::DimensionMismatch {
                    expected: num_vars,
                    found: exp.len(),
                });
            }
            if !coef.is_finite() {
                return Err(PiecewiseError::NonFinite);
            }
            *merged.entry(exp).or_insert(0.0) += coef;
        }
        Ok(Polynomial {
            num_vars,
            terms: merged.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        })
    }

    pub fn zero(num_vars: usize) -> Self {
        Polynomial {
            num_vars,
            terms: Vec::new(),
        }
    }

    pub fn constant(num_vars: usize, c: f64) -> Self {
        Polynomial::new(num_vars, [(vec![0; num_vars], c)]).expect("well-formed")
    }

    /// `c0 + Σ coeffs[j] x_j`
    pub fn affine(coeffs: &[f64], c0: f64) -> Self {
        let n = coeffs.len();
        let mut terms = vec![(vec![0; n], c0)];
        for (j, &c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[j] = 1;
            terms.push((e, c));
        }
        Polynomial::new(n, terms).expect("well-formed")
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> &[(Vec<u32>, f64)] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(e, _)| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * monomial(e, x))
            .sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.num_vars];
        for (e, c) in &self.terms {
            for j in 0..self.num_vars {
                if e[j] == 0 {
                    continue;
                }
                let mut prod = c * f64::from(e[j]);
                for (k, (&ek, &xk)) in e.iter().zip(x).enumerate() {
                    let p = if k == j { ek - 1 } else { ek };
                    prod *= xk.powi(p as i32);
                }
                g[j] += prod;
            }
        }
        g
    }

    pub fn partial(&self, var: usize) -> Polynomial {
        let terms = self.terms.iter().filter(|(e, _)| e[var] > 0).map(|(e, c)| {
            let mut e2 = e.clone();
            e2[var] -= 1;
            (e2, c * f64::from(e[var]))
        });
        Polynomial::new(self.num_vars, terms).expect("well-formed")
    }

    /// Re-expansion about `x`: the returned polynomial `Q` satisfies
    /// `Q(h) = P(x + h)`.
    pub fn shift(&self, x: &[f64]) -> Polynomial {
        let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (e, c) in &self.terms {
            // expand Π_j (x_j + h_j)^{e_j}
            let mut partial: Vec<(Vec<u32>, f64)> = vec![(vec![0; self.num_vars], *c)];
            for j in 0..self.num_vars {
                let ej = e[j];
                if ej == 0 {
                    continue;
                }
                let mut next = Vec::with_capacity(partial.len() * (ej as usize + 1));
                for (pe, pc) in &partial {
                    for k in 0..=ej {
                        let coef = pc * binomial(ej, k) * x[j].powi((ej - k) as i32);
                        let mut ne = pe.clone();
                        ne[j] = k;
                        next.push((ne, coef));
                    }
                }
                partial = next;
            }
            for (pe, pc) in partial {
                *acc.entry(pe).or_insert(0.0) += pc;
            }
        }
        Polynomial {
            num_vars: self.num_vars,
            terms: acc.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        }
    }

    /// `P(x + h) - P(x)` evaluated through the shifted expansion, which avoids
    /// cancellation between two large values when `h` is small.
    pub fn increment(&self, x: &[f64], h: &[f64]) -> f64 {
        self.shift(x)
            .terms
            .iter()
            .filter(|(e, _)| e.iter().any(|&k| k > 0))
            .map(|(e, c)| c * monomial(e, h))
            .sum()
    }

    /// Substitutes univariate polynomials for the variables.
    pub fn compose(&self, curve: &[UniPoly]) -> UniPoly {
        let mut out = UniPoly::zero();
        for (e, c) in &self.terms {
            let mut term = UniPoly::constant(*c);
            for (j, &ej) in e.iter().enumerate() {
                for _ in 0..ej {
                    term = term.mul(&curve[j]);
                }
            }
            out = out.add(&term);
        }
        out
    }
}

fn monomial(e: &[u32], x: &[f64]) -> f64 {
    e.iter()
        .zip(x)
        .map(|(&k, &xi)| if k == 0 { 1.0 } else { xi.powi(k as i32) })
        .product()
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * f64::from(n - i) / f64::from(i + 1);
    }
    r
}

/// Univariate polynomial, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct UniPoly {
    coeffs: Vec<f64>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        UniPoly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() == 1 {
            return UniPoly::zero();
        }
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        UniPoly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(0.0)
                        + other.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|x| c * x).collect())
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    /// All coefficients at most `tol` in magnitude.
    pub fn is_zero(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.abs() <= tol)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, terms: &[(&[u32], f64)]) -> Polynomial {
        Polynomial::new(n, terms.iter().map(|(e, c)| (e.to_vec(), *c))).unwrap()
    }

    #[test]
    fn normalization_merges_and_drops_zeros() {
        let q = p(2, &[(&[1, 0], 1.0), (&[0, 1], 2.0), (&[1, 0], -1.0)]);
        assert_eq!(q.terms(), &[(vec![0, 1], 2.0)]);
        assert_eq!(q.degree(), 1);
    }

    #[test]
    fn rejects_wrong_arity() {
        assert!(matches!(
            Polynomial::new(2, [(vec![1], 1.0)]),
            Err(PiecewiseError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gradient_matches_partials() {
        let q = p(2, &[(&[2, 1], 3.0), (&[0, 3], -1.0), (&[1, 0], 0.5)]);
        let x = [1.5, -0.7];
        let g = q.gradient(&x);
        assert!((g[0] - q.partial(0).eval(&x)).abs() < 1e-14);
        assert!((g[1] - q.partial(1).eval(&x)).abs() < 1e-14);
        // 6xy + 0.5
        assert!((g[0] - (6.0 * 1.5 * -0.7 + 0.5)).abs() < 1e-14);
    }

    #[test]
    fn shift_reproduces_values() {
        let q = p(2, &[(&[3, 1], 2.0), (&[0, 2], -1.0), (&[0, 0], 4.0)]);
        let x = [0.3, -1.2];
        let h = [0.05, 0.4];
        let shifted = q.shift(&x);
        let direct = q.eval(&[x[0] + h[0], x[1] + h[1]]);
        assert!((shifted.eval(&h) - direct).abs() < 1e-13);
        assert!((q.increment(&x, &h) - (direct - q.eval(&x))).abs() < 1e-13);
    }

    #[test]
    fn increment_of_linear_piece_has_no_cancellation() {
        let q = Polynomial::affine(&[1.0, 1.0], 7.0);
        let x = [1.0e3, 2.0];
        let h = [1e-9, -3e-9];
        assert!((q.increment(&x, &h) - (-2e-9)).abs() < 1e-24);
    }

    #[test]
    fn compose_substitutes() {
        // x*y with x = t, y = 1 + t  ->  t + t^2
        let q = p(2, &[(&[1, 1], 1.0)]);
        let c = q.compose(&[UniPoly::new(vec![0.0, 1.0]), UniPoly::new(vec![1.0, 1.0])]);
        assert_eq!(c.coeffs(), &[0.0, 1.0, 1.0]);
    }

    #[test]
    fn unipoly_ops() {
        let a = UniPoly::new(vec![-1.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(a.degree(), 3);
        assert_eq!(a.eval(2.0), 7.0);
        assert_eq!(a.derivative().coeffs(), &[0.0, 0.0, 3.0]);
        assert!(UniPoly::new(vec![]).is_zero(0.0));
        assert_eq!(a.add(&a.scale(-1.0)), UniPoly::zero());
    }
}
