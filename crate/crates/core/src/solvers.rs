//! Semismooth Newton for `F(x) = 0` and a subgradient method for scalar
//! objectives, both driven by deterministic Jacobian selections.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::geometry;
use crate::oracles::{branch_jacobian, OracleError, SharedOracle};
use crate::piecewise::{PiecewiseError, PiecewiseFunction};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("Newton needs a square system, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("subgradient descent needs a scalar function, got {0} outputs")]
    NotScalar(usize),
    #[error("starting point has {found} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("oracle value at {0:?} is not a single vector")]
    NotSingleton(Vec<f64>),
    #[error(transparent)]
    Piecewise(#[from] PiecewiseError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

pub type Result<T> = std::result::Result<T, SolverError>;

/// Where the Newton matrix `A_k` comes from.
#[derive(Clone)]
pub enum JacobianSource {
    /// Lexicographically smallest vertex of the Clarke Jacobian, row-major.
    Clarke,
    /// Jacobian of the lexicographically smallest adjacent piece.
    Branch,
    /// Columns `D(x, e_j)` of a single-valued oracle.
    Oracle(SharedOracle),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub det_tol: f64,
    pub lambda_start: f64,
    pub lambda_max: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-12,
            max_iter: 100,
            det_tol: 1e-12,
            lambda_start: 1e-8,
            lambda_max: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NewtonStatus {
    Converged,
    MaxIter,
    SingularStall,
}

impl NewtonStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            NewtonStatus::Converged => "converged",
            NewtonStatus::MaxIter => "max_iter",
            NewtonStatus::SingularStall => "singular_stall",
        }
    }
}

impl fmt::Display for NewtonStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One attempt to regularize a singular `A_k` as `A_k + λI`.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingAttempt {
    pub iteration: usize,
    pub lambda: f64,
    /// `‖F‖` at the trial point.
    pub trial_residual: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonTrace {
    pub iterates: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    /// `A_k` used for the step from iterate `k`.
    pub jacobians: Vec<DMatrix<f64>>,
    pub damping: Vec<DampingAttempt>,
    pub status: NewtonStatus,
}

impl NewtonTrace {
    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn final_iterate(&self) -> &[f64] {
        self.iterates.last().expect("trace holds the start point")
    }
}

fn select_jacobian(f: &PiecewiseFunction, source: &JacobianSource, x: &[f64]) -> Result<DMatrix<f64>> {
    match source {
        JacobianSource::Clarke => Ok(f.clarke_jacobian(x)?.lex_min_vertex().clone()),
        JacobianSource::Branch => Ok(branch_jacobian(f, x)?),
        JacobianSource::Oracle(d) => oracle_matrix(d, x, d.output_dim()),
    }
}

/// Matrix with columns `D(x, e_j)`; the oracle must be single-valued there.
fn oracle_matrix(d: &SharedOracle, x: &[f64], rows: usize) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut a = DMatrix::zeros(rows, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let set = d.eval(x, &e)?;
        if !set.is_singleton(1e-12) {
            return Err(SolverError::NotSingleton(x.to_vec()));
        }
        for (i, v) in set.vertices()[0].iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    Ok(a)
}

fn solve(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    a.clone()
        .lu()
        .solve(&DVector::from_column_slice(b))
        .map(|s| s.iter().copied().collect())
}

/// `x_{k+1} = x_k - A_k^{-1} F(x_k)` until `‖F(x_k)‖ ≤ tol` or `max_iter`
/// steps.
///
/// When `|det A_k| < det_tol`, `A_k + λI` is tried for `λ` doubling from
/// `lambda_start` up to `lambda_max`; a damped step is accepted only if it
/// decreases `‖F‖`. If no damping helps, the trace ends with
/// `SingularStall`.
pub fn semismooth_newton(
    f: &PiecewiseFunction,
    source: &JacobianSource,
    x0: &[f64],
    cfg: &NewtonConfig,
) -> Result<NewtonTrace> {
    let (n, m) = (f.dim(), f.output_dim());
    if n != m {
        return Err(SolverError::NotSquare { rows: m, cols: n });
    }
    if x0.len() != n {
        return Err(SolverError::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
    }
    let mut x = x0.to_vec();
    let mut fx = f.eval(&x)?;
    let mut trace = NewtonTrace {
        iterates: vec![x.clone()],
        residuals: vec![geometry::norm(&fx)],
        jacobians: Vec::new(),
        damping: Vec::new(),
        status: NewtonStatus::MaxIter,
    };
    for k in 0..=cfg.max_iter {
        let res = geometry::norm(&fx);
        if res <= cfg.tol {
            trace.status = NewtonStatus::Converged;
            return Ok(trace);
        }
        if k == cfg.max_iter {
            break;
        }
        let a = select_jacobian(f, source, &x)?;
        let regular = a.determinant().abs() >= cfg.det_tol;
        let step = if regular { solve(&a, &fx) } else { None };
        let (next, used) = match step {
            Some(s) => (geometry::sub(&x, &s), a),
            None => {
                let mut accepted = None;
                let mut lambda = cfg.lambda_start;
                while lambda <= cfg.lambda_max {
                    let damped = &a + DMatrix::identity(n, n) * lambda;
                    if damped.determinant().abs() >= cfg.det_tol {
                        if let Some(s) = solve(&damped, &fx) {
                            let trial = geometry::sub(&x, &s);
                            let trial_res = geometry::norm(&f.eval(&trial)?);
                            let ok = trial_res < res;
                            trace.damping.push(DampingAttempt {
                                iteration: k,
                                lambda,
                                trial_residual: trial_res,
                                accepted: ok,
                            });
                            if ok {
                                accepted = Some((trial, damped));
                                break;
                            }
                        }
                    }
                    lambda *= 2.0;
                }
                match accepted {
                    Some(pair) => pair,
                    None => {
                        trace.status = NewtonStatus::SingularStall;
                        return Ok(trace);
                    }
                }
            }
        };
        trace.jacobians.push(used);
        x = next;
        fx = f.eval(&x)?;
        trace.iterates.push(x.clone());
        trace.residuals.push(geometry::norm(&fx));
    }
    trace.status = NewtonStatus::MaxIter;
    Ok(trace)
}

/// Ratios `e_{k+1} / e_k` of the errors `e_k = ‖x_k - x*‖`, kept while
/// `e_k > floor`. `x*` is `root` when given, otherwise the final iterate.
pub fn newton_rate_estimate(trace: &NewtonTrace, root: Option<&[f64]>, floor: f64) -> Vec<f64> {
    if trace.iterates.len() < 2 {
        return Vec::new();
    }
    let star = root.unwrap_or_else(|| trace.final_iterate());
    let errors: Vec<f64> = trace
        .iterates
        .iter()
        .map(|x| geometry::dist(x, star))
        .collect();
    errors
        .windows(2)
        .take_while(|w| w[0] > floor)
        .map(|w| w[1] / w[0])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Constant(f64),
    /// `α_k = 1 / k`
    OneOverK,
    /// `α_k = c / √k`
    InvSqrt(f64),
}

impl StepRule {
    /// Step size at iteration `k ≥ 1`.
    pub fn alpha(self, k: usize) -> f64 {
        let k = k as f64;
        match self {
            StepRule::Constant(c) => c,
            StepRule::OneOverK => 1.0 / k,
            StepRule::InvSqrt(c) => c / k.sqrt(),
        }
    }

    /// Parses `constant:<c>`, `one_over_k`, `inv_sqrt:<c>`.
    pub fn parse(s: &str) -> Option<StepRule> {
        let positive = |c: &str| c.parse::<f64>().ok().filter(|c| *c > 0.0 && c.is_finite());
        match s.split_once(':') {
            None if s == "one_over_k" => Some(StepRule::OneOverK),
            Some(("constant", c)) => positive(c).map(StepRule::Constant),
            Some(("inv_sqrt", c)) => positive(c).map(StepRule::InvSqrt),
            _ => None,
        }
    }
}

impl fmt::Display for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepRule::Constant(c) => write!(f, "constant:{c}"),
            StepRule::OneOverK => f.write_str("one_over_k"),
            StepRule::InvSqrt(c) => write!(f, "inv_sqrt:{c}"),
        }
    }
}

#[derive(Clone)]
pub enum SubgradientSource {
    /// Lexicographically smallest vertex of the Clarke subdifferential.
    Clarke,
    /// Gradient assembled from `D(x, e_j)` of a single-valued oracle.
    Oracle(SharedOracle),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientTrace {
    pub iterates: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// `g_k` used for the step from iterate `k`.
    pub subgradients: Vec<Vec<f64>>,
    pub steps: Vec<f64>,
}

impl SubgradientTrace {
    pub fn best_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `x_{k+1} = x_k - α_k g_k` for `k = 1..=iters`.
pub fn subgradient_descent(
    f: &PiecewiseFunction,
    source: &SubgradientSource,
    x0: &[f64],
    rule: StepRule,
    iters: usize,
) -> Result<SubgradientTrace> {
    if f.output_dim() != 1 {
        return Err(SolverError::NotScalar(f.output_dim()));
    }
    if x0.len() != f.dim() {
        return Err(SolverError::DimensionMismatch {
            expected: f.dim(),
            found: x0.len(),
        });
    }
    let mut x = x0.to_vec();
    let mut trace = SubgradientTrace {
        iterates: vec![x.clone()],
        values: vec![f.eval(&x)?[0]],
        subgradients: Vec::new(),
        steps: Vec::new(),
    };
    for k in 1..=iters {
        let g = match source {
            SubgradientSource::Clarke => f.component_clarke(&x, 0)?.lex_min_vertex().to_vec(),
            SubgradientSource::Oracle(d) => {
                let a = oracle_matrix(d, &x, 1)?;
                a.row(0).iter().copied().collect()
            }
        };
        let alpha = rule.alpha(k);
        x = geometry::axpy(&x, -alpha, &g);
        trace.subgradients.push(g);
        trace.steps.push(alpha);
        trace.values.push(f.eval(&x)?[0]);
        trace.iterates.push(x.clone());
    }
    Ok(trace)
}
