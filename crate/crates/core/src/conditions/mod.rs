//! Sampling verifiers for the five first-order approximation conditions and
//! the auxiliary properties around them.
//!
//! Every check is report-only: it never errors, and a failed evaluation of
//! the oracle or the function turns the verdict inconclusive with a note.

mod curves;
mod matrix;
mod semismooth;
mod strata;

use std::fmt;

use rand::Rng;

pub use curves::{check_conservative, check_curve_velocity, check_directional_symmetry};
pub use matrix::{equivalence_matrix, run_condition, run_conditions, MatrixEntry, MatrixRow};
pub use semismooth::{
    check_finite_differences, check_first_order, check_semismooth_i, check_semismooth_ii,
};
pub use strata::{
    check_projection_formula, check_stratified_derivative, check_stratified_subdifferential,
};

use crate::geometry;
use crate::verdict::Verdict;

/// Stored witnesses per report; the count of failures is kept separately.
pub const MAX_WITNESSES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifierConfig {
    /// Strictly decreasing sphere radii around the base point.
    pub radii: Vec<f64>,
    pub random_directions: usize,
    pub curve_samples: usize,
    pub eps_eq: f64,
    pub boundary_skip_tol: f64,
    /// Absolute bound on the smallest-radius residual, multiplied by
    /// `max(1, lipschitz_hint)`.
    pub residual_threshold: f64,
    pub slope_threshold: f64,
    pub ae_fraction: f64,
    pub cell_points: usize,
    pub cell_margin: f64,
    pub cell_max_tries: usize,
    pub random_tangent_directions: usize,
    pub non_tangent_directions: usize,
    pub velocity_tol: f64,
    pub fd_steps: Vec<f64>,
    pub fd_pairs: usize,
    pub fd_slope: f64,
    /// Pairs whose forward-difference errors all stay below this are exact.
    pub fd_exact: f64,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        VerifierConfig {
            radii: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7],
            random_directions: 64,
            curve_samples: 512,
            eps_eq: 1e-9,
            boundary_skip_tol: 1e-10,
            residual_threshold: 1e-6,
            slope_threshold: 0.5,
            ae_fraction: 0.99,
            cell_points: 20,
            cell_margin: 1e-6,
            cell_max_tries: 100_000,
            random_tangent_directions: 10,
            non_tangent_directions: 5,
            velocity_tol: 1e-8,
            fd_steps: vec![1e-3, 1e-4, 1e-5],
            fd_pairs: 100,
            fd_slope: 0.9,
            fd_exact: 1e-10,
        }
    }
}

impl VerifierConfig {
    /// Checks the structural invariants of the configuration.
    pub fn validate(&self) -> Result<(), String> {
        if self.radii.is_empty() || self.radii.windows(2).any(|w| !(w[0] > w[1])) {
            return Err("radii must be nonempty and strictly decreasing".into());
        }
        if self.radii.iter().any(|r| !(*r > 0.0)) {
            return Err("radii must be positive".into());
        }
        let tols = [
            self.eps_eq,
            self.boundary_skip_tol,
            self.residual_threshold,
            self.cell_margin,
            self.velocity_tol,
            self.fd_exact,
        ];
        if tols.iter().any(|t| !(*t > 0.0)) {
            return Err("tolerances must be positive".into());
        }
        if !(self.ae_fraction > 0.0 && self.ae_fraction <= 1.0) {
            return Err("ae_fraction must lie in (0, 1]".into());
        }
        if self.curve_samples == 0 || self.fd_steps.len() < 2 {
            return Err("sample counts too small".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConditionId {
    SemismoothI,
    SemismoothII,
    Conservative,
    StratifiedDerivative,
    StratifiedSubdifferential,
    Symmetry,
    ProjectionFormula,
    FirstOrder,
    CurveVelocity,
    FiniteDifference,
}

impl ConditionId {
    pub const NUMBERED: [ConditionId; 5] = [
        ConditionId::SemismoothI,
        ConditionId::SemismoothII,
        ConditionId::Conservative,
        ConditionId::StratifiedDerivative,
        ConditionId::StratifiedSubdifferential,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConditionId::SemismoothI => "1",
            ConditionId::SemismoothII => "2",
            ConditionId::Conservative => "3",
            ConditionId::StratifiedDerivative => "4",
            ConditionId::StratifiedSubdifferential => "5",
            ConditionId::Symmetry => "symmetry",
            ConditionId::ProjectionFormula => "projection_formula",
            ConditionId::FirstOrder => "first_order",
            ConditionId::CurveVelocity => "curve_velocity",
            ConditionId::FiniteDifference => "finite_difference",
        }
    }

    pub fn parse(s: &str) -> Option<ConditionId> {
        [
            ConditionId::SemismoothI,
            ConditionId::SemismoothII,
            ConditionId::Conservative,
            ConditionId::StratifiedDerivative,
            ConditionId::StratifiedSubdifferential,
            ConditionId::Symmetry,
            ConditionId::ProjectionFormula,
            ConditionId::FirstOrder,
            ConditionId::CurveVelocity,
            ConditionId::FiniteDifference,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What the first column of a residual table indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKey {
    Radius,
    Curve,
    Cell,
    Step,
}

impl TableKey {
    pub fn as_str(self) -> &'static str {
        match self {
            TableKey::Radius => "radius",
            TableKey::Curve => "curve",
            TableKey::Cell => "cell",
            TableKey::Step => "step",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    /// Offending value (a vertex of `D`, or a difference quotient).
    pub value: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub verdict: Verdict,
    pub key: TableKey,
    /// `(key, max residual)` rows.
    pub residuals: Vec<(f64, f64)>,
    /// Fitted log-log decay slope, present when at least four rows with
    /// positive residuals were evaluated.
    pub slope: Option<f64>,
    pub witnesses: Vec<Witness>,
    pub failures: usize,
    /// Raw residual per sample, in evaluation order.
    pub samples: Vec<f64>,
    pub skipped: usize,
    pub notes: Vec<String>,
}

impl ConditionReport {
    fn new(condition: ConditionId, key: TableKey) -> Self {
        ConditionReport {
            condition,
            verdict: Verdict::Pass,
            key,
            residuals: Vec::new(),
            slope: None,
            witnesses: Vec::new(),
            failures: 0,
            samples: Vec::new(),
            skipped: 0,
            notes: Vec::new(),
        }
    }

    fn fail(&mut self, w: Witness) {
        self.failures += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(w);
        }
    }

    fn inconclusive(&mut self, note: String) {
        if self.notes.len() < MAX_WITNESSES {
            self.notes.push(note);
        }
        self.verdict = Verdict::all([self.verdict, Verdict::Inconclusive]);
    }

    /// Combines reports of the same condition taken at several base points.
    /// Radius tables are merged by maximum and refitted.
    pub fn merge(reports: Vec<ConditionReport>) -> ConditionReport {
        let mut it = reports.into_iter();
        let mut out = it.next().expect("at least one report");
        for r in it {
            out.verdict = Verdict::all([out.verdict, r.verdict]);
            if out.key == TableKey::Radius {
                for (k, v) in r.residuals {
                    match out.residuals.iter_mut().find(|(k2, _)| *k2 == k) {
                        Some(row) => row.1 = max_nan(row.1, v),
                        None => out.residuals.push((k, v)),
                    }
                }
            } else {
                let offset = out.residuals.len() as f64;
                out.residuals
                    .extend(r.residuals.into_iter().map(|(k, v)| (k + offset, v)));
            }
            out.failures += r.failures;
            for w in r.witnesses {
                if out.witnesses.len() < MAX_WITNESSES {
                    out.witnesses.push(w);
                }
            }
            out.samples.extend(r.samples);
            out.skipped += r.skipped;
            for n in r.notes {
                if out.notes.len() < MAX_WITNESSES {
                    out.notes.push(n);
                }
            }
        }
        if out.key == TableKey::Radius {
            out.slope = fit_slope(&out.residuals);
        }
        out
    }
}

/// Maximum that propagates NaN.
fn max_nan(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Least-squares slope of `ln(value)` against `ln(key)` over rows with
/// positive finite values; `None` with fewer than four such rows.
pub fn fit_slope(rows: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(k, v)| *k > 0.0 && *v > 0.0 && v.is_finite())
        .map(|(k, v)| (k.ln(), v.ln()))
        .collect();
    if pts.len() < 4 {
        return None;
    }
    Some(ls_slope(&pts))
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Uniform random unit vector.
pub(crate) fn unit_vector(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = geometry::norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return geometry::scale(1.0 / r, &v);
        }
    }
}

/// Largest distance from a vertex of `vertices` to `target`.
pub(crate) fn max_vertex_distance(vertices: &[Vec<f64>], target: &[f64]) -> f64 {
    vertices
        .iter()
        .map(|v| geometry::dist(v, target))
        .fold(0.0, max_nan)
}
