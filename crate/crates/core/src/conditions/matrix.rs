//! Corpus-level table of the five condition verdicts per (function, oracle).

use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use super::{
    check_conservative, check_curve_velocity, check_directional_symmetry, check_finite_differences,
    check_first_order, check_projection_formula, check_semismooth_i, check_semismooth_ii,
    check_stratified_derivative, check_stratified_subdifferential, ConditionId, ConditionReport,
    VerifierConfig,
};
use crate::oracles::{GeneralizedDerivative, SharedOracle};
use crate::piecewise::{Arrangement, Curve, PiecewiseFunction};
use crate::rng::substream;
use crate::verdict::Verdict;

/// One (F, D) binding with the sample data its checks need.
#[derive(Clone)]
pub struct MatrixEntry {
    pub id: String,
    pub function: String,
    pub oracle: String,
    pub f: Arc<PiecewiseFunction>,
    pub d: SharedOracle,
    pub base_points: Vec<Vec<f64>>,
    pub curves: Vec<Curve>,
    pub partition: Option<Arrangement>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRow {
    pub id: String,
    pub function: String,
    pub oracle: String,
    /// Reports for conditions 1 to 5, in order.
    pub reports: Vec<ConditionReport>,
}

impl MatrixRow {
    pub fn verdicts(&self) -> Vec<Verdict> {
        self.reports.iter().map(|r| r.verdict).collect()
    }

    /// Whether the five verdicts agree; `None` when any is inconclusive.
    pub fn consistent(&self) -> Option<bool> {
        let v = self.verdicts();
        if v.contains(&Verdict::Inconclusive) {
            return None;
        }
        Some(v.iter().all(|x| *x == v[0]))
    }
}

/// Runs one check on an entry.
///
/// Conditions 1 and 2 draw from the same substream per base point, so an
/// oracle and its reflection are probed at identical samples. Every other
/// check gets a substream keyed by its own id.
pub fn run_condition(entry: &MatrixEntry, id: ConditionId, cfg: &VerifierConfig, seed: u64) -> ConditionReport {
    let f = entry.f.as_ref();
    let d = entry.d.as_ref();
    let per_point = |check: fn(&PiecewiseFunction, &dyn GeneralizedDerivative, &[f64], &VerifierConfig, &mut ChaCha8Rng) -> ConditionReport| {
        let reports = entry
            .base_points
            .iter()
            .enumerate()
            .map(|(k, x)| {
                let key = k.to_string();
                let group = if id == ConditionId::FirstOrder { "first_order" } else { "semismooth" };
                let mut rng = substream(seed, &[&entry.id, group, &key]);
                check(f, d, x, cfg, &mut rng)
            })
            .collect();
        merge_or_inconclusive(reports, id)
    };
    let mut rng = substream(seed, &[&entry.id, id.as_str()]);
    let partition = entry.partition.as_ref();
    match id {
        ConditionId::SemismoothI => per_point(|f, d, x, c, r| check_semismooth_i(f, d, x, c, r)),
        ConditionId::SemismoothII => per_point(|f, d, x, c, r| check_semismooth_ii(f, d, x, c, r)),
        ConditionId::FirstOrder => per_point(|f, d, x, c, r| check_first_order(f, d, x, c, r)),
        ConditionId::Conservative => check_conservative(f, d, &entry.curves, cfg, &mut rng),
        ConditionId::StratifiedDerivative => check_stratified_derivative(f, d, partition, cfg, &mut rng),
        ConditionId::StratifiedSubdifferential => check_stratified_subdifferential(f, d, partition, cfg, &mut rng),
        ConditionId::Symmetry => check_directional_symmetry(f, d, &entry.curves, cfg, &mut rng),
        ConditionId::ProjectionFormula => check_projection_formula(f, partition, cfg, &mut rng),
        ConditionId::CurveVelocity => check_curve_velocity(f, &entry.curves, cfg),
        ConditionId::FiniteDifference => check_finite_differences(f, cfg, &mut rng),
    }
}

/// Runs Conditions 1 to 5 on one entry.
pub fn run_conditions(entry: &MatrixEntry, cfg: &VerifierConfig, seed: u64) -> Vec<ConditionReport> {
    ConditionId::NUMBERED
        .iter()
        .map(|id| run_condition(entry, *id, cfg, seed))
        .collect()
}

fn merge_or_inconclusive(reports: Vec<ConditionReport>, id: ConditionId) -> ConditionReport {
    if reports.is_empty() {
        let mut r = ConditionReport::new(id, super::TableKey::Radius);
        r.inconclusive("no base points".into());
        return r;
    }
    ConditionReport::merge(reports)
}

pub fn equivalence_matrix(entries: &[MatrixEntry], cfg: &VerifierConfig, seed: u64) -> Vec<MatrixRow> {
    entries
        .iter()
        .map(|e| MatrixRow {
            id: e.id.clone(),
            function: e.function.clone(),
            oracle: e.oracle.clone(),
            reports: run_conditions(e, cfg, seed),
        })
        .collect()
}
