//! Sphere sweeps around a base point: Conditions 1 and 2, the base-point
//! first-order approximation, and the finite-difference cross-check.

use rand::Rng;

use super::{
    fit_slope, ls_slope, max_nan, unit_vector, ConditionId, ConditionReport, TableKey,
    VerifierConfig, Witness,
};
use crate::geometry;
use crate::oracles::GeneralizedDerivative;
use crate::piecewise::{PiecewiseFunction, Sign, EPS_CELL};
use crate::verdict::Verdict;

#[derive(Clone, Copy)]
enum Anchor {
    /// `F(y) - F(x) - D(y, y - x)`
    Forward,
    /// `F(y) - F(x) + D(y, x - y)`
    Backward,
    /// `F(y) - F(x) - D(x, y - x)`
    Base,
}

/// Random unit directions plus `±` the tangent basis of the stratum through
/// `x`.
fn sweep_directions(
    f: &PiecewiseFunction,
    x: &[f64],
    cfg: &VerifierConfig,
    rng: &mut impl Rng,
) -> Vec<Vec<f64>> {
    let n = f.dim();
    let mut dirs: Vec<Vec<f64>> = (0..cfg.random_directions)
        .map(|_| unit_vector(n, rng))
        .collect();
    let tangent = f.arrangement().tangent(&f.sign_vector(x));
    for b in tangent.basis() {
        dirs.push(b.clone());
        dirs.push(geometry::scale(-1.0, b));
    }
    dirs
}

/// `y = x + h` sits inside the tolerance band of a hyperplane that the
/// segment actually crosses, so the cell classification at `y` is
/// unreliable.
fn ambiguous(f: &PiecewiseFunction, x: &[f64], h: &[f64]) -> bool {
    let y = geometry::add(x, h);
    let h_tol = EPS_CELL * geometry::norm(h);
    f.arrangement().hyperplanes().iter().any(|p| {
        let at_y = Sign::of(p.value(&y), EPS_CELL);
        let approach = match Sign::of(p.value(x), EPS_CELL) {
            Sign::Zero => Sign::of(geometry::dot(p.normal(), h), h_tol),
            s => s,
        };
        at_y == Sign::Zero && approach != Sign::Zero
    })
}

fn sweep(
    f: &PiecewiseFunction,
    d: &dyn GeneralizedDerivative,
    x: &[f64],
    cfg: &VerifierConfig,
    rng: &mut impl Rng,
    condition: ConditionId,
    anchor: Anchor,
) -> ConditionReport {
    let mut report = ConditionReport::new(condition, TableKey::Radius);
    let threshold = cfg.residual_threshold * f.lipschitz_hint().unwrap_or(1.0).max(1.0);
    let dirs = sweep_directions(f, x, cfg, rng);
    let mut worst: Option<Witness> = None;
    let mut over = 0;
    for (k, &r) in cfg.radii.iter().enumerate() {
        let last = k + 1 == cfg.radii.len();
        let mut row_max: f64 = 0.0;
        for dir in &dirs {
            let h = geometry::scale(r, dir);
            let y = geometry::add(x, &h);
            if ambiguous(f, x, &h) {
                report.skipped += 1;
                continue;
            }
            let inc = match f.increment(x, &h) {
                Ok(v) => v,
                Err(e) => {
                    report.inconclusive(format!("F at {y:?}: {e}"));
                    row_max = f64::NAN;
                    continue;
                }
            };
            let (at, u, sign) = match anchor {
                Anchor::Forward => (&y, h.clone(), -1.0),
                Anchor::Backward => (&y, geometry::scale(-1.0, &h), 1.0),
                Anchor::Base => (&x.to_vec(), h.clone(), -1.0),
            };
            let set = match d.eval(at, &u) {
                Ok(p) => p,
                Err(e) => {
                    report.inconclusive(format!("D at {at:?}: {e}"));
                    row_max = f64::NAN;
                    continue;
                }
            };
            let mut res: f64 = 0.0;
            let mut offending = set.vertices()[0].clone();
            for v in set.vertices() {
                let val = geometry::norm(&geometry::axpy(&inc, sign, v)) / r;
                if val > res || val.is_nan() {
                    res = val;
                    offending = v.clone();
                }
            }
            report.samples.push(res);
            row_max = max_nan(row_max, res);
            if last && !(res <= threshold) {
                over += 1;
                if worst.as_ref().is_none_or(|w| res > w.residual) {
                    worst = Some(Witness {
                        point: y.clone(),
                        direction: u.clone(),
                        value: offending,
                        residual: res,
                    });
                }
            }
        }
        report.residuals.push((r, row_max));
    }
    report.slope = fit_slope(&report.residuals);
    if report.verdict == Verdict::Inconclusive {
        return report;
    }
    if report.residuals.len() < 4 || report.residuals.iter().any(|(_, v)| v.is_nan()) {
        report.inconclusive("too few usable radii".into());
        return report;
    }
    let smallest = report.residuals.last().map(|r| r.1).unwrap_or(f64::NAN);
    let decays = report.slope.is_some_and(|s| s >= cfg.slope_threshold);
    if smallest <= threshold || decays {
        report.verdict = Verdict::Pass;
    } else {
        report.verdict = Verdict::Fail;
        report.failures = over.max(1) - 1;
        report.fail(worst.expect("a residual above threshold was recorded"));
    }
    report
}

/// Condition 1: `F(y) - F(x) - D(y, y - x) = o(|y - x|)` along sampled
/// spheres around `x` (the point `y = x` itself is never sampled).
pub fn check_semismooth_i(
    f: &PiecewiseFunction,
    d: &dyn GeneralizedDerivative,
    x: &[f64],
    cfg: &VerifierConfig,
    rng: &mut impl Rng,
) -> ConditionReport {
    sweep(f, d, x, cfg, rng, ConditionId::SemismoothI, Anchor::Forward)
}

/// Condition 2: `F(y) - F(x) + D(y, x - y) = o(|y - x|)`.
pub fn check_semismooth_ii(
    f: &PiecewiseFunction,
    d: &dyn GeneralizedDerivative,
    x: &[f64],
    cfg: &VerifierConfig,
    rng: &mut impl Rng,
) -> ConditionReport {
    sweep(f, d, x, cfg, rng, ConditionId::SemismoothII, Anchor::Backward)
}

/// `F(y) - F(x) - D(x, y - x) = o(|y - x|)`, with `D` frozen at the base
/// point. Holds for the exact directional derivative of any piecewise
/// polynomial map, but not for a fixed-branch selection at a kink.
pub fn check_first_order(
    f: &PiecewiseFunction,
    d: &dyn GeneralizedDerivative,
    x: &[f64],
    cfg: &VerifierConfig,
    rng: &mut impl Rng,
) -> ConditionReport {
    sweep(f, d, x, cfg, rng, ConditionId::FirstOrder, Anchor::Base)
}

/// Compares `F'(x, u)` with forward differences `(F(x + tu) - F(x)) / t` at
/// `cfg.fd_pairs` random pairs. A pair passes when every error is below
/// `fd_exact` or the log-log error slope over the steps reaches `fd_slope`.
pub fn check_finite_differences(
    f: &PiecewiseFunction,
    cfg: &VerifierConfig,
    rng: &mut impl Rng,
) -> ConditionReport {
    let mut report = ConditionReport::new(ConditionId::FiniteDifference, TableKey::Step);
    let mut table: Vec<(f64, f64)> = cfg.fd_steps.iter().map(|t| (*t, 0.0)).collect();
    let mut min_slope: Option<f64> = None;
    for _ in 0..cfg.fd_pairs {
        let x = f.bbox().sample(rng);
        let u = unit_vector(f.dim(), rng);
        let exact = match f.directional_derivative(&x, &u) {
            Ok(v) => v,
            Err(e) => {
                report.inconclusive(format!("F'({x:?}, {u:?}): {e}"));
                continue;
            }
        };
        let mut errors = Vec::with_capacity(cfg.fd_steps.len());
        for (row, &t) in table.iter_mut().zip(&cfg.fd_steps) {
            let err = match f.increment(&x, &geometry::scale(t, &u)) {
                Ok(inc) => geometry::dist(&geometry::scale(1.0 / t, &inc), &exact),
                Err(_) => f64::NAN,
            };
            row.1 = max_nan(row.1, err);
            report.samples.push(err);
            errors.push(err);
        }
        if errors.iter().any(|e| e.is_nan()) {
            report.inconclusive(format!("forward difference undefined at {x:?}"));
            continue;
        }
        if errors.iter().all(|e| *e <= cfg.fd_exact) {
            continue;
        }
        let pts: Vec<(f64, f64)> = cfg
            .fd_steps
            .iter()
            .zip(&errors)
            .map(|(t, e)| (t.ln(), e.max(1e-14).ln()))
            .collect();
        let s = ls_slope(&pts);
        min_slope = Some(min_slope.map_or(s, |m: f64| m.min(s)));
        if !(s >= cfg.fd_slope) {
            report.fail(Witness {
                point: x,
                direction: u,
                value: errors,
                residual: s,
            });
        }
    }
    report.residuals = table;
    report.slope = min_slope;
    if report.failures > 0 {
        report.verdict = Verdict::Fail;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{oracle_branch_selection, oracle_clarke_linear, oracle_exact_directional, parse_oracle};
    use crate::testing::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(3)
    }

    #[test]
    fn clarke_on_abs_has_zero_residuals() {
        let f = Arc::new(fixtures::abs1d());
        let d = oracle_clarke_linear(f.clone());
        let cfg = VerifierConfig::default();
        for check in [check_semismooth_i, check_semismooth_ii] {
            let r = check(&f, d.as_ref(), &[0.0], &cfg, &mut rng());
            assert_eq!(r.verdict, Verdict::Pass);
            assert!(r.samples.iter().all(|s| *s == 0.0));
            assert_eq!(r.residuals.len(), 7);
        }
    }

    #[test]
    fn scaled_identity_has_unit_residual() {
        let f = Arc::new(fixtures::id1d());
        let d = parse_oracle("scale:2", &f).unwrap();
        let cfg = VerifierConfig::default();
        for check in [check_semismooth_i, check_semismooth_ii] {
            let r = check(&f, d.as_ref(), &[0.0], &cfg, &mut rng());
            assert_eq!(r.verdict, Verdict::Fail);
            assert!(!r.witnesses.is_empty());
            for (_, v) in &r.residuals {
                assert!((v - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn smooth_map_decays_linearly() {
        let f = Arc::new(fixtures::smooth2d());
        let d = oracle_exact_directional(f.clone());
        let r = check_semismooth_i(&f, d.as_ref(), &[0.7, -0.4], &VerifierConfig::default(), &mut rng());
        assert_eq!(r.verdict, Verdict::Pass);
        let s = r.slope.unwrap();
        assert!((s - 1.0).abs() < 0.05, "slope {s}");
        let r = check_semismooth_ii(&f, d.as_ref(), &[0.7, -0.4], &VerifierConfig::default(), &mut rng());
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn tangent_directions_expose_zeroed_strata() {
        let f = Arc::new(fixtures::max2d());
        let d = parse_oracle("zero-strata:exact", &f).unwrap();
        let r = check_semismooth_i(&f, d.as_ref(), &[0.0, 0.0], &VerifierConfig::default(), &mut rng());
        assert_eq!(r.verdict, Verdict::Fail);
        let w = &r.witnesses[0];
        assert!((w.direction[0] - w.direction[1]).abs() < 1e-15);
    }

    #[test]
    fn base_point_convention_separates_branch_selection() {
        let f = Arc::new(fixtures::abs1d());
        let cfg = VerifierConfig::default();
        let exact = oracle_exact_directional(f.clone());
        let branch = oracle_branch_selection(f.clone());
        assert_eq!(check_first_order(&f, exact.as_ref(), &[0.0], &cfg, &mut rng()).verdict, Verdict::Pass);
        assert_eq!(check_first_order(&f, branch.as_ref(), &[0.0], &cfg, &mut rng()).verdict, Verdict::Fail);
        // the moving-point convention cannot tell them apart
        assert_eq!(check_semismooth_i(&f, branch.as_ref(), &[0.0], &cfg, &mut rng()).verdict, Verdict::Pass);
    }

    #[test]
    fn finite_differences_on_fixtures() {
        let cfg = VerifierConfig::default();
        for f in [fixtures::abs1d(), fixtures::pwquad2d(), fixtures::maxreg2d(), fixtures::xabsx()] {
            let r = check_finite_differences(&f, &cfg, &mut rng());
            assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.witnesses);
        }
    }
}
