//! Checks along polynomial curves: Condition 3, directional symmetry, and the
//! one-sided velocity of `F ∘ γ` at the start point.

use rand::Rng;

use super::{max_nan, max_vertex_distance, ConditionId, ConditionReport, TableKey, VerifierConfig, Witness};
use crate::geometry::{self, hausdorff, Polytope};
use crate::oracles::GeneralizedDerivative;
use crate::piecewise::{Composition, Curve, PiecewiseFunction};
use crate::verdict::Verdict;

/// Residual and offending value at one curve sample `(γ(t), γ̇(t), F ∘ γ, t)`.
type Probe<'a> = dyn FnMut(&[f64], &[f64], &Composition, f64) -> Result<(f64, Vec<f64>), String> + 'a;

/// Samples `t_j = (j + U_j) / N` on every curve and applies the almost-every
/// rule: at least `ae_fraction` of the samples satisfy the check, and every
/// failure lies within `boundary_skip_tol` of a transversal crossing.
fn along_curves(
    f: &PiecewiseFunction,
    curves: &[Curve],
    cfg: &VerifierConfig,
    rng: &mut impl Rng,
    condition: ConditionId,
    probe: &mut Probe<'_>,
) -> ConditionReport {
    let mut report = ConditionReport::new(condition, TableKey::Curve);
    let n = cfg.curve_samples;
    for (ci, curve) in curves.iter().enumerate() {
        let comp = match f.compose_exact(curve) {
            Ok(c) => c,
            Err(e) => {
                report.inconclusive(format!("curve {ci}: {e}"));
                report.residuals.push((ci as f64, f64::NAN));
                continue;
            }
        };
        let mut bad = 0usize;
        let mut bad_off_crossing = 0usize;
        let mut row_max: f64 = 0.0;
        for j in 0..n {
            let t = ((j as f64 + rng.random_range(0.0..1.0)) / n as f64).min(1.0);
            let near_crossing = comp.distance_to_crossing(t) <= cfg.boundary_skip_tol;
            if near_crossing {
                report.skipped += 1;
            }
            let x = curve.eval(t);
            let v = curve.velocity(t);
            let (res, offending) = match probe(&x, &v, &comp, t) {
                Ok(r) => r,
                Err(e) => {
                    if !near_crossing {
                        report.inconclusive(format!("curve {ci} at t = {t:e}: {e}"));
                    }
                    continue;
                }
            };
            report.samples.push(res);
            if !near_crossing {
                row_max = max_nan(row_max, res);
            }
            if !(res <= cfg.eps_eq) {
                bad += 1;
                if !near_crossing {
                    bad_off_crossing += 1;
                    report.fail(Witness {
                        point: x,
                        direction: v,
                        value: offending,
                        residual: res,
                    });
                }
            }
        }
        report.residuals.push((ci as f64, row_max));
        let good = (n - bad) as f64 / n as f64;
        if bad_off_crossing > 0 || good < cfg.ae_fraction {
            report.verdict = Verdict::Fail;
            if bad_off_crossing == 0 {
                report.notes.push(format!(
                    "curve {ci}: only {:.4} of samples satisfy the identity",
                    good
                ));
            }
        }
    }
    report
}

fn eval_set(d: &dyn GeneralizedDerivative, x: &[f64], u: &[f64]) -> Result<Polytope, String> {
    d.eval(x, u).map_err(|e| e.to_string())
}

/// Condition 3 along every curve: `D(γ(t), γ̇(t))` is a single vector equal
/// to `(F ∘ γ)'(t)` for almost every `t`. Boundary segments running inside a
/// stratum are tested like any other; only transversal crossings are
/// exempt.
///
/// Residuals are `max_v |v - (F ∘ γ)'(t)| / (1 + |γ̇(t)|)`, with the vertex
/// diameter folded in so a non-singleton value never passes.
pub fn check_conservative(
    f: &PiecewiseFunction,
    d: &dyn GeneralizedDerivative,
    curves: &[Curve],
    cfg: &VerifierConfig,
    rng: &mut impl Rng,
) -> ConditionReport {
    let mut probe = |x: &[f64], v: &[f64], comp: &Composition, t: f64| {
        let set = eval_set(d, x, v)?;
        let target = comp.derivative(t);
        let scale = 1.0 + geometry::norm(v);
        let res = max_vertex_distance(set.vertices(), &target).max(set.diameter()) / scale;
        let worst = set
            .vertices()
            .iter()
            .max_by(|a, b| geometry::dist(a, &target).total_cmp(&geometry::dist(b, &target)))
            .cloned()
            .unwrap_or_default();
        Ok((res, worst))
    };
    along_curves(f, curves, cfg, rng, ConditionId::Conservative, &mut probe)
}

/// `D(γ(t), γ̇(t)) = -D(γ(t), -γ̇(t))` for almost every `t`.
pub fn check_directional_symmetry(
    f: &PiecewiseFunction,
    d: &dyn GeneralizedDerivative,
    curves: &[Curve],
    cfg: &VerifierConfig,
    rng: &mut impl Rng,
) -> ConditionReport {
    let mut probe = |x: &[f64], v: &[f64], _: &Composition, _: f64| {
        let plus = eval_set(d, x, v)?;
        let minus = eval_set(d, x, &geometry::scale(-1.0, v))?.negated();
        let res = hausdorff(&plus, &minus).map_err(|e| e.to_string())? / (1.0 + geometry::norm(v));
        Ok((res, plus.vertices()[0].clone()))
    };
    along_curves(f, curves, cfg, rng, ConditionId::Symmetry, &mut probe)
}

/// The right derivative of `F ∘ γ` at `t = 0` (from the directional
/// derivative of `F` along `γ̇(0)`) equals the limit `t ↓ 0` of the
/// derivative of the first composition segment.
pub fn check_curve_velocity(
    f: &PiecewiseFunction,
    curves: &[Curve],
    cfg: &VerifierConfig,
) -> ConditionReport {
    let mut report = ConditionReport::new(ConditionId::CurveVelocity, TableKey::Curve);
    for (ci, curve) in curves.iter().enumerate() {
        let x0 = curve.eval(0.0);
        let v0 = curve.velocity(0.0);
        let outcome = f.compose_exact(curve).and_then(|comp| {
            let limit = comp.segments[0]
                .components
                .iter()
                .map(|p| p.derivative().eval(0.0))
                .collect::<Vec<f64>>();
            Ok((limit, f.directional_derivative(&x0, &v0)?))
        });
        let (limit, velocity) = match outcome {
            Ok(pair) => pair,
            Err(e) => {
                report.inconclusive(format!("curve {ci}: {e}"));
                report.residuals.push((ci as f64, f64::NAN));
                continue;
            }
        };
        let res = geometry::dist(&limit, &velocity);
        report.samples.push(res);
        report.residuals.push((ci as f64, res));
        if !(res <= cfg.velocity_tol) {
            report.verdict = Verdict::all([report.verdict, Verdict::Fail]);
            report.fail(Witness {
                point: x0,
                direction: v0,
                value: velocity,
                residual: res,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polytope;
    use crate::oracles::{oracle_clarke_linear, oracle_exact_directional, parse_oracle, FnOracle};
    use crate::piecewise::UniPoly;
    use crate::testing::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(9)
    }

    #[test]
    fn clarke_on_abs_along_a_line() {
        let f = Arc::new(fixtures::abs1d());
        let d = oracle_clarke_linear(f.clone());
        let g = Curve::segment(&[-1.0], &[1.0]);
        let r = check_conservative(&f, d.as_ref(), &[g], &VerifierConfig::default(), &mut rng());
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.samples.len(), 512);
    }

    #[test]
    fn clarke_on_max_along_the_diagonal() {
        let f = Arc::new(fixtures::max2d());
        let d = oracle_clarke_linear(f.clone());
        let g = Curve::segment(&[0.0, 0.0], &[1.0, 1.0]);
        let r = check_conservative(&f, d.as_ref(), &[g.clone()], &VerifierConfig::default(), &mut rng());
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.skipped, 0);
        let z = parse_oracle("zero-strata:clarke", &f).unwrap();
        let r = check_conservative(&f, z.as_ref(), &[g], &VerifierConfig::default(), &mut rng());
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn scaled_identity_fails_everywhere() {
        let f = Arc::new(fixtures::id1d());
        let d = parse_oracle("scale:2", &f).unwrap();
        let g = Curve::segment(&[0.0], &[1.0]);
        let r = check_conservative(&f, d.as_ref(), &[g], &VerifierConfig::default(), &mut rng());
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.failures, 512);
        assert!((r.witnesses[0].value[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn symmetry_examples() {
        let cfg = VerifierConfig::default();
        let f = Arc::new(fixtures::pwquad2d());
        let d = oracle_clarke_linear(f.clone());
        let g = Curve::polynomial(vec![
            UniPoly::new(vec![-1.0, 3.0]),
            UniPoly::new(vec![0.5, -1.0, 2.0]),
        ])
        .unwrap();
        assert_eq!(check_directional_symmetry(&f, d.as_ref(), &[g], &cfg, &mut rng()).verdict, Verdict::Pass);

        let abs = Arc::new(fixtures::abs1d());
        let e = oracle_exact_directional(abs.clone());
        let line = Curve::segment(&[-0.5], &[0.5]);
        let r = check_directional_symmetry(&abs, e.as_ref(), &[line.clone()], &cfg, &mut rng());
        assert_eq!(r.verdict, Verdict::Pass);

        let lopsided = FnOracle::new("lopsided", 1, |x: &[f64], u: &[f64]| {
            let v = if x[0] > 0.0 { u[0].abs() } else { u[0] };
            Polytope::point(vec![v]).unwrap()
        });
        let r = check_directional_symmetry(&abs, &lopsided, &[line], &cfg, &mut rng());
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(!r.witnesses.is_empty());
    }

    #[test]
    fn velocity_limit_matches_at_kinks() {
        let f = fixtures::l1norm2d();
        let curves = vec![
            Curve::polynomial(vec![UniPoly::new(vec![0.0, 1.0, -3.0]), UniPoly::new(vec![0.0, 0.0, 2.0])]).unwrap(),
            Curve::segment(&[0.0, 0.0], &[-1.0, 2.0]),
            Curve::polynomial(vec![UniPoly::new(vec![0.0, 0.0, 1.0]), UniPoly::new(vec![0.0, 0.0, 0.0, -1.0])]).unwrap(),
        ];
        let r = check_curve_velocity(&f, &curves, &VerifierConfig::default());
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.samples.len(), 3);
    }
}
