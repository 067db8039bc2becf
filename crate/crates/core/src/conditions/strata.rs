//! Per-cell checks over a stratification: Conditions 4 and 5 and the
//! projection formula for the Clarke subdifferential.

use rand::Rng;

use super::{max_nan, unit_vector, ConditionId, ConditionReport, TableKey, VerifierConfig, Witness};
use crate::geometry::{self, linear_range_over_polytope};
use crate::oracles::GeneralizedDerivative;
use crate::piecewise::{Arrangement, Cell, PiecewiseFunction};
use crate::verdict::Verdict;

/// Cells of `F`'s arrangement refined by `partition`, with sampled points.
struct Strata {
    cells: Vec<(Cell, Vec<Vec<f64>>)>,
    notes: Vec<String>,
}

fn sample_strata(
    f: &PiecewiseFunction,
    partition: Option<&Arrangement>,
    cfg: &VerifierConfig,
    rng: &mut impl Rng,
) -> Result<Strata, String> {
    let arr = match partition {
        Some(p) => f.arrangement().refine(p).map_err(|e| e.to_string())?,
        None => f.arrangement().clone(),
    };
    let mut out = Strata {
        cells: Vec::new(),
        notes: Vec::new(),
    };
    for cell in arr.enumerate_cells(f.bbox()) {
        let count = if cell.dimension == 0 { 1 } else { cfg.cell_points };
        let mut points = Vec::with_capacity(count);
        for _ in 0..count {
            match arr.sample_in_cell(&cell, f.bbox(), cfg.cell_margin, cfg.cell_max_tries, rng) {
                Some(x) => points.push(x),
                None => break,
            }
        }
        if points.is_empty() {
            out.notes
                .push(format!("cell {} skipped: no sample found", cell.sign_vector));
            continue;
        }
        out.cells.push((cell, points));
    }
    Ok(out)
}

/// `±` basis vectors and random combinations of the cell's tangent space;
/// just the zero vector on a point cell.
fn tangent_directions(cell: &Cell, cfg: &VerifierConfig, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = cell.tangent.ambient_dim();
    let basis = cell.tangent.basis();
    if basis.is_empty() {
        return vec![vec![0.0; n]];
    }
    let mut dirs = Vec::new();
    for b in basis {
        dirs.push(b.clone());
        dirs.push(geometry::scale(-1.0, b));
    }
    for _ in 0..cfg.random_tangent_directions {
        let mut u = vec![0.0; n];
        for b in basis {
            u = geometry::axpy(&u, rng.random_range(-1.0..1.0), b);
        }
        dirs.push(u);
    }
    dirs
}

type CellProbe<'a> = dyn FnMut(&[f64], &[f64]) -> Result<(f64, Vec<f64>), String> + 'a;

fn over_cells(
    f: &PiecewiseFunction,
    partition: Option<&Arrangement>,
    cfg: &VerifierConfig,
    rng: &mut impl Rng,
    condition: ConditionId,
    extra_directions: usize,
    probe: &mut CellProbe<'_>,
) -> ConditionReport {
    let mut report = ConditionReport::new(condition, TableKey::Cell);
    let strata = match sample_strata(f, partition, cfg, rng) {
        Ok(s) => s,
        Err(e) => {
            report.inconclusive(e);
            return report;
        }
    };
    report.notes.extend(strata.notes);
    for (ci, (cell, points)) in strata.cells.iter().enumerate() {
        let mut row_max: f64 = 0.0;
        for x in points {
            let mut dirs = tangent_directions(cell, cfg, rng);
            for _ in 0..extra_directions {
                dirs.push(unit_vector(f.dim(), rng));
            }
            for u in dirs {
                let tangent = cell
                    .tangent
                    .contains(&u, cfg.eps_eq)
                    .expect("dimensions agree");
                if !tangent {
                    // D(x, u) ⊂ J(x) u holds trivially off the tangent space
                    report.skipped += 1;
                    continue;
                }
                match probe(x, &u) {
                    Ok((res, offending)) => {
                        report.samples.push(res);
                        row_max = max_nan(row_max, res);
                        if !(res <= cfg.eps_eq) {
                            report.fail(Witness {
                                point: x.clone(),
                                direction: u,
                                value: offending,
                                residual: res,
                            });
                        }
                    }
                    Err(e) => report.inconclusive(format!("cell {}: {e}", cell.sign_vector)),
                }
            }
        }
        report.residuals.push((ci as f64, row_max));
    }
    if report.failures > 0 {
        report.verdict = Verdict::Fail;
    }
    report
}

/// Condition 4: on every cell `M` and tangent `u ∈ T_M(x)`, `D(x, u)` is the
/// single vector `F'(x, u)`.
///
/// Residual: `max(diam D, max_v |v - F'(x, u)|) / (1 + |u|)`.
pub fn check_stratified_derivative(
    f: &PiecewiseFunction,
    d: &dyn GeneralizedDerivative,
    partition: Option<&Arrangement>,
    cfg: &VerifierConfig,
    rng: &mut impl Rng,
) -> ConditionReport {
    let mut probe = |x: &[f64], u: &[f64]| {
        let set = d.eval(x, u).map_err(|e| e.to_string())?;
        let exact = f.directional_derivative(x, u).map_err(|e| e.to_string())?;
        let mut res = set.diameter();
        let mut worst = set.vertices()[0].clone();
        for v in set.vertices() {
            let r = geometry::dist(v, &exact);
            if r > res {
                res = r;
                worst = v.clone();
            }
        }
        Ok((res / (1.0 + geometry::norm(u)), worst))
    };
    over_cells(f, partition, cfg, rng, ConditionId::StratifiedDerivative, 0, &mut probe)
}

/// Condition 5: `D(x, u) ⊂ J(x) u` with `J` the Clarke Jacobian, decided row
/// by row. For tangent `u` the normal-space term of each component vanishes,
/// so membership reduces to `v_i ∈ ⟨∂_C F_i(x), u⟩` for every vertex `v`.
/// Non-tangent directions are counted as skipped.
pub fn check_stratified_subdifferential(
    f: &PiecewiseFunction,
    d: &dyn GeneralizedDerivative,
    partition: Option<&Arrangement>,
    cfg: &VerifierConfig,
    rng: &mut impl Rng,
) -> ConditionReport {
    let mut probe = |x: &[f64], u: &[f64]| {
        let set = d.eval(x, u).map_err(|e| e.to_string())?;
        let mut ranges = Vec::with_capacity(f.output_dim());
        for i in 0..f.output_dim() {
            let sub = f.component_clarke(x, i).map_err(|e| e.to_string())?;
            ranges.push(linear_range_over_polytope(&sub, u).map_err(|e| e.to_string())?);
        }
        let mut res: f64 = 0.0;
        let mut worst = set.vertices()[0].clone();
        for v in set.vertices() {
            for (vi, (lo, hi)) in v.iter().zip(&ranges) {
                let excess = (lo - vi).max(vi - hi).max(0.0);
                if excess > res || excess.is_nan() {
                    res = excess;
                    worst = v.clone();
                }
            }
        }
        Ok((res / (1.0 + geometry::norm(u)), worst))
    };
    over_cells(
        f,
        partition,
        cfg,
        rng,
        ConditionId::StratifiedSubdifferential,
        cfg.non_tangent_directions,
        &mut probe,
    )
}

/// `⟨∂_C F_i(x), u⟩ = {F_i'(x, u)}` for tangent `u` on every cell.
pub fn check_projection_formula(
    f: &PiecewiseFunction,
    partition: Option<&Arrangement>,
    cfg: &VerifierConfig,
    rng: &mut impl Rng,
) -> ConditionReport {
    let mut probe = |x: &[f64], u: &[f64]| {
        let exact = f.directional_derivative(x, u).map_err(|e| e.to_string())?;
        let mut res: f64 = 0.0;
        let mut worst = Vec::new();
        for (i, fi) in exact.iter().enumerate() {
            let sub = f.component_clarke(x, i).map_err(|e| e.to_string())?;
            let (lo, hi) = linear_range_over_polytope(&sub, u).map_err(|e| e.to_string())?;
            let r = (hi - lo).max((lo - fi).abs()).max((hi - fi).abs());
            if r > res || worst.is_empty() {
                res = res.max(r);
                worst = vec![lo, hi];
            }
        }
        Ok((res / (1.0 + geometry::norm(u)), worst))
    };
    over_cells(f, partition, cfg, rng, ConditionId::ProjectionFormula, 0, &mut probe)
}
