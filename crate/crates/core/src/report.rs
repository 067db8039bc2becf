//! Plain-text `stratacalc-report/1` rendering and comma-separated tables.
//!
//! Floats are printed with `{:e}`, which is exact and stable, so identical
//! inputs give byte-identical output.

use std::fmt::Write;

use crate::conditions::{ConditionReport, MatrixRow};
use crate::oracles::AssumptionReport;
use crate::piecewise::ContinuityReport;
use crate::solvers::{NewtonTrace, SubgradientTrace};
use crate::verdict::Verdict;

pub const FORMAT: &str = "stratacalc-report/1";

pub fn vec_str(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn opt_str(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:e}"))
}

/// Report header with the command and its parameters, in the given order.
pub fn header(command: &str, params: &[(&str, String)]) -> String {
    let mut out = format!("{FORMAT}\ncommand: {command}\n");
    for (k, v) in params {
        let _ = writeln!(out, "{k}: {v}");
    }
    out
}

pub fn render_condition(r: &ConditionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[condition {}]", r.condition);
    let _ = writeln!(out, "verdict: {}", r.verdict);
    let _ = writeln!(out, "{},max_residual", r.key.as_str());
    for (k, v) in &r.residuals {
        let _ = writeln!(out, "{k:e},{v:e}");
    }
    let _ = writeln!(out, "slope: {}", opt_str(r.slope));
    let _ = writeln!(out, "samples: {}", r.samples.len());
    let _ = writeln!(out, "skipped: {}", r.skipped);
    let _ = writeln!(out, "failures: {}", r.failures);
    for w in &r.witnesses {
        let _ = writeln!(
            out,
            "witness: point={} direction={} value={} residual={:e}",
            vec_str(&w.point),
            vec_str(&w.direction),
            vec_str(&w.value),
            w.residual
        );
    }
    for n in &r.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

pub fn render_assumption(r: &AssumptionReport) -> String {
    let mut out = String::from("[assumption]\n");
    let _ = writeln!(out, "verdict: {}", r.verdict());
    let _ = writeln!(out, "full_domain: {}", r.full_domain);
    if let Some((x, u, e)) = &r.full_domain_witness {
        let _ = writeln!(out, "witness: point={} direction={} error={e}", vec_str(x), vec_str(u));
    }
    let _ = writeln!(out, "homogeneity: {}", r.homogeneity);
    let _ = writeln!(out, "worst_homogeneity: {:e}", r.worst_homogeneity);
    for w in r.homogeneity_witnesses.iter().take(crate::conditions::MAX_WITNESSES) {
        let _ = writeln!(
            out,
            "witness: point={} direction={} t={:e} violation={:e}",
            vec_str(&w.x),
            vec_str(&w.u),
            w.t,
            w.violation
        );
    }
    let _ = writeln!(out, "lipschitz: {}", r.lipschitz);
    let max_l = r
        .lipschitz_constants
        .iter()
        .map(|(_, l)| *l)
        .fold(0.0, f64::max);
    let _ = writeln!(out, "max_local_constant: {max_l:e}");
    if let Some((x, u1, u2)) = &r.lipschitz_witness {
        let _ = writeln!(
            out,
            "witness: point={} u1={} u2={}",
            vec_str(x),
            vec_str(u1),
            vec_str(u2)
        );
    }
    out
}

pub fn render_continuity(r: &ContinuityReport) -> String {
    let mut out = String::from("[continuity]\n");
    let v = if r.passed() { Verdict::Pass } else { Verdict::Fail };
    let _ = writeln!(out, "verdict: {v}");
    let _ = writeln!(out, "facets_checked: {}", r.facets_checked);
    for c in &r.violations {
        let _ = writeln!(
            out,
            "witness: cells={}|{} point={} gap={:e}",
            c.cells.0,
            c.cells.1,
            vec_str(&c.witness),
            c.gap
        );
    }
    out
}

fn consistency_str(row: &MatrixRow) -> &'static str {
    match row.consistent() {
        Some(true) => "true",
        Some(false) => "false",
        None => "inconclusive",
    }
}

/// `entry,function,oracle,c1..c5,consistent`
pub fn matrix_csv(rows: &[MatrixRow]) -> String {
    let mut out = String::from("entry,function,oracle,c1,c2,c3,c4,c5,consistent\n");
    for row in rows {
        let verdicts: Vec<&str> = row.verdicts().iter().map(|v| v.as_str()).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.id,
            row.function,
            row.oracle,
            verdicts.join(","),
            consistency_str(row)
        );
    }
    out
}

pub fn render_matrix(rows: &[MatrixRow]) -> String {
    let mut out = String::new();
    for row in rows {
        let _ = writeln!(out, "\n[entry {}]", row.id);
        let _ = writeln!(out, "function: {}", row.function);
        let _ = writeln!(out, "oracle: {}", row.oracle);
        let _ = writeln!(out, "consistent: {}", consistency_str(row));
        for r in &row.reports {
            out.push('\n');
            out.push_str(&render_condition(r));
        }
    }
    let consistent = rows.iter().filter(|r| r.consistent() == Some(true)).count();
    let inconclusive = rows.iter().filter(|r| r.consistent().is_none()).count();
    let _ = writeln!(out, "\n[matrix]");
    let _ = writeln!(out, "rows: {}", rows.len());
    let _ = writeln!(out, "consistent: {consistent}");
    let _ = writeln!(out, "inconclusive: {inconclusive}");
    out.push_str(&matrix_csv(rows));
    out
}

pub fn render_newton(t: &NewtonTrace, ratios: &[f64]) -> String {
    let mut out = String::from("[newton]\n");
    let _ = writeln!(out, "status: {}", t.status);
    let _ = writeln!(out, "steps: {}", t.steps());
    let _ = writeln!(out, "evaluations: {}", t.residuals.len());
    let _ = writeln!(out, "final_iterate: {}", vec_str(t.final_iterate()));
    let _ = writeln!(out, "final_residual: {:e}", t.residuals.last().copied().unwrap_or(f64::NAN));
    for (k, a) in t.jacobians.iter().enumerate() {
        let _ = writeln!(out, "jacobian {k}: {}", vec_str(&crate::geometry::row_major(a)));
    }
    for d in &t.damping {
        let _ = writeln!(
            out,
            "damping: iteration={} lambda={:e} trial_residual={:e} accepted={}",
            d.iteration, d.lambda, d.trial_residual, d.accepted
        );
    }
    let _ = writeln!(out, "rates: {}", vec_str(ratios));
    out
}

/// `k,x_1..x_n,residual`
pub fn newton_csv(t: &NewtonTrace) -> String {
    let n = t.iterates[0].len();
    let cols: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut out = format!("k,{},residual\n", cols.join(","));
    for (k, (x, r)) in t.iterates.iter().zip(&t.residuals).enumerate() {
        let xs: Vec<String> = x.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(out, "{k},{},{r:e}", xs.join(","));
    }
    out
}

pub fn render_subgradient(t: &SubgradientTrace) -> String {
    let mut out = String::from("[subgradient]\n");
    let _ = writeln!(out, "iterations: {}", t.steps.len());
    let _ = writeln!(out, "final_iterate: {}", vec_str(t.iterates.last().expect("start point")));
    let _ = writeln!(out, "final_value: {:e}", t.values.last().copied().unwrap_or(f64::NAN));
    let _ = writeln!(out, "best_value: {:e}", t.best_value());
    out
}

/// `k,x_1..x_n,value,step`; the step column is empty on the last row.
pub fn subgradient_csv(t: &SubgradientTrace) -> String {
    let n = t.iterates[0].len();
    let cols: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut out = format!("k,{},value,step\n", cols.join(","));
    for (k, (x, v)) in t.iterates.iter().zip(&t.values).enumerate() {
        let xs: Vec<String> = x.iter().map(|c| format!("{c:e}")).collect();
        let step = t.steps.get(k).map_or(String::new(), |s| format!("{s:e}"));
        let _ = writeln!(out, "{k},{},{v:e},{step}", xs.join(","));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{equivalence_matrix, VerifierConfig};
    use crate::corpus::Corpus;

    #[test]
    fn matrix_output_is_deterministic() {
        let corpus = Corpus::default_corpus();
        let entries = corpus
            .select_entries(&["abs1d/clarke".into(), "id1d/scale2".into()])
            .unwrap();
        let cfg = VerifierConfig::default();
        let a = render_matrix(&equivalence_matrix(&entries, &cfg, 7));
        let b = render_matrix(&equivalence_matrix(&entries, &cfg, 7));
        assert_eq!(a, b);
        let csv = matrix_csv(&equivalence_matrix(&entries, &cfg, 7));
        assert_eq!(
            csv,
            "entry,function,oracle,c1,c2,c3,c4,c5,consistent\n\
             abs1d/clarke,abs1d,clarke,pass,pass,pass,pass,pass,true\n\
             id1d/scale2,id1d,scale:2,fail,fail,fail,fail,fail,true\n"
        );
    }

    #[test]
    fn floats_render_exactly() {
        assert_eq!(vec_str(&[0.1, -2.0, 0.0]), "[1e-1, -2e0, 0e0]");
        assert_eq!(opt_str(None), "n/a");
    }
}
