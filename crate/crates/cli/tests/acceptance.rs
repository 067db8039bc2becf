//! Acceptance run: one line per criterion, nonzero exit if any is red.
//!
//! Runs with `cargo test --test acceptance`; it has no libtest harness so the
//! lines are printed even when everything passes.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::Rng;

use stratacalc::conditions::{
    check_conservative, check_curve_velocity, check_finite_differences, check_semismooth_i,
    check_semismooth_ii, VerifierConfig,
};
use stratacalc::corpus::Corpus;
use stratacalc::geometry::{self, subset_mod_subspace, Polytope};
use stratacalc::oracles::{oracle_clarke_linear, oracle_exact_directional, oracle_transform, Transform};
use stratacalc::piecewise::Curve;
use stratacalc::report::vec_str;
use stratacalc::rng::substream;
use stratacalc::solvers::{newton_rate_estimate, semismooth_newton, JacobianSource, NewtonConfig, NewtonStatus};
use stratacalc::testing::reference::{random_polytope, random_subspace, subset_mod_subspace_brute};
use stratacalc::verdict::Verdict;

const SEED: u64 = 7;

type Outcome = Result<String, String>;

fn matrix_run() -> (std::process::Output, f64) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_stratacalc"))
        .args(["matrix", "--seed", &SEED.to_string()])
        .output()
        .expect("binary runs");
    (out, start.elapsed().as_secs_f64())
}

/// `(entry, oracle, verdicts, consistent)` rows of the CSV block at the end of
/// a matrix report.
fn csv_rows(report: &str) -> Vec<(String, String, Vec<String>, String)> {
    let table = report
        .split("entry,function,oracle,c1,c2,c3,c4,c5,consistent\n")
        .nth(1)
        .unwrap_or("");
    table
        .lines()
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (
                cols[0].to_string(),
                cols[2].to_string(),
                cols[3..8].iter().map(|s| s.to_string()).collect(),
                cols[8].to_string(),
            )
        })
        .collect()
}

fn equivalence() -> Outcome {
    let (out, secs) = matrix_run();
    let report = String::from_utf8_lossy(&out.stdout).into_owned();
    let rows = csv_rows(&report);
    let negatives = rows
        .iter()
        .filter(|r| r.1.starts_with("scale:") || r.1.starts_with("zero-strata:"))
        .count();
    let inconsistent: Vec<&str> = rows.iter().filter(|r| r.3 == "false").map(|r| r.0.as_str()).collect();
    let inconclusive = rows.iter().filter(|r| r.3 == "inconclusive").count();
    let detail = format!(
        "{} rows, {negatives} negative controls, {inconclusive} inconclusive, inconsistent {inconsistent:?}, {secs:.2} s",
        rows.len()
    );
    let ok = out.status.code() == Some(0) && rows.len() >= 10 && negatives >= 3 && inconsistent.is_empty() && secs < 60.0;
    if ok { Ok(detail) } else { Err(detail) }
}

fn clarke_semismooth(corpus: &Corpus) -> Outcome {
    let cfg = VerifierConfig::default();
    let mut worst_linear: f64 = 0.0;
    let mut worst_other: f64 = 0.0;
    let mut points = 0;
    let mut failing = Vec::new();
    for (id, data) in &corpus.functions {
        let f = &data.f;
        let d = oracle_clarke_linear(f.clone());
        let mut rng = substream(SEED, &["acceptance", "kinks", id]);
        let mut base = data.base_points.clone();
        for cell in f.cells().iter().filter(|c| c.dimension < f.dim()) {
            if let Some(x) = f.arrangement().sample_in_cell(cell, f.bbox(), 1e-3, 10_000, &mut rng) {
                base.push(x);
            }
        }
        for (k, x) in base.iter().enumerate() {
            points += 1;
            let mut rng = substream(SEED, &["acceptance", "clarke", id, &k.to_string()]);
            let r = check_semismooth_i(f, d.as_ref(), x, &cfg, &mut rng);
            let at_smallest = r.residuals.last().map_or(f64::NAN, |row| row.1);
            let (limit, worst) = if f.is_piecewise_linear() {
                (1e-12, &mut worst_linear)
            } else {
                (1e-6, &mut worst_other)
            };
            *worst = worst.max(at_smallest);
            if r.verdict != Verdict::Pass || !(at_smallest <= limit) {
                failing.push(format!("{id} at {}", vec_str(x)));
            }
        }
    }
    let detail = format!(
        "{points} points, worst residual at 1e-7: {worst_linear:e} (piecewise linear), {worst_other:e} (other), failing {failing:?}"
    );
    if failing.is_empty() { Ok(detail) } else { Err(detail) }
}

fn implication() -> Outcome {
    let (out, _) = matrix_run();
    let rows = csv_rows(&String::from_utf8_lossy(&out.stdout));
    let bad: Vec<&str> = rows
        .iter()
        .filter(|r| r.2[2] == "pass" && (r.2[0] == "fail" || r.2[1] == "fail"))
        .map(|r| r.0.as_str())
        .collect();
    let detail = format!("{} rows checked, violations {bad:?}", rows.len());
    if bad.is_empty() && !rows.is_empty() { Ok(detail) } else { Err(detail) }
}

fn reflection(corpus: &Corpus) -> Outcome {
    let cfg = VerifierConfig::default();
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    let mut mismatched = Vec::new();
    for id in ["abs1d/clarke", "max2d/branch", "l1norm2d/zero-strata"] {
        let e = corpus.entry(id).ok_or(format!("missing entry {id}"))?;
        let reflected = oracle_transform(e.d.clone(), Transform::Reflect);
        for (k, x) in e.base_points.iter().enumerate() {
            let key = k.to_string();
            let one = check_semismooth_i(&e.f, e.d.as_ref(), x, &cfg, &mut substream(SEED, &[id, &key]));
            let two = check_semismooth_ii(&e.f, reflected.as_ref(), x, &cfg, &mut substream(SEED, &[id, &key]));
            if one.samples.len() != two.samples.len() || one.verdict != two.verdict {
                mismatched.push(format!("{id}#{k}"));
            }
            for (a, b) in one.samples.iter().zip(&two.samples) {
                worst = worst.max((a - b).abs());
                compared += 1;
            }
        }
    }
    let detail = format!("{compared} samples on 3 rows, worst difference {worst:e}, mismatched {mismatched:?}");
    if mismatched.is_empty() && worst <= 1e-9 { Ok(detail) } else { Err(detail) }
}

fn lemma_instances() -> Outcome {
    let mut rng = substream(SEED, &["acceptance", "lemma"]);
    let mut disagreements = 0;
    let mut contained = 0;
    for k in 0..100 {
        let n = 2 + k % 3;
        let v = random_subspace(n, rng.random_range(0..n), &mut rng);
        let b = random_polytope(n, rng.random_range(1..=4), &mut rng);
        let a = if k % 2 == 0 {
            // a point of B shifted along V, so roughly half the instances are inside
            let w: Vec<f64> = b.vertices().iter().map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = w.iter().sum();
            let mut p = vec![0.0; n];
            for (wi, bi) in w.iter().zip(b.vertices()) {
                p = geometry::axpy(&p, wi / total, bi);
            }
            for e in v.basis() {
                p = geometry::axpy(&p, rng.random_range(-2.0..2.0), e);
            }
            Polytope::point(p).expect("nonempty")
        } else {
            random_polytope(n, rng.random_range(1..=3), &mut rng)
        };
        let fast = subset_mod_subspace(&a, &b, &v).expect("dimensions agree");
        contained += usize::from(fast);
        if fast != subset_mod_subspace_brute(&a, &b, &v, 1e-9) {
            disagreements += 1;
        }
    }
    let detail = format!("100 instances in dimensions 2-4, {contained} contained, {disagreements} disagreements");
    if disagreements == 0 { Ok(detail) } else { Err(detail) }
}

fn chain_rule(corpus: &Corpus) -> Outcome {
    let data = corpus.function("abs1d").ok_or("missing abs1d")?;
    let d = oracle_clarke_linear(data.f.clone());
    let cfg = VerifierConfig::default();
    let mut rng = substream(SEED, &["acceptance", "chain"]);
    let curves: Vec<Curve> = (0..20)
        .map(|_| Curve::random_cubic(&[rng.random_range(-0.5..0.5)], 1.0, &mut rng))
        .collect();
    let r = check_conservative(&data.f, d.as_ref(), &curves, &cfg, &mut rng);
    let total = r.samples.len() + r.skipped;
    let good = r.samples.iter().filter(|s| **s <= cfg.eps_eq).count();
    let detail = format!(
        "20 curves, {good}/{total} samples exact, {} within 1e-10 of a crossing, verdict {}",
        r.skipped, r.verdict
    );
    let fraction_ok = good as f64 >= 0.99 * total as f64;
    if r.verdict == Verdict::Pass && fraction_ok { Ok(detail) } else { Err(detail) }
}

fn newton_rates(corpus: &Corpus) -> Outcome {
    let cfg = NewtonConfig::default();
    let floor = 100.0 * cfg.tol;
    let f = |id: &str| corpus.function(id).map(|d| d.f.clone()).ok_or(format!("missing {id}"));

    let absplus = semismooth_newton(&*f("absplus")?, &JacobianSource::Clarke, &[2.0], &cfg).map_err(|e| e.to_string())?;
    let abs_ok = absplus.status == NewtonStatus::Converged
        && absplus.steps() <= 2
        && absplus.residuals.last() == Some(&0.0);

    let relu = semismooth_newton(&*f("relukink")?, &JacobianSource::Clarke, &[3.0], &cfg).map_err(|e| e.to_string())?;
    let relu_ratios = newton_rate_estimate(&relu, None, floor);
    let relu_ok = relu.status == NewtonStatus::Converged && relu_ratios.iter().take(6).any(|r| *r < 1e-3);

    let id = f("id1d")?;
    let scaled = oracle_transform(oracle_exact_directional(id.clone()), Transform::Scale(2.0));
    let lin = semismooth_newton(&id, &JacobianSource::Oracle(scaled), &[1.0], &cfg).map_err(|e| e.to_string())?;
    let lin_ratios = newton_rate_estimate(&lin, Some(&[0.0]), floor);
    let lin_worst = lin_ratios.iter().map(|r| (r - 0.5).abs()).fold(0.0, f64::max);
    let lin_ok = !lin_ratios.is_empty() && lin_worst <= 1e-6;

    let detail = format!(
        "absplus {} in {} steps; relukink ratios {}; scale:2 {} ratios, worst |r - 0.5| = {lin_worst:e}",
        absplus.status,
        absplus.steps(),
        vec_str(&relu_ratios),
        lin_ratios.len()
    );
    if abs_ok && relu_ok && lin_ok { Ok(detail) } else { Err(detail) }
}

fn curve_velocity(corpus: &Corpus) -> Outcome {
    let cfg = VerifierConfig::default();
    let mut worst: f64 = 0.0;
    let mut failing = Vec::new();
    for (id, data) in &corpus.functions {
        let mut rng = substream(SEED, &["acceptance", "velocity", id]);
        let f = &data.f;
        let mut starts = data.base_points.clone();
        starts.extend(
            f.cells()
                .iter()
                .filter(|c| c.dimension < f.dim())
                .filter_map(|c| f.arrangement().sample_in_cell(c, f.bbox(), 1e-3, 10_000, &mut rng)),
        );
        let curves: Vec<Curve> = (0..20)
            .map(|k| Curve::random_cubic(&starts[k % starts.len()], 1.0, &mut rng))
            .collect();
        let r = check_curve_velocity(f, &curves, &cfg);
        worst = r.samples.iter().copied().fold(worst, f64::max);
        if r.verdict != Verdict::Pass {
            failing.push(id.clone());
        }
    }
    let detail = format!(
        "{} functions x 20 curves, worst gap {worst:e}, failing {failing:?}",
        corpus.functions.len()
    );
    if failing.is_empty() && worst <= 1e-8 { Ok(detail) } else { Err(detail) }
}

fn determinism() -> Outcome {
    let (a, _) = matrix_run();
    let (b, _) = matrix_run();
    let detail = format!("{} bytes per run", a.stdout.len());
    if a.stdout == b.stdout && !a.stdout.is_empty() { Ok(detail) } else { Err(detail) }
}

fn finite_differences(corpus: &Corpus) -> Outcome {
    let cfg = VerifierConfig {
        fd_pairs: 100,
        fd_steps: vec![1e-3, 1e-4, 1e-5],
        fd_slope: 0.9,
        ..VerifierConfig::default()
    };
    let mut min_slope: Option<f64> = None;
    let mut failing = Vec::new();
    for (id, data) in &corpus.functions {
        let mut rng = substream(SEED, &["acceptance", "fd", id]);
        let r = check_finite_differences(&data.f, &cfg, &mut rng);
        if let Some(s) = r.slope {
            min_slope = Some(min_slope.map_or(s, |m: f64| m.min(s)));
        }
        if r.verdict != Verdict::Pass {
            failing.push(id.clone());
        }
    }
    let detail = format!(
        "100 pairs x {} functions, smallest slope among inexact pairs {}, failing {failing:?}",
        corpus.functions.len(),
        min_slope.map_or("n/a (all exact)".to_string(), |s| format!("{s:.4}"))
    );
    if failing.is_empty() { Ok(detail) } else { Err(detail) }
}

fn main() -> ExitCode {
    let corpus = Corpus::default_corpus();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("equivalence matrix", Box::new(equivalence)),
        ("clarke semismoothness", Box::new(|| clarke_semismooth(&corpus))),
        ("condition 3 implies 1 and 2", Box::new(implication)),
        ("reflection duality", Box::new(|| reflection(&corpus))),
        ("subset modulo subspace", Box::new(lemma_instances)),
        ("chain rule along curves", Box::new(|| chain_rule(&corpus))),
        ("newton rates", Box::new(|| newton_rates(&corpus))),
        ("curve velocity", Box::new(|| curve_velocity(&corpus))),
        ("determinism", Box::new(determinism)),
        ("finite differences", Box::new(|| finite_differences(&corpus))),
    ];
    let mut red = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("acceptance {:>2} PASS {name}: {detail}", k + 1),
            Err(detail) => {
                red += 1;
                println!("acceptance {:>2} FAIL {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - red, criteria.len());
    if red == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
