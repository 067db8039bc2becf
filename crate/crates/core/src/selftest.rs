//! Built-in invariant suite, grouped by module.

use std::fmt::Write;
use std::sync::Arc;

use rand::Rng;

use crate::conditions::{
    check_curve_velocity, check_finite_differences, check_first_order, check_semismooth_i,
    check_semismooth_ii, equivalence_matrix, ConditionId, VerifierConfig,
};
use crate::corpus::{Corpus, CorpusFile, DEFAULT_CORPUS};
use crate::geometry::{
    self, dist_point_polytope, hausdorff, linear_image, project, subset_mod_subspace, Polytope,
};
use crate::oracles::{
    check_assumption, oracle_branch_selection, oracle_clarke_linear, oracle_exact_directional,
    oracle_transform, AssumptionConfig, SharedOracle, Transform,
};
use crate::piecewise::{Curve, PiecewiseFunction};
use crate::report;
use crate::rng::substream;
use crate::solvers::{
    newton_rate_estimate, semismooth_newton, subgradient_descent, JacobianSource, NewtonConfig,
    NewtonStatus, StepRule, SubgradientSource,
};
use crate::testing::reference::{grid_minimum, random_polytope, random_subspace, subset_mod_subspace_brute};
use crate::verdict::Verdict;

pub const SUITES: [&str; 6] = ["geometry", "piecewise", "oracles", "conditions", "solvers", "corpus"];

#[derive(Debug, Clone)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Equality tolerance used by the metric and verifier checks.
    pub eps_eq: f64,
    /// Run only the suite with this name.
    pub filter: Option<String>,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            seed: 0,
            eps_eq: crate::piecewise::EPS_EQ,
            filter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub results: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn verdict(&self) -> Verdict {
        Verdict::all(self.results.iter().map(|r| r.verdict))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let _ = writeln!(out, "{} {}/{}: {}", r.verdict, r.suite, r.name, r.detail);
        }
        let passed = self.results.iter().filter(|r| r.verdict == Verdict::Pass).count();
        let _ = writeln!(out, "summary: {passed}/{} passed, verdict {}", self.results.len(), self.verdict());
        out
    }
}

struct Ctx<'a> {
    cfg: &'a SelftestConfig,
    corpus: Corpus,
    results: Vec<CheckResult>,
    suite: &'static str,
}

impl Ctx<'_> {
    fn record(&mut self, name: &'static str, ok: bool, detail: impl Into<String>) {
        self.results.push(CheckResult {
            suite: self.suite,
            name,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            detail: detail.into(),
        });
    }

    fn record_verdict(&mut self, name: &'static str, verdict: Verdict, detail: impl Into<String>) {
        self.results.push(CheckResult {
            suite: self.suite,
            name,
            verdict,
            detail: detail.into(),
        });
    }

    fn rng(&self, key: &str) -> rand_chacha::ChaCha8Rng {
        substream(self.cfg.seed, &["selftest", self.suite, key])
    }

    fn verifier(&self) -> VerifierConfig {
        VerifierConfig {
            eps_eq: self.cfg.eps_eq,
            ..VerifierConfig::default()
        }
    }

    fn functions(&self) -> Vec<(String, Arc<PiecewiseFunction>, Vec<Vec<f64>>)> {
        self.corpus
            .functions
            .iter()
            .map(|(id, d)| (id.clone(), d.f.clone(), d.base_points.clone()))
            .collect()
    }
}

pub fn run(cfg: &SelftestConfig) -> SelftestReport {
    let mut ctx = Ctx {
        cfg,
        corpus: Corpus::default_corpus(),
        results: Vec::new(),
        suite: "",
    };
    let suites: [(&'static str, fn(&mut Ctx)); 6] = [
        ("geometry", geometry_suite),
        ("piecewise", piecewise_suite),
        ("oracles", oracles_suite),
        ("conditions", conditions_suite),
        ("solvers", solvers_suite),
        ("corpus", corpus_suite),
    ];
    for (name, suite) in suites {
        if cfg.filter.as_deref().is_some_and(|f| f != name) {
            continue;
        }
        ctx.suite = name;
        suite(&mut ctx);
    }
    SelftestReport { results: ctx.results }
}

fn geometry_suite(ctx: &mut Ctx) {
    let eps = ctx.cfg.eps_eq;
    let mut rng = ctx.rng("metric");
    let p = Polytope::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).expect("valid");
    let q = Polytope::point(vec![0.0, 1.0]).expect("valid");
    let d = hausdorff(&p, &q).expect("same dimension");
    ctx.record(
        "distinct sets separated at eps_eq",
        d > eps && hausdorff(&p, &p).expect("same dimension") <= eps,
        format!("d = {d:e}, eps_eq = {eps:e}"),
    );
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(1..=4);
        let a = random_polytope(n, rng.random_range(1..5), &mut rng);
        let b = random_polytope(n, rng.random_range(1..5), &mut rng);
        let c = random_polytope(n, rng.random_range(1..5), &mut rng);
        let ab = hausdorff(&a, &b).expect("dims");
        let ba = hausdorff(&b, &a).expect("dims");
        let tri = hausdorff(&a, &c).expect("dims") - ab - hausdorff(&b, &c).expect("dims");
        worst = worst.max((ab - ba).abs()).max(tri);
    }
    ctx.record("hausdorff symmetric and triangular", worst <= 1e-9, format!("worst violation {worst:e}"));

    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(1..=4);
        let v = random_subspace(n, rng.random_range(0..=n), &mut rng);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let px = project(&x, &v).expect("dims");
        let ppx = project(&px, &v).expect("dims");
        let py = project(&y, &v).expect("dims");
        worst = worst
            .max(geometry::dist(&px, &ppx))
            .max(geometry::dist(&px, &py) - geometry::dist(&x, &y));
    }
    ctx.record("projection idempotent and nonexpansive", worst <= 1e-12, format!("worst violation {worst:e}"));

    let mut disagreements = 0;
    let mut rng = ctx.rng("lemma");
    for k in 0..100 {
        let n = rng.random_range(2..=4);
        let v = random_subspace(n, rng.random_range(0..n), &mut rng);
        let b = random_polytope(n, rng.random_range(1..=4), &mut rng);
        let a = if k % 2 == 0 {
            let pts = (0..rng.random_range(1..=3))
                .map(|_| {
                    let w: Vec<f64> = b.vertices().iter().map(|_| rng.random_range(0.0..1.0)).collect();
                    let s: f64 = w.iter().sum();
                    let mut p = vec![0.0; n];
                    for (wi, bi) in w.iter().zip(b.vertices()) {
                        p = geometry::axpy(&p, wi / s, bi);
                    }
                    for basis in v.basis() {
                        p = geometry::axpy(&p, rng.random_range(-2.0..2.0), basis);
                    }
                    p
                })
                .collect();
            Polytope::new(pts).expect("nonempty")
        } else {
            random_polytope(n, rng.random_range(1..=3), &mut rng)
        };
        let fast = subset_mod_subspace(&a, &b, &v).expect("dims");
        if fast != subset_mod_subspace_brute(&a, &b, &v, 1e-9) {
            disagreements += 1;
        }
    }
    ctx.record(
        "subset modulo subspace matches direct search",
        disagreements == 0,
        format!("{disagreements} disagreements in 100 instances"),
    );

    let mut worst: f64 = 0.0;
    let mut rng = ctx.rng("image");
    for f in ctx.corpus.functions.values() {
        for _ in 0..10 {
            let x = f.f.bbox().sample(&mut rng);
            let u: Vec<f64> = (0..f.f.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let j = f.f.clarke_jacobian(&x).expect("valid point");
            let img = linear_image(&j, &u).expect("dims");
            let d = f.f.directional_derivative(&x, &u).expect("valid point");
            worst = worst.max(dist_point_polytope(&d, &img).expect("dims"));
        }
    }
    ctx.record("directional derivative inside Clarke image", worst <= 1e-9, format!("worst distance {worst:e}"));
}

fn random_curves(f: &PiecewiseFunction, base: &[Vec<f64>], count: usize, rng: &mut impl Rng) -> Vec<Curve> {
    (0..count)
        .map(|k| {
            let x0 = if base.is_empty() {
                f.bbox().sample(rng)
            } else {
                base[k % base.len()].clone()
            };
            Curve::random_cubic(&x0, 1.0, rng)
        })
        .collect()
}

fn piecewise_suite(ctx: &mut Ctx) {
    let vcfg = ctx.verifier();
    for (id, f, base) in ctx.functions() {
        let mut rng = ctx.rng(&id);
        let cont = f.validate_continuity(ctx.cfg.eps_eq, &mut rng);
        let detail = format!("{id}: {} facets, {} violations", cont.facets_checked, cont.violations.len());
        ctx.record("continuity", cont.passed(), detail);
        let fd = check_finite_differences(&f, &vcfg, &mut rng);
        let detail = format!("{id}: min slope {}, {} failures", fmt_opt(fd.slope), fd.failures);
        ctx.record_verdict("finite differences", fd.verdict, detail);
        let curves = random_curves(&f, &base, 20, &mut rng);
        let vel = check_curve_velocity(&f, &curves, &vcfg);
        let worst = vel.samples.iter().copied().fold(0.0, f64::max);
        ctx.record_verdict("curve velocity limit", vel.verdict, format!("{id}: worst {worst:e}"));
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |s| format!("{s:.3}"))
}

fn oracle_set(f: &Arc<PiecewiseFunction>) -> Vec<SharedOracle> {
    let clarke = oracle_clarke_linear(f.clone());
    vec![
        oracle_exact_directional(f.clone()),
        clarke.clone(),
        oracle_branch_selection(f.clone()),
        oracle_transform(clarke.clone(), Transform::Scale(2.0)),
        oracle_transform(clarke.clone(), Transform::Reflect),
        oracle_transform(clarke, Transform::ZeroAtStrata(f.clone())),
    ]
}

fn oracles_suite(ctx: &mut Ctx) {
    let eps = ctx.cfg.eps_eq;
    let mut zero_ok = true;
    let mut reflect_worst: f64 = 0.0;
    let mut interior_worst: f64 = 0.0;
    for (id, f, base) in ctx.functions() {
        let mut rng = ctx.rng(&id);
        let oracles = oracle_set(&f);
        let mut points = base.clone();
        points.extend((0..20).map(|_| f.bbox().sample(&mut rng)));
        for x in &points {
            let zero = vec![0.0; f.dim()];
            for d in &oracles {
                let p = d.eval(x, &zero).expect("valid point");
                zero_ok &= p.vertices().iter().flatten().all(|c| *c == 0.0);
            }
            let u: Vec<f64> = (0..f.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            for d in &oracles {
                let twice = oracle_transform(oracle_transform(d.clone(), Transform::Reflect), Transform::Reflect);
                let h = hausdorff(&d.eval(x, &u).expect("valid"), &twice.eval(x, &u).expect("valid")).expect("dims");
                reflect_worst = reflect_worst.max(h);
            }
            if !f.on_stratum(x) {
                let first = oracles[0].eval(x, &u).expect("valid");
                for d in &oracles[1..3] {
                    let h = hausdorff(&first, &d.eval(x, &u).expect("valid")).expect("dims");
                    interior_worst = interior_worst.max(h);
                }
            }
        }
        let mut arng = ctx.rng(&format!("{id}/assumption"));
        let mut probes = base.clone();
        probes.extend((0..10).map(|_| f.bbox().sample(&mut arng)));
        for d in &oracles[..2] {
            let r = check_assumption(d.as_ref(), &f, &probes, &AssumptionConfig::default(), &mut arng);
            ctx.record_verdict("assumption holds", r.verdict(), format!("{id}/{}", d.name()));
        }
    }
    ctx.record("D(x, 0) = {0}", zero_ok, "all oracles, all probe points");
    ctx.record("reflect twice is identity", reflect_worst <= eps, format!("worst {reflect_worst:e}"));
    ctx.record(
        "positive oracles agree inside cells",
        interior_worst <= eps,
        format!("worst {interior_worst:e}"),
    );
}

fn conditions_suite(ctx: &mut Ctx) {
    let vcfg = ctx.verifier();
    let seed = ctx.cfg.seed;
    let rows = equivalence_matrix(&ctx.corpus.entries, &vcfg, seed);
    let inconsistent: Vec<&str> = rows
        .iter()
        .filter(|r| r.consistent() == Some(false))
        .map(|r| r.id.as_str())
        .collect();
    ctx.record(
        "equivalence matrix consistent",
        inconsistent.is_empty(),
        format!("{} rows, inconsistent: {inconsistent:?}", rows.len()),
    );
    let violations: Vec<&str> = rows
        .iter()
        .filter(|r| {
            let v = r.verdicts();
            v[2] == Verdict::Pass && (v[0] == Verdict::Fail || v[1] == Verdict::Fail)
        })
        .map(|r| r.id.as_str())
        .collect();
    ctx.record("condition 3 implies 1 and 2", violations.is_empty(), format!("violations: {violations:?}"));

    let again = equivalence_matrix(&ctx.corpus.entries, &vcfg, seed);
    ctx.record(
        "matrix deterministic",
        report::render_matrix(&rows) == report::render_matrix(&again),
        "two runs, same seed",
    );

    let mut worst: f64 = 0.0;
    let mut length_ok = true;
    for e in &ctx.corpus.entries {
        let reflected = oracle_transform(e.d.clone(), Transform::Reflect);
        for (k, x) in e.base_points.iter().enumerate() {
            let key = format!("{}/{k}", e.id);
            let a = check_semismooth_i(&e.f, e.d.as_ref(), x, &vcfg, &mut ctx.rng(&key));
            let b = check_semismooth_ii(&e.f, reflected.as_ref(), x, &vcfg, &mut ctx.rng(&key));
            length_ok &= a.samples.len() == b.samples.len() && a.verdict == b.verdict;
            for (s, t) in a.samples.iter().zip(&b.samples) {
                worst = worst.max((s - t).abs());
            }
        }
    }
    ctx.record(
        "reflection duality",
        length_ok && worst <= 1e-9,
        format!("worst sample difference {worst:e}"),
    );

    for (id, f, base) in ctx.functions() {
        let clarke = oracle_clarke_linear(f.clone());
        let exact = oracle_exact_directional(f.clone());
        let mut verdicts = Vec::new();
        let mut fo = Vec::new();
        for (k, x) in base.iter().enumerate() {
            let mut rng = ctx.rng(&format!("{id}/{k}"));
            verdicts.push(check_semismooth_i(&f, clarke.as_ref(), x, &vcfg, &mut rng).verdict);
            fo.push(check_first_order(&f, exact.as_ref(), x, &vcfg, &mut rng).verdict);
        }
        ctx.record_verdict("clarke semismooth at base points", Verdict::all(verdicts), id.clone());
        ctx.record_verdict("first-order approximation at base point", Verdict::all(fo), id);
    }
    if let Some(abs) = ctx.corpus.function("abs1d") {
        let branch = oracle_branch_selection(abs.f.clone());
        let r = check_first_order(&abs.f, branch.as_ref(), &[0.0], &vcfg, &mut ctx.rng("branch"));
        ctx.record(
            "first-order test rejects fixed branch at kink",
            r.verdict == Verdict::Fail,
            format!("verdict {}", r.verdict),
        );
        debug_assert_eq!(r.condition, ConditionId::FirstOrder);
    }
}

fn solvers_suite(ctx: &mut Ctx) {
    let ncfg = NewtonConfig::default();
    let functions = ctx.corpus.functions.clone();
    let get = |id: &str| functions.get(id).map(|d| d.f.clone());

    if let Some(f) = get("absplus") {
        let t = semismooth_newton(&f, &JacobianSource::Clarke, &[2.0], &ncfg).expect("square");
        ctx.record(
            "absplus from 2",
            t.status == NewtonStatus::Converged && t.steps() == 1 && t.residuals[1] == 0.0,
            format!("{} after {} steps", t.status, t.steps()),
        );
    }
    let mut worst_steps = Vec::new();
    for (id, data) in &functions {
        let f = &data.f;
        if !f.is_piecewise_linear() || f.dim() != f.output_dim() || data.roots.is_empty() {
            continue;
        }
        let root = &data.roots[0];
        let regular = f
            .clarke_jacobian(root)
            .map(|j| j.vertices().iter().all(|a| a.determinant().abs() > 1e-12))
            .unwrap_or(false);
        if !regular {
            continue;
        }
        let mut rng = ctx.rng(id);
        for _ in 0..5 {
            let x0: Vec<f64> = root.iter().map(|r| r + rng.random_range(-0.25..0.25)).collect();
            let t = semismooth_newton(f, &JacobianSource::Clarke, &x0, &ncfg).expect("square");
            let ok = t.status == NewtonStatus::Converged
                && t.residuals.last() == Some(&0.0)
                && t.steps() <= f.cells().len();
            worst_steps.push((id.clone(), t.steps(), ok));
        }
    }
    let bad: Vec<_> = worst_steps.iter().filter(|(_, _, ok)| !ok).collect();
    ctx.record(
        "piecewise-linear regular roots found exactly",
        bad.is_empty() && !worst_steps.is_empty(),
        format!("{} runs, failing: {bad:?}", worst_steps.len()),
    );

    if let Some(f) = get("relukink") {
        let t = semismooth_newton(&f, &JacobianSource::Clarke, &[3.0], &ncfg).expect("square");
        let ratios = newton_rate_estimate(&t, Some(&[1.0]), 100.0 * ncfg.tol);
        let hit = ratios.iter().take(6).any(|r| *r < 1e-3);
        ctx.record("relukink superlinear", hit, format!("ratios {}", report::vec_str(&ratios)));
    }
    if let Some(f) = get("id1d") {
        let d = oracle_transform(oracle_exact_directional(f.clone()), Transform::Scale(2.0));
        let t = semismooth_newton(&f, &JacobianSource::Oracle(d), &[1.0], &ncfg).expect("square");
        let ratios = newton_rate_estimate(&t, Some(&[0.0]), 100.0 * ncfg.tol);
        let ok = !ratios.is_empty() && ratios.iter().all(|r| (r - 0.5).abs() <= 1e-6);
        ctx.record("scaled oracle converges only linearly", ok, format!("{} ratios", ratios.len()));
    }
    if let Some(f) = get("flatstall") {
        let t = semismooth_newton(&f, &JacobianSource::Clarke, &[-1.0], &ncfg).expect("square");
        ctx.record(
            "flat piece stalls",
            t.status == NewtonStatus::SingularStall,
            format!("{} with {} damping attempts", t.status, t.damping.len()),
        );
    }
    if let Some(f) = get("abs1d") {
        let t = subgradient_descent(&f, &SubgradientSource::Clarke, &[1.0], StepRule::OneOverK, 200).expect("scalar");
        let last = t.iterates.last().expect("start point")[0];
        ctx.record("subgradient on |x|", last.abs() <= 0.1, format!("final x = {last:e}"));
    }
    for id in ["abs1d", "l1norm2d", "maxreg2d"] {
        let Some(f) = get(id) else { continue };
        let lo = vec![-2.0; f.dim()];
        let hi = vec![2.0; f.dim()];
        let (_, fstar) = grid_minimum(&f, &lo, &hi, 1e-3);
        let x0 = vec![1.0; f.dim()];
        let t = subgradient_descent(&f, &SubgradientSource::Clarke, &x0, StepRule::InvSqrt(0.5), 2000).expect("scalar");
        let gap = t.best_value() - fstar;
        ctx.record("subgradient reaches grid minimum", gap <= 1e-2, format!("{id}: gap {gap:e}"));
    }
}

fn corpus_suite(ctx: &mut Ctx) {
    let raw = CorpusFile::parse(DEFAULT_CORPUS).expect("shipped corpus parses");
    let again = CorpusFile::parse(&raw.to_toml());
    ctx.record("round trip", again.as_ref() == Ok(&raw), "default corpus");
    let negatives = ctx
        .corpus
        .entries
        .iter()
        .filter(|e| e.oracle.starts_with("scale:") || e.oracle.starts_with("zero-strata:"))
        .count();
    ctx.record(
        "shipped corpus size",
        ctx.corpus.entries.len() >= 10 && negatives >= 3,
        format!("{} entries, {negatives} negative controls", ctx.corpus.entries.len()),
    );
}
