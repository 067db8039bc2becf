//! Generalized directional derivatives `D(x, u)` and checks of their basic
//! regularity (nonempty values, positive homogeneity, Lipschitz dependence on
//! the direction).

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use thiserror::Error;

use crate::geometry::{self, hausdorff, linear_image, GeometryError, Polytope};
use crate::piecewise::{PiecewiseError, PiecewiseFunction};
use crate::verdict::Verdict;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Piecewise(#[from] PiecewiseError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("unknown oracle {0:?}")]
    Unknown(String),
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// Set-valued map `(x, u) ↦ D(x, u) ⊂ R^m`.
pub trait GeneralizedDerivative: Send + Sync {
    /// Identifier in the CLI oracle syntax.
    fn name(&self) -> String;

    fn output_dim(&self) -> usize;

    fn eval(&self, x: &[f64], u: &[f64]) -> Result<Polytope>;
}

pub type SharedOracle = Arc<dyn GeneralizedDerivative>;

impl fmt::Debug for dyn GeneralizedDerivative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GeneralizedDerivative({})", self.name())
    }
}

/// `D(x, u) = {F'(x, u)}`
pub struct ExactDirectional(Arc<PiecewiseFunction>);

impl GeneralizedDerivative for ExactDirectional {
    fn name(&self) -> String {
        "exact".into()
    }

    fn output_dim(&self) -> usize {
        self.0.output_dim()
    }

    fn eval(&self, x: &[f64], u: &[f64]) -> Result<Polytope> {
        Ok(Polytope::point(self.0.directional_derivative(x, u)?)?)
    }
}

/// `D(x, u) = ∂_C F(x) u`
pub struct ClarkeLinear(Arc<PiecewiseFunction>);

impl GeneralizedDerivative for ClarkeLinear {
    fn name(&self) -> String {
        "clarke".into()
    }

    fn output_dim(&self) -> usize {
        self.0.output_dim()
    }

    fn eval(&self, x: &[f64], u: &[f64]) -> Result<Polytope> {
        let j = self.0.clarke_jacobian(x)?;
        Ok(linear_image(&j, u)?)
    }
}

/// `D(x, u) = {A(x) u}` with `A(x)` the Jacobian of the lexicographically
/// smallest adjacent piece, mimicking a fixed-branch autodiff convention.
pub struct BranchSelection(Arc<PiecewiseFunction>);

impl GeneralizedDerivative for BranchSelection {
    fn name(&self) -> String {
        "branch".into()
    }

    fn output_dim(&self) -> usize {
        self.0.output_dim()
    }

    fn eval(&self, x: &[f64], u: &[f64]) -> Result<Polytope> {
        let a = branch_jacobian(&self.0, x)?;
        if u.len() != a.ncols() {
            return Err(GeometryError::DimensionMismatch {
                expected: a.ncols(),
                found: u.len(),
            }
            .into());
        }
        let v = a * DVector::from_column_slice(u);
        Ok(Polytope::point(v.iter().copied().collect())?)
    }
}

/// Jacobian of the lexicographically smallest piece adjacent to `x`.
pub fn branch_jacobian(f: &PiecewiseFunction, x: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
    let (_, piece) = f
        .adjacent_pieces(x)
        .into_iter()
        .next()
        .ok_or_else(|| PiecewiseError::NoAdjacentPiece(x.to_vec()))?;
    Ok(PiecewiseFunction::piece_jacobian(piece, x))
}

#[derive(Clone)]
pub enum Transform {
    /// `c · D(x, u)`
    Scale(f64),
    /// `-D(x, -u)`
    Reflect,
    /// `{0}` on lower-dimensional cells of the function's arrangement.
    ZeroAtStrata(Arc<PiecewiseFunction>),
}

pub struct Transformed {
    base: SharedOracle,
    kind: Transform,
}

impl GeneralizedDerivative for Transformed {
    fn name(&self) -> String {
        match &self.kind {
            Transform::Scale(c) => format!("scale:{c}:{}", self.base.name()),
            Transform::Reflect => format!("reflect:{}", self.base.name()),
            Transform::ZeroAtStrata(_) => format!("zero-strata:{}", self.base.name()),
        }
    }

    fn output_dim(&self) -> usize {
        self.base.output_dim()
    }

    fn eval(&self, x: &[f64], u: &[f64]) -> Result<Polytope> {
        match &self.kind {
            Transform::Scale(c) => Ok(self.base.eval(x, u)?.scaled(*c)),
            Transform::Reflect => {
                let minus_u = geometry::scale(-1.0, u);
                Ok(self.base.eval(x, &minus_u)?.negated())
            }
            Transform::ZeroAtStrata(f) => {
                if f.on_stratum(x) {
                    Ok(Polytope::zero(self.base.output_dim()))
                } else {
                    self.base.eval(x, u)
                }
            }
        }
    }
}

type OracleFn = dyn Fn(&[f64], &[f64]) -> Polytope + Send + Sync;

/// Oracle backed by an arbitrary closure, for handcrafted test maps.
pub struct FnOracle {
    name: String,
    output_dim: usize,
    f: Box<OracleFn>,
}

impl FnOracle {
    pub fn new(
        name: impl Into<String>,
        output_dim: usize,
        f: impl Fn(&[f64], &[f64]) -> Polytope + Send + Sync + 'static,
    ) -> Self {
        FnOracle {
            name: name.into(),
            output_dim,
            f: Box::new(f),
        }
    }
}

impl GeneralizedDerivative for FnOracle {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn eval(&self, x: &[f64], u: &[f64]) -> Result<Polytope> {
        Ok((self.f)(x, u))
    }
}

pub fn oracle_exact_directional(f: Arc<PiecewiseFunction>) -> SharedOracle {
    Arc::new(ExactDirectional(f))
}

pub fn oracle_clarke_linear(f: Arc<PiecewiseFunction>) -> SharedOracle {
    Arc::new(ClarkeLinear(f))
}

pub fn oracle_branch_selection(f: Arc<PiecewiseFunction>) -> SharedOracle {
    Arc::new(BranchSelection(f))
}

pub fn oracle_transform(base: SharedOracle, kind: Transform) -> SharedOracle {
    Arc::new(Transformed { base, kind })
}

/// Parses an oracle identifier: `exact`, `clarke`, `branch`, `scale:<c>`
/// (scaled exact derivative), `scale:<c>:<base>`, `reflect:<base>`,
/// `zero-strata:<base>`.
pub fn parse_oracle(spec: &str, f: &Arc<PiecewiseFunction>) -> Result<SharedOracle> {
    let unknown = || OracleError::Unknown(spec.to_string());
    match spec {
        "exact" => return Ok(oracle_exact_directional(f.clone())),
        "clarke" => return Ok(oracle_clarke_linear(f.clone())),
        "branch" => return Ok(oracle_branch_selection(f.clone())),
        _ => {}
    }
    let (head, rest) = spec.split_once(':').ok_or_else(unknown)?;
    match head {
        "scale" => {
            let (c, base) = match rest.split_once(':') {
                Some((c, base)) => (c, parse_oracle(base, f)?),
                None => (rest, oracle_exact_directional(f.clone())),
            };
            let c: f64 = c.parse().map_err(|_| unknown())?;
            if !c.is_finite() {
                return Err(unknown());
            }
            Ok(oracle_transform(base, Transform::Scale(c)))
        }
        "reflect" => Ok(oracle_transform(parse_oracle(rest, f)?, Transform::Reflect)),
        "zero-strata" => Ok(oracle_transform(
            parse_oracle(rest, f)?,
            Transform::ZeroAtStrata(f.clone()),
        )),
        _ => Err(unknown()),
    }
}

#[derive(Debug, Clone)]
pub struct AssumptionConfig {
    pub scales: Vec<f64>,
    pub eps_hom: f64,
    pub radius: f64,
    pub directions_per_probe: usize,
    pub neighbors_per_probe: usize,
    pub blowup: f64,
}

impl Default for AssumptionConfig {
    fn default() -> Self {
        AssumptionConfig {
            scales: vec![0.5, 2.0, 10.0],
            eps_hom: 1e-8,
            radius: 0.1,
            directions_per_probe: 4,
            neighbors_per_probe: 4,
            blowup: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityWitness {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub full_domain: Verdict,
    pub full_domain_witness: Option<(Vec<f64>, Vec<f64>, String)>,
    pub homogeneity: Verdict,
    pub worst_homogeneity: f64,
    pub homogeneity_witnesses: Vec<HomogeneityWitness>,
    pub lipschitz: Verdict,
    /// Estimated local constant per probe point.
    pub lipschitz_constants: Vec<(Vec<f64>, f64)>,
    pub lipschitz_witness: Option<(Vec<f64>, Vec<f64>, Vec<f64>)>,
}

impl AssumptionReport {
    pub fn verdict(&self) -> Verdict {
        Verdict::all([self.full_domain, self.homogeneity, self.lipschitz])
    }
}

fn random_direction(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let len = rng.random_range(0.1..2.0);
    let nv = geometry::norm(&v).max(1e-300);
    geometry::scale(len / nv, &v)
}

/// Samples the three regularity properties of `d` around `probes`.
pub fn check_assumption(
    d: &dyn GeneralizedDerivative,
    f: &PiecewiseFunction,
    probes: &[Vec<f64>],
    cfg: &AssumptionConfig,
    rng: &mut impl Rng,
) -> AssumptionReport {
    let n = f.dim();
    let mut report = AssumptionReport {
        full_domain: Verdict::Pass,
        full_domain_witness: None,
        homogeneity: Verdict::Pass,
        worst_homogeneity: 0.0,
        homogeneity_witnesses: Vec::new(),
        lipschitz: Verdict::Pass,
        lipschitz_constants: Vec::new(),
        lipschitz_witness: None,
    };
    let call = |x: &[f64], u: &[f64], report: &mut AssumptionReport| -> Option<Polytope> {
        match d.eval(x, u) {
            Ok(p) => Some(p),
            Err(e) => {
                if report.full_domain == Verdict::Pass {
                    report.full_domain_witness = Some((x.to_vec(), u.to_vec(), e.to_string()));
                }
                report.full_domain = Verdict::Fail;
                None
            }
        }
    };
    let zero_u = vec![0.0; n];
    let origin = Polytope::zero(d.output_dim());

    for x in probes {
        // homogeneity, including D(x, 0) = {0}
        if let Some(p0) = call(x, &zero_u, &mut report) {
            let v = hausdorff(&p0, &origin).unwrap_or(f64::INFINITY);
            report.worst_homogeneity = report.worst_homogeneity.max(v);
            if v > cfg.eps_hom {
                report.homogeneity = Verdict::Fail;
                report.homogeneity_witnesses.push(HomogeneityWitness {
                    x: x.clone(),
                    u: zero_u.clone(),
                    t: 0.0,
                    violation: v,
                });
            }
        }
        for _ in 0..cfg.directions_per_probe {
            let u = random_direction(n, rng);
            let Some(base) = call(x, &u, &mut report) else {
                continue;
            };
            for &t in &cfg.scales {
                let tu = geometry::scale(t, &u);
                let Some(p) = call(x, &tu, &mut report) else {
                    continue;
                };
                let v = hausdorff(&p, &base.scaled(t)).unwrap_or(f64::INFINITY);
                report.worst_homogeneity = report.worst_homogeneity.max(v);
                if v > cfg.eps_hom * (t * geometry::norm(&u)).max(1.0) {
                    report.homogeneity = Verdict::Fail;
                    report.homogeneity_witnesses.push(HomogeneityWitness {
                        x: x.clone(),
                        u: u.clone(),
                        t,
                        violation: v,
                    });
                }
            }
        }

        // Lipschitz dependence on u, uniformly over a ball around the probe
        let mut local: f64 = 0.0;
        for k in 0..=cfg.neighbors_per_probe {
            let y = if k == 0 {
                x.clone()
            } else {
                let dir = random_direction(n, rng);
                let r = cfg.radius * rng.random_range(0.0..1.0);
                geometry::axpy(x, r / geometry::norm(&dir), &dir)
            };
            for _ in 0..cfg.directions_per_probe {
                let u1 = random_direction(n, rng);
                let u2 = random_direction(n, rng);
                let (Some(p1), Some(p2)) = (call(&y, &u1, &mut report), call(&y, &u2, &mut report))
                else {
                    continue;
                };
                let gap = geometry::dist(&u1, &u2);
                if gap == 0.0 {
                    continue;
                }
                let ratio = hausdorff(&p1, &p2).unwrap_or(f64::INFINITY) / gap;
                if ratio > local {
                    local = ratio;
                    if !(ratio <= cfg.blowup) && report.lipschitz_witness.is_none() {
                        report.lipschitz_witness = Some((y.clone(), u1.clone(), u2.clone()));
                    }
                }
            }
        }
        if !(local <= cfg.blowup) {
            report.lipschitz = Verdict::Fail;
        }
        report.lipschitz_constants.push((x.clone(), local));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vals(p: &Polytope) -> Vec<f64> {
        p.vertices().iter().map(|v| v[0]).collect()
    }

    #[test]
    fn exact_oracle_examples() {
        let abs = Arc::new(fixtures::abs1d());
        let d = oracle_exact_directional(abs.clone());
        assert_eq!(vals(&d.eval(&[0.0], &[1.0]).unwrap()), vec![1.0]);
        assert_eq!(vals(&d.eval(&[0.0], &[-1.0]).unwrap()), vec![1.0]);
        assert_eq!(vals(&d.eval(&[4.0], &[0.0]).unwrap()), vec![0.0]);
        let max = Arc::new(fixtures::max2d());
        let d = oracle_exact_directional(max);
        assert_eq!(vals(&d.eval(&[0.0, 0.0], &[1.0, 1.0]).unwrap()), vec![1.0]);
    }

    #[test]
    fn clarke_oracle_examples() {
        let abs = Arc::new(fixtures::abs1d());
        let d = oracle_clarke_linear(abs);
        assert_eq!(vals(&d.eval(&[0.0], &[1.0]).unwrap()), vec![-1.0, 1.0]);
        assert_eq!(vals(&d.eval(&[2.0], &[0.3]).unwrap()), vec![0.3]);
        let d = oracle_clarke_linear(Arc::new(fixtures::max2d()));
        let mut v = vals(&d.eval(&[0.0, 0.0], &[1.0, 0.0]).unwrap());
        v.sort_by(f64::total_cmp);
        assert_eq!(v, vec![0.0, 1.0]);
    }

    #[test]
    fn branch_oracle_examples() {
        let abs = Arc::new(fixtures::abs1d());
        let d = oracle_branch_selection(abs.clone());
        assert_eq!(vals(&d.eval(&[0.0], &[2.0]).unwrap()), vec![-2.0]);
        let exact = oracle_exact_directional(abs);
        assert_eq!(d.eval(&[1.5], &[0.7]).unwrap(), exact.eval(&[1.5], &[0.7]).unwrap());
        let d = oracle_branch_selection(Arc::new(fixtures::max2d()));
        assert_eq!(vals(&d.eval(&[1.0, 1.0], &[0.3, 0.9]).unwrap()), vec![0.9]);
    }

    #[test]
    fn transform_examples() {
        let abs = Arc::new(fixtures::abs1d());
        let clarke = oracle_clarke_linear(abs.clone());
        let same = oracle_transform(clarke.clone(), Transform::Scale(1.0));
        assert_eq!(same.eval(&[0.0], &[1.0]).unwrap(), clarke.eval(&[0.0], &[1.0]).unwrap());
        let reflected = oracle_transform(clarke.clone(), Transform::Reflect);
        for (x, u) in [(0.0, 1.0), (0.0, -2.0), (-3.0, 0.5)] {
            let a = reflected.eval(&[x], &[u]).unwrap();
            let b = clarke.eval(&[x], &[u]).unwrap();
            assert!(hausdorff(&a, &b).unwrap() == 0.0);
        }
        let id = Arc::new(fixtures::id1d());
        let d = parse_oracle("scale:2", &id).unwrap();
        assert_eq!(vals(&d.eval(&[1.0], &[3.0]).unwrap()), vec![6.0]);
        let z = parse_oracle("zero-strata:exact", &abs).unwrap();
        assert_eq!(vals(&z.eval(&[0.0], &[3.0]).unwrap()), vec![0.0]);
        assert_eq!(vals(&z.eval(&[1.0], &[3.0]).unwrap()), vec![3.0]);
    }

    #[test]
    fn parse_names_round_trip() {
        let f = Arc::new(fixtures::max2d());
        for spec in ["exact", "clarke", "branch", "reflect:clarke", "zero-strata:branch", "scale:0.5:clarke"] {
            assert_eq!(parse_oracle(spec, &f).unwrap().name(), spec);
        }
        assert_eq!(parse_oracle("scale:2", &f).unwrap().name(), "scale:2:exact");
        assert!(matches!(parse_oracle("nope", &f), Err(OracleError::Unknown(_))));
        assert!(matches!(parse_oracle("scale:x", &f), Err(OracleError::Unknown(_))));
        assert!(matches!(parse_oracle("reflect:bogus", &f), Err(OracleError::Unknown(_))));
    }

    #[test]
    fn assumption_holds_for_clarke_of_abs() {
        let abs = Arc::new(fixtures::abs1d());
        let d = oracle_clarke_linear(abs.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let probes = vec![vec![0.0], vec![0.05], vec![-0.02]];
        let r = check_assumption(d.as_ref(), &abs, &probes, &AssumptionConfig::default(), &mut rng);
        assert_eq!(r.verdict(), Verdict::Pass);
        for (_, l) in &r.lipschitz_constants {
            assert!((l - 1.0).abs() < 1e-9, "L = {l}");
        }
    }

    #[test]
    fn quadratic_map_violates_homogeneity() {
        let abs = fixtures::abs1d();
        let d = FnOracle::new("sq", 1, |_, u| Polytope::point(vec![geometry::dot(u, u)]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = check_assumption(&d, &abs, &[vec![0.5]], &AssumptionConfig::default(), &mut rng);
        assert_eq!(r.homogeneity, Verdict::Fail);
        assert!(r.homogeneity_witnesses.iter().any(|w| w.t == 2.0));
        assert_eq!(r.full_domain, Verdict::Pass);
    }

    #[test]
    fn exact_oracle_passes_on_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for f in [fixtures::max2d(), fixtures::l1norm2d(), fixtures::pwquad2d()] {
            let f = Arc::new(f);
            let d = oracle_exact_directional(f.clone());
            let probes: Vec<Vec<f64>> = (0..20).map(|_| f.bbox().sample(&mut rng)).collect();
            let r = check_assumption(d.as_ref(), &f, &probes, &AssumptionConfig::default(), &mut rng);
            assert_eq!(r.verdict(), Verdict::Pass);
        }
    }

    #[test]
    fn empty_output_fails_full_domain() {
        // dimension mismatch makes every evaluation fail
        let f = Arc::new(fixtures::abs1d());
        let d = oracle_clarke_linear(Arc::new(fixtures::max2d()));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = check_assumption(d.as_ref(), &f, &[vec![0.5]], &AssumptionConfig::default(), &mut rng);
        assert_eq!(r.full_domain, Verdict::Fail);
        assert!(r.full_domain_witness.is_some());
    }
}
