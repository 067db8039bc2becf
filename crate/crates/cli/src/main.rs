//! `stratacalc`: batch front-end for the verifiers and solvers.
//!
//! Exit codes: 0 pass or completed, 1 input error, 2 a verdict failed,
//! 3 inconclusive, 4 solver stall.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use stratacalc::conditions::{
    equivalence_matrix, run_condition, ConditionId, MatrixEntry, VerifierConfig,
};
use stratacalc::corpus::{Corpus, FunctionData};
use stratacalc::oracles::{check_assumption, parse_oracle, AssumptionConfig};
use stratacalc::report;
use stratacalc::rng::substream;
use stratacalc::selftest::{self, SelftestConfig};
use stratacalc::solvers::{
    newton_rate_estimate, semismooth_newton, subgradient_descent, JacobianSource, NewtonConfig,
    NewtonStatus, StepRule, SubgradientSource,
};
use stratacalc::verdict::Verdict;

const EXIT_INPUT: u8 = 1;
const EXIT_FAIL: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
const EXIT_STALL: u8 = 4;

#[derive(Parser)]
#[command(name = "stratacalc", version, about = "Verify first-order approximation conditions of piecewise-polynomial maps")]
struct Cli {
    /// Corpus file (stratacalc-corpus/1). The built-in corpus is used when omitted.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,

    /// Also write the report to this file.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Continuity, oracle assumptions, then the requested conditions for one binding.
    Check {
        #[arg(long)]
        function: String,
        /// exact, clarke, branch, scale:c[:base], reflect:base or zero-strata:base
        #[arg(long)]
        oracle: String,
        /// Comma-separated: 1-5, symmetry, projection_formula, first_order,
        /// curve_velocity, finite_difference
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        conditions: Vec<String>,
        #[arg(long)]
        seed: u64,
    },
    /// Five verdicts per corpus entry and the consistency of each row.
    Matrix {
        /// Restrict to these entry ids.
        #[arg(long, value_delimiter = ',')]
        entries: Vec<String>,
        #[arg(long)]
        seed: u64,
        /// Write the comma-separated table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Semismooth Newton or subgradient descent on a corpus function.
    Solve {
        #[arg(value_enum)]
        method: Method,
        #[arg(long)]
        function: String,
        /// Comma-separated start point.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        x0: Vec<f64>,
        /// Accepted for uniformity; both solvers are deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// clarke, branch (Newton only) or any oracle spec
        #[arg(long, default_value = "clarke")]
        source: String,
        /// constant:c, one_over_k or inv_sqrt:c
        #[arg(long, default_value = "one_over_k")]
        rule: String,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        /// Reference root for the rate estimate; the final iterate otherwise.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        root: Vec<f64>,
        /// Per-iteration table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Built-in invariant suite.
    Selftest {
        /// Run a single suite: geometry, piecewise, oracles, conditions, solvers, corpus
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        eps_eq: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Newton,
    Subgrad,
}

/// Input errors are reported through `anyhow`; everything else is an exit
/// code carried in `Ok`.
fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let output = cli.output.clone();
    let (text, code) = match cli.command {
        Command::Check {
            function,
            oracle,
            conditions,
            seed,
        } => cmd_check(&load_corpus(cli.corpus.as_deref())?, &function, &oracle, &conditions, seed)?,
        Command::Matrix { entries, seed, csv } => {
            cmd_matrix(&load_corpus(cli.corpus.as_deref())?, &entries, seed, csv.as_deref())?
        }
        Command::Solve {
            method,
            function,
            x0,
            seed,
            source,
            rule,
            iters,
            root,
            csv,
        } => {
            let corpus = load_corpus(cli.corpus.as_deref())?;
            let args = SolveArgs {
                function: &function,
                x0: &x0,
                seed,
                source: &source,
                rule: &rule,
                iters,
                root: &root,
                csv: csv.as_deref(),
            };
            match method {
                Method::Newton => cmd_newton(&corpus, &args)?,
                Method::Subgrad => cmd_subgrad(&corpus, &args)?,
            }
        }
        Command::Selftest { filter, eps_eq, seed } => cmd_selftest(filter, eps_eq, seed)?,
    };
    print!("{text}");
    if let Some(path) = output {
        fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(code)
}

fn load_corpus(path: Option<&Path>) -> Result<Corpus> {
    let Some(path) = path else {
        return Ok(Corpus::default_corpus());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Corpus::load(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn function<'a>(corpus: &'a Corpus, id: &str) -> Result<&'a FunctionData> {
    corpus
        .function(id)
        .ok_or_else(|| anyhow!("unknown function {id:?}; known: {}", known(corpus)))
}

fn known(corpus: &Corpus) -> String {
    corpus.functions.keys().cloned().collect::<Vec<_>>().join(", ")
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Pass => 0,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn cmd_check(corpus: &Corpus, id: &str, oracle: &str, conditions: &[String], seed: u64) -> Result<(String, u8)> {
    let data = function(corpus, id)?;
    let ids = conditions
        .iter()
        .map(|c| ConditionId::parse(c.trim()).ok_or_else(|| anyhow!("unknown condition {c:?}")))
        .collect::<Result<Vec<_>>>()?;
    let d = parse_oracle(oracle, &data.f).with_context(|| format!("oracle {oracle:?}"))?;
    let entry = MatrixEntry {
        id: format!("{id}/{oracle}"),
        function: id.to_string(),
        oracle: oracle.to_string(),
        f: data.f.clone(),
        d: d.clone(),
        base_points: data.base_points.clone(),
        curves: data.curves.clone(),
        partition: data.partition.clone(),
    };
    let cfg = VerifierConfig::default();

    let mut out = report::header(
        "check",
        &[
            ("function", id.to_string()),
            ("oracle", oracle.to_string()),
            ("conditions", conditions.join(",")),
            ("seed", seed.to_string()),
        ],
    );
    let mut verdicts = Vec::new();

    let continuity = data
        .f
        .validate_continuity(cfg.eps_eq, &mut substream(seed, &[&entry.id, "continuity"]));
    verdicts.push(if continuity.passed() { Verdict::Pass } else { Verdict::Fail });
    out.push('\n');
    out.push_str(&report::render_continuity(&continuity));

    let mut probes = data.base_points.clone();
    probes.extend(data.roots.iter().cloned());
    let assumption = check_assumption(
        d.as_ref(),
        &data.f,
        &probes,
        &AssumptionConfig::default(),
        &mut substream(seed, &[&entry.id, "assumption"]),
    );
    verdicts.push(assumption.verdict());
    out.push('\n');
    out.push_str(&report::render_assumption(&assumption));

    for c in ids {
        let r = run_condition(&entry, c, &cfg, seed);
        verdicts.push(r.verdict);
        out.push('\n');
        out.push_str(&report::render_condition(&r));
    }
    let overall = Verdict::all(verdicts);
    out.push_str(&format!("\nverdict: {overall}\n"));
    Ok((out, verdict_code(overall)))
}

fn cmd_matrix(corpus: &Corpus, ids: &[String], seed: u64, csv: Option<&Path>) -> Result<(String, u8)> {
    let entries = if ids.is_empty() {
        corpus.entries.clone()
    } else {
        corpus.select_entries(ids).map_err(|e| anyhow!(e))?
    };
    if entries.is_empty() {
        bail!("corpus has no entries");
    }
    let rows = equivalence_matrix(&entries, &VerifierConfig::default(), seed);
    let mut out = report::header(
        "matrix",
        &[("entries", entries.len().to_string()), ("seed", seed.to_string())],
    );
    out.push_str(&report::render_matrix(&rows));
    if let Some(path) = csv {
        fs::write(path, report::matrix_csv(&rows)).with_context(|| format!("writing {}", path.display()))?;
    }
    let code = if rows.iter().all(|r| r.consistent() != Some(false)) { 0 } else { EXIT_FAIL };
    Ok((out, code))
}

struct SolveArgs<'a> {
    function: &'a str,
    x0: &'a [f64],
    seed: u64,
    source: &'a str,
    rule: &'a str,
    iters: usize,
    root: &'a [f64],
    csv: Option<&'a Path>,
}

fn start_point(data: &FunctionData, x0: &[f64]) -> Result<()> {
    if x0.len() != data.f.dim() {
        bail!("--x0 has {} coordinates, function takes {}", x0.len(), data.f.dim());
    }
    Ok(())
}

fn cmd_newton(corpus: &Corpus, args: &SolveArgs) -> Result<(String, u8)> {
    let data = function(corpus, args.function)?;
    start_point(data, args.x0)?;
    let source = match args.source {
        "clarke" => JacobianSource::Clarke,
        "branch" => JacobianSource::Branch,
        spec => JacobianSource::Oracle(
            parse_oracle(spec, &data.f).with_context(|| format!("source {spec:?}"))?,
        ),
    };
    if !args.root.is_empty() && args.root.len() != data.f.dim() {
        bail!("--root has {} coordinates, function takes {}", args.root.len(), data.f.dim());
    }
    let cfg = NewtonConfig::default();
    let trace = semismooth_newton(&data.f, &source, args.x0, &cfg)?;
    let root = (!args.root.is_empty()).then_some(args.root);
    let ratios = newton_rate_estimate(&trace, root, 100.0 * cfg.tol);
    let mut out = report::header(
        "solve newton",
        &[
            ("function", args.function.to_string()),
            ("x0", report::vec_str(args.x0)),
            ("source", args.source.to_string()),
            ("seed", args.seed.to_string()),
        ],
    );
    out.push_str(&report::render_newton(&trace, &ratios));
    write_csv(args.csv, &report::newton_csv(&trace))?;
    let code = match trace.status {
        NewtonStatus::Converged => 0,
        NewtonStatus::MaxIter => EXIT_FAIL,
        NewtonStatus::SingularStall => EXIT_STALL,
    };
    Ok((out, code))
}

fn cmd_subgrad(corpus: &Corpus, args: &SolveArgs) -> Result<(String, u8)> {
    let data = function(corpus, args.function)?;
    start_point(data, args.x0)?;
    let rule = StepRule::parse(args.rule).ok_or_else(|| anyhow!("unknown step rule {:?}", args.rule))?;
    let source = match args.source {
        "clarke" => SubgradientSource::Clarke,
        spec => SubgradientSource::Oracle(
            parse_oracle(spec, &data.f).with_context(|| format!("source {spec:?}"))?,
        ),
    };
    let trace = subgradient_descent(&data.f, &source, args.x0, rule, args.iters)?;
    let mut out = report::header(
        "solve subgrad",
        &[
            ("function", args.function.to_string()),
            ("x0", report::vec_str(args.x0)),
            ("source", args.source.to_string()),
            ("rule", rule.to_string()),
            ("iters", args.iters.to_string()),
            ("seed", args.seed.to_string()),
        ],
    );
    out.push_str(&report::render_subgradient(&trace));
    write_csv(args.csv, &report::subgradient_csv(&trace))?;
    Ok((out, 0))
}

fn write_csv(path: Option<&Path>, text: &str) -> Result<()> {
    if let Some(path) = path {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_selftest(filter: Option<String>, eps_eq: Option<f64>, seed: u64) -> Result<(String, u8)> {
    if let Some(f) = &filter {
        if !selftest::SUITES.contains(&f.as_str()) {
            bail!("unknown suite {f:?}; known: {}", selftest::SUITES.join(", "));
        }
    }
    let mut cfg = SelftestConfig {
        seed,
        filter,
        ..SelftestConfig::default()
    };
    if let Some(eps) = eps_eq {
        if !(eps > 0.0 && eps.is_finite()) {
            bail!("--eps-eq must be positive");
        }
        cfg.eps_eq = eps;
    }
    let result = selftest::run(&cfg);
    let mut out = report::header("selftest", &[("seed", seed.to_string())]);
    out.push_str(&result.render());
    Ok((out, verdict_code(result.verdict())))
}
