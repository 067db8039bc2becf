use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn stratacalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stratacalc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

const ABS: &str = r#"
[[function]]
id = "abs"
dim = 1
outputs = 1
base_points = [[0.0], [0.5]]

[[function.hyperplane]]
normal = [1.0]
offset = 0.0

[[function.piece]]
cell = "-"
components = [[{ e = [1], c = -1.0 }]]

[[function.piece]]
cell = "+"
components = [[{ e = [1], c = 1.0 }]]

[[function.curve]]
breakpoints = [0.0, 1.0]
coords = [[[-1.0, 2.0]]]
"#;

const IDENTITY: &str = r#"
[[function]]
id = "x"
dim = 1
outputs = 1
base_points = [[0.0], [1.0]]

[[function.piece]]
cell = ""
components = [[{ e = [1], c = 1.0 }]]

[[function.curve]]
breakpoints = [0.0, 1.0]
coords = [[[-1.0, 2.0]]]
"#;

fn write_corpus(dir: &Path, body: &str, entries: &[(&str, &str, &str)]) -> String {
    let mut text = String::from("format = \"stratacalc-corpus/1\"\n");
    text.push_str(body);
    for (id, function, oracle) in entries {
        text.push_str(&format!(
            "\n[[entry]]\nid = \"{id}\"\nfunction = \"{function}\"\noracle = \"{oracle}\"\n"
        ));
    }
    let path = dir.join("corpus.toml");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn check_abs_with_clarke_passes_all_five() {
    let out = stratacalc(&["check", "--function", "abs1d", "--oracle", "clarke", "--conditions", "1,2,3,4,5", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.starts_with("stratacalc-report/1\ncommand: check\n"));
    for c in 1..=5 {
        assert!(text.contains(&format!("[condition {c}]\nverdict: pass\n")));
    }
    assert!(text.ends_with("verdict: pass\n"));
}

#[test]
fn check_scaled_identity_fails() {
    let out = stratacalc(&["check", "--function", "id1d", "--oracle", "scale:2", "--conditions", "1", "--seed", "7"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("[condition 1]\nverdict: fail\n"));
    assert!(stdout(&out).contains("witness: point="));
}

#[test]
fn check_runs_auxiliary_conditions() {
    let out = stratacalc(&[
        "check", "--function", "max2d", "--oracle", "exact", "--seed", "3",
        "--conditions", "symmetry,projection_formula,first_order,curve_velocity,finite_difference",
    ]);
    let text = stdout(&out);
    for name in ["symmetry", "projection_formula", "first_order", "curve_velocity", "finite_difference"] {
        assert!(text.contains(&format!("[condition {name}]\nverdict: pass\n")), "{name}");
    }
    assert_eq!(code(&out), 0);
}

#[test]
fn missing_piece_is_an_input_error_naming_the_cell() {
    let dir = tempfile::tempdir().unwrap();
    let body = ABS.replace("[[function.piece]]\ncell = \"+\"\ncomponents = [[{ e = [1], c = 1.0 }]]\n", "");
    let corpus = write_corpus(dir.path(), &body, &[("abs/clarke", "abs", "clarke")]);
    let out = stratacalc(&["--corpus", &corpus, "check", "--function", "abs", "--oracle", "clarke", "--seed", "1"]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.contains("no piece for the nonempty full-dimensional cell +"), "{err}");
    assert!(err.contains("line "), "{err}");
}

#[test]
fn malformed_corpus_reports_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let body = ABS.replace("dim = 1", "dim = \"one\"");
    let corpus = write_corpus(dir.path(), &body, &[]);
    let out = stratacalc(&["--corpus", &corpus, "matrix", "--seed", "1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("line 5"), "{}", stderr(&out));

    let corpus = write_corpus(dir.path(), ABS, &[("abs/bogus", "abs", "bogus")]);
    let out = stratacalc(&["--corpus", &corpus, "matrix", "--seed", "1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("entry[0] (abs/bogus).oracle"), "{}", stderr(&out));
}

#[test]
fn single_row_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    let corpus = write_corpus(dir.path(), ABS, &[("abs/clarke", "abs", "clarke")]);
    let out = stratacalc(&["--corpus", &corpus, "matrix", "--seed", "5", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        fs::read_to_string(&csv).unwrap(),
        "entry,function,oracle,c1,c2,c3,c4,c5,consistent\nabs/clarke,abs,clarke,pass,pass,pass,pass,pass,true\n"
    );

    let corpus = write_corpus(dir.path(), IDENTITY, &[("x/scale2", "x", "scale:2")]);
    let out = stratacalc(&["--corpus", &corpus, "matrix", "--seed", "5"]);
    assert_eq!(code(&out), 0, "consistent failure still exits 0");
    assert!(stdout(&out).ends_with("x/scale2,x,scale:2,fail,fail,fail,fail,fail,true\n"));
}

#[test]
fn matrix_selects_entries_and_rejects_unknown_ones() {
    let out = stratacalc(&["matrix", "--seed", "1", "--entries", "abs1d/clarke,id1d/scale2"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("rows: 2\n"));
    let out = stratacalc(&["matrix", "--seed", "1", "--entries", "nope"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.txt");
    let out = stratacalc(&["matrix", "--seed", "9", "--entries", "max2d/clarke", "--output", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(&path).unwrap(), stdout(&out));
}

#[test]
fn newton_on_absplus_converges_after_two_evaluations() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let out = stratacalc(&["solve", "newton", "--function", "absplus", "--x0", "2", "--seed", "1", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("status: converged\n"));
    assert!(text.contains("evaluations: 2\n"));
    assert!(text.contains("final_iterate: [5e-1]\n"));
    assert_eq!(fs::read_to_string(&csv).unwrap(), "k,x1,residual\n0,2e0,3e0\n1,5e-1,0e0\n");
}

#[test]
fn subgradient_on_abs_ends_near_zero() {
    let out = stratacalc(&["solve", "subgrad", "--function", "abs1d", "--x0", "1", "--rule", "one_over_k", "--iters", "200"]);
    assert_eq!(code(&out), 0);
    let line = stdout(&out).lines().find(|l| l.starts_with("final_iterate:")).unwrap().to_string();
    let x: f64 = line.trim_start_matches("final_iterate: [").trim_end_matches(']').parse().unwrap();
    assert!(x.abs() <= 0.1, "{x}");
}

#[test]
fn newton_on_flat_piece_stalls_with_damping_log() {
    let out = stratacalc(&["solve", "newton", "--function", "flatstall", "--x0", "-1"]);
    assert_eq!(code(&out), 4);
    let text = stdout(&out);
    assert!(text.contains("status: singular_stall\n"));
    assert!(text.contains("damping: iteration=0 lambda=1e-8"));
}

#[test]
fn solve_rejects_bad_input() {
    assert_eq!(code(&stratacalc(&["solve", "newton", "--function", "max2d", "--x0", "1"])), 1);
    assert_eq!(code(&stratacalc(&["solve", "subgrad", "--function", "abs1d", "--x0", "1", "--rule", "fast"])), 1);
    assert_eq!(code(&stratacalc(&["solve", "subgrad", "--function", "pwquad2d", "--x0", "1,1"])), 1);
}

#[test]
fn selftest_passes_and_filters() {
    let out = stratacalc(&["selftest"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let out = stratacalc(&["selftest", "--filter", "geometry"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let checks: Vec<&str> = text.lines().filter(|l| l.starts_with("pass ") || l.starts_with("fail ")).map(|l| l.split_once(' ').unwrap().1).collect::<Vec<_>>();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|l| l.starts_with("geometry/")));
}

#[test]
fn selftest_with_inflated_tolerance_fails() {
    let out = stratacalc(&["selftest", "--filter", "geometry", "--eps-eq", "1e3"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("fail geometry/distinct sets separated at eps_eq"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&stratacalc(&["matrix"])), 1);
    assert_eq!(code(&stratacalc(&["check", "--function", "abs1d", "--oracle", "clarke", "--seed", "1", "--conditions", "9"])), 1);
    assert_eq!(code(&stratacalc(&["selftest", "--filter", "nope"])), 1);
    assert_eq!(code(&stratacalc(&["--help"])), 0);
}
