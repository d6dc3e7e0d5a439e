//! Command-line behaviour: golden reports, exit codes and file round trips.
//!
//! Golden files live in `tests/golden/`; run with `UPDATE_GOLDEN=1` to
//! rewrite them after an intentional change of output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use abreu_lab::cli::PolytopeFile;
use abreu_lab::fixtures;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_abreu-lab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn fixture_file(dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    let o = run(&["examples", name, "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    path
}

fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

#[test]
fn text_reports_match_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&str, &[&str])] = &[
        ("square", &["info", "moments", "extremal", "normalize", "soliton", "rationality", "delzant"]),
        ("simplex", &["info", "moments", "extremal", "normalize", "soliton", "rationality", "delzant"]),
        ("hirzebruch", &["info", "moments", "extremal", "normalize", "angles", "rationality"]),
        ("rectangle", &["info", "extremal", "normalize", "rationality"]),
    ];
    for (name, commands) in cases {
        let file = fixture_file(dir.path(), name);
        for command in *commands {
            let o = run(&["--input", file.to_str().unwrap(), command]);
            assert_eq!(o.status.code(), Some(0), "{name} {command}: {}", stderr(&o));
            golden(&format!("{name}.{command}.txt"), &stdout(&o));
        }
    }
    let file = fixture_file(dir.path(), "hirzebruch");
    let o = run(&["--input", file.to_str().unwrap(), "delzant", "--use-reference"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    golden("hirzebruch.delzant-reference.txt", &stdout(&o));
}

#[test]
fn json_envelope_has_the_documented_fields() {
    let dir = tempfile::tempdir().unwrap();
    let file = fixture_file(dir.path(), "hirzebruch");
    let o = run(&["--input", file.to_str().unwrap(), "--json", "normalize"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "normalize");
    assert!(v["tolerances"].is_object());
    assert!(v["warnings"].is_array());
    assert!(v["result"].is_object());
}

#[test]
fn examples_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for name in fixtures::NAMES {
        let path = fixture_file(dir.path(), name);
        let text = std::fs::read_to_string(&path).unwrap();
        let file = PolytopeFile::parse_str(&text, path.to_str().unwrap()).unwrap();
        assert_eq!(file.to_json(), text);
        let (poly, reference) = file.to_polytope().unwrap();
        let (want, want_ref) = fixtures::by_name(name).unwrap();
        assert!(poly.same_shape(&want));
        assert_eq!(poly.exact_labels(), want.exact_labels());
        assert_eq!(reference.is_some(), want_ref.is_some());
        let again = PolytopeFile::from_polytope(&poly, reference.as_ref(), file.name.as_deref());
        assert_eq!(again.to_json(), text);
    }
}

#[test]
fn usage_and_input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let o = run(&["--input", missing.to_str().unwrap(), "info"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["info"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"dim\": 2,\n  \"facets\": [ {\"normal\": [1, 0], \"offset\": 1 ]\n}\n").unwrap();
    let o = run(&["--input", bad.to_str().unwrap(), "info"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let unbounded = dir.path().join("unbounded.json");
    std::fs::write(
        &unbounded,
        r#"{"dim": 2, "facets": [{"normal": [1, 0], "offset": 1}, {"normal": [0, 1], "offset": 1}]}"#,
    )
    .unwrap();
    let o = run(&["--input", unbounded.to_str().unwrap(), "info"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).to_lowercase().contains("unbounded"), "{}", stderr(&o));

    let hirzebruch = fixture_file(dir.path(), "hirzebruch");
    let o = run(&["--input", hirzebruch.to_str().unwrap(), "delzant"]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn solver_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let file = fixture_file(dir.path(), "hirzebruch");
    let o = run(&["--input", file.to_str().unwrap(), "--resolution", "8", "--tol", "1e-300", "solve"]);
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn solve_then_compare_against_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("h.json");
    std::fs::write(
        &input,
        PolytopeFile::from_polytope(&fixtures::hirzebruch(&abreu_lab::exact::parse_rational("9/7").unwrap()), None, None)
            .to_json(),
    )
    .unwrap();
    let solution = dir.path().join("solution.json");
    let o = run(&[
        "--input",
        input.to_str().unwrap(),
        "--resolution",
        "18",
        "--output",
        solution.to_str().unwrap(),
        "solve",
        "--zero-soliton",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(&[
        "--input",
        input.to_str().unwrap(),
        "--json",
        "compare",
        "--solution",
        solution.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let h = v["result"]["h_max_relative"].as_f64().unwrap();
    assert!(h <= 1e-6, "H difference {h:e}");
}
