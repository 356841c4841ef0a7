use std::path::{Path, PathBuf};

use lwr_cli::formats::{cost_matrix_from_str, parse_cost_csv, write_cost_csv};
use lwr_cli::{run, EXIT_INPUT, EXIT_OK, EXIT_SOLVER, EXIT_USAGE};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).to_string_lossy().into_owned()
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Runs the CLI in-process and returns `(exit code, stdout, stderr)`.
fn lwr(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("lwr").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Compares with a golden file; `UPDATE_GOLDEN=1` rewrites it.
fn check_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden file {name}");
}

const RULES: [&str; 4] = ["minimax-cost", "minimax-regret", "minimax-mean-regret", "minimax-median-regret"];

#[test]
fn analyze_outputs_match_golden_files() {
    for table in ["example1", "example3"] {
        let mut all = String::new();
        for rule in RULES {
            let (code, out, err) = lwr(&["analyze", "--costs", &fixture(&format!("{table}.csv")), "--rule", rule]);
            assert_eq!(code, EXIT_OK, "{err}");
            all.push_str(&out);
            all.push('\n');
        }
        check_golden(&format!("analyze_{table}.txt"), &all);
    }
}

#[test]
fn example_one_names_x_with_value_four() {
    let (code, out, _) = lwr(&["analyze", "--costs", &fixture("example1.csv"), "--rule", "minimax-regret"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("chosen: x\n") && out.contains("value: 4\n"), "{out}");
}

#[test]
fn project_outputs_match_golden_files() {
    for (table, rule) in [
        ("example4_projects", "minimax-cost"),
        ("example4_projects", "minimax-regret"),
        ("example5_projects", "minimax-regret"),
        ("mean_regret_projects", "minimax-mean-regret"),
        ("appendix_projects", "minimax-regret"),
    ] {
        let (code, out, err) =
            lwr(&["projects", "--costs", &fixture(&format!("{table}.csv")), "--rule", rule, "--iia", "--essential"]);
        assert_eq!(code, EXIT_OK, "{err}");
        check_golden(&format!("projects_{table}_{rule}.txt"), &out);
    }
}

#[test]
fn dropping_z_flips_the_example_five_choice() {
    let (code, out, _) =
        lwr(&["projects", "--costs", &fixture("example5_projects.csv"), "--rule", "minimax-regret", "--iia"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("dropping Z changes {Y} (value 2) to {X, Y} (value 1)"), "{out}");
    let (_, out, _) =
        lwr(&["projects", "--costs", &fixture("example5_projects.csv"), "--rule", "minimax-regret", "--drop-project", "Z"]);
    assert!(out.contains("chosen: {X, Y}\n"), "{out}");
}

#[test]
fn separate_base_file_matches_inline_column() {
    let dir = tempfile::tempdir().unwrap();
    let costs = dir.path().join("p.csv");
    let base = dir.path().join("w.csv");
    std::fs::write(&costs, "scenario,X,Y\nA,3,3\nB,-4,-4\n").unwrap();
    std::fs::write(&base, "scenario,W\nB,8\nA,0\n").unwrap();
    let (code, split, err) =
        lwr(&["projects", "--costs", costs.to_str().unwrap(), "--base", base.to_str().unwrap(), "--rule", "minimax-cost"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let (_, inline, _) = lwr(&["projects", "--costs", &fixture("example4_projects.csv"), "--rule", "minimax-cost"]);
    assert_eq!(split, inline);
}

#[test]
fn probes_match_golden_file() {
    let mut all = String::new();
    for args in [
        vec!["probe", "--costs", "example1.csv", "--rule", "minimax-regret", "--iia"],
        vec!["probe", "--costs", "example1.csv", "--rule", "minimax-regret", "--rationalize", "x"],
        vec!["probe", "--costs", "example1.csv", "--rule", "minimax-regret", "--rationalize", "z"],
        vec!["probe", "--costs", "example1.csv", "--rule", "minimax-regret", "--game", "y", "--pivot", "A"],
        vec!["probe", "--costs", "example3.csv", "--rule", "minimax-regret", "--cycles"],
        vec!["probe", "--costs", "example3.csv", "--rule", "minimax-regret", "--game", "y", "--pivot", "A"],
    ] {
        let path = fixture(args[2]);
        let mut args = args.clone();
        args[2] = &path;
        let (code, out, err) = lwr(&args);
        assert_eq!(code, EXIT_OK, "{err}");
        all.push_str(&out);
        all.push('\n');
    }
    check_golden("probes.txt", &all);
}

#[test]
fn robust_with_uniform_pins_chooses_z() {
    let (code, out, err) = lwr(&[
        "robust",
        "--costs",
        &fixture("example1.csv"),
        "--constraints",
        &fixture("example1_uniform.json"),
        "--rule",
        "minimax-cost",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("chosen: z\n"), "{out}");
}

#[test]
fn robust_without_constraints_matches_analyze() {
    for rule in RULES {
        let (_, robust, _) = lwr(&[
            "robust",
            "--costs",
            &fixture("example3.csv"),
            "--constraints",
            &fixture("unconstrained.json"),
            "--rule",
            rule,
        ]);
        let (_, plain, _) = lwr(&["analyze", "--costs", &fixture("example3.csv"), "--rule", rule]);
        let pick = |s: &str| s.lines().find(|l| l.starts_with("argmin:")).unwrap().to_string();
        assert_eq!(pick(&robust), pick(&plain), "{rule}");
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let (code, _, err) = lwr(&[
            "analyze",
            "--costs",
            &fixture("example1.csv"),
            "--rule",
            "minimax-regret",
            "--report",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    check_golden("report_analyze_example1.json", &text);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["chosen"], "x");
    assert_eq!(v["value"], 4.0);
    assert!(v["input_fingerprint"].as_str().unwrap().starts_with("sha256:"));
}

#[test]
fn every_command_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let curves = dir.path().join("curves.csv");
    let cases: Vec<Vec<String>> = vec![
        vec!["probe".into(), "--costs".into(), fixture("example3.csv"), "--rule".into(), "minimax-regret".into(), "--cycles".into()],
        vec!["robust".into(), "--costs".into(), fixture("example1.csv"), "--constraints".into(), fixture("example1_uniform.json"), "--rule".into(), "minimax-regret".into()],
        vec!["projects".into(), "--costs".into(), fixture("appendix_projects.csv"), "--rule".into(), "minimax-regret".into(), "--essential".into()],
        vec!["capacity".into(), "--model".into(), fixture("capacity_synth19.json"), "--reduce".into(), "--curves".into(), curves.to_string_lossy().into_owned(), "--grid-step".into(), "1000".into()],
        vec!["montecarlo".into(), "--samples".into(), "2000".into(), "--seed".into(), "7".into()],
    ];
    for (i, case) in cases.iter().enumerate() {
        let first = dir.path().join(format!("{i}-1.json"));
        let second = dir.path().join(format!("{i}-2.json"));
        for path in [&first, &second] {
            let mut args: Vec<&str> = case.iter().map(String::as_str).collect();
            args.push("--report");
            args.push(path.to_str().unwrap());
            let (code, _, err) = lwr(&args);
            assert_eq!(code, EXIT_OK, "{case:?}: {err}");
        }
        let text = std::fs::read_to_string(&first).unwrap();
        assert_eq!(text, std::fs::read_to_string(&second).unwrap(), "{case:?}");
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["command"], case[0].as_str());
    }
    let csv = std::fs::read_to_string(&curves).unwrap();
    assert!(csv.starts_with("x,extreme-low_cost,"));
    assert_eq!(csv.lines().count(), 1 + 17);
}

#[test]
fn capacity_reports_the_extreme_pair() {
    let (code, out, err) = lwr(&["capacity", "--model", &fixture("capacity_synth19.json")]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("determining scenarios: {extreme-low, extreme-high}"), "{out}");
}

#[test]
fn golden_cost_files_round_trip() {
    for name in ["example1.csv", "example3.csv"] {
        let path = fixture(name);
        let m = parse_cost_csv(Path::new(&path)).unwrap();
        let text = write_cost_csv(&m);
        assert_eq!(text, std::fs::read_to_string(&path).unwrap());
        assert_eq!(cost_matrix_from_str(&text, Path::new(&path)).unwrap(), m);
    }
}

#[test]
fn exit_codes() {
    // Missing file.
    let (code, _, err) = lwr(&["analyze", "--costs", "missing.csv", "--rule", "minimax-regret"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("missing.csv"));
    // Usage errors.
    assert_eq!(lwr(&["analyze", "--costs", &fixture("example1.csv")]).0, EXIT_USAGE);
    assert_eq!(lwr(&["analyze", "--costs", &fixture("example1.csv"), "--rule", "best"]).0, EXIT_USAGE);
    assert_eq!(lwr(&["probe", "--costs", &fixture("example1.csv"), "--rule", "minimax-regret"]).0, EXIT_USAGE);
    assert_eq!(lwr(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(lwr(&["--help"]).0, EXIT_OK);
    // Validation errors.
    let (code, _, err) =
        lwr(&["probe", "--costs", &fixture("example1.csv"), "--rule", "minimax-regret", "--game", "x", "--pivot", "A"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("unique minimizer"), "{err}");
    let (code, _, _) =
        lwr(&["analyze", "--costs", &fixture("example1.csv"), "--rule", "minimax-regret", "--drop-decision", "q"]);
    assert_eq!(code, EXIT_INPUT);
    // Infeasible polytope: p_A ≤ 0, p_B ≤ 0 and p_C ≤ 0 leave no probability vector.
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    std::fs::write(&g, r#"{"constraints":[{"A":1},{"B":1},{"C":1}]}"#).unwrap();
    let (code, _, err) = lwr(&[
        "robust",
        "--costs",
        &fixture("example1.csv"),
        "--constraints",
        g.to_str().unwrap(),
        "--rule",
        "minimax-regret",
    ]);
    assert_eq!(code, EXIT_SOLVER, "{err}");
    // Malformed CSV keeps its position.
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "scenario,x,y\nA,1,2\nB,1\n").unwrap();
    let (code, _, err) = lwr(&["analyze", "--costs", bad.to_str().unwrap(), "--rule", "minimax-cost"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains(":3"), "{err}");
}

#[test]
fn binary_runs_end_to_end() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_lwr"))
        .args(["analyze", "--costs", &fixture("example1.csv"), "--rule", "minimax-regret"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("chosen: x"));
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_lwr")).args(["analyze"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}
