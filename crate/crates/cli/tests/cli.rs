use std::fs;
use std::path::Path;
use std::process::Command;

use negligible_cli::{run_cli, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE};
use negligible_core::counterexamples::{scenario, REGISTRY};

fn run_in(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = dir.to_string_lossy().into_owned();
    let mut full = vec!["negligible"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &out]);
    let o = run_cli(full);
    (o.code, o.stdout)
}

fn report(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name).join("report.txt")).unwrap()
}

#[test]
fn every_registry_scenario_reproduces_its_verdict() {
    let dir = tempfile::tempdir().unwrap();
    for name in REGISTRY {
        let (code, _) = run_in(dir.path(), &["run", name]);
        assert_eq!(code, EXIT_OK, "{name}");
        let expected = scenario(name, None).unwrap().expected;
        let text = report(dir.path(), name);
        assert!(text.contains(&format!("verdict: {expected}")), "{name}:\n{text}");
        assert!(dir.path().join(name).join("section.csv").is_file());
    }
}

#[test]
fn cantor_flags() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["run", "cantor-c0", "--assert-c1"]).0, EXIT_OK);
    assert!(report(dir.path(), "cantor-c0").contains("verdict: obstructed"));
    assert_eq!(run_in(dir.path(), &["run", "cantor-c0", "--assert-c0-only"]).0, EXIT_OK);
    assert!(report(dir.path(), "cantor-c1").contains("verdict: extended"));
    let both = run_in(dir.path(), &["run", "cantor-c0", "--assert-c1", "--assert-c0-only"]);
    assert_eq!(both.0, EXIT_USAGE);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, msg) = run_in(dir.path(), &["run", "no-such-scenario"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(msg.contains("noextension"), "{msg}");
    assert_eq!(run_in(dir.path(), &["run", "fat-cantor-box", "--dim", "3"]).0, EXIT_USAGE);
    assert_eq!(run_in(dir.path(), &["run", "standard", "--res", "2"]).0, EXIT_USAGE);
}

#[test]
fn wrong_expectation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        "[grid]\nres = 32\n[experiment]\nbox = 0,1;0,1\nconnection = standard\nobstacle = hyperplane:axis=2,level=0.5\n\
         section = transport:1\nexpected = obstructed\n",
    )
    .unwrap();
    let (code, _) = run_in(dir.path(), &["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_MISMATCH);
}

#[test]
fn reports_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for name in ["noextension", "cantor-c0", "big-measure"] {
        run_in(a.path(), &["run", name, "--res", "64"]);
        run_in(b.path(), &["run", name, "--res", "64"]);
        assert_eq!(report(a.path(), name), report(b.path(), name), "{name}");
        let csv = |d: &Path| fs::read(d.join(name).join("section.csv")).unwrap();
        assert_eq!(csv(a.path()), csv(b.path()), "{name}");
    }
}

#[test]
fn subcommand_examples() {
    let dir = tempfile::tempdir().unwrap();
    let j = run_cli(["negligible", "jump", "--scenario", "noextension", "--dim", "3"]);
    assert_eq!(j.code, EXIT_OK);
    let out = j.stdout;
    let jump: f64 = out.lines().last().unwrap().trim_start_matches("jump: ").parse().unwrap();
    assert!((jump - (-2.0f64).exp()).abs() < 1e-9, "{out}");

    let (_, out) = run_in(dir.path(), &["decompose", "--box", "0,2;0,1", "--level", "3"]);
    assert!(out.contains("measure: 21/16") && out.contains("disjoint: true"), "{out}");
    assert!(dir.path().join("cubes.csv").is_file());

    let t = run_cli(["negligible", "fatcantor", "--ambient", "0,1", "--target", "0.5"]);
    assert!(t.stdout.contains("measure: 3/4"), "{}", t.stdout);

    let c = run_cli(["negligible", "components", "--obstacle", "hyperplane:axis=2,level=0.5"]);
    assert_eq!(c.stdout.trim(), "2");

    let v = run_cli([
        "negligible",
        "transport",
        "--connection",
        "constant:0.3;-0.7",
        "--box",
        "-2,2;-2,2",
        "--path",
        "segment:(0,0)->(1,1)",
        "--v0",
        "1",
    ]);
    let got: f64 = v.stdout.trim().parse().unwrap();
    assert!((got - 0.4f64.exp()).abs() < 1e-9, "{}", v.stdout);
}

#[test]
fn binary_honours_the_output_variable() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_negligible"))
        .args(["run", "standard", "--res", "32"])
        .env("NEGLIGIBLE_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
    assert!(report(dir.path(), "standard").contains("verdict: extended"));
}
