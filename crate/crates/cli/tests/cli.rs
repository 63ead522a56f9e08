use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_superdeform"));
    c.current_dir(env!("CARGO_MANIFEST_DIR"));
    c
}

fn run(args: &[&str]) -> (i32, String, String) {
    let Output { status, stdout, stderr } = bin().args(args).output().unwrap();
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("superdeform-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn check_split_fixture() {
    let (code, out, _) = run(&["check", "examples/p1-split.atlas"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("check: PASS"));
    let (code, out, _) = run(&["check", "--superconformal", "examples/p1-construction.atlas"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn split_coboundary_fixture_emits_lambda() {
    let (code, out, _) = run(&["split", "examples/p1-construction-coboundary.atlas"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("lambda12[U] = x^3"), "{out}");
    assert!(out.contains("lambda1[U] = -1/2*x^2 - 1/2"), "{out}");
}

#[test]
fn split_then_verify_round_trip() {
    let built = tmp("built.atlas");
    let solved = tmp("solved.atlas");
    let (code, out, _) =
        run(&["build", "twist", "examples/p1-construction-coboundary.atlas", "--out", built.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = run(&["split", built.to_str().unwrap(), "--out", solved.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = run(&["verify-splitting", solved.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("splitting: 4/4 pass"));
}

#[test]
fn tampered_splitting_fails_with_residual() {
    let solved = tmp("tampered.atlas");
    let (code, _, _) =
        run(&["split", "examples/p1-construction-coboundary.atlas", "--out", solved.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&solved).unwrap().replace("lambda12 = x^3", "lambda12 = x^3 + 1");
    std::fs::write(&solved, text).unwrap();
    let (code, out, _) = run(&["verify-splitting", solved.to_str().unwrap()]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("residual"), "{out}");
}

#[test]
fn cech_solve_witness() {
    let (code, out, _) = run(&["cech-solve", "--twist", "-2", "examples/xinv.cochain"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("h1-witness = 1/x"), "{out}");
    let (code, out, _) = run(&["cech-solve", "--twist", "0", "examples/xinv.cochain"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn ks_of_construction_is_theta() {
    let (code, out, _) = run(&["ks", "examples/p1-construction.atlas"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("kappa1[U->V] = (x^3 + 1)/x"), "{out}");
    assert!(out.contains("kappa2[U->V] = (x^3 + 1)/x"), "{out}");
    let (code, out, _) = run(&["obstruction", "examples/p1-construction-coboundary.atlas"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("iota-part"), "{out}");
}

#[test]
fn genus_one_like_split_warns() {
    let (code, out, _) = run(&["split", "examples/torus-like.atlas"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("genus != 1"), "{out}");
    assert!(out.contains("no claim is made"), "{out}");
}

#[test]
fn identities() {
    let (code, out, _) = run(&["verify-identities", "--suite", "sec-4.2.2"]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = run(&["verify-identities", "--suite", "all"]);
    assert_eq!(code, 0, "{out}");
    let (code, _, err) = run(&["verify-identities", "--suite", "nope"]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown identity suite"));
}

#[test]
fn broken_atlas_fails_with_residual() {
    let f = tmp("broken.atlas");
    std::fs::write(
        &f,
        "order 2\nchart U x\nchart V y\npair U V\n  f = x\n  zeta = 1\n  psi1 = 3\n  psi2 = x\n  f1 = 3\n  f2 = x\n  g12 = 3*x\n  zeta12 = 1\nend\n",
    )
    .unwrap();
    let (code, out, _) = run(&["check", "--superconformal", f.to_str().unwrap()]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("U->V [xi1*xi2]: residual -2"), "{out}");
}

#[test]
fn load_errors_exit_2() {
    let f = tmp("nozeta.atlas");
    std::fs::write(&f, "order 2\nchart U x\nchart V y\npair U V\n  f = -1/x\nend\n").unwrap();
    let (code, _, err) = run(&["check", f.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("missing `zeta`"), "{err}");
    let (code, _, _) = run(&["check", "examples/does-not-exist.atlas"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn json_reports_are_deterministic() {
    let (a, b) = (tmp("a.json"), tmp("b.json"));
    for p in [&a, &b] {
        let (code, _, _) = run(&["--json", p.to_str().unwrap(), "check", "examples/p1-construction.atlas"]);
        assert_eq!(code, 0);
    }
    let (ja, jb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ja, jb);
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["command"], "check");
}

#[test]
fn json_input_accepted() {
    let f = tmp("split.json");
    std::fs::write(
        &f,
        r#"{"order": 2, "charts": [{"name": "U", "var": "x"}, {"name": "V", "var": "y"}],
            "pairs": [{"source": "U", "target": "V", "entries": {"f": "-1/x", "zeta": "1/x"}}]}"#,
    )
    .unwrap();
    let (code, out, _) = run(&["check", f.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
}
