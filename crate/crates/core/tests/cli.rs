use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn infoflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infoflow"))
        .args(args)
        .env_remove("INFOFLOW_SEED")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn analyze_examples() {
    let out = infoflow(&["analyze", &fixture("four_agents_x.sys")]);
    assert_eq!(code(&out), 0);
    let r = &json_of(&out)["report"];
    assert_eq!(r["edges"].as_array().unwrap().len(), 4);
    assert_eq!(r["classification"], "decentralized");
    let nontrivial = r["loops"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|l| l["classification"] == "nontrivial")
        .count();
    assert_eq!(nontrivial, 1);

    let out = infoflow(&["analyze", &fixture("triangle_bidir.sys")]);
    assert_eq!(json_of(&out)["report"]["classification"], "centralized");

    let out = infoflow(&["analyze", &fixture("decoupled.sys")]);
    let r = &json_of(&out)["report"];
    assert_eq!(r["edges"].as_array().unwrap().len(), 0);
    assert_eq!(r["classification"], "decentralized");
}

#[test]
fn complex_examples() {
    let labels = |name: &str| -> Vec<String> {
        let out = infoflow(&["complex", &fixture(name)]);
        assert_eq!(code(&out), 0);
        json_of(&out)["report"]["labels"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect()
    };
    assert_eq!(
        labels("sysloop.sys"),
        ["h1", "h2", "h3", "[h1,h2]", "[h1,h3]", "[h2,h3]"]
    );
    assert!(labels("sysnoloop.sys").contains(&"[h1,h2,h3]".to_string()));
    assert_eq!(labels("decoupled.sys"), ["h1", "h2", "h3"]);
}

#[test]
fn complex_dot_writes_a_json_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("loop.dot");
    let out = infoflow(&[
        "complex",
        &fixture("sysloop.sys"),
        "--format",
        "dot",
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let dot = std::fs::read_to_string(&out_path).unwrap();
    assert!(dot.starts_with("graph \"sysloop\""));
    let side: Value = serde_json::from_slice(&std::fs::read(dir.path().join("loop.json")).unwrap()).unwrap();
    assert_eq!(side["report"]["counts"], serde_json::json!([3, 3]));
}

#[test]
fn invariance_exit_codes() {
    let four = fixture("four_agents_x.sys");
    assert_eq!(code(&infoflow(&["invariance", &four])), 0);
    assert_eq!(code(&infoflow(&["invariance", &four, "--change", "identity"])), 0);
    let naive = infoflow(&["invariance", &four, "--naive"]);
    assert_eq!(code(&naive), 3);
    assert_eq!(json_of(&naive)["report"]["status"], "differ");
    let formation = infoflow(&[
        "invariance",
        &fixture("formation5.sys"),
        "--against",
        &fixture("formation5_z.sys"),
    ]);
    assert_eq!(code(&formation), 0);
    assert_eq!(code(&infoflow(&["invariance", &four, "--change", "nope"])), 1);
}

#[test]
fn order_examples() {
    let s3 = fixture("s3_deltas.sys");
    let relation = |args: &[&str]| json_of(&infoflow(args))["report"]["verdict"]["relation"].clone();
    assert_eq!(
        relation(&["order", &s3, "--lhs", "delta2", "--rhs", "delta1"]),
        "finer_or_equal"
    );
    assert_eq!(
        relation(&["order", &s3, "--lhs", "delta2", "--rhs", "swapped"]),
        "equivalent"
    );
    assert_eq!(
        relation(&["order", &s3, "--lhs", "delta2", "--rhs", "shifted"]),
        "equivalent"
    );
    let mu = fixture("mu_box.sys");
    assert_eq!(
        relation(&["order", &mu, "--lhs", "first", "--rhs", "square"]),
        "equivalent"
    );
    assert_eq!(
        relation(&[
            "order",
            &mu,
            "--lhs",
            "first",
            "--rhs",
            "square",
            "--box",
            "m1=-1:1,m2=-1:1"
        ]),
        "finer_or_equal"
    );
}

#[test]
fn order_exports_samples_as_csv() {
    let out = infoflow(&[
        "order",
        &fixture("s3_deltas.sys"),
        "--lhs",
        "delta1",
        "--rhs",
        "delta2",
        "--format",
        "csv",
        "--samples",
        "8",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,x3,x4"));
    assert_eq!(lines.count(), 8);
}

#[test]
fn simulate_examples() {
    let out = infoflow(&["simulate", &fixture("decay.sys"), "--t-end", "1"]);
    assert_eq!(code(&out), 0);
    let x = json_of(&out)["report"]["final_state"][0].as_f64().unwrap();
    assert!((x - (-1.0f64).exp()).abs() < 1e-9);

    let out = infoflow(&["simulate", &fixture("two_cycles.sys"), "--t-end", "2"]);
    let r = &json_of(&out)["report"];
    assert!(r["max_abs_edge_error"].as_f64().unwrap() < 1e-12);
    assert_eq!(r["objective"]["status"], "satisfied");

    assert_eq!(code(&infoflow(&["simulate", &fixture("bad_control.sys")])), 1);
}

#[test]
fn simulate_csv_with_edge_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let x0 = dir.path().join("x0.csv");
    std::fs::write(&x0, "x1,y1,x2,y2,x3,y3,x4,y4\n0.01,0,-1,1,0,3,2.2,1.5\n").unwrap();
    let traj = dir.path().join("run.csv");
    let out = infoflow(&[
        "simulate",
        &fixture("two_cycles.sys"),
        "--t-end",
        "1",
        "--x0-file",
        x0.to_str().unwrap(),
        "--format",
        "csv",
        "--stride",
        "250",
        "-o",
        traj.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let t = std::fs::read_to_string(&traj).unwrap();
    assert!(t.starts_with("t,x1,y1,"));
    assert_eq!(t.lines().count(), 6);
    let e = std::fs::read_to_string(dir.path().join("run.edges.csv")).unwrap();
    assert!(e.starts_with("t,e1_2,e2_3,e3_1,e4_3,e1_4\n"));
}

#[test]
fn wellposed_examples() {
    let samples = fixture("two_cycles_samples.csv");
    let ok = infoflow(&["wellposed", &fixture("two_cycles.sys"), "--samples-file", &samples]);
    assert_eq!(code(&ok), 0);
    assert_eq!(json_of(&ok)["report"]["locals_satisfied"], 32);
    let bad = infoflow(&[
        "wellposed",
        &fixture("two_cycles_halfplane.sys"),
        "--samples-file",
        &samples,
    ]);
    assert_eq!(code(&bad), 3);
    assert_eq!(json_of(&bad)["report"]["verdict"]["verdict"], "counterexample_found");
    assert_eq!(code(&infoflow(&["wellposed", &fixture("rendezvous.sys")])), 0);
}

#[test]
fn load_errors_exit_one_with_location() {
    let out = infoflow(&["analyze", &fixture("bad_field.sys")]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("vector field length mismatch") && err.contains("line 4"),
        "{err}"
    );
    assert_eq!(code(&infoflow(&["analyze", "/no/such/file.sys"])), 1);
}

fn run_to(dir: &Path, name: &str, args: &[&str], env_seed: Option<&str>) -> Vec<u8> {
    let path = dir.join(name);
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_infoflow"));
    cmd.args(args).arg("-o").arg(&path).env_remove("INFOFLOW_SEED");
    if let Some(s) = env_seed {
        cmd.env("INFOFLOW_SEED", s);
    }
    cmd.output().unwrap();
    std::fs::read(&path).unwrap()
}

#[test]
fn reports_are_byte_identical_and_seed_env_wins() {
    let dir = tempfile::tempdir().unwrap();
    let s3 = fixture("s3_deltas.sys");
    let args = [
        "order",
        s3.as_str(),
        "--lhs",
        "delta2",
        "--rhs",
        "delta1",
        "--seed",
        "5",
    ];
    let a = run_to(dir.path(), "a.json", &args, None);
    let b = run_to(dir.path(), "a.json", &args, None);
    assert_eq!(a, b);
    let c = run_to(dir.path(), "a.json", &args, Some("9"));
    let v: Value = serde_json::from_slice(&c).unwrap();
    assert_eq!(v["config"]["seed"], 9);
    assert_eq!(v["report"]["verdict"]["resolution"]["seed"], 9);
    assert_ne!(a, c);
}
