use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TWO_QUBIT: &str = include_str!("../../core/tests/data/two_qubit_grover.qasm");

fn grover(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_grover"));
    cmd.args(args).env_remove("GROVER_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn fixture(dir: &Path) -> String {
    let path = dir.join("grover2.qasm");
    fs::write(&path, TWO_QUBIT).unwrap();
    path.to_str().unwrap().to_string()
}

fn generate(dir: &Path, extra: &[&str], envs: &[(&str, &str)]) -> Vec<u8> {
    let out_dir = dir.to_str().unwrap();
    let mut args = vec![
        "generate",
        "--n-max",
        "4",
        "--samples",
        "3",
        "--out",
        out_dir,
    ];
    args.extend_from_slice(extra);
    let out = grover(&args, envs);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    fs::read(dir.join("manifest.json")).unwrap()
}

#[test]
fn analyze_two_qubit_listing() {
    let dir = tempfile::tempdir().unwrap();
    let file = fixture(dir.path());

    let out = grover(&["analyze", &file], &[]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("00"));
    assert!(text.contains(" '00': 1.0000,"), "{text}");

    let trace = stdout(&grover(&["analyze", &file, "--trace"], &[]));
    assert!(trace.starts_with("=== Analysis ===\n"));
    assert!(trace.contains("=== Block 1 ==="));

    let json: serde_json::Value =
        serde_json::from_str(&stdout(&grover(&["analyze", &file, "--json"], &[]))).unwrap();
    assert_eq!(json["marked"][0], "00");
}

#[test]
fn simulate_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let file = fixture(dir.path());
    for method in ["sv", "unitary", "dm"] {
        let out = grover(&["simulate", &file, "--method", method], &[]);
        assert_eq!(code(&out), 0, "{method}");
        assert!(stdout(&out).contains(" '00': 1.0000,"), "{method}");
    }
    let out = grover(&["simulate", &file, "--method", "quantum"], &[]);
    assert_eq!(code(&out), 1);
}

#[test]
fn tokenize_file_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let file = fixture(dir.path());
    let vocab = dir.path().join("vocab.json");
    let out = grover(
        &["tokenize", &file, "--vocab", vocab.to_str().unwrap()],
        &[],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().next(), Some("OPENQASM"));
    let map: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(&vocab).unwrap()).unwrap();
    assert_eq!(map["OPENQASM"], 0);

    let stats = stdout(&grover(&["tokenize", &file, "--stats"], &[]));
    assert!(stats.contains("compression_ratio"), "{stats}");
}

#[test]
fn generate_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = generate(a.path(), &[], &[]);
    let second = generate(b.path(), &[], &[]);
    assert_eq!(first, second);
    assert!(a.path().join("traces.jsonl").exists());
}

#[test]
fn seed_environment_override() {
    let dirs: Vec<_> = (0..4).map(|_| tempfile::tempdir().unwrap()).collect();
    let default = generate(dirs[0].path(), &[], &[]);
    let env42 = generate(dirs[1].path(), &[], &[("GROVER_SEED", "42")]);
    let env7 = generate(dirs[2].path(), &[], &[("GROVER_SEED", "7")]);
    let flag7 = generate(dirs[3].path(), &["--seed", "7"], &[("GROVER_SEED", "9")]);
    assert_eq!(default, env42);
    assert_ne!(default, env7);
    assert_eq!(env7, flag7);
}

#[test]
fn metrics_against_label() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &[], &[]);
    let id = "n03_t1_0000";
    let circuit = dir.path().join(format!("circuits/{id}.qasm"));
    let label = dir.path().join(format!("labels/{id}.json"));
    let pred = dir.path().join("pred.json");
    let sim = grover(&["simulate", circuit.to_str().unwrap(), "--json"], &[]);
    assert_eq!(code(&sim), 0);
    fs::write(&pred, sim.stdout).unwrap();

    let out = grover(
        &[
            "metrics",
            "--pred",
            pred.to_str().unwrap(),
            "--truth",
            label.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let scores: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(scores["sa"], 1.0);
    assert!(scores["cf"].as_f64().unwrap() > 1.0 - 1e-12);
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bench.json");
    let csv = dir.path().join("report.csv");
    fs::write(
        &config,
        r#"{"n_min": 2, "n_max": 3, "samples": 4, "methods": ["analyzer", "sv"], "timing": true, "repeats": 1}"#,
    )
    .unwrap();
    let out = grover(
        &[
            "bench",
            "--config",
            config.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("kind,method,n,t,"), "{text}");
    assert!(
        text.lines().any(|l| l.starts_with("timing,sv,2,")),
        "{text}"
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let file = fixture(dir.path());
    let missing = dir.path().join("missing.qasm");
    let broken = dir.path().join("broken.qasm");
    fs::write(&broken, "OPENQASM 3.0;\nfoo bar\n").unwrap();
    let bad_config = dir.path().join("bad.json");
    fs::write(&bad_config, r#"{"n_min": 5, "n_max": 2}"#).unwrap();
    let out_dir = dir.path().join("out");

    assert_eq!(code(&grover(&["--help"], &[])), 0);
    assert_eq!(code(&grover(&[], &[])), 1);
    assert_eq!(code(&grover(&["frobnicate"], &[])), 1);
    assert_eq!(code(&grover(&["analyze"], &[])), 1);
    assert_eq!(code(&grover(&["analyze", &file, "--bogus"], &[])), 1);
    assert_eq!(
        code(&grover(&["analyze", missing.to_str().unwrap()], &[])),
        2
    );
    assert_eq!(
        code(&grover(&["analyze", broken.to_str().unwrap()], &[])),
        2
    );
    assert_eq!(
        code(&grover(&["simulate", broken.to_str().unwrap()], &[])),
        2
    );
    assert_eq!(
        code(&grover(
            &[
                "bench",
                "--config",
                bad_config.to_str().unwrap(),
                "--csv",
                "x.csv"
            ],
            &[]
        )),
        2
    );
    let out = grover(
        &["generate", "--out", out_dir.to_str().unwrap()],
        &[("GROVER_SEED", "abc")],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("GROVER_SEED"));
}
