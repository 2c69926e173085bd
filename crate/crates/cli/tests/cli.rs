use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn cnarg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cnarg"))
        .args(args)
        .env_remove("CNARG_CORPUS_ROOT")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate_clean_corpus_exits_zero() {
    let corpus = fixtures().join("corpus30");
    let o = cnarg(&["validate", "--corpus", s(&corpus)]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).is_empty());
}

#[test]
fn validate_duplicate_conclusion_exits_one_with_report() {
    let tmp = tempfile::tempdir().unwrap();
    let line = fs::read_to_string(fixtures().join("validation/adversarial.jsonl"))
        .unwrap()
        .lines()
        .find(|l| l.contains("\"DuplicateConclusion\""))
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["tweet"].to_string())
        .unwrap();
    let input = tmp.path().join("bad.jsonl");
    fs::write(&input, format!("{line}\n")).unwrap();
    let out = tmp.path().join("out");
    let o = cnarg(&["validate", "--corpus", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let errors: Vec<&str> = text.lines().filter(|l| l.contains("\terror\t")).collect();
    assert_eq!(errors.len(), 1, "{text}");
    assert!(errors[0].contains("DuplicateConclusion"));
    // report written even though validation failed
    assert_eq!(
        fs::read_to_string(out.join("validation.tsv")).unwrap(),
        text
    );
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn missing_corpus_is_a_usage_error() {
    let o = cnarg(&["validate", "--corpus", "/nonexistent/corpus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
    assert!(!o.stderr.is_empty());
}

#[test]
fn unknown_task_is_a_usage_error() {
    let corpus = fixtures().join("corpus30");
    let o = cnarg(&["train", "--corpus", s(&corpus), "--tasks", "sentiment"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sentiment"));
}

#[test]
fn malformed_annotation_is_a_corpus_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("t1.txt"), "hello world").unwrap();
    fs::write(
        tmp.path().join("t1.ann"),
        "T1\tJustification 0 999\thello\n",
    )
    .unwrap();
    let o = cnarg(&["stats", "--corpus", s(tmp.path())]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn corpus_root_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_cnarg"))
        .args(["stats", "--json"])
        .env("CNARG_CORPUS_ROOT", fixtures().join("corpus30"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let got: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let want: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(fixtures().join("corpus30_expected.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(got["by_lang"]["EN"], want["EN"]);
    assert_eq!(got["by_lang"]["ES"], want["ES"]);
}

#[test]
fn agreement_prints_table() {
    let a = fixtures().join("agreement/a");
    let b = fixtures().join("agreement/b");
    let o = cnarg(&["agreement", "--a", s(&a), "--b", s(&b)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for label in [
        "Collect.",
        "Prop.",
        "Pivot",
        "Justif.",
        "Conc.",
        "Arg.",
        "Type Conc.",
        "Type Just.",
    ] {
        assert!(text.contains(label), "{label} missing in\n{text}");
    }
}

#[test]
fn scaffold_matches_golden() {
    let corpus = fixtures().join("corpus30");
    let o = cnarg(&["scaffold", "--corpus", s(&corpus)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        fs::read_to_string(fixtures().join("golden/scaffolds.txt")).unwrap()
    );
}

#[test]
fn ingest_round_trips_through_standoff() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ingested");
    let corpus = fixtures().join("corpus30");
    let o = cnarg(&[
        "ingest",
        "--standoff",
        "--corpus",
        s(&corpus),
        "--out",
        s(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let stats = |p: &Path| stdout(&cnarg(&["stats", "--json", "--corpus", s(p)]));
    let original = stats(&corpus);
    assert_eq!(stats(&out.join("corpus.jsonl")), original);
    assert_eq!(stats(&out.join("standoff")), original);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["artifacts"]["corpus.jsonl"].is_string());
}

#[test]
fn eval_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("eval");
    let corpus = fixtures().join("corpus30");
    let args = |o: &Path| {
        cnarg(&[
            "eval",
            "--corpus",
            s(&corpus),
            "--tasks",
            "arg,justification,collective",
            "--suite",
            "paired",
            "--seeds",
            "1,2",
            "--out",
            s(o),
        ])
    };
    let first = args(&out);
    assert_eq!(
        first.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let manifest = fs::read(out.join("manifest.json")).unwrap();
    let report = fs::read(out.join("report.json")).unwrap();
    let second = args(&out);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(fs::read(out.join("manifest.json")).unwrap(), manifest);
    assert_eq!(fs::read(out.join("report.json")).unwrap(), report);
    let text = stdout(&first);
    assert_eq!(text.lines().count(), 5, "{text}");
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cnarg.toml");
    let out = tmp.path().join("run");
    fs::write(
        &cfg,
        format!(
            "corpus = {:?}\n[experiment]\ntasks = [\"arg\"]\nseeds = [1]\ngrid = {{ search = [1.0] }}\n",
            s(&fixtures().join("corpus30"))
        ),
    )
    .unwrap();
    let o = cnarg(&[
        "train",
        "--config",
        s(&cfg),
        "--seeds",
        "3",
        "--out",
        s(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(out.join("models/arg-seed3.json").is_file());
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(
        m["config"]["config"]["experiment"]["seeds"],
        serde_json::json!([3])
    );
    assert_eq!(
        m["config"]["config"]["experiment"]["grid"],
        serde_json::json!({"search": [1.0]})
    );
}

#[test]
fn embed_family_without_vectors_is_a_usage_error() {
    let corpus = fixtures().join("corpus30");
    let o = cnarg(&[
        "eval",
        "--corpus",
        s(&corpus),
        "--tasks",
        "arg",
        "--family",
        "lr_embed",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn embed_family_with_vectors_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let vectors = tmp.path().join("v.txt");
    fs::write(&vectors, "3 2\nillegals 1 0\ncriminals 0 1\nthey 0.5 0.5\n").unwrap();
    let corpus = fixtures().join("corpus30");
    let o = cnarg(&[
        "eval",
        "--corpus",
        s(&corpus),
        "--tasks",
        "arg",
        "--family",
        "lr_embed",
        "--seeds",
        "1",
        "--embeddings",
        s(&vectors),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("LR w/embed"));
}
