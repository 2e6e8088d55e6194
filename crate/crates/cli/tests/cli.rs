use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use advisory_miner::advisor::{parse_report_text, AdvisingReport};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_advisory-miner"));
    c.env_remove("ADVISORY_MINER_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
    stdout(&o)
}

fn cohort(dir: &Path, seed: &str) -> PathBuf {
    let path = dir.join(format!("cohort-{seed}.csv"));
    ok(&["generate", "--seed", seed, "--out", path.to_str().unwrap()]);
    path
}

#[test]
fn generate_is_reproducible_and_echoes_seed() {
    let a = run(&["generate", "--seed", "11"]);
    let b = run(&["generate", "--seed", "11"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stderr(&a).trim(), "seed: 11");
    assert_eq!(stdout(&a).lines().count(), 250);

    let from_env = bin().args(["generate"]).env("ADVISORY_MINER_SEED", "11").output().unwrap();
    assert_eq!(from_env.stdout, a.stdout);
}

#[test]
fn missing_seed_is_a_usage_error() {
    for args in [&["generate"][..], &["crossval", "--data", "c.csv", "--algo", "knn"]] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains("--seed"));
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn unknown_algorithm_and_flag_are_usage_errors() {
    let o = run(&["train", "--data", "c.csv", "--algo", "svm"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("c45") && err.contains("nb") && err.contains("knn"), "{err}");
    assert_eq!(run(&["rules", "--data", "c.csv", "--verbose"]).status.code(), Some(2));
    assert_eq!(run(&["crossval", "--data", "c.csv", "--seed", "1", "--folds", "1"]).status.code(), Some(2));
}

#[test]
fn crossval_machine_formats_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = cohort(dir.path(), "3");
    let data = data.to_str().unwrap();
    for format in ["csv", "json"] {
        let args = ["crossval", "--data", data, "--seed", "5", "--folds", "5", "--format", format];
        let first = ok(&args);
        assert_eq!(first, ok(&args));
        let mut parallel = args.to_vec();
        parallel.push("--parallel");
        assert_eq!(first, ok(&parallel));
    }
    let json: serde_json::Value = serde_json::from_str(&ok(&["crossval", "--data", data, "--seed", "5", "--format", "json"])).unwrap();
    let reports = json.as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        assert_eq!(r["instances"], 249);
        assert_eq!(r["seed"], 5);
    }
}

#[test]
fn crossval_ranking_orders_best_first() {
    let dir = tempfile::tempdir().unwrap();
    let data = cohort(dir.path(), "4");
    let text = ok(&["crossval", "--data", data.to_str().unwrap(), "--seed", "4", "--rank-by", "rmse", "--format", "json"]);
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rmse: Vec<f64> = json.as_array().unwrap().iter().map(|r| r["rmse"].as_f64().unwrap()).collect();
    assert!(rmse.windows(2).all(|w| w[0] <= w[1]), "{rmse:?}");
}

#[test]
fn train_then_predict_one_student() {
    let dir = tempfile::tempdir().unwrap();
    let data = cohort(dir.path(), "6");
    let model = dir.path().join("m.json");
    ok(&["train", "--data", data.to_str().unwrap(), "--algo", "knn", "--k", "3", "--out", model.to_str().unwrap()]);

    let text = std::fs::read_to_string(&data).unwrap();
    let one = dir.path().join("one.csv");
    std::fs::write(&one, text.lines().take(2).collect::<Vec<_>>().join("\n")).unwrap();
    let out = ok(&["predict", "--model", model.to_str().unwrap(), "--data", one.to_str().unwrap()]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 1);
    let fields: Vec<&str> = lines[0].split('\t').collect();
    assert_eq!(fields[0], "S0001");
    assert!(["Normal", "NearToRisk", "UnderRisk"].contains(&fields[1]));
    let total: f64 = fields[2].split(' ').map(|kv| kv.split('=').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-3);
}

#[test]
fn predict_projects_onto_reduced_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = cohort(dir.path(), "7");
    let data = data.to_str().unwrap();
    let model = dir.path().join("m.json");
    ok(&["train", "--data", data, "--algo", "nb", "--exclude", "Plan_Study,GEN", "--out", model.to_str().unwrap()]);
    let csv = ok(&["predict", "--model", model.to_str().unwrap(), "--data", data, "--format", "csv"]);
    assert!(csv.starts_with("row,sid,predicted,p_Normal,p_NearToRisk,p_UnderRisk\n"));
    assert_eq!(csv.lines().count(), 250);
}

#[test]
fn stdin_and_json_datasets_are_accepted() {
    let csv = ok(&["generate", "--seed", "8", "--n", "60"]);
    let mut child = bin()
        .args(["describe", "--data", "-", "--format", "csv"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(csv.as_bytes()).unwrap();
    let from_stdin = child.wait_with_output().unwrap();
    assert!(from_stdin.status.success());

    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("c.json");
    ok(&["generate", "--seed", "8", "--n", "60", "--format", "json", "--out", json.to_str().unwrap()]);
    let from_json = ok(&["describe", "--data", json.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(stdout(&from_stdin), from_json);
}

#[test]
fn data_errors_exit_one_with_row_context_and_leave_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    let mut text = ok(&["generate", "--seed", "9", "--n", "5"]);
    text = text.replacen("InStudy", "Dropped", 1);
    std::fs::write(&bad, text).unwrap();
    let out = dir.path().join("m.json");
    let o = run(&["train", "--data", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("bad.csv") && err.contains("line") && err.contains("L_STATUS"), "{err}");
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn summary_statistics_reproduce_reference_tables() {
    let anova = ok(&["anova", "--ss-between", "730.6691", "--ss-within", "7694.921", "--groups", "2", "--observations", "39"]);
    assert!(anova.contains("207.9708378") && anova.contains("3.5133248") && anova.contains("4.1054559"), "{anova}");
    let t = ok(&[
        "ttest", "--n1", "17", "--mean1", "19.05882353", "--var1", "107.8088235",
        "--n2", "17", "--mean2", "26.17647059", "--var2", "210.7794118", "--format", "json",
    ]);
    let json: serde_json::Value = serde_json::from_str(&t).unwrap();
    assert_eq!(json["df"], 32);
    assert!((json["t_stat"].as_f64().unwrap() + 1.644167436).abs() < 1e-6);
}

#[test]
fn analyze_sections_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let data = cohort(dir.path(), "10");
    let data = data.to_str().unwrap();
    let text = ok(&["analyze", "--data", data]);
    for heading in ["Cohort composition", "One-way ANOVA", "Pooled Variance", "St. dev."] {
        assert!(text.contains(heading), "missing {heading}");
    }
    let series = ok(&["analyze", "--data", data, "--format", "csv"]);
    assert!(series.starts_with("index,sid,reg,gain,diff,band\n"));
    assert_eq!(series.lines().count(), 250);
}

#[test]
fn rules_from_data_and_from_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = cohort(dir.path(), "42");
    let data = data.to_str().unwrap();
    let direct = ok(&["rules", "--data", data]);
    assert!(direct.lines().next().unwrap().contains("Diff_G_R_C_H"));

    let model = dir.path().join("t.json");
    ok(&["train", "--data", data, "--out", model.to_str().unwrap()]);
    assert_eq!(ok(&["rules", "--model", model.to_str().unwrap()]), direct);

    let nb = dir.path().join("nb.json");
    ok(&["train", "--data", data, "--algo", "nb", "--out", nb.to_str().unwrap()]);
    let o = run(&["rules", "--model", nb.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("C4.5"));
}

#[test]
fn report_round_trips_and_rejects_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = cohort(dir.path(), "12");
    let data = data.to_str().unwrap();
    let model = dir.path().join("t.json");
    ok(&["train", "--data", data, "--out", model.to_str().unwrap()]);
    let model = model.to_str().unwrap();

    let narrative = dir.path().join("n.json");
    std::fs::write(
        &narrative,
        r#"{"advisor": "Dr. Advisor", "semesters": [{"recommended": ["Calculus I"], "selected": ["Calculus I"], "problem": true, "problem_type": {"academic": true, "psychological": false, "social": false}, "solution": "Tutoring"}, {}, {}]}"#,
    )
    .unwrap();
    let base = ["report", "--model", model, "--data", data, "--sid", "S0003", "--narrative", narrative.to_str().unwrap()];
    let text = ok(&base);
    let json = ok(&[&base[..], &["--format", "json"]].concat());
    let from_text = parse_report_text(&text).unwrap();
    let from_json = AdvisingReport::from_json(&json).unwrap();
    assert_eq!(from_text, from_json);
    assert_eq!(from_text.student.sid, "S0003");
    assert_eq!(from_text.narrative.advisor, "Dr. Advisor");

    let o = run(&[&base[..], &["--format", "csv"]].concat());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("csv"));

    let o = run(&["report", "--model", model, "--data", data]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["report", "--model", model, "--data", data, "--sid", "S9999"]);
    assert_eq!(o.status.code(), Some(1));
}
