use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn featprop(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_featprop"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn three_cycle(dir: &Path, w2: f64) -> [String; 3] {
    let graph = dir.join("g.tsv");
    let x = dir.join("x.csv");
    let w = dir.join("w.json");
    fs::write(&graph, "0\t1\n1\t2\n2\t0\n").unwrap();
    fs::write(&x, "node,f0\n0,1\n1,0\n2,0\n").unwrap();
    fs::write(&w, format!("{{\"w1\": [[1.0]], \"w2\": [[{w2}]]}}")).unwrap();
    [graph, x, w].map(|p| p.to_string_lossy().into_owned())
}

#[test]
fn node_embedding_matches_hand_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let [g, x, w] = three_cycle(tmp.path(), 0.5);
    let out = tmp.path().join("out");
    let o = featprop(&["embed", "--mode", "node", "--graph", &g, "--features", &x, "--weights", &w], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // h0 = 1 + h1/2, h1 = h2/2, h2 = h0/2  =>  h0 = 8/7
    let text = fs::read_to_string(out.join("embedding.csv")).unwrap();
    let rows: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    for (got, want) in rows.iter().zip([8.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0]) {
        assert!((got - want).abs() < 1e-7, "{got} vs {want}");
    }
    assert!(out.join("residuals.csv").exists());
    assert!(out.join("config.json").exists());
}

#[test]
fn infeasible_weights_are_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let [g, x, w] = three_cycle(tmp.path(), 1.1);
    let out = tmp.path().join("out");
    let o = featprop(&["embed", "--mode", "node", "--graph", &g, "--features", &x, "--weights", &w], &out);
    assert_eq!(code(&o), 3);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["conditions"]["verdict"], false);
    assert!(report["violations"][0].as_str().unwrap().contains("column sum"));
    assert!(!out.join("embedding.csv").exists());

    let forced = tmp.path().join("forced");
    let o = featprop(
        &["embed", "--mode", "node", "--graph", &g, "--features", &x, "--weights", &w, "--force"],
        &forced,
    );
    assert_eq!(code(&o), 4, "forcing a divergent solve reports overflow");
}

#[test]
fn malformed_input_exits_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    let [g, x, w] = three_cycle(tmp.path(), 0.5);
    fs::write(&w, "not json").unwrap();
    let o = featprop(
        &["embed", "--mode", "node", "--graph", &g, "--features", &x, "--weights", &w],
        &tmp.path().join("out"),
    );
    assert_eq!(code(&o), 2);
    let o = featprop(&["train", "--mode", "nonsense", "--synthetic"], &tmp.path().join("out2"));
    assert_eq!(code(&o), 2);
}

#[test]
fn structure_embedding_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = featprop(&["embed", "--mode", "structure", "--zachary", "--alpha", "0.8", "--dim", "3"], &out);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(out.join("embedding.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "node,f0,f1,f2");
    assert_eq!(lines.len(), 35);
}

#[test]
fn generated_dataset_round_trips_through_train_and_eval() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let o = featprop(&["generate", "--seed", "2", "--edges", "1500", "--buyers", "120", "--sellers", "40"], &data);
    assert_eq!(code(&o), 0);
    for f in ["edges.tsv", "node_features.csv", "edge_features.csv", "labels.csv"] {
        assert!(data.join(f).exists(), "{f}");
    }
    let d = data.to_string_lossy().into_owned();
    let run = tmp.path().join("run");
    let o = featprop(&["train", "--data", &d, "--mode", "edge2vec", "--epochs", "50"], &run);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let log = fs::read_to_string(run.join("train_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 51);

    let ck = run.join("checkpoint.json").to_string_lossy().into_owned();
    let ev = tmp.path().join("eval");
    let o = featprop(&["eval", "--data", &d, "--checkpoint", &ck], &ev);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // the checkpoint scores the same test split the training run did
    assert_eq!(
        fs::read(ev.join("pr_edge2vec.csv")).unwrap(),
        fs::read(run.join("pr.csv")).unwrap()
    );
}

#[test]
fn unprojected_edge2vec_overflows() {
    let tmp = tempfile::tempdir().unwrap();
    let o = featprop(
        &["train", "--synthetic", "--mode", "edge2vec", "--no-projection", "--lambda", "1e-6"],
        &tmp.path().join("out"),
    );
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("overflow"));
}

#[test]
fn multi_seed_comparison_is_independent_of_jobs() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "eval", "--compare", "--synthetic", "--seeds", "2", "--epochs", "40", "--edges", "1500", "--buyers", "120",
        "--sellers", "40",
    ];
    let serial = tmp.path().join("serial");
    let parallel = tmp.path().join("parallel");
    assert_eq!(code(&featprop(&args, &serial)), 0);
    let mut with_jobs = args.to_vec();
    with_jobs.extend(["--jobs", "2"]);
    assert_eq!(code(&featprop(&with_jobs, &parallel)), 0);
    for f in ["runs.csv", "summary.csv", "pr_edge2vec_seed1.csv"] {
        assert_eq!(fs::read(serial.join(f)).unwrap(), fs::read(parallel.join(f)).unwrap(), "{f}");
    }
    let summary = fs::read_to_string(serial.join("summary.csv")).unwrap();
    let modes: Vec<&str> = summary.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(modes, ["control1", "control2", "edge2vec"]);
}

#[test]
fn projected_overflow_grid_is_clean() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = featprop(
        &["overflow", "--synthetic", "--projection", "--orders", "1,3,5", "--lambdas", "1e-3,1e-6", "--epochs", "100"],
        &out,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("overflow.csv")).unwrap();
    assert!(!text.lines().skip(1).take(2).any(|l| l.contains('Y')), "{text}");
    assert!(text.ends_with("# staircase: monotone\n"));
}

#[test]
fn config_echo_has_no_timestamps() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    featprop(&["zachary", "--seeds", "1"], &a);
    featprop(&["zachary", "--seeds", "1"], &b);
    let strip = |p: &Path| {
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("config.json")).unwrap()).unwrap();
        v["out"] = serde_json::Value::Null;
        v
    };
    let echo = strip(&a);
    assert_eq!(echo, strip(&b));
    assert_eq!(echo["command"], "zachary");
    assert_eq!(echo["alphas"], serde_json::json!([0.5, 0.8, 0.9]));
    assert_eq!(
        fs::read(a.join("separation.csv")).unwrap(),
        fs::read(b.join("separation.csv")).unwrap()
    );
}
