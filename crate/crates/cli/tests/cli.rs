use std::fs;
use std::process::{Command, Output};

fn rank1(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rank1"))
        .args(args)
        .env_remove("RANK1_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bench_writes_the_csv_schema_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, threads: &str| {
        let out = dir.path().join(sub);
        let o = rank1(&[
            "bench",
            "pair",
            "--algo",
            "pair-elim",
            "--n",
            "4",
            "--u1",
            "0.9",
            "--delta",
            "0.5",
            "--horizon",
            "5000",
            "--runs",
            "5",
            "--seed",
            "3",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        stdout(&o);
        out
    };
    let a = run("a", "1");
    let b = run("b", "3");
    for file in ["runs.csv", "aggregate.csv", "status.csv", "records.json"] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
    let runs = fs::read_to_string(a.join("runs.csv")).unwrap();
    assert!(runs.starts_with("run_id,algo,t,cum_regret\n"));
    assert!(runs.lines().nth(1).unwrap().starts_with("0,pair-elim,1,"));
    let agg = fs::read_to_string(a.join("aggregate.csv")).unwrap();
    assert!(agg.starts_with("algo,t,median,p5,p95\n"));
    for line in agg.lines().skip(1) {
        let f: Vec<f64> = line
            .split(',')
            .skip(2)
            .map(|x| x.parse().unwrap())
            .collect();
        assert!(f[1] <= f[0] && f[0] <= f[2], "{line}");
    }
    assert!(agg.lines().last().unwrap().starts_with("pair-elim,5000,"));
}

#[test]
fn single_run_rows_equal_its_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("one");
    stdout(&rank1(&[
        "bench",
        "matching",
        "--algo",
        "sam",
        "--n",
        "3",
        "--mu",
        "0.5",
        "--delta",
        "0.2",
        "--horizon",
        "2000",
        "--runs",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]));
    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    let agg = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    assert_eq!(runs.lines().count(), agg.lines().count());
    for (r, a) in runs.lines().skip(1).zip(agg.lines().skip(1)) {
        let r: Vec<&str> = r.split(',').collect();
        let a: Vec<&str> = a.split(',').collect();
        assert_eq!((r[2], r[3]), (a[1], a[2]));
        assert_eq!((a[2], a[2]), (a[3], a[4]));
    }
}

#[test]
fn explore_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("ex");
    fs::write(
        &cfg,
        format!(
            r#"{{"generator": {{"kind": "fixed", "instance": {{"kind": "monopartite", "u": [0.9, 0.7, 0.5, 0.3], "dist": "bernoulli"}}}},
               "algo": "matching-id", "mode": {{"kind": "explore", "delta": 0.1}}, "runs": 4, "base_seed": 1,
               "output": {:?}}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let text = stdout(&rank1(&["explore", "--config", cfg.to_str().unwrap()]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["aggregate"]["runs"], 4);
    let csv = fs::read_to_string(out.join("explore.csv")).unwrap();
    assert!(csv.starts_with("run_id,algo,tau,correct\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn refusals_are_reported_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    stdout(&rank1(&[
        "bench",
        "matching",
        "--algo",
        "escb",
        "--n",
        "7",
        "--delta",
        "0.1",
        "--horizon",
        "10",
        "--runs",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]));
    let status = fs::read_to_string(out.join("status.csv")).unwrap();
    assert!(status.starts_with("run_id,algo,seed,instance_digest,status,message\n"));
    assert_eq!(status.matches(",failed,").count(), 2);
}

#[test]
fn bounds_prints_reports() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    fs::write(
        &inst,
        r#"{"kind": "monopartite", "u": [0.9, 0.8, 0.3, 0.2], "dist": "bernoulli"}"#,
    )
    .unwrap();
    let text = stdout(&rank1(&["bounds", "--instance", inst.to_str().unwrap()]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let a = v[0]["components"]["a_regret"].as_f64().unwrap();
    assert!((a - (1.0 / 0.45 + 1.0 / 0.54)).abs() < 1e-12);
    assert_eq!(v[2]["name"], "exploration_first");
}

#[test]
fn bad_input_fails_cleanly() {
    let o = rank1(&[
        "bench",
        "pair",
        "--algo",
        "no-such",
        "--n",
        "2",
        "--u1",
        "0.5",
        "--delta",
        "0.1",
        "--horizon",
        "5",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown algorithm"));
    let o = rank1(&[
        "explore",
        "--algo",
        "matching-id",
        "--n",
        "2",
        "--gap",
        "0.2",
    ]);
    assert!(!o.status.success());
}
