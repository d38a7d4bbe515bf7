use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn pacing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pacing"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    let out = pacing(&[
        "generate",
        "fixture",
        "--name",
        name,
        "--out",
        s(&path),
        "--equilibria",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn generation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = pacing(&[
            "generate",
            "stylized",
            "--kind",
            "correlated",
            "--n",
            "4",
            "--m",
            "6",
            "--sigma",
            "0.1",
            "--seed",
            "9",
            "--out",
            s(p),
        ]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn solve_revenue_gap_for_max_revenue() {
    let dir = tempfile::tempdir().unwrap();
    let inst = fixture(dir.path(), "revenue_gap");
    let rep = dir.path().join("rep.json");
    let out = pacing(&[
        "solve",
        "--instance",
        s(&inst),
        "--objective",
        "max-revenue",
        "--time-limit",
        "5",
        "--out",
        s(&rep),
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&rep);
    assert!((r["objective_value"].as_f64().unwrap() - 102.0).abs() < 1e-6);
    assert_eq!(r["verdict"]["accepted"], true);
    assert_eq!(r["instance_hash"].as_str().unwrap().len(), 64);

    // The report itself is accepted by `verify`.
    let out = pacing(&["verify", "--instance", s(&inst), "--outcome", s(&rep)]);
    assert_eq!(code(&out), 0);
}

#[test]
fn solve_single_bidder() {
    let dir = tempfile::tempdir().unwrap();
    let inst = fixture(dir.path(), "single_bidder");
    let rep = dir.path().join("rep.json");
    assert_eq!(
        code(&pacing(&[
            "solve",
            "--instance",
            s(&inst),
            "--out",
            s(&rep)
        ])),
        0
    );
    let r = json(&rep);
    assert_eq!(r["outcome"]["alphas"][0], 1.0);
    assert!(r["values"]["revenue"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn solve_random_instance_and_write_timings() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    pacing(&[
        "generate",
        "stylized",
        "--kind",
        "complete",
        "--n",
        "4",
        "--m",
        "6",
        "--seed",
        "3",
        "--out",
        s(&inst),
    ]);
    let (rep, t) = (dir.path().join("r.json"), dir.path().join("t.json"));
    let out = pacing(&[
        "solve",
        "--instance",
        s(&inst),
        "--time-limit",
        "60",
        "--out",
        s(&rep),
        "--timings",
        s(&t),
    ]);
    assert_eq!(code(&out), 0);
    assert!(json(&t)["wall_time_secs"].as_f64().is_some());
    assert!(!std::fs::read_to_string(&rep).unwrap().contains("wall_time"));
}

#[test]
fn verify_stated_and_corrupted_equilibria() {
    let dir = tempfile::tempdir().unwrap();
    let inst = fixture(dir.path(), "revenue_gap");
    let eq = dir.path().join("revenue_gap.eq0.json");
    assert_eq!(
        code(&pacing(&[
            "verify",
            "--instance",
            s(&inst),
            "--outcome",
            s(&eq)
        ])),
        0
    );

    let mut bad = json(&eq);
    bad["prices"][0] = Value::from(50.0);
    let corrupt = dir.path().join("bad.json");
    std::fs::write(&corrupt, bad.to_string()).unwrap();
    let out = pacing(&["verify", "--instance", s(&inst), "--outcome", s(&corrupt)]);
    assert_eq!(code(&out), 1);
    let verdict: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(verdict["accepted"], false);
    assert!(!verdict["violations"].as_array().unwrap().is_empty());
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("g.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    let out = dir.path().join("o.json");
    assert_eq!(
        code(&pacing(&[
            "solve",
            "--instance",
            s(&garbage),
            "--out",
            s(&out)
        ])),
        2
    );
    assert_eq!(
        code(&pacing(&[
            "solve",
            "--instance",
            "/nonexistent/x.json",
            "--out",
            s(&out)
        ])),
        4
    );
    assert_eq!(code(&pacing(&["solve", "--bogus"])), 2);
    assert_eq!(code(&pacing(&["--help"])), 0);

    let inst = fixture(dir.path(), "single_bidder");
    let bad_env = Command::new(env!("CARGO_BIN_EXE_pacing"))
        .args(["solve", "--instance", s(&inst), "--out", s(&out)])
        .env("PACING_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad_env), 2);
}

#[test]
fn timeout_writes_a_partial_result() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    pacing(&[
        "generate",
        "stylized",
        "--kind",
        "complete",
        "--n",
        "4",
        "--m",
        "6",
        "--seed",
        "1",
        "--out",
        s(&inst),
    ]);
    let rep = dir.path().join("r.json");
    let out = pacing(&[
        "solve",
        "--instance",
        s(&inst),
        "--objective",
        "max-revenue",
        "--time-limit",
        "1e-9",
        "--out",
        s(&rep),
    ]);
    assert_eq!(code(&out), 3);
    assert_eq!(json(&rep)["status"], "timeout");
}

#[test]
fn gap_report_is_reproducible_and_renders() {
    let dir = tempfile::tempdir().unwrap();
    let inst = fixture(dir.path(), "revenue_gap");
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = pacing(&[
            "gap",
            "--instance",
            s(&inst),
            "--time-limit",
            "5",
            "--out",
            s(p),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let rep = json(&a);
    assert_eq!(rep["report"], "gap");
    let rev = &rep["body"]["summary"][0];
    assert_eq!(rev["measure"], "revenue");
    assert!((rev["max_gap_pct"].as_f64().unwrap() - 97.0588).abs() < 1e-3);

    let csv = dir.path().join("long.csv");
    assert_eq!(
        code(&pacing(&["report", "--input", s(&a), "--out", s(&csv)])),
        0
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("table,row,keys,metric,value\n"));
    let hash = rep["body"]["detail"][0]["instance_hash"].as_str().unwrap();
    assert!(text
        .lines()
        .filter(|l| l.starts_with("detail,"))
        .all(|l| l.contains(hash)));
}

#[test]
fn gap_on_generated_instances_mostly_has_no_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gap.json");
    let archive = dir.path().join("store");
    let run = pacing(&[
        "gap",
        "--gen-kind",
        "complete",
        "--gen-n",
        "4",
        "--gen-m",
        "6",
        "--gen-count",
        "20",
        "--gen-seed",
        "100",
        "--time-limit",
        "60",
        "--archive",
        s(&archive),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&run), 0);
    let rep = json(&out);
    for row in rep["body"]["summary"].as_array().unwrap() {
        assert_eq!(row["pairs_pct"], 100.0, "{row}");
        assert!(row["no_gap_pct"].as_f64().unwrap() > 50.0, "{row}");
    }
    // Every detail row points at an archived instance.
    for d in rep["body"]["detail"].as_array().unwrap() {
        let h = d["instance_hash"].as_str().unwrap();
        assert!(archive.join("instances").join(format!("{h}.json")).exists());
    }
    assert_eq!(rep["metadata"]["seeds"].as_array().unwrap().len(), 20);
}

#[test]
fn misreport_fixture_rewards_the_second_bidder() {
    let dir = tempfile::tempdir().unwrap();
    let inst = fixture(dir.path(), "misreporting");
    let out = dir.path().join("m.json");
    assert_eq!(
        code(&pacing(&[
            "misreport",
            "--instance",
            s(&inst),
            "--focal",
            "1",
            "--time-limit",
            "5",
            "--out",
            s(&out)
        ])),
        0
    );
    let v = &json(&out)["body"]["instances"][0];
    assert!(
        (v["truthful_utility"].as_f64().unwrap() - 1.0).abs() < 1e-6,
        "{v}"
    );
    assert!(v["best_utility"].as_f64().unwrap() >= 99.0 - 1e-6, "{v}");
    assert_eq!(v["incentive"], true);
}

#[test]
fn scalability_table_covers_every_objective_and_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let run = pacing(&[
        "scale",
        "--ns",
        "2,4",
        "--ms",
        "3,6",
        "--per-cell",
        "1",
        "--time-limit",
        "30",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&run), 0);
    let table = json(&out)["body"]["table"].as_array().unwrap().clone();
    assert_eq!(table.len(), 6 * 3 * 2 * 2);
    assert!(table.iter().all(|r| r["solved_pct"] == 100.0));
    let rate = |prefix: &str| {
        let rows: Vec<&Value> = table
            .iter()
            .filter(|r| r["objective"].as_str().unwrap().starts_with(prefix))
            .collect();
        rows.iter()
            .map(|r| r["solved_pct"].as_f64().unwrap())
            .sum::<f64>()
            / rows.len() as f64
    };
    assert!(rate("max_") >= rate("min_"));
}

#[test]
fn best_response_dynamics_on_the_cycling_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let inst = fixture(dir.path(), "cycling");
    let (trace, regret) = (dir.path().join("t.jsonl"), dir.path().join("r.csv"));
    let out = pacing(&[
        "dynamics",
        "br",
        "--instance",
        s(&inst),
        "--alphas",
        "1,1,1",
        "--max-iters",
        "5",
        "--out",
        s(&trace),
        "--regret",
        s(&regret),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<Value> = std::fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let first = &lines[0]["alphas"];
    assert_eq!(first, &serde_json::json!([1.0, 1.0, 1.0]));
    assert!(lines.last().unwrap()["summary"].is_object());
    assert!(std::fs::read_to_string(&regret)
        .unwrap()
        .starts_with("bidder,"));
}

#[test]
fn adaptive_pacing_on_a_scaled_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = fixture(dir.path(), "misreporting");
    let scaled = dir.path().join("s.json");
    assert_eq!(
        code(&pacing(&[
            "generate",
            "scaled",
            "--instance",
            s(&inst),
            "--factor",
            "20",
            "--out",
            s(&scaled)
        ])),
        0
    );
    let trace = dir.path().join("t.jsonl");
    let out = pacing(&[
        "dynamics",
        "adaptive",
        "--scaled",
        s(&scaled),
        "--alphas",
        "1,1",
        "--step",
        "0.1",
        "--out",
        s(&trace),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 41);
}

#[test]
fn other_generators_write_instances() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    assert_eq!(code(&pacing(&["generate", "gadget", "--out", s(&g)])), 0);
    let sat = dir.path().join("sat.json");
    let out = pacing(&[
        "generate",
        "sat",
        "--vars",
        "2",
        "--clauses",
        "3",
        "--seed",
        "4",
        "--out",
        s(&sat),
    ]);
    assert_eq!(code(&out), 0);
    let info: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(info["threshold"], 3.0 + 16.0);
    let base = dir.path().join("base.json");
    pacing(&[
        "generate",
        "stylized",
        "--kind",
        "complete",
        "--n",
        "3",
        "--m",
        "8",
        "--out",
        s(&base),
    ]);
    let (c, a) = (dir.path().join("c.json"), dir.path().join("a.json"));
    let out = pacing(&[
        "generate",
        "cluster",
        "--instance",
        s(&base),
        "--k",
        "3",
        "--calibrate",
        "0.5",
        "--time-limit",
        "30",
        "--out",
        s(&c),
        "--assignment",
        s(&a),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&c)["values"][0].as_array().unwrap().len(), 3);
    assert_eq!(json(&a).as_array().unwrap().len(), 8);
}

#[test]
fn warm_start_and_empirical_studies_run_from_generated_sets() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().join("ws.json");
    let out = pacing(&[
        "dynamics",
        "warm-start",
        "--gen-n",
        "2",
        "--gen-m",
        "3",
        "--gen-count",
        "2",
        "--factor",
        "10",
        "--time-limit",
        "30",
        "--out",
        s(&ws),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&ws);
    assert_eq!(
        rep["body"]["rows"].as_array().unwrap().len(),
        2 * 2 * 4 * 3 * 2
    );
    assert_eq!(rep["body"]["best"].as_array().unwrap().len(), 4);

    let em = dir.path().join("em.json");
    let out = pacing(&[
        "dynamics",
        "empirical",
        "--gen-n",
        "2",
        "--gen-m",
        "3",
        "--gen-count",
        "2",
        "--factor",
        "10",
        "--out",
        s(&em),
    ]);
    assert_eq!(code(&out), 0);
    let sum = &json(&em)["body"]["summary"];
    assert_eq!(sum["instances"], 2);
    assert!(sum["max_abs_diff"].as_f64().unwrap() <= 1.0);
}
