mod common;

use std::process::{Command, Output};

use common::data;

fn merr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_merr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn path(rel: &str) -> String {
    data(rel).to_string_lossy().into_owned()
}

#[test]
fn solve_crossing() {
    let crossing = path("instances/crossing.json");
    let v = stdout_json(&merr(&["solve", "--instance", &crossing, "--algo", "ilp"]));
    assert_eq!(v["met"], 2);
    assert_eq!(v["rate"], 1.0);
    assert_eq!(v["decisions"].as_array().unwrap().len(), 2);

    let v = stdout_json(&merr(&[
        "solve",
        "--instance",
        &crossing,
        "--algo",
        "ilp",
        "--pin",
        "0:s1,d2,u,d1",
    ]));
    assert_eq!(v["met"], 1);
    assert_eq!(v["rate"], 0.5);
    assert_eq!(v["decisions"][0]["path"], serde_json::json!(["s1", "d2", "u", "d1"]));

    for algo in ["hbra", "rra", "plba", "oracle"] {
        let v = stdout_json(&merr(&[
            "solve",
            "--instance",
            &crossing,
            "--algo",
            algo,
            "--seed",
            "3",
        ]));
        assert!(v["met"].as_u64().unwrap() <= 2, "{algo}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(merr(&[]).status.code(), Some(1));
    assert_eq!(
        merr(&["solve", "--algo", "nope", "--instance", "x.json"]).status.code(),
        Some(1)
    );
    assert_eq!(merr(&["--help"]).status.code(), Some(0));
    let missing = merr(&["solve", "--instance", "/nonexistent/instance.json", "--algo", "ilp"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/instance.json"));
    let crossing = path("instances/crossing.json");
    let pin_heuristic = merr(&["solve", "--instance", &crossing, "--algo", "plba", "--pin", "0:s1,d1"]);
    assert_eq!(pin_heuristic.status.code(), Some(1));
}

#[test]
fn oracle_matches_solve() {
    let v = stdout_json(&merr(&["oracle", "--instance", &path("instances/crossing.json")]));
    assert_eq!(v["met"], 2);
}

#[test]
fn gen_demands_round_trips_through_solve() {
    let out = merr(&[
        "gen-demands",
        "--topology",
        &path("topologies/Surfnet.graphml"),
        "--n",
        "4",
        "--seed",
        "11",
    ]);
    assert!(out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    std::fs::write(&inst, &out.stdout).unwrap();
    let again = merr(&[
        "gen-demands",
        "--topology",
        &path("topologies/Surfnet.graphml"),
        "--n",
        "4",
        "--seed",
        "11",
    ]);
    assert_eq!(out.stdout, again.stdout);
    let v = stdout_json(&merr(&["solve", "--instance", inst.to_str().unwrap(), "--algo", "ilp"]));
    assert_eq!(v["total"], 4);
}

#[test]
fn fidelity_subcommand() {
    let params = path("configs/channel.json");
    let v = stdout_json(&merr(&["fidelity", "--params", &params, "--distances", "20,20,20"]));
    assert_eq!(v["links"].as_array().unwrap().len(), 3);
    let loss = v["links"][0]["loss_probability"].as_f64().unwrap();
    assert!((loss - 0.153312).abs() < 1e-6);
    let f3 = v["fidelity"].as_f64().unwrap();
    let v = stdout_json(&merr(&[
        "fidelity",
        "--params",
        &params,
        "--hops",
        "5",
        "--distance-km",
        "20",
    ]));
    assert!(v["fidelity"].as_f64().unwrap() < f3);
    let v = stdout_json(&merr(&[
        "fidelity",
        "--hops",
        "1",
        "--t-entangle",
        "0.77",
        "--t-route",
        "0.717",
    ]));
    assert_eq!(v["timing"]["within_deadline"], false);
}

fn sweep_config(dir: &std::path::Path) -> std::path::PathBuf {
    let cfg = dir.join("sweep.json");
    let body = serde_json::json!({
        "topology_path": data("topologies/Surfnet.graphml"),
        "algorithms": ["ilp", "hbra", "rra", "plba"],
        "n_demands": [2, 6],
        "l_max": [4, 8],
        "trials_per_cell": 2,
        "base_seed": 5,
    });
    std::fs::write(&cfg, body.to_string()).unwrap();
    cfg
}

#[test]
fn experiment_csv_is_golden_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sweep_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let run = |out: &std::path::Path, extra: &[&str]| {
        let mut args = vec![
            "experiment",
            "--config",
            cfg,
            "--output",
            out.to_str().unwrap(),
            "--no-runtime",
        ];
        args.extend_from_slice(extra);
        let o = merr(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    let par = run(&a, &[]);
    let seq = run(&b, &["--sequential"]);
    assert_eq!(par, seq);

    let text = String::from_utf8(par).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("topology,algorithm,n_demands,l_max,seed,met,rate,runtime_ms,lp_objective")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // 2 demand counts x 2 bounds x 2 trials x 4 algorithms.
    assert_eq!(rows.len(), 32);
    for r in &rows {
        assert_eq!(r.len(), 9);
        assert_eq!(r[0], "Surfnet");
        let rate = r[6];
        assert_eq!(rate.split('.').nth(1).map(str::len), Some(6), "{rate}");
        assert_eq!(r[7], "");
        let met: usize = r[5].parse().unwrap();
        let n: usize = r[2].parse().unwrap();
        assert_eq!(format!("{:.6}", met as f64 / n as f64), rate);
    }
    // Paired seeds: every algorithm of a cell sees the same seed.
    for cell in rows.chunks(4) {
        assert!(cell
            .iter()
            .all(|r| r[4] == cell[0][4] && r[2] == cell[0][2] && r[3] == cell[0][3]));
        assert_eq!(
            cell.iter().map(|r| r[1]).collect::<Vec<_>>(),
            ["ilp", "hbra", "rra", "plba"]
        );
    }
}

#[test]
fn experiment_to_stdout_with_runtime() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sweep_config(dir.path());
    let out = merr(&["experiment", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!(row[7].parse::<f64>().unwrap() >= 0.0);
}
