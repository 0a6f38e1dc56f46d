mod common;

use std::path::Path;
use std::process::{Command, Output};

fn rangeshape(args: &[&str], workers: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rangeshape"));
    c.args(args).env_remove("RANGESHAPE_WORKERS");
    if let Some(w) = workers {
        c.env("RANGESHAPE_WORKERS", w);
    }
    c.output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_analyze_estimate_matches_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sc = common::scenario_path("right_triangle_noisy");
    let (whole, sim, ana, est) = (d.join("whole"), d.join("sim"), d.join("ana"), d.join("est"));
    let o = rangeshape(
        &["pipeline", "--scenario", p(&sc), "--out", p(&whole), "--seed", "3"],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = rangeshape(
        &["simulate", "--scenario", p(&sc), "--out", p(&sim), "--seed", "3"],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = rangeshape(
        &[
            "analyze",
            "--traces",
            p(&sim.join("traces.jsonl")),
            "--known",
            p(&sim.join("known.json")),
            "--out",
            p(&ana),
            "--seed",
            "3",
            "--noise-eps-s",
            "0.03",
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = rangeshape(
        &[
            "estimate",
            "--observations",
            p(&ana.join("observations.jsonl")),
            "--known",
            p(&sim.join("known.json")),
            "--scenario",
            p(&sc),
            "--out",
            p(&est),
            "--noise-eps-s",
            "0.03",
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for (a, b) in [
        (whole.join("traces.jsonl"), sim.join("traces.jsonl")),
        (whole.join("observations.jsonl"), ana.join("observations.jsonl")),
        (whole.join("report.json"), est.join("report.json")),
    ] {
        assert!(
            std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap(),
            "{} differs",
            b.display()
        );
    }
}

#[test]
fn worker_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let sc = common::scenario_path("square");
    let mut bytes = Vec::new();
    for w in ["1", "4"] {
        let out = dir.path().join(w);
        let o = rangeshape(&["pipeline", "--scenario", p(&sc), "--out", p(&out)], Some(w));
        assert!(o.status.success(), "{}", stderr(&o));
        bytes.push(["traces.jsonl", "observations.jsonl", "report.json"].map(|f| std::fs::read(out.join(f)).unwrap()));
    }
    assert!(bytes[0] == bytes[1]);
}

#[test]
fn bad_worker_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let sc = common::scenario_path("square");
    for w in ["0", "many"] {
        let o = rangeshape(&["simulate", "--scenario", p(&sc), "--out", p(dir.path())], Some(w));
        assert_eq!(o.status.code(), Some(1));
        assert!(stderr(&o).contains("RANGESHAPE_WORKERS"));
    }
}

#[test]
fn malformed_inputs_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sc = d.join("bad.toml");
    std::fs::write(&sc, "n_s = 10\nr_maxx = 3\npolygon = [[0,0],[1,0],[0,1]]\n").unwrap();
    let o = rangeshape(&["simulate", "--scenario", p(&sc), "--out", p(&d.join("x"))], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.toml:2"), "{}", stderr(&o));

    let traces = d.join("t.jsonl");
    std::fs::write(
        &traces,
        "{\"sensor\":0,\"t\":0.0,\"r\":null}\n{\"sensor\":0,\"t\":1.0,\"r\":\n",
    )
    .unwrap();
    let known = d.join("k.json");
    std::fs::write(&known, "{}").unwrap();
    let o = rangeshape(
        &[
            "analyze",
            "--traces",
            p(&traces),
            "--known",
            p(&known),
            "--out",
            p(&d.join("y")),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("t.jsonl:2"), "{}", stderr(&o));
}

#[test]
fn no_sensors_gives_an_empty_report_and_a_distinct_status() {
    let dir = tempfile::tempdir().unwrap();
    let sc = common::scenario_path("square");
    let out = dir.path().join("o");
    let sc0 = dir.path().join("empty.toml");
    let text = std::fs::read_to_string(&sc).unwrap().replace("n_s = 2000", "n_s = 0");
    std::fs::write(&sc0, text).unwrap();
    let o = rangeshape(&["pipeline", "--scenario", p(&sc0), "--out", p(&out)], None);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(out.join("traces.jsonl")).unwrap(), "");
    assert!(std::fs::read_to_string(out.join("shape.svg"))
        .unwrap()
        .contains("<text"));
}

#[test]
fn validate_prob_rejects_zero_samples() {
    let dir = tempfile::tempdir().unwrap();
    let o = rangeshape(&["validate-prob", "--out", p(dir.path()), "--samples", "0"], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_prob_writes_its_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = rangeshape(&["validate-prob", "--out", p(dir.path()), "--samples", "4000"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("prob_table.csv")).unwrap();
    assert!(csv.lines().count() > 10);
    let qd = std::fs::read_to_string(dir.path().join("qd_theta.csv")).unwrap();
    assert_eq!(qd.lines().count(), 65);
    assert!(dir.path().join("qd_theta.svg").exists());
}

#[test]
fn plot_draws_a_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.svg");
    let o = rangeshape(
        &["plot", p(&common::scenario_path("building_a")), "--out", p(&out)],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(out).unwrap().starts_with("<svg"));
}
