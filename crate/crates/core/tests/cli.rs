mod common;

use std::path::Path;
use std::process::{Command, Output};

use moodnet::community::Community;
use moodnet::pipeline::{Manifest, StageStatus};
use sha2::{Digest, Sha256};

const WINDOW: &str = "2014-10-01..2014-10-30";
const LATER: &str = "2014-10-31..2014-11-29";
const BOTH: &str = "2014-10-01..2014-11-29";

fn moodnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moodnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = moodnet(args);
    assert!(
        out.status.success(),
        "moodnet {} failed:\n{}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn every_subcommand_runs_on_the_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path();
    let tweets = w.join("tweets.jsonl");
    moodnet::io::write_tweets(&tweets, &common::fixture_tweets(5)).unwrap();

    ok(&[
        "ingest",
        "--input",
        s(&tweets),
        "--window",
        WINDOW,
        "--graph-window",
        BOTH,
        "--out",
        s(w),
    ]);
    for f in [
        "filter_report.json",
        "core_users.txt",
        "edges.csv",
        "interaction_graph.csv",
        "network/network.csv",
    ] {
        assert!(w.join(f).exists(), "{f}");
    }

    let scores = w.join("scores.csv");
    ok(&[
        "communicability",
        "--network",
        s(&w.join("network")),
        "--alpha",
        "0.15",
        "--truncation",
        "6",
        "--out",
        s(&scores),
    ]);
    ok(&[
        "sent-metrics",
        "--scores",
        s(&scores),
        "--edges",
        s(w),
        "--top",
        "5,10",
        "--nsamples",
        "200",
        "--ma-window",
        "4",
        "--seed",
        "1",
        "--out",
        s(&w.join("sent.json")),
    ]);
    assert!(w.join("sent_moving_average.csv").exists());

    let graph = w.join("interaction_graph.csv");
    ok(&[
        "communities",
        "--graph",
        s(&graph),
        "--min-size",
        "4",
        "--seed",
        "2",
        "--stats",
        "--tweets",
        s(&tweets),
        "--window",
        WINDOW,
        "--out",
        s(w),
    ]);
    let found: Vec<Community> = moodnet::io::read_json(&w.join("communities.json")).unwrap();
    assert!(!found.is_empty());
    assert!(w.join("community_stats.json").exists());

    ok(&[
        "endure",
        "--tweets",
        s(&tweets),
        "--communities",
        s(&w.join("communities.json")),
        "--graph",
        s(&graph),
        "--period-a",
        WINDOW,
        "--period-b",
        LATER,
        "--series-window",
        BOTH,
        "--out",
        s(w),
    ]);
    assert!(w.join("endurance.json").exists());

    let members = moodnet::pipeline::stages::pick_community(&found, None).unwrap();
    let community = w.join("community.txt");
    moodnet::io::write_user_list(&community, &members).unwrap();
    let globals = w.join("globals.toml");
    std::fs::write(
        &globals,
        "iterations_per_day = 24\nmean_burst_size = 1.5\ncontagion_factor = 0.05\nreset_probability = 0.1\n\
         sentiment_noise = 1.0\nneighbour_threshold = 1\n",
    )
    .unwrap();
    let model = w.join("model.json");
    ok(&[
        "abm",
        "build",
        "--history",
        s(&tweets),
        "--community",
        s(&community),
        "--window",
        WINDOW,
        "--globals",
        s(&globals),
        "--out",
        s(&model),
    ]);
    ok(&[
        "abm",
        "run",
        "--model",
        s(&model),
        "--days",
        "5",
        "--seed",
        "3",
        "--out",
        s(&w.join("log.csv")),
        "--moments",
        s(&w.join("m.json")),
    ]);
    let log = std::fs::read_to_string(w.join("log.csv")).unwrap();
    assert!(log.starts_with("step,sender,recipient,burst,sentiment"));

    let ranges = w.join("ranges.toml");
    std::fs::write(
        &ranges,
        "iterations_per_day = { values = [24] }\nmean_burst_size = { lo = 1.5, hi = 1.5, points = 1 }\n\
         contagion_factor = { lo = 0.0, hi = 0.2, points = 3 }\nreset_probability = { lo = 0.1, hi = 0.1, points = 1 }\n\
         sentiment_noise = { lo = 1.0, hi = 1.0, points = 1 }\nneighbour_threshold = { values = [1] }\n",
    )
    .unwrap();
    ok(&[
        "calibrate",
        "--history",
        s(&tweets),
        "--community",
        s(&community),
        "--window",
        WINDOW,
        "--ranges",
        s(&ranges),
        "--stages",
        "2",
        "--runs",
        "2",
        "--seed",
        "4",
        "--model-out",
        s(&w.join("calibrated.json")),
        "--out",
        s(&w.join("calibration.json")),
    ]);
    assert!(w.join("calibrated.json").exists());

    ok(&[
        "scenario",
        "--model",
        s(&model),
        "--strategy",
        "most_positive_3,lowest_reply_3",
        "--days",
        "5",
        "--runs",
        "4",
        "--seed",
        "5",
        "--out",
        s(&w.join("scenario.json")),
    ]);
    let rep: moodnet::calibrate::ScenarioReport =
        moodnet::io::read_json(&w.join("scenario.json")).unwrap();
    assert_eq!(rep.arms.len(), 3);

    let reports = w.join("reports");
    std::fs::create_dir_all(&reports).unwrap();
    for kind in [
        "broadcast-vs-sentiment",
        "endurance",
        "daily-series",
        "calibration",
        "scenario",
    ] {
        ok(&[
            "report",
            "--artifacts",
            s(w),
            "--kind",
            kind,
            "--ma-window",
            "4",
            "--out",
            s(&reports),
        ]);
    }
    for f in [
        "broadcast_vs_sentiment.csv",
        "endurance.csv",
        "calibration_cells.csv",
        "scenario.csv",
    ] {
        assert!(reports.join(f).exists(), "{f}");
    }
    assert!(reports
        .join(format!("daily_series_{}.csv", found[0].id))
        .exists());
}

#[test]
fn bad_arguments_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = moodnet(&[
        "abm",
        "run",
        "--model",
        s(&dir.path().join("nope.json")),
        "--seed",
        "1",
        "--out",
        "x.csv",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = moodnet(&[
        "report",
        "--artifacts",
        ".",
        "--kind",
        "histogram",
        "--out",
        ".",
    ]);
    assert!(!out.status.success());

    let out = Command::new(env!("CARGO_BIN_EXE_moodnet"))
        .env("MOODNET_THREADS", "zero")
        .args(["pipeline", "--config", s(&dir.path().join("p.toml"))])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

fn pipeline(config: &Path) -> (Output, Option<Manifest>) {
    let out = moodnet(&["pipeline", "--config", s(config)]);
    let manifest = config.parent().unwrap().join("out").join("manifest.json");
    let m = manifest
        .exists()
        .then(|| moodnet::io::read_json(&manifest).unwrap());
    (out, m)
}

#[test]
fn empty_stage_list_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::write_fixture(dir.path(), common::FULL_CONFIG, Some("[]"));
    let (out, m) = pipeline(&cfg);
    assert!(out.status.success());
    assert!(m.is_none());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn ingest_only_leaves_later_artifacts_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::write_fixture(dir.path(), common::FULL_CONFIG, Some(r#"["ingest"]"#));
    let (out, m) = pipeline(&cfg);
    assert!(out.status.success());
    let m = m.unwrap();
    assert_eq!(m.stages.len(), 1);
    assert_eq!(m.stages[0].status, StageStatus::Ok);
    let o = dir.path().join("out");
    assert!(o.join("filter_report.json").exists());
    assert!(!o.join("network").exists());
    assert!(!o.join("scores.csv").exists());
}

#[test]
fn full_pipeline_records_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::write_fixture(dir.path(), common::FULL_CONFIG, None);
    let (out, m) = pipeline(&cfg);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m = m.unwrap();
    assert_eq!(m.seed, 99);
    assert_eq!(m.stages.len(), 11);
    let o = dir.path().join("out");
    for st in &m.stages {
        assert_eq!(st.status, StageStatus::Ok, "{}", st.stage);
        assert!(!st.artifacts.is_empty(), "{}", st.stage);
        for a in &st.artifacts {
            let bytes = std::fs::read(o.join(&a.path)).unwrap();
            assert_eq!(
                a.sha256,
                Sha256::digest(&bytes)
                    .iter()
                    .map(|b| format!("{b:02x}"))
                    .collect::<String>(),
                "{}",
                a.path
            );
        }
    }
    for f in [
        "scores.csv",
        "communities.json",
        "endurance.json",
        "model.json",
        "calibration.json",
        "scenario.json",
    ] {
        assert!(o.join(f).exists(), "{f}");
    }
}

#[test]
fn failing_stage_is_recorded_and_the_rest_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        common::FULL_CONFIG.replace("tweets = \"tweets.jsonl\"", "tweets = \"missing.jsonl\"");
    let cfg = common::write_fixture(
        dir.path(),
        &text,
        Some(r#"["ingest", "networks", "communicability"]"#),
    );
    let (out, m) = pipeline(&cfg);
    assert!(!out.status.success());
    let m = m.unwrap();
    assert_eq!(m.stages[0].status, StageStatus::Failed);
    let err = m.stages[0].error.as_ref().unwrap();
    assert!(!err.kind.is_empty() && err.message.contains("missing.jsonl"));
    assert!(m.stages[1..]
        .iter()
        .all(|s| s.status == StageStatus::Skipped && s.artifacts.is_empty()));
}
