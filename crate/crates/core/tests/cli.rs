use std::path::Path;

use sparse_telescope::cli::dispatch;
use sparse_telescope::io::{self, IngestOptions};

fn run(args: &[&str]) -> i32 {
    dispatch(std::iter::once("sparse-telescope").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn rows(p: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(p).unwrap();
    rdr.records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn header(p: &Path) -> Vec<String> {
    let mut rdr = csv::Reader::from_path(p).unwrap();
    rdr.headers().unwrap().iter().map(str::to_string).collect()
}

#[test]
fn generate_detect_evaluate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = d.join("data.csv");
    let mask = d.join("mask.csv");
    let alerts = d.join("alerts.csv");
    let report = d.join("report.csv");
    let roc = d.join("roc.csv");
    let ck = d.join("state.json");

    assert_eq!(
        run(&[
            "generate", "--streams", "30", "--ticks", "11000", "--warmup", "10080", "--start", "10500",
            "--duration", "180", "--seed", "4", "-o", s(&data), "--mask-out", s(&mask),
        ]),
        0
    );
    let series = io::load_timeseries_csv(&data, &IngestOptions::default()).unwrap();
    assert_eq!((series.streams(), series.ticks()), (30, 11000));
    assert!(d.join("manifest.json").exists());

    let cfg = d.join("detector.cfg");
    std::fs::write(&cfg, "# tuned\ncontrol_limit = 7\nlambda_mu = 0.01\n").unwrap();
    assert_eq!(
        run(&[
            "detect", "-i", s(&data), "-c", s(&cfg), "--alerts-out", s(&alerts), "--checkpoint", s(&ck),
        ]),
        0
    );
    assert_eq!(header(&alerts), ["tick", "stream", "residual", "centered_abs", "threshold"]);
    let found = rows(&alerts);
    assert!(!found.is_empty());
    assert!(found.iter().all(|r| r[0].parse::<usize>().unwrap() >= 10080));

    assert_eq!(
        run(&[
            "evaluate", "--alerts", s(&alerts), "--mask", s(&mask), "--control-limit", "7", "--report-out",
            s(&report), "--roc-out", s(&roc),
        ]),
        0
    );
    let rep = rows(&report);
    let h = header(&report);
    let tpr_rows: f64 = rep[0][h.iter().position(|c| c == "tpr_rows").unwrap()].parse().unwrap();
    assert!(tpr_rows > 0.5, "{tpr_rows}");
    let pts = rows(&roc);
    assert!(pts.len() >= 3);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "evaluate");
}

#[test]
fn resumed_run_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = d.join("data.csv");
    assert_eq!(
        run(&[
            "generate", "--streams", "12", "--ticks", "10800", "--start", "10200", "--duration", "60", "-o",
            s(&data),
        ]),
        0
    );
    let lines: Vec<String> = std::fs::read_to_string(&data).unwrap().lines().map(String::from).collect();
    let cut = 10400;
    let head = d.join("head.csv");
    let tail = d.join("tail.csv");
    std::fs::write(&head, lines[..=cut].join("\n") + "\n").unwrap();
    std::fs::write(&tail, format!("{}\n{}\n", lines[0], lines[cut + 1..].join("\n"))).unwrap();

    let (full_a, full_ck) = (d.join("full.csv"), d.join("full.json"));
    let (a1, ck1) = (d.join("a1.csv"), d.join("ck1.json"));
    let (a2, ck2) = (d.join("a2.csv"), d.join("ck2.json"));
    assert_eq!(run(&["detect", "-i", s(&data), "--alerts-out", s(&full_a), "--checkpoint", s(&full_ck)]), 0);
    assert_eq!(run(&["detect", "-i", s(&head), "--alerts-out", s(&a1), "--checkpoint", s(&ck1)]), 0);
    assert_eq!(
        run(&["detect", "-i", s(&tail), "--resume", s(&ck1), "--alerts-out", s(&a2), "--checkpoint", s(&ck2)]),
        0
    );
    let mut joined = rows(&a1);
    joined.extend(rows(&a2));
    assert_eq!(joined, rows(&full_a));
    assert_eq!(std::fs::read(&ck2).unwrap(), std::fs::read(&full_ck).unwrap());
}

#[test]
fn usage_and_data_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&[]), 1);
    assert_eq!(run(&["--help"]), 0);
    assert_eq!(run(&["detect"]), 1);
    assert_eq!(run(&["frobnicate"]), 1);
    let missing = dir.path().join("missing.csv");
    assert_eq!(run(&["detect", "-i", s(&missing)]), 2);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t,a,b\n0,1,2\n1,x,3\n").unwrap();
    assert_eq!(run(&["baseline-q", "-i", s(&bad)]), 2);

    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "lambda = 0.1\nbogus = 3\n").unwrap();
    let data = dir.path().join("ok.csv");
    std::fs::write(&data, "t,a,b\n0,1,2\n1,2,3\n").unwrap();
    assert_eq!(run(&["detect", "-i", s(&data), "-c", s(&cfg)]), 2);
    assert_eq!(run(&["consistency", "--correlation", "ar1:x"]), 1);
}

#[test]
fn tune_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    assert_eq!(
        run(&[
            "tune", "--replications", "1", "--ticks", "11000", "--lambda", "1e-4", "--lambda-mu", "1e-2",
            "--lambda-sigma", "1e-4", "--reg-guard", "3", "--limits", "5,7,20", "-o", s(&out),
        ]),
        0
    );
    assert_eq!(header(&out), ["snr", "duration", "L", "REG", "ewma_data", "ewma_mean", "ewma_var"]);
    let table = rows(&out);
    assert_eq!(table.len(), 6);
    let cells: Vec<(String, String)> = table.iter().map(|r| (r[0].clone(), r[1].clone())).collect();
    assert_eq!(cells[0], ("2".to_string(), "1".to_string()));
    assert_eq!(cells[5], ("7".to_string(), "6".to_string()));
}

#[test]
fn theory_subcommands_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let phase = d.join("phase.csv");
    assert_eq!(run(&["phase", "--p", "500", "--trials", "10", "--r", "0.5,9", "-o", s(&phase)]), 0);
    assert_eq!(header(&phase), ["p", "beta", "r", "rate"]);
    assert_eq!(rows(&phase).len(), 2);

    let cons = d.join("cons.csv");
    assert_eq!(
        run(&["consistency", "--n", "2000", "--replications", "3", "--lambdas", "0.01,0.001", "-o", s(&cons)]),
        0
    );
    assert_eq!(header(&cons), ["lambda", "bias", "variance"]);
    assert_eq!(rows(&cons).len(), 2);
    assert_eq!(run(&["consistency", "--correlation", "fgn:0.8", "-o", s(&cons)]), 2);

    let fid = d.join("fid.csv");
    assert_eq!(run(&["fidelity", "--p", "50", "--n", "2000", "-o", s(&fid)]), 0);
    assert_eq!(header(&fid), ["p", "gap", "bound"]);
    let r = &rows(&fid)[0];
    assert!(r[1].parse::<f64>().unwrap() <= r[2].parse::<f64>().unwrap());

    let ang = d.join("ang.csv");
    assert_eq!(
        run(&["angle-sweep", "--etas", "1e-5,1e-3", "--replications", "1", "--weeks", "3", "-o", s(&ang)]),
        0
    );
    assert_eq!(header(&ang), ["eta", "mean_angle_rad", "batch_angle_rad"]);
}

#[test]
fn baseline_q_flags_ticks_after_warmup() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = d.join("data.csv");
    assert_eq!(
        run(&["generate", "--streams", "10", "--ticks", "10500", "--start", "10200", "--duration", "30", "-o", s(&data)]),
        0
    );
    let out = d.join("q.csv");
    assert_eq!(run(&["baseline-q", "-i", s(&data), "--alpha", "0.01", "-o", s(&out)]), 0);
    assert_eq!(header(&out), ["tick", "q_value", "reject"]);
    let r = rows(&out);
    assert_eq!(r.len(), 10500 - 10080);
    assert_eq!(r[0][0], "10080");
    assert!(r.iter().all(|row| row[2] == "0" || row[2] == "1"));
}
