use std::path::Path;
use std::process::{Command, Output};

use flnnsc_cli::export::read_pgm;
use flnnsc_cli::report::{read_json, read_report, read_trace_csv};
use flnnsc_cli::sweep::{read_sweep_csv, AggregateReport};
use flnnsc_core::metrics::score_all;

const SMALL: &str = "k=2,ppc=10,ambient=4,sub=1,warp=0.5,noise=0.01,seed=1";

fn flnnsc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flnnsc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn run_files_reparse_and_metrics_recompute() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = flnnsc(&["run", "--synthetic", SMALL, "--max-iters", "5"], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_report(&out.join("report.json")).unwrap();
    let trace = read_trace_csv(&out.join("trace.csv")).unwrap();
    assert_eq!(Some(&trace), report.trace.as_ref());
    assert!(trace.len() <= 5);
    let m = report.metrics.unwrap();
    let again = score_all(report.truth.as_ref().unwrap(), &report.predicted).unwrap();
    assert_eq!(m.as_array(), [again.ca, again.nmi, again.ari, again.f1]);
}

#[test]
fn repeat_and_sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep");
    let o = flnnsc(&["repeat", "--method", "lsr", "--synthetic", SMALL, "--repeats", "3"], &out);
    assert_eq!(code(&o), 0);
    let agg: AggregateReport = read_json(&out.join("aggregate.json")).unwrap();
    assert_eq!(agg.runs.len(), 3);
    assert_eq!(agg.runs.iter().map(|r| r.seed).collect::<Vec<_>>(), [0, 1, 2]);

    let out = dir.path().join("sweep");
    let o = flnnsc(
        &[
            "sweep", "--method", "ccsc", "--synthetic", SMALL, "--alpha", "0.1,1", "--beta", "1",
            "--lambda", "0,1", "--repeats", "2", "--max-iters", "3", "--jobs", "2",
        ],
        &out,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = read_sweep_csv(&out.join("sweep.csv")).unwrap();
    assert_eq!(table.rows.len(), 4);
    assert!(table.best.is_some());
    assert_eq!(std::fs::read_dir(out.join("points")).unwrap().count(), 4);
}

#[test]
fn affinity_heatmap_matches_sample_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("aff");
    let o = flnnsc(&["affinity", "--method", "smr-linear", "--synthetic", SMALL], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (w, h, px) = read_pgm(&out.join("affinity.pgm")).unwrap();
    assert_eq!((w, h, px.len()), (20, 20, 400));
    let csv = flnnsc_cli::export::read_matrix_csv(&out.join("affinity.csv")).unwrap();
    assert_eq!(csv.shape(), (20, 20));
}

#[test]
fn bench_writes_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    let o = flnnsc(
        &["bench", "--method", "lsr,flnnsc", "--synthetic", SMALL, "--sizes", "10,20", "--max-iters", "2"],
        &out,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("bench.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    assert_eq!(code(&flnnsc(&["run", "--bogus"], &out)), 1);
    assert_eq!(code(&flnnsc(&["run", "--synthetic", SMALL, "--lambda", "0.5"], &out)), 1);
    assert_eq!(code(&flnnsc(&["run", "--method", "ccsc", "--synthetic", SMALL], &out)), 1);
    assert_eq!(code(&flnnsc(&["run", "--synthetic", "k=1"], &out)), 1);
    assert_eq!(code(&flnnsc(&["run", "--data", "/definitely/missing.csv"], &out)), 3);

    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "1,2,0\n3,x,1\n").unwrap();
    let o = flnnsc(&["run", "--data", csv.to_str().unwrap()], &out);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.csv:2:"));

    let unlabeled = dir.path().join("u.csv");
    std::fs::write(&unlabeled, "0.1,0.2\n0.3,0.1\n0.9,0.8\n0.7,0.9\n").unwrap();
    let args = ["run", "--method", "lsr", "--unlabeled", "--data", unlabeled.to_str().unwrap()];
    assert_eq!(code(&flnnsc(&args, &out)), 1);
    let mut with_k = args.to_vec();
    with_k.extend(["--clusters", "2", "--knn", "2"]);
    assert_eq!(code(&flnnsc(&with_k, &out)), 0);
    assert!(read_report(&out.join("report.json")).unwrap().metrics.is_none());

    let help = Command::new(env!("CARGO_BIN_EXE_flnnsc")).arg("--help").output().unwrap();
    assert_eq!(code(&help), 0);
}
