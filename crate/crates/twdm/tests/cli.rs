use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn twdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twdm")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn sim_args<'a>(out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![
        "simulate",
        "--out",
        out,
        "--onus",
        "8",
        "--group-size",
        "4",
        "--receivers",
        "2",
        "--duration",
        "0.05",
        "--load",
        "0.3,1.0",
        "--scheduler",
        "cevf,eftvf",
        "--arch",
        "flexible,splitter",
        "--replicas",
        "2",
    ];
    v.extend_from_slice(extra);
    v
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&twdm(&["--help"])), 0);
    assert_eq!(code(&twdm(&["--version"])), 0);
    assert_eq!(code(&twdm(&["simulate", "--help"])), 0);
}

#[test]
fn invalid_configs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out = out.to_str().unwrap();
    for bad in [
        vec!["simulate", "--frobnicate"],
        vec!["simulate", "--out", out, "--scheduler", "edf"],
        vec!["simulate", "--out", out, "--arch", "ring"],
        vec!["simulate", "--out", out, "--load", "1.5", "--duration", "0.01"],
        vec!["simulate", "--out", out, "--onus", "10", "--group-size", "4"],
        vec!["simulate", "--out", out, "--receivers", "0"],
        vec!["simulate", "--out", out, "--onu-rate", "-3"],
        vec!["simulate", "--out", out, "--duration", "0.01", "--warmup", "0.02"],
        vec!["simulate", "--out", out, "--load", "0.5,0.6", "--trace-events", out],
        vec!["bound", "--out", out, "--mode", "cubic"],
        vec!["bound", "--out", out, "--onu-rate", "31.25e6"],
        vec!["frobnicate"],
    ] {
        assert_eq!(code(&twdm(&bad)), 1, "{bad:?}");
    }
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&twdm(&["simulate", "--config", missing.to_str().unwrap()])), 1);
}

#[test]
fn simulate_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    assert_eq!(code(&twdm(&sim_args(a.to_str().unwrap(), &[]))), 0);
    assert_eq!(code(&twdm(&sim_args(b.to_str().unwrap(), &[]))), 0);
    assert_eq!(code(&twdm(&sim_args(c.to_str().unwrap(), &["--jobs", "3", "--audit"]))), 0);
    let text = read(&a);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(text, read(&c));
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scheduler,arch,rho,N,R,onu_rate,seed,throughput_pct,collision_loss_pct,buffer_drop_pct,mean_hops"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 2 * 2 * 2);
    assert_eq!(&rows[0][..7], ["cevf", "flexible", "0.3000", "4", "2", "31250000", "1"]);
    assert_eq!(&rows[1][..7], ["cevf", "flexible", "0.3000", "4", "2", "31250000", "2"]);
    assert_eq!(rows[15][0], "eftvf");
}

#[test]
fn stdout_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let args = ["simulate", "--onus", "4", "--group-size", "2", "--duration", "0.02", "--load", "0.5"];
    let stdout = twdm(&args).stdout;
    let mut with_out = args.to_vec();
    with_out.extend(["--out", a.to_str().unwrap()]);
    assert_eq!(code(&twdm(&with_out)), 0);
    assert_eq!(stdout, fs::read(&a).unwrap());
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("out.csv");
    fs::write(
        &cfg,
        r#"{"onus": 8, "group_size": 4, "receivers": 3, "load": [0.2, 0.4], "scheduler": ["eftvf"],
            "arch": ["splitter"], "duration_s": 0.02, "seed": 9, "onu_rate": 62.5e6}"#,
    )
    .unwrap();
    let o = twdm(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--load", "0.7"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("eftvf,splitter,0.7000,4,3,62500000,9,"), "{}", rows[0]);

    fs::write(&cfg, r#"{"onus": 8, "typo": 1}"#).unwrap();
    assert_eq!(code(&twdm(&["simulate", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn traces_for_a_single_run() {
    let dir = tempfile::tempdir().unwrap();
    let (ev, tr, out) = (dir.path().join("ev.csv"), dir.path().join("tr.csv"), dir.path().join("o.csv"));
    let o = twdm(&[
        "simulate",
        "--onus",
        "4",
        "--group-size",
        "2",
        "--duration",
        "0.01",
        "--load",
        "0.8",
        "--out",
        out.to_str().unwrap(),
        "--trace-events",
        ev.to_str().unwrap(),
        "--trace-traffic",
        tr.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let ev = read(&ev);
    let tr = read(&tr);
    assert!(ev.starts_with("timestamp,event,onu,receiver,bytes\n"));
    assert!(tr.starts_with("arrival_ns,onu_id,bytes\n"));
    assert!(ev.lines().skip(1).any(|l| l.split(',').nth(1) == Some("delivered")));
    let arrivals: Vec<i64> = tr.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(!arrivals.is_empty());
    assert!(arrivals.iter().all(|&t| t <= 10_000_000));
}

#[test]
fn bound_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let o = twdm(&[
        "bound",
        "--out",
        out.to_str().unwrap(),
        "--load",
        "0.1,0.5,1.0",
        "--group-size",
        "4",
        "--capacity",
        "300",
        "--solver",
        "direct",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "rho,K,lim_q,A,pi_full,throughput_percent");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!((r[1], r[2]), (300.0, 5.0));
        assert!(r[5] <= 100.0 * r[0] + 1e-9);
    }
    // Literal arrivals: A = rho^2 * lim_q.
    assert!((rows[1][3] - 1.25).abs() < 1e-9);
}

#[test]
fn verify_suite_passes() {
    let o = twdm(&["verify", "--instances", "2000", "--seed", "4"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("instances checked:            2000"));
    assert!(text.contains("fast != naive:                0"));
}
