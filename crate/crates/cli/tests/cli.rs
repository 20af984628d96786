use std::process::{Command, Output};

use serde_json::Value;

fn aztec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aztec")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn count_examples() {
    let out = aztec(&["count", "--n", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["count"], "8");

    let out = aztec(&["count", "--n", "2", "--holes", "1", "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["count"], "1024");
    assert_eq!(r["checks"][0]["pass"], true);
    assert_eq!(r["checks"][0]["detail"], "1024");
}

#[test]
fn disjointness_is_a_usage_error() {
    let out = aztec(&["count", "--n", "2", "--holes", "1", "--seps", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("H and S must be disjoint"));
}

#[test]
fn log_mode() {
    let out = aztec(&["count", "--n", "40", "--holes", "3,7", "--seps", "5", "--mode", "log", "--digits", "20"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out)["results"]["ln_count"].as_str().unwrap().parse::<f64>().unwrap() > 1000.0);
}

#[test]
fn correlate_exact_json() {
    let out = aztec(&["correlate", "h@0 h@1 | s@5 s@6", "--method", "exact"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let exact = &r["results"]["exact"];
    assert_eq!(exact["rational"], "1/25");
    assert_eq!(exact["pi_pow"], -2.0);
    assert!(r["results"]["residual"].is_null());
}

#[test]
fn correlate_limit_and_predict() {
    let out = aztec(&["correlate", "h@1 s@2", "--method", "limit", "--n-schedule", "16:512:geometric"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let v: f64 = r["results"]["numeric"].as_str().unwrap().parse().unwrap();
    assert!((v * std::f64::consts::PI - 1.0).abs() < 1e-4, "{v}");
    assert_eq!(r["results"]["samples"].as_array().unwrap().len(), 6);
    assert!(r["results"]["residual"].is_string());

    let out = aztec(&["correlate", "h@0 | h@100", "--method", "predict"]);
    assert_eq!(out.status.code(), Some(0));
    let exact = &report(&out)["results"]["exact"];
    assert_eq!(exact["w_pow"], 2);
    assert_eq!(exact["rational"], "10");
}

#[test]
fn malformed_config() {
    let out = aztec(&["correlate", "h@0 x@1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = aztec(&["correlate", "h@0 h@0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_suites() {
    let out = aztec(&["verify", "formula-vs-oracle", "--sizes", "4", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["pass"], true);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["anchor"].as_str().is_some_and(|a| !a.is_empty())));

    for suite in ["telescoping", "constants"] {
        assert_eq!(aztec(&["verify", suite]).status.code(), Some(0), "{suite}");
    }
    assert_eq!(aztec(&["verify", "no-such-suite"]).status.code(), Some(2));
}

#[test]
fn failing_checks_exit_one() {
    // the raw n = 256 move bound is not met by every case
    let out = aztec(&["verify", "moves"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let failed: Vec<&Value> = r["checks"].as_array().unwrap().iter().filter(|c| c["pass"] == false).collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|c| c["name"].as_str().unwrap().ends_with("n=256 within 1e-2")));
}

#[test]
fn deterministic_reports() {
    let args = ["verify", "exactness", "--seed", "11"];
    let a = aztec(&args);
    let b = aztec(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(!String::from_utf8_lossy(&a.stdout).contains("wall_ms"));
    let t = aztec(&["count", "--n", "1", "--timing"]);
    assert!(report(&t)["wall_ms"].is_u64());
}

#[test]
fn files_are_written() {
    let dir = std::env::temp_dir().join(format!("aztec-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let json = dir.join("r.json");
    let csv = dir.join("p.csv");
    let out = aztec(&[
        "asymptotics",
        "products",
        "--selector",
        "U_even",
        "--d-schedule",
        "64,128,256",
        "--csv-out",
        csv.to_str().unwrap(),
        "--json-out",
        json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 4);
    assert!(rows.starts_with("selector,d,product,predicted,ratio"));
    assert_eq!(std::fs::read(&json).unwrap(), out.stdout.strip_suffix(b"\n").unwrap());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn asymptotics_topics() {
    let out = aztec(&["asymptotics", "constants"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out)["results"]["A"]["value"].as_str().unwrap().starts_with("1.28242712"));

    let out = aztec(&["asymptotics", "decay", "--pair", "h@0", "s@0"]);
    assert_eq!(out.status.code(), Some(0));
    let e = report(&out)["results"]["exponent"].as_f64().unwrap();
    assert!((e + 0.5).abs() < 1e-2, "{e}");

    assert_eq!(aztec(&["asymptotics", "decay"]).status.code(), Some(2));
}

#[test]
fn transform_command() {
    let out = aztec(&["transform", "h@0 s@4 | h@9 s@12", "--kind", "compress"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["config"], "h@0 s@1 | h@9 s@10");
}
