use std::process::{Command, Output};

use lbverify::cli::{run, EXIT_OK, EXIT_USAGE};
use proptest::prelude::*;

fn lbverify(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lbverify"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("LBVERIFY_THREADS", t),
        None => cmd.env_remove("LBVERIFY_THREADS"),
    };
    cmd.output().unwrap()
}

#[test]
fn csv_schema() {
    let out = lbverify(&["energy", "--samples", "64"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("check,location,value,tolerance,verdict\n"));
    assert!(!text.contains('\r'));
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    for rec in rd.records() {
        let rec = rec.unwrap();
        assert_eq!(rec.len(), 5);
        assert!(["pass", "fail", "discrepancy-logged"].contains(&&rec[4]));
        rec[2].parse::<f64>().unwrap();
    }
}

#[test]
fn json_to_file() {
    let dir = std::env::temp_dir().join(format!("lbverify-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("stability.json");
    let out = lbverify(&["stability", "--lambda", "0.75", "--format", "json", "--out", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["meta"]["a"].as_f64().unwrap(), 2.0);
    assert_eq!(v["meta"]["lambda"].as_f64().unwrap(), 0.75);
    assert_eq!(v["meta"]["tool_version"].as_str().unwrap(), env!("CARGO_PKG_VERSION"));
    assert!(!v["rows"].as_array().unwrap().is_empty());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn output_independent_of_thread_count() {
    let args = ["sweep", "--lambda", "0.75:12:3", "--xi", "0:1:2", "--e-tilde", "1.5:3:2", "--samples", "128"];
    let one = lbverify(&args, Some("1"));
    let four = lbverify(&args, Some("4"));
    assert_eq!(one.status.code(), Some(0), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(lbverify(&["verify"], Some("zero")).status.code(), Some(EXIT_USAGE));
}

#[test]
fn unwritable_output_is_a_failure() {
    let out = lbverify(&["stability", "--out", "/nonexistent-dir/x.csv"], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn every_subcommand_is_green_on_defaults() {
    for args in [&["verify"][..], &["stability"], &["energy"], &["congruence", "--e-tilde", "2", "--samples", "512"], &["tortoise", "--samples", "64"]] {
        let out = lbverify(args, None);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exit_code_contract(
        lambda in -2.0f64..15.0,
        xi in -2.5f64..2.5,
        samples in 0usize..40,
        lo in -3.0f64..3.0,
        span in -1.0f64..3.0,
        e in 0.0f64..4.0,
    ) {
        let hi = lo + span;
        let (l, x, n, a, b, et) = (lambda.to_string(), xi.to_string(), samples.to_string(), lo.to_string(), hi.to_string(), e.to_string());
        let valid_common = lambda > 0.0 && samples >= 2 && lo < hi;
        let code = run(["lbverify", "energy", "--lambda", &l, "--xi", &x, "--samples", &n, "--r-min", &a, "--r-max", &b, "--out", "/dev/null"]);
        prop_assert_eq!(code, if valid_common { EXIT_OK } else { EXIT_USAGE });
        let code = run(["lbverify", "congruence", "--lambda", &l, "--xi", &x, "--samples", &n, "--r-min", &a, "--r-max", &b, "--e-tilde", &et, "--out", "/dev/null"]);
        prop_assert_eq!(code, if valid_common && e >= 1.0 { EXIT_OK } else { EXIT_USAGE });
    }
}
