//! End-to-end checks of the binary: exit codes, output schema stability,
//! config precedence, and agreement between the `criteria` subcommand and
//! direct library calls.

use std::fs;
use std::process::{Command, Output};

use bayesic::cli::{parse_records_csv, records_to_csv_string, CSV_HEADER};
use bayesic::criteria::{bpic, dic, wbic};
use bayesic::models::{ModelSpec, ObservedSample};
use bayesic::posterior::{power_posterior, BetaSchedule};

fn bayesic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bayesic"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn exit_codes() {
    // 0: success.
    let out = bayesic(&["limits", "--model", "geometric", "--params", "theta0=0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: f64 = stdout_of(&out).trim().parse().unwrap();
    assert!((v - 4.0 * 2f64.ln()).abs() < 1e-12);

    // 0: --help.
    let out = bayesic(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).contains("simulate"));

    // 2: unknown subcommand, unknown flag, bad values.
    assert_eq!(bayesic(&["bogus"]).status.code(), Some(2));
    assert_eq!(
        bayesic(&["simulate", "dic-geometric", "--no-such-flag"])
            .status
            .code(),
        Some(2)
    );
    let out = bayesic(&["simulate", "wbic-normal", "--schedules", "inv-log-n,wat"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schedules"));
    let out = bayesic(&["simulate", "wbic-normal", "--n-grid", "10,abc"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n-grid"));
    assert_eq!(
        bayesic(&["simulate", "wbic-normal", "--jobs", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bayesic(&["limits", "--model", "geometric", "--params", "nope=1"])
            .status
            .code(),
        Some(2)
    );

    // 1: missing or malformed data files.
    let out = bayesic(&[
        "criteria",
        "--model",
        "geometric",
        "--data",
        "/no/such/file.csv",
    ]);
    assert_eq!(out.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "0\n-1\n").unwrap();
    let out = bayesic(&[
        "criteria",
        "--model",
        "geometric",
        "--data",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    // 1: unwritable output path.
    let out = bayesic(&[
        "limits",
        "--model",
        "laplace",
        "--params",
        "gamma0=1",
        "--out",
        "/no/such/dir/out.csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn criteria_subcommand_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("counts.csv");
    fs::write(&data, "0\n3\n1\n2\n2\n").unwrap();

    let out = bayesic(&[
        "criteria",
        "--model",
        "geometric",
        "--data",
        data.to_str().unwrap(),
        "--alpha",
        "2",
        "--beta",
        "3",
        "--schedule",
        "inv-log-n",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout_of(&out);
    let mut got = std::collections::BTreeMap::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        got.insert(f[0].to_string(), f[3].parse::<f64>().unwrap());
    }

    let model = ModelSpec::geometric(2.0, 3.0).unwrap();
    let sample = ObservedSample::univariate(vec![0.0, 3.0, 1.0, 2.0, 2.0]).unwrap();
    let post = power_posterior(&model, &sample, 1.0).unwrap();
    assert!((got["dic"] - dic(&model, &sample, &post).unwrap().value).abs() < 1e-12);
    assert!((got["bpic"] - bpic(&model, &sample, &post).unwrap().value).abs() < 1e-12);
    assert!(
        (got["wbic"] - wbic(&model, &sample, BetaSchedule::InvLogN).unwrap().value).abs() < 1e-12
    );
}

#[test]
fn limits_subcommand_param_forms() {
    let value = |args: &[&str]| -> f64 {
        let out = bayesic(args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        stdout_of(&out).trim().parse().unwrap()
    };
    let ln_2pi = 1.8378770664093453;

    // theta0 and ex forms agree for the geometric limit.
    let a = value(&["limits", "--model", "geometric", "--params", "theta0=0.5"]);
    let b = value(&["limits", "--model", "geometric", "--params", "ex=1.0"]);
    assert_eq!(a, b);

    // mean= and explicit-moment forms agree for the normal limit.
    let a = value(&["limits", "--model", "normal", "--params", "mean=1"]);
    let b = value(&[
        "limits",
        "--model",
        "normal",
        "--params",
        "p=1,e-norm-sq=2,norm-e-sq=1",
    ]);
    assert_eq!(a, b);
    assert!((a - (ln_2pi + 1.0)).abs() < 1e-12);
    let v = value(&["limits", "--model", "normal", "--params", "mean=1;-2"]);
    assert!((v - (2.0 * ln_2pi + 2.0)).abs() < 1e-12);

    let v = value(&["limits", "--model", "laplace", "--params", "gamma0=0.5"]);
    assert!((v - 2.0).abs() < 1e-12);
}

#[test]
fn criteria_subcommand_normal_and_laplace() {
    let dir = tempfile::tempdir().unwrap();

    let data = dir.path().join("xs.csv");
    fs::write(&data, "x\n0.5\n-0.25\n1.5\n").unwrap();
    let out = bayesic(&[
        "criteria",
        "--model",
        "normal",
        "--data",
        data.to_str().unwrap(),
        "--header",
        "--prior-mean",
        "0.0",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(stdout_of(&out).lines().count(), 4); // header + 3 criteria

    let out = bayesic(&[
        "criteria",
        "--model",
        "laplace",
        "--data",
        data.to_str().unwrap(),
        "--header",
        "--box",
        "2,4",
        "--nodes",
        "64,64",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout_of(&out);
    assert!(text.lines().skip(1).all(|l| l.contains("quadrature")));
}

#[test]
fn emitted_csv_round_trips_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.csv");
    let out = bayesic(&[
        "simulate",
        "consistency",
        "--n-grid",
        "100,1000",
        "--replicates",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let content = fs::read_to_string(&path).unwrap();
    assert!(content.starts_with(CSV_HEADER));
    assert!(!content.contains('\r'));
    let records = parse_records_csv(&content).unwrap();
    assert_eq!(records.len(), 2 * 2 * 2 * 2);
    assert_eq!(records_to_csv_string(&records), content);
}

#[test]
fn config_file_and_env_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("manifest.cfg");
    fs::write(
        &config,
        "# reproducible manifest\nseed = 99\nn-grid = 10,100\nreplicates = 2\nschedules = one\n",
    )
    .unwrap();

    // Config alone.
    let from_config = bayesic(&[
        "simulate",
        "wbic-normal",
        "--config",
        config.to_str().unwrap(),
    ]);
    assert_eq!(from_config.status.code(), Some(0));
    let from_flags = bayesic(&[
        "simulate",
        "wbic-normal",
        "--seed",
        "99",
        "--n-grid",
        "10,100",
        "--replicates",
        "2",
        "--schedules",
        "one",
    ]);
    assert_eq!(stdout_of(&from_config), stdout_of(&from_flags));

    // Flags override the config file.
    let overridden = bayesic(&[
        "simulate",
        "wbic-normal",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "123",
    ]);
    let direct = bayesic(&[
        "simulate",
        "wbic-normal",
        "--seed",
        "123",
        "--n-grid",
        "10,100",
        "--replicates",
        "2",
        "--schedules",
        "one",
    ]);
    assert_eq!(stdout_of(&overridden), stdout_of(&direct));
    assert_ne!(stdout_of(&overridden), stdout_of(&from_flags));

    // BAYESIC_SEED is the seed default, below config and flags.
    let from_env = Command::new(env!("CARGO_BIN_EXE_bayesic"))
        .args([
            "simulate",
            "wbic-normal",
            "--n-grid",
            "10,100",
            "--replicates",
            "2",
            "--schedules",
            "one",
        ])
        .env("BAYESIC_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(stdout_of(&from_env), stdout_of(&from_flags));
    let env_overridden = Command::new(env!("CARGO_BIN_EXE_bayesic"))
        .args([
            "simulate",
            "wbic-normal",
            "--seed",
            "123",
            "--n-grid",
            "10,100",
            "--replicates",
            "2",
            "--schedules",
            "one",
        ])
        .env("BAYESIC_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(stdout_of(&env_overridden), stdout_of(&direct));
}

#[test]
fn rescale_n_flag() {
    let base = bayesic(&[
        "simulate",
        "wbic-normal",
        "--n-grid",
        "10",
        "--replicates",
        "1",
    ]);
    let scaled = bayesic(&[
        "simulate",
        "wbic-normal",
        "--n-grid",
        "10",
        "--replicates",
        "1",
        "--rescale-n",
    ]);
    let base = parse_records_csv(&stdout_of(&base)).unwrap();
    let scaled = parse_records_csv(&stdout_of(&scaled)).unwrap();
    assert_eq!(base.len(), scaled.len());
    for (b, s) in base.iter().zip(&scaled) {
        // WBIC rescales by n/2 = 5.
        assert_eq!(s.value, b.value * 5.0);
        assert_eq!(s.limit, b.limit * 5.0);
        assert!((s.abs_error - (s.value - s.limit).abs()).abs() < 1e-12);
    }
}

#[test]
fn consistency_alias_matches_nested_subcommand() {
    let a = bayesic(&["consistency", "--n-grid", "100,1000", "--replicates", "2"]);
    let b = bayesic(&[
        "simulate",
        "consistency",
        "--n-grid",
        "100,1000",
        "--replicates",
        "2",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout_of(&a), stdout_of(&b));
}

#[test]
fn summarize_flag_emits_summary_schema() {
    let out = bayesic(&[
        "simulate",
        "wbic-normal",
        "--n-grid",
        "10,100",
        "--replicates",
        "4",
        "--schedules",
        "one,inv-n",
        "--summarize",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,criterion,schedule,n,count,median_value,median_abs_error,min_value,max_value"
    );
    // 2 schedules × 2 n values.
    assert_eq!(lines.count(), 4);
}
