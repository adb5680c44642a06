//! End-to-end checks of the binary: flag plumbing, exit codes, file output.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_astar-sampling"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("astar-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn sample_uniform_ratio_is_trivial_and_seeded() {
    let out = run_ok(&[
        "sample",
        "--family",
        "uniform-ratio",
        "--n",
        "3",
        "--seed",
        "1",
        "--trace",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    for line in &lines {
        let mut parts = line.split_whitespace();
        let x: f64 = parts.next().unwrap().parse().unwrap();
        let t: u32 = parts.next().unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&x));
        assert_eq!(t, 1);
    }
    // same seed, same bytes
    let again = run_ok(&[
        "sample",
        "--family",
        "uniform-ratio",
        "--n",
        "3",
        "--seed",
        "1",
        "--trace",
    ]);
    assert_eq!(text.as_bytes(), again.stdout.as_slice());
}

#[test]
fn unknown_family_is_a_config_error_naming_the_valid_ones() {
    let out = bin()
        .args(["sample", "--family", "nope", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("worst-case") && err.contains("staircase"),
        "{err}"
    );
}

#[test]
fn verify_and_sweep_require_a_seed() {
    for cmd in ["verify", "sweep"] {
        let out = bin().args([cmd, "--replications", "200"]).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{cmd} without seed");
        assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
    }
}

#[test]
fn fit_accepts_genuine_samples_and_rejects_corrupted_ones() {
    let dir = tmp_dir("fit");
    let samples = dir.join("samples.txt");
    run_ok(&[
        "sample",
        "--family",
        "worst-case",
        "--r-max",
        "8",
        "--n",
        "20000",
        "--seed",
        "7",
        "--out",
        samples.to_str().unwrap(),
    ]);

    let out = run_ok(&[
        "fit",
        "--family",
        "worst-case",
        "--r-max",
        "8",
        "--input",
        samples.to_str().unwrap(),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));

    // halve every value: right support, wrong law
    let corrupted = dir.join("corrupted.txt");
    let halved: String = fs::read_to_string(&samples)
        .unwrap()
        .lines()
        .map(|l| format!("{}\n", l.trim().parse::<f64>().unwrap() / 2.0))
        .collect();
    fs::write(&corrupted, halved).unwrap();
    let out = bin()
        .args([
            "fit",
            "--family",
            "worst-case",
            "--r-max",
            "8",
            "--input",
            corrupted.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));

    // unparseable or non-finite entries are runtime errors, not panics
    let junk = dir.join("junk.txt");
    fs::write(&junk, "0.5\nnan\n0.25\n").unwrap();
    let out = bin()
        .args([
            "fit",
            "--family",
            "worst-case",
            "--r-max",
            "8",
            "--input",
            junk.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn widths_of_worst_case_match_the_closed_profile() {
    let out = run_ok(&[
        "widths",
        "--family",
        "worst-case",
        "--r-max",
        "2",
        "--gamma-grid",
        "0.05,0.2,0.5,0.75,1",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let gt = 1.0 - 0.5f64.sqrt();
    let mut checked = 0;
    for line in text.lines().skip(1) {
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let (gamma, width) = (cols[0], cols[1]);
        let expected = if gamma <= gt {
            1.0
        } else {
            (gt / gamma).powi(2)
        };
        assert!((width - expected).abs() < 1e-6, "gamma {gamma}: {width}");
        checked += 1;
    }
    assert_eq!(checked, 5);
    assert!(text.contains("PASS"));
}

#[test]
fn config_file_is_honored_and_flags_override_it() {
    let dir = tmp_dir("config");
    let conf = dir.join("run.conf");
    fs::write(
        &conf,
        "[distribution]\nfamily = worst-case\nr_max = 4\n\n[experiment]\nseed = 5\n",
    )
    .unwrap();
    // from the file: 1/r_max = 0.25
    let out = run_ok(&["widths", "--config", conf.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("2.5000000000000000e-1"));
    // flag wins: 1/r_max = 0.125
    let out = run_ok(&["widths", "--config", conf.to_str().unwrap(), "--r-max", "8"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("1.2500000000000000e-1"));
}

#[test]
fn verify_writes_reports_and_summary() {
    let dir = tmp_dir("verify");
    let out_dir = dir.join("results");
    run_ok(&[
        "verify",
        "--family",
        "staircase",
        "--r-max",
        "4",
        "--replications",
        "500",
        "--seed",
        "9",
        "--gamma-grid",
        "0.1,0.6",
        "--max-n",
        "6",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    for f in [
        "zn.csv",
        "markov_tail.csv",
        "n_bound.csv",
        "k_bound.csv",
        "mean_neg_gumbel.csv",
        "summary.json",
        "config.txt",
    ] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let summary = fs::read_to_string(out_dir.join("summary.json")).unwrap();
    assert!(summary.contains("\"seed\": 9"));
    let config = fs::read_to_string(out_dir.join("config.txt")).unwrap();
    assert!(config.contains("family = staircase"));
}

#[test]
fn staircase_steps_family_with_mode_override() {
    let out = run_ok(&[
        "sample",
        "--family",
        "staircase-steps",
        "--breaks",
        "0.4,0.9",
        "--levels",
        "0,2,0",
        "--mode",
        "0.4",
        "--n",
        "500",
        "--seed",
        "3",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines() {
        let x: f64 = line.trim().parse().unwrap();
        assert!((0.4..0.9).contains(&x), "sample {x} outside the support");
    }
    // a mode override that is not a maximizer is rejected
    let out = bin()
        .args([
            "sample",
            "--family",
            "staircase-steps",
            "--breaks",
            "0.4,0.9",
            "--levels",
            "0,2,0",
            "--mode",
            "0.1",
            "--n",
            "10",
            "--seed",
            "3",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_reruns_are_byte_identical() {
    let args = [
        "sweep",
        "--r-max-sweep",
        "2,8",
        "--replications",
        "500",
        "--seed",
        "21",
    ];
    let a = run_ok(&args);
    let b = run_ok(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains("slope"));
}

#[test]
fn worker_env_var_is_the_default() {
    let dir = tmp_dir("envworkers");
    let out_dir = dir.join("results");
    let out = bin()
        .args([
            "verify",
            "--family",
            "uniform-ratio",
            "--replications",
            "200",
            "--seed",
            "4",
            "--gamma-grid",
            "0.5",
            "--max-n",
            "3",
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .env("ASTAR_SAMPLING_WORKERS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    let summary = fs::read_to_string(out_dir.join("summary.json")).unwrap();
    assert!(summary.contains("\"workers\": \"3\""), "{summary}");
}

#[test]
fn help_lists_commands() {
    let out = run_ok(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["sample", "fit", "widths", "verify", "sweep"] {
        assert!(text.contains(cmd));
    }
}
