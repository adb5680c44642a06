//! The five commands: sample emission, fit checking, width profiles, the
//! bound-verification battery and the runtime sweep.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use astar_sampling::families::Family;
use astar_sampling::harness::{
    alpha, experiment_k, experiment_markov_tail, experiment_mean_neg_gumbel, experiment_n,
    experiment_t, experiment_zn, BoundReport, ExperimentConfig,
};
use astar_sampling::report::{format_f64, json_summary, report_to_csv, width_profile_to_csv};
use astar_sampling::rng::{RandomStream, SplitMix64Stream};
use astar_sampling::sampler::{default_max_steps, exactness_check, run};
use astar_sampling::stats::{ks_critical, ks_statistic};
use astar_sampling::width::{width_integral, width_profile, WidthFunction};
use astar_sampling::{Error, Target};

use crate::config::{config_err, CliConfig, CliError};

fn core_err(e: Error) -> CliError {
    match e {
        Error::InvalidParameter { .. } => CliError::Config(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

/// Resolve the distribution block to a family descriptor.
pub fn family_from(cfg: &CliConfig) -> Result<Family, CliError> {
    let d = &cfg.distribution;
    let name = d.family.as_deref().unwrap_or("worst-case");
    let r_max = d.r_max.unwrap_or(8.0);
    match name {
        "uniform-ratio" => Ok(Family::UniformRatio),
        "worst-case" => Ok(Family::WorstCase { r_max }),
        "trapezoid" => Ok(Family::Trapezoid { r_max }),
        "gaussian" => match (d.mean, d.sd) {
            (Some(mean), Some(sd)) => Ok(Family::GaussianMeanSd { mean, sd }),
            (None, None) => Ok(Family::Gaussian { r_max }),
            _ => Err(config_err(
                "gaussian needs both `mean` and `sd`, or neither",
            )),
        },
        "gaussian-mean-sd" => {
            let mean = d
                .mean
                .ok_or_else(|| config_err("gaussian-mean-sd needs `mean`"))?;
            let sd =
                d.sd.ok_or_else(|| config_err("gaussian-mean-sd needs `sd`"))?;
            Ok(Family::GaussianMeanSd { mean, sd })
        }
        "staircase" => match (&d.breaks, &d.levels) {
            (Some(breaks), Some(levels)) => Ok(Family::StaircaseSteps {
                breaks: breaks.clone(),
                levels: levels.clone(),
            }),
            (None, None) => Ok(Family::Staircase { r_max }),
            _ => Err(config_err(
                "staircase needs both `breaks` and `levels`, or neither",
            )),
        },
        "staircase-steps" => {
            let breaks = d
                .breaks
                .clone()
                .ok_or_else(|| config_err("staircase-steps needs `breaks`"))?;
            let levels = d
                .levels
                .clone()
                .ok_or_else(|| config_err("staircase-steps needs `levels`"))?;
            Ok(Family::StaircaseSteps { breaks, levels })
        }
        other => Err(config_err(format!(
            "unknown family `{other}`; valid families: {}",
            Family::known_names().join(", ")
        ))),
    }
}

fn build_target(cfg: &CliConfig) -> Result<Target, CliError> {
    let target = family_from(cfg)?.build::<f64>().map_err(core_err)?;
    match cfg.distribution.mode {
        Some(mode) => target.with_mode(mode).map_err(core_err),
        None => Ok(target),
    }
}

/// Seed resolution: wall clock is acceptable for exploratory commands but
/// never for verification.
fn seed_or_clock(cfg: &CliConfig) -> u64 {
    cfg.experiment.seed.unwrap_or_else(|| {
        let seed = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        eprintln!("note: no seed given, using {seed}");
        seed
    })
}

fn required_seed(cfg: &CliConfig, command: &str) -> Result<u64, CliError> {
    cfg.experiment
        .seed
        .ok_or_else(|| config_err(format!("`{command}` requires an explicit seed")))
}

fn write_output(cfg: &CliConfig, content: &str) -> Result<(), CliError> {
    match &cfg.output.out {
        Some(path) => {
            fs::write(path, content).map_err(|e| CliError::Runtime(format!("{path}: {e}")))
        }
        None => {
            print!("{content}");
            std::io::stdout()
                .flush()
                .map_err(|e| CliError::Runtime(e.to_string()))
        }
    }
}

/// Draw `n` exact samples, one per line at full precision; `--trace` appends
/// the step count T.
pub fn cmd_sample(cfg: &CliConfig) -> Result<i32, CliError> {
    let target = build_target(cfg)?;
    let n = cfg.experiment.n.unwrap_or(1000);
    let seed = seed_or_clock(cfg);
    let max_steps = cfg
        .experiment
        .max_steps
        .unwrap_or_else(|| default_max_steps(target.r_max()));
    let root = SplitMix64Stream::from_seed(seed);
    let mut out = String::new();
    for i in 0..n {
        let mut stream = root.split(i);
        let trace = run(&target, &[], &mut stream, max_steps).map_err(core_err)?;
        if cfg.output.trace {
            out.push_str(&format!("{} {}\n", trace.sample, trace.steps));
        } else {
            out.push_str(&format!("{}\n", trace.sample));
        }
    }
    write_output(cfg, &out)?;
    Ok(0)
}

fn read_samples(path: &str) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{path}: {e}")))?;
    let mut samples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tok = line.split_whitespace().next().unwrap();
        let x: f64 = tok
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| CliError::Runtime(format!("{path}:{}: bad sample `{tok}`", idx + 1)))?;
        samples.push(x);
    }
    if samples.is_empty() {
        return Err(CliError::Runtime(format!("{path}: no samples")));
    }
    Ok(samples)
}

/// Kolmogorov-Smirnov fit check of sampler output (or a sample file) against
/// the analytic target CDF at 0.001 significance.
pub fn cmd_fit(cfg: &CliConfig) -> Result<i32, CliError> {
    let target = build_target(cfg)?;
    let (ks, n) = match &cfg.output.input {
        Some(path) => {
            let mut samples = read_samples(path)?;
            let n = samples.len();
            (ks_statistic(&mut samples, |x| target.q_cdf(x)), n)
        }
        None => {
            let n = cfg.experiment.n.unwrap_or(100_000);
            let seed = seed_or_clock(cfg);
            let root = SplitMix64Stream::from_seed(seed);
            let ks = exactness_check(&target, n, &root).map_err(core_err)?;
            (ks, n as usize)
        }
    };
    let threshold = ks_critical(0.001, n);
    let pass = ks < threshold;
    println!(
        "family = {}  n = {n}  ks_distance = {}  threshold = {}  {}",
        target.label(),
        format_f64(ks),
        format_f64(threshold),
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { 1 })
}

/// Width profile CSV over a gamma grid plus the integral identity check.
pub fn cmd_widths(cfg: &CliConfig) -> Result<i32, CliError> {
    let target = build_target(cfg)?;
    let grid: Vec<f64> = match &cfg.experiment.gamma_grid {
        Some(g) => g.clone(),
        None => (0..=200).map(|i| i as f64 / 200.0).collect(),
    };
    let wf = WidthFunction::for_target(&target);
    let rows = width_profile(&wf, &grid);
    let csv = width_profile_to_csv(&rows);
    write_output(cfg, &csv)?;

    let integral = width_integral(&target).map_err(core_err)?;
    let expected = 1.0 / target.r_max();
    let diff = (integral - expected).abs();
    let pass = diff <= 1e-6;
    println!(
        "# width integral = {}  1/r_max = {}  |diff| = {}  {}",
        format_f64(integral),
        format_f64(expected),
        format_f64(diff),
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { 1 })
}

fn experiment_config(cfg: &CliConfig, seed: u64) -> Result<ExperimentConfig, CliError> {
    Ok(ExperimentConfig {
        family: family_from(cfg)?,
        r_max_sweep: cfg
            .experiment
            .r_max_sweep
            .clone()
            .unwrap_or_else(|| (1..=10).map(|k| 2.0f64.powi(k)).collect()),
        gamma_grid: cfg
            .experiment
            .gamma_grid
            .clone()
            .unwrap_or_else(|| vec![0.05, 0.1, 0.2, 0.3, 0.45, 0.6, 0.75, 0.9]),
        replications: cfg.experiment.replications.unwrap_or(10_000),
        seed,
        max_steps: cfg.experiment.max_steps,
        workers: cfg.workers(),
        max_n: cfg.experiment.max_n.unwrap_or(15),
        mode_override: cfg.distribution.mode,
    })
}

fn write_report(dir: &Path, name: &str, report: &BoundReport) -> Result<(), CliError> {
    let path = dir.join(format!("{name}.csv"));
    fs::write(&path, report_to_csv(report))
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn merge_reports(mut reports: Vec<BoundReport>) -> BoundReport {
    let mut merged = reports.remove(0);
    for r in reports {
        merged.rows.extend(r.rows);
        merged.degenerate_runs += r.degenerate_runs;
        merged.wall_clock_secs += r.wall_clock_secs;
    }
    merged
}

/// Run the full bound-verification battery and write one CSV per experiment
/// plus a JSON summary. Exit status 1 if any bound is breached at 3 sigma.
pub fn cmd_verify(cfg: &CliConfig) -> Result<i32, CliError> {
    let seed = required_seed(cfg, "verify")?;
    let exp = experiment_config(cfg, seed)?;
    let dir = Path::new(cfg.output.out.as_deref().unwrap_or("out"));
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    // Record the effective configuration next to the results so the run can
    // be reproduced from the directory alone.
    let cfg_path = dir.join("config.txt");
    fs::write(&cfg_path, cfg.serialize())
        .map_err(|e| CliError::Runtime(format!("{}: {e}", cfg_path.display())))?;

    let zn = experiment_zn(&exp).map_err(core_err)?;
    let tail = merge_reports(
        exp.gamma_grid
            .iter()
            .map(|&g| experiment_markov_tail(&exp, g))
            .collect::<Result<Vec<_>, _>>()
            .map_err(core_err)?,
    );
    let n_rep = experiment_n(&exp).map_err(core_err)?;
    let k_rep = experiment_k(&exp).map_err(core_err)?;
    let masses = cfg
        .experiment
        .mass_sequence
        .clone()
        .unwrap_or_else(|| vec![1.0, 0.75, 0.5625, 0.421875]);
    let gumbel = experiment_mean_neg_gumbel(&masses, exp.replications, seed).map_err(core_err)?;

    let reports = [
        ("zn", &zn),
        ("markov_tail", &tail),
        ("n_bound", &n_rep),
        ("k_bound", &k_rep),
        ("mean_neg_gumbel", &gumbel),
    ];
    for (name, report) in &reports {
        write_report(dir, name, report)?;
    }
    let echo = [
        ("family".to_string(), exp.family.name().to_string()),
        ("replications".to_string(), exp.replications.to_string()),
        (
            "gamma_grid".to_string(),
            exp.gamma_grid
                .iter()
                .map(|g| g.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("max_n".to_string(), exp.max_n.to_string()),
        ("seed".to_string(), seed.to_string()),
        ("workers".to_string(), exp.workers.to_string()),
        (
            "mass_sequence".to_string(),
            masses
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
    ];
    let summary = json_summary(&reports.iter().map(|(_, r)| *r).collect::<Vec<_>>(), &echo);
    let path = dir.join("summary.json");
    fs::write(&path, summary).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;

    let mut violations = 0usize;
    for (name, report) in &reports {
        let v = report.rows.iter().filter(|r| r.violated).count();
        violations += v;
        println!(
            "{name}: {} rows, {v} violations, {} degenerate runs",
            report.rows.len(),
            report.degenerate_runs
        );
    }
    println!(
        "verify: {} (alpha = {})",
        if violations == 0 {
            "all bounds hold"
        } else {
            "BOUND VIOLATION"
        },
        format_f64(alpha())
    );
    Ok(if violations == 0 { 0 } else { 1 })
}

/// Runtime sweep: E[T] against the proved bound across r_max values, with
/// the fitted slope of E[T] vs ln r_max.
pub fn cmd_sweep(cfg: &CliConfig) -> Result<i32, CliError> {
    let seed = required_seed(cfg, "sweep")?;
    let exp = experiment_config(cfg, seed)?;
    let report = experiment_t(&exp).map_err(core_err)?;
    write_output(cfg, &report_to_csv(&report))?;
    if let Some(slope_row) = report.rows.iter().find(|r| r.name.starts_with("slope")) {
        println!(
            "# slope = {}  bound 4*alpha = {}  {}",
            format_f64(slope_row.mean),
            format_f64(4.0 * alpha()),
            if slope_row.violated { "FAIL" } else { "PASS" }
        );
    }
    Ok(if report.any_violation() { 1 } else { 0 })
}
