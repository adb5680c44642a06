//! Command-line driver. Exit codes: 0 ok, 1 bound violation (or failed fit
//! check), 2 config error, 3 runtime error.

mod commands;
mod config;

use config::{CliConfig, CliError, Command};

const USAGE: &str = "\
usage: astar-sampling <command> [--config FILE] [flags]

commands:
  sample   draw exact samples (one per line; --trace appends the step count)
  fit      Kolmogorov-Smirnov check of sampler output (or --input FILE)
           against the analytic target CDF
  widths   emit the width profile CSV (gamma, width, f, g, h) and check the
           integral identity
  verify   run the bound-verification battery; one CSV per experiment plus
           summary.json in --out DIR (requires --seed)
  sweep    empirical E[T] vs r_max against the proved bound (requires --seed)

distribution flags:
  --family NAME        uniform-ratio | worst-case | trapezoid | gaussian |
                       gaussian-mean-sd | staircase | staircase-steps
  --r-max X            ratio maximum (default 8)
  --mean X --sd X      gaussian location/scale variant
  --breaks A,B,..      staircase interior breakpoints
  --levels A,B,..      staircase levels (one more than breaks)
  --mode X             explicit ratio mode override

experiment flags:
  --seed N             root seed (required for verify/sweep)
  --replications N     Monte Carlo replicas (default 10000)
  --gamma-grid A,B,..  superlevel thresholds in (0,1]
  --r-max-sweep A,B,.. r_max values for sweep (default 2,4,...,1024)
  --max-steps N        per-run step budget override
  --workers N          worker threads (or ASTAR_SAMPLING_WORKERS)
  --max-n N            largest step index for interval-mass experiments
  --n N                sample count for sample/fit
  --mass-sequence A,.. fixed interval masses for the chain-mean experiment

output flags:
  --out PATH           output file (sample/fit/widths/sweep) or directory
                       (verify)
  --input FILE         existing sample file for fit
  --trace              append step counts to sample output
";

fn run(args: &[String]) -> Result<i32, CliError> {
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help" {
        print!("{USAGE}");
        return Ok(if args.is_empty() { 2 } else { 0 });
    }
    let command = Command::parse(&args[0])?;

    // First pass: find --config and load the file, so flags override it.
    let mut cfg = CliConfig::default();
    let mut i = 1;
    let mut flags: Vec<(String, Option<String>)> = Vec::new();
    let mut config_path: Option<String> = None;
    while i < args.len() {
        let arg = &args[i];
        if let Some((flag, value)) = arg.split_once('=') {
            if flag == "--config" {
                config_path = Some(value.to_string());
            } else {
                flags.push((flag.to_string(), Some(value.to_string())));
            }
            i += 1;
            continue;
        }
        match arg.as_str() {
            "--trace" => {
                flags.push((arg.clone(), None));
                i += 1;
            }
            "--config" => {
                let value = args
                    .get(i + 1)
                    .ok_or_else(|| config::config_err("--config requires a path"))?;
                config_path = Some(value.clone());
                i += 2;
            }
            flag if flag.starts_with("--") => {
                let value = args.get(i + 1).cloned();
                flags.push((flag.to_string(), value));
                i += 2;
            }
            other => {
                return Err(config::config_err(format!(
                    "unexpected positional argument `{other}`"
                )))
            }
        }
    }
    if let Some(path) = config_path {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| config::config_err(format!("{path}: {e}")))?;
        cfg = CliConfig::parse(&text, &path)?;
    }
    for (flag, value) in &flags {
        cfg.apply_flag(flag, value.as_deref())?;
    }

    match command {
        Command::Sample => commands::cmd_sample(&cfg),
        Command::Fit => commands::cmd_fit(&cfg),
        Command::Widths => commands::cmd_widths(&cfg),
        Command::Verify => commands::cmd_verify(&cfg),
        Command::Sweep => commands::cmd_sweep(&cfg),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = match run(&args) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{err}");
            match err {
                CliError::Config(_) => 2,
                CliError::Runtime(_) => 3,
            }
        }
    };
    std::process::exit(code);
}
