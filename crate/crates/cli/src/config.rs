//! Configuration: a flat key-value file with `[distribution]`,
//! `[experiment]` and `[output]` sections, plus command-line flag overrides.
//! The format is deliberately dependency-free and diff-friendly; parse ->
//! serialize -> parse is the identity.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration (file, flags or distribution parameters): exit 2.
    Config(String),
    /// Failure while running (I/O, runaway runs, quadrature): exit 3.
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Sample,
    Fit,
    Widths,
    Verify,
    Sweep,
}

impl Command {
    pub fn parse(s: &str) -> Result<Command, CliError> {
        match s {
            "sample" => Ok(Command::Sample),
            "fit" => Ok(Command::Fit),
            "widths" => Ok(Command::Widths),
            "verify" => Ok(Command::Verify),
            "sweep" => Ok(Command::Sweep),
            other => Err(config_err(format!(
                "unknown command `{other}`; expected one of sample, fit, widths, verify, sweep"
            ))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DistributionConfig {
    pub family: Option<String>,
    pub r_max: Option<f64>,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub breaks: Option<Vec<f64>>,
    pub levels: Option<Vec<f64>>,
    pub mode: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentSettings {
    pub seed: Option<u64>,
    pub replications: Option<u64>,
    pub gamma_grid: Option<Vec<f64>>,
    pub r_max_sweep: Option<Vec<f64>>,
    pub max_steps: Option<u32>,
    pub workers: Option<usize>,
    pub max_n: Option<u32>,
    pub n: Option<u64>,
    pub mass_sequence: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutputConfig {
    pub out: Option<String>,
    pub input: Option<String>,
    pub trace: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CliConfig {
    pub distribution: DistributionConfig,
    pub experiment: ExperimentSettings,
    pub output: OutputConfig,
}

fn parse_num<T: std::str::FromStr>(value: &str, what: &str, loc: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| config_err(format!("{loc}: cannot parse `{value}` as {what}")))
}

fn parse_list(value: &str, loc: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .map(|tok| parse_num::<f64>(tok, "a number", loc))
        .collect()
}

fn parse_bool(value: &str, loc: &str) -> Result<bool, CliError> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(config_err(format!(
            "{loc}: cannot parse `{other}` as a boolean"
        ))),
    }
}

impl CliConfig {
    /// Parse a config file; `source` names the file in diagnostics.
    pub fn parse(text: &str, source: &str) -> Result<CliConfig, CliError> {
        let mut cfg = CliConfig::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let loc = format!("{source}:{}", idx + 1);
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                match name {
                    "distribution" | "experiment" | "output" => section = name.to_string(),
                    other => return Err(config_err(format!("{loc}: unknown section [{other}]"))),
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("{loc}: expected `key = value`")))?;
            let key = key.trim();
            let value = value.trim();
            cfg.set(&section, key, value, &loc)?;
        }
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, value: &str, loc: &str) -> Result<(), CliError> {
        match (section, key) {
            ("distribution", "family") => self.distribution.family = Some(value.to_string()),
            ("distribution", "r_max") => {
                self.distribution.r_max = Some(parse_num(value, "a number", loc)?)
            }
            ("distribution", "mean") => {
                self.distribution.mean = Some(parse_num(value, "a number", loc)?)
            }
            ("distribution", "sd") => {
                self.distribution.sd = Some(parse_num(value, "a number", loc)?)
            }
            ("distribution", "breaks") => self.distribution.breaks = Some(parse_list(value, loc)?),
            ("distribution", "levels") => self.distribution.levels = Some(parse_list(value, loc)?),
            ("distribution", "mode") => {
                self.distribution.mode = Some(parse_num(value, "a number", loc)?)
            }
            ("experiment", "seed") => {
                self.experiment.seed = Some(parse_num(value, "an integer", loc)?)
            }
            ("experiment", "replications") => {
                self.experiment.replications = Some(parse_num(value, "an integer", loc)?)
            }
            ("experiment", "gamma_grid") => {
                self.experiment.gamma_grid = Some(parse_list(value, loc)?)
            }
            ("experiment", "r_max_sweep") => {
                self.experiment.r_max_sweep = Some(parse_list(value, loc)?)
            }
            ("experiment", "max_steps") => {
                self.experiment.max_steps = Some(parse_num(value, "an integer", loc)?)
            }
            ("experiment", "workers") => {
                self.experiment.workers = Some(parse_num(value, "an integer", loc)?)
            }
            ("experiment", "max_n") => {
                self.experiment.max_n = Some(parse_num(value, "an integer", loc)?)
            }
            ("experiment", "n") => self.experiment.n = Some(parse_num(value, "an integer", loc)?),
            ("experiment", "mass_sequence") => {
                self.experiment.mass_sequence = Some(parse_list(value, loc)?)
            }
            ("output", "out") => self.output.out = Some(value.to_string()),
            ("output", "input") => self.output.input = Some(value.to_string()),
            ("output", "trace") => self.output.trace = parse_bool(value, loc)?,
            (section, key) => {
                return Err(config_err(format!(
                    "{loc}: unknown key `{key}` in section [{section}]"
                )))
            }
        }
        Ok(())
    }

    /// Serialize in canonical order; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        fn num(x: f64) -> String {
            format!("{x}")
        }
        fn list(xs: &[f64]) -> String {
            xs.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",")
        }
        let mut out = String::from("[distribution]\n");
        let d = &self.distribution;
        if let Some(v) = &d.family {
            out.push_str(&format!("family = {v}\n"));
        }
        if let Some(v) = d.r_max {
            out.push_str(&format!("r_max = {}\n", num(v)));
        }
        if let Some(v) = d.mean {
            out.push_str(&format!("mean = {}\n", num(v)));
        }
        if let Some(v) = d.sd {
            out.push_str(&format!("sd = {}\n", num(v)));
        }
        if let Some(v) = &d.breaks {
            out.push_str(&format!("breaks = {}\n", list(v)));
        }
        if let Some(v) = &d.levels {
            out.push_str(&format!("levels = {}\n", list(v)));
        }
        if let Some(v) = d.mode {
            out.push_str(&format!("mode = {}\n", num(v)));
        }
        out.push_str("\n[experiment]\n");
        let e = &self.experiment;
        if let Some(v) = e.seed {
            out.push_str(&format!("seed = {v}\n"));
        }
        if let Some(v) = e.replications {
            out.push_str(&format!("replications = {v}\n"));
        }
        if let Some(v) = &e.gamma_grid {
            out.push_str(&format!("gamma_grid = {}\n", list(v)));
        }
        if let Some(v) = &e.r_max_sweep {
            out.push_str(&format!("r_max_sweep = {}\n", list(v)));
        }
        if let Some(v) = e.max_steps {
            out.push_str(&format!("max_steps = {v}\n"));
        }
        if let Some(v) = e.workers {
            out.push_str(&format!("workers = {v}\n"));
        }
        if let Some(v) = e.max_n {
            out.push_str(&format!("max_n = {v}\n"));
        }
        if let Some(v) = e.n {
            out.push_str(&format!("n = {v}\n"));
        }
        if let Some(v) = &e.mass_sequence {
            out.push_str(&format!("mass_sequence = {}\n", list(v)));
        }
        out.push_str("\n[output]\n");
        let o = &self.output;
        if let Some(v) = &o.out {
            out.push_str(&format!("out = {v}\n"));
        }
        if let Some(v) = &o.input {
            out.push_str(&format!("input = {v}\n"));
        }
        if o.trace {
            out.push_str("trace = true\n");
        }
        out
    }

    /// Apply one `--flag value` override. `--trace` takes no value.
    pub fn apply_flag(&mut self, flag: &str, value: Option<&str>) -> Result<(), CliError> {
        fn need<'a>(v: Option<&'a str>, loc: &str) -> Result<&'a str, CliError> {
            v.ok_or_else(|| config_err(format!("{loc} requires a value")))
        }
        let loc = format!("flag {flag}");
        match flag {
            "--trace" => {
                self.output.trace = true;
                return Ok(());
            }
            "--family" => self.distribution.family = Some(need(value, &loc)?.to_string()),
            "--r-max" => {
                self.distribution.r_max = Some(parse_num(need(value, &loc)?, "a number", &loc)?)
            }
            "--mean" => {
                self.distribution.mean = Some(parse_num(need(value, &loc)?, "a number", &loc)?)
            }
            "--sd" => self.distribution.sd = Some(parse_num(need(value, &loc)?, "a number", &loc)?),
            "--breaks" => self.distribution.breaks = Some(parse_list(need(value, &loc)?, &loc)?),
            "--levels" => self.distribution.levels = Some(parse_list(need(value, &loc)?, &loc)?),
            "--mode" => {
                self.distribution.mode = Some(parse_num(need(value, &loc)?, "a number", &loc)?)
            }
            "--seed" => {
                self.experiment.seed = Some(parse_num(need(value, &loc)?, "an integer", &loc)?)
            }
            "--replications" => {
                self.experiment.replications =
                    Some(parse_num(need(value, &loc)?, "an integer", &loc)?)
            }
            "--gamma-grid" => {
                self.experiment.gamma_grid = Some(parse_list(need(value, &loc)?, &loc)?)
            }
            "--r-max-sweep" => {
                self.experiment.r_max_sweep = Some(parse_list(need(value, &loc)?, &loc)?)
            }
            "--max-steps" => {
                self.experiment.max_steps = Some(parse_num(need(value, &loc)?, "an integer", &loc)?)
            }
            "--workers" => {
                self.experiment.workers = Some(parse_num(need(value, &loc)?, "an integer", &loc)?)
            }
            "--max-n" => {
                self.experiment.max_n = Some(parse_num(need(value, &loc)?, "an integer", &loc)?)
            }
            "--n" => self.experiment.n = Some(parse_num(need(value, &loc)?, "an integer", &loc)?),
            "--mass-sequence" => {
                self.experiment.mass_sequence = Some(parse_list(need(value, &loc)?, &loc)?)
            }
            "--out" => self.output.out = Some(need(value, &loc)?.to_string()),
            "--input" => self.output.input = Some(need(value, &loc)?.to_string()),
            other => {
                return Err(config_err(format!(
                    "unknown flag `{other}` (see --help for the list)"
                )))
            }
        }
        Ok(())
    }

    /// Worker count: flag/file, then the environment default, then all cores.
    pub fn workers(&self) -> usize {
        if let Some(w) = self.experiment.workers {
            return w.max(1);
        }
        if let Ok(v) = std::env::var("ASTAR_SAMPLING_WORKERS") {
            if let Ok(w) = v.parse::<usize>() {
                return w.max(1);
            }
        }
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    }
}
