//! Experiment configuration files.
//!
//! ```text
//! # keys before the first header are defaults for every block
//! seed = 42
//! trials = 10000
//!
//! [experiment]
//! distribution = uniform:lo=0,hi=1
//! n = 10, 100, 1000, 10000
//! metrics = delta_max, delta_avg
//! eta = 0.1
//! ```
//!
//! Recognized keys: `distribution` (alias `dist`), `n`, `trials`, `seed`,
//! `metrics`, `max_splits`, `eta`, `audit_rate`. Every block needs a
//! distribution and at least one metric.

use std::collections::BTreeMap;
use std::fmt;

use mpfee::{Distribution, ExperimentSpec, Metric};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

const KEYS: [&str; 9] = [
    "distribution",
    "dist",
    "n",
    "trials",
    "seed",
    "metrics",
    "max_splits",
    "eta",
    "audit_rate",
];

/// Raw key/value pairs of one block, with the line each came from.
type Block = BTreeMap<String, (String, usize)>;

pub fn parse_config(text: &str) -> Result<Vec<ExperimentSpec>, ConfigError> {
    let mut defaults = Block::new();
    let mut blocks: Vec<(usize, Block)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if line != "[experiment]" {
                return Err(at(line_no, format!("unknown section `{line}`")));
            }
            blocks.push((line_no, Block::new()));
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| at(line_no, format!("expected `key = value`, found `{line}`")))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(at(line_no, format!("unknown key `{key}`")));
        }
        let key = if key == "dist" { "distribution" } else { key };
        let target = match blocks.last_mut() {
            Some((_, block)) => block,
            None => &mut defaults,
        };
        if target
            .insert(key.to_string(), (value.trim().to_string(), line_no))
            .is_some()
        {
            return Err(at(line_no, format!("duplicate key `{key}`")));
        }
    }
    if blocks.is_empty() {
        return Err(ConfigError {
            line: None,
            message: "no [experiment] block".into(),
        });
    }
    blocks
        .into_iter()
        .map(|(header, block)| {
            let mut merged = defaults.clone();
            merged.extend(block);
            build_spec(header, &merged)
        })
        .collect()
}

fn at(line: usize, message: String) -> ConfigError {
    ConfigError {
        line: Some(line),
        message,
    }
}

fn build_spec(header: usize, block: &Block) -> Result<ExperimentSpec, ConfigError> {
    let (dist_text, dist_line) = block
        .get("distribution")
        .ok_or_else(|| at(header, "experiment has no `distribution`".into()))?;
    let distribution: Distribution = dist_text
        .parse()
        .map_err(|e| at(*dist_line, format!("{e}")))?;
    let (metrics_text, metrics_line) = block
        .get("metrics")
        .ok_or_else(|| at(header, "experiment has no `metrics`".into()))?;
    let metrics = parse_metrics(metrics_text).map_err(|m| at(*metrics_line, m))?;

    let mut spec = ExperimentSpec::new(distribution, metrics);
    for (key, (value, line)) in block {
        let bad = |what: &str| at(*line, format!("`{key}`: `{value}` is not {what}"));
        match key.as_str() {
            "n" => spec.n_values = parse_n_list(value).map_err(|_| bad("a list of integers"))?,
            "trials" => spec.trials = value.parse().map_err(|_| bad("an integer"))?,
            "seed" => spec.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
            "max_splits" => spec.max_splits = value.parse().map_err(|_| bad("an integer"))?,
            "eta" => spec.eta_diagnostic = Some(value.parse().map_err(|_| bad("a number"))?),
            "audit_rate" => spec.audit_rate = value.parse().map_err(|_| bad("a number"))?,
            _ => {}
        }
    }
    Ok(spec)
}

pub fn parse_metrics(text: &str) -> Result<Vec<Metric>, String> {
    text.split(',')
        .map(|m| m.trim().parse::<Metric>().map_err(|e| e.to_string()))
        .collect()
}

pub fn parse_n_list(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<usize>()
                .map_err(|_| format!("`{t}` is not a non-negative integer"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BLOCKS: &str = "\
seed = 7
trials = 100  # shared

[experiment]
distribution = uniform:lo=0,hi=1
n = 10, 100
metrics = delta_max, delta_avg

[experiment]
dist = inverse
metrics = rev_mp
trials = 5
eta = 0.1
";

    #[test]
    fn defaults_apply_to_every_block() {
        let specs = parse_config(TWO_BLOCKS).unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[0].seed, 7);
        assert_eq!(specs[0].trials, 100);
        assert_eq!(specs[0].n_values, vec![10, 100]);
        assert_eq!(specs[0].metrics, vec![Metric::DeltaMax, Metric::DeltaAvg]);
        assert_eq!(specs[1].trials, 5);
        assert_eq!(specs[1].seed, 7);
        assert_eq!(specs[1].eta_diagnostic, Some(0.1));
        assert_eq!(specs[1].distribution.to_string(), "inverse");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err =
            parse_config("[experiment]\ndistribution = inverse\nmetrics = delta_max\nbogus = 1\n")
                .unwrap_err();
        assert_eq!(err.line, Some(4));
        assert!(err.message.contains("bogus"));

        let err =
            parse_config("[experiment]\ndistribution = uniform:lo=2,hi=1\nmetrics = rev_mp\n")
                .unwrap_err();
        assert_eq!(err.line, Some(2));

        let err =
            parse_config("[experiment]\ndistribution = inverse\nmetrics = rev_mp\nn = 10, x\n")
                .unwrap_err();
        assert_eq!(err.line, Some(4));

        let err = parse_config("[experiment]\nmetrics = rev_mp\n").unwrap_err();
        assert_eq!(err.line, Some(1));
        assert!(err.message.contains("distribution"));
    }

    #[test]
    fn needs_a_block() {
        assert_eq!(parse_config("seed = 1\n").unwrap_err().line, None);
        assert!(parse_config("[other]\n").is_err());
        assert!(parse_config("[experiment]\ndistribution = inverse\ndist = inverse\n").is_err());
    }
}
