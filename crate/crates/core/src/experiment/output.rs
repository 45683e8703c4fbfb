//! Serialized forms of run logs.
//!
//! Data files contain nothing time-dependent, so identical inputs give
//! byte-identical files. Wall-clock figures go to a separate `meta.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::meta_loop::{averaged_sample_frequencies, averaged_sampling_weights, CycleRecord, RunLog};
use crate::rng::RNG_ALGORITHM;

#[derive(Serialize)]
struct RecordLine<'a> {
    cycle: usize,
    step: usize,
    probs: &'a [f64],
    counts: &'a [usize],
    losses: &'a [f64],
    reward: f64,
    entropy: f64,
}

impl<'a> From<&'a CycleRecord> for RecordLine<'a> {
    fn from(r: &'a CycleRecord) -> Self {
        Self {
            cycle: r.cycle,
            step: r.step,
            probs: &r.probs,
            counts: &r.counts,
            losses: &r.losses,
            reward: r.reward,
            entropy: r.entropy,
        }
    }
}

/// One JSON object per cycle, newline terminated. Floats use the shortest
/// representation that parses back to the same value.
pub fn to_jsonl(log: &RunLog) -> Result<String> {
    let mut out = String::new();
    for record in &log.records {
        let line = serde_json::to_string(&RecordLine::from(record))
            .map_err(|e| Error::Numeric(format!("cycle {}: {e}", record.cycle)))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

/// `x` with six significant digits, in plain notation when that stays short.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{x:.5e}");
    let exponent: i32 = sci.split_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-5..6).contains(&exponent) {
        let decimals = (5 - exponent).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        sci
    }
}

/// Probabilities rounded to six significant digits, except the largest, which
/// is set to one minus the others (then rounded) so a row still sums to one
/// within rounding of a single entry.
fn probability_row(probs: &[f64]) -> Vec<String> {
    let largest = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut cells: Vec<String> = probs.iter().map(|&p| sig6(p)).collect();
    let rest: f64 = cells
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != largest)
        .map(|(_, c)| c.parse::<f64>().unwrap_or(0.0))
        .sum();
    cells[largest] = sig6((1.0 - rest).max(0.0));
    cells
}

fn csv_header(first: &str, prefix: char, m: usize) -> String {
    let mut header = first.to_string();
    for i in 0..m {
        let _ = write!(header, ",{prefix}{i}");
    }
    header.push('\n');
    header
}

/// Per-cycle sampling probabilities: `cycle,step,p0..p{m-1}`.
pub fn weights_csv(log: &RunLog) -> String {
    let mut out = csv_header("cycle,step", 'p', log.num_objectives);
    for r in &log.records {
        let _ = writeln!(out, "{},{},{}", r.cycle, r.step, probability_row(&r.probs).join(","));
    }
    out
}

/// Per-cycle realized frequencies `counts / K`: `cycle,step,f0..f{m-1}`.
pub fn frequencies_csv(log: &RunLog) -> String {
    let k = log.config.meta_length as f64;
    let mut out = csv_header("cycle,step", 'f', log.num_objectives);
    for r in &log.records {
        let row: Vec<String> = r.counts.iter().map(|&c| sig6(c as f64 / k)).collect();
        let _ = writeln!(out, "{},{},{}", r.cycle, r.step, row.join(","));
    }
    out
}

pub fn reward_diff_csv(raw: &[f64], smoothed: &[f64]) -> String {
    let mut out = String::from("cycle,diff_raw,diff_smoothed\n");
    for (i, (r, s)) in raw.iter().zip(smoothed).enumerate() {
        let _ = writeln!(out, "{i},{},{}", sig6(*r), sig6(*s));
    }
    out
}

/// Config echo, terminal losses and totals for one run.
pub fn run_summary(log: &RunLog, scenario: &str, scenario_definition: &impl Serialize) -> Result<serde_json::Value> {
    let (weights, frequencies) = if log.records.is_empty() {
        (None, None)
    } else {
        (
            Some(averaged_sampling_weights(log)?),
            Some(averaged_sample_frequencies(log)?),
        )
    };
    let rewards = log.rewards();
    let total_reward: f64 = rewards.iter().sum();
    Ok(json!({
        "config": log.config,
        "scenario": scenario,
        "scenario_definition": scenario_definition,
        "rng": RNG_ALGORITHM,
        "num_objectives": log.num_objectives,
        "cycles": log.records.len(),
        "training_steps": log.records.len() * log.config.meta_length,
        "evaluations": log.records.len() + 1,
        "initial_losses": log.initial_losses,
        "terminal_losses": log.terminal_losses(),
        "terminal_summed_loss": log.terminal_summed_loss(),
        "total_reward": total_reward,
        "mean_entropy": log.mean_entropy(),
        "averaged_sampling_weights": weights,
        "averaged_sample_frequencies": frequencies,
        "final_policy": log.final_policy,
    }))
}

pub fn to_pretty_json(value: &impl Serialize) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Numeric(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}
