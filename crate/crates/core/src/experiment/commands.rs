use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::ExperimentConfig;
use super::output::{
    frequencies_csv, reward_diff_csv, run_summary, sig6, to_jsonl, to_pretty_json, weights_csv, write_file,
};
use crate::error::{Error, Result};
use crate::meta_loop::{moving_average, reward_difference_series, run_pretraining, MetaConfig, RunLog, SamplerKind};
use crate::sim::SimEnvironment;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Default)]
pub struct CompareOptions {
    pub config: PathBuf,
    pub reference: Option<String>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Default)]
pub struct SweepOptions {
    pub config: PathBuf,
    pub lambdas: Vec<f64>,
    pub meta_lengths: Vec<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplerSummary {
    /// `{position}_{sampler}`; positions keep repeated samplers apart.
    pub label: String,
    pub sampler: SamplerKind,
    pub mean_terminal_summed_loss: f64,
    /// Sample standard deviation over seeds.
    pub std_terminal_summed_loss: f64,
    pub mean_terminal_losses: Vec<f64>,
    /// This sampler's terminal summed loss minus the reference's, per seed.
    pub paired_differences: Vec<f64>,
    /// Share of seeds with a lower terminal summed loss than the reference;
    /// ties count one half.
    pub win_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonSummary {
    pub scenario: String,
    pub seeds: Vec<u64>,
    pub reference: String,
    pub meta: MetaConfig,
    pub samplers: Vec<SamplerSummary>,
}

fn unix_time() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn simulate(config: &ExperimentConfig, meta: &MetaConfig) -> Result<RunLog> {
    let mut env = SimEnvironment::new(config.resolved_scenario.clone());
    run_pretraining(&mut env, meta)
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    config.apply_env_seed()?;
    Ok(config)
}

/// Runs the first listed sampler on the first seed and writes its outputs.
pub fn cmd_run(opts: &RunOptions) -> Result<PathBuf> {
    let config = load(&opts.config)?;
    let seed = opts.seed.unwrap_or(config.seeds[0]);
    let meta = config.meta_for(config.samplers[0], seed);
    let out = opts.out.clone().unwrap_or_else(|| config.output_dir.clone());

    let started = Instant::now();
    let log = simulate(&config, &meta)?;
    let wall = started.elapsed().as_secs_f64();
    log::info!(
        "{} on {} (seed {seed}): {} cycles, terminal loss {}",
        meta.sampler,
        config.scenario,
        log.records.len(),
        sig6(log.terminal_summed_loss())
    );

    write_file(&out.join("runlog.jsonl"), &to_jsonl(&log)?)?;
    write_file(&out.join("weights.csv"), &weights_csv(&log))?;
    write_file(&out.join("frequencies.csv"), &frequencies_csv(&log))?;
    let summary = run_summary(&log, &config.scenario, &config.resolved_scenario)?;
    write_file(&out.join("summary.json"), &to_pretty_json(&summary)?)?;
    let eval_seconds: f64 = log.records.iter().map(|r| r.eval_seconds).sum();
    let meta_json = json!({
        "finished_at_unix": unix_time(),
        "wall_seconds": wall,
        "meta_test_seconds": eval_seconds,
        "version": env!("CARGO_PKG_VERSION"),
    });
    write_file(&out.join("meta.json"), &to_pretty_json(&meta_json)?)?;
    Ok(out)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    (xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Runs every (sampler, seed) pair of `config` and writes the comparison into `out`.
fn compare_into(config: &ExperimentConfig, out: &Path) -> Result<ComparisonSummary> {
    if config.samplers.len() < 2 {
        return Err(Error::config("samplers", "comparison needs at least 2 samplers"));
    }
    if config.seeds.len() < 2 {
        return Err(Error::config("seeds", "comparison needs at least 2 seeds"));
    }
    let reference = config.reference_index()?;

    let jobs: Vec<(usize, SamplerKind, u64)> = config
        .samplers
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| config.seeds.iter().map(move |&seed| (i, s, seed)))
        .collect();
    let logs = jobs
        .par_iter()
        .map(|&(_, sampler, seed)| simulate(config, &config.meta_for(sampler, seed)))
        .collect::<Result<Vec<RunLog>>>()?;

    let n_seeds = config.seeds.len();
    for (&(i, sampler, seed), log) in jobs.iter().zip(&logs) {
        let name = format!("runs/{i}_{sampler}_seed{seed}.jsonl");
        write_file(&out.join(name), &to_jsonl(log)?)?;
    }
    let by_sampler: Vec<&[RunLog]> = logs.chunks(n_seeds).collect();
    let label = |i: usize| format!("{i}_{}", config.samplers[i]);

    let ref_totals: Vec<f64> = by_sampler[reference].iter().map(RunLog::terminal_summed_loss).collect();
    let samplers = by_sampler
        .iter()
        .enumerate()
        .map(|(i, runs)| {
            let totals: Vec<f64> = runs.iter().map(RunLog::terminal_summed_loss).collect();
            let m = config.num_objectives();
            let mean_terminal_losses = (0..m)
                .map(|k| runs.iter().map(|r| r.terminal_losses()[k]).sum::<f64>() / runs.len() as f64)
                .collect();
            let paired_differences: Vec<f64> = totals.iter().zip(&ref_totals).map(|(a, b)| a - b).collect();
            let score: f64 = paired_differences
                .iter()
                .map(|&d| match d.partial_cmp(&0.0) {
                    Some(std::cmp::Ordering::Less) => 1.0,
                    Some(std::cmp::Ordering::Equal) => 0.5,
                    _ => 0.0,
                })
                .sum();
            SamplerSummary {
                label: label(i),
                sampler: config.samplers[i],
                mean_terminal_summed_loss: mean(&totals),
                std_terminal_summed_loss: sample_std(&totals),
                mean_terminal_losses,
                win_rate: score / n_seeds as f64,
                paired_differences,
            }
        })
        .collect();

    // Reward difference of the first non-reference sampler, averaged over seeds.
    let challenger = if reference == 0 { 1 } else { 0 };
    let cycles = config.meta.num_cycles();
    let mut raw = vec![0.0; cycles];
    for (a, b) in by_sampler[challenger].iter().zip(by_sampler[reference]) {
        for (acc, d) in raw.iter_mut().zip(reward_difference_series(a, b)?) {
            *acc += d / n_seeds as f64;
        }
    }
    let smoothed = moving_average(&raw, config.compare.smoothing_window)?;
    write_file(&out.join("reward_diff.csv"), &reward_diff_csv(&raw, &smoothed))?;

    let summary = ComparisonSummary {
        scenario: config.scenario.clone(),
        seeds: config.seeds.clone(),
        reference: label(reference),
        meta: config.meta.clone(),
        samplers,
    };
    write_file(&out.join("comparison.json"), &to_pretty_json(&summary)?)?;
    Ok(summary)
}

fn with_reference(mut config: ExperimentConfig, reference: Option<&str>) -> Result<ExperimentConfig> {
    if let Some(raw) = reference {
        let kind: SamplerKind = raw.parse().map_err(|e: Error| Error::config("--ref", e.to_string()))?;
        config.compare.reference = Some(kind);
    }
    Ok(config)
}

pub fn cmd_compare(opts: &CompareOptions) -> Result<ComparisonSummary> {
    let config = with_reference(load(&opts.config)?, opts.reference.as_deref())?;
    let out = opts.out.clone().unwrap_or_else(|| config.output_dir.clone());
    let started = Instant::now();
    let summary = compare_into(&config, &out)?;
    for s in &summary.samplers {
        log::info!(
            "{}: mean terminal loss {} (std {}), win rate {} vs {}",
            s.label,
            sig6(s.mean_terminal_summed_loss),
            sig6(s.std_terminal_summed_loss),
            s.win_rate,
            summary.reference
        );
    }
    let meta_json = json!({
        "finished_at_unix": unix_time(),
        "wall_seconds": started.elapsed().as_secs_f64(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    write_file(&out.join("meta.json"), &to_pretty_json(&meta_json)?)?;
    Ok(summary)
}

/// One cell of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub lambda: f64,
    pub meta_length: usize,
    pub dir: PathBuf,
    pub summary: ComparisonSummary,
}

/// Runs a comparison for every (lambda, meta length) cell. An axis left empty
/// stays at the config's value, but at least one axis must be given.
pub fn cmd_sweep(opts: &SweepOptions) -> Result<Vec<SweepCell>> {
    if opts.lambdas.is_empty() && opts.meta_lengths.is_empty() {
        return Err(Error::config("grid", "give at least one of --lambda or --meta-length"));
    }
    let config = load(&opts.config)?;
    let out = opts.out.clone().unwrap_or_else(|| config.output_dir.clone());
    let lambdas = if opts.lambdas.is_empty() {
        vec![config.meta.lambda]
    } else {
        opts.lambdas.clone()
    };
    let meta_lengths = if opts.meta_lengths.is_empty() {
        vec![config.meta.meta_length]
    } else {
        opts.meta_lengths.clone()
    };

    let started = Instant::now();
    let mut cells = Vec::with_capacity(lambdas.len() * meta_lengths.len());
    let mut table = String::from(
        "cell,lambda,meta_length,sampler,mean_terminal_summed_loss,std_terminal_summed_loss,win_rate\n",
    );
    for &lambda in &lambdas {
        for &meta_length in &meta_lengths {
            let mut cell_config = config.clone();
            cell_config.meta.lambda = lambda;
            cell_config.meta.meta_length = meta_length;
            cell_config.meta.validate().map_err(|e| match e {
                Error::Config { key, message } => Error::config(format!("grid.{key}"), message),
                other => other,
            })?;
            let index = cells.len();
            let dir = out.join(format!("cell{index}_lambda{}_k{meta_length}", sig6(lambda)));
            let summary = compare_into(&cell_config, &dir)?;
            for s in &summary.samplers {
                table.push_str(&format!(
                    "{index},{},{meta_length},{},{},{},{}\n",
                    sig6(lambda),
                    s.label,
                    sig6(s.mean_terminal_summed_loss),
                    sig6(s.std_terminal_summed_loss),
                    sig6(s.win_rate)
                ));
            }
            cells.push(SweepCell {
                lambda,
                meta_length,
                dir,
                summary,
            });
        }
    }
    write_file(&out.join("grid_summary.csv"), &table)?;
    let meta_json = json!({
        "finished_at_unix": unix_time(),
        "wall_seconds": started.elapsed().as_secs_f64(),
        "cells": cells.len(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    write_file(&out.join("meta.json"), &to_pretty_json(&meta_json)?)?;
    Ok(cells)
}
