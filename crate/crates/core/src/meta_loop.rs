//! The alternating meta-train / meta-test cycle.
//!
//! A run starts with one evaluation at step 0, which seeds the baseline
//! losses (and the loss-based sampler's denominators). Each cycle then samples
//! and trains `K` objectives, evaluates every objective once, turns the
//! evaluation into a reward, and updates the sampler. A trailing partial cycle
//! (`total_steps % K` steps) is not run.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{RuleBasedSampler, RuleKind};
use crate::error::{Error, Result};
use crate::policy::{entropy_of, sample_categorical, ObjectiveId, SamplingPolicy};
use crate::rewards::{update_baseline, BaselineLosses, EvaluationReport, RewardKind};
use crate::rng::{RngState, Stream};

/// A model being trained on several objectives.
///
/// The loop never calls these methods concurrently, and calls them in order:
/// one `evaluate` up front, then per cycle `K` rounds of `train_step` (each
/// followed by `grad_norm` when the gradient-based sampler is active) and one
/// `evaluate`.
pub trait TrainingEnvironment {
    fn num_objectives(&self) -> usize;

    /// One parameter update on `objective`.
    fn train_step(&mut self, objective: ObjectiveId, rng: &mut RngState) -> Result<()>;

    /// Validation losses for all objectives. Must be finite and, for rewards
    /// that divide by losses, strictly positive.
    fn evaluate(&mut self, rng: &mut RngState) -> Result<EvaluationReport>;

    /// Gradient norm of the most recent `train_step` on `objective`. Only the
    /// gradient-based sampler asks for it.
    fn grad_norm(&self, _objective: ObjectiveId) -> Option<f64> {
        None
    }
}

impl<E: TrainingEnvironment + ?Sized> TrainingEnvironment for &mut E {
    fn num_objectives(&self) -> usize {
        (**self).num_objectives()
    }
    fn train_step(&mut self, objective: ObjectiveId, rng: &mut RngState) -> Result<()> {
        (**self).train_step(objective, rng)
    }
    fn evaluate(&mut self, rng: &mut RngState) -> Result<EvaluationReport> {
        (**self).evaluate(rng)
    }
    fn grad_norm(&self, objective: ObjectiveId) -> Option<f64> {
        (**self).grad_norm(objective)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Mometas,
    Uniform,
    GradientBased,
    LossBased,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 4] = [
        SamplerKind::Mometas,
        SamplerKind::Uniform,
        SamplerKind::GradientBased,
        SamplerKind::LossBased,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SamplerKind::Mometas => "mometas",
            SamplerKind::Uniform => "uniform",
            SamplerKind::GradientBased => "gradient_based",
            SamplerKind::LossBased => "loss_based",
        }
    }

    fn rule(self) -> Option<RuleKind> {
        match self {
            SamplerKind::Mometas => None,
            SamplerKind::Uniform => Some(RuleKind::Uniform),
            SamplerKind::GradientBased => Some(RuleKind::GradientBased),
            SamplerKind::LossBased => Some(RuleKind::LossBased),
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SamplerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown sampler `{s}` (expected mometas, uniform, gradient_based or loss_based)"
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaConfig {
    /// Training steps per meta-train phase (K).
    pub meta_length: usize,
    /// Meta step size of the policy update.
    pub beta: f64,
    /// Entropy temperature.
    pub lambda: f64,
    pub total_steps: usize,
    pub sampler: SamplerKind,
    pub reward: RewardKind,
    pub seed: u64,
    /// Symmetric clip applied to the reward before the policy update.
    pub reward_clip: Option<f64>,
}

impl Default for MetaConfig {
    fn default() -> Self {
        Self {
            meta_length: 100,
            beta: 0.1,
            lambda: 3.0,
            total_steps: 10_000,
            sampler: SamplerKind::Mometas,
            reward: RewardKind::RelativeIndividual,
            seed: 0,
            reward_clip: None,
        }
    }
}

impl MetaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.meta_length == 0 {
            return Err(Error::config("meta_length", "must be at least 1"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config("beta", format!("must be positive and finite, got {}", self.beta)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::config(
                "lambda",
                format!("must be non-negative and finite, got {}", self.lambda),
            ));
        }
        if self.total_steps < self.meta_length {
            return Err(Error::config(
                "total_steps",
                format!(
                    "must be at least meta_length ({}), got {}",
                    self.meta_length, self.total_steps
                ),
            ));
        }
        if let Some(clip) = self.reward_clip {
            if !(clip > 0.0 && clip.is_finite()) {
                return Err(Error::config("reward_clip", format!("must be positive, got {clip}")));
            }
        }
        Ok(())
    }

    pub fn num_cycles(&self) -> usize {
        self.total_steps / self.meta_length
    }
}

/// What happened in one meta-train / meta-test cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleRecord {
    pub cycle: usize,
    /// Global training step at the end of the cycle.
    pub step: usize,
    /// Sampling distribution used during the cycle (before its update).
    pub probs: Vec<f64>,
    pub counts: Vec<usize>,
    pub losses: Vec<f64>,
    pub reward: f64,
    /// Entropy of `probs`.
    pub entropy: f64,
    /// Wall time of the meta-test (evaluation, reward and sampler update).
    pub eval_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub config: MetaConfig,
    pub num_objectives: usize,
    /// Step-0 evaluation.
    pub initial_losses: Vec<f64>,
    pub records: Vec<CycleRecord>,
    /// Policy after the last update; `None` for rule-based samplers.
    pub final_policy: Option<SamplingPolicy>,
}

impl RunLog {
    pub fn terminal_losses(&self) -> &[f64] {
        self.records
            .last()
            .map(|r| r.losses.as_slice())
            .unwrap_or(&self.initial_losses)
    }

    pub fn terminal_summed_loss(&self) -> f64 {
        self.terminal_losses().iter().sum()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.reward).collect()
    }

    pub fn mean_entropy(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.entropy).sum::<f64>() / self.records.len() as f64
    }
}

enum Scheduler {
    Meta(SamplingPolicy),
    Rule(RuleBasedSampler),
}

impl Scheduler {
    fn probabilities(&self) -> Vec<f64> {
        match self {
            Scheduler::Meta(policy) => policy.probabilities(),
            Scheduler::Rule(rule) => rule.weights().to_vec(),
        }
    }
}

fn check_report(report: &EvaluationReport, m: usize, reward: RewardKind, cycle: Option<usize>) -> Result<()> {
    let at = match cycle {
        Some(c) => format!("cycle {c}"),
        None => "step-0 evaluation".to_string(),
    };
    if report.len() != m {
        return Err(Error::Environment(format!(
            "{at}: evaluation returned {} losses, expected {m}",
            report.len()
        )));
    }
    if let Some((i, x)) = report.losses().iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(Error::Numeric(format!("{at}: loss of objective {i} is not finite ({x})")));
    }
    if reward == RewardKind::RelativeIndividual {
        if let Some((i, x)) = report.losses().iter().enumerate().find(|(_, &x)| x <= 0.0) {
            return Err(Error::InvalidBaseline(format!(
                "{at}: loss of objective {i} is {x}; relative rewards need positive losses"
            )));
        }
    }
    Ok(())
}

/// Runs the full schedule against `env`.
pub fn run_pretraining<E: TrainingEnvironment + ?Sized>(env: &mut E, config: &MetaConfig) -> Result<RunLog> {
    config.validate()?;
    let m = env.num_objectives();
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 objectives, got {m}")));
    }
    let k = config.meta_length;
    if k < m {
        log::warn!("meta length {k} is smaller than the number of objectives ({m})");
    }

    let mut sampling_rng = RngState::stream(config.seed, Stream::Sampling);
    let mut training_rng = RngState::stream(config.seed, Stream::Training);
    let mut eval_rng = RngState::stream(config.seed, Stream::Evaluation);

    let initial = env.evaluate(&mut eval_rng)?;
    check_report(&initial, m, config.reward, None)?;
    let mut baseline = BaselineLosses::from(&initial);

    let mut scheduler = match config.sampler.rule() {
        None => Scheduler::Meta(SamplingPolicy::new(m)?),
        Some(rule) => Scheduler::Rule(RuleBasedSampler::new(rule, &initial)?),
    };
    let wants_grad_norms = config.sampler == SamplerKind::GradientBased;

    let cycles = config.num_cycles();
    let mut records = Vec::with_capacity(cycles);
    let mut grad_sum = vec![0.0; m];
    let mut grad_n = vec![0usize; m];

    for cycle in 0..cycles {
        let probs = scheduler.probabilities();
        let entropy = entropy_of(&probs);
        let mut counts = vec![0usize; m];
        grad_sum.fill(0.0);
        grad_n.fill(0);

        for _ in 0..k {
            let objective = sample_categorical(&probs, &mut sampling_rng);
            env.train_step(objective, &mut training_rng)?;
            if wants_grad_norms {
                if let Some(g) = env.grad_norm(objective) {
                    grad_sum[objective.0] += g;
                    grad_n[objective.0] += 1;
                }
            }
            counts[objective.0] += 1;
        }

        let started = Instant::now();
        let report = env.evaluate(&mut eval_rng)?;
        check_report(&report, m, config.reward, Some(cycle))?;
        let mut reward = config.reward.compute(&baseline, &report)?;
        if let Some(clip) = config.reward_clip {
            reward = reward.clamp(-clip, clip);
        }

        match &mut scheduler {
            Scheduler::Meta(policy) => {
                *policy = policy
                    .policy_gradient_update_from_counts(&counts, reward, config.beta, config.lambda)
                    .map_err(|e| match e {
                        Error::Numeric(msg) => Error::Numeric(format!("cycle {cycle}: {msg}")),
                        other => other,
                    })?;
            }
            Scheduler::Rule(rule) => {
                let window: Vec<Option<f64>> = grad_sum
                    .iter()
                    .zip(&grad_n)
                    .map(|(&s, &n)| (n > 0).then(|| s / n as f64))
                    .collect();
                rule.refresh(&report, &window)?;
            }
        }
        baseline = update_baseline(&baseline, &report);
        let eval_seconds = started.elapsed().as_secs_f64();

        records.push(CycleRecord {
            cycle,
            step: (cycle + 1) * k,
            probs,
            counts,
            losses: report.losses().to_vec(),
            reward,
            entropy,
            eval_seconds,
        });
    }

    let final_policy = match scheduler {
        Scheduler::Meta(policy) => Some(policy),
        Scheduler::Rule(_) => None,
    };
    Ok(RunLog {
        config: config.clone(),
        num_objectives: m,
        initial_losses: initial.losses().to_vec(),
        records,
        final_policy,
    })
}

/// Per-cycle reward of `a` minus that of `b`.
pub fn reward_difference_series(a: &RunLog, b: &RunLog) -> Result<Vec<f64>> {
    if a.records.len() != b.records.len() {
        return Err(Error::InvalidArgument(format!(
            "run logs have {} and {} cycles",
            a.records.len(),
            b.records.len()
        )));
    }
    Ok(a.records
        .iter()
        .zip(&b.records)
        .map(|(x, y)| x.reward - y.reward)
        .collect())
}

/// Centered moving average; windows are truncated at the ends of the series.
/// An even window reaches one further back than forward.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::InvalidArgument("smoothing window must be at least 1".into()));
    }
    let back = window / 2;
    let forward = window - 1 - back;
    let n = series.len();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(back);
            let hi = (i + forward + 1).min(n);
            series[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect())
}

/// Mean over cycles of the sampling distribution.
pub fn averaged_sampling_weights(log: &RunLog) -> Result<Vec<f64>> {
    mean_rows(log, |r| r.probs.clone())
}

/// Mean over cycles of the realized sample frequencies `counts / K`.
pub fn averaged_sample_frequencies(log: &RunLog) -> Result<Vec<f64>> {
    let k = log.config.meta_length as f64;
    mean_rows(log, |r| r.counts.iter().map(|&c| c as f64 / k).collect())
}

fn mean_rows(log: &RunLog, row: impl Fn(&CycleRecord) -> Vec<f64>) -> Result<Vec<f64>> {
    if log.records.is_empty() {
        return Err(Error::InvalidArgument("run log has no cycles".into()));
    }
    let mut acc = vec![0.0; log.num_objectives];
    for r in &log.records {
        for (a, x) in acc.iter_mut().zip(row(r)) {
            *a += x;
        }
    }
    let n = log.records.len() as f64;
    Ok(acc.into_iter().map(|a| a / n).collect())
}
