//! Rule-based samplers: uniform, gradient-norm proportional and
//! inverse-training-rate proportional.
//!
//! The two proportional rules standardize their signal across objectives,
//! squash it with a logistic (temperature [`LOGISTIC_TEMPERATURE`]) and
//! normalize, so a single very large value cannot starve the other objectives.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rewards::EvaluationReport;

/// Standardized scores are divided by this before the logistic.
pub const LOGISTIC_TEMPERATURE: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Uniform,
    GradientBased,
    LossBased,
}

impl RuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::Uniform => "uniform",
            RuleKind::GradientBased => "gradient_based",
            RuleKind::LossBased => "loss_based",
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [RuleKind::Uniform, RuleKind::GradientBased, RuleKind::LossBased]
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown rule-based sampler `{s}`")))
    }
}

pub fn uniform_weights(num_objectives: usize) -> Result<Vec<f64>> {
    if num_objectives < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 objectives, got {num_objectives}"
        )));
    }
    Ok(vec![1.0 / num_objectives as f64; num_objectives])
}

/// Weights increasing in each objective's gradient norm.
pub fn gradient_based_weights(grad_norms: &[f64]) -> Result<Vec<f64>> {
    if grad_norms.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 objectives, got {}",
            grad_norms.len()
        )));
    }
    if let Some((i, g)) = grad_norms.iter().enumerate().find(|(_, g)| !g.is_finite()) {
        return Err(Error::Numeric(format!("gradient norm {i} is not finite ({g})")));
    }
    if let Some((i, g)) = grad_norms.iter().enumerate().find(|(_, &g)| g < 0.0) {
        return Err(Error::InvalidArgument(format!("gradient norm {i} is negative ({g})")));
    }
    Ok(squashed_proportions(grad_norms))
}

/// Weights increasing in the inverse training rate `current / initial`.
pub fn loss_based_weights(current: &[f64], initial: &[f64]) -> Result<Vec<f64>> {
    if current.len() != initial.len() {
        return Err(Error::InvalidArgument(format!(
            "{} current losses but {} initial losses",
            current.len(),
            initial.len()
        )));
    }
    if current.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 objectives, got {}",
            current.len()
        )));
    }
    for (name, v) in [("current", current), ("initial", initial)] {
        if let Some((i, x)) = v.iter().enumerate().find(|(_, &x)| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "{name} loss of objective {i} must be positive and finite, got {x}"
            )));
        }
    }
    let rates: Vec<f64> = current.iter().zip(initial).map(|(a, l0)| a / l0).collect();
    Ok(squashed_proportions(&rates))
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn squashed_proportions(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let squashed: Vec<f64> = if std <= 1e-12 * scale || std == 0.0 {
        vec![1.0; values.len()]
    } else {
        values
            .iter()
            .map(|v| logistic((v - mean) / std / LOGISTIC_TEMPERATURE))
            .collect()
    };
    let total: f64 = squashed.iter().sum();
    squashed.iter().map(|s| s / total).collect()
}

/// A rule-based sampler's state between refreshes.
#[derive(Clone, Debug)]
pub struct RuleBasedSampler {
    kind: RuleKind,
    weights: Vec<f64>,
    initial_losses: Option<Vec<f64>>,
    grad_norms: Vec<Option<f64>>,
}

impl RuleBasedSampler {
    /// `initial` is the step-0 evaluation; the loss-based rule keeps it as its
    /// fixed denominators.
    pub fn new(kind: RuleKind, initial: &EvaluationReport) -> Result<Self> {
        let m = initial.len();
        let weights = uniform_weights(m)?;
        let initial_losses = match kind {
            RuleKind::LossBased => {
                // validates positivity of the denominators up front
                loss_based_weights(initial.losses(), initial.losses())?;
                Some(initial.losses().to_vec())
            }
            _ => None,
        };
        Ok(Self {
            kind,
            weights,
            initial_losses,
            grad_norms: vec![None; m],
        })
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn initial_losses(&self) -> Option<&[f64]> {
        self.initial_losses.as_deref()
    }

    /// Recomputes the weights at a meta-test boundary.
    ///
    /// `window_grad_norms[i]` is the mean gradient norm of objective `i` over
    /// the steps it was trained in the last window, or `None` if it was not
    /// trained. Unobserved objectives keep their previous norm; objectives that
    /// have never been observed borrow the largest observed norm.
    pub fn refresh(&mut self, report: &EvaluationReport, window_grad_norms: &[Option<f64>]) -> Result<()> {
        match self.kind {
            RuleKind::Uniform => {}
            RuleKind::LossBased => {
                let initial = self.initial_losses.as_ref().expect("loss-based sampler keeps initial losses");
                self.weights = loss_based_weights(report.losses(), initial)?;
            }
            RuleKind::GradientBased => {
                if window_grad_norms.len() != self.grad_norms.len() {
                    return Err(Error::InvalidArgument(format!(
                        "{} gradient norms for {} objectives",
                        window_grad_norms.len(),
                        self.grad_norms.len()
                    )));
                }
                for (slot, fresh) in self.grad_norms.iter_mut().zip(window_grad_norms) {
                    if fresh.is_some() {
                        *slot = *fresh;
                    }
                }
                let Some(largest) = self.grad_norms.iter().flatten().copied().reduce(f64::max) else {
                    return Ok(());
                };
                let filled: Vec<f64> = self.grad_norms.iter().map(|g| g.unwrap_or(largest)).collect();
                self.weights = gradient_based_weights(&filled)?;
            }
        }
        Ok(())
    }
}
