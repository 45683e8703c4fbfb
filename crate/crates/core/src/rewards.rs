//! Meta-test rewards and the per-objective baseline losses they compare against.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Validation losses for every objective from one meta-test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EvaluationReport {
    losses: Vec<f64>,
}

impl EvaluationReport {
    pub fn new(losses: Vec<f64>) -> Result<Self> {
        if let Some((i, x)) = losses.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::Numeric(format!("loss of objective {i} is not finite ({x})")));
        }
        Ok(Self { losses })
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.losses.iter().sum()
    }
}

/// The previous meta-test's losses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BaselineLosses {
    losses: Vec<f64>,
}

impl BaselineLosses {
    pub fn new(losses: Vec<f64>) -> Result<Self> {
        EvaluationReport::new(losses).map(Self::from)
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }
}

impl From<EvaluationReport> for BaselineLosses {
    fn from(report: EvaluationReport) -> Self {
        Self {
            losses: report.losses,
        }
    }
}

impl From<&EvaluationReport> for BaselineLosses {
    fn from(report: &EvaluationReport) -> Self {
        Self {
            losses: report.losses.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    /// Sum of relative loss drops, `sum (b - a) / b`.
    RelativeIndividual,
    /// Sum of `sign(b - a)`.
    HardIndividual,
    /// Negated total loss, `-sum a`.
    OverallLoss,
}

impl RewardKind {
    pub const ALL: [RewardKind; 3] = [
        RewardKind::RelativeIndividual,
        RewardKind::HardIndividual,
        RewardKind::OverallLoss,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RewardKind::RelativeIndividual => "relative_individual",
            RewardKind::HardIndividual => "hard_individual",
            RewardKind::OverallLoss => "overall_loss",
        }
    }

    pub fn compute(self, baseline: &BaselineLosses, report: &EvaluationReport) -> Result<f64> {
        match self {
            RewardKind::RelativeIndividual => relative_individual_reward(baseline, report),
            RewardKind::HardIndividual => hard_individual_reward(baseline, report),
            RewardKind::OverallLoss => overall_loss_reward(baseline, report),
        }
    }
}

impl fmt::Display for RewardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RewardKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RewardKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown reward kind `{s}` (expected relative_individual, hard_individual or overall_loss)"
                ))
            })
    }
}

fn check_lengths(baseline: &BaselineLosses, report: &EvaluationReport) -> Result<()> {
    if baseline.losses.len() != report.losses.len() {
        return Err(Error::InvalidArgument(format!(
            "baseline has {} objectives but report has {}",
            baseline.losses.len(),
            report.losses.len()
        )));
    }
    Ok(())
}

pub fn relative_individual_reward(baseline: &BaselineLosses, report: &EvaluationReport) -> Result<f64> {
    check_lengths(baseline, report)?;
    if let Some((i, b)) = baseline.losses.iter().enumerate().find(|(_, &b)| b <= 0.0) {
        return Err(Error::InvalidBaseline(format!(
            "baseline loss of objective {i} is {b}; relative drops need a positive baseline"
        )));
    }
    Ok(baseline
        .losses
        .iter()
        .zip(&report.losses)
        .map(|(b, a)| (b - a) / b)
        .sum())
}

/// `+1` for each loss that went down, `-1` for each that went up, `0` on ties.
pub fn hard_individual_reward(baseline: &BaselineLosses, report: &EvaluationReport) -> Result<f64> {
    check_lengths(baseline, report)?;
    Ok(baseline
        .losses
        .iter()
        .zip(&report.losses)
        .map(|(b, a)| match a.partial_cmp(b) {
            Some(std::cmp::Ordering::Less) => 1.0,
            Some(std::cmp::Ordering::Greater) => -1.0,
            _ => 0.0,
        })
        .sum())
}

/// The baseline is ignored; it is taken only so all reward kinds share a signature.
pub fn overall_loss_reward(baseline: &BaselineLosses, report: &EvaluationReport) -> Result<f64> {
    check_lengths(baseline, report)?;
    Ok(-report.total())
}

pub fn update_baseline(_baseline: &BaselineLosses, report: &EvaluationReport) -> BaselineLosses {
    BaselineLosses::from(report)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;

    fn b(v: &[f64]) -> BaselineLosses {
        BaselineLosses::new(v.to_vec()).unwrap()
    }
    fn a(v: &[f64]) -> EvaluationReport {
        EvaluationReport::new(v.to_vec()).unwrap()
    }

    #[test]
    fn relative_examples() {
        assert_eq!(relative_individual_reward(&b(&[1.0, 2.0]), &a(&[1.0, 2.0])).unwrap(), 0.0);
        let r = relative_individual_reward(&b(&[1.0, 2.0]), &a(&[0.9, 2.2])).unwrap();
        assert_relative_eq!(r, 0.0, epsilon = 1e-12);
        assert_eq!(relative_individual_reward(&b(&[2.0]), &a(&[1.0])).unwrap(), 0.5);
    }

    #[test]
    fn relative_rejects_nonpositive_baseline() {
        for bad in [0.0, -1.0] {
            let err = relative_individual_reward(&b(&[1.0, bad]), &a(&[1.0, 1.0])).unwrap_err();
            assert!(matches!(err, Error::InvalidBaseline(_)));
        }
    }

    #[test]
    fn hard_examples() {
        assert_eq!(hard_individual_reward(&b(&[1.0, 2.0]), &a(&[0.9, 2.2])).unwrap(), 0.0);
        assert_eq!(
            hard_individual_reward(&b(&[1.0, 2.0, 3.0]), &a(&[0.5, 1.9, 2.0])).unwrap(),
            3.0
        );
        assert_eq!(hard_individual_reward(&b(&[1.5, 0.2]), &a(&[1.5, 0.2])).unwrap(), 0.0);
    }

    #[test]
    fn overall_examples() {
        assert_eq!(overall_loss_reward(&b(&[9.0, 9.0]), &a(&[1.0, 2.0])).unwrap(), -3.0);
        assert_eq!(overall_loss_reward(&b(&[1.0, 1.0]), &a(&[0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(overall_loss_reward(&b(&[1.0]), &a(&[0.5])).unwrap(), -0.5);
    }

    #[test]
    fn baseline_update_is_last_write_wins() {
        let next = update_baseline(&b(&[1.0, 1.0]), &a(&[0.5, 2.0]));
        assert_eq!(next.losses(), &[0.5, 2.0]);
        let chained = update_baseline(&update_baseline(&next, &a(&[0.7, 0.1])), &a(&[0.3, 0.4]));
        assert_eq!(chained.losses(), &[0.3, 0.4]);

        let poisoned = update_baseline(&chained, &a(&[0.0, 0.4]));
        assert!(matches!(
            RewardKind::RelativeIndividual.compute(&poisoned, &a(&[0.1, 0.1])),
            Err(Error::InvalidBaseline(_))
        ));
    }

    #[test]
    fn length_mismatch_rejected() {
        for kind in RewardKind::ALL {
            assert!(kind.compute(&b(&[1.0, 1.0]), &a(&[1.0])).is_err());
        }
    }

    #[test]
    fn non_finite_losses_rejected() {
        assert!(matches!(EvaluationReport::new(vec![1.0, f64::NAN]), Err(Error::Numeric(_))));
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in RewardKind::ALL {
            assert_eq!(kind.as_str().parse::<RewardKind>().unwrap(), kind);
            assert_eq!(serde_json::to_string(&kind).unwrap(), format!("\"{kind}\""));
        }
        assert!("relative".parse::<RewardKind>().is_err());
    }

    fn pair_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..8).prop_flat_map(|m| {
            (
                prop::collection::vec(0.01f64..10.0, m),
                prop::collection::vec(0.01f64..10.0, m),
            )
        })
    }

    proptest! {
        #[test]
        fn sign_coherence((base, scale) in pair_strategy()) {
            let m = base.len() as f64;
            let down: Vec<f64> = base.iter().zip(&scale).map(|(x, s)| x / (1.0 + s)).collect();
            let up: Vec<f64> = base.iter().zip(&scale).map(|(x, s)| x * (1.0 + s)).collect();
            prop_assert!(relative_individual_reward(&b(&base), &a(&down)).unwrap() > 0.0);
            prop_assert_eq!(hard_individual_reward(&b(&base), &a(&down)).unwrap(), m);
            prop_assert!(relative_individual_reward(&b(&base), &a(&up)).unwrap() < 0.0);
            prop_assert!(hard_individual_reward(&b(&base), &a(&up)).unwrap() < 0.0);
        }

        #[test]
        fn bounds((base, cur) in pair_strategy()) {
            let m = base.len() as f64;
            let hard = hard_individual_reward(&b(&base), &a(&cur)).unwrap();
            prop_assert!((-m..=m).contains(&hard));
            prop_assert!(relative_individual_reward(&b(&base), &a(&cur)).unwrap() <= m);
        }

        #[test]
        fn permutation_equivariance((base, cur) in pair_strategy(), rot in 0usize..8) {
            let m = base.len();
            let k = rot % m;
            let mut pb = base.clone();
            let mut pc = cur.clone();
            pb.rotate_left(k);
            pc.rotate_left(k);
            let r1 = relative_individual_reward(&b(&base), &a(&cur)).unwrap();
            let r2 = relative_individual_reward(&b(&pb), &a(&pc)).unwrap();
            prop_assert!((r1 - r2).abs() < 1e-12);
            prop_assert_eq!(
                hard_individual_reward(&b(&base), &a(&cur)).unwrap(),
                hard_individual_reward(&b(&pb), &a(&pc)).unwrap()
            );
        }
    }
}
