//! The learnable sampling distribution over training objectives.
//!
//! The policy is stored as unconstrained logits; probabilities are their
//! normalized exponentials. This keeps the parameters free for additive
//! gradient steps and gives closed forms for both the score function
//! (`counts - K * p`) and the entropy gradient (`-p_k (ln p_k + H)`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngState;

/// Logits are re-centered to zero mean after every update and then clamped to
/// this magnitude, which keeps every probability above `exp(-600) / m`.
pub const LOGIT_BOUND: f64 = 300.0;

/// Index of one training objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveId(pub usize);

impl ObjectiveId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ObjectiveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for ObjectiveId {
    fn from(index: usize) -> Self {
        ObjectiveId(index)
    }
}

/// The ordered objectives sampled during one meta-train phase.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trajectory {
    samples: Vec<ObjectiveId>,
}

impl Trajectory {
    pub fn with_capacity(len: usize) -> Self {
        Self {
            samples: Vec::with_capacity(len),
        }
    }

    /// Builds a trajectory, checking every entry against `num_objectives`.
    pub fn new(samples: Vec<ObjectiveId>, num_objectives: usize) -> Result<Self> {
        if let Some(bad) = samples.iter().find(|s| s.0 >= num_objectives) {
            return Err(Error::InvalidArgument(format!(
                "objective {bad} out of range for {num_objectives} objectives"
            )));
        }
        Ok(Self { samples })
    }

    pub fn from_indices(indices: &[usize], num_objectives: usize) -> Result<Self> {
        Self::new(indices.iter().copied().map(ObjectiveId).collect(), num_objectives)
    }

    pub fn push(&mut self, objective: ObjectiveId) {
        self.samples.push(objective);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[ObjectiveId] {
        &self.samples
    }

    /// Occurrences of each objective. Entries `>= num_objectives` are an error.
    pub fn counts(&self, num_objectives: usize) -> Result<Vec<usize>> {
        if let Some(bad) = self.samples.iter().find(|s| s.0 >= num_objectives) {
            return Err(Error::InvalidArgument(format!(
                "trajectory entry {bad} out of range for {num_objectives} objectives"
            )));
        }
        let mut counts = vec![0usize; num_objectives];
        for s in &self.samples {
            counts[s.0] += 1;
        }
        Ok(counts)
    }
}

/// Normalized exponentials with max-logit subtraction.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if let Some((i, x)) = logits.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(Error::Numeric(format!("logit {i} is not finite ({x})")));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let total: f64 = out.iter().sum();
    for p in &mut out {
        *p /= total;
    }
    Ok(out)
}

/// `-sum p ln p`, with `0 ln 0 = 0`.
pub fn entropy_of(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Inverse-CDF draw from a probability vector. Consumes one uniform.
pub fn sample_categorical(probs: &[f64], rng: &mut RngState) -> ObjectiveId {
    let u = rng.uniform();
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        last_positive = i;
        if u < cumulative {
            return ObjectiveId(i);
        }
    }
    // rounding left the cumulative sum a hair under 1
    ObjectiveId(last_positive)
}

#[derive(Serialize, Deserialize)]
struct PolicyRecord {
    m: usize,
    logits: Vec<f64>,
}

/// Categorical distribution over `m >= 2` objectives, parametrized by logits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolicyRecord", into = "PolicyRecord")]
pub struct SamplingPolicy {
    logits: Vec<f64>,
}

impl TryFrom<PolicyRecord> for SamplingPolicy {
    type Error = Error;

    fn try_from(record: PolicyRecord) -> Result<Self> {
        if record.m != record.logits.len() {
            return Err(Error::InvalidArgument(format!(
                "policy record declares m = {} but has {} logits",
                record.m,
                record.logits.len()
            )));
        }
        SamplingPolicy::from_logits(record.logits)
    }
}

impl From<SamplingPolicy> for PolicyRecord {
    fn from(policy: SamplingPolicy) -> Self {
        PolicyRecord {
            m: policy.logits.len(),
            logits: policy.logits,
        }
    }
}

impl SamplingPolicy {
    /// Uniform policy over `num_objectives` objectives (all logits zero).
    pub fn new(num_objectives: usize) -> Result<Self> {
        if num_objectives < 2 {
            return Err(Error::InvalidArgument(format!(
                "a sampling policy needs at least 2 objectives, got {num_objectives}"
            )));
        }
        Ok(Self {
            logits: vec![0.0; num_objectives],
        })
    }

    pub fn from_logits(logits: Vec<f64>) -> Result<Self> {
        if logits.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a sampling policy needs at least 2 objectives, got {}",
                logits.len()
            )));
        }
        if let Some((i, x)) = logits.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::Numeric(format!("logit {i} is not finite ({x})")));
        }
        Ok(Self { logits })
    }

    pub fn num_objectives(&self) -> usize {
        self.logits.len()
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn probabilities(&self) -> Vec<f64> {
        softmax(&self.logits).expect("policy logits are finite by construction")
    }

    pub fn sample_objective(&self, rng: &mut RngState) -> ObjectiveId {
        sample_categorical(&self.probabilities(), rng)
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probabilities())
    }

    /// Gradient of the entropy with respect to the logits.
    pub fn entropy_gradient(&self) -> Vec<f64> {
        let (probs, log_probs) = self.probabilities_with_logs();
        entropy_gradient_from_logs(&probs, &log_probs)
    }

    /// Probabilities and their logarithms from a single normalization pass.
    fn probabilities_with_logs(&self) -> (Vec<f64>, Vec<f64>) {
        let max = self.logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut probs: Vec<f64> = self.logits.iter().map(|&x| (x - max).exp()).collect();
        let total: f64 = probs.iter().sum();
        let log_total = total.ln();
        for p in &mut probs {
            *p /= total;
        }
        let log_probs = self.logits.iter().map(|&x| x - max - log_total).collect();
        (probs, log_probs)
    }

    /// Sum over the trajectory of the score function, `counts - K * p`.
    pub fn log_prob_gradient(&self, trajectory: &Trajectory) -> Result<Vec<f64>> {
        if trajectory.is_empty() {
            return Err(Error::InvalidArgument("empty trajectory".into()));
        }
        let counts = trajectory.counts(self.num_objectives())?;
        let k = trajectory.len() as f64;
        Ok(counts
            .iter()
            .zip(self.probabilities())
            .map(|(&c, p)| c as f64 - k * p)
            .collect())
    }

    /// One meta update:
    /// `logits += beta * (reward * grad log P(traj) + lambda * grad H)`.
    pub fn policy_gradient_update(
        &self,
        trajectory: &Trajectory,
        reward: f64,
        beta: f64,
        lambda: f64,
    ) -> Result<Self> {
        let counts = trajectory.counts(self.num_objectives())?;
        self.policy_gradient_update_from_counts(&counts, reward, beta, lambda)
    }

    /// [`policy_gradient_update`](Self::policy_gradient_update) for a
    /// trajectory given by its per-objective counts. The score function only
    /// depends on the counts, so both forms give identical results.
    pub fn policy_gradient_update_from_counts(
        &self,
        counts: &[usize],
        reward: f64,
        beta: f64,
        lambda: f64,
    ) -> Result<Self> {
        if !reward.is_finite() {
            return Err(Error::Numeric(format!("reward is not finite ({reward})")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "meta step size must be positive and finite, got {beta}"
            )));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "entropy temperature must be non-negative and finite, got {lambda}"
            )));
        }
        if counts.len() != self.num_objectives() {
            return Err(Error::InvalidArgument(format!(
                "{} counts for {} objectives",
                counts.len(),
                self.num_objectives()
            )));
        }
        let k: usize = counts.iter().sum();
        if k == 0 {
            return Err(Error::InvalidArgument("empty trajectory".into()));
        }
        let (probs, log_probs) = self.probabilities_with_logs();
        let h = -probs.iter().zip(&log_probs).map(|(p, lp)| p * lp).sum::<f64>();
        let k = k as f64;
        let mut logits: Vec<f64> = (0..counts.len())
            .map(|i| {
                let score = counts[i] as f64 - k * probs[i];
                let entropy_grad = -probs[i] * (log_probs[i] + h);
                self.logits[i] + beta * (reward * score + lambda * entropy_grad)
            })
            .collect();
        if logits.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!(
                "policy update overflowed (reward {reward}, beta {beta})"
            )));
        }
        recenter(&mut logits);
        Ok(Self { logits })
    }
}


/// `-p_k (ln p_k + H)`. Taking `ln p` from the logits keeps it finite even
/// where `p` underflows to zero.
fn entropy_gradient_from_logs(probs: &[f64], log_probs: &[f64]) -> Vec<f64> {
    let h = -probs.iter().zip(log_probs).map(|(p, lp)| p * lp).sum::<f64>();
    probs.iter().zip(log_probs).map(|(p, lp)| -p * (lp + h)).collect()
}

fn recenter(logits: &mut [f64]) {
    let mean = logits.iter().sum::<f64>() / logits.len() as f64;
    for x in logits.iter_mut() {
        *x = (*x - mean).clamp(-LOGIT_BOUND, LOGIT_BOUND);
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;

    fn assert_simplex(p: &[f64]) {
        assert!(p.iter().all(|&x| x > 0.0), "non-positive entry in {p:?}");
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn new_policy_is_uniform() {
        let p = SamplingPolicy::new(5).unwrap().probabilities();
        for x in &p {
            assert_relative_eq!(*x, 0.2, epsilon = 1e-15);
        }
        let p = SamplingPolicy::new(2).unwrap().probabilities();
        assert_eq!(p, vec![0.5, 0.5]);
        assert!(matches!(SamplingPolicy::new(1), Err(Error::InvalidArgument(_))));
        assert!(matches!(SamplingPolicy::new(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn probabilities_examples() {
        let p = SamplingPolicy::from_logits(vec![0.0; 4]).unwrap().probabilities();
        assert_eq!(p, vec![0.25; 4]);

        for c in [-50.0, 0.0, 3.7, 1e3] {
            let p = SamplingPolicy::from_logits(vec![c, c + 3f64.ln()])
                .unwrap()
                .probabilities();
            assert_relative_eq!(p[0], 0.25, epsilon = 1e-12);
            assert_relative_eq!(p[1], 0.75, epsilon = 1e-12);
        }

        // exp(-1000) underflows to 0 in f64, so the small entry comes out as 0
        // rather than overflowing the large one.
        let p = softmax(&[1000.0, 0.0]).unwrap();
        assert_eq!(p[0], 1.0);
        assert!(p[1] >= 0.0 && p[1] < 1e-300);
    }

    #[test]
    fn non_finite_logits_rejected() {
        assert!(matches!(softmax(&[0.0, f64::NAN]), Err(Error::Numeric(_))));
        assert!(matches!(
            SamplingPolicy::from_logits(vec![f64::INFINITY, 0.0]),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn near_deterministic_policy_always_picks_leader() {
        let policy = SamplingPolicy::from_logits(vec![50.0, 0.0]).unwrap();
        let mut rng = RngState::from_seed(3);
        for _ in 0..1000 {
            assert_eq!(policy.sample_objective(&mut rng), ObjectiveId(0));
        }
    }

    #[test]
    fn empirical_frequencies_match() {
        // p = (0.3, 0.7); 100k draws give a standard error of ~0.0014, so a
        // +-0.01 band is ~7 sigma.
        let policy = SamplingPolicy::from_logits(vec![0.0, (0.7f64 / 0.3).ln()]).unwrap();
        let mut rng = RngState::from_seed(11);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| policy.sample_objective(&mut rng) == ObjectiveId(0))
            .count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.3).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let policy = SamplingPolicy::from_logits(vec![0.1, -0.4, 0.9]).unwrap();
        let draw = |seed| {
            let mut rng = RngState::from_seed(seed);
            (0..200).map(|_| policy.sample_objective(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn entropy_examples() {
        let h = SamplingPolicy::new(5).unwrap().entropy();
        assert_relative_eq!(h, 5f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(h, 1.6094, epsilon = 1e-4);

        let h = SamplingPolicy::from_logits(vec![60.0, 0.0, 0.0]).unwrap().entropy();
        assert!(h < 1e-20);

        let h = SamplingPolicy::from_logits(vec![0.0, 3f64.ln()]).unwrap().entropy();
        // -(0.25 ln 0.25 + 0.75 ln 0.75)
        assert_relative_eq!(h, 0.562_335_144_618_808_1, epsilon = 1e-12);
    }

    #[test]
    fn log_prob_gradient_examples() {
        let policy = SamplingPolicy::new(2).unwrap();
        let g = policy
            .log_prob_gradient(&Trajectory::from_indices(&[0, 1], 2).unwrap())
            .unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
        let g = policy
            .log_prob_gradient(&Trajectory::from_indices(&[0, 0], 2).unwrap())
            .unwrap();
        assert_eq!(g, vec![1.0, -1.0]);

        assert!(matches!(
            policy.log_prob_gradient(&Trajectory::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn out_of_range_trajectory_rejected() {
        assert!(Trajectory::from_indices(&[0, 2], 2).is_err());
        let policy = SamplingPolicy::new(2).unwrap();
        let traj = Trajectory::from_indices(&[0, 2], 3).unwrap();
        assert!(matches!(policy.log_prob_gradient(&traj), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn update_examples() {
        let policy = SamplingPolicy::from_logits(vec![0.3, -0.1, -0.2]).unwrap();
        let traj = Trajectory::from_indices(&[0, 2, 2, 1], 3).unwrap();
        let same = policy.policy_gradient_update(&traj, 0.0, 0.5, 0.0).unwrap();
        for (a, b) in same.probabilities().iter().zip(policy.probabilities()) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }

        let uniform = SamplingPolicy::new(4).unwrap();
        let traj = Trajectory::from_indices(&[3, 3, 1], 4).unwrap();
        let same = uniform.policy_gradient_update(&traj, 0.0, 0.5, 1.0).unwrap();
        assert_eq!(same.logits(), uniform.logits());

        let policy = SamplingPolicy::new(2).unwrap();
        let traj = Trajectory::from_indices(&[0, 0], 2).unwrap();
        let next = policy.policy_gradient_update(&traj, 1.0, 0.1, 0.0).unwrap();
        assert_relative_eq!(next.logits()[0], 0.1, epsilon = 1e-15);
        assert_relative_eq!(next.logits()[1], -0.1, epsilon = 1e-15);
        let p = next.probabilities();
        // 1 / (1 + e^-0.2)
        assert_relative_eq!(p[0], 0.549_833_997_312_478, epsilon = 1e-12);
        assert_relative_eq!(p[1], 0.450_166_002_687_522, epsilon = 1e-12);
    }

    #[test]
    fn counts_form_matches_trajectory_form() {
        let policy = SamplingPolicy::from_logits(vec![0.3, -1.1, 0.8]).unwrap();
        let traj = Trajectory::from_indices(&[2, 0, 2, 1, 2, 2, 0], 3).unwrap();
        let counts = traj.counts(3).unwrap();
        let a = policy.policy_gradient_update(&traj, 0.7, 0.1, 2.0).unwrap();
        let b = policy.policy_gradient_update_from_counts(&counts, 0.7, 0.1, 2.0).unwrap();
        assert_eq!(a, b);
        assert!(policy.policy_gradient_update_from_counts(&[0, 0, 0], 0.7, 0.1, 2.0).is_err());
        assert!(policy.policy_gradient_update_from_counts(&[1, 1], 0.7, 0.1, 2.0).is_err());
    }

    #[test]
    fn update_rejects_bad_inputs() {
        let policy = SamplingPolicy::new(2).unwrap();
        let traj = Trajectory::from_indices(&[0], 2).unwrap();
        assert!(matches!(
            policy.policy_gradient_update(&traj, f64::NAN, 0.1, 0.0),
            Err(Error::Numeric(_))
        ));
        assert!(matches!(
            policy.policy_gradient_update(&traj, f64::INFINITY, 0.1, 0.0),
            Err(Error::Numeric(_))
        ));
        assert!(policy.policy_gradient_update(&traj, 1.0, 0.0, 0.0).is_err());
        assert!(policy.policy_gradient_update(&traj, 1.0, 0.1, -1.0).is_err());
    }

    #[test]
    fn huge_rewards_keep_probabilities_positive() {
        let mut policy = SamplingPolicy::new(3).unwrap();
        let traj = Trajectory::from_indices(&[0; 10], 3).unwrap();
        for _ in 0..50 {
            policy = policy.policy_gradient_update(&traj, 1e6, 0.1, 0.0).unwrap();
        }
        assert_simplex(&policy.probabilities());
        assert!(policy.logits().iter().all(|x| x.abs() <= LOGIT_BOUND));
    }

    #[test]
    fn serde_record_shape() {
        let policy = SamplingPolicy::from_logits(vec![0.5, -0.25]).unwrap();
        let json = serde_json::to_string(&policy).unwrap();
        assert_eq!(json, r#"{"m":2,"logits":[0.5,-0.25]}"#);
        let back: SamplingPolicy = serde_json::from_str(&json).unwrap();
        assert_eq!(back, policy);
        assert!(serde_json::from_str::<SamplingPolicy>(r#"{"m":3,"logits":[0.0,1.0]}"#).is_err());
        assert!(serde_json::from_str::<SamplingPolicy>(r#"{"m":1,"logits":[0.0]}"#).is_err());
    }

    #[test]
    fn entropy_ascent_converges() {
        let mut policy = SamplingPolicy::from_logits(vec![0.06, -0.06]).unwrap();
        let target = 2f64.ln();
        assert!(target - policy.entropy() > 1e-3);
        let traj = Trajectory::from_indices(&[0, 1], 2).unwrap();
        let mut prev = policy.entropy();
        for _ in 0..1000 {
            policy = policy.policy_gradient_update(&traj, 0.0, 1e-3, 1.0).unwrap();
            let h = policy.entropy();
            assert!(h >= prev, "entropy decreased: {prev} -> {h}");
            prev = h;
        }
        assert!(target - prev < 1e-3, "gap {}", target - prev);

        // Farther from uniform: still monotone, and the gap shrinks.
        let mut policy = SamplingPolicy::from_logits(vec![1.0, -0.5, 0.2, 0.0, -0.7]).unwrap();
        let traj = Trajectory::from_indices(&[4], 5).unwrap();
        let start_gap = 5f64.ln() - policy.entropy();
        let mut prev = policy.entropy();
        for _ in 0..1000 {
            policy = policy.policy_gradient_update(&traj, 0.0, 1e-3, 1.0).unwrap();
            assert!(policy.entropy() >= prev);
            prev = policy.entropy();
        }
        assert!(5f64.ln() - prev < start_gap);
    }

    fn logits_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0f64..5.0, 2..9)
    }

    proptest! {
        #[test]
        fn probabilities_form_a_simplex(logits in logits_strategy()) {
            let p = SamplingPolicy::from_logits(logits).unwrap().probabilities();
            assert_simplex(&p);
        }

        #[test]
        fn simplex_survives_updates(
            logits in logits_strategy(),
            steps in prop::collection::vec((-1e3f64..1e3, 0usize..64), 1..40),
            beta in 1e-3f64..1.0,
            lambda in 0.0f64..5.0,
        ) {
            let m = logits.len();
            let mut policy = SamplingPolicy::from_logits(logits).unwrap();
            for (reward, seed) in steps {
                let mut rng = RngState::from_seed(seed as u64);
                let mut traj = Trajectory::with_capacity(8);
                for _ in 0..8 {
                    traj.push(policy.sample_objective(&mut rng));
                }
                policy = policy.policy_gradient_update(&traj, reward, beta, lambda).unwrap();
                prop_assert_eq!(policy.num_objectives(), m);
                assert_simplex(&policy.probabilities());
                let h = policy.entropy();
                prop_assert!(h >= 0.0 && h <= (m as f64).ln() + 1e-12);
            }
        }

        #[test]
        fn score_sums_to_zero(logits in logits_strategy(), draws in prop::collection::vec(0usize..1000, 1..30)) {
            let m = logits.len();
            let policy = SamplingPolicy::from_logits(logits).unwrap();
            let traj = Trajectory::from_indices(&draws.iter().map(|d| d % m).collect::<Vec<_>>(), m).unwrap();
            let g = policy.log_prob_gradient(&traj).unwrap();
            prop_assert!(g.iter().sum::<f64>().abs() < 1e-9);
        }

        #[test]
        fn shift_invariance(logits in logits_strategy(), shift in -100.0f64..100.0, seed in 0u64..1000) {
            let m = logits.len();
            let a = SamplingPolicy::from_logits(logits.clone()).unwrap();
            let b = SamplingPolicy::from_logits(logits.iter().map(|x| x + shift).collect()).unwrap();
            for (x, y) in a.probabilities().iter().zip(b.probabilities()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            prop_assert!((a.entropy() - b.entropy()).abs() < 1e-9);

            let (mut ra, mut rb) = (RngState::from_seed(seed), RngState::from_seed(seed));
            let sa: Vec<_> = (0..50).map(|_| a.sample_objective(&mut ra)).collect();
            let sb: Vec<_> = (0..50).map(|_| b.sample_objective(&mut rb)).collect();
            prop_assert_eq!(&sa, &sb);

            let traj = Trajectory::new(sa, m).unwrap();
            let ga = a.log_prob_gradient(&traj).unwrap();
            let gb = b.log_prob_gradient(&traj).unwrap();
            for (x, y) in ga.iter().zip(&gb) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
