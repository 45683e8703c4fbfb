//! Adaptive objective scheduling for multi-objective training.
//!
//! A [`SamplingPolicy`] picks which objective to train on at each step. After
//! every `K` steps the loop evaluates all objectives, scores the change with a
//! [`RewardKind`], and takes an entropy-regularized policy-gradient step. Rule
//! based samplers and a synthetic environment are included for comparison.

pub mod baselines;
pub mod error;
pub mod experiment;
pub mod meta_loop;
pub mod policy;
pub mod rewards;
pub mod rng;
pub mod sim;

pub use baselines::{RuleBasedSampler, RuleKind};
pub use error::{Error, Result};
pub use meta_loop::{run_pretraining, CycleRecord, MetaConfig, RunLog, SamplerKind, TrainingEnvironment};
pub use policy::{ObjectiveId, SamplingPolicy, Trajectory};
pub use rewards::{BaselineLosses, EvaluationReport, RewardKind};
pub use rng::{RngState, Stream};
pub use sim::{scenario_preset, Scenario, SimEnvironment};
