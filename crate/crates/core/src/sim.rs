//! Synthetic multi-objective trainer with closed-form loss dynamics.
//!
//! Each objective has a latent loss `L_i` above a floor `c_i`. A training step
//! on objective `j` scales every objective's excess loss by
//! `exp(-A[i][j] + sigma_i * xi_i)`. A positive `A[i][j]` means training `j`
//! helps `i`; a negative entry means it hurts. With zero noise, steps commute,
//! so the latent loss after `n_j` steps on each `j` is
//! `c_i + (L0_i - c_i) * exp(-sum_j A[i][j] n_j)`.
//!
//! The gradient norm reported to the gradient-based sampler is the magnitude
//! of the trained objective's own loss drop on its most recent step. This is a
//! simulation-only proxy.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meta_loop::TrainingEnvironment;
use crate::policy::ObjectiveId;
use crate::rewards::EvaluationReport;
use crate::rng::RngState;

/// Smallest allowed loss floor. Relative rewards divide by losses, so the
/// floor keeps them strictly positive.
pub const MIN_FLOOR: f64 = 0.01;

/// Cap on `L_i - c_i`, reached only under sustained negative transfer.
pub const MAX_EXCESS_LOSS: f64 = 1e12;

pub const PRESET_NAMES: [&str; 4] = ["independent", "negative_transfer", "easy_objective", "dominant"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticObjectiveSpec {
    pub l0: f64,
    pub floor: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub eval_noise_sigma: f64,
}

impl SyntheticObjectiveSpec {
    pub fn new(l0: f64, floor: f64, noise_sigma: f64, eval_noise_sigma: f64) -> Result<Self> {
        let spec = Self {
            l0,
            floor,
            noise_sigma,
            eval_noise_sigma,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.l0, self.floor, self.noise_sigma, self.eval_noise_sigma]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::InvalidArgument("objective parameters must be finite".into()));
        }
        if self.floor < MIN_FLOOR {
            return Err(Error::InvalidArgument(format!(
                "floor {} is below the minimum {MIN_FLOOR}",
                self.floor
            )));
        }
        if self.l0 <= self.floor {
            return Err(Error::InvalidArgument(format!(
                "initial loss {} must exceed the floor {}",
                self.l0, self.floor
            )));
        }
        if self.noise_sigma < 0.0 || self.eval_noise_sigma < 0.0 {
            return Err(Error::InvalidArgument("noise levels must be non-negative".into()));
        }
        Ok(())
    }
}

/// `A[i][j]`: log-excess-loss decay of objective `i` per step on objective `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct TransferMatrix {
    m: usize,
    entries: Vec<f64>,
}

impl TransferMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != m) {
            return Err(Error::InvalidArgument(format!(
                "transfer row {bad} has {} entries, expected {m}",
                rows[bad].len()
            )));
        }
        Self::from_row_major(m, rows.into_iter().flatten().collect())
    }

    pub fn from_row_major(m: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != m * m {
            return Err(Error::InvalidArgument(format!(
                "transfer matrix needs {} entries for {m} objectives, got {}",
                m * m,
                entries.len()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("transfer entries must be finite".into()));
        }
        Ok(Self { m, entries })
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            entries: vec![0.0; m * m],
        }
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let m = values.len();
        let mut a = Self::zeros(m);
        for (i, &v) in values.iter().enumerate() {
            a.set(i, i, v);
        }
        Self::from_row_major(m, a.entries)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.m + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.m + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.m).map(<[f64]>::to_vec).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for TransferMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<TransferMatrix> for Vec<Vec<f64>> {
    fn from(a: TransferMatrix) -> Self {
        a.rows()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub losses: Vec<f64>,
    pub step: u64,
}

impl SimState {
    pub fn initial(specs: &[SyntheticObjectiveSpec]) -> Self {
        Self {
            losses: specs.iter().map(|s| s.l0).collect(),
            step: 0,
        }
    }
}

/// One training step on `objective`.
pub fn sim_train_step(
    state: &SimState,
    specs: &[SyntheticObjectiveSpec],
    transfer: &TransferMatrix,
    objective: ObjectiveId,
    rng: &mut RngState,
) -> SimState {
    let j = objective.index();
    let losses = state
        .losses
        .iter()
        .zip(specs)
        .enumerate()
        .map(|(i, (&l, spec))| {
            let noise = spec.noise_sigma * rng.standard_normal();
            let excess = ((l - spec.floor) * (-transfer.get(i, j) + noise).exp()).min(MAX_EXCESS_LOSS);
            spec.floor + excess.max(0.0)
        })
        .collect();
    SimState {
        losses,
        step: state.step + 1,
    }
}

/// Noisy validation losses. Each objective's multiplicative noise is averaged
/// over `batches` draws; the result never goes below the floor.
pub fn sim_evaluate(
    state: &SimState,
    specs: &[SyntheticObjectiveSpec],
    batches: usize,
    rng: &mut RngState,
) -> EvaluationReport {
    let batches = batches.max(1);
    let losses = state
        .losses
        .iter()
        .zip(specs)
        .map(|(&l, spec)| {
            let factor = (0..batches)
                .map(|_| (spec.eval_noise_sigma * rng.standard_normal()).exp())
                .sum::<f64>()
                / batches as f64;
            spec.floor.max(l * factor)
        })
        .collect();
    EvaluationReport::new(losses).expect("simulated losses are finite")
}

/// A complete synthetic environment description.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    pub objectives: Vec<SyntheticObjectiveSpec>,
    pub transfer: TransferMatrix,
    /// Validation batches averaged per evaluation.
    pub eval_batches: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TransferInput {
    Nested(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    objectives: Vec<SyntheticObjectiveSpec>,
    transfer: TransferInput,
    #[serde(default = "one")]
    eval_batches: usize,
}

fn one() -> usize {
    1
}

impl Scenario {
    pub fn new(objectives: Vec<SyntheticObjectiveSpec>, transfer: TransferMatrix) -> Result<Self> {
        let scenario = Self {
            objectives,
            transfer,
            eval_batches: 1,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn num_objectives(&self) -> usize {
        self.objectives.len()
    }

    pub fn with_eval_batches(mut self, batches: usize) -> Self {
        self.eval_batches = batches;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.objectives.len() < 2 {
            return Err(Error::config("objectives", "need at least 2 objectives"));
        }
        for (i, spec) in self.objectives.iter().enumerate() {
            spec.validate()
                .map_err(|e| Error::config(format!("objectives[{i}]"), e.to_string()))?;
        }
        if self.transfer.dim() != self.objectives.len() {
            return Err(Error::config(
                "transfer",
                format!(
                    "matrix is {0}x{0} but there are {1} objectives",
                    self.transfer.dim(),
                    self.objectives.len()
                ),
            ));
        }
        if self.eval_batches == 0 {
            return Err(Error::config("eval_batches", "must be at least 1"));
        }
        Ok(())
    }

    /// Parses the TOML scenario format.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| Error::config("scenario", e.message().to_string()))?;
        let m = file.objectives.len();
        let transfer = match file.transfer {
            TransferInput::Nested(rows) => TransferMatrix::from_rows(rows),
            TransferInput::Flat(entries) => TransferMatrix::from_row_major(m, entries),
        }
        .map_err(|e| Error::config("transfer", e.to_string()))?;
        let scenario = Self {
            objectives: file.objectives,
            transfer,
            eval_batches: file.eval_batches,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// A preset name, or else a path to a scenario file.
    pub fn resolve(name_or_path: &str, base_dir: Option<&Path>) -> Result<Self> {
        if PRESET_NAMES.contains(&name_or_path) {
            return scenario_preset(name_or_path);
        }
        let path = match base_dir {
            Some(dir) if Path::new(name_or_path).is_relative() => dir.join(name_or_path),
            _ => Path::new(name_or_path).to_path_buf(),
        };
        if !path.exists() {
            return Err(Error::config(
                "scenario",
                format!(
                    "`{name_or_path}` is neither a preset ({}) nor an existing file",
                    PRESET_NAMES.join(", ")
                ),
            ));
        }
        Self::from_path(&path)
    }
}

fn uniform_specs(m: usize, l0: f64, floor: f64) -> Vec<SyntheticObjectiveSpec> {
    let spec = SyntheticObjectiveSpec {
        l0,
        floor,
        noise_sigma: 0.001,
        eval_noise_sigma: 0.005,
    };
    vec![spec; m]
}

/// Built-in scenarios.
///
/// * `independent`: five objectives, each helped only by its own steps.
/// * `negative_transfer`: four mutually helpful objectives and a fifth whose
///   steps raise the others' losses.
/// * `easy_objective`: objective 4 decays ten times faster than the rest and
///   slightly hurts them.
/// * `dominant`: three objectives; only steps on objective 0 lower any loss.
pub fn scenario_preset(name: &str) -> Result<Scenario> {
    let (specs, transfer) = match name {
        "independent" => (uniform_specs(5, 2.0, 0.1), TransferMatrix::diagonal(&[0.001; 5])?),
        "negative_transfer" => {
            let m = 5;
            let mut a = TransferMatrix::zeros(m);
            for i in 0..4 {
                for j in 0..4 {
                    a.set(i, j, if i == j { 0.002 } else { 0.0005 });
                }
                a.set(i, 4, -0.002);
            }
            a.set(4, 4, 0.002);
            (uniform_specs(m, 2.0, 0.1), a)
        }
        "easy_objective" => {
            let m = 5;
            let mut a = TransferMatrix::diagonal(&[0.001; 5])?;
            a.set(4, 4, 0.01);
            for i in 0..4 {
                a.set(i, 4, -0.002);
            }
            (uniform_specs(m, 5.0, 0.05), a)
        }
        "dominant" => {
            let m = 3;
            let mut a = TransferMatrix::zeros(m);
            for i in 0..m {
                a.set(i, 0, if i == 0 { 0.02 } else { 0.003 });
                for j in 1..m {
                    a.set(i, j, -0.005);
                }
            }
            (uniform_specs(m, 20.0, 0.01), a)
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown scenario preset `{other}` (expected one of {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Scenario::new(specs, transfer)
}

/// A [`Scenario`] with its evolving state, usable by the meta loop.
#[derive(Clone, Debug)]
pub struct SimEnvironment {
    scenario: Scenario,
    state: SimState,
    last_drop: Vec<Option<f64>>,
}

impl SimEnvironment {
    pub fn new(scenario: Scenario) -> Self {
        let state = SimState::initial(&scenario.objectives);
        let m = scenario.num_objectives();
        Self {
            scenario,
            state,
            last_drop: vec![None; m],
        }
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }
}

impl TrainingEnvironment for SimEnvironment {
    fn num_objectives(&self) -> usize {
        self.scenario.num_objectives()
    }

    fn train_step(&mut self, objective: ObjectiveId, rng: &mut RngState) -> Result<()> {
        let j = objective.index();
        if j >= self.num_objectives() {
            return Err(Error::InvalidArgument(format!(
                "objective {objective} out of range for {} objectives",
                self.num_objectives()
            )));
        }
        let next = sim_train_step(
            &self.state,
            &self.scenario.objectives,
            &self.scenario.transfer,
            objective,
            rng,
        );
        self.last_drop[j] = Some((self.state.losses[j] - next.losses[j]).abs());
        self.state = next;
        Ok(())
    }

    fn evaluate(&mut self, rng: &mut RngState) -> Result<EvaluationReport> {
        Ok(sim_evaluate(
            &self.state,
            &self.scenario.objectives,
            self.scenario.eval_batches,
            rng,
        ))
    }

    fn grad_norm(&self, objective: ObjectiveId) -> Option<f64> {
        self.last_drop.get(objective.index()).copied().flatten()
    }
}
