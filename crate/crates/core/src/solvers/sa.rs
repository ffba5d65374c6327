//! Single-bit Metropolis simulated annealing over a [`QuboMatrix`].
//!
//! Each run starts from a uniform random bit vector and performs `sweeps`
//! passes over all variables while the temperature falls from `t_initial`
//! to `t_final`. Runs are grouped into batches; run `r` of batch `b` draws
//! from its own stream `derive_seed(derive_seed(seed, b), r)`, so results do
//! not depend on how runs are scheduled.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Checkpoint, Clock, SolverRunRecord, Stopwatch};
use crate::chimera::Embedding;
use crate::exec::{derive_seed, rng_from_seed, Execution};
use crate::mqo::{MqoInstance, PlanSelection};
use crate::physical::{decode_physical, PhysicalQubo};
use crate::qubo::{decode_and_repair, decode_logical, Assignment, LogicalMapping, QuboMatrix};
use crate::{Error, Result, DEFAULT_EPSILON};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    #[default]
    Geometric,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealParams {
    pub sweeps: usize,
    pub runs_per_batch: usize,
    pub batches: usize,
    /// Defaults to the largest absolute weight of the problem.
    pub t_initial: Option<f64>,
    /// Defaults to `10⁻³ · ε`.
    pub t_final: Option<f64>,
    pub schedule: Schedule,
}

impl Default for AnnealParams {
    fn default() -> Self {
        Self {
            sweeps: 64,
            runs_per_batch: 100,
            batches: 10,
            t_initial: None,
            t_final: None,
            schedule: Schedule::Geometric,
        }
    }
}

impl AnnealParams {
    pub fn total_runs(&self) -> usize {
        self.runs_per_batch * self.batches
    }

    /// Resolved `(t_initial, t_final)` for a problem.
    pub fn temperatures(&self, matrix: &QuboMatrix) -> Result<(f64, f64)> {
        let hot = self.t_initial.unwrap_or_else(|| matrix.max_abs_weight().max(f64::MIN_POSITIVE));
        let cold = self.t_final.unwrap_or(1e-3 * DEFAULT_EPSILON);
        if !(hot > 0.0 && cold > 0.0 && hot.is_finite() && cold.is_finite()) {
            return Err(Error::InvalidParameter("temperatures must be positive".into()));
        }
        if cold > hot {
            return Err(Error::InvalidParameter(format!("final temperature {cold} exceeds initial {hot}")));
        }
        Ok((hot, cold))
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(Error::InvalidParameter("sweeps must be at least 1".into()));
        }
        if self.total_runs() == 0 {
            return Err(Error::InvalidParameter("runs per batch and batches must be at least 1".into()));
        }
        Ok(())
    }

    fn temperature(&self, hot: f64, cold: f64, sweep: usize) -> f64 {
        if self.sweeps == 1 {
            return cold;
        }
        let f = sweep as f64 / (self.sweeps - 1) as f64;
        match self.schedule {
            Schedule::Geometric => hot * (cold / hot).powf(f),
            Schedule::Linear => hot + (cold - hot) * f,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub bits: Vec<bool>,
    pub energy: f64,
}

/// Samples grouped by batch, with the clock reading after each batch.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnealOutcome {
    pub batches: Vec<Vec<Sample>>,
    pub batch_end_ms: Vec<f64>,
}

impl AnnealOutcome {
    pub fn samples(&self) -> impl Iterator<Item = &Sample> {
        self.batches.iter().flatten()
    }
}

/// One sample per run, in run order.
pub fn simulated_annealing(
    matrix: &QuboMatrix,
    params: &AnnealParams,
    seed: u64,
    exec: Execution,
) -> Result<Vec<Sample>> {
    Ok(anneal(matrix, params, seed, exec, Clock::default())?.batches.into_iter().flatten().collect())
}

pub fn anneal(
    matrix: &QuboMatrix,
    params: &AnnealParams,
    seed: u64,
    exec: Execution,
    clock: Clock,
) -> Result<AnnealOutcome> {
    params.validate()?;
    clock.validate()?;
    let (hot, cold) = params.temperatures(matrix)?;
    let temps: Vec<f64> = (0..params.sweeps).map(|s| params.temperature(hot, cold, s)).collect();
    let mut watch: Stopwatch = clock.start();
    let mut batches = Vec::with_capacity(params.batches);
    let mut batch_end_ms = Vec::with_capacity(params.batches);
    for b in 0..params.batches {
        let batch_seed = derive_seed(seed, b as u64);
        let samples =
            exec.map(params.runs_per_batch, |r| anneal_run(matrix, &temps, derive_seed(batch_seed, r as u64)));
        watch.tick((params.runs_per_batch * params.sweeps * matrix.len()) as u64);
        batch_end_ms.push(watch.elapsed_ms());
        batches.push(samples);
    }
    Ok(AnnealOutcome { batches, batch_end_ms })
}

fn anneal_run(matrix: &QuboMatrix, temps: &[f64], seed: u64) -> Sample {
    let n = matrix.len();
    let mut rng = rng_from_seed(seed);
    let mut x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let mut field: Vec<f64> = (0..n).map(|i| matrix.field(i, &x)).collect();
    for &t in temps {
        for i in 0..n {
            let delta = if x[i] { -field[i] } else { field[i] };
            if delta <= 0.0 || rng.gen::<f64>() < (-delta / t).exp() {
                let sign = if x[i] { -1.0 } else { 1.0 };
                x[i] = !x[i];
                for &(j, w) in &matrix.neighbors[i] {
                    field[j as usize] += sign * w;
                }
            }
        }
    }
    let energy = matrix.energy(&x);
    Sample { bits: x, energy }
}

/// What the annealer samples for an MQO instance.
pub enum AnnealTarget<'a> {
    /// The logical formula, one variable per plan.
    Logical { matrix: &'a QuboMatrix, mapping: &'a LogicalMapping },
    /// The physical formula; samples are decoded through the embedding.
    Physical { physical: &'a PhysicalQubo, embedding: &'a Embedding, mapping: &'a LogicalMapping },
}

/// Anneals, decodes every sample to a repaired plan selection and records
/// the best repaired cost after each batch. `valid` on a checkpoint tells
/// whether that best sample decoded to a valid selection without repair.
pub fn anneal_instance(
    instance: &MqoInstance,
    target: AnnealTarget<'_>,
    params: &AnnealParams,
    seed: u64,
    exec: Execution,
    clock: Clock,
) -> Result<(SolverRunRecord, AnnealStats)> {
    let owned;
    let (matrix, name) = match &target {
        AnnealTarget::Logical { matrix, .. } => (*matrix, "sa-logical"),
        AnnealTarget::Physical { physical, .. } => {
            owned = physical.to_matrix();
            (&owned, "sa-physical")
        }
    };
    let outcome = anneal(matrix, params, seed, exec, clock)?;
    let decode = |s: &Sample| -> Result<(PlanSelection, f64, bool, bool)> {
        let (assignment, consistent) = match &target {
            AnnealTarget::Logical { .. } => (Assignment::new(s.bits.clone()), true),
            AnnealTarget::Physical { physical, embedding, .. } => {
                let (a, report) = decode_physical(embedding, &physical.sample_from_bits(&s.bits)?)?;
                (a, report.is_consistent())
            }
        };
        let mapping = match &target {
            AnnealTarget::Logical { mapping, .. } | AnnealTarget::Physical { mapping, .. } => *mapping,
        };
        let mut values = assignment.values;
        values.resize(mapping.num_vars(), false);
        let selection = decode_logical(mapping, &Assignment::new(values))?;
        let (repaired, cost, valid) = decode_and_repair(instance, &selection)?;
        Ok((repaired, cost, valid, consistent))
    };

    let mut stats = AnnealStats::default();
    let mut best = f64::INFINITY;
    let mut best_valid = false;
    let mut best_selection = None;
    let mut checkpoints = Vec::with_capacity(outcome.batches.len());
    let mut runs = 0u64;
    for (batch, &t) in outcome.batches.iter().zip(&outcome.batch_end_ms) {
        for s in batch {
            let (sel, cost, valid, consistent) = decode(s)?;
            stats.runs += 1;
            stats.valid_runs += usize::from(valid);
            stats.consistent_runs += usize::from(consistent);
            if cost < best {
                best = cost;
                best_valid = valid;
                best_selection = Some(sel);
            }
            if s.energy < stats.best_energy {
                stats.best_energy = s.energy;
            }
        }
        runs += batch.len() as u64;
        checkpoints.push(Checkpoint { time_ms: t, runs, best, valid: best_valid });
    }
    let record = SolverRunRecord {
        solver: name.to_string(),
        seed,
        checkpoints,
        best_value: best,
        best_selection,
        iterations: runs,
        elapsed_ms: outcome.batch_end_ms.last().copied().unwrap_or(0.0),
    };
    Ok((record, stats))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnealStats {
    pub runs: usize,
    /// Samples that decoded to a valid selection without repair.
    pub valid_runs: usize,
    /// Samples whose chains all agreed (always every run on the logical formula).
    pub consistent_runs: usize,
    pub best_energy: f64,
}

impl Default for AnnealStats {
    fn default() -> Self {
        Self { runs: 0, valid_runs: 0, consistent_runs: 0, best_energy: f64::INFINITY }
    }
}
