//! Simulated annealing and the classical baselines.
//!
//! Every solver is deterministic for a fixed seed. Time is measured by a
//! [`Clock`]: either the wall clock or a virtual clock that converts counted
//! elementary operations into milliseconds, which keeps curves reproducible
//! across machines.

pub mod climb;
pub mod exact;
pub mod ga;
pub mod sa;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::mqo::{MqoInstance, PlanSelection};
use crate::{Error, Result};

pub use climb::{hill_climbing, ClimbParams};
pub use exact::{solve_exact, ExactProblem, ExactSolution};
pub use ga::{genetic_algorithm, GaParams};
pub use sa::{simulated_annealing, AnnealParams, Sample, Schedule};

/// Default virtual speed: elementary operations per millisecond.
pub const DEFAULT_OPS_PER_MS: f64 = 50_000.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Clock {
    /// Monotonic wall-clock time.
    Wall,
    /// `ops / ops_per_ms` milliseconds, where ops counts flip attempts (SA),
    /// neighbor evaluations (hill climbing) or gene evaluations (GA).
    Virtual { ops_per_ms: f64 },
}

impl Default for Clock {
    fn default() -> Self {
        Clock::Virtual { ops_per_ms: DEFAULT_OPS_PER_MS }
    }
}

impl Clock {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Clock::Virtual { ops_per_ms } if !(ops_per_ms > 0.0 && ops_per_ms.is_finite()) => {
                Err(Error::InvalidParameter(format!("ops per ms must be positive, got {ops_per_ms}")))
            }
            _ => Ok(()),
        }
    }

    pub fn start(self) -> Stopwatch {
        Stopwatch { clock: self, started: Instant::now(), ops: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct Stopwatch {
    clock: Clock,
    started: Instant,
    ops: u64,
}

impl Stopwatch {
    pub fn tick(&mut self, ops: u64) {
        self.ops += ops;
    }

    pub fn ops(&self) -> u64 {
        self.ops
    }

    pub fn elapsed_ms(&self) -> f64 {
        match self.clock {
            Clock::Wall => self.started.elapsed().as_secs_f64() * 1e3,
            Clock::Virtual { ops_per_ms } => self.ops as f64 / ops_per_ms,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub time_ms: f64,
    /// Completed runs: annealing runs, climbs or generations.
    pub runs: u64,
    /// Best value so far; infinite before the first solution.
    pub best: f64,
    /// Whether the best solution was valid before any repair.
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverRunRecord {
    pub solver: String,
    pub seed: u64,
    pub checkpoints: Vec<Checkpoint>,
    pub best_value: f64,
    pub best_selection: Option<PlanSelection>,
    pub iterations: u64,
    pub elapsed_ms: f64,
}

impl SolverRunRecord {
    pub fn best_labels(&self, instance: &MqoInstance) -> Vec<String> {
        self.best_selection.as_ref().map(|s| s.labels(instance)).unwrap_or_default()
    }
}

/// Checks checkpoint times are finite, positive and strictly increasing.
pub fn validate_checkpoints(checkpoints: &[f64]) -> Result<()> {
    if checkpoints.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::InvalidParameter("checkpoint times must be positive".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("checkpoint times must be strictly increasing".into()));
    }
    Ok(())
}

/// Best-so-far bookkeeping shared by the deadline-driven solvers.
pub(crate) struct Tracker<'a> {
    watch: Stopwatch,
    deadline_ms: f64,
    checkpoints: &'a [f64],
    next: usize,
    pub(crate) best: f64,
    pub(crate) best_choice: Vec<usize>,
    pub(crate) runs: u64,
    records: Vec<Checkpoint>,
}

impl<'a> Tracker<'a> {
    pub(crate) fn new(clock: Clock, deadline_ms: f64, checkpoints: &'a [f64]) -> Result<Self> {
        clock.validate()?;
        validate_checkpoints(checkpoints)?;
        if deadline_ms.is_nan() || deadline_ms <= 0.0 {
            return Err(Error::InvalidParameter(format!("deadline must be positive, got {deadline_ms}")));
        }
        Ok(Self {
            watch: clock.start(),
            deadline_ms,
            checkpoints,
            next: 0,
            best: f64::INFINITY,
            best_choice: Vec::new(),
            runs: 0,
            records: Vec::new(),
        })
    }

    /// Counts `ops`, records passed checkpoints and reports whether the
    /// deadline is reached.
    pub(crate) fn tick(&mut self, ops: u64) -> bool {
        self.watch.tick(ops);
        let now = self.watch.elapsed_ms();
        while self.next < self.checkpoints.len() && self.checkpoints[self.next] <= now {
            let t = self.checkpoints[self.next];
            if t <= self.deadline_ms {
                self.records.push(Checkpoint {
                    time_ms: t,
                    runs: self.runs,
                    best: self.best,
                    valid: self.best.is_finite(),
                });
            }
            self.next += 1;
        }
        now >= self.deadline_ms
    }

    pub(crate) fn offer(&mut self, cost: f64, choice: &[usize]) {
        if cost < self.best {
            self.best = cost;
            self.best_choice.clear();
            self.best_choice.extend_from_slice(choice);
        }
    }

    pub(crate) fn finish(mut self, solver: String, seed: u64, instance: &MqoInstance) -> SolverRunRecord {
        while self.next < self.checkpoints.len() && self.checkpoints[self.next] <= self.deadline_ms {
            let t = self.checkpoints[self.next];
            self.records.push(Checkpoint {
                time_ms: t,
                runs: self.runs,
                best: self.best,
                valid: self.best.is_finite(),
            });
            self.next += 1;
        }
        let best_selection =
            (!self.best_choice.is_empty()).then(|| PlanSelection::from_choices(instance, &self.best_choice));
        SolverRunRecord {
            solver,
            seed,
            checkpoints: self.records,
            best_value: self.best,
            best_selection,
            iterations: self.runs,
            elapsed_ms: self.watch.elapsed_ms(),
        }
    }
}

/// Cost change when query `q` switches from plan `from` to plan `to`, given
/// the currently selected plans.
pub(crate) fn switch_delta(instance: &MqoInstance, selected: &[bool], from: usize, to: usize) -> f64 {
    let gain = |p: usize| -> f64 {
        instance.partners(crate::mqo::PlanId(p)).iter().filter(|(r, _)| selected[r.0]).map(|(_, s)| s).sum()
    };
    instance.plans()[to].cost - instance.plans()[from].cost - gain(to) + gain(from)
}

/// Cost of a per-query choice vector.
pub(crate) fn choice_cost(instance: &MqoInstance, choice: &[usize]) -> f64 {
    let plans: Vec<usize> = instance.queries().iter().zip(choice).map(|(q, &c)| q.plans[c].0).collect();
    let mut selected = vec![false; instance.num_plans()];
    for &p in &plans {
        selected[p] = true;
    }
    let mut total = 0.0;
    for &p in &plans {
        total += instance.plans()[p].cost;
        for (r, s) in instance.partners(crate::mqo::PlanId(p)) {
            if r.0 > p && selected[r.0] {
                total -= s;
            }
        }
    }
    total
}
