//! Exhaustive oracles behind one entry point.

use super::{Checkpoint, Clock, SolverRunRecord};
use crate::exec::Execution;
use crate::mqo::{brute_force_mqo, MqoInstance, PlanSelection, DEFAULT_MQO_BUDGET};
use crate::qubo::{brute_force_qubo_with, Assignment, Qubo, DEFAULT_QUBO_BUDGET};
use crate::Result;

pub enum ExactProblem<'a> {
    Mqo(&'a MqoInstance),
    Qubo(&'a Qubo),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExactSolution {
    Mqo { selection: PlanSelection, cost: f64 },
    Qubo { assignment: Assignment, energy: f64 },
}

impl ExactSolution {
    pub fn value(&self) -> f64 {
        match self {
            ExactSolution::Mqo { cost, .. } => *cost,
            ExactSolution::Qubo { energy, .. } => *energy,
        }
    }
}

/// Brute force with the default budgets: 10⁷ plan combinations or 24 QUBO
/// variables.
pub fn solve_exact(problem: ExactProblem<'_>) -> Result<ExactSolution> {
    match problem {
        ExactProblem::Mqo(inst) => {
            let (selection, cost) = brute_force_mqo(inst, DEFAULT_MQO_BUDGET)?;
            Ok(ExactSolution::Mqo { selection, cost })
        }
        ExactProblem::Qubo(q) => {
            let (assignment, energy) = brute_force_qubo_with(q, DEFAULT_QUBO_BUDGET, Execution::default())?;
            Ok(ExactSolution::Qubo { assignment, energy })
        }
    }
}

/// The MQO oracle as a benchmark record: a single checkpoint at the time the
/// enumeration finishes (one operation per combination on the virtual clock).
pub fn exact_record(instance: &MqoInstance, budget: u128, clock: Clock) -> Result<SolverRunRecord> {
    clock.validate()?;
    let mut watch = clock.start();
    let (selection, cost) = brute_force_mqo(instance, budget)?;
    let combos = instance.combinations();
    watch.tick(u64::try_from(combos).unwrap_or(u64::MAX));
    let t = watch.elapsed_ms();
    Ok(SolverRunRecord {
        solver: "exact".into(),
        seed: 0,
        checkpoints: vec![Checkpoint { time_ms: t, runs: 1, best: cost, valid: true }],
        best_value: cost,
        best_selection: Some(selection),
        iterations: u64::try_from(combos).unwrap_or(u64::MAX),
        elapsed_ms: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mqo;
    use crate::qubo::logical_map_default;

    #[test]
    fn delegates_to_both_oracles() {
        let inst = mqo::example_instance();
        let ExactSolution::Mqo { selection, cost } = solve_exact(ExactProblem::Mqo(&inst)).unwrap() else {
            panic!("wrong variant")
        };
        assert_eq!(selection.labels(&inst), vec!["p2", "p3"]);
        assert_eq!(cost, 2.0);
        let (q, _) = logical_map_default(&inst).unwrap();
        let sol = solve_exact(ExactProblem::Qubo(&q)).unwrap();
        assert!((sol.value() + 6.5).abs() < 1e-9);
    }

    #[test]
    fn record_has_one_checkpoint() {
        let inst = mqo::example_instance();
        let r = exact_record(&inst, 100, Clock::Virtual { ops_per_ms: 2.0 }).unwrap();
        assert_eq!(r.checkpoints.len(), 1);
        assert_eq!(r.checkpoints[0].time_ms, 2.0);
        assert_eq!(r.best_value, 2.0);
    }
}
