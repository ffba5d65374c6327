//! Randomized hill climbing over valid plan selections.
//!
//! Each climb starts from a uniform random selection and repeatedly switches
//! one query to another plan while that lowers the cost. Steepest descent
//! scans every such move and takes the best; first improvement takes the
//! first improving move in query order. Climbs restart until the deadline.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{choice_cost, switch_delta, Clock, SolverRunRecord, Tracker};
use crate::exec::rng_from_seed;
use crate::mqo::MqoInstance;
use crate::{Result, TOLERANCE};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClimbParams {
    pub first_improvement: bool,
}

pub fn hill_climbing(
    instance: &MqoInstance,
    params: &ClimbParams,
    deadline_ms: f64,
    seed: u64,
    checkpoints: &[f64],
    clock: Clock,
) -> Result<SolverRunRecord> {
    let mut tracker = Tracker::new(clock, deadline_ms, checkpoints)?;
    let mut rng = rng_from_seed(seed);
    let queries = instance.queries();
    let mut selected = vec![false; instance.num_plans()];
    let mut choice = vec![0usize; queries.len()];

    'restart: loop {
        selected.iter_mut().for_each(|s| *s = false);
        for (q, c) in queries.iter().zip(choice.iter_mut()) {
            *c = rng.gen_range(0..q.plans.len());
            selected[q.plans[*c].0] = true;
        }
        let mut current = choice_cost(instance, &choice);
        tracker.offer(current, &choice);
        if tracker.tick(queries.len().max(1) as u64) {
            break;
        }
        loop {
            let mut best_move: Option<(usize, usize, f64)> = None;
            'scan: for (qi, q) in queries.iter().enumerate() {
                let from = q.plans[choice[qi]].0;
                for (k, p) in q.plans.iter().enumerate() {
                    if k == choice[qi] {
                        continue;
                    }
                    let d = switch_delta(instance, &selected, from, p.0);
                    if tracker.tick(1) {
                        break 'restart;
                    }
                    if d < -TOLERANCE && best_move.is_none_or(|(_, _, bd)| d < bd) {
                        best_move = Some((qi, k, d));
                        if params.first_improvement {
                            break 'scan;
                        }
                    }
                }
            }
            let Some((qi, k, d)) = best_move else { break };
            selected[queries[qi].plans[choice[qi]].0] = false;
            choice[qi] = k;
            selected[queries[qi].plans[k].0] = true;
            current += d;
            tracker.offer(current, &choice);
        }
        tracker.runs += 1;
    }
    let name = if params.first_improvement { "climb-first" } else { "climb" };
    let mut record = tracker.finish(name.to_string(), seed, instance);
    // re-evaluate to shed accumulated rounding
    if let Some(sel) = &record.best_selection {
        record.best_value = crate::mqo::cost(instance, sel)?;
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mqo::{self, brute_force_mqo, GenerateParams};

    const CPS: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

    #[test]
    fn example_reaches_optimum() {
        let inst = mqo::example_instance();
        let r = hill_climbing(&inst, &ClimbParams::default(), 10.0, 3, &CPS, Clock::default()).unwrap();
        assert!((r.best_value - 2.0).abs() < 1e-9);
        assert_eq!(r.best_labels(&inst), vec!["p2", "p3"]);
        assert_eq!(r.checkpoints.len(), 2);
    }

    #[test]
    fn single_query_first_climb() {
        let inst = mqo::MqoInstance::builder().query("q", &[("a", 3.0), ("b", 1.0), ("c", 2.0)]).build().unwrap();
        let r = hill_climbing(&inst, &ClimbParams::default(), 1.0, 0, &CPS, Clock::default()).unwrap();
        assert_eq!(r.best_value, 1.0);
    }

    #[test]
    fn no_savings_gives_cheapest_plans() {
        let inst = mqo::generate_instance(&GenerateParams::new(10, 4, 0.0, 8)).unwrap();
        let cheapest: f64 =
            inst.queries().iter().map(|q| q.plans.iter().map(|p| inst.cost_of(*p)).fold(f64::INFINITY, f64::min)).sum();
        for first in [false, true] {
            let params = ClimbParams { first_improvement: first };
            let r = hill_climbing(&inst, &params, 1.0, 5, &CPS, Clock::default()).unwrap();
            assert!((r.best_value - cheapest).abs() < 1e-9);
        }
    }

    #[test]
    fn checkpoints_monotone_and_deterministic() {
        let inst = mqo::generate_instance(&GenerateParams::new(12, 3, 0.3, 1)).unwrap();
        let a = hill_climbing(&inst, &ClimbParams::default(), 100.0, 4, &CPS, Clock::default()).unwrap();
        let b = hill_climbing(&inst, &ClimbParams::default(), 100.0, 4, &CPS, Clock::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.checkpoints.windows(2).all(|w| w[1].best <= w[0].best));
        let (_, opt) = brute_force_mqo(&inst, mqo::DEFAULT_MQO_BUDGET).unwrap();
        assert!(a.best_value >= opt - 1e-9);
    }
}
