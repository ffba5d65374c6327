//! Genetic algorithm over per-query plan choices.
//!
//! A chromosome holds one plan index per query, so every individual is a
//! valid selection. Each generation produces `round(population ·
//! crossover_rate)` single-point crossovers between random parent pairs (two
//! children each) and one mutant per member, where every gene is redrawn with
//! probability `mutation_rate`; mutants identical to their parent are
//! discarded. The best `population` individuals of parents and offspring
//! survive, earlier individuals winning ties.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{choice_cost, Clock, SolverRunRecord, Tracker};
use crate::exec::rng_from_seed;
use crate::mqo::MqoInstance;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaParams {
    pub population: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self { population: 50, crossover_rate: 0.35, mutation_rate: 1.0 / 12.0 }
    }
}

impl GaParams {
    pub fn with_population(population: usize) -> Self {
        Self { population, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidParameter(format!("population must be at least 2, got {}", self.population)));
        }
        for (name, r) in [("crossover", self.crossover_rate), ("mutation", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidParameter(format!("{name} rate must lie in [0, 1], got {r}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub genes: Vec<usize>,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    pub members: Vec<Individual>,
}

impl Population {
    pub fn random(instance: &MqoInstance, size: usize, rng: &mut impl Rng) -> Self {
        let members = (0..size)
            .map(|_| {
                let genes: Vec<usize> = instance.queries().iter().map(|q| rng.gen_range(0..q.plans.len())).collect();
                let cost = choice_cost(instance, &genes);
                Individual { genes, cost }
            })
            .collect();
        let mut p = Self { members };
        p.sort();
        p
    }

    fn sort(&mut self) {
        self.members.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    }

    /// Offspring of one generation, unevaluated order preserved.
    pub fn offspring(&self, instance: &MqoInstance, params: &GaParams, rng: &mut impl Rng) -> Vec<Vec<usize>> {
        let n = self.members.len();
        let genes = instance.num_queries();
        let mut out = Vec::new();
        let crossovers = (n as f64 * params.crossover_rate).round() as usize;
        for _ in 0..crossovers {
            let a = rng.gen_range(0..n);
            let b = (a + rng.gen_range(1..n)) % n;
            let (pa, pb) = (&self.members[a].genes, &self.members[b].genes);
            let cut = if genes > 1 { rng.gen_range(1..genes) } else { 0 };
            out.push(pa[..cut].iter().chain(&pb[cut..]).copied().collect());
            out.push(pb[..cut].iter().chain(&pa[cut..]).copied().collect());
        }
        if params.mutation_rate > 0.0 {
            for m in &self.members {
                let mut child = m.genes.clone();
                for (q, g) in child.iter_mut().enumerate() {
                    if rng.gen::<f64>() < params.mutation_rate {
                        *g = rng.gen_range(0..instance.queries()[q].plans.len());
                    }
                }
                if child != m.genes {
                    out.push(child);
                }
            }
        }
        out
    }

    /// Keeps the best `size` of the current members and `children`.
    pub fn select(&mut self, children: Vec<Individual>, size: usize) {
        self.members.extend(children);
        self.sort();
        self.members.truncate(size);
    }
}

pub fn genetic_algorithm(
    instance: &MqoInstance,
    params: &GaParams,
    deadline_ms: f64,
    seed: u64,
    checkpoints: &[f64],
    clock: Clock,
) -> Result<SolverRunRecord> {
    params.validate()?;
    let mut tracker = Tracker::new(clock, deadline_ms, checkpoints)?;
    let mut rng = rng_from_seed(seed);
    let genes = instance.num_queries().max(1) as u64;
    let mut pop = Population::random(instance, params.population, &mut rng);
    let mut done = tracker.tick(genes * params.population as u64);
    tracker.offer(pop.members[0].cost, &pop.members[0].genes);
    while !done {
        let mut children = Vec::new();
        for g in pop.offspring(instance, params, &mut rng) {
            let cost = choice_cost(instance, &g);
            tracker.offer(cost, &g);
            children.push(Individual { genes: g, cost });
            if tracker.tick(genes) {
                done = true;
                break;
            }
        }
        if children.is_empty() && tracker.tick(genes) {
            done = true;
        }
        pop.select(children, params.population);
        tracker.runs += 1;
    }
    let mut record = tracker.finish(format!("ga({})", params.population), seed, instance);
    if let Some(sel) = &record.best_selection {
        record.best_value = crate::mqo::cost(instance, sel)?;
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mqo::{self, GenerateParams};

    const CPS: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

    #[test]
    fn example_converges() {
        let inst = mqo::example_instance();
        for pop in [50, 200] {
            let r = genetic_algorithm(&inst, &GaParams::with_population(pop), 10.0, 1, &CPS, Clock::default()).unwrap();
            assert!((r.best_value - 2.0).abs() < 1e-9);
            assert_eq!(r.solver, format!("ga({pop})"));
        }
    }

    #[test]
    fn no_variation_keeps_population() {
        let inst = mqo::generate_instance(&GenerateParams::new(5, 3, 0.3, 2)).unwrap();
        let mut rng = rng_from_seed(4);
        let uniform =
            Population { members: vec![Individual { genes: vec![1; 5], cost: choice_cost(&inst, &[1; 5]) }; 6] };
        let mut pop = uniform.clone();
        let params = GaParams { population: 6, crossover_rate: 0.0, mutation_rate: 0.0 };
        for _ in 0..20 {
            let kids = pop.offspring(&inst, &params, &mut rng);
            assert!(kids.is_empty());
            pop.select(Vec::new(), 6);
        }
        assert_eq!(pop, uniform);
    }

    #[test]
    fn crossover_count_and_validity() {
        let inst = mqo::generate_instance(&GenerateParams::new(7, 4, 0.3, 2)).unwrap();
        let mut rng = rng_from_seed(5);
        let pop = Population::random(&inst, 20, &mut rng);
        let params = GaParams { population: 20, crossover_rate: 0.35, mutation_rate: 0.0 };
        let kids = pop.offspring(&inst, &params, &mut rng);
        assert_eq!(kids.len(), 14);
        for k in kids {
            assert!(k.iter().zip(inst.queries()).all(|(&g, q)| g < q.plans.len()));
            let sel = mqo::PlanSelection::from_choices(&inst, &k);
            assert!(mqo::validate_solution(&inst, &sel).unwrap().valid);
        }
    }

    #[test]
    fn deterministic_and_monotone() {
        let inst = mqo::generate_instance(&GenerateParams::new(12, 3, 0.3, 6)).unwrap();
        let p = GaParams::with_population(50);
        let a = genetic_algorithm(&inst, &p, 100.0, 9, &CPS, Clock::default()).unwrap();
        let b = genetic_algorithm(&inst, &p, 100.0, 9, &CPS, Clock::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.checkpoints.windows(2).all(|w| w[1].best <= w[0].best));
    }

    #[test]
    fn rejects_tiny_population() {
        let inst = mqo::example_instance();
        assert!(genetic_algorithm(&inst, &GaParams::with_population(1), 1.0, 0, &CPS, Clock::default()).is_err());
    }
}
