//! Oracle-equivalence suites.
//!
//! [`equivalence_suite`] checks on random small instances that every ground
//! state of the logical formula decodes to a valid selection and that the
//! minimum-energy selection is a cheapest valid selection.
//! [`chain_suite`] checks on random embedded formulas that every ground
//! state of the physical formula has consistent chains and decodes to a
//! logical optimum.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chimera::{couplers_between, random_chain_embedding, triad_embedding, ChimeraGraph, Embedding};
use crate::exec::{derive_seed, rng_from_seed, Execution};
use crate::mqo::{self, brute_force_mqo, generate_instance, GenerateParams};
use crate::physical::{decode_physical, embed_qubo_with, ChainStrengthRule};
use crate::qubo::{brute_force_qubo_with, decode_logical, energy, logical_map_with, Assignment, LogicalWeights, Qubo};
use crate::{Error, Result, DEFAULT_EPSILON, TOLERANCE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceParams {
    pub instances: usize,
    pub max_queries: usize,
    pub max_plans: usize,
    pub max_density: f64,
    pub seed: u64,
    pub epsilon: f64,
    /// Sets `w_M = w_L`, below the bound that rules out double selections.
    pub break_wm: bool,
    /// Ground states inspected per instance.
    pub max_ground_states: usize,
}

impl EquivalenceParams {
    pub fn new(instances: usize, seed: u64) -> Self {
        Self {
            instances,
            max_queries: 6,
            max_plans: 3,
            max_density: 0.4,
            seed,
            epsilon: DEFAULT_EPSILON,
            break_wm: false,
            max_ground_states: 64,
        }
    }

    /// Shape of instance `i`: 2..=max_queries queries, 1..=max_plans plans,
    /// density in [0, max_density], costs and savings in [1, 10].
    pub fn instance_params(&self, i: usize) -> GenerateParams {
        let seed = derive_seed(self.seed, i as u64);
        let mut rng = rng_from_seed(seed);
        let queries = rng.gen_range(2..=self.max_queries.max(2));
        let plans = rng.gen_range(1..=self.max_plans.max(1));
        let density = rng.gen_range(0.0..=self.max_density);
        let mut p = GenerateParams::new(queries, plans, density, derive_seed(seed, 1));
        p.cost_range = (1.0, 10.0);
        p.savings_range = (1.0, 10.0);
        p
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub instances: usize,
    /// Instances whose minimum-energy selection costs the MQO optimum.
    pub equivalent: usize,
    /// Instances whose inspected ground states are all valid selections.
    pub all_valid: usize,
    /// Ground states decoding to an invalid selection, summed over instances.
    pub invalid_ground_states: usize,
    pub failures: Vec<String>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.equivalent == self.instances && self.all_valid == self.instances
    }
}

pub fn equivalence_suite(params: &EquivalenceParams, exec: Execution) -> Result<EquivalenceReport> {
    if params.max_queries < 2 || params.max_plans < 1 || !(0.0..=1.0).contains(&params.max_density) {
        return Err(Error::InvalidParameter("suite needs ≥ 2 queries, ≥ 1 plan and density in [0, 1]".into()));
    }
    let outcomes = exec.map(params.instances, |i| equivalence_case(params, i));
    let mut report = EquivalenceReport { instances: params.instances, ..EquivalenceReport::default() };
    for (i, o) in outcomes.into_iter().enumerate() {
        let (equivalent, invalid, note) = o?;
        report.equivalent += usize::from(equivalent);
        report.all_valid += usize::from(invalid == 0);
        report.invalid_ground_states += invalid;
        if let Some(n) = note {
            report.failures.push(format!("instance {i}: {n}"));
        }
    }
    Ok(report)
}

fn equivalence_case(params: &EquivalenceParams, i: usize) -> Result<(bool, usize, Option<String>)> {
    let inst = generate_instance(&params.instance_params(i))?;
    let mut weights = LogicalWeights::derive(&inst, params.epsilon)?;
    if params.break_wm {
        weights.w_m = weights.w_l;
    }
    let (qubo, mapping) = logical_map_with(&inst, weights)?;
    let (_, optimum) = brute_force_mqo(&inst, mqo::DEFAULT_MQO_BUDGET)?;
    let ground = qubo.matrix().ground_states(TOLERANCE, params.max_ground_states, Execution::Sequential);
    let mut invalid = 0;
    let mut first_cost = None;
    for &code in &ground.states {
        let sel = decode_logical(&mapping, &Assignment::from_code(code, qubo.num_vars()))?;
        if !mqo::validate_solution(&inst, &sel)?.valid {
            invalid += 1;
        }
        first_cost.get_or_insert(mqo::cost(&inst, &sel)?);
    }
    let cost = first_cost.unwrap_or(f64::NAN);
    let equivalent = invalid == 0 && (cost - optimum).abs() <= TOLERANCE;
    let note = (!equivalent || invalid > 0)
        .then(|| format!("{invalid} invalid ground state(s); decoded cost {cost}, optimum {optimum}"));
    Ok((equivalent, invalid, note))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSuiteParams {
    pub cases: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub rule: ChainStrengthRule,
    /// Physical qubits per case, at most 24.
    pub max_qubits: usize,
    pub max_ground_states: usize,
}

impl ChainSuiteParams {
    pub fn new(cases: usize, seed: u64) -> Self {
        Self {
            cases,
            seed,
            epsilon: DEFAULT_EPSILON,
            rule: ChainStrengthRule::default(),
            max_qubits: 24,
            max_ground_states: 256,
        }
    }
}

/// An embedded logical formula small enough to enumerate physically.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainCase {
    pub graph: ChimeraGraph,
    pub qubo: Qubo,
    pub embedding: Embedding,
}

/// Case `i` of a chain suite. Cases cycle through three kinds: random path
/// chains of 2–4 qubits with random weights on coupled pairs, a TRIAD of
/// 6–8 chains with random weights on every pair, and a TRIAD carrying the
/// logical formula of a small random MQO instance.
pub fn chain_case(seed: u64, i: usize, max_qubits: usize) -> Result<ChainCase> {
    let graph = ChimeraGraph::new(2, 2);
    let mut rng = rng_from_seed(derive_seed(seed, i as u64));
    let weight = |rng: &mut rand_chacha::ChaCha8Rng| (rng.gen_range(-50..=50) as f64) / 10.0;
    match i % 3 {
        0 => {
            let mut lengths = Vec::new();
            let mut total = 0;
            let vars = rng.gen_range(3..=8);
            while lengths.len() < vars {
                let l = rng.gen_range(2..=4);
                if total + l > max_qubits {
                    break;
                }
                total += l;
                lengths.push(l);
            }
            let embedding = random_chain_embedding(&graph, &lengths, &mut rng, 1000)
                .ok_or_else(|| Error::InvalidParameter("could not place random chains".into()))?;
            let mut qubo = Qubo::new(lengths.len());
            for v in 0..lengths.len() {
                qubo.add_linear(v, weight(&mut rng))?;
            }
            for u in 0..lengths.len() {
                for v in u + 1..lengths.len() {
                    let a = embedding.chain(u).expect("chain");
                    let b = embedding.chain(v).expect("chain");
                    if !couplers_between(&graph, a, b).is_empty() && rng.gen_bool(0.7) {
                        qubo.add_quadratic(u, v, weight(&mut rng))?;
                    }
                }
            }
            Ok(ChainCase { graph, qubo, embedding })
        }
        1 => {
            let c = rng.gen_range(6..=8);
            let embedding = triad_embedding(c, &graph, (0, 0))?;
            let mut qubo = Qubo::new(c);
            for v in 0..c {
                qubo.add_linear(v, weight(&mut rng))?;
                for u in 0..v {
                    if rng.gen_bool(0.8) {
                        qubo.add_quadratic(u, v, weight(&mut rng))?;
                    }
                }
            }
            Ok(ChainCase { graph, qubo, embedding })
        }
        _ => {
            let (queries, plans) = [(3, 2), (4, 2), (2, 3), (2, 4)][rng.gen_range(0..4)];
            let mut p = GenerateParams::new(queries, plans, rng.gen_range(0.2..=0.8), rng.gen());
            p.savings_range = (1.0, 10.0);
            let inst = generate_instance(&p)?;
            let (qubo, _) = crate::qubo::logical_map(&inst, DEFAULT_EPSILON)?;
            let embedding = triad_embedding(qubo.num_vars(), &graph, (0, 0))?;
            Ok(ChainCase { graph, qubo, embedding })
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainSuiteReport {
    pub cases: usize,
    /// Cases whose physical ground states all have consistent chains.
    pub consistent: usize,
    /// Cases whose physical ground states all decode to a logical optimum.
    pub optimal: usize,
    pub failures: Vec<String>,
}

impl ChainSuiteReport {
    pub fn passed(&self) -> bool {
        self.consistent == self.cases && self.optimal == self.cases
    }
}

pub fn chain_suite(params: &ChainSuiteParams, exec: Execution) -> Result<ChainSuiteReport> {
    if params.max_qubits == 0 || params.max_qubits > 24 {
        return Err(Error::InvalidParameter("max qubits must lie in 1..=24".into()));
    }
    let mut report = ChainSuiteReport { cases: params.cases, ..ChainSuiteReport::default() };
    for i in 0..params.cases {
        let case = chain_case(params.seed, i, params.max_qubits)?;
        let (consistent, optimal, note) = check_chain_case(&case, params, exec)?;
        report.consistent += usize::from(consistent);
        report.optimal += usize::from(optimal);
        if let Some(n) = note {
            report.failures.push(format!("case {i}: {n}"));
        }
    }
    Ok(report)
}

pub fn check_chain_case(
    case: &ChainCase,
    params: &ChainSuiteParams,
    exec: Execution,
) -> Result<(bool, bool, Option<String>)> {
    let pq = embed_qubo_with(&case.qubo, &case.embedding, &case.graph, params.epsilon, params.rule)?;
    if pq.num_qubits() > params.max_qubits {
        return Err(Error::BudgetExceeded { count: 1 << pq.num_qubits(), budget: 1 << params.max_qubits });
    }
    let (_, logical_opt) = brute_force_qubo_with(&case.qubo, 24, exec)?;
    let ground = pq.to_matrix().ground_states(TOLERANCE, params.max_ground_states, exec);
    let (mut consistent, mut optimal) = (true, true);
    let mut worst = logical_opt;
    for &code in &ground.states {
        let bits: Vec<bool> = (0..pq.num_qubits()).map(|b| code >> b & 1 == 1).collect();
        let (a, chains) = decode_physical(&case.embedding, &pq.sample_from_bits(&bits)?)?;
        consistent &= chains.is_consistent();
        let e = energy(&case.qubo, &a)?;
        if (e - logical_opt).abs() > TOLERANCE {
            optimal = false;
            worst = e;
        }
    }
    let note = (!consistent || !optimal).then(|| {
        format!(
            "physical minimum {:.6}, logical optimum {logical_opt:.6}, decoded {worst:.6}, chains consistent: {consistent}",
            ground.energy
        )
    });
    Ok((consistent, optimal, note))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_equivalence_suite_passes() {
        let r = equivalence_suite(&EquivalenceParams::new(30, 11), Execution::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
    }

    #[test]
    fn instance_shapes_respect_limits() {
        let p = EquivalenceParams::new(100, 2);
        for i in 0..100 {
            let g = p.instance_params(i);
            assert!((2..=6).contains(&g.queries));
            assert!((1..=3).contains(&g.plans_per_query));
            assert!(g.savings_density <= 0.4);
        }
    }

    #[test]
    fn chain_cases_fit_the_budget() {
        for i in 0..12 {
            let c = chain_case(5, i, 24).unwrap();
            assert!(c.embedding.qubit_count() <= 24);
            assert!(c.embedding.chain_lengths().iter().all(|&l| l <= 4));
            assert!(crate::chimera::verify_embedding(&c.embedding, &c.qubo, &c.graph).is_ok());
        }
    }

    #[test]
    fn few_chain_cases_pass() {
        let r = chain_suite(&ChainSuiteParams::new(6, 3), Execution::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
    }
}
