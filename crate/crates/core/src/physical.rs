//! Physical energy formula over qubits.
//!
//! Given a logical QUBO and an embedding, each linear weight is split evenly
//! over the variable's chain, each quadratic weight is placed on one coupler
//! joining the two chains, and consecutive chain qubits are tied together by
//! `w_B · (b_j + b_{j+1} − 2 b_j b_{j+1})`, which is zero when both agree and
//! `w_B` otherwise.
//!
//! The chain strength `w_B` bounds how much the rest of the formula can gain
//! by breaking the chain. For a qubit `b` with weight `v` and couplers
//! `v_i` leaving the chain, flipping `b` from 0 to 1 raises the energy by at
//! most `U₀₁(b) = v + Σ max(v_i, 0)` and flipping it back by at most
//! `U₁₀(b) = −v + Σ max(−v_i, 0)`. Driving a broken chain to all-zero or
//! all-one therefore costs at most `Σ_B max(U₁₀(b), 0)` or
//! `Σ_B max(U₀₁(b), 0)`, and `w_B` is the smaller of the two plus `ε`.
//! [`ChainStrengthRule::Aggregate`] sums the raw per-qubit bounds instead,
//! which undercuts the true gain when some bound is negative.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::chimera::{couplers_between, fit_clustered, verify_embedding, ChimeraGraph, Embedding, QubitId};
use crate::mqo::MqoInstance;
use crate::qubo::{Assignment, Qubo, QuboMatrix};
use crate::{Error, Result, DEFAULT_EPSILON};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainStrengthRule {
    /// `min(Σ_B max(U₀₁, 0), Σ_B max(U₁₀, 0))`.
    #[default]
    PerQubitClamped,
    /// `min(Σ_B U₀₁, Σ_B U₁₀)`.
    Aggregate,
}

pub type PhysicalSample = BTreeMap<QubitId, bool>;

#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalQubo {
    pub rows: usize,
    pub cols: usize,
    pub qubit_weight: BTreeMap<QubitId, f64>,
    pub coupler_weight: BTreeMap<(QubitId, QubitId), f64>,
    pub chain_penalty: BTreeMap<usize, f64>,
}

impl PhysicalQubo {
    /// Qubits carrying a weight, ascending. Compact samples follow this order.
    pub fn qubits(&self) -> Vec<QubitId> {
        self.qubit_weight.keys().copied().collect()
    }

    pub fn num_qubits(&self) -> usize {
        self.qubit_weight.len()
    }

    /// Dense form over [`Self::qubits`] for the samplers.
    pub fn to_matrix(&self) -> QuboMatrix {
        let index: BTreeMap<QubitId, usize> = self.qubit_weight.keys().enumerate().map(|(i, &q)| (q, i)).collect();
        QuboMatrix::from_terms(
            index.len(),
            self.qubit_weight.values().copied().collect(),
            self.coupler_weight.iter().map(|((a, b), &w)| (index[a], index[b], w)),
        )
    }

    /// Maps a compact bit vector (in [`Self::qubits`] order) to a sample.
    pub fn sample_from_bits(&self, bits: &[bool]) -> Result<PhysicalSample> {
        if bits.len() != self.num_qubits() {
            return Err(Error::LengthMismatch { expected: self.num_qubits(), actual: bits.len() });
        }
        Ok(self.qubit_weight.keys().copied().zip(bits.iter().copied()).collect())
    }

    pub fn to_doc(&self) -> PhysicalDoc {
        PhysicalDoc {
            grid: [self.rows, self.cols],
            qubit_weights: self.qubit_weight.iter().map(|(q, &w)| (q.0, w)).collect(),
            coupler_weights: self.coupler_weight.iter().map(|((a, b), &w)| (a.0, b.0, w)).collect(),
            chain_penalties: self.chain_penalty.iter().map(|(&v, &w)| (v, w)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalDoc {
    pub grid: [usize; 2],
    pub qubit_weights: Vec<(u32, f64)>,
    pub coupler_weights: Vec<(u32, u32, f64)>,
    pub chain_penalties: Vec<(usize, f64)>,
}

impl PhysicalDoc {
    pub fn physical(&self) -> Result<PhysicalQubo> {
        let mut coupler_weight = BTreeMap::new();
        for &(a, b, w) in &self.coupler_weights {
            if a >= b {
                return Err(Error::InvalidParameter(format!("coupler ({a}, {b}) must be listed low id first")));
            }
            coupler_weight.insert((QubitId(a), QubitId(b)), w);
        }
        Ok(PhysicalQubo {
            rows: self.grid[0],
            cols: self.grid[1],
            qubit_weight: self.qubit_weights.iter().map(|&(q, w)| (QubitId(q), w)).collect(),
            coupler_weight,
            chain_penalty: self.chain_penalties.iter().copied().collect(),
        })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

pub fn embed_qubo(qubo: &Qubo, embedding: &Embedding, graph: &ChimeraGraph, epsilon: f64) -> Result<PhysicalQubo> {
    embed_qubo_with(qubo, embedding, graph, epsilon, ChainStrengthRule::default())
}

pub fn embed_qubo_default(qubo: &Qubo, embedding: &Embedding, graph: &ChimeraGraph) -> Result<PhysicalQubo> {
    embed_qubo(qubo, embedding, graph, DEFAULT_EPSILON)
}

pub fn embed_qubo_with(
    qubo: &Qubo,
    embedding: &Embedding,
    graph: &ChimeraGraph,
    epsilon: f64,
    rule: ChainStrengthRule,
) -> Result<PhysicalQubo> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    verify_embedding(embedding, qubo, graph).into_result()?;
    let chain = |v: usize| embedding.chain(v).expect("verified embedding has every chain");

    let mut qubit_weight: BTreeMap<QubitId, f64> = BTreeMap::new();
    for (v, &w) in qubo.linear().iter().enumerate() {
        let c = chain(v);
        let share = w / c.len() as f64;
        for &q in c {
            *qubit_weight.entry(q).or_default() += share;
        }
    }

    let mut coupler_weight: BTreeMap<(QubitId, QubitId), f64> = BTreeMap::new();
    for (&(u, v), &w) in qubo.quadratic() {
        let edge = couplers_between(graph, chain(u), chain(v))[0];
        *coupler_weight.entry(edge).or_default() += w;
    }

    let mut incident: BTreeMap<QubitId, Vec<f64>> = BTreeMap::new();
    for (&(a, b), &w) in &coupler_weight {
        incident.entry(a).or_default().push(w);
        incident.entry(b).or_default().push(w);
    }

    let mut chain_penalty = BTreeMap::new();
    for v in 0..qubo.num_vars() {
        let c = chain(v);
        let (mut up, mut down) = (0.0, 0.0);
        for q in c {
            let own = qubit_weight[q];
            let ext = incident.get(q).map_or(&[][..], Vec::as_slice);
            let u01 = own + ext.iter().map(|w| w.max(0.0)).sum::<f64>();
            let u10 = -own + ext.iter().map(|w| (-w).max(0.0)).sum::<f64>();
            match rule {
                ChainStrengthRule::PerQubitClamped => {
                    up += u01.max(0.0);
                    down += u10.max(0.0);
                }
                ChainStrengthRule::Aggregate => {
                    up += u01;
                    down += u10;
                }
            }
        }
        chain_penalty.insert(v, up.min(down).max(0.0) + epsilon);
    }

    for v in 0..qubo.num_vars() {
        let w_b = chain_penalty[&v];
        for pair in chain(v).windows(2) {
            *qubit_weight.get_mut(&pair[0]).expect("chain qubit") += w_b;
            *qubit_weight.get_mut(&pair[1]).expect("chain qubit") += w_b;
            let key = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            *coupler_weight.entry(key).or_default() -= 2.0 * w_b;
        }
    }

    Ok(PhysicalQubo { rows: graph.rows(), cols: graph.cols(), qubit_weight, coupler_weight, chain_penalty })
}

pub fn physical_energy(pq: &PhysicalQubo, sample: &PhysicalSample) -> Result<f64> {
    let value = |q: &QubitId| {
        sample.get(q).copied().ok_or_else(|| Error::InvalidParameter(format!("sample has no value for qubit {q}")))
    };
    let mut e = 0.0;
    for (q, &w) in &pq.qubit_weight {
        if value(q)? {
            e += w;
        }
    }
    for ((a, b), &w) in &pq.coupler_weight {
        if value(a)? && value(b)? {
            e += w;
        }
    }
    Ok(e)
}

/// Replicates each variable's value along its chain.
pub fn encode_logical(embedding: &Embedding, a: &Assignment) -> Result<PhysicalSample> {
    let mut out = PhysicalSample::new();
    for (&v, chain) in &embedding.chains {
        let x = *a.values.get(v).ok_or(Error::LengthMismatch { expected: v + 1, actual: a.len() })?;
        out.extend(chain.iter().map(|&q| (q, x)));
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChainReport {
    /// Variables whose chain qubits disagree.
    pub inconsistent: Vec<usize>,
}

impl ChainReport {
    pub fn is_consistent(&self) -> bool {
        self.inconsistent.is_empty()
    }
}

/// Majority vote per chain, ties read as 0. Variables without a chain read
/// as 0.
pub fn decode_physical(embedding: &Embedding, sample: &PhysicalSample) -> Result<(Assignment, ChainReport)> {
    let mut values = vec![false; embedding.num_vars()];
    let mut report = ChainReport::default();
    for (&v, chain) in &embedding.chains {
        let mut ones = 0;
        for q in chain {
            let bit =
                sample.get(q).ok_or_else(|| Error::InvalidParameter(format!("sample has no value for qubit {q}")))?;
            ones += usize::from(*bit);
        }
        if ones != 0 && ones != chain.len() {
            report.inconsistent.push(v);
        }
        values[v] = 2 * ones > chain.len();
    }
    Ok((Assignment::new(values), report))
}

/// Qubits used by an embedding, ascending.
pub fn used_qubits(embedding: &Embedding) -> BTreeSet<QubitId> {
    embedding.chains.values().flatten().copied().collect()
}

/// How an instance's plan variables are laid out on the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    /// One TRIAD over every variable.
    Triad,
    /// One TRIAD per query cluster.
    Clustered,
    /// Clustered, merging neighboring clusters until the embedding fits and
    /// covers every quadratic term, ending with a single TRIAD.
    #[default]
    Auto,
}

/// Embedding of an instance's logical formula, with the chain counts that
/// were actually laid out per cluster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceEmbedding {
    pub embedding: Embedding,
    pub dropped_chains: usize,
    pub clusters: usize,
}

pub fn embed_instance(
    instance: &MqoInstance,
    qubo: &Qubo,
    graph: &ChimeraGraph,
    pattern: Pattern,
) -> Result<InstanceEmbedding> {
    let mut groups: Vec<Vec<usize>> = match pattern {
        Pattern::Triad => vec![(0..instance.num_plans()).collect()],
        Pattern::Clustered | Pattern::Auto => instance
            .clusters()
            .iter()
            .map(|qs| qs.iter().flat_map(|q| instance.query(*q).plans.iter().map(|p| p.0)).collect())
            .collect(),
    };
    loop {
        let attempt = layout_groups(&groups, qubo, graph);
        match (attempt, pattern) {
            (Ok(e), _) => return Ok(e),
            (Err(err), Pattern::Triad | Pattern::Clustered) => return Err(err),
            (Err(err), Pattern::Auto) if groups.len() == 1 => return Err(err),
            (Err(_), Pattern::Auto) => {
                groups = groups.chunks(2).map(|c| c.concat()).collect();
            }
        }
    }
}

fn layout_groups(groups: &[Vec<usize>], qubo: &Qubo, graph: &ChimeraGraph) -> Result<InstanceEmbedding> {
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let fit = fit_clustered(&sizes, graph)?;
    let chains = fit.embedding.chains.into_values();
    let embedding = Embedding { chains: groups.iter().flatten().copied().zip(chains).collect() };
    verify_embedding(&embedding, qubo, graph).into_result()?;
    Ok(InstanceEmbedding { embedding, dropped_chains: fit.dropped_chains, clusters: groups.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chimera::{triad_embedding, Side};
    use crate::qubo::{brute_force_qubo, energy, logical_map_default};
    use crate::{mqo, Execution, TOLERANCE};

    fn two_qubit_chain(graph: &ChimeraGraph) -> Embedding {
        Embedding::from_chains([vec![graph.qubit(0, 0, Side::Left, 0), graph.qubit(0, 0, Side::Right, 0)]])
    }

    #[test]
    fn length_one_chains_copy_weights() {
        let g = ChimeraGraph::new(1, 1);
        let mut q = Qubo::new(2);
        q.add_linear(0, -1.5).unwrap();
        q.add_linear(1, 2.0).unwrap();
        q.add_quadratic(0, 1, 3.0).unwrap();
        let a = g.qubit(0, 0, Side::Left, 0);
        let b = g.qubit(0, 0, Side::Right, 0);
        let e = Embedding::from_chains([vec![a], vec![b]]);
        let pq = embed_qubo_default(&q, &e, &g).unwrap();
        assert_eq!(pq.qubit_weight, BTreeMap::from([(a, -1.5), (b, 2.0)]));
        assert_eq!(pq.coupler_weight, BTreeMap::from([((a, b), 3.0)]));
    }

    #[test]
    fn linear_weight_splits_evenly() {
        let g = ChimeraGraph::new(2, 2);
        let chain = vec![g.qubit(0, 0, Side::Left, 0), g.qubit(0, 0, Side::Right, 1), g.qubit(0, 1, Side::Right, 1)];
        let e = Embedding::from_chains([chain.clone()]);
        let mut q = Qubo::new(1);
        q.add_linear(0, -6.0).unwrap();
        let mut pq = embed_qubo_default(&q, &e, &g).unwrap();
        // strip the chain terms to see the raw split
        let w_b = pq.chain_penalty[&0];
        *pq.qubit_weight.get_mut(&chain[0]).unwrap() -= w_b;
        *pq.qubit_weight.get_mut(&chain[1]).unwrap() -= 2.0 * w_b;
        *pq.qubit_weight.get_mut(&chain[2]).unwrap() -= w_b;
        for q in &chain {
            assert!((pq.qubit_weight[q] + 2.0).abs() < TOLERANCE);
        }
    }

    #[test]
    fn broken_chain_penalty() {
        let g = ChimeraGraph::new(1, 1);
        let e = two_qubit_chain(&g);
        let pq = embed_qubo_default(&Qubo::new(1), &e, &g).unwrap();
        assert_eq!(pq.chain_penalty[&0], 0.25);
        let qs = pq.qubits();
        let energy_of = |bits: [bool; 2]| physical_energy(&pq, &pq.sample_from_bits(&bits).unwrap()).unwrap();
        assert_eq!(energy_of([false, false]), 0.0);
        assert_eq!(energy_of([true, false]), 0.25);
        assert_eq!(energy_of([false, true]), 0.25);
        assert_eq!(energy_of([true, true]), 0.0);
        assert_eq!(qs.len(), 2);
    }

    #[test]
    fn missing_sample_value_is_an_error() {
        let g = ChimeraGraph::new(1, 1);
        let e = two_qubit_chain(&g);
        let pq = embed_qubo_default(&Qubo::new(1), &e, &g).unwrap();
        assert!(physical_energy(&pq, &PhysicalSample::new()).is_err());
        assert!(pq.sample_from_bits(&[true]).is_err());
    }

    #[test]
    fn example_optimum_survives_embedding() {
        let inst = mqo::example_instance();
        let (q, _) = logical_map_default(&inst).unwrap();
        let g = ChimeraGraph::new(1, 1);
        let e = triad_embedding(4, &g, (0, 0)).unwrap();
        let pq = embed_qubo_default(&q, &e, &g).unwrap();
        assert!(pq.num_qubits() <= 8);
        let gs = pq.to_matrix().ground_states(TOLERANCE, 16, Execution::Sequential);
        for code in gs.states {
            let bits: Vec<bool> = (0..pq.num_qubits()).map(|i| code >> i & 1 == 1).collect();
            let (a, report) = decode_physical(&e, &pq.sample_from_bits(&bits).unwrap()).unwrap();
            assert!(report.is_consistent());
            assert_eq!(a, Assignment::from_bits(&[0, 1, 1, 0]));
            assert!((energy(&q, &a).unwrap() + 6.5).abs() < TOLERANCE);
        }
    }

    #[test]
    fn consistent_samples_round_trip() {
        let inst = mqo::example_instance();
        let (q, _) = logical_map_default(&inst).unwrap();
        let g = ChimeraGraph::new(3, 3);
        let e = triad_embedding(4, &g, (1, 1)).unwrap();
        let pq = embed_qubo_default(&q, &e, &g).unwrap();
        for code in 0..16 {
            let a = Assignment::from_code(code, 4);
            let s = encode_logical(&e, &a).unwrap();
            let (back, report) = decode_physical(&e, &s).unwrap();
            assert_eq!(back, a);
            assert!(report.is_consistent());
            let pe = physical_energy(&pq, &s).unwrap();
            assert!((pe - energy(&q, &a).unwrap()).abs() < TOLERANCE);
        }
    }

    #[test]
    fn majority_decoding() {
        let g = ChimeraGraph::new(2, 2);
        let three = vec![g.qubit(0, 0, Side::Left, 0), g.qubit(0, 0, Side::Right, 1), g.qubit(0, 1, Side::Right, 1)];
        let two = vec![g.qubit(1, 0, Side::Left, 0), g.qubit(1, 0, Side::Right, 0)];
        let e = Embedding::from_chains([three.clone(), two.clone()]);
        let mut s: PhysicalSample = three.iter().zip([true, true, false]).map(|(&q, b)| (q, b)).collect();
        s.extend(two.iter().zip([true, false]).map(|(&q, b)| (q, b)));
        let (a, report) = decode_physical(&e, &s).unwrap();
        assert_eq!(a, Assignment::from_bits(&[1, 0]));
        assert_eq!(report.inconsistent, vec![0, 1]);
    }

    /// A chain whose own weight is large and positive while its two qubits
    /// face opposite couplers: summing raw per-qubit bounds lets one bound
    /// cancel the other and the chain breaks at the minimum.
    #[test]
    fn aggregate_rule_can_break_chains() {
        let g = ChimeraGraph::new(1, 2);
        let b1 = g.qubit(0, 0, Side::Right, 0);
        let b2 = g.qubit(0, 1, Side::Right, 0);
        let y = g.qubit(0, 0, Side::Left, 0);
        let z = g.qubit(0, 1, Side::Left, 0);
        let e = Embedding::from_chains([vec![b1, b2], vec![y], vec![z]]);
        let mut q = Qubo::new(3);
        q.add_linear(0, 10.0).unwrap();
        q.add_linear(1, -1000.0).unwrap();
        q.add_linear(2, -1000.0).unwrap();
        q.add_quadratic(0, 1, -20.0).unwrap();
        q.add_quadratic(0, 2, 20.0).unwrap();
        let (_, logical_opt) = brute_force_qubo(&q, 24).unwrap();

        let check = |rule| {
            let pq = embed_qubo_with(&q, &e, &g, 0.25, rule).unwrap();
            let gs = pq.to_matrix().ground_states(TOLERANCE, 16, Execution::Sequential);
            let bits: Vec<bool> = (0..pq.num_qubits()).map(|i| gs.states[0] >> i & 1 == 1).collect();
            let (a, report) = decode_physical(&e, &pq.sample_from_bits(&bits).unwrap()).unwrap();
            (pq.chain_penalty[&0], gs.energy, report.is_consistent(), energy(&q, &a).unwrap())
        };

        let (w_b, ground, consistent, _) = check(ChainStrengthRule::Aggregate);
        assert!((w_b - 10.25).abs() < TOLERANCE);
        assert!(!consistent);
        assert!(ground < logical_opt - 1.0);

        let (w_b, ground, consistent, decoded) = check(ChainStrengthRule::PerQubitClamped);
        assert!((w_b - 15.25).abs() < TOLERANCE);
        assert!(consistent);
        assert!((ground - logical_opt).abs() < TOLERANCE);
        assert!((decoded - logical_opt).abs() < TOLERANCE);
    }

    #[test]
    fn penalty_grows_with_weight_scale() {
        let inst = mqo::example_instance();
        let (q, _) = logical_map_default(&inst).unwrap();
        let g = ChimeraGraph::new(3, 3);
        let e = triad_embedding(8, &g, (0, 0)).unwrap();
        let mut last = BTreeMap::new();
        for scale in [0.5, 1.0, 2.0, 4.0] {
            let mut s = Qubo::new(4);
            for (v, &w) in q.linear().iter().enumerate() {
                s.add_linear(v, scale * w).unwrap();
            }
            for (&(u, v), &w) in q.quadratic() {
                s.add_quadratic(u, v, scale * w).unwrap();
            }
            let sub = Embedding::from_chains((0..4).map(|v| e.chain(v).unwrap().to_vec()));
            let pq = embed_qubo_default(&s, &sub, &g).unwrap();
            for (v, w) in &pq.chain_penalty {
                if let Some(prev) = last.get(v) {
                    assert!(w >= prev);
                }
            }
            last = pq.chain_penalty;
        }
    }

    #[test]
    fn rejects_unverified_embedding() {
        let g = ChimeraGraph::new(2, 6);
        let e = crate::chimera::clustered_embedding(&[8, 8, 8, 8], &g).unwrap();
        let mut q = Qubo::new(32);
        q.add_quadratic(0, 31, 1.0).unwrap();
        assert!(matches!(embed_qubo_default(&q, &e, &g), Err(Error::InvalidEmbedding(_))));
    }

    #[test]
    fn doc_round_trip() {
        let inst = mqo::example_instance();
        let (q, _) = logical_map_default(&inst).unwrap();
        let g = ChimeraGraph::new(1, 1);
        let e = triad_embedding(4, &g, (0, 0)).unwrap();
        let pq = embed_qubo_default(&q, &e, &g).unwrap();
        let text = serde_json::to_string(&pq.to_doc()).unwrap();
        let back: PhysicalDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.physical().unwrap(), pq);
    }

    #[test]
    fn auto_pattern_merges_until_covered() {
        // every plan pair across queries shares a saving, so per-query
        // clusters cannot cover the formula
        let inst = mqo::generate_instance(&mqo::GenerateParams::new(4, 2, 1.0, 3)).unwrap();
        let (q, _) = logical_map_default(&inst).unwrap();
        let g = ChimeraGraph::new(4, 4);
        assert!(embed_instance(&inst, &q, &g, Pattern::Clustered).is_err());
        let e = embed_instance(&inst, &q, &g, Pattern::Auto).unwrap();
        assert_eq!(e.clusters, 1);
        assert_eq!(e.embedding, embed_instance(&inst, &q, &g, Pattern::Triad).unwrap().embedding);
    }

    #[test]
    fn clustered_pattern_without_savings() {
        let inst = mqo::generate_instance(&mqo::GenerateParams::new(6, 3, 0.0, 3)).unwrap();
        let (q, _) = logical_map_default(&inst).unwrap();
        let g = ChimeraGraph::new(4, 4);
        let e = embed_instance(&inst, &q, &g, Pattern::Clustered).unwrap();
        assert_eq!(e.clusters, 6);
        assert_eq!(e.embedding.qubit_count(), 6 * 4);
        assert!(embed_qubo_default(&q, &e.embedding, &g).is_ok());
    }
}
