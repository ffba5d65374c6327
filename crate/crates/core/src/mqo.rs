//! Multiple query optimization model.
//!
//! An instance is a set of queries, each with alternative plans. Plans carry
//! an execution cost, and pairs of plans belonging to different queries may
//! carry a positive saving that is realized when both are executed. A valid
//! solution picks exactly one plan per query; its cost is the sum of plan
//! costs minus the savings of every selected pair.
//!
//! Query and plan ids are strings in files. Internally queries and plans are
//! dense indices sorted by id, so plan indices follow (query, plan) order.
//!
//! Task-based MQO models can be expressed by adding one extra query per task
//! whose single plan carries the task cost, linked to every plan that uses
//! the task by a saving equal to that cost. No automatic expansion is done.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::exec::rng_from_seed;
use crate::{Error, Result, TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QueryId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlanId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClusterId(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub label: String,
    pub plans: Vec<PlanId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub label: String,
    pub query: QueryId,
    pub cost: f64,
}

/// Immutable MQO instance. Build one with [`MqoInstance::builder`] or load it
/// from an [`InstanceDoc`].
#[derive(Clone, Debug, PartialEq)]
pub struct MqoInstance {
    queries: Vec<Query>,
    plans: Vec<Plan>,
    savings: BTreeMap<(PlanId, PlanId), f64>,
    partners: Vec<Vec<(PlanId, f64)>>,
    cluster_of: Vec<ClusterId>,
    cluster_labels: Vec<String>,
}

impl MqoInstance {
    pub fn builder() -> InstanceBuilder {
        InstanceBuilder::default()
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn plans(&self) -> &[Plan] {
        &self.plans
    }

    pub fn num_queries(&self) -> usize {
        self.queries.len()
    }

    pub fn num_plans(&self) -> usize {
        self.plans.len()
    }

    pub fn plan(&self, id: PlanId) -> &Plan {
        &self.plans[id.0]
    }

    pub fn query(&self, id: QueryId) -> &Query {
        &self.queries[id.0]
    }

    pub fn cost_of(&self, id: PlanId) -> f64 {
        self.plans[id.0].cost
    }

    /// Savings keyed by `(a, b)` with `a < b`.
    pub fn savings(&self) -> &BTreeMap<(PlanId, PlanId), f64> {
        &self.savings
    }

    pub fn saving(&self, a: PlanId, b: PlanId) -> f64 {
        let key = if a < b { (a, b) } else { (b, a) };
        self.savings.get(&key).copied().unwrap_or(0.0)
    }

    /// Plans sharing a saving with `id`, in plan order.
    pub fn partners(&self, id: PlanId) -> &[(PlanId, f64)] {
        &self.partners[id.0]
    }

    pub fn cluster_of(&self, q: QueryId) -> ClusterId {
        self.cluster_of[q.0]
    }

    pub fn num_clusters(&self) -> usize {
        self.cluster_labels.len()
    }

    /// Queries of every cluster, clusters ordered by their first query.
    pub fn clusters(&self) -> Vec<Vec<QueryId>> {
        let mut out = vec![Vec::new(); self.cluster_labels.len()];
        for (q, c) in self.cluster_of.iter().enumerate() {
            out[c.0].push(QueryId(q));
        }
        out
    }

    pub fn plan_by_label(&self, label: &str) -> Result<PlanId> {
        self.plans
            .iter()
            .position(|p| p.label == label)
            .map(PlanId)
            .ok_or_else(|| Error::UnknownPlan(label.to_string()))
    }

    pub fn max_cost(&self) -> f64 {
        self.plans.iter().map(|p| p.cost).fold(0.0, f64::max)
    }

    /// Largest accumulated saving any single plan can take part in.
    pub fn max_saving_sum(&self) -> f64 {
        self.partners.iter().map(|ps| ps.iter().map(|(_, s)| s).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Number of valid selections, saturating.
    pub fn combinations(&self) -> u128 {
        self.queries.iter().fold(1u128, |acc, q| acc.saturating_mul(q.plans.len() as u128))
    }

    pub fn to_doc(&self) -> InstanceDoc {
        InstanceDoc {
            queries: self
                .queries
                .iter()
                .map(|q| QueryDoc {
                    id: q.label.clone(),
                    plans: q
                        .plans
                        .iter()
                        .map(|&p| PlanDoc { id: self.plans[p.0].label.clone(), cost: self.plans[p.0].cost })
                        .collect(),
                })
                .collect(),
            savings: {
                let mut v: Vec<SavingDoc> = self
                    .savings
                    .iter()
                    .map(|(&(a, b), &value)| {
                        let (la, lb) = (&self.plans[a.0].label, &self.plans[b.0].label);
                        let (a, b) = if la <= lb { (la, lb) } else { (lb, la) };
                        SavingDoc { a: a.clone(), b: b.clone(), value }
                    })
                    .collect();
                v.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
                v
            },
            clusters: Some(
                self.queries
                    .iter()
                    .enumerate()
                    .map(|(i, q)| (q.label.clone(), self.cluster_labels[self.cluster_of[i].0].clone()))
                    .collect(),
            ),
        }
    }

    pub fn from_doc(doc: &InstanceDoc) -> Result<Self> {
        let mut b = InstanceBuilder::default();
        for q in &doc.queries {
            let plans: Vec<(&str, f64)> = q.plans.iter().map(|p| (p.id.as_str(), p.cost)).collect();
            b = b.query(&q.id, &plans);
        }
        for s in &doc.savings {
            b = b.saving(&s.a, &s.b, s.value);
        }
        if let Some(clusters) = &doc.clusters {
            for (q, c) in clusters {
                b = b.cluster(q, c);
            }
        }
        b.build()
    }

    /// Canonical JSON: identical instances give identical bytes.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text)?;
        Self::from_doc(&doc)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Default)]
pub struct InstanceBuilder {
    queries: Vec<(String, Vec<(String, f64)>)>,
    savings: Vec<(String, String, f64)>,
    clusters: Vec<(String, String)>,
}

impl InstanceBuilder {
    pub fn query(mut self, id: &str, plans: &[(&str, f64)]) -> Self {
        self.queries.push((id.to_string(), plans.iter().map(|(p, c)| (p.to_string(), *c)).collect()));
        self
    }

    pub fn saving(mut self, a: &str, b: &str, value: f64) -> Self {
        self.savings.push((a.to_string(), b.to_string(), value));
        self
    }

    pub fn cluster(mut self, query: &str, cluster: &str) -> Self {
        self.clusters.push((query.to_string(), cluster.to_string()));
        self
    }

    pub fn build(self) -> Result<MqoInstance> {
        let invalid = |m: String| Error::InvalidInstance(m);

        let mut queries = self.queries;
        queries.sort_by(|a, b| a.0.cmp(&b.0));
        for w in queries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(invalid(format!("duplicate query `{}`", w[0].0)));
            }
        }

        let mut out_queries = Vec::with_capacity(queries.len());
        let mut plans = Vec::new();
        let mut plan_index: HashMap<String, PlanId> = HashMap::new();
        for (qi, (qid, mut qplans)) in queries.into_iter().enumerate() {
            if qplans.is_empty() {
                return Err(invalid(format!("query `{qid}` has no plans")));
            }
            qplans.sort_by(|a, b| a.0.cmp(&b.0));
            let mut ids = Vec::with_capacity(qplans.len());
            for (pid, cost) in qplans {
                if !cost.is_finite() || cost < 0.0 {
                    return Err(invalid(format!("plan `{pid}` has invalid cost {cost}")));
                }
                let id = PlanId(plans.len());
                if plan_index.insert(pid.clone(), id).is_some() {
                    return Err(invalid(format!("duplicate plan `{pid}`")));
                }
                plans.push(Plan { label: pid, query: QueryId(qi), cost });
                ids.push(id);
            }
            out_queries.push(Query { label: qid, plans: ids });
        }

        let lookup = |label: &str| plan_index.get(label).copied().ok_or_else(|| Error::UnknownPlan(label.to_string()));
        let mut savings = BTreeMap::new();
        for (a, b, value) in &self.savings {
            let (pa, pb) = (lookup(a)?, lookup(b)?);
            if !(value.is_finite() && *value > 0.0) {
                return Err(invalid(format!("saving ({a}, {b}) must be positive, got {value}")));
            }
            if plans[pa.0].query == plans[pb.0].query {
                return Err(invalid(format!("saving ({a}, {b}) connects plans of the same query")));
            }
            let key = if pa < pb { (pa, pb) } else { (pb, pa) };
            if savings.insert(key, *value).is_some() {
                return Err(invalid(format!("duplicate saving ({a}, {b})")));
            }
        }

        let mut partners = vec![Vec::new(); plans.len()];
        for (&(a, b), &s) in &savings {
            partners[a.0].push((b, s));
            partners[b.0].push((a, s));
        }
        for p in &mut partners {
            p.sort_by_key(|(id, _)| *id);
        }

        let mut explicit: HashMap<&str, &str> = HashMap::new();
        for (q, c) in &self.clusters {
            if !out_queries.iter().any(|x| &x.label == q) {
                return Err(invalid(format!("cluster entry for unknown query `{q}`")));
            }
            explicit.insert(q, c);
        }
        let mut cluster_labels: Vec<String> = Vec::new();
        let mut cluster_of = Vec::with_capacity(out_queries.len());
        for q in &out_queries {
            let label = explicit.get(q.label.as_str()).map_or(q.label.as_str(), |c| c);
            let idx = match cluster_labels.iter().position(|c| c == label) {
                Some(i) => i,
                None => {
                    cluster_labels.push(label.to_string());
                    cluster_labels.len() - 1
                }
            };
            cluster_of.push(ClusterId(idx));
        }

        Ok(MqoInstance { queries: out_queries, plans, savings, partners, cluster_of, cluster_labels })
    }
}

/// Serialized instance layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub queries: Vec<QueryDoc>,
    #[serde(default)]
    pub savings: Vec<SavingDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryDoc {
    pub id: String,
    pub plans: Vec<PlanDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanDoc {
    pub id: String,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SavingDoc {
    pub a: String,
    pub b: String,
    pub value: f64,
}

/// A set of selected plans. Validity is checked by [`validate_solution`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlanSelection {
    pub selected: BTreeSet<PlanId>,
}

impl PlanSelection {
    pub fn new(plans: impl IntoIterator<Item = PlanId>) -> Self {
        Self { selected: plans.into_iter().collect() }
    }

    pub fn from_labels<S: AsRef<str>>(instance: &MqoInstance, labels: &[S]) -> Result<Self> {
        labels
            .iter()
            .map(|l| instance.plan_by_label(l.as_ref()))
            .collect::<Result<BTreeSet<_>>>()
            .map(|selected| Self { selected })
    }

    /// Selection picking `choice[q]`-th plan of each query.
    pub fn from_choices(instance: &MqoInstance, choice: &[usize]) -> Self {
        Self::new(instance.queries.iter().zip(choice).map(|(q, &c)| q.plans[c]))
    }

    pub fn labels(&self, instance: &MqoInstance) -> Vec<String> {
        self.selected.iter().map(|p| instance.plan(*p).label.clone()).collect()
    }

    pub fn contains(&self, p: PlanId) -> bool {
        self.selected.contains(&p)
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

fn check_known(instance: &MqoInstance, selection: &PlanSelection) -> Result<()> {
    match selection.selected.iter().find(|p| p.0 >= instance.num_plans()) {
        Some(p) => Err(Error::UnknownPlan(format!("#{}", p.0))),
        None => Ok(()),
    }
}

/// Accumulated execution cost: plan costs minus savings of selected pairs.
/// Does not require the selection to be valid.
pub fn cost(instance: &MqoInstance, selection: &PlanSelection) -> Result<f64> {
    check_known(instance, selection)?;
    let mut total = 0.0;
    for &p in &selection.selected {
        total += instance.cost_of(p);
        for &(other, s) in instance.partners(p) {
            if other > p && selection.contains(other) {
                total -= s;
            }
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidityReport {
    pub valid: bool,
    /// Selected plan count per query.
    pub counts: Vec<usize>,
    /// Queries with zero or several selected plans.
    pub violations: Vec<QueryId>,
}

pub fn validate_solution(instance: &MqoInstance, selection: &PlanSelection) -> Result<ValidityReport> {
    check_known(instance, selection)?;
    let mut counts = vec![0usize; instance.num_queries()];
    for &p in &selection.selected {
        counts[instance.plan(p).query.0] += 1;
    }
    let violations: Vec<QueryId> =
        counts.iter().enumerate().filter(|(_, &c)| c != 1).map(|(q, _)| QueryId(q)).collect();
    Ok(ValidityReport { valid: violations.is_empty(), counts, violations })
}

pub const DEFAULT_MQO_BUDGET: u128 = 10_000_000;

/// Exhaustive optimum over all valid selections.
///
/// Enumerates plan choices in reflected mixed-radix Gray order so each step
/// changes one query and the cost is updated in O(partners). Ties resolve to
/// the lexicographically smallest choice vector (query-major plan order).
pub fn brute_force_mqo(instance: &MqoInstance, budget: u128) -> Result<(PlanSelection, f64)> {
    let count = instance.combinations();
    if count > budget {
        return Err(Error::BudgetExceeded { count, budget });
    }
    let radix: Vec<usize> = instance.queries.iter().map(|q| q.plans.len()).collect();
    let n = radix.len();
    let mut digit = vec![0usize; n];
    let mut dir = vec![1isize; n];
    let mut selected = vec![false; instance.num_plans()];
    for q in &instance.queries {
        selected[q.plans[0].0] = true;
    }
    let start = PlanSelection::new(instance.queries.iter().map(|q| q.plans[0]));
    let mut current = cost(instance, &start)?;
    let mut best = current;
    let mut best_digits = digit.clone();

    loop {
        let mut j = 0;
        loop {
            if j == n {
                let sel = PlanSelection::from_choices(instance, &best_digits);
                let exact = cost(instance, &sel)?;
                return Ok((sel, exact));
            }
            let next = digit[j] as isize + dir[j];
            if next >= 0 && (next as usize) < radix[j] {
                break;
            }
            dir[j] = -dir[j];
            j += 1;
        }
        let old = instance.queries[j].plans[digit[j]];
        digit[j] = (digit[j] as isize + dir[j]) as usize;
        let new = instance.queries[j].plans[digit[j]];
        selected[old.0] = false;
        let mut delta = instance.cost_of(new) - instance.cost_of(old);
        for &(r, s) in instance.partners(old) {
            if selected[r.0] {
                delta += s;
            }
        }
        for &(r, s) in instance.partners(new) {
            if selected[r.0] {
                delta -= s;
            }
        }
        selected[new.0] = true;
        current += delta;

        if current < best - TOLERANCE || (current <= best + TOLERANCE && digit < best_digits) {
            best = best.min(current);
            best_digits.clone_from(&digit);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateParams {
    pub queries: usize,
    pub plans_per_query: usize,
    pub savings_density: f64,
    pub cost_range: (f64, f64),
    pub savings_range: (f64, f64),
    pub seed: u64,
}

impl GenerateParams {
    pub fn new(queries: usize, plans_per_query: usize, savings_density: f64, seed: u64) -> Self {
        Self { queries, plans_per_query, savings_density, cost_range: (1.0, 10.0), savings_range: (0.5, 5.0), seed }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.queries == 0 || self.plans_per_query == 0 {
            return bad("queries and plans per query must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.savings_density) {
            return bad("savings density must lie in [0, 1]");
        }
        let (clo, chi) = self.cost_range;
        if !(clo.is_finite() && chi.is_finite() && clo >= 0.0 && clo <= chi) {
            return bad("cost range must satisfy 0 <= lo <= hi");
        }
        let (slo, shi) = self.savings_range;
        if !(slo.is_finite() && shi.is_finite() && slo > 0.0 && slo <= shi) {
            return bad("savings range must satisfy 0 < lo <= hi");
        }
        Ok(())
    }

    pub(crate) fn draw_cost(&self, rng: &mut impl Rng) -> f64 {
        rng.gen_range(self.cost_range.0..=self.cost_range.1)
    }

    pub(crate) fn draw_saving(&self, rng: &mut impl Rng) -> f64 {
        rng.gen_range(self.savings_range.0..=self.savings_range.1)
    }
}

pub(crate) fn label_width(n: usize) -> usize {
    n.saturating_sub(1).to_string().len()
}

/// Query and plan skeleton shared by the random generators: zero-padded ids so
/// lexicographic order equals numeric order, one cluster per query.
pub(crate) fn skeleton(params: &GenerateParams, rng: &mut impl Rng) -> InstanceBuilder {
    let qw = label_width(params.queries);
    let pw = label_width(params.queries * params.plans_per_query);
    let mut b = InstanceBuilder::default();
    for q in 0..params.queries {
        let plans: Vec<(String, f64)> = (0..params.plans_per_query)
            .map(|k| (format!("p{:0pw$}", q * params.plans_per_query + k), params.draw_cost(rng)))
            .collect();
        let refs: Vec<(&str, f64)> = plans.iter().map(|(l, c)| (l.as_str(), *c)).collect();
        b = b.query(&format!("q{q:0qw$}"), &refs);
    }
    b
}

pub(crate) fn plan_label(params: &GenerateParams, index: usize) -> String {
    let pw = label_width(params.queries * params.plans_per_query);
    format!("p{index:0pw$}")
}

/// Seeded random instance: uniform costs, and every inter-query plan pair
/// receives a uniform saving with probability `savings_density`.
pub fn generate_instance(params: &GenerateParams) -> Result<MqoInstance> {
    params.validate()?;
    let mut rng = rng_from_seed(params.seed);
    let mut b = skeleton(params, &mut rng);
    let total = params.queries * params.plans_per_query;
    for a in 0..total {
        for c in (a + 1)..total {
            if a / params.plans_per_query == c / params.plans_per_query {
                continue;
            }
            if rng.gen::<f64>() < params.savings_density {
                let s = params.draw_saving(&mut rng);
                b = b.saving(&plan_label(params, a), &plan_label(params, c), s);
            }
        }
    }
    b.build()
}

/// The four-plan, two-query instance used throughout the docs and tests:
/// costs 2, 4, 3, 1 and a saving of 5 between `p2` and `p3`.
pub fn example_instance() -> MqoInstance {
    MqoInstance::builder()
        .query("q1", &[("p1", 2.0), ("p2", 4.0)])
        .query("q2", &[("p3", 3.0), ("p4", 1.0)])
        .saving("p2", "p3", 5.0)
        .build()
        .expect("example instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sel(inst: &MqoInstance, labels: &[&str]) -> PlanSelection {
        PlanSelection::from_labels(inst, labels).unwrap()
    }

    #[test]
    fn example_costs() {
        let inst = example_instance();
        assert!((cost(&inst, &sel(&inst, &["p2", "p3"])).unwrap() - 2.0).abs() < TOLERANCE);
        assert_eq!(cost(&inst, &PlanSelection::default()).unwrap(), 0.0);
        assert!((cost(&inst, &sel(&inst, &["p1", "p4"])).unwrap() - 3.0).abs() < TOLERANCE);
    }

    #[test]
    fn unknown_plan_is_named() {
        let inst = example_instance();
        let err = PlanSelection::from_labels(&inst, &["p9"]).unwrap_err();
        assert!(err.to_string().contains("p9"));
        let err = cost(&inst, &PlanSelection::new([PlanId(17)])).unwrap_err();
        assert!(err.to_string().contains("17"));
    }

    #[test]
    fn validity() {
        let inst = example_instance();
        assert!(validate_solution(&inst, &sel(&inst, &["p2", "p3"])).unwrap().valid);

        let r = validate_solution(&inst, &sel(&inst, &["p1", "p2"])).unwrap();
        assert!(!r.valid);
        assert_eq!(r.violations, vec![QueryId(0), QueryId(1)]);
        assert_eq!(r.counts, vec![2, 0]);

        let r = validate_solution(&inst, &PlanSelection::default()).unwrap();
        assert_eq!(r.violations.len(), 2);
    }

    #[test]
    fn brute_force_example() {
        let inst = example_instance();
        let (best, c) = brute_force_mqo(&inst, DEFAULT_MQO_BUDGET).unwrap();
        assert_eq!(best.labels(&inst), vec!["p2", "p3"]);
        assert!((c - 2.0).abs() < TOLERANCE);
    }

    #[test]
    fn brute_force_single_query() {
        let inst = MqoInstance::builder().query("q", &[("a", 3.0), ("b", 1.0)]).build().unwrap();
        let (best, c) = brute_force_mqo(&inst, DEFAULT_MQO_BUDGET).unwrap();
        assert_eq!(best.labels(&inst), vec!["b"]);
        assert_eq!(c, 1.0);
    }

    #[test]
    fn brute_force_budget() {
        let inst = generate_instance(&GenerateParams::new(10, 3, 0.1, 1)).unwrap();
        match brute_force_mqo(&inst, 1000) {
            Err(Error::BudgetExceeded { count, budget }) => {
                assert_eq!(count, 59049);
                assert_eq!(budget, 1000);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn brute_force_ties_pick_lexicographic_first() {
        let inst = MqoInstance::builder()
            .query("q1", &[("a", 1.0), ("b", 1.0)])
            .query("q2", &[("c", 2.0), ("d", 2.0)])
            .build()
            .unwrap();
        let (best, _) = brute_force_mqo(&inst, DEFAULT_MQO_BUDGET).unwrap();
        assert_eq!(best.labels(&inst), vec!["a", "c"]);
    }

    #[test]
    fn construction_rejects_bad_input() {
        let same_query = MqoInstance::builder().query("q", &[("a", 1.0), ("b", 1.0)]).saving("a", "b", 1.0).build();
        assert!(matches!(same_query, Err(Error::InvalidInstance(_))));

        let non_positive =
            MqoInstance::builder().query("q1", &[("a", 1.0)]).query("q2", &[("b", 1.0)]).saving("a", "b", 0.0).build();
        assert!(non_positive.is_err());

        let negative_cost = MqoInstance::builder().query("q", &[("a", -1.0)]).build();
        assert!(negative_cost.is_err());

        let empty_query = MqoInstance::builder().query("q", &[]).build();
        assert!(empty_query.is_err());

        let dup_plan = MqoInstance::builder().query("q1", &[("a", 1.0)]).query("q2", &[("a", 1.0)]).build();
        assert!(dup_plan.is_err());

        let unknown = MqoInstance::builder().query("q1", &[("a", 1.0)]).saving("a", "zz", 1.0).build();
        assert!(matches!(unknown, Err(Error::UnknownPlan(ref s)) if s == "zz"));
    }

    #[test]
    fn generator_determinism_and_counts() {
        let p = GenerateParams::new(6, 3, 0.4, 99);
        let a = generate_instance(&p).unwrap().to_json().unwrap();
        let b = generate_instance(&p).unwrap().to_json().unwrap();
        assert_eq!(a, b);

        let zero = generate_instance(&GenerateParams::new(5, 2, 0.0, 3)).unwrap();
        assert!(zero.savings().is_empty());
        assert_eq!(zero.num_clusters(), 5);

        let large = generate_instance(&GenerateParams::new(537, 2, 0.0, 1)).unwrap();
        assert_eq!(large.num_plans(), 1074);
    }

    #[test]
    fn generator_rejects_bad_params() {
        let mut p = GenerateParams::new(3, 2, 1.5, 1);
        assert!(generate_instance(&p).is_err());
        p.savings_density = 0.5;
        p.cost_range = (5.0, 1.0);
        assert!(generate_instance(&p).is_err());
        p.cost_range = (1.0, 5.0);
        p.savings_range = (0.0, 1.0);
        assert!(generate_instance(&p).is_err());
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let inst = MqoInstance::builder()
            .query("q2", &[("p4", 1.0), ("p3", 3.0)])
            .query("q1", &[("p2", 4.0), ("p1", 2.0)])
            .saving("p3", "p2", 5.0)
            .build()
            .unwrap();
        let text = inst.to_json().unwrap();
        assert_eq!(text, example_instance().to_json().unwrap());
        let back = MqoInstance::from_json(&text).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn explicit_clusters() {
        let inst = MqoInstance::builder()
            .query("q1", &[("a", 1.0)])
            .query("q2", &[("b", 1.0)])
            .query("q3", &[("c", 1.0)])
            .cluster("q1", "x")
            .cluster("q3", "x")
            .build()
            .unwrap();
        assert_eq!(inst.num_clusters(), 2);
        assert_eq!(inst.clusters(), vec![vec![QueryId(0), QueryId(2)], vec![QueryId(1)]]);
    }
}
