//! Logical energy formula.
//!
//! One binary variable per plan. With `w_L > max c_p` and
//! `w_M > w_L + max_p Σ s_{p,·}`, the formula
//!
//! ```text
//! E(X) = Σ_p (c_p − w_L) X_p + w_M Σ_q Σ_{p1<p2 ∈ P_q} X_p1 X_p2 − Σ s_{p1,p2} X_p1 X_p2
//! ```
//!
//! is minimized exactly by the cheapest valid plan selection. Every strict
//! bound is realized as `bound + ε`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::mqo::{self, MqoInstance, PlanId, PlanSelection};
use crate::{Error, Result, DEFAULT_EPSILON, TOLERANCE};

/// Quadratic energy over binary variables. Quadratic keys are `(u, v)` with
/// `u < v`; diagonal terms live in `linear` because `x² = x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Qubo {
    num_vars: usize,
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
}

impl Qubo {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, linear: vec![0.0; num_vars], quadratic: BTreeMap::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn quadratic_weight(&self, u: usize, v: usize) -> f64 {
        let key = if u < v { (u, v) } else { (v, u) };
        self.quadratic.get(&key).copied().unwrap_or(0.0)
    }

    fn check_var(&self, v: usize) -> Result<()> {
        if v >= self.num_vars {
            return Err(Error::InvalidParameter(format!("variable {v} out of range 0..{}", self.num_vars)));
        }
        Ok(())
    }

    pub fn add_linear(&mut self, v: usize, w: f64) -> Result<()> {
        self.check_var(v)?;
        self.linear[v] += w;
        Ok(())
    }

    /// Adds `w·x_u·x_v`; `u == v` folds into the linear term.
    pub fn add_quadratic(&mut self, u: usize, v: usize, w: f64) -> Result<()> {
        self.check_var(u)?;
        self.check_var(v)?;
        if u == v {
            self.linear[u] += w;
        } else {
            *self.quadratic.entry((u.min(v), u.max(v))).or_insert(0.0) += w;
        }
        Ok(())
    }

    /// Largest absolute weight, linear or quadratic.
    pub fn max_abs_weight(&self) -> f64 {
        self.linear.iter().chain(self.quadratic.values()).fold(0.0, |m, w| m.max(w.abs()))
    }

    pub fn matrix(&self) -> QuboMatrix {
        QuboMatrix::from_terms(self.num_vars, self.linear.clone(), self.quadratic.iter().map(|(&(u, v), &w)| (u, v, w)))
    }
}

/// Binary assignment, one value per variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![false; n] }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        Self { values: bits.iter().map(|&b| b != 0).collect() }
    }

    /// Bit `i` of `code` is variable `i`.
    pub fn from_code(code: u64, n: usize) -> Self {
        Self { values: (0..n).map(|i| code >> i & 1 == 1).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn energy(qubo: &Qubo, a: &Assignment) -> Result<f64> {
    if a.len() != qubo.num_vars {
        return Err(Error::LengthMismatch { expected: qubo.num_vars, actual: a.len() });
    }
    let x = &a.values;
    let mut e: f64 = qubo.linear.iter().zip(x).filter(|(_, &b)| b).map(|(w, _)| w).sum();
    for (&(u, v), w) in &qubo.quadratic {
        if x[u] && x[v] {
            e += w;
        }
    }
    Ok(e)
}

/// Symmetric sparse form used by the samplers and the exhaustive search.
#[derive(Clone, Debug, PartialEq)]
pub struct QuboMatrix {
    pub linear: Vec<f64>,
    pub neighbors: Vec<Vec<(u32, f64)>>,
}

impl QuboMatrix {
    pub fn from_terms(n: usize, linear: Vec<f64>, terms: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for (u, v, w) in terms {
            neighbors[u].push((v as u32, w));
            neighbors[v].push((u as u32, w));
        }
        Self { linear, neighbors }
    }

    pub fn len(&self) -> usize {
        self.linear.len()
    }

    pub fn is_empty(&self) -> bool {
        self.linear.is_empty()
    }

    pub fn energy(&self, x: &[bool]) -> f64 {
        let mut e = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            if !xi {
                continue;
            }
            e += self.linear[i];
            for &(j, w) in &self.neighbors[i] {
                if (j as usize) > i && x[j as usize] {
                    e += w;
                }
            }
        }
        e
    }

    /// Local field `linear_i + Σ_j w_ij x_j`; flipping bit `i` changes the
    /// energy by `(1 − 2 x_i) · field_i`.
    pub fn field(&self, i: usize, x: &[bool]) -> f64 {
        self.linear[i] + self.neighbors[i].iter().filter(|(j, _)| x[*j as usize]).map(|(_, w)| w).sum::<f64>()
    }

    pub fn max_abs_weight(&self) -> f64 {
        let q = self.neighbors.iter().flatten().fold(0.0f64, |m, (_, w)| m.max(w.abs()));
        self.linear.iter().fold(q, |m, w| m.max(w.abs()))
    }

    /// All assignments within `tol` of the global minimum, by exhaustive
    /// Gray-code enumeration. States are codes with bit `i` = variable `i`,
    /// sorted ascending; at most `cap` are kept.
    pub fn ground_states(&self, tol: f64, cap: usize, exec: Execution) -> GroundStates {
        let n = self.len();
        assert!(n < 63, "exhaustive search limited to < 63 variables");
        // Fix the top bits to split the space into independent blocks.
        let split = if n >= 16 { (n - 12).min(8) } else { 0 };
        let low = n - split;
        let blocks = exec.map(1usize << split, |prefix| self.enumerate_block(low, prefix as u64, tol, cap));
        let best = blocks.iter().map(|b| b.energy).fold(f64::INFINITY, f64::min);
        let mut states: Vec<u64> = blocks
            .into_iter()
            .filter(|b| b.energy <= best + tol)
            .flat_map(|b| b.states.into_iter())
            .filter(|&code| self.energy_of_code(code) <= best + tol)
            .collect();
        states.sort_unstable();
        states.truncate(cap);
        let energy = states.first().map_or(best, |&c| self.energy_of_code(c));
        GroundStates { energy, states }
    }

    fn energy_of_code(&self, code: u64) -> f64 {
        let x: Vec<bool> = (0..self.len()).map(|i| code >> i & 1 == 1).collect();
        self.energy(&x)
    }

    fn enumerate_block(&self, low: usize, prefix: u64, tol: f64, cap: usize) -> GroundStates {
        let n = self.len();
        let mut code = prefix << low;
        let mut x: Vec<bool> = (0..n).map(|i| code >> i & 1 == 1).collect();
        let mut field: Vec<f64> = (0..n).map(|i| self.field(i, &x)).collect();
        let mut e = self.energy(&x);
        let mut best = e;
        let mut states = vec![code];
        for step in 1u64..(1u64 << low) {
            let i = step.trailing_zeros() as usize;
            let sign = if x[i] { -1.0 } else { 1.0 };
            e += sign * field[i];
            x[i] = !x[i];
            code ^= 1 << i;
            for &(j, w) in &self.neighbors[i] {
                field[j as usize] += sign * w;
            }
            if e < best - tol {
                best = e;
                states.clear();
                states.push(code);
            } else if e <= best + tol {
                best = best.min(e);
                if states.len() < cap {
                    states.push(code);
                } else if let Some(worst) = states.iter_mut().max() {
                    // keep the smallest codes
                    if code < *worst {
                        *worst = code;
                    }
                }
            }
        }
        GroundStates { energy: best, states }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundStates {
    pub energy: f64,
    pub states: Vec<u64>,
}

pub const DEFAULT_QUBO_BUDGET: usize = 24;

/// Exhaustive QUBO minimum. Ties resolve to the smallest code, where bit `i`
/// is variable `i`.
pub fn brute_force_qubo(qubo: &Qubo, budget: usize) -> Result<(Assignment, f64)> {
    brute_force_qubo_with(qubo, budget, Execution::default())
}

pub fn brute_force_qubo_with(qubo: &Qubo, budget: usize, exec: Execution) -> Result<(Assignment, f64)> {
    let n = qubo.num_vars;
    if n > budget || n >= 63 {
        return Err(Error::BudgetExceeded { count: 1u128 << n.min(127), budget: 1u128 << budget.min(127) });
    }
    let gs = qubo.matrix().ground_states(TOLERANCE, 1, exec);
    let a = Assignment::from_code(gs.states[0], n);
    let e = energy(qubo, &a)?;
    Ok((a, e))
}

/// Weights and plan labels attached to a logical QUBO. Variable `i` is plan `i`
/// of the source instance.
#[derive(Clone, Debug, PartialEq)]
pub struct LogicalMapping {
    pub plans: Vec<String>,
    pub w_l: f64,
    pub w_m: f64,
    pub epsilon: f64,
}

impl LogicalMapping {
    pub fn num_vars(&self) -> usize {
        self.plans.len()
    }

    pub fn plan_of_var(&self, v: usize) -> PlanId {
        PlanId(v)
    }

    pub fn var_of_plan(&self, p: PlanId) -> usize {
        p.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogicalWeights {
    pub w_l: f64,
    pub w_m: f64,
    pub epsilon: f64,
}

impl LogicalWeights {
    /// Smallest admissible weights: each strict bound plus `epsilon`.
    pub fn derive(instance: &MqoInstance, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        let w_l = instance.max_cost() + epsilon;
        let w_m = w_l + instance.max_saving_sum() + epsilon;
        Ok(Self { w_l, w_m, epsilon })
    }
}

pub fn logical_map(instance: &MqoInstance, epsilon: f64) -> Result<(Qubo, LogicalMapping)> {
    let weights = LogicalWeights::derive(instance, epsilon)?;
    logical_map_with(instance, weights)
}

/// Builds the logical formula for explicit weights. Used directly only for
/// experiments that violate the bounds on purpose.
pub fn logical_map_with(instance: &MqoInstance, weights: LogicalWeights) -> Result<(Qubo, LogicalMapping)> {
    if instance.num_queries() == 0 {
        return Err(Error::InvalidInstance("instance has no queries".into()));
    }
    let mut q = Qubo::new(instance.num_plans());
    for (i, plan) in instance.plans().iter().enumerate() {
        q.linear[i] = plan.cost - weights.w_l;
    }
    for query in instance.queries() {
        for (k, a) in query.plans.iter().enumerate() {
            for b in &query.plans[k + 1..] {
                q.add_quadratic(a.0, b.0, weights.w_m)?;
            }
        }
    }
    for (&(a, b), &s) in instance.savings() {
        q.add_quadratic(a.0, b.0, -s)?;
    }
    let mapping = LogicalMapping {
        plans: instance.plans().iter().map(|p| p.label.clone()).collect(),
        w_l: weights.w_l,
        w_m: weights.w_m,
        epsilon: weights.epsilon,
    };
    Ok((q, mapping))
}

pub fn logical_map_default(instance: &MqoInstance) -> Result<(Qubo, LogicalMapping)> {
    logical_map(instance, DEFAULT_EPSILON)
}

/// Plans whose variable is set. Validity is not enforced.
pub fn decode_logical(mapping: &LogicalMapping, a: &Assignment) -> Result<PlanSelection> {
    if a.len() != mapping.num_vars() {
        return Err(Error::LengthMismatch { expected: mapping.num_vars(), actual: a.len() });
    }
    Ok(PlanSelection::new(a.values.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| mapping.plan_of_var(i))))
}

/// Turns any selection into a valid one.
///
/// Queries with exactly one selected plan are kept as they are. Then, in query
/// order, an empty query gets its cheapest plan and an over-full query keeps
/// the selected plan minimizing `cost − savings with already kept plans`.
/// Ties go to the lower plan id.
pub fn repair_selection(instance: &MqoInstance, selection: &PlanSelection) -> PlanSelection {
    let mut per_query: Vec<Vec<PlanId>> = vec![Vec::new(); instance.num_queries()];
    for &p in &selection.selected {
        if p.0 < instance.num_plans() {
            per_query[instance.plan(p).query.0].push(p);
        }
    }
    let mut kept = vec![false; instance.num_plans()];
    for chosen in &per_query {
        if let [p] = chosen.as_slice() {
            kept[p.0] = true;
        }
    }
    for (q, chosen) in per_query.iter().enumerate() {
        let pick = match chosen.len() {
            1 => continue,
            0 => *instance.queries()[q]
                .plans
                .iter()
                .min_by(|a, b| instance.cost_of(**a).total_cmp(&instance.cost_of(**b)).then(a.cmp(b)))
                .expect("queries have plans"),
            _ => {
                let score = |p: PlanId| {
                    instance.cost_of(p)
                        - instance.partners(p).iter().filter(|(r, _)| kept[r.0]).map(|(_, s)| s).sum::<f64>()
                };
                *chosen.iter().min_by(|a, b| score(**a).total_cmp(&score(**b)).then(a.cmp(b))).expect("non-empty")
            }
        };
        kept[pick.0] = true;
    }
    PlanSelection::new(kept.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| PlanId(i)))
}

/// Repaired selection, its cost and whether the input was already valid.
pub fn decode_and_repair(instance: &MqoInstance, selection: &PlanSelection) -> Result<(PlanSelection, f64, bool)> {
    let valid = mqo::validate_solution(instance, selection)?.valid;
    let repaired = if valid { selection.clone() } else { repair_selection(instance, selection) };
    let c = mqo::cost(instance, &repaired)?;
    Ok((repaired, c, valid))
}

/// Serialized QUBO with its mapping section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuboDoc {
    pub num_vars: usize,
    pub linear: Vec<(usize, f64)>,
    pub quadratic: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping: Option<MappingDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MappingDoc {
    pub plans: Vec<String>,
    #[serde(rename = "w_L")]
    pub w_l: f64,
    #[serde(rename = "w_M")]
    pub w_m: f64,
    pub epsilon: f64,
}

impl QuboDoc {
    pub fn new(qubo: &Qubo, mapping: Option<&LogicalMapping>) -> Self {
        Self {
            num_vars: qubo.num_vars,
            linear: qubo.linear.iter().copied().enumerate().collect(),
            quadratic: qubo.quadratic.iter().map(|(&(u, v), &w)| (u, v, w)).collect(),
            mapping: mapping.map(|m| MappingDoc { plans: m.plans.clone(), w_l: m.w_l, w_m: m.w_m, epsilon: m.epsilon }),
        }
    }

    pub fn qubo(&self) -> Result<Qubo> {
        let mut q = Qubo::new(self.num_vars);
        for &(v, w) in &self.linear {
            q.add_linear(v, w)?;
        }
        for &(u, v, w) in &self.quadratic {
            if u >= v {
                return Err(Error::InvalidParameter(format!("quadratic key ({u}, {v}) must satisfy u < v")));
            }
            q.add_quadratic(u, v, w)?;
        }
        Ok(q)
    }

    pub fn mapping(&self) -> Option<LogicalMapping> {
        self.mapping.as_ref().map(|m| LogicalMapping {
            plans: m.plans.clone(),
            w_l: m.w_l,
            w_m: m.w_m,
            epsilon: m.epsilon,
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mqo::{example_instance, GenerateParams};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < TOLERANCE
    }

    #[test]
    fn example_weights_and_terms() {
        let inst = example_instance();
        let (q, m) = logical_map(&inst, 0.25).unwrap();
        assert!(close(m.w_l, 4.25));
        assert!(close(m.w_m, 9.5));
        let expected = [-2.25, -0.25, -1.25, -3.25];
        for (w, e) in q.linear().iter().zip(expected) {
            assert!(close(*w, e));
        }
        assert_eq!(q.quadratic().len(), 3);
        assert!(close(q.quadratic_weight(0, 1), 9.5));
        assert!(close(q.quadratic_weight(2, 3), 9.5));
        assert!(close(q.quadratic_weight(1, 2), -5.0));
    }

    #[test]
    fn no_savings_gives_minimal_w_m() {
        let inst = crate::mqo::generate_instance(&GenerateParams::new(3, 2, 0.0, 5)).unwrap();
        let (q, m) = logical_map(&inst, 0.25).unwrap();
        assert!(close(m.w_m, m.w_l + 0.25));
        assert!(q.quadratic().values().all(|&w| w > 0.0));
    }

    #[test]
    fn single_forced_plan() {
        let inst = MqoInstance::builder().query("q", &[("p", 7.0)]).build().unwrap();
        let (q, _) = logical_map(&inst, 0.25).unwrap();
        assert!(close(q.linear()[0], 7.0 - 7.25));
        let (a, _) = brute_force_qubo(&q, DEFAULT_QUBO_BUDGET).unwrap();
        assert_eq!(a.values, vec![true]);
    }

    #[test]
    fn empty_instance_is_rejected() {
        let inst = MqoInstance::builder().build().unwrap();
        assert!(logical_map(&inst, 0.25).is_err());
        assert!(logical_map(&example_instance(), 0.0).is_err());
    }

    #[test]
    fn energies() {
        let (q, _) = logical_map(&example_instance(), 0.25).unwrap();
        assert!(close(energy(&q, &Assignment::from_bits(&[0, 1, 1, 0])).unwrap(), -6.5));
        assert_eq!(energy(&q, &Assignment::zeros(4)).unwrap(), 0.0);
        assert!(energy(&q, &Assignment::zeros(3)).is_err());

        let mut one = Qubo::new(1);
        one.add_linear(0, -1.0).unwrap();
        assert_eq!(energy(&one, &Assignment::from_bits(&[1])).unwrap(), -1.0);
    }

    #[test]
    fn decode() {
        let (_, m) = logical_map(&example_instance(), 0.25).unwrap();
        let inst = example_instance();
        let sel = decode_logical(&m, &Assignment::from_bits(&[0, 1, 1, 0])).unwrap();
        assert_eq!(sel.labels(&inst), vec!["p2", "p3"]);
        assert!(decode_logical(&m, &Assignment::zeros(4)).unwrap().is_empty());
        assert_eq!(decode_logical(&m, &Assignment::from_bits(&[1, 1, 1, 1])).unwrap().len(), 4);
    }

    #[test]
    fn brute_force_small_cases() {
        let (q, _) = logical_map(&example_instance(), 0.25).unwrap();
        let (a, e) = brute_force_qubo(&q, DEFAULT_QUBO_BUDGET).unwrap();
        assert_eq!(a, Assignment::from_bits(&[0, 1, 1, 0]));
        assert!(close(e, -6.5));

        let mut pos = Qubo::new(1);
        pos.add_linear(0, 1.0).unwrap();
        assert_eq!(brute_force_qubo(&pos, 24).unwrap(), (Assignment::from_bits(&[0]), 0.0));

        let mut two = Qubo::new(2);
        two.add_linear(0, -1.0).unwrap();
        two.add_linear(1, -1.0).unwrap();
        two.add_quadratic(0, 1, 3.0).unwrap();
        let (a, e) = brute_force_qubo(&two, 24).unwrap();
        assert_eq!(a.values.iter().filter(|&&b| b).count(), 1);
        // ties resolve to the smaller code: x0 = 1
        assert_eq!(a, Assignment::from_bits(&[1, 0]));
        assert_eq!(e, -1.0);

        assert!(matches!(brute_force_qubo(&Qubo::new(30), 24), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn repair_rules() {
        let inst = example_instance();
        let valid = PlanSelection::from_labels(&inst, &["p2", "p3"]).unwrap();
        assert_eq!(repair_selection(&inst, &valid), valid);

        let empty = repair_selection(&inst, &PlanSelection::default());
        assert_eq!(empty.labels(&inst), vec!["p1", "p4"]);

        let over = PlanSelection::from_labels(&inst, &["p1", "p2", "p3"]).unwrap();
        let r = repair_selection(&inst, &over);
        assert_eq!(r.labels(&inst), vec!["p2", "p3"]);
        assert!(mqo::validate_solution(&inst, &r).unwrap().valid);
    }

    #[test]
    fn doc_round_trip() {
        let (q, m) = logical_map(&example_instance(), 0.25).unwrap();
        let doc = QuboDoc::new(&q, Some(&m));
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.contains("\"w_L\""));
        let back: QuboDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.qubo().unwrap(), q);
        assert_eq!(back.mapping().unwrap(), m);
    }

    #[test]
    fn split_enumeration_matches_plain() {
        // 18 variables forces the prefix split; compare against a naive scan.
        let inst = crate::mqo::generate_instance(&GenerateParams::new(6, 3, 0.4, 21)).unwrap();
        let (q, _) = logical_map(&inst, 0.25).unwrap();
        let (a, e) = brute_force_qubo_with(&q, 24, Execution::Sequential).unwrap();
        let (b, f) = brute_force_qubo_with(&q, 24, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(e, f);
        let naive =
            (0u64..1 << 18).map(|c| energy(&q, &Assignment::from_code(c, 18)).unwrap()).fold(f64::INFINITY, f64::min);
        assert!(close(e, naive));
    }
}
