//! Cost-versus-time benchmark harness.
//!
//! A [`BenchSuite`] names instance families and a solver roster. Every
//! instance is generated from a seed, mapped to its logical formula and, when
//! the roster anneals the physical formula, embedded on the configured grid.
//! Each solver yields a [`TimeCostCurve`]: annealers one sample per batch,
//! classical solvers one sample per checkpoint. Costs are scaled by a
//! reference: the exact optimum when enumeration fits the oracle budget,
//! otherwise the best cost any solver found (flagged in the output).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chimera::{clustered_layout, ChimeraGraph, QubitId};
use crate::exec::{derive_seed, rng_from_seed, Execution};
use crate::mqo::{self, brute_force_mqo, generate_instance, GenerateParams, MqoInstance};
use crate::physical::{embed_instance, embed_qubo, Pattern};
use crate::qubo::logical_map;
use crate::solvers::climb::{hill_climbing, ClimbParams};
use crate::solvers::exact::exact_record;
use crate::solvers::ga::{genetic_algorithm, GaParams};
use crate::solvers::sa::{anneal_instance, AnnealParams, AnnealTarget};
use crate::solvers::{validate_checkpoints, Clock, SolverRunRecord};
use crate::{Error, Result, DEFAULT_EPSILON, TOLERANCE};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SavingsTopology {
    /// Savings only between plans whose chains share a coupler in the
    /// per-query clustered layout, so every instance embeds on the grid.
    #[default]
    Hardware,
    /// Savings between any two plans of different queries.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub queries: usize,
    pub plans_per_query: usize,
    pub count: usize,
    pub seed: u64,
    #[serde(default = "default_density")]
    pub savings_density: f64,
    #[serde(default)]
    pub topology: SavingsTopology,
    #[serde(default)]
    pub cost_range: Option<(f64, f64)>,
    #[serde(default)]
    pub savings_range: Option<(f64, f64)>,
}

fn default_density() -> f64 {
    0.5
}

impl FamilySpec {
    pub fn new(queries: usize, plans_per_query: usize, count: usize, seed: u64) -> Self {
        Self {
            queries,
            plans_per_query,
            count,
            seed,
            savings_density: default_density(),
            topology: SavingsTopology::default(),
            cost_range: None,
            savings_range: None,
        }
    }

    pub fn name(&self) -> String {
        format!("{}x{}", self.queries, self.plans_per_query)
    }

    pub fn instance_id(&self, index: usize) -> String {
        format!("{}-{index:03}", self.name())
    }

    pub fn params(&self, index: usize) -> GenerateParams {
        let mut p = GenerateParams::new(
            self.queries,
            self.plans_per_query,
            self.savings_density,
            derive_seed(self.seed, index as u64),
        );
        if let Some(r) = self.cost_range {
            p.cost_range = r;
        }
        if let Some(r) = self.savings_range {
            p.savings_range = r;
        }
        p
    }

    pub fn instance(&self, index: usize, graph: &ChimeraGraph) -> Result<MqoInstance> {
        let params = self.params(index);
        match self.topology {
            SavingsTopology::Random => generate_instance(&params),
            SavingsTopology::Hardware => generate_hardware_instance(&params, graph),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SolverSpec {
    Exact,
    Climb {
        #[serde(default)]
        first_improvement: bool,
    },
    Ga {
        #[serde(flatten)]
        params: GaParams,
    },
    SaLogical {
        #[serde(flatten, default)]
        params: AnnealParams,
    },
    SaPhysical {
        #[serde(flatten, default)]
        params: AnnealParams,
    },
}

impl SolverSpec {
    pub fn name(&self) -> String {
        match self {
            SolverSpec::Exact => "exact".into(),
            SolverSpec::Climb { first_improvement: false } => "climb".into(),
            SolverSpec::Climb { first_improvement: true } => "climb-first".into(),
            SolverSpec::Ga { params } => format!("ga({})", params.population),
            SolverSpec::SaLogical { .. } => "sa-logical".into(),
            SolverSpec::SaPhysical { .. } => "sa-physical".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSuite {
    pub families: Vec<FamilySpec>,
    pub solvers: Vec<SolverSpec>,
    #[serde(default = "default_checkpoints")]
    pub checkpoints_ms: Vec<f64>,
    #[serde(default = "default_grid")]
    pub grid: [usize; 2],
    #[serde(default)]
    pub broken: Vec<u32>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub clock: Clock,
    #[serde(default)]
    pub execution: Execution,
    #[serde(default = "default_oracle_budget")]
    pub oracle_budget: u128,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_checkpoints() -> Vec<f64> {
    vec![1.0, 10.0, 100.0, 1000.0]
}

fn default_grid() -> [usize; 2] {
    [12, 12]
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_oracle_budget() -> u128 {
    mqo::DEFAULT_MQO_BUDGET
}

impl Default for BenchSuite {
    /// Desk-scale families (20×2, 12×3, 9×4, 7×5) with the full roster.
    fn default() -> Self {
        let families = [(20, 2), (12, 3), (9, 4), (7, 5)]
            .iter()
            .enumerate()
            .map(|(i, &(q, p))| FamilySpec::new(q, p, 5, 1000 + i as u64))
            .collect();
        Self {
            families,
            solvers: default_roster(),
            checkpoints_ms: default_checkpoints(),
            grid: default_grid(),
            broken: Vec::new(),
            epsilon: DEFAULT_EPSILON,
            clock: Clock::default(),
            execution: Execution::default(),
            oracle_budget: default_oracle_budget(),
            output_dir: None,
        }
    }
}

pub fn default_roster() -> Vec<SolverSpec> {
    vec![
        SolverSpec::Exact,
        SolverSpec::Climb { first_improvement: false },
        SolverSpec::Ga { params: GaParams::with_population(50) },
        SolverSpec::Ga { params: GaParams::with_population(200) },
        SolverSpec::SaLogical { params: AnnealParams::default() },
        SolverSpec::SaPhysical { params: AnnealParams::default() },
    ]
}

impl BenchSuite {
    pub fn validate(&self) -> Result<()> {
        if self.families.iter().map(|f| f.count).sum::<usize>() == 0 {
            return Err(Error::InvalidParameter("suite has no instances".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::InvalidParameter("suite has no solvers".into()));
        }
        validate_checkpoints(&self.checkpoints_ms)?;
        if self.checkpoints_ms.is_empty() {
            return Err(Error::InvalidParameter("suite needs at least one checkpoint".into()));
        }
        self.clock.validate()?;
        let names: BTreeSet<String> = self.families.iter().map(FamilySpec::name).collect();
        if names.len() != self.families.len() {
            return Err(Error::InvalidParameter("family shapes must be distinct".into()));
        }
        Ok(())
    }

    pub fn graph(&self) -> Result<ChimeraGraph> {
        ChimeraGraph::new(self.grid[0], self.grid[1]).with_broken(self.broken.iter().map(|&q| QubitId(q)))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Random instance whose savings follow the couplers of the per-query
/// clustered layout: each pair of plans from different queries whose chains
/// touch receives a saving with probability `savings_density`.
pub fn generate_hardware_instance(params: &GenerateParams, graph: &ChimeraGraph) -> Result<MqoInstance> {
    params.validate()?;
    let mut rng = rng_from_seed(params.seed);
    let mut b = mqo::skeleton(params, &mut rng);
    let layout = clustered_layout(&vec![params.plans_per_query; params.queries], graph)?;
    let owner = layout.embedding.owner_of();
    let mut pairs = BTreeSet::new();
    for (&v, chain) in &layout.embedding.chains {
        for &q in chain {
            for n in graph.adjacency(q)? {
                if let Some(&w) = owner.get(&n) {
                    if w > v && w / params.plans_per_query != v / params.plans_per_query {
                        pairs.insert((v, w));
                    }
                }
            }
        }
    }
    for (v, w) in pairs {
        if rng.gen::<f64>() < params.savings_density {
            let s = params.draw_saving(&mut rng);
            b = b.saving(&mqo::plan_label(params, v), &mqo::plan_label(params, w), s);
        }
    }
    b.build()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub time_ms: f64,
    pub runs: u64,
    pub best_cost: f64,
    pub scaled_cost: f64,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeCostCurve {
    pub instance_id: String,
    pub family: String,
    pub solver: String,
    pub seed: u64,
    pub samples: Vec<CurveSample>,
}

impl TimeCostCurve {
    pub fn final_sample(&self) -> Option<&CurveSample> {
        self.samples.last()
    }

    /// Time of the first sample that already holds the final best cost.
    pub fn time_to_best(&self) -> Option<f64> {
        let last = self.samples.last()?.best_cost;
        self.samples.iter().find(|s| s.best_cost <= last + TOLERANCE).map(|s| s.time_ms)
    }

    pub fn rows(&self) -> impl Iterator<Item = CurveRow> + '_ {
        self.samples.iter().map(|s| CurveRow {
            instance_id: self.instance_id.clone(),
            solver: self.solver.clone(),
            seed: self.seed,
            time_ms: s.time_ms,
            runs: s.runs,
            best_cost: s.best_cost,
            scaled_cost: s.scaled_cost,
            valid: s.valid,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    Oracle,
    BestFound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub instance_id: String,
    pub family: String,
    pub queries: usize,
    pub plans: usize,
    pub savings: usize,
    pub reference_cost: Option<f64>,
    pub reference: Option<ReferenceKind>,
    pub qubits: Option<usize>,
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchResults {
    pub families: Vec<String>,
    pub instances: Vec<InstanceInfo>,
    pub curves: Vec<TimeCostCurve>,
}

/// One CSV row: `instance_id,solver,seed,time_ms,runs,best_cost,scaled_cost,valid`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub instance_id: String,
    pub solver: String,
    pub seed: u64,
    pub time_ms: f64,
    pub runs: u64,
    pub best_cost: f64,
    pub scaled_cost: f64,
    pub valid: bool,
}

impl CurveRow {
    /// Field-wise equality that treats two NaNs as equal.
    pub fn same_as(&self, other: &Self) -> bool {
        let eq = |a: f64, b: f64| a == b || (a.is_nan() && b.is_nan());
        self.instance_id == other.instance_id
            && self.solver == other.solver
            && self.seed == other.seed
            && eq(self.time_ms, other.time_ms)
            && self.runs == other.runs
            && eq(self.best_cost, other.best_cost)
            && eq(self.scaled_cost, other.scaled_cost)
            && self.valid == other.valid
    }
}

struct InstanceOutcome {
    info: InstanceInfo,
    curves: Vec<TimeCostCurve>,
}

pub fn run_suite(suite: &BenchSuite) -> Result<BenchResults> {
    suite.validate()?;
    let graph = suite.graph()?;
    let jobs: Vec<(usize, usize)> =
        suite.families.iter().enumerate().flat_map(|(f, fam)| (0..fam.count).map(move |i| (f, i))).collect();
    let outcomes = suite.execution.map(jobs.len(), |j| {
        let (f, i) = jobs[j];
        run_instance(suite, &graph, &suite.families[f], i)
    });
    let mut results = BenchResults {
        families: suite.families.iter().map(FamilySpec::name).collect(),
        instances: Vec::with_capacity(jobs.len()),
        curves: Vec::new(),
    };
    for o in outcomes {
        let o = o?;
        results.instances.push(o.info);
        results.curves.extend(o.curves);
    }
    if let Some(dir) = &suite.output_dir {
        write_results(dir, &results)?;
    }
    Ok(results)
}

fn run_instance(
    suite: &BenchSuite,
    graph: &ChimeraGraph,
    family: &FamilySpec,
    index: usize,
) -> Result<InstanceOutcome> {
    let instance = family.instance(index, graph)?;
    let instance_seed = family.params(index).seed;
    let mut info = InstanceInfo {
        instance_id: family.instance_id(index),
        family: family.name(),
        queries: instance.num_queries(),
        plans: instance.num_plans(),
        savings: instance.savings().len(),
        reference_cost: None,
        reference: None,
        qubits: None,
        skipped: None,
    };
    let (qubo, mapping) = logical_map(&instance, suite.epsilon)?;

    let needs_physical = suite.solvers.iter().any(|s| matches!(s, SolverSpec::SaPhysical { .. }));
    let physical = if needs_physical {
        let embedded = embed_instance(&instance, &qubo, graph, Pattern::Auto)
            .and_then(|e| embed_qubo(&qubo, &e.embedding, graph, suite.epsilon).map(|pq| (e.embedding, pq)));
        match embedded {
            Ok(p) => {
                info.qubits = Some(p.1.num_qubits());
                Some(p)
            }
            Err(e) => {
                info.skipped = Some(e.to_string());
                return Ok(InstanceOutcome { info, curves: Vec::new() });
            }
        }
    } else {
        None
    };
    let matrix = qubo.matrix();
    let deadline = *suite.checkpoints_ms.last().expect("validated");

    let mut records: Vec<SolverRunRecord> = Vec::with_capacity(suite.solvers.len());
    let mut oracle = None;
    for (k, spec) in suite.solvers.iter().enumerate() {
        let seed = derive_seed(instance_seed, k as u64);
        let record = match spec {
            SolverSpec::Exact => match exact_record(&instance, suite.oracle_budget, suite.clock) {
                Ok(r) => r,
                Err(Error::BudgetExceeded { .. }) => continue,
                Err(e) => return Err(e),
            },
            SolverSpec::Climb { first_improvement } => hill_climbing(
                &instance,
                &ClimbParams { first_improvement: *first_improvement },
                deadline,
                seed,
                &suite.checkpoints_ms,
                suite.clock,
            )?,
            SolverSpec::Ga { params } => {
                genetic_algorithm(&instance, params, deadline, seed, &suite.checkpoints_ms, suite.clock)?
            }
            SolverSpec::SaLogical { params } => {
                let target = AnnealTarget::Logical { matrix: &matrix, mapping: &mapping };
                anneal_instance(&instance, target, params, seed, Execution::Sequential, suite.clock)?.0
            }
            SolverSpec::SaPhysical { params } => {
                let (embedding, pq) = physical.as_ref().expect("embedded above");
                let target = AnnealTarget::Physical { physical: pq, embedding, mapping: &mapping };
                anneal_instance(&instance, target, params, seed, Execution::Sequential, suite.clock)?.0
            }
        };
        records.push(record);
    }

    if instance.combinations() <= suite.oracle_budget {
        let cost = match records.iter().find(|r| r.solver == "exact") {
            Some(r) => r.best_value,
            None => brute_force_mqo(&instance, suite.oracle_budget)?.1,
        };
        oracle = Some(cost);
    }
    let (reference, kind) = match oracle {
        Some(c) => (c, ReferenceKind::Oracle),
        None => (records.iter().map(|r| r.best_value).fold(f64::INFINITY, f64::min), ReferenceKind::BestFound),
    };
    info.reference_cost = Some(reference);
    info.reference = Some(kind);

    let curves = records
        .into_iter()
        .map(|r| TimeCostCurve {
            instance_id: info.instance_id.clone(),
            family: info.family.clone(),
            solver: r.solver,
            seed: r.seed,
            samples: r
                .checkpoints
                .iter()
                .map(|c| CurveSample {
                    time_ms: c.time_ms,
                    runs: c.runs,
                    best_cost: c.best,
                    scaled_cost: scaled(c.best, reference),
                    valid: c.valid,
                })
                .collect(),
        })
        .collect();
    Ok(InstanceOutcome { info, curves })
}

/// `cost / reference`; undefined (NaN) unless the reference is positive.
pub fn scaled(cost: f64, reference: f64) -> f64 {
    if reference > 0.0 && cost.is_finite() {
        cost / reference
    } else {
        f64::NAN
    }
}

pub fn write_curves_csv(path: impl AsRef<Path>, curves: &[TimeCostCurve]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for c in curves {
        for row in c.rows() {
            w.serialize(row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_curves_csv(path: impl AsRef<Path>) -> Result<Vec<CurveRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Writes `curves.csv`, `instances.csv`, `summary.csv` and `summary.txt`.
pub fn write_results(dir: impl AsRef<Path>, results: &BenchResults) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    write_curves_csv(dir.join("curves.csv"), &results.curves)?;
    let mut w = csv::Writer::from_path(dir.join("instances.csv"))?;
    for i in &results.instances {
        w.serialize(i)?;
    }
    w.flush()?;
    let summary = summarize(results);
    write_summary_csv(dir.join("summary.csv"), &summary.rows)?;
    std::fs::write(dir.join("summary.txt"), summary_table(&summary))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub family: String,
    pub solver: String,
    pub curves: usize,
    pub time_to_best_min: f64,
    pub time_to_best_median: f64,
    pub time_to_best_max: f64,
    pub mean_final_scaled: f64,
    pub mean_improvement: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub warnings: Vec<String>,
}

/// Lower median: the element at index `(n − 1) / 2` after sorting.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.get(v.len().checked_sub(1)? / 2).copied()
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Aggregates per (family, solver), in suite family order and first-seen
/// solver order. Improvement is `(first − final) / |first|` of the best cost.
pub fn summarize(results: &BenchResults) -> Summary {
    let mut groups: BTreeMap<(usize, usize), Vec<&TimeCostCurve>> = BTreeMap::new();
    let mut solver_order: HashMap<&str, usize> = HashMap::new();
    let family_index: HashMap<&str, usize> =
        results.families.iter().enumerate().map(|(i, f)| (f.as_str(), i)).collect();
    for c in &results.curves {
        let n = solver_order.len();
        let s = *solver_order.entry(c.solver.as_str()).or_insert(n);
        let f = family_index.get(c.family.as_str()).copied().unwrap_or(usize::MAX);
        groups.entry((f, s)).or_default().push(c);
    }
    let solver_names: BTreeMap<usize, &str> = solver_order.iter().map(|(k, v)| (*v, *k)).collect();
    let mut warnings = Vec::new();
    for (i, f) in results.families.iter().enumerate() {
        if !groups.keys().any(|(fi, _)| *fi == i) {
            warnings.push(format!("family {f} has no curves; omitted"));
        }
    }
    let rows = groups
        .into_iter()
        .map(|((_, s), curves)| {
            let ttb: Vec<f64> = curves.iter().filter_map(|c| c.time_to_best()).collect();
            SummaryRow {
                family: curves[0].family.clone(),
                solver: solver_names[&s].to_string(),
                curves: curves.len(),
                time_to_best_min: ttb.iter().copied().fold(f64::INFINITY, f64::min),
                time_to_best_median: lower_median(&ttb).unwrap_or(f64::NAN),
                time_to_best_max: ttb.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean_final_scaled: mean(curves.iter().filter_map(|c| c.final_sample()).map(|s| s.scaled_cost)),
                mean_improvement: mean(curves.iter().filter_map(|c| {
                    let first = c.samples.first()?.best_cost;
                    let last = c.samples.last()?.best_cost;
                    (first.is_finite() && first != 0.0).then(|| (first - last) / first.abs())
                })),
            }
        })
        .collect();
    Summary { rows, warnings }
}

pub fn write_summary_csv(path: impl AsRef<Path>, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn summary_table(summary: &Summary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<8} {:<12} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "family", "solver", "curves", "ttb min", "ttb med", "ttb max", "scaled", "improve %"
    );
    for r in &summary.rows {
        let _ = writeln!(
            out,
            "{:<8} {:<12} {:>6} {:>10.3} {:>10.3} {:>10.3} {:>10.4} {:>10.2}",
            r.family,
            r.solver,
            r.curves,
            r.time_to_best_min,
            r.time_to_best_median,
            r.time_to_best_max,
            r.mean_final_scaled,
            100.0 * r.mean_improvement
        );
    }
    for w in &summary.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(family: &str, solver: &str, points: &[(f64, f64)]) -> TimeCostCurve {
        TimeCostCurve {
            instance_id: format!("{family}-x"),
            family: family.into(),
            solver: solver.into(),
            seed: 0,
            samples: points
                .iter()
                .map(|&(t, c)| CurveSample { time_ms: t, runs: 1, best_cost: c, scaled_cost: c / 10.0, valid: true })
                .collect(),
        }
    }

    #[test]
    fn lower_median_of_even_count() {
        assert_eq!(lower_median(&[4.0, 1.0, 3.0, 2.0]), Some(2.0));
        assert_eq!(lower_median(&[5.0]), Some(5.0));
        assert_eq!(lower_median(&[]), None);
    }

    #[test]
    fn summary_of_hand_built_curves() {
        let results = BenchResults {
            families: vec!["a".into(), "b".into()],
            instances: Vec::new(),
            curves: vec![
                curve("a", "climb", &[(1.0, 20.0), (10.0, 12.0), (100.0, 10.0), (1000.0, 10.0)]),
                curve("a", "climb", &[(1.0, 15.0), (10.0, 15.0), (100.0, 15.0), (1000.0, 15.0)]),
                curve("a", "climb", &[(1.0, 40.0), (10.0, 30.0), (100.0, 30.0), (1000.0, 20.0)]),
            ],
        };
        let s = summarize(&results);
        assert_eq!(s.rows.len(), 1);
        let r = &s.rows[0];
        assert_eq!((r.time_to_best_min, r.time_to_best_median, r.time_to_best_max), (1.0, 100.0, 1000.0));
        assert!((r.mean_final_scaled - 1.5).abs() < 1e-12);
        assert!((r.mean_improvement - (0.5 + 0.0 + 0.5) / 3.0).abs() < 1e-12);
        assert_eq!(s.warnings, vec!["family b has no curves; omitted".to_string()]);
    }

    #[test]
    fn single_curve_summary() {
        let results = BenchResults {
            families: vec!["a".into()],
            instances: Vec::new(),
            curves: vec![curve("a", "ga(50)", &[(1.0, 3.0), (10.0, 2.0)])],
        };
        let r = &summarize(&results).rows[0];
        assert_eq!(r.time_to_best_min, r.time_to_best_median);
        assert_eq!(r.time_to_best_median, r.time_to_best_max);
    }

    #[test]
    fn hardware_instances_embed_per_query() {
        let g = ChimeraGraph::default();
        for (q, p) in [(20, 2), (12, 3), (9, 4), (7, 5)] {
            let inst = generate_hardware_instance(&GenerateParams::new(q, p, 0.5, 3), &g).unwrap();
            assert!(!inst.savings().is_empty());
            let (qubo, _) = crate::qubo::logical_map_default(&inst).unwrap();
            let e = embed_instance(&inst, &qubo, &g, Pattern::Clustered).unwrap();
            assert_eq!(e.clusters, q);
        }
    }

    #[test]
    fn scaled_cost_needs_positive_reference() {
        assert_eq!(scaled(3.0, 2.0), 1.5);
        assert!(scaled(3.0, 0.0).is_nan());
        assert!(scaled(f64::INFINITY, 2.0).is_nan());
    }

    #[test]
    fn suite_json_defaults() {
        let text = r#"{"families":[{"queries":6,"plans_per_query":2,"count":2,"seed":1}],
                       "solvers":[{"kind":"exact"},{"kind":"ga","population":50},{"kind":"sa-physical","runs_per_batch":5}]}"#;
        let s: BenchSuite = serde_json::from_str(text).unwrap();
        assert_eq!(s.checkpoints_ms, vec![1.0, 10.0, 100.0, 1000.0]);
        assert_eq!(s.solvers[1], SolverSpec::Ga { params: GaParams::with_population(50) });
        match &s.solvers[2] {
            SolverSpec::SaPhysical { params } => assert_eq!((params.runs_per_batch, params.batches), (5, 10)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(s.validate().is_ok());
    }
}
