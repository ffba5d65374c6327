//! `mqo`: generate, map, embed, solve, benchmark and verify MQO instances.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mqo_anneal::bench::{self, BenchSuite};
use mqo_anneal::chimera::{fit_triad, load_broken_mask, ChimeraGraph, Embedding, EmbeddingDoc};
use mqo_anneal::mqo::{self, GenerateParams, MqoInstance, PlanSelection};
use mqo_anneal::physical::{embed_instance, embed_qubo, InstanceEmbedding, Pattern, PhysicalDoc};
use mqo_anneal::qubo::{self, QuboDoc};
use mqo_anneal::solvers::climb::{hill_climbing, ClimbParams};
use mqo_anneal::solvers::ga::{genetic_algorithm, GaParams};
use mqo_anneal::solvers::sa::{anneal_instance, AnnealParams, AnnealTarget};
use mqo_anneal::solvers::{solve_exact, Clock, ExactProblem, ExactSolution, SolverRunRecord, DEFAULT_OPS_PER_MS};
use mqo_anneal::verify::{chain_suite, equivalence_suite, ChainSuiteParams, EquivalenceParams};
use mqo_anneal::{Error, Execution, DEFAULT_EPSILON};

#[derive(Parser)]
#[command(name = "mqo", version, about = "Multiple query optimization on a simulated annealer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random instance.
    Generate(GenerateArgs),
    /// Map an instance to its logical QUBO.
    Map(MapArgs),
    /// Embed a logical QUBO on the Chimera grid.
    Embed(EmbedArgs),
    /// Solve an instance, QUBO or physical QUBO.
    Solve(Box<SolveArgs>),
    /// Run a benchmark suite.
    Bench(BenchArgs),
    /// Run the oracle-equivalence and chain-consistency suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    queries: usize,
    #[arg(long)]
    plans: usize,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
    cost_range: Option<Vec<f64>>,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
    savings_range: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = TopologyArg::Random)]
    topology: TopologyArg,
    /// Grid used by the hardware topology, as ROWSxCOLS.
    #[arg(long, default_value = "12x12")]
    grid: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyArg {
    Random,
    Hardware,
}

#[derive(Args)]
struct MapArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    qubo: PathBuf,
    /// Instance whose query clusters drive the clustered pattern.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value = "12x12")]
    grid: String,
    /// JSON list of broken qubit ids.
    #[arg(long)]
    broken: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PatternArg::Auto)]
    pattern: PatternArg,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Physical QUBO output.
    #[arg(long)]
    out: PathBuf,
    /// Embedding output.
    #[arg(long)]
    embedding_out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PatternArg {
    Triad,
    Clustered,
    Auto,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
enum Algo {
    Sa,
    Climb,
    Ga,
    Exact,
}

#[derive(Clone, Copy, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
enum ClockArg {
    Wall,
    Virtual,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    algo: Option<Algo>,
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Logical QUBO; with `--algo exact` and no instance it is solved directly.
    #[arg(long)]
    qubo: Option<PathBuf>,
    /// Physical QUBO to anneal; needs `--embedding`.
    #[arg(long)]
    physical: Option<PathBuf>,
    #[arg(long)]
    embedding: Option<PathBuf>,
    /// JSON file whose `solver` section supplies defaults for these flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Total annealing runs, split evenly over the batches.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    batches: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    t_initial: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    crossover_rate: Option<f64>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long)]
    first_improvement: bool,
    #[arg(long)]
    deadline_ms: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    clock: Option<ClockArg>,
    #[arg(long)]
    ops_per_ms: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Solution output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run record output (checkpoint curve).
    #[arg(long)]
    record: Option<PathBuf>,
}

#[derive(Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverConfig {
    algo: Option<Algo>,
    seed: Option<u64>,
    runs: Option<usize>,
    batches: Option<usize>,
    sweeps: Option<usize>,
    t_initial: Option<f64>,
    t_final: Option<f64>,
    population: Option<usize>,
    crossover_rate: Option<f64>,
    mutation_rate: Option<f64>,
    first_improvement: Option<bool>,
    deadline_ms: Option<f64>,
    checkpoints: Option<Vec<f64>>,
    clock: Option<ClockArg>,
    ops_per_ms: Option<f64>,
    epsilon: Option<f64>,
}

#[derive(serde::Deserialize)]
struct ConfigFile {
    #[serde(default)]
    solver: SolverConfig,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite JSON; the built-in desk-scale suite when omitted.
    #[arg(long)]
    suite: Option<PathBuf>,
    /// Output directory for curves.csv, instances.csv and the summaries.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    execution: Option<ExecArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExecArg {
    Parallel,
    Sequential,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long, default_value_t = 6)]
    max_queries: usize,
    #[arg(long, default_value_t = 3)]
    max_plans: usize,
    #[arg(long, default_value_t = 0.4)]
    max_density: f64,
    #[arg(long, default_value_t = 100)]
    chain_cases: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Use w_M = w_L, which violates the bound; failures are expected.
    #[arg(long)]
    break_wm: bool,
}

/// Exit status categories.
enum Failure {
    Usage(anyhow::Error),
    Infeasible(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let infeasible = e
            .chain()
            .any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::DoesNotFit { .. } | Error::InvalidEmbedding(_))));
        if infeasible {
            Failure::Infeasible(e)
        } else {
            Failure::Usage(e)
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Map(a) => cmd_map(a),
        Command::Embed(a) => cmd_embed(a),
        Command::Solve(a) => cmd_solve(*a),
        Command::Bench(a) => cmd_bench(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Infeasible(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn parse_grid(s: &str) -> anyhow::Result<(usize, usize)> {
    let (r, c) = s.split_once(['x', 'X']).ok_or_else(|| anyhow!("grid must look like ROWSxCOLS, got `{s}`"))?;
    let (r, c): (usize, usize) = (r.trim().parse()?, c.trim().parse()?);
    if r == 0 || c == 0 {
        bail!("grid dimensions must be positive");
    }
    Ok((r, c))
}

fn range(v: &Option<Vec<f64>>) -> Option<(f64, f64)> {
    v.as_ref().map(|v| (v[0], v[1]))
}

fn load_instance(path: &Path) -> anyhow::Result<MqoInstance> {
    MqoInstance::load(path).with_context(|| format!("reading instance {}", path.display()))
}

fn distinct(input: &Path, output: &Path) -> anyhow::Result<()> {
    if input == output {
        bail!("input and output paths must differ: {}", input.display());
    }
    Ok(())
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

fn cmd_generate(a: GenerateArgs) -> CmdResult {
    let mut params = GenerateParams::new(a.queries, a.plans, a.density, a.seed);
    if let Some(r) = range(&a.cost_range) {
        params.cost_range = r;
    }
    if let Some(r) = range(&a.savings_range) {
        params.savings_range = r;
    }
    let inst = match a.topology {
        TopologyArg::Random => mqo::generate_instance(&params)?,
        TopologyArg::Hardware => {
            let (r, c) = parse_grid(&a.grid)?;
            bench::generate_hardware_instance(&params, &ChimeraGraph::new(r, c))?
        }
    };
    inst.save(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    println!(
        "wrote {}: {} queries, {} plans, {} savings",
        a.out.display(),
        inst.num_queries(),
        inst.num_plans(),
        inst.savings().len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_map(a: MapArgs) -> CmdResult {
    distinct(&a.instance, &a.out)?;
    let inst = load_instance(&a.instance)?;
    let (q, mapping) = qubo::logical_map(&inst, a.epsilon)?;
    QuboDoc::new(&q, Some(&mapping)).save(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    let negative = q.quadratic().values().filter(|w| **w < 0.0).count();
    println!("w_L = {}", mapping.w_l);
    println!("w_M = {}", mapping.w_m);
    println!("{} variables, {} quadratic terms ({} negative)", q.num_vars(), q.quadratic().len(), negative);
    Ok(ExitCode::SUCCESS)
}

fn cmd_embed(a: EmbedArgs) -> CmdResult {
    distinct(&a.qubo, &a.out)?;
    distinct(&a.out, &a.embedding_out)?;
    let doc = QuboDoc::load(&a.qubo).with_context(|| format!("reading QUBO {}", a.qubo.display()))?;
    let q = doc.qubo()?;
    let (rows, cols) = parse_grid(&a.grid)?;
    let mut graph = ChimeraGraph::new(rows, cols);
    if let Some(mask) = &a.broken {
        let broken = load_broken_mask(mask).with_context(|| format!("reading mask {}", mask.display()))?;
        graph = graph.with_broken(broken)?;
    }
    let fitted: InstanceEmbedding = match (&a.instance, a.pattern) {
        (Some(path), p) => {
            let inst = load_instance(path)?;
            if inst.num_plans() != q.num_vars() {
                return Err(Failure::Usage(anyhow!(
                    "instance has {} plans but the QUBO has {} variables",
                    inst.num_plans(),
                    q.num_vars()
                )));
            }
            let pattern = match p {
                PatternArg::Triad => Pattern::Triad,
                PatternArg::Clustered => Pattern::Clustered,
                PatternArg::Auto => Pattern::Auto,
            };
            embed_instance(&inst, &q, &graph, pattern)?
        }
        (None, PatternArg::Clustered) => {
            return Err(Failure::Usage(anyhow!("the clustered pattern needs --instance to know the clusters")))
        }
        (None, _) => {
            let fit = fit_triad(q.num_vars(), &graph)?;
            InstanceEmbedding { embedding: fit.embedding, dropped_chains: fit.dropped_chains, clusters: 1 }
        }
    };
    let pq = embed_qubo(&q, &fitted.embedding, &graph, a.epsilon)?;
    pq.to_doc().save(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    fitted.embedding.to_doc(&graph).save(&a.embedding_out)?;
    let strengths: Vec<f64> = pq
        .chain_penalty
        .iter()
        .filter(|(v, _)| fitted.embedding.chain(**v).is_some_and(|c| c.len() > 1))
        .map(|(_, w)| *w)
        .collect();
    println!(
        "{} chains in {} cluster(s), {} qubits used, {} couplers",
        fitted.embedding.num_chains(),
        fitted.clusters,
        pq.num_qubits(),
        pq.coupler_weight.len()
    );
    if let (Some(lo), Some(hi)) =
        (strengths.iter().copied().reduce(f64::min), strengths.iter().copied().reduce(f64::max))
    {
        println!("chain strength w_B in [{lo}, {hi}] over {} multi-qubit chains", strengths.len());
    }
    if fitted.dropped_chains > 0 {
        println!("warning: {} chain(s) dropped because of broken qubits", fitted.dropped_chains);
    }
    Ok(ExitCode::SUCCESS)
}

struct Resolved {
    algo: Algo,
    seed: Option<u64>,
    anneal: AnnealParams,
    ga: GaParams,
    climb: ClimbParams,
    deadline_ms: f64,
    checkpoints: Vec<f64>,
    clock: Clock,
    epsilon: f64,
}

fn resolve(a: &SolveArgs) -> anyhow::Result<Resolved> {
    let cfg = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str::<ConfigFile>(&text).with_context(|| format!("parsing config {}", p.display()))?.solver
        }
        None => SolverConfig::default(),
    };
    let algo = a.algo.or(cfg.algo).ok_or_else(|| anyhow!("--algo is required (flag or config)"))?;
    let mut anneal = AnnealParams::default();
    let batches = a.batches.or(cfg.batches).unwrap_or(anneal.batches);
    anneal.batches = batches;
    if let Some(runs) = a.runs.or(cfg.runs) {
        if batches == 0 || runs % batches != 0 {
            bail!("--runs ({runs}) must be a positive multiple of --batches ({batches})");
        }
        anneal.runs_per_batch = runs / batches;
    }
    if let Some(s) = a.sweeps.or(cfg.sweeps) {
        anneal.sweeps = s;
    }
    anneal.t_initial = a.t_initial.or(cfg.t_initial);
    anneal.t_final = a.t_final.or(cfg.t_final);
    anneal.validate()?;
    let mut ga = GaParams::default();
    if let Some(p) = a.population.or(cfg.population) {
        ga.population = p;
    }
    if let Some(r) = a.crossover_rate.or(cfg.crossover_rate) {
        ga.crossover_rate = r;
    }
    if let Some(r) = a.mutation_rate.or(cfg.mutation_rate) {
        ga.mutation_rate = r;
    }
    let checkpoints = a.checkpoints.clone().or(cfg.checkpoints).unwrap_or_else(|| vec![1.0, 10.0, 100.0, 1000.0]);
    let deadline_ms = a.deadline_ms.or(cfg.deadline_ms).or(checkpoints.last().copied()).unwrap_or(1000.0);
    let clock = match a.clock.or(cfg.clock).unwrap_or(ClockArg::Virtual) {
        ClockArg::Wall => Clock::Wall,
        ClockArg::Virtual => {
            Clock::Virtual { ops_per_ms: a.ops_per_ms.or(cfg.ops_per_ms).unwrap_or(DEFAULT_OPS_PER_MS) }
        }
    };
    Ok(Resolved {
        algo,
        seed: a.seed.or(cfg.seed),
        anneal,
        ga,
        climb: ClimbParams { first_improvement: a.first_improvement || cfg.first_improvement.unwrap_or(false) },
        deadline_ms,
        checkpoints,
        clock,
        epsilon: a.epsilon.or(cfg.epsilon).unwrap_or(DEFAULT_EPSILON),
    })
}

fn cmd_solve(a: SolveArgs) -> CmdResult {
    let r = resolve(&a)?;
    for out in [&a.out, &a.record].into_iter().flatten() {
        for input in [&a.instance, &a.qubo, &a.physical, &a.embedding, &a.config].into_iter().flatten() {
            distinct(input, out)?;
        }
    }
    if r.algo == Algo::Exact && a.instance.is_none() {
        let path = a.qubo.as_ref().ok_or_else(|| anyhow!("--algo exact needs --instance or --qubo"))?;
        let q = QuboDoc::load(path).with_context(|| format!("reading QUBO {}", path.display()))?.qubo()?;
        let ExactSolution::Qubo { assignment, energy } = solve_exact(ExactProblem::Qubo(&q))? else {
            unreachable!("QUBO problem yields a QUBO solution")
        };
        let bits: String = assignment.values.iter().map(|&b| if b { '1' } else { '0' }).collect();
        println!("assignment {bits}");
        println!("energy {energy}");
        if let Some(out) = &a.out {
            write_json(out, &json!({"assignment": bits, "energy": energy}))?;
        }
        return Ok(ExitCode::SUCCESS);
    }
    let path = a.instance.as_ref().ok_or_else(|| anyhow!("--instance is required"))?;
    let inst = load_instance(path)?;
    let need_seed = || r.seed.ok_or_else(|| anyhow!("--seed is required for randomized solvers"));
    let mut extra = serde_json::Map::new();
    let record: SolverRunRecord = match r.algo {
        Algo::Exact => {
            let ExactSolution::Mqo { selection, cost } = solve_exact(ExactProblem::Mqo(&inst))? else {
                unreachable!("MQO problem yields an MQO solution")
            };
            SolverRunRecord {
                solver: "exact".into(),
                seed: 0,
                checkpoints: Vec::new(),
                best_value: cost,
                best_selection: Some(selection),
                iterations: 1,
                elapsed_ms: 0.0,
            }
        }
        Algo::Climb => hill_climbing(&inst, &r.climb, r.deadline_ms, need_seed()?, &r.checkpoints, r.clock)?,
        Algo::Ga => genetic_algorithm(&inst, &r.ga, r.deadline_ms, need_seed()?, &r.checkpoints, r.clock)?,
        Algo::Sa => {
            let seed = need_seed()?;
            let (q, mapping) = match &a.qubo {
                Some(p) => {
                    let doc = QuboDoc::load(p).with_context(|| format!("reading QUBO {}", p.display()))?;
                    let mapping = doc.mapping().unwrap_or(qubo::logical_map(&inst, r.epsilon)?.1);
                    (doc.qubo()?, mapping)
                }
                None => qubo::logical_map(&inst, r.epsilon)?,
            };
            if q.num_vars() != inst.num_plans() {
                return Err(Failure::Usage(anyhow!("QUBO does not match the instance's plan count")));
            }
            let (record, stats) = match (&a.physical, &a.embedding) {
                (Some(pp), Some(ep)) => {
                    let pq = PhysicalDoc::load(pp).with_context(|| format!("reading {}", pp.display()))?.physical()?;
                    let emb: Embedding =
                        EmbeddingDoc::load(ep).with_context(|| format!("reading {}", ep.display()))?.embedding();
                    let target = AnnealTarget::Physical { physical: &pq, embedding: &emb, mapping: &mapping };
                    anneal_instance(&inst, target, &r.anneal, seed, Execution::default(), r.clock)?
                }
                (None, None) => {
                    let m = q.matrix();
                    let target = AnnealTarget::Logical { matrix: &m, mapping: &mapping };
                    anneal_instance(&inst, target, &r.anneal, seed, Execution::default(), r.clock)?
                }
                _ => return Err(Failure::Usage(anyhow!("--physical and --embedding go together"))),
            };
            println!(
                "{} runs: {} valid before repair, {} with consistent chains, best energy {}",
                stats.runs, stats.valid_runs, stats.consistent_runs, stats.best_energy
            );
            extra.insert("runs".into(), json!(stats.runs));
            extra.insert("valid_runs".into(), json!(stats.valid_runs));
            extra.insert("consistent_runs".into(), json!(stats.consistent_runs));
            extra.insert("best_energy".into(), json!(stats.best_energy));
            record
        }
    };
    let selection: PlanSelection = record.best_selection.clone().unwrap_or_default();
    let report = mqo::validate_solution(&inst, &selection)?;
    let cost = mqo::cost(&inst, &selection)?;
    let labels = selection.labels(&inst);
    println!("selection {{{}}}", labels.join(", "));
    println!("cost {cost}");
    println!("valid {}", report.valid);
    if let Some(out) = &a.out {
        let mut doc = serde_json::Map::new();
        doc.insert("solver".into(), json!(record.solver));
        doc.insert("selection".into(), json!(labels));
        doc.insert("cost".into(), json!(cost));
        doc.insert("valid".into(), json!(report.valid));
        doc.extend(extra);
        write_json(out, &doc)?;
    }
    if let Some(path) = &a.record {
        write_json(path, &record)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(a: BenchArgs) -> CmdResult {
    let mut suite = match &a.suite {
        Some(p) => BenchSuite::load(p).with_context(|| format!("reading suite {}", p.display()))?,
        None => BenchSuite::default(),
    };
    if let Some(out) = a.out {
        suite.output_dir = Some(out);
    }
    if let Some(e) = a.execution {
        suite.execution = match e {
            ExecArg::Parallel => Execution::Parallel,
            ExecArg::Sequential => Execution::Sequential,
        };
    }
    let results = bench::run_suite(&suite)?;
    for i in results.instances.iter().filter(|i| i.skipped.is_some()) {
        println!("skipped {}: {}", i.instance_id, i.skipped.as_deref().unwrap_or(""));
    }
    let flagged = results.instances.iter().filter(|i| i.reference == Some(bench::ReferenceKind::BestFound)).count();
    if flagged > 0 {
        println!("{flagged} instance(s) scaled by best-found cost instead of the exact optimum");
    }
    print!("{}", bench::summary_table(&bench::summarize(&results)));
    if let Some(dir) = &suite.output_dir {
        println!("wrote {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    let mut eq = EquivalenceParams::new(a.instances, a.seed);
    eq.max_queries = a.max_queries;
    eq.max_plans = a.max_plans;
    eq.max_density = a.max_density;
    eq.epsilon = a.epsilon;
    eq.break_wm = a.break_wm;
    let report = equivalence_suite(&eq, Execution::default())?;
    println!("optimum equivalence: {}/{} instances", report.equivalent, report.instances);
    println!("valid ground states: {}/{} instances", report.all_valid, report.instances);
    for f in report.failures.iter().take(10) {
        println!("  {f}");
    }
    let mut ok = report.passed();
    if a.chain_cases > 0 {
        let mut cp = ChainSuiteParams::new(a.chain_cases, a.seed);
        cp.epsilon = a.epsilon;
        let chains = chain_suite(&cp, Execution::default())?;
        println!("consistent chains at the minimum: {}/{} cases", chains.consistent, chains.cases);
        println!("decoded minimum is a logical optimum: {}/{} cases", chains.optimal, chains.cases);
        for f in chains.failures.iter().take(10) {
            println!("  {f}");
        }
        ok &= chains.passed();
    }
    if ok {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verification FAILED");
        Ok(ExitCode::from(1))
    }
}
