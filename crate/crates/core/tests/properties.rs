use std::collections::BTreeMap;

use proptest::prelude::*;

use mqo_anneal::bench::{self, CurveRow};
use mqo_anneal::chimera::{triad_embedding, ChimeraGraph, QubitId};
use mqo_anneal::mqo::{self, GenerateParams, MqoInstance, PlanSelection, SavingDoc};
use mqo_anneal::physical::{decode_physical, embed_qubo, encode_logical, physical_energy};
use mqo_anneal::qubo::{self, energy, Assignment, Qubo};
use mqo_anneal::solvers::{genetic_algorithm, hill_climbing, ClimbParams, Clock, GaParams};
use mqo_anneal::{Execution, TOLERANCE};

fn instance(queries: usize, plans: usize, density: f64, seed: u64) -> MqoInstance {
    mqo::generate_instance(&GenerateParams::new(queries, plans, density, seed)).unwrap()
}

fn small_instance() -> impl Strategy<Value = MqoInstance> {
    (1usize..=5, 1usize..=3, 0.0f64..=1.0, any::<u64>()).prop_map(|(q, p, d, s)| instance(q, p, d, s))
}

fn choice_for(inst: &MqoInstance, raw: &[usize]) -> Vec<usize> {
    inst.queries().iter().zip(raw.iter().cycle()).map(|(q, r)| r % q.plans.len()).collect()
}

fn random_qubo(n: usize, weights: &[i32]) -> Qubo {
    let mut q = Qubo::new(n);
    let mut w = weights.iter().cycle().map(|&x| f64::from(x) / 4.0);
    for v in 0..n {
        q.add_linear(v, w.next().unwrap()).unwrap();
        for u in 0..v {
            q.add_quadratic(u, v, w.next().unwrap()).unwrap();
        }
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cost_ignores_savings_order(inst in small_instance(), raw in prop::collection::vec(0usize..3, 5)) {
        let mut doc = inst.to_doc();
        doc.savings.reverse();
        let shuffled = MqoInstance::from_doc(&doc).unwrap();
        let sel = PlanSelection::from_choices(&inst, &choice_for(&inst, &raw));
        let a = mqo::cost(&inst, &sel).unwrap();
        let b = mqo::cost(&shuffled, &PlanSelection::from_labels(&shuffled, &sel.labels(&inst)).unwrap()).unwrap();
        prop_assert!((a - b).abs() < TOLERANCE);
    }

    #[test]
    fn unselected_saving_changes_nothing(
        inst in small_instance().prop_filter("two queries with a spare plan", |i| {
            i.num_queries() >= 2 && i.queries()[1].plans.len() >= 2
        }),
        raw in prop::collection::vec(0usize..3, 5),
        value in 0.5f64..5.0,
    ) {
        let mut choice = choice_for(&inst, &raw);
        choice[1] = 0;
        let sel = PlanSelection::from_choices(&inst, &choice);
        let a = inst.query(mqo::QueryId(0)).plans[choice[0]];
        let b = inst.query(mqo::QueryId(1)).plans[1];
        let mut doc = inst.to_doc();
        doc.savings.retain(|s| {
            let (la, lb) = (&inst.plan(a).label, &inst.plan(b).label);
            !((&s.a == la && &s.b == lb) || (&s.a == lb && &s.b == la))
        });
        let base = MqoInstance::from_doc(&doc).unwrap();
        doc.savings.push(SavingDoc { a: inst.plan(a).label.clone(), b: inst.plan(b).label.clone(), value });
        let extended = MqoInstance::from_doc(&doc).unwrap();
        let labels = sel.labels(&inst);
        let before = mqo::cost(&base, &PlanSelection::from_labels(&base, &labels).unwrap()).unwrap();
        let after = mqo::cost(&extended, &PlanSelection::from_labels(&extended, &labels).unwrap()).unwrap();
        prop_assert!((before - after).abs() < TOLERANCE);
    }

    #[test]
    fn brute_force_is_optimal(inst in small_instance(), raw in prop::collection::vec(0usize..3, 5)) {
        let (best, c) = mqo::brute_force_mqo(&inst, 1_000_000).unwrap();
        prop_assert!(mqo::validate_solution(&inst, &best).unwrap().valid);
        let other = mqo::cost(&inst, &PlanSelection::from_choices(&inst, &choice_for(&inst, &raw))).unwrap();
        prop_assert!(c <= other + TOLERANCE);
    }

    #[test]
    fn logical_optimum_is_valid_and_optimal(inst in small_instance()) {
        let (q, mapping) = qubo::logical_map_default(&inst).unwrap();
        let (a, _) = qubo::brute_force_qubo(&q, 24).unwrap();
        let sel = qubo::decode_logical(&mapping, &a).unwrap();
        prop_assert!(mqo::validate_solution(&inst, &sel).unwrap().valid);
        let (_, opt) = mqo::brute_force_mqo(&inst, 1_000_000).unwrap();
        prop_assert!((mqo::cost(&inst, &sel).unwrap() - opt).abs() < TOLERANCE);
    }

    #[test]
    fn chimera_degree_is_bounded(rows in 1usize..6, cols in 1usize..6) {
        let g = ChimeraGraph::new(rows, cols);
        for q in 0..g.num_qubits() {
            let degree = g.adjacency(QubitId(q as u32)).unwrap().len();
            prop_assert!((4..=6).contains(&degree));
        }
        let interior = rows.min(cols) >= 3;
        if interior {
            prop_assert_eq!(g.adjacency(g.qubit(1, 1, mqo_anneal::chimera::Side::Left, 0)).unwrap().len(), 6);
        }
    }

    #[test]
    fn triad_footprint(c in 6usize..=40) {
        let g = ChimeraGraph::new(10, 10);
        let e = triad_embedding(c, &g, (0, 0)).unwrap();
        let k = c.div_ceil(4);
        prop_assert_eq!(e.footprint_qubits(&g), 4 * k * (k + 1));
        prop_assert_eq!(e.num_chains(), c);
        prop_assert!(e.chain_lengths().iter().all(|&l| l == k + 1));
    }

    #[test]
    fn physical_energy_matches_logical(
        n in 1usize..=12,
        weights in prop::collection::vec(-40i32..40, 8),
        bits in prop::collection::vec(any::<bool>(), 12),
    ) {
        let q = random_qubo(n, &weights);
        let g = ChimeraGraph::new(3, 3);
        let e = triad_embedding(n, &g, (0, 0)).unwrap();
        let pq = embed_qubo(&q, &e, &g, 0.25).unwrap();
        let a = Assignment::new(bits[..n].to_vec());
        let sample = encode_logical(&e, &a).unwrap();
        let (back, report) = decode_physical(&e, &sample).unwrap();
        prop_assert!(report.is_consistent());
        prop_assert_eq!(&back, &a);
        let pe = physical_energy(&pq, &sample).unwrap();
        prop_assert!((pe - energy(&q, &a).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn chain_strength_scales(
        n in 6usize..=12,
        weights in prop::collection::vec(-40i32..40, 8),
        factor in 1.0f64..8.0,
    ) {
        let g = ChimeraGraph::new(3, 3);
        let e = triad_embedding(n, &g, (0, 0)).unwrap();
        let q = random_qubo(n, &weights);
        let mut scaled = Qubo::new(n);
        for (v, w) in q.linear().iter().enumerate() {
            scaled.add_linear(v, w * factor).unwrap();
        }
        for (&(u, v), w) in q.quadratic() {
            scaled.add_quadratic(u, v, w * factor).unwrap();
        }
        let a = embed_qubo(&q, &e, &g, 0.25).unwrap();
        let b = embed_qubo(&scaled, &e, &g, 0.25).unwrap();
        for (v, w) in &a.chain_penalty {
            prop_assert!(b.chain_penalty[v] >= *w - 1e-9);
            prop_assert!((b.chain_penalty[v] - 0.25 - factor * (w - 0.25)).abs() < 1e-6);
        }
    }

    #[test]
    fn ground_states_parallel_matches_sequential(n in 1usize..=14, weights in prop::collection::vec(-8i32..8, 8)) {
        let m = random_qubo(n, &weights).matrix();
        let a = m.ground_states(1e-9, 64, Execution::Sequential);
        let b = m.ground_states(1e-9, 64, Execution::Parallel);
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_curves_are_monotone_and_valid(q in 2usize..=12, p in 1usize..=4, seed in any::<u64>()) {
        let inst = instance(q, p, 0.3, seed);
        let cps = [1.0, 10.0, 50.0];
        let clock = Clock::default();
        let runs = [
            hill_climbing(&inst, &ClimbParams::default(), 50.0, seed, &cps, clock).unwrap(),
            genetic_algorithm(&inst, &GaParams::with_population(20), 50.0, seed, &cps, clock).unwrap(),
        ];
        for r in runs {
            prop_assert!(r.checkpoints.windows(2).all(|w| w[1].best <= w[0].best && w[1].time_ms > w[0].time_ms));
            let sel = r.best_selection.clone().unwrap();
            prop_assert!(mqo::validate_solution(&inst, &sel).unwrap().valid);
            prop_assert!((mqo::cost(&inst, &sel).unwrap() - r.best_value).abs() < 1e-9);
        }
    }

    #[test]
    fn curve_csv_round_trips(
        rows in prop::collection::vec((any::<u64>(), -1e6f64..1e6, 0u64..10_000, any::<bool>(), any::<bool>()), 1..20),
    ) {
        let curves: Vec<bench::TimeCostCurve> = rows
            .iter()
            .enumerate()
            .map(|(i, &(seed, cost, runs, valid, nan))| bench::TimeCostCurve {
                instance_id: format!("5x2-{i:03}"),
                family: "5x2".into(),
                solver: if i % 2 == 0 { "ga(50)".into() } else { "sa-physical".into() },
                seed,
                samples: vec![bench::CurveSample {
                    time_ms: 1.0 + i as f64 / 3.0,
                    runs,
                    best_cost: cost,
                    scaled_cost: if nan { f64::NAN } else { cost / 7.0 },
                    valid,
                }],
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curves.csv");
        bench::write_curves_csv(&path, &curves).unwrap();
        let back = bench::read_curves_csv(&path).unwrap();
        let expected: Vec<CurveRow> = curves.iter().flat_map(|c| c.rows()).collect();
        prop_assert_eq!(back.len(), expected.len());
        for (a, b) in expected.iter().zip(&back) {
            prop_assert!(a.same_as(b), "{:?} vs {:?}", a, b);
        }
    }
}

#[test]
fn instance_json_round_trips() {
    for seed in 0..20 {
        let inst = instance(6, 3, 0.5, seed);
        let back = MqoInstance::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(back, inst);
        let costs: BTreeMap<String, f64> = back.plans().iter().map(|p| (p.label.clone(), p.cost)).collect();
        assert_eq!(costs.len(), inst.num_plans());
    }
}
