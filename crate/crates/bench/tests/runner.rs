use drsub_bench::config::{ExperimentConfig, StreamKind};
use drsub_bench::instance::{build_instance, Workload};
use drsub_bench::{presets, run_experiment};
use drsub_core::Objective;

fn small(name: &str, horizon: usize, seeds: Vec<u64>) -> ExperimentConfig {
    let mut cfg = presets::preset(name).unwrap();
    cfg.horizon = horizon;
    cfg.seeds = seeds;
    cfg.comparator.fw_k = 200;
    cfg
}

#[test]
fn exp1_preset_gives_two_feasible_traces() {
    let cfg = small("exp1", 100, vec![0]);
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.runs.len(), 2);
    let inst = build_instance(&cfg, 0).unwrap();
    for r in &out.runs {
        assert_eq!(r.trace.horizon(), 100);
        for rec in &r.trace.records {
            assert!(inst.domain.contains(&rec.x, 1e-7).unwrap());
        }
    }
}

#[test]
fn exp2_runs_share_the_multiset() {
    let cfg = small("exp2", 40, vec![2]);
    let out = run_experiment(&cfg).unwrap();
    let inst = build_instance(&cfg, 2).unwrap();
    let Workload::Sequence { functions, .. } = &inst.workload else { panic!() };
    // Both traces have the same comparator total: the order changes, the sum does not.
    let totals: Vec<f64> = out.runs.iter().map(|r| r.trace.meta.comparator_total).collect();
    assert!((totals[0] - totals[1]).abs() < 1e-9 * totals[0].abs().max(1.0));
    let direct: f64 = functions.iter().map(|f| f.value(&out.runs[0].trace.meta.comparator.x).unwrap()).sum();
    assert!((direct - totals[0]).abs() < 1e-9 * direct.abs().max(1.0));
    // The blocked run is constant on blocks of five.
    let blocked = &out.runs[1].trace.records;
    for chunk in blocked.chunks(5) {
        assert!(chunk.iter().all(|r| r.x == chunk[0].x));
    }
}

#[test]
fn exp3_counts_and_alphas() {
    let cfg = small("exp3", 30, vec![0]);
    let out = run_experiment(&cfg).unwrap();
    let calls: Vec<Option<usize>> = out.runs.iter().map(|r| r.trace.meta.gradient_calls).collect();
    let alg2: usize = (1..=30).map(|t: usize| t * (t as f64).sqrt().ceil() as usize).sum();
    assert_eq!(calls, vec![Some(alg2), Some(59), Some(30)]);
    let alphas: Vec<f64> = out.runs.iter().map(|r| r.trace.meta.alpha).collect();
    assert_eq!(alphas, vec![drsub_core::ONE_MINUS_INV_E, drsub_core::INV_E, drsub_core::INV_E]);
    assert!(out.runs.iter().all(|r| r.trace.records.iter().all(|x| x.expected_utility.is_some())));
    assert!(out.runs[1].estimator_errors.is_some());
}

#[test]
fn random_order_model_permutes_arrivals() {
    let mut cfg = small("exp2", 20, vec![4]);
    cfg.stream.model = StreamKind::RandomOrder;
    let inst = build_instance(&cfg, 4).unwrap();
    let Workload::Sequence { functions, arrival, .. } = &inst.workload else { panic!() };
    assert_ne!(functions, arrival);
    let key = |f: &drsub_core::Utility| serde_json::to_string(f).unwrap();
    let mut a: Vec<String> = functions.iter().map(key).collect();
    let mut b: Vec<String> = arrival.iter().map(key).collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn stream_seed_changes_the_order_only() {
    let mut cfg = small("exp2", 20, vec![4]);
    cfg.stream.model = StreamKind::RandomOrder;
    let a = build_instance(&cfg, 4).unwrap();
    cfg.stream.seed = Some(9);
    let b = build_instance(&cfg, 4).unwrap();
    let (Workload::Sequence { functions: fa, arrival: xa, .. }, Workload::Sequence { functions: fb, arrival: xb, .. }) =
        (&a.workload, &b.workload)
    else {
        panic!()
    };
    assert_eq!(fa, fb);
    assert_ne!(xa, xb);
    assert_eq!(a.domain, b.domain);
}

#[test]
fn outputs_are_written_and_reproducible() {
    let cfg = small("exp2", 20, vec![0, 1]);
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&cfg).unwrap();
    let written = out.write(dir.path()).unwrap();
    assert_eq!(written.len(), 2 * 2 * 2 + 2);
    let csv = std::fs::read_to_string(dir.path().join("adversarial_order_seed1.csv")).unwrap();
    assert!(csv.starts_with("t,x1,x2,x3,x4,utility,cum_utility,alpha_regret\n"));
    assert_eq!(csv.lines().count(), 21);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("adversarial_order_seed1.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["csv"], "adversarial_order_seed1.csv");
    assert_eq!(sidecar["meta"]["seed"], 1);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"].as_array().unwrap().len(), 4);
    let svg = std::fs::read_to_string(dir.path().join("regret.svg")).unwrap();
    assert!(svg.contains(">random_order_blocked</text>"));

    let again = run_experiment(&cfg).unwrap();
    for (a, b) in out.runs.iter().zip(&again.runs) {
        assert_eq!(a.trace.to_csv(), b.trace.to_csv());
    }
    assert_eq!(out.plot().unwrap(), again.plot().unwrap());
}

#[test]
fn summary_table_lists_every_algorithm() {
    let cfg = small("exp3", 10, vec![0, 1]);
    let table = run_experiment(&cfg).unwrap().summary().table();
    for id in ["averaged_gradient_fw", "recursive_fw", "osfw"] {
        assert!(table.contains(id), "{table}");
    }
}

#[test]
fn missing_modulus_needs_explicit_mu() {
    let mut cfg = small("exp2", 20, vec![0]);
    // Only positive diagonals: the average is not strongly DR-submodular.
    if let drsub_bench::config::GeneratorConfig::QuadraticMix { first_diag, .. } = &mut cfg.stream.generator {
        *first_diag = [0.0, 5.0];
    }
    for a in &mut cfg.algorithms {
        if let drsub_bench::AlgorithmConfig::Algorithm1 { mu, .. } | drsub_bench::AlgorithmConfig::BlockedAlgorithm1 { mu, .. } = a {
            *mu = None;
        }
    }
    let err = run_experiment(&cfg).unwrap_err().to_string();
    assert!(err.contains("set mu explicitly"), "{err}");
}
