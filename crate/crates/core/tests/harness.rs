use poisson_csi::harness::{
    run_experiment, run_experiment_wired, run_random_state_experiment, ExperimentConfig, MuWiring, StateModel,
};
use poisson_csi::{gen_adversarial_states, AdversaryStrategy, Error, RandomStateLaw, StateBudget};
use proptest::prelude::*;

fn small(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        t_seconds: 20.0,
        trials: 25,
        seed,
        ..Default::default()
    }
}

#[test]
fn ground_truth_wiring_trips_the_audit() {
    let err = run_experiment_wired(&small(1), MuWiring::GroundTruth).unwrap_err();
    assert!(matches!(err, Error::Audit(_)), "{err}");
    run_experiment_wired(&small(1), MuWiring::Trained).unwrap();
}

#[test]
fn decomposition_identity_is_exact() {
    for seed in 0..4 {
        let cfg = ExperimentConfig {
            adversary: StateModel::Random(RandomStateLaw::HomogeneousPoisson { rate: 0.05 }),
            ..small(seed)
        };
        let r = run_random_state_experiment(&cfg).unwrap();
        let d = r.decomposition.unwrap();
        assert!(d.identity_holds(&r.counts));
        assert_eq!(d.large_state_trials + d.small_state_trials, 25);
    }
}

#[test]
fn bursty_states_report_no_exact_tail() {
    let cfg = ExperimentConfig {
        adversary: StateModel::Random(RandomStateLaw::Bursty { rate: 0.01, burst_len: 3 }),
        ..small(2)
    };
    let r = run_random_state_experiment(&cfg).unwrap();
    assert!(r.decomposition.unwrap().exact_tail.is_none());
}

#[test]
fn result_document_is_versioned_and_omits_wall_time() {
    let r = run_experiment(&small(3)).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
    assert_eq!(v["schema"], 1);
    assert!(v.get("wall_time").is_none());
    assert_eq!(v["fingerprint"].as_str().unwrap().len(), 12);
    assert_eq!(v["config"]["T"], 20.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn tallies_conserve_trials(seed in any::<u64>(), trials in 1u64..12, strategy in 0usize..4) {
        let cfg = ExperimentConfig {
            trials,
            adversary: StateModel::Adversarial(AdversaryStrategy::all()[strategy]),
            ..small(seed)
        };
        let r = run_experiment(&cfg).unwrap();
        prop_assert_eq!(r.counts.total(), trials);
        prop_assert!((0.0..=1.0).contains(&r.error_rate.value));
    }

    #[test]
    fn adversary_never_exceeds_budget(n in 1usize..3000, max_stuck in 0usize..200, start in 0usize..3000, seed in any::<u64>(), strategy in 0usize..4) {
        let budget = StateBudget { nu: 0.0, block_seconds: 0.0, max_stuck, info_start: start };
        let s = gen_adversarial_states(n, &budget, AdversaryStrategy::all()[strategy], seed);
        prop_assert!(s.count_ones() <= max_stuck);
        prop_assert_eq!(s.len(), n);
    }
}
