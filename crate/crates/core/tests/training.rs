use poisson_csi::training::{bit_length, train_decode, train_encode, TrainingConfig, TrainingOutcome};
use poisson_csi::{simulate_slots, ChannelParams, LawMode, SlotSeq, Track};
use proptest::prelude::*;

fn cfg(max_value: u64, reps: usize, zero_max: u64) -> TrainingConfig {
    TrainingConfig {
        n_train: reps * bit_length(max_value) as usize,
        max_value,
        reps,
        zero_max,
        guard: 0,
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for j in 0..n {
        let grown: Vec<Vec<usize>> = out
            .iter()
            .filter(|s| s.len() < k)
            .map(|s| {
                let mut t = s.clone();
                t.push(j);
                t
            })
            .collect();
        out.extend(grown);
    }
    out
}

fn defeated(c: &TrainingConfig, budget: usize) -> bool {
    (0..=c.max_value).any(|v| {
        let x = train_encode(v, c).unwrap();
        subsets(c.n_train, budget).iter().any(|stuck| {
            let mut y = x.clone().with_track(Track::Output);
            stuck.iter().for_each(|&j| y.set(j, true));
            train_decode(&y, c).unwrap() != TrainingOutcome::Value(v)
        })
    })
}

#[test]
fn budget_below_slack_never_defeats_and_slack_itself_can() {
    for (max_value, reps, zero_max) in [(1, 12, 3), (3, 8, 2), (7, 5, 1), (5, 6, 3)] {
        let c = cfg(max_value, reps, zero_max);
        assert!(c.n_train <= 20);
        let slack = c.slack() as usize;
        assert!(!defeated(&c, slack - 1), "{c:?}");
        assert!(defeated(&c, slack), "{c:?}");
    }
}

#[test]
fn auto_sized_code_survives_dark_counts_and_full_budget() {
    let params = ChannelParams::default();
    let c = TrainingConfig::sized(&params, 7, 3, 1e-3).unwrap();
    let mut failures = 0;
    for seed in 0..2000u64 {
        let v = seed % 8;
        // stuck slots stacked into the first group
        let s = SlotSeq::from_positions(Track::State, c.n_train, &[0, 1, 2]).unwrap();
        let x = train_encode(v, &c).unwrap();
        let y = simulate_slots(&x, &s, &params, seed, LawMode::Linearized).unwrap();
        failures += (train_decode(&y, &c).unwrap() != TrainingOutcome::Value(v)) as u32;
    }
    assert!(failures <= 20, "{failures}");
}

proptest! {
    #[test]
    fn clean_round_trip(max_value in 1u64..200, reps in 1usize..6, v_frac in 0.0f64..1.0) {
        let c = cfg(max_value, reps, 0);
        let v = (v_frac * max_value as f64) as u64;
        let y = train_encode(v, &c).unwrap().with_track(Track::Output);
        prop_assert_eq!(train_decode(&y, &c).unwrap(), TrainingOutcome::Value(v));
    }

    #[test]
    fn encoded_weight_is_popcount_times_reps(max_value in 1u64..1000, reps in 1usize..8, v_frac in 0.0f64..1.0) {
        let c = cfg(max_value, reps, 0);
        let v = (v_frac * max_value as f64) as u64;
        let x = train_encode(v, &c).unwrap();
        prop_assert_eq!(x.count_ones(), v.count_ones() as usize * reps);
    }
}

#[test]
fn two_hundred_slot_groups_cannot_carry_a_one() {
    // at A = 1, λ = 0.1, Δ = 1e-3 a lit group of 201 slots is silent with
    // probability (1 − 1.1e-3)^201 ≈ 0.80, so a one is lost more often than not
    let params = ChannelParams::default();
    let silent = (1.0 - params.slot_law(LawMode::Linearized).on).powi(201);
    assert!(silent > 0.79);
    let c = cfg(1, 201, 0);
    let mut lost = 0;
    for seed in 0..2000u64 {
        let x = train_encode(1, &c).unwrap();
        let y = simulate_slots(&x, &SlotSeq::zeros(Track::State, c.n_train), &params, seed, LawMode::Linearized).unwrap();
        lost += (train_decode(&y, &c).unwrap() != TrainingOutcome::Value(1)) as u32;
    }
    assert!((lost as f64 / 2000.0 - silent).abs() < 0.04, "{lost}");
}
