//! Slot-level simulation of the Poisson channel with dark current and stuck
//! slots, and generators for adversarial and random state tracks.

mod slots;
mod states;

pub use slots::{SlotSeq, Track};
pub use states::{
    gen_adversarial_states, gen_random_states, sample_random_states, AdversaryStrategy,
    RandomStateLaw, RandomStates, StateBudget,
};

use rand::RngCore;

use crate::error::{Error, Result};
use crate::params::{ChannelParams, LawMode};
use crate::rng::{stream_rng, BernoulliThreshold};

/// Passes `x` through the slotted channel with state track `s`.
///
/// A stuck slot always reads one. Otherwise the slot reads one with
/// probability `W(1|x)` under `mode`. One 64-bit word is drawn per slot, so the
/// output is a pure function of the inputs and `seed`.
pub fn simulate_slots(
    x: &SlotSeq,
    s: &SlotSeq,
    params: &ChannelParams,
    seed: u64,
    mode: LawMode,
) -> Result<SlotSeq> {
    if x.len() != s.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: s.len(),
        });
    }
    params.validate()?;
    let law = params.slot_law(mode);
    let off = BernoulliThreshold::new(law.off);
    let on = BernoulliThreshold::new(law.on);
    let mut rng = stream_rng(seed);
    let mut y = SlotSeq::zeros(Track::Output, x.len());
    for j in 0..x.len() {
        let word = rng.next_u64();
        let one = s.get(j) || if x.get(j) { on.sample(word) } else { off.sample(word) };
        if one {
            y.set(j, true);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ChannelParams {
        ChannelParams::default()
    }

    #[test]
    fn silent_channel_outputs_zeros() {
        let p = ChannelParams { dark: 0.0, ..params() };
        let x = SlotSeq::zeros(Track::Input, 5000);
        let s = SlotSeq::zeros(Track::State, 5000);
        let y = simulate_slots(&x, &s, &p, 1, LawMode::Linearized).unwrap();
        assert_eq!(y.count_ones(), 0);
        assert_eq!(y.track(), Track::Output);
    }

    #[test]
    fn stuck_slots_read_one() {
        for x in [SlotSeq::zeros(Track::Input, 300), SlotSeq::ones(Track::Input, 300)] {
            let s = SlotSeq::ones(Track::State, 300);
            let y = simulate_slots(&x, &s, &params(), 3, LawMode::Exact).unwrap();
            assert_eq!(y.count_ones(), 300);
        }
    }

    #[test]
    fn stuck_dominance_on_mixed_tracks() {
        let x = SlotSeq::from_positions(Track::Input, 1000, &(0..1000).step_by(3).collect::<Vec<_>>()).unwrap();
        let s = SlotSeq::from_positions(Track::State, 1000, &(0..1000).step_by(7).collect::<Vec<_>>()).unwrap();
        let y = simulate_slots(&x, &s, &params(), 11, LawMode::Linearized).unwrap();
        for j in s.ones_positions() {
            assert!(y.get(j));
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let x = SlotSeq::zeros(Track::Input, 10);
        let s = SlotSeq::zeros(Track::State, 9);
        assert!(matches!(
            simulate_slots(&x, &s, &params(), 0, LawMode::Linearized),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let x = SlotSeq::ones(Track::Input, 20_000);
        let s = SlotSeq::zeros(Track::State, 20_000);
        let a = simulate_slots(&x, &s, &params(), 42, LawMode::Linearized).unwrap();
        let b = simulate_slots(&x, &s, &params(), 42, LawMode::Linearized).unwrap();
        let c = simulate_slots(&x, &s, &params(), 43, LawMode::Linearized).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn ones_fraction_concentrates_on_linearized_probability() {
        let n = 1_000_000;
        let p = params();
        let x = SlotSeq::ones(Track::Input, n);
        let s = SlotSeq::zeros(Track::State, n);
        let y = simulate_slots(&x, &s, &p, 9, LawMode::Linearized).unwrap();
        let prob = (p.peak + p.dark) * p.slot;
        let sigma = (n as f64 * prob * (1.0 - prob)).sqrt();
        let dev = (y.count_ones() as f64 - n as f64 * prob).abs();
        assert!(dev < 3.0 * sigma, "deviation {dev}, sigma {sigma}");
    }
}
