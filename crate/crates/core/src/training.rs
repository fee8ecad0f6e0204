//! Training phase: conveys the stuck-slot count `μT` of the information phase
//! to the receiver without using the transmitter's knowledge of the states.
//!
//! Each bit of `μT` (most significant first) occupies a group of `reps` slots,
//! all on for a one and all off for a zero. The receiver counts ones per group:
//! at most `zero_max` ones decode as zero, at least `zero_max + 1 + guard`
//! decode as one, anything between is a failure. `zero_max` absorbs the whole
//! adversary budget on top of the dark-count quantile, so stuck slots alone
//! can never turn a zero into a one.

use serde::{Deserialize, Serialize};

use crate::channel::{SlotSeq, Track};
use crate::error::{Error, Result};
use crate::infomath::{binomial_lower_tail_ln, binomial_upper_tail_ln};
use crate::params::{ChannelParams, LawMode};

/// Default per-block failure target used when sizing `reps`.
pub const DEFAULT_TARGET_FAILURE: f64 = 1e-3;

const MAX_REPS: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingConfig {
    /// Slots in the training phase.
    pub n_train: usize,
    /// Largest value that can be sent, `⌊(1+α)νT⌋`.
    pub max_value: u64,
    /// Slots per bit group.
    pub reps: usize,
    /// Largest group count still read as a zero.
    pub zero_max: u64,
    /// Width of the failure band between the zero and one regions.
    pub guard: u64,
}

/// Number of bits in the binary expansion of `v` (zero for `v = 0`).
pub fn bit_length(v: u64) -> u32 {
    64 - v.leading_zeros()
}

impl TrainingConfig {
    pub fn bits(&self) -> u32 {
        bit_length(self.max_value)
    }

    /// Smallest group count read as a one.
    pub fn one_min(&self) -> u64 {
        self.zero_max + 1 + self.guard
    }

    /// Stuck slots needed to push a silent zero group out of the zero region.
    pub fn slack(&self) -> u64 {
        self.zero_max + 1
    }

    pub fn validate(&self) -> Result<()> {
        let need = self.reps * self.bits() as usize;
        if self.n_train < need {
            return Err(Error::Config(format!(
                "training phase of {} slots cannot hold {} groups of {}",
                self.n_train,
                self.bits(),
                self.reps
            )));
        }
        if self.bits() > 0 && self.one_min() > self.reps as u64 {
            return Err(Error::Config(format!(
                "a group of {} slots can never reach the one threshold {}",
                self.reps,
                self.one_min()
            )));
        }
        Ok(())
    }

    /// Auto-sized configuration: the smallest `reps` whose per-group error
    /// probabilities, under the linearized law and with `budget` stuck slots
    /// added to zero groups, meet `target` for the whole expansion. The
    /// training phase is exactly `reps · bits` slots long.
    pub fn sized(params: &ChannelParams, max_value: u64, budget: u64, target: f64) -> Result<Self> {
        params.validate()?;
        if !(target > 0.0 && target < 1.0) {
            return Err(Error::Config(format!("failure target {target} must lie in (0,1)")));
        }
        let bits = bit_length(max_value);
        if bits == 0 {
            return Ok(TrainingConfig {
                n_train: 0,
                max_value,
                reps: 0,
                zero_max: 0,
                guard: 0,
            });
        }
        let per_group = target / bits as f64;
        let law = params.slot_law(LawMode::Linearized);
        let ok = |reps: usize| -> Option<u64> {
            let zero_max = zero_region(reps, law.off, budget, per_group / 2.0);
            let one_min = zero_max + 1;
            if one_min > reps as u64 {
                return None;
            }
            let miss = binomial_lower_tail_ln(reps as u64, one_min - 1, law.on).exp();
            (miss <= per_group / 2.0).then_some(zero_max)
        };
        let mut hi = 1usize;
        while ok(hi).is_none() {
            hi *= 2;
            if hi > MAX_REPS {
                return Err(Error::Config("no feasible repetition factor for the training phase".into()));
            }
        }
        let mut lo = hi / 2;
        // binary search on the (essentially monotone) feasibility boundary
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ok(mid).is_some() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let zero_max = ok(hi).expect("feasible by construction");
        Ok(TrainingConfig {
            n_train: hi * bits as usize,
            max_value,
            reps: hi,
            zero_max,
            guard: 0,
        })
    }

    /// Configuration for a training phase of exactly `n_train` slots: the
    /// auto-sized `reps` when it fits, otherwise as many slots per group as
    /// the phase allows, with the zero region recomputed for that size.
    pub fn for_phase(
        params: &ChannelParams,
        n_train: usize,
        max_value: u64,
        budget: u64,
        target: f64,
    ) -> Result<Self> {
        let auto = TrainingConfig::sized(params, max_value, budget, target)?;
        let bits = auto.bits() as usize;
        if bits == 0 {
            return Ok(TrainingConfig { n_train, ..auto });
        }
        if auto.n_train <= n_train {
            return Ok(TrainingConfig { n_train, ..auto });
        }
        let reps = n_train / bits;
        if reps == 0 {
            return Err(Error::Config(format!(
                "training phase of {n_train} slots is shorter than {bits} bit groups"
            )));
        }
        let law = params.slot_law(LawMode::Linearized);
        let zero_max = zero_region(reps, law.off, budget, target / bits as f64 / 2.0).min(reps as u64 - 1);
        Ok(TrainingConfig {
            n_train,
            max_value,
            reps,
            zero_max,
            guard: 0,
        })
    }
}

/// `budget` plus the smallest `z` with `P[Bin(reps, off) > z] ≤ tail`.
fn zero_region(reps: usize, off: f64, budget: u64, tail: f64) -> u64 {
    let mut z = 0u64;
    while z < reps as u64 && binomial_upper_tail_ln(reps as u64, z + 1, off).exp() > tail {
        z += 1;
    }
    z + budget
}

/// Input track for the training phase carrying `mu_t`.
pub fn train_encode(mu_t: u64, cfg: &TrainingConfig) -> Result<SlotSeq> {
    cfg.validate()?;
    if mu_t > cfg.max_value {
        return Err(Error::IndexOutOfRange {
            what: "mu_t",
            value: mu_t,
            limit: cfg.max_value + 1,
        });
    }
    let bits = cfg.bits();
    let mut x = SlotSeq::zeros(Track::Input, cfg.n_train);
    for i in 0..bits {
        if (mu_t >> (bits - 1 - i)) & 1 == 1 {
            let start = i as usize * cfg.reps;
            for j in start..start + cfg.reps {
                x.set(j, true);
            }
        }
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingOutcome {
    Value(u64),
    /// Some group landed in the guard band, or the value exceeds `max_value`.
    Failure,
}

impl TrainingOutcome {
    pub fn value(self) -> Option<u64> {
        match self {
            TrainingOutcome::Value(v) => Some(v),
            TrainingOutcome::Failure => None,
        }
    }
}

/// Reads `μT` back from the training-phase output.
pub fn train_decode(y: &SlotSeq, cfg: &TrainingConfig) -> Result<TrainingOutcome> {
    if y.len() != cfg.n_train {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: cfg.n_train,
        });
    }
    let mut value = 0u64;
    for i in 0..cfg.bits() as usize {
        let count = (i * cfg.reps..(i + 1) * cfg.reps).filter(|&j| y.get(j)).count() as u64;
        let bit = if count <= cfg.zero_max {
            0
        } else if count >= cfg.one_min() {
            1
        } else {
            return Ok(TrainingOutcome::Failure);
        };
        value = (value << 1) | bit;
    }
    if value > cfg.max_value {
        return Ok(TrainingOutcome::Failure);
    }
    Ok(TrainingOutcome::Value(value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manual(max_value: u64, reps: usize, zero_max: u64) -> TrainingConfig {
        TrainingConfig {
            n_train: reps * bit_length(max_value) as usize,
            max_value,
            reps,
            zero_max,
            guard: 0,
        }
    }

    #[test]
    fn bit_lengths() {
        assert_eq!(bit_length(0), 0);
        assert_eq!(bit_length(1), 1);
        assert_eq!(bit_length(63), 6);
        assert_eq!(bit_length(64), 7);
    }

    #[test]
    fn zero_encodes_to_silence() {
        let cfg = manual(63, 15, 0);
        assert_eq!(train_encode(0, &cfg).unwrap().count_ones(), 0);
        let y = SlotSeq::zeros(Track::Output, cfg.n_train);
        assert_eq!(train_decode(&y, &cfg).unwrap(), TrainingOutcome::Value(0));
    }

    #[test]
    fn max_value_lights_its_groups() {
        let cfg = manual(5, 4, 0);
        let x = train_encode(5, &cfg).unwrap();
        // 101
        let expect: Vec<usize> = (0..4).chain(8..12).collect();
        assert_eq!(x.ones_positions(), expect);
        assert!(train_encode(6, &cfg).is_err());
    }

    #[test]
    fn noiseless_round_trip_is_exact() {
        let cfg = manual(63, 15, 0);
        for v in 0..=63 {
            let y = train_encode(v, &cfg).unwrap().with_track(Track::Output);
            assert_eq!(train_decode(&y, &cfg).unwrap(), TrainingOutcome::Value(v));
        }
    }

    #[test]
    fn guard_band_reports_failure() {
        let cfg = TrainingConfig { guard: 3, ..manual(1, 10, 1) };
        let y = SlotSeq::from_positions(Track::Output, 10, &[0, 1, 2]).unwrap();
        assert_eq!(train_decode(&y, &cfg).unwrap(), TrainingOutcome::Failure);
    }

    #[test]
    fn decode_rejects_wrong_length() {
        let cfg = manual(3, 5, 0);
        assert!(train_decode(&SlotSeq::zeros(Track::Output, 9), &cfg).is_err());
    }

    #[test]
    fn validation() {
        assert!(TrainingConfig { n_train: 5, ..manual(3, 5, 0) }.validate().is_err());
        assert!(manual(3, 5, 5).validate().is_err());
        manual(3, 5, 4).validate().unwrap();
    }

    #[test]
    fn sized_config_covers_budget() {
        let params = ChannelParams::default();
        let cfg = TrainingConfig::sized(&params, 5, 5, 1e-3).unwrap();
        cfg.validate().unwrap();
        assert!(cfg.slack() > 5);
        assert_eq!(cfg.n_train, cfg.reps * 3);
        // expected count of a one group clears the threshold comfortably
        assert!(cfg.reps as f64 * 1.1e-3 > cfg.one_min() as f64);
    }

    #[test]
    fn zero_max_value_needs_no_slots() {
        let cfg = TrainingConfig::sized(&ChannelParams::default(), 0, 0, 1e-3).unwrap();
        assert_eq!(cfg.bits(), 0);
        let cfg = TrainingConfig::for_phase(&ChannelParams::default(), 100, 0, 0, 1e-3).unwrap();
        let y = SlotSeq::ones(Track::Output, 100);
        assert_eq!(train_decode(&y, &cfg).unwrap(), TrainingOutcome::Value(0));
    }

    #[test]
    fn short_phase_shrinks_groups() {
        let params = ChannelParams::default();
        let cfg = TrainingConfig::for_phase(&params, 3000, 5, 5, 1e-3).unwrap();
        assert_eq!(cfg.n_train, 3000);
        assert_eq!(cfg.reps, 1000);
        cfg.validate().unwrap();
        assert!(TrainingConfig::for_phase(&params, 2, 5, 5, 1e-3).is_err());
    }
}
