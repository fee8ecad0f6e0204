//! Simulator and numerical library for the peak-limited Poisson channel with
//! spurious counts known to the transmitter.
//!
//! The slotted channel, the two-phase binning code and the capacity routines
//! live in their own modules; [`harness`] runs them end to end.

pub mod binning;
pub mod causal;
pub mod channel;
pub mod error;
pub mod harness;
pub mod infomath;
pub mod params;
pub mod rng;
pub mod training;

pub use binning::{decode, encode, CodebookSpec, DecodeOutcome, EncodeOutcome, Erasure};
pub use causal::{causal_capacity, no_csi_capacity, StrategyChannel};
pub use channel::{
    gen_adversarial_states, gen_random_states, simulate_slots, AdversaryStrategy, RandomStateLaw,
    SlotSeq, StateBudget, Track,
};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ExperimentResult, KBitsPolicy, StateModel, SweepAxis};
pub use infomath::{
    achievable_rate, bernoulli_kl, blahut_arimoto, capacity_poisson, discrete_capacity,
    CapacityResult, DmcLaw, RateUnit, SanovTail,
};
pub use params::{ChannelParams, LawMode, SlotLaw};
pub use training::{train_decode, train_encode, TrainingConfig, TrainingOutcome};
