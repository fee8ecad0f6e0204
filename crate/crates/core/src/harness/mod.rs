//! Full-block Monte Carlo experiments, sweeps and their persisted results.
//!
//! A block is a training phase of `αT` seconds followed by an information
//! phase of `T` seconds. Trial `i` derives every random stream from
//! `derive_seed(seed, i)`, so a run is a pure function of its configuration
//! no matter how the trials are spread over threads.

mod config;
mod experiment;
mod sweep;

pub use config::{BlockPlan, ExperimentConfig, KBitsPolicy, StateModel, MAX_CODEWORD_BITS};
pub use experiment::{
    audit_trial, run_adversarial_experiment, run_experiment, run_experiment_wired,
    run_random_state_experiment, run_trial, run_trial_wired, trace_trial, wilson, Decomposition, Estimate,
    ExperimentResult, MuWiring, Outcome, OutcomeCounts, TrialRecord, TrialTrace, RESULT_SCHEMA,
};
pub use sweep::{sweep, write_sweep_csv, SweepAxis, SweepPoint};

use sha2::{Digest, Sha256};

const SOURCES: [&str; 17] = [
    include_str!("../binning.rs"),
    include_str!("../causal.rs"),
    include_str!("../channel/mod.rs"),
    include_str!("../channel/slots.rs"),
    include_str!("../channel/states.rs"),
    include_str!("../error.rs"),
    include_str!("../infomath.rs"),
    include_str!("../lib.rs"),
    include_str!("../params.rs"),
    include_str!("../rng.rs"),
    include_str!("../training.rs"),
    include_str!("config.rs"),
    include_str!("experiment.rs"),
    include_str!("mod.rs"),
    include_str!("sweep.rs"),
    env!("CARGO_PKG_NAME"),
    env!("CARGO_PKG_VERSION"),
];

/// Short SHA-256 of the library sources, in the style of an abbreviated commit id.
pub fn fingerprint() -> String {
    let mut h = Sha256::new();
    for s in SOURCES {
        h.update((s.len() as u64).to_le_bytes());
        h.update(s.as_bytes());
    }
    h.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect()
}
