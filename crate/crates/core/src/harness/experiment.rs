use std::path::Path;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{BlockPlan, ExperimentConfig, StateModel};
use super::fingerprint;
use crate::binning::{decode, encode, CodebookSpec, DecodeOutcome, Erasure};
use crate::channel::{
    gen_adversarial_states, sample_random_states, simulate_slots, RandomStateLaw, SlotSeq, Track,
};
use crate::error::{Error, Result};
use crate::infomath::{ceil_count, poisson_upper_tail};
use crate::rng::{derive_seed, stream_rng};
use crate::training::{train_decode, train_encode};

/// Version of the result document layout.
pub const RESULT_SCHEMA: u32 = 1;

const WILSON_Z: f64 = 1.959_963_984_540_054;

const STREAM_STATES: u64 = 0;
const STREAM_CODEBOOK: u64 = 1;
const STREAM_MESSAGE: u64 = 2;
const STREAM_TRAIN_NOISE: u64 = 3;
const STREAM_INFO_NOISE: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    /// No bin of the message met the encoder threshold.
    EncoderFailure,
    /// No codeword met the decoder threshold.
    Miss,
    /// A wrong message, or two distinct messages, met the decoder threshold.
    FalseDecode,
    /// The training phase failed or delivered a wrong count that cost the block.
    TrainingFailure,
}

impl Outcome {
    pub fn is_error(self) -> bool {
        self != Outcome::Success
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub success: u64,
    pub encoder_failure: u64,
    pub miss: u64,
    pub false_decode: u64,
    pub training_failure: u64,
}

impl OutcomeCounts {
    pub fn add(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::Success => self.success += 1,
            Outcome::EncoderFailure => self.encoder_failure += 1,
            Outcome::Miss => self.miss += 1,
            Outcome::FalseDecode => self.false_decode += 1,
            Outcome::TrainingFailure => self.training_failure += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.success + self.errors()
    }

    pub fn errors(&self) -> u64 {
        self.encoder_failure + self.miss + self.false_decode + self.training_failure
    }
}

/// Proportion with its Wilson score interval at 95%.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub low: f64,
    pub high: f64,
}

/// Wilson 95% interval for `k` successes out of `n`; `[0, 1]` when `n = 0`.
pub fn wilson(k: u64, n: u64) -> Estimate {
    if n == 0 {
        return Estimate { value: 0.0, low: 0.0, high: 1.0 };
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    Estimate {
        value: p,
        low: (center - half).max(0.0),
        high: (center + half).min(1.0),
    }
}

/// Split of the random-state trials at the spurious-count threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// `2ζ(1+α)T/ε`, in counts.
    pub threshold: f64,
    pub large_state_trials: u64,
    pub large_state_errors: u64,
    pub small_state_trials: u64,
    pub small_state_errors: u64,
    /// Empirical `P[S ≥ threshold]`.
    pub tail: Estimate,
    /// Exact `P[S ≥ threshold]` for Poisson states.
    pub exact_tail: Option<f64>,
    /// Empirical `P[error | S < threshold]`.
    pub conditional_error: Estimate,
}

impl Decomposition {
    /// Total errors equal the errors of both branches.
    pub fn identity_holds(&self, counts: &OutcomeCounts) -> bool {
        self.large_state_errors + self.small_state_errors == counts.errors()
            && self.large_state_trials + self.small_state_trials == counts.total()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema: u32,
    pub fingerprint: String,
    pub config: ExperimentConfig,
    pub plan: BlockPlan,
    pub counts: OutcomeCounts,
    pub error_rate: Estimate,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub decomposition: Option<Decomposition>,
    /// Not persisted, so that result files depend on the configuration only.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ExperimentResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// What a single full-block trial saw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub outcome: Outcome,
    /// Stuck slots in the information phase.
    pub true_mu_t: u64,
    /// Value delivered by the training decoder.
    pub trained_mu_t: Option<u64>,
    /// Value the information decoder was run with.
    pub decoder_mu_t: Option<u64>,
    /// Spurious counts over the block, for random states.
    pub state_counts: Option<u64>,
}

/// Source of the stuck-slot count handed to the information decoder.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuWiring {
    Trained,
    /// Hands the decoder the true count; only exists to exercise the audit.
    GroundTruth,
}

/// Tracks of one full block (training phase followed by the information
/// phase). Phases that did not run are left silent.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTrace {
    pub record: TrialRecord,
    pub states: SlotSeq,
    pub input: SlotSeq,
    pub output: SlotSeq,
}

struct Phases {
    x_train: SlotSeq,
    y_train: SlotSeq,
    x_info: SlotSeq,
    y_info: SlotSeq,
}

/// Runs trial `index` of `cfg`.
pub fn run_trial(cfg: &ExperimentConfig, plan: &BlockPlan, index: u64) -> Result<TrialRecord> {
    run_trial_wired(cfg, plan, index, MuWiring::Trained)
}

#[doc(hidden)]
pub fn run_trial_wired(
    cfg: &ExperimentConfig,
    plan: &BlockPlan,
    index: u64,
    wiring: MuWiring,
) -> Result<TrialRecord> {
    Ok(trial(cfg, plan, index, wiring, None)?.0)
}

/// Runs trial `index` of `cfg` and keeps its tracks.
pub fn trace_trial(cfg: &ExperimentConfig, plan: &BlockPlan, index: u64) -> Result<TrialTrace> {
    let mut phases = Phases {
        x_train: SlotSeq::zeros(Track::Input, plan.n_train),
        y_train: SlotSeq::zeros(Track::Output, plan.n_train),
        x_info: SlotSeq::zeros(Track::Input, plan.n_info),
        y_info: SlotSeq::zeros(Track::Output, plan.n_info),
    };
    let (record, states) = trial(cfg, plan, index, MuWiring::Trained, Some(&mut phases))?;
    Ok(TrialTrace {
        record,
        states,
        input: phases.x_train.concat(&phases.x_info),
        output: phases.y_train.concat(&phases.y_info),
    })
}

fn trial(
    cfg: &ExperimentConfig,
    plan: &BlockPlan,
    index: u64,
    wiring: MuWiring,
    mut keep: Option<&mut Phases>,
) -> Result<(TrialRecord, SlotSeq)> {
    let p = &cfg.params;
    let seed = derive_seed(cfg.seed, index);
    let n = plan.n_train + plan.n_info;
    let state_seed = derive_seed(seed, STREAM_STATES);
    let (states, state_counts) = match cfg.adversary {
        StateModel::Adversarial(strategy) => (gen_adversarial_states(n, &plan.budget, strategy, state_seed), None),
        StateModel::Random(law) => {
            let r = sample_random_states(n, &law, p.slot, state_seed)?;
            (r.track, Some(r.counts))
        }
    };
    let s_train = states.slice(0, plan.n_train);
    let s_info = states.slice(plan.n_train, n);
    let true_mu_t = s_info.count_ones() as u64;

    let spec = CodebookSpec {
        p: p.duty_cycle,
        n: plan.n_info,
        m_bits: plan.m_bits,
        k_bits: plan.k_bits,
        seed: derive_seed(seed, STREAM_CODEBOOK),
    };
    let m = stream_rng(derive_seed(seed, STREAM_MESSAGE)).gen_range(0..spec.messages());

    let record = |outcome, trained_mu_t, decoder_mu_t| TrialRecord {
        outcome,
        true_mu_t,
        trained_mu_t,
        decoder_mu_t,
        state_counts,
    };

    // a count above the training range cannot be sent at all
    let trained_mu_t = if true_mu_t > plan.training.max_value {
        None
    } else {
        let x = train_encode(true_mu_t, &plan.training)?;
        let y = simulate_slots(&x, &s_train, p, derive_seed(seed, STREAM_TRAIN_NOISE), cfg.law_mode)?;
        let got = train_decode(&y, &plan.training)?.value();
        if let Some(k) = keep.as_deref_mut() {
            k.x_train = x;
            k.y_train = y;
        }
        got
    };
    let Some(trained) = trained_mu_t else {
        return Ok((record(Outcome::TrainingFailure, None, None), states));
    };

    let sent = encode(m, &s_info, &spec, p)?;
    if sent.k.is_none() {
        return Ok((record(Outcome::EncoderFailure, trained_mu_t, None), states));
    }
    let y = simulate_slots(&sent.x, &s_info, p, derive_seed(seed, STREAM_INFO_NOISE), cfg.law_mode)?;
    let decoder_mu_t = match wiring {
        MuWiring::Trained => trained,
        MuWiring::GroundTruth => true_mu_t,
    };
    let outcome = match decode(&y, decoder_mu_t, &spec, p)? {
        DecodeOutcome::Decoded { m: got, .. } if got == m => Outcome::Success,
        _ if trained != true_mu_t => Outcome::TrainingFailure,
        DecodeOutcome::Decoded { .. } | DecodeOutcome::Erasure(Erasure::Ambiguous { .. }) => Outcome::FalseDecode,
        DecodeOutcome::Erasure(Erasure::NoCandidate) => Outcome::Miss,
    };
    if let Some(k) = keep {
        k.x_info = sent.x;
        k.y_info = y;
    }
    Ok((record(outcome, trained_mu_t, Some(decoder_mu_t)), states))
}

/// Checks that the information decoder ran with the trained count.
pub fn audit_trial(index: u64, r: &TrialRecord) -> Result<()> {
    match r.decoder_mu_t {
        Some(used) if Some(used) != r.trained_mu_t => Err(Error::Audit(format!(
            "trial {index}: decoder used muT = {used}, training delivered {:?}",
            r.trained_mu_t
        ))),
        _ => Ok(()),
    }
}

fn exact_state_tail(law: &RandomStateLaw, seconds: f64, threshold: f64) -> Option<f64> {
    let rate = match *law {
        RandomStateLaw::None => 0.0,
        RandomStateLaw::HomogeneousPoisson { rate } => rate,
        RandomStateLaw::Bursty { .. } => return None,
    };
    Some(poisson_upper_tail(rate * seconds, ceil_count(threshold)))
}

#[doc(hidden)]
pub fn run_experiment_wired(cfg: &ExperimentConfig, wiring: MuWiring) -> Result<ExperimentResult> {
    let start = Instant::now();
    let plan = cfg.plan()?;
    let records = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial_wired(cfg, &plan, i, wiring))
        .collect::<Result<Vec<_>>>()?;

    let mut counts = OutcomeCounts::default();
    for (i, r) in records.iter().enumerate() {
        audit_trial(i as u64, r)?;
        counts.add(r.outcome);
    }

    let decomposition = match (cfg.adversary, plan.state_threshold) {
        (StateModel::Random(law), Some(threshold)) => {
            let (mut lt, mut le, mut st, mut se) = (0, 0, 0, 0);
            let large = ceil_count(threshold);
            for r in &records {
                let err = r.outcome.is_error() as u64;
                if r.state_counts.unwrap_or(0) >= large {
                    lt += 1;
                    le += err;
                } else {
                    st += 1;
                    se += err;
                }
            }
            let seconds = (plan.n_train + plan.n_info) as f64 * cfg.params.slot;
            Some(Decomposition {
                threshold,
                large_state_trials: lt,
                large_state_errors: le,
                small_state_trials: st,
                small_state_errors: se,
                tail: wilson(lt, cfg.trials),
                exact_tail: exact_state_tail(&law, seconds, threshold),
                conditional_error: wilson(se, st),
            })
        }
        _ => None,
    };

    Ok(ExperimentResult {
        schema: RESULT_SCHEMA,
        fingerprint: fingerprint(),
        config: *cfg,
        plan,
        error_rate: wilson(counts.errors(), counts.total()),
        counts,
        decomposition,
        wall_time: start.elapsed(),
    })
}

/// Full-block Monte Carlo run against an adversarial state strategy.
pub fn run_adversarial_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if !matches!(cfg.adversary, StateModel::Adversarial(_)) {
        return Err(Error::Config("adversarial experiment needs an adversary strategy".into()));
    }
    run_experiment_wired(cfg, MuWiring::Trained)
}

/// Full-block Monte Carlo run against random states, with the split of the
/// errors at the spurious-count threshold.
pub fn run_random_state_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if !matches!(cfg.adversary, StateModel::Random(_)) {
        return Err(Error::Config("random-state experiment needs a state law".into()));
    }
    run_experiment_wired(cfg, MuWiring::Trained)
}

/// Runs whichever experiment the state model of `cfg` calls for.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_wired(cfg, MuWiring::Trained)
}
