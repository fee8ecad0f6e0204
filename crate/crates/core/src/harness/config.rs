use serde::{Deserialize, Serialize};

use crate::binning::encoder_threshold;
use crate::channel::{AdversaryStrategy, RandomStateLaw, StateBudget};
use crate::error::{Error, Result};
use crate::infomath::{bernoulli_kl, binomial_upper_tail_ln, capacity_poisson, discrete_capacity_with};
use crate::params::{ChannelParams, LawMode};
use crate::training::{TrainingConfig, DEFAULT_TARGET_FAILURE};

/// Largest `m_bits + k_bits` the exhaustive decoder is allowed to face.
pub const MAX_CODEWORD_BITS: u32 = 24;

/// How the number of bin bits `R'T` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum KBitsPolicy {
    /// Smallest `k` for which, at every stuck count the adversary can reach,
    /// all `2^k` bins of a message miss the encoder threshold with
    /// probability at most `target`.
    ExactTail { target: f64 },
    /// `⌈(1+margin)·μT·D(Ber((1−ε)q₀) ‖ Ber(p))⌉` at the largest stuck count.
    SanovMargin { margin: f64 },
    Fixed { bits: u32 },
}

impl Default for KBitsPolicy {
    fn default() -> Self {
        KBitsPolicy::ExactTail { target: 1e-3 }
    }
}

/// Where the state track of a trial comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateModel {
    Adversarial(AdversaryStrategy),
    Random(RandomStateLaw),
}

impl Default for StateModel {
    fn default() -> Self {
        StateModel::Adversarial(AdversaryStrategy::UniformRandom)
    }
}

/// One full-block Monte Carlo experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub params: ChannelParams,
    /// Information-phase duration `T` in seconds.
    #[serde(rename = "T")]
    pub t_seconds: f64,
    /// Message rate `R` as a fraction of `C(A, λ)`.
    pub rate_fraction: f64,
    pub k_bits: KBitsPolicy,
    pub adversary: StateModel,
    pub trials: u64,
    pub seed: u64,
    pub law_mode: LawMode,
    /// Per-block failure target used to size the training code.
    pub training_target: f64,
    pub max_codeword_bits: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            params: ChannelParams::default(),
            t_seconds: 50.0,
            rate_fraction: 0.8,
            k_bits: KBitsPolicy::default(),
            adversary: StateModel::default(),
            trials: 1000,
            seed: 0,
            law_mode: LawMode::Linearized,
            training_target: DEFAULT_TARGET_FAILURE,
            max_codeword_bits: MAX_CODEWORD_BITS,
        }
    }
}

/// Everything derived from an [`ExperimentConfig`] before any trial runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockPlan {
    pub n_train: usize,
    pub n_info: usize,
    pub m_bits: u32,
    pub k_bits: u32,
    /// `C(A, λ)` in bits per second.
    pub capacity: f64,
    /// `C_Δ/Δ` under the configured law, in bits per second.
    pub discrete_rate: f64,
    /// `m_bits / T`.
    pub rate: f64,
    /// `R / (1+α)`, the rate over the whole block.
    pub effective_rate: f64,
    pub budget: StateBudget,
    pub training: TrainingConfig,
    /// Spurious-count threshold `2ζ(1+α)T/ε` splitting the random-state
    /// error decomposition; absent for adversarial states.
    pub state_threshold: Option<f64>,
}

impl BlockPlan {
    pub fn codewords(&self) -> u64 {
        1u64 << (self.m_bits + self.k_bits)
    }
}

fn slots(seconds: f64, slot: f64) -> usize {
    (seconds / slot).round() as usize
}

impl ExperimentConfig {
    /// Validates the configuration and derives the block layout.
    pub fn plan(&self) -> Result<BlockPlan> {
        let p = &self.params;
        p.validate()?;
        if !(self.t_seconds > 0.0 && self.t_seconds.is_finite()) {
            return Err(Error::Config(format!("T must be positive, got {}", self.t_seconds)));
        }
        if !(self.rate_fraction > 0.0 && self.rate_fraction.is_finite()) {
            return Err(Error::Config(format!(
                "rate_fraction must be positive, got {}",
                self.rate_fraction
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.training_target > 0.0 && self.training_target < 1.0) {
            return Err(Error::Config(format!(
                "training_target must lie in (0,1), got {}",
                self.training_target
            )));
        }
        if self.max_codeword_bits > 62 {
            return Err(Error::Config("max_codeword_bits must be at most 62".into()));
        }

        let capacity = capacity_poisson(p.peak, p.dark)?.capacity;
        let discrete_rate = discrete_capacity_with(p, self.law_mode)?.capacity / p.slot;
        let m_raw = (self.rate_fraction * capacity * self.t_seconds + 1e-9).floor();
        if m_raw < 1.0 {
            return Err(Error::Config(format!(
                "rate_fraction·C·T = {:.4} carries no message bit",
                self.rate_fraction * capacity * self.t_seconds
            )));
        }
        if m_raw > self.max_codeword_bits as f64 {
            return Err(Error::Config(format!(
                "{m_raw} message bits exceed the cap of {} codeword bits",
                self.max_codeword_bits
            )));
        }
        let m_bits = m_raw as u32;

        let n_info = slots(self.t_seconds, p.slot);
        let n_train = slots(p.training_overhead * self.t_seconds, p.slot);
        if n_info == 0 {
            return Err(Error::Config("information phase is shorter than one slot".into()));
        }

        // random states are budgeted at 2ζ/ε, which bounds the tail by ε
        let (nu, state_threshold) = match self.adversary {
            StateModel::Adversarial(_) => (p.budget_rate, None),
            StateModel::Random(law) => {
                law.validate()?;
                let nu = 2.0 * law.mean_rate() / p.slack;
                let block = (1.0 + p.training_overhead) * self.t_seconds;
                (nu, Some(nu * block))
            }
        };
        let budget = StateBudget::new(nu, self.t_seconds, p.training_overhead).with_info_start(n_train);
        let max_stuck = budget.max_stuck as u64;
        let training = TrainingConfig::for_phase(p, n_train, max_stuck, max_stuck, self.training_target)?;

        let k_bits = self.k_bits_for(max_stuck.min(n_info as u64))?;
        if m_bits + k_bits > self.max_codeword_bits {
            return Err(Error::Config(format!(
                "{m_bits} message bits plus {k_bits} bin bits exceed the cap of {}",
                self.max_codeword_bits
            )));
        }

        let rate = m_bits as f64 / self.t_seconds;
        Ok(BlockPlan {
            n_train,
            n_info,
            m_bits,
            k_bits,
            capacity,
            discrete_rate,
            rate,
            effective_rate: rate / (1.0 + p.training_overhead),
            budget,
            training,
            state_threshold,
        })
    }

    fn k_bits_for(&self, max_stuck: u64) -> Result<u32> {
        let p = &self.params;
        match self.k_bits {
            KBitsPolicy::Fixed { bits } => Ok(bits),
            KBitsPolicy::SanovMargin { margin } => {
                if !(margin >= 0.0 && margin.is_finite()) {
                    return Err(Error::Config(format!("margin must be non-negative, got {margin}")));
                }
                let q = (1.0 - p.slack) * p.ones_fraction();
                let d = bernoulli_kl(q.min(1.0), p.duty_cycle)?;
                Ok(((1.0 + margin) * max_stuck as f64 * d).ceil() as u32)
            }
            KBitsPolicy::ExactTail { target } => {
                if !(target > 0.0 && target < 1.0) {
                    return Err(Error::Config(format!("k_bits target must lie in (0,1), got {target}")));
                }
                let mut k = 0u32;
                for mu_t in 1..=max_stuck {
                    let need = encoder_threshold(mu_t, p.duty_cycle, p.peak, p.dark, p.slack);
                    let single = binomial_upper_tail_ln(mu_t, need, p.duty_cycle).exp();
                    if single >= 1.0 {
                        continue;
                    }
                    // (1 − single)^(2^k) ≤ target
                    let bins = target.ln() / (-single).ln_1p();
                    let need_k = bins.log2().ceil().max(0.0);
                    if need_k > 62.0 {
                        return Err(Error::Config(format!(
                            "encoder needs more than 2^62 bins at {mu_t} stuck slots"
                        )));
                    }
                    k = k.max(need_k as u32);
                }
                Ok(k)
            }
        }
    }
}
