//! Channel and protocol constants shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest allowed value of `A·Δ`, `λ·Δ` and `ν·Δ`.
///
/// The slot model is only meaningful when a slot rarely sees more than one
/// count; the boundary value itself is accepted.
pub const SMALL_SLOT_LIMIT: f64 = 0.1;

/// Scalar constants of the discretized channel and of the two-phase code.
///
/// Intensities are in counts per second, durations in seconds. The serialized
/// names follow the usual notation (`A`, `lambda`, `delta`, ...) so that config
/// files read naturally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    /// Peak input intensity `A`.
    #[serde(rename = "A")]
    pub peak: f64,
    /// Dark-current intensity `λ`.
    #[serde(rename = "lambda")]
    pub dark: f64,
    /// Slot width `Δ`.
    #[serde(rename = "delta")]
    pub slot: f64,
    /// Adversary budget `ν`: average spurious counts per second over a block.
    #[serde(rename = "nu")]
    pub budget_rate: f64,
    /// Training-phase length as a fraction `α` of the information phase.
    #[serde(rename = "alpha")]
    pub training_overhead: f64,
    /// Threshold slack `ε` used by the encoder and the decoder.
    #[serde(rename = "eps")]
    pub slack: f64,
    /// Ones-density `p` of the random codebook.
    #[serde(rename = "p")]
    pub duty_cycle: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            peak: 1.0,
            dark: 0.1,
            slot: 1e-3,
            budget_rate: 0.05,
            training_overhead: 0.1,
            slack: 0.1,
            duty_cycle: 0.4,
        }
    }
}

impl ChannelParams {
    /// Checks every invariant, including the small-slot regime.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        let finite = [
            self.peak,
            self.dark,
            self.slot,
            self.budget_rate,
            self.training_overhead,
            self.slack,
            self.duty_cycle,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return bad("all parameters must be finite".into());
        }
        if self.peak <= 0.0 {
            return bad(format!("A must be positive, got {}", self.peak));
        }
        if self.dark < 0.0 {
            return bad(format!("lambda must be non-negative, got {}", self.dark));
        }
        if self.slot <= 0.0 {
            return bad(format!("delta must be positive, got {}", self.slot));
        }
        if self.budget_rate < 0.0 {
            return bad(format!("nu must be non-negative, got {}", self.budget_rate));
        }
        if self.training_overhead <= 0.0 {
            return bad(format!(
                "alpha must be positive, got {}",
                self.training_overhead
            ));
        }
        if !(self.slack > 0.0 && self.slack < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.slack));
        }
        if !(self.duty_cycle > 0.0 && self.duty_cycle < 1.0) {
            return bad(format!("p must lie in (0, 1), got {}", self.duty_cycle));
        }
        for (name, v) in [
            ("A*delta", self.peak * self.slot),
            ("lambda*delta", self.dark * self.slot),
            ("nu*delta", self.budget_rate * self.slot),
        ] {
            if v > SMALL_SLOT_LIMIT {
                return bad(format!(
                    "{name} = {v} exceeds the small-slot limit {SMALL_SLOT_LIMIT}"
                ));
            }
        }
        Ok(())
    }

    /// `p(A+λ)/(pA+λ)`: the fraction of output ones that land on codeword ones.
    pub fn ones_fraction(&self) -> f64 {
        ones_fraction(self.duty_cycle, self.peak, self.dark)
    }

    /// Per-slot output law for unstuck slots.
    pub fn slot_law(&self, mode: LawMode) -> SlotLaw {
        SlotLaw::new(self.peak, self.dark, self.slot, mode)
    }
}

pub(crate) fn ones_fraction(p: f64, peak: f64, dark: f64) -> f64 {
    let denom = p * peak + dark;
    if denom == 0.0 {
        // p = 0 and λ = 0: there are no output ones at all
        0.0
    } else {
        p * (peak + dark) / denom
    }
}

/// How the probability of "at least one count" in a slot is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawMode {
    /// `λΔ` and `(A+λ)Δ`, the first-order law used throughout the analysis.
    #[default]
    Linearized,
    /// `1 − exp(−intensity·Δ)`, the exact Poisson slot probability.
    Exact,
}

impl std::str::FromStr for LawMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linearized" => Ok(LawMode::Linearized),
            "exact" => Ok(LawMode::Exact),
            other => Err(Error::Config(format!("unknown law mode `{other}`"))),
        }
    }
}

/// `W(1|x, s=0)` for the two input symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotLaw {
    /// `W(1|0)`: a count from dark current alone.
    pub off: f64,
    /// `W(1|1)`: a count with the input at peak intensity.
    pub on: f64,
}

impl SlotLaw {
    pub fn new(peak: f64, dark: f64, slot: f64, mode: LawMode) -> SlotLaw {
        let prob = |intensity: f64| match mode {
            LawMode::Linearized => (intensity * slot).min(1.0),
            LawMode::Exact => -(-intensity * slot).exp_m1(),
        };
        SlotLaw {
            off: prob(dark),
            on: prob(peak + dark),
        }
    }

    /// `W(1|x, s)`.
    pub fn prob_one(&self, input: bool, stuck: bool) -> f64 {
        if stuck {
            1.0
        } else if input {
            self.on
        } else {
            self.off
        }
    }
}
