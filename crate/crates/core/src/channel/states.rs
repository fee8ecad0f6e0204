use rand::seq::index::sample;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{SlotSeq, Track};
use crate::error::{Error, Result};
use crate::params::ChannelParams;
use crate::rng::{stream_rng, BernoulliThreshold};

/// `⌊x⌋` that does not round an exact integer down because of representation error.
pub(crate) fn floor_count(x: f64) -> usize {
    if x <= 0.0 {
        0
    } else {
        (x + 1e-9 * x.max(1.0)).floor() as usize
    }
}

/// Spurious-count allowance of one block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateBudget {
    /// Average spurious counts per second.
    pub nu: f64,
    /// Block duration `(1+α)T`.
    pub block_seconds: f64,
    /// `⌊(1+α)νT⌋`: stuck slots the adversary may create in the whole block.
    pub max_stuck: usize,
    /// First slot of the information phase.
    pub info_start: usize,
}

impl StateBudget {
    /// Budget for an information phase of `t_info` seconds preceded by a
    /// training phase of `alpha·t_info` seconds.
    pub fn new(nu: f64, t_info: f64, alpha: f64) -> Self {
        let block_seconds = (1.0 + alpha) * t_info;
        StateBudget {
            nu,
            block_seconds,
            max_stuck: floor_count(nu * block_seconds),
            info_start: 0,
        }
    }

    pub fn from_params(params: &ChannelParams, t_info: f64) -> Self {
        StateBudget::new(params.budget_rate, t_info, params.training_overhead)
    }

    pub fn with_info_start(mut self, info_start: usize) -> Self {
        self.info_start = info_start;
        self
    }
}

/// Canonical placements of the adversary's stuck slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum AdversaryStrategy {
    /// Uniformly random distinct slots anywhere in the block.
    UniformRandom,
    /// The first `max_stuck` slots of the block.
    FrontLoaded,
    /// Contiguous bursts of `burst_len` slots at random aligned offsets.
    Bursty { burst_len: usize },
    /// Uniformly random distinct slots inside the information phase only.
    InfoPhaseTargeted,
}

impl AdversaryStrategy {
    /// The four strategies with a default burst length.
    pub fn all() -> [AdversaryStrategy; 4] {
        [
            AdversaryStrategy::UniformRandom,
            AdversaryStrategy::FrontLoaded,
            AdversaryStrategy::Bursty { burst_len: 4 },
            AdversaryStrategy::InfoPhaseTargeted,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            AdversaryStrategy::UniformRandom => "uniform_random",
            AdversaryStrategy::FrontLoaded => "front_loaded",
            AdversaryStrategy::Bursty { .. } => "bursty",
            AdversaryStrategy::InfoPhaseTargeted => "info_phase_targeted",
        }
    }
}

impl std::str::FromStr for AdversaryStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_random" | "uniform" => Ok(AdversaryStrategy::UniformRandom),
            "front_loaded" | "front" => Ok(AdversaryStrategy::FrontLoaded),
            "bursty" => Ok(AdversaryStrategy::Bursty { burst_len: 4 }),
            "info_phase_targeted" | "info" => Ok(AdversaryStrategy::InfoPhaseTargeted),
            other => Err(Error::Config(format!("unknown adversary strategy `{other}`"))),
        }
    }
}

/// Adversarial state track of `n` slots that spends the whole budget, or as
/// much of it as fits in the targeted region.
pub fn gen_adversarial_states(
    n: usize,
    budget: &StateBudget,
    strategy: AdversaryStrategy,
    seed: u64,
) -> SlotSeq {
    let mut rng = stream_rng(seed);
    let mut track = SlotSeq::zeros(Track::State, n);
    let info_start = budget.info_start.min(n);
    match strategy {
        AdversaryStrategy::UniformRandom => {
            let k = budget.max_stuck.min(n);
            for j in sample(&mut rng, n, k) {
                track.set(j, true);
            }
        }
        AdversaryStrategy::FrontLoaded => {
            for j in 0..budget.max_stuck.min(n) {
                track.set(j, true);
            }
        }
        AdversaryStrategy::Bursty { burst_len } => {
            let burst_len = burst_len.max(1).min(n.max(1));
            let k = budget.max_stuck.min(n);
            let blocks = n / burst_len;
            let bursts = k.div_ceil(burst_len).min(blocks);
            let mut left = k;
            let mut starts: Vec<usize> = sample(&mut rng, blocks, bursts).into_vec();
            starts.sort_unstable();
            for b in starts {
                let take = left.min(burst_len);
                for j in b * burst_len..b * burst_len + take {
                    track.set(j, true);
                }
                left -= take;
            }
            // n not a multiple of burst_len: spill what is left into the tail
            for j in blocks * burst_len..n {
                if left == 0 {
                    break;
                }
                track.set(j, true);
                left -= 1;
            }
        }
        AdversaryStrategy::InfoPhaseTargeted => {
            let region = n - info_start;
            let k = budget.max_stuck.min(region);
            for j in sample(&mut rng, region, k) {
                track.set(info_start + j, true);
            }
        }
    }
    track
}

/// Law of a random spurious-count process with `S(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RandomStateLaw {
    None,
    /// Homogeneous Poisson process of `rate` counts per second.
    HomogeneousPoisson { rate: f64 },
    /// Bursts arriving as a Poisson process of `rate` per second, each adding
    /// one count in each of `burst_len` consecutive slots.
    Bursty { rate: f64, burst_len: usize },
}

impl RandomStateLaw {
    pub fn validate(&self) -> Result<()> {
        let rate = match *self {
            RandomStateLaw::None => return Ok(()),
            RandomStateLaw::HomogeneousPoisson { rate } => rate,
            RandomStateLaw::Bursty { rate, burst_len } => {
                if burst_len == 0 {
                    return Err(Error::Config("burst length must be positive".into()));
                }
                rate
            }
        };
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::Config(format!("state rate must be finite and non-negative, got {rate}")));
        }
        Ok(())
    }

    /// Long-run mean count rate `lim sup E[S(t)]/t`, in counts per second
    /// (slot-rounding of burst lengths ignored).
    pub fn mean_rate(&self) -> f64 {
        match *self {
            RandomStateLaw::None => 0.0,
            RandomStateLaw::HomogeneousPoisson { rate } => rate,
            RandomStateLaw::Bursty { rate, burst_len } => rate * burst_len as f64,
        }
    }
}

/// A sampled state track together with the number of spurious counts behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomStates {
    pub track: SlotSeq,
    /// `S` at the end of the track (counts, not stuck slots).
    pub counts: u64,
}

/// Number of Poisson(`mean`) events, drawn by inversion; `mean` is small.
fn poisson_small<R: RngCore>(rng: &mut R, mean: f64, zero: BernoulliThreshold) -> u64 {
    let word = rng.next_u64();
    if zero.sample(word) {
        return 0;
    }
    // conditional on at least one event
    let u: f64 = rng.gen::<f64>() * (1.0 - (-mean).exp());
    let mut k = 1u64;
    let mut pmf = mean * (-mean).exp();
    let mut cum = pmf;
    while u > cum && k < 1000 {
        k += 1;
        pmf *= mean / k as f64;
        cum += pmf;
    }
    k
}

/// Samples `n` slots of the counting process; slot `j` is stuck iff the
/// process increments inside it.
pub fn sample_random_states(
    n: usize,
    law: &RandomStateLaw,
    slot: f64,
    seed: u64,
) -> Result<RandomStates> {
    law.validate()?;
    let mut rng = stream_rng(seed);
    let mut track = SlotSeq::zeros(Track::State, n);
    let mut counts = 0u64;
    match *law {
        RandomStateLaw::None => {}
        RandomStateLaw::HomogeneousPoisson { rate } => {
            let mean = rate * slot;
            let zero = BernoulliThreshold::new((-mean).exp());
            for j in 0..n {
                let c = poisson_small(&mut rng, mean, zero);
                if c > 0 {
                    track.set(j, true);
                    counts += c;
                }
            }
        }
        RandomStateLaw::Bursty { rate, burst_len } => {
            let mean = rate * slot;
            let zero = BernoulliThreshold::new((-mean).exp());
            for j in 0..n {
                let arrivals = poisson_small(&mut rng, mean, zero);
                for _ in 0..arrivals {
                    let end = (j + burst_len).min(n);
                    for k in j..end {
                        track.set(k, true);
                    }
                    counts += (end - j) as u64;
                }
            }
        }
    }
    Ok(RandomStates { track, counts })
}

/// State track of `n` slots drawn from `law` at the slot width of `params`.
pub fn gen_random_states(
    n: usize,
    law: &RandomStateLaw,
    params: &ChannelParams,
    seed: u64,
) -> Result<SlotSeq> {
    Ok(sample_random_states(n, law, params.slot, seed)?.track)
}
