//! Causal state information through Shannon strategies.
//!
//! With i.i.d. states `P[s=1] = q = μΔ`, a causal encoder picks a strategy
//! `u: {0,1} → {0,1}` per slot and the channel seen by the strategies is
//! `P(y|u) = Σ_s P_S(s)·W(y|u(s), s)`. A stuck slot ignores the input, so
//! `u(1)` never matters and every strategy acts like the plain input `u(0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infomath::{blahut_arimoto, CapacityResult, DmcLaw, RateUnit};
use crate::params::{ChannelParams, LawMode, SlotLaw};

/// Tolerance used for both capacity computations, in bits per slot.
pub const CAUSAL_TOLERANCE: f64 = 1e-9;

/// Deterministic strategy `(u(0), u(1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Strategy {
    pub on_free: bool,
    pub on_stuck: bool,
}

impl Strategy {
    /// Strategies in the order `00, 01, 10, 11` of `(u(0), u(1))`.
    pub const ALL: [Strategy; 4] = [
        Strategy { on_free: false, on_stuck: false },
        Strategy { on_free: false, on_stuck: true },
        Strategy { on_free: true, on_stuck: false },
        Strategy { on_free: true, on_stuck: true },
    ];

    pub fn apply(self, stuck: bool) -> bool {
        if stuck {
            self.on_stuck
        } else {
            self.on_free
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyChannel {
    pub strategies: [Strategy; 4],
    /// 4×2 table `P(y|u)`, rows in [`Strategy::ALL`] order.
    pub law: DmcLaw,
    /// `q = P[s = 1]`.
    pub state_prob: f64,
}

fn state_prob(params: &ChannelParams, mu: f64) -> Result<f64> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParams(format!("mu must be non-negative, got {mu}")));
    }
    let q = mu * params.slot;
    if q > 1.0 {
        return Err(Error::InvalidParams(format!("mu*delta = {q} is not a probability")));
    }
    Ok(q)
}

fn slot_law(params: &ChannelParams) -> Result<SlotLaw> {
    params.validate()?;
    Ok(params.slot_law(LawMode::Linearized))
}

/// Strategy channel for a state probability given directly.
pub fn strategy_channel_for(law: SlotLaw, q: f64) -> Result<StrategyChannel> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParams(format!("state probability {q} outside [0,1]")));
    }
    let rows = Strategy::ALL
        .iter()
        .map(|u| {
            let one: f64 = [(false, 1.0 - q), (true, q)]
                .iter()
                .map(|&(s, ps)| ps * law.prob_one(u.apply(s), s))
                .sum();
            vec![1.0 - one, one]
        })
        .collect();
    Ok(StrategyChannel {
        strategies: Strategy::ALL,
        law: DmcLaw::new(rows)?,
        state_prob: q,
    })
}

/// `P(y|u)` for states of intensity `mu` counts per second.
pub fn build_strategy_channel(params: &ChannelParams, mu: f64) -> Result<StrategyChannel> {
    strategy_channel_for(slot_law(params)?, state_prob(params, mu)?)
}

/// Channel `P(1|x) = (1−q)·W(1|x,0) + q` seen by an encoder without state information.
pub fn no_csi_channel_for(law: SlotLaw, q: f64) -> Result<DmcLaw> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParams(format!("state probability {q} outside [0,1]")));
    }
    DmcLaw::binary((1.0 - q) * law.off + q, (1.0 - q) * law.on + q)
}

/// `P_X(x) = Σ_{u: u(0)=x} P_U(u)` for a distribution over [`Strategy::ALL`].
pub fn strategy_marginalize(p_u: &[f64; 4]) -> [f64; 2] {
    let mut p_x = [0.0; 2];
    for (u, &w) in Strategy::ALL.iter().zip(p_u) {
        p_x[u.on_free as usize] += w;
    }
    p_x
}

/// Capacity with causal state information, `sup_{P_U} I(U;Y)`, in bits per slot.
pub fn causal_capacity(params: &ChannelParams, mu: f64) -> Result<CapacityResult> {
    let ch = build_strategy_channel(params, mu)?;
    let mut res = blahut_arimoto(&ch.law, CAUSAL_TOLERANCE)?;
    let dist: [f64; 4] = res.input_distribution.clone().try_into().expect("four strategies");
    res.p_star = strategy_marginalize(&dist)[1];
    res.unit = RateUnit::BitsPerSlot;
    Ok(res)
}

/// Capacity without state information, `sup_{P_X} I(X;Y)`, in bits per slot.
pub fn no_csi_capacity(params: &ChannelParams, mu: f64) -> Result<CapacityResult> {
    let law = no_csi_channel_for(slot_law(params)?, state_prob(params, mu)?)?;
    let mut res = blahut_arimoto(&law, CAUSAL_TOLERANCE)?;
    res.unit = RateUnit::BitsPerSlot;
    Ok(res)
}
