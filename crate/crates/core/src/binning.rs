//! Information-phase random binning code.
//!
//! The codebook holds `2^(m_bits + k_bits)` i.i.d. Bernoulli(`p`) codewords
//! `x(m, k)`. None of them is ever stored: bit `j` of codeword `(m, k)` is a
//! keyed pseudorandom function of `(seed, m, k, j)`, so the encoder and the
//! decoder only evaluate the positions they actually look at (the stuck slots
//! and the output ones, respectively).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{SlotSeq, Track};
use crate::error::{Error, Result};
use crate::infomath::ceil_count;
use crate::params::{ones_fraction, ChannelParams};
use crate::rng::{BernoulliThreshold, CodewordPrf};

/// Seed-defined random binning codebook.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodebookSpec {
    /// Ones density of every codeword symbol.
    pub p: f64,
    /// Slots in the information phase.
    pub n: usize,
    /// Message bits `RT`.
    pub m_bits: u32,
    /// Bin bits `R'T`.
    pub k_bits: u32,
    pub seed: u64,
}

impl CodebookSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParams(format!("codeword density {} is not a probability", self.p)));
        }
        if self.n == 0 {
            return Err(Error::InvalidParams("codewords need at least one slot".into()));
        }
        if self.m_bits + self.k_bits > 62 {
            return Err(Error::InvalidParams(format!(
                "{} + {} codebook bits are not addressable",
                self.m_bits, self.k_bits
            )));
        }
        Ok(())
    }

    pub fn messages(&self) -> u64 {
        1u64 << self.m_bits
    }

    pub fn bins(&self) -> u64 {
        1u64 << self.k_bits
    }

    pub fn codewords(&self) -> u64 {
        1u64 << (self.m_bits + self.k_bits)
    }

    fn index(&self, m: u64, k: u64) -> u64 {
        (m << self.k_bits) | k
    }

    fn check(&self, m: u64, k: u64) -> Result<()> {
        if m >= self.messages() {
            return Err(Error::IndexOutOfRange {
                what: "message",
                value: m,
                limit: self.messages(),
            });
        }
        if k >= self.bins() {
            return Err(Error::IndexOutOfRange {
                what: "bin",
                value: k,
                limit: self.bins(),
            });
        }
        Ok(())
    }

    fn sampler(&self) -> Sampler {
        Sampler {
            prf: CodewordPrf::new(self.seed),
            threshold: BernoulliThreshold::new(self.p),
        }
    }

    /// Materializes codeword `x(m, k)` as an input track.
    pub fn codeword(&self, m: u64, k: u64) -> Result<SlotSeq> {
        self.validate()?;
        self.check(m, k)?;
        let s = self.sampler();
        let key = s.prf.codeword_key(self.index(m, k));
        let mut x = SlotSeq::zeros(Track::Input, self.n);
        for j in 0..self.n {
            if s.bit(key, j) {
                x.set(j, true);
            }
        }
        Ok(x)
    }
}

#[derive(Clone, Copy)]
struct Sampler {
    prf: CodewordPrf,
    threshold: BernoulliThreshold,
}

impl Sampler {
    #[inline]
    fn bit(&self, key: u64, j: usize) -> bool {
        self.threshold.sample(CodewordPrf::word(key, j as u64))
    }

    /// `true` iff at least `need` of `positions` are ones in the codeword.
    #[inline]
    fn reaches(&self, key: u64, positions: &[usize], need: u64) -> bool {
        if need == 0 {
            return true;
        }
        let mut hits = 0u64;
        let mut left = positions.len() as u64;
        for &j in positions {
            left -= 1;
            if self.bit(key, j) {
                hits += 1;
                if hits >= need {
                    return true;
                }
            }
            if hits + left < need {
                return false;
            }
        }
        false
    }
}

/// Bit `j` of codeword `x(m, k)`.
pub fn codeword_bit(spec: &CodebookSpec, m: u64, k: u64, j: usize) -> Result<bool> {
    spec.check(m, k)?;
    if j >= spec.n {
        return Err(Error::IndexOutOfRange {
            what: "slot",
            value: j as u64,
            limit: spec.n as u64,
        });
    }
    let s = spec.sampler();
    Ok(s.bit(s.prf.codeword_key(spec.index(m, k)), j))
}

/// Number of slots where both sequences are one.
pub fn overlap(a: &SlotSeq, b: &SlotSeq) -> Result<usize> {
    a.and_count(b)
}

/// `⌈(1−ε)·p(A+λ)/(pA+λ)·μT⌉`: codeword ones the encoder needs on the stuck slots.
pub fn encoder_threshold(mu_t: u64, p: f64, peak: f64, dark: f64, eps: f64) -> u64 {
    ceil_count((1.0 - eps) * ones_fraction(p, peak, dark) * mu_t as f64)
}

/// `⌈(1−ε)·p(A+λ)/(pA+λ)·(pA+λ+μ)T⌉` with `T = nΔ` and `μ = μT/T`: joint
/// ones the decoder requires between a codeword and the output.
pub fn decoder_threshold(
    mu_t: u64,
    n: usize,
    p: f64,
    peak: f64,
    dark: f64,
    slot: f64,
    eps: f64,
) -> u64 {
    let t = n as f64 * slot;
    let expected_ones = (p * peak + dark) * t + mu_t as f64;
    ceil_count((1.0 - eps) * ones_fraction(p, peak, dark) * expected_ones)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodeOutcome {
    pub x: SlotSeq,
    /// Chosen bin, `None` when no bin met the threshold (`x` is then all zero).
    pub k: Option<u64>,
}

/// Sends message `m` given the full state track `s` of the information phase.
///
/// Scans the bins of `m` in order and picks the first codeword with at least
/// [`encoder_threshold`] ones on the stuck slots of `s`.
pub fn encode(m: u64, s: &SlotSeq, spec: &CodebookSpec, params: &ChannelParams) -> Result<EncodeOutcome> {
    spec.validate()?;
    spec.check(m, 0)?;
    if s.len() != spec.n {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: spec.n,
        });
    }
    let stuck = s.ones_positions();
    let need = encoder_threshold(stuck.len() as u64, spec.p, params.peak, params.dark, params.slack);
    let sampler = spec.sampler();
    for k in 0..spec.bins() {
        let key = sampler.prf.codeword_key(spec.index(m, k));
        if sampler.reaches(key, &stuck, need) {
            return Ok(EncodeOutcome {
                x: spec.codeword(m, k)?,
                k: Some(k),
            });
        }
    }
    Ok(EncodeOutcome {
        x: SlotSeq::zeros(Track::Input, spec.n),
        k: None,
    })
}

/// Why the decoder declared an erasure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Erasure {
    /// No codeword met the threshold.
    NoCandidate,
    /// Codewords of two distinct messages met the threshold; the two lowest
    /// such `(m, k)` are reported.
    Ambiguous { first: (u64, u64), second: (u64, u64) },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeOutcome {
    Decoded { m: u64, k: u64 },
    Erasure(Erasure),
}

impl DecodeOutcome {
    pub fn message(&self) -> Option<u64> {
        match self {
            DecodeOutcome::Decoded { m, .. } => Some(*m),
            DecodeOutcome::Erasure(_) => None,
        }
    }
}

/// Up to two qualifying messages with the lowest indices, each with its lowest bin.
#[derive(Debug, Clone, Copy, Default)]
struct Qualifiers {
    found: [Option<(u64, u64)>; 2],
}

impl Qualifiers {
    fn push(&mut self, q: (u64, u64)) {
        match self.found {
            [None, _] => self.found[0] = Some(q),
            [Some(a), None] => {
                self.found = if q < a { [Some(q), Some(a)] } else { [Some(a), Some(q)] }
            }
            [Some(a), Some(b)] => {
                if q < a {
                    self.found = [Some(q), Some(a)];
                } else if q < b {
                    self.found = [Some(a), Some(q)];
                }
            }
        }
    }

    fn full(&self) -> bool {
        self.found[1].is_some()
    }

    fn merge(mut self, other: Qualifiers) -> Qualifiers {
        for q in other.found.into_iter().flatten() {
            self.push(q);
        }
        self
    }

    fn outcome(&self) -> DecodeOutcome {
        match self.found {
            [None, _] => DecodeOutcome::Erasure(Erasure::NoCandidate),
            [Some((m, k)), None] => DecodeOutcome::Decoded { m, k },
            [Some(first), Some(second)] => DecodeOutcome::Erasure(Erasure::Ambiguous { first, second }),
        }
    }
}

struct DecodeScan<'a> {
    spec: &'a CodebookSpec,
    sampler: Sampler,
    ones: Vec<usize>,
    need: u64,
}

impl DecodeScan<'_> {
    fn new<'a>(y: &SlotSeq, mu_t: u64, spec: &'a CodebookSpec, params: &ChannelParams) -> Result<DecodeScan<'a>> {
        spec.validate()?;
        if y.len() != spec.n {
            return Err(Error::LengthMismatch {
                left: y.len(),
                right: spec.n,
            });
        }
        let need = decoder_threshold(mu_t, spec.n, spec.p, params.peak, params.dark, params.slot, params.slack);
        Ok(DecodeScan {
            spec,
            sampler: spec.sampler(),
            ones: y.ones_positions(),
            need,
        })
    }

    fn scan(&self, messages: std::ops::Range<u64>) -> Qualifiers {
        let mut q = Qualifiers::default();
        if self.need > self.ones.len() as u64 {
            return q;
        }
        for m in messages {
            for k in 0..self.spec.bins() {
                let key = self.sampler.prf.codeword_key(self.spec.index(m, k));
                if self.sampler.reaches(key, &self.ones, self.need) {
                    q.push((m, k));
                    break;
                }
            }
            if q.full() {
                break;
            }
        }
        q
    }
}

/// Exhaustive threshold decoder.
///
/// `mu_t` is the stuck-slot count conveyed by the training phase. Several
/// bins of one message qualifying is a success; two distinct messages
/// qualifying is an erasure.
pub fn decode(y: &SlotSeq, mu_t: u64, spec: &CodebookSpec, params: &ChannelParams) -> Result<DecodeOutcome> {
    let scan = DecodeScan::new(y, mu_t, spec, params)?;
    Ok(scan.scan(0..spec.messages()).outcome())
}

/// [`decode`] with the message range split across the rayon pool; the lowest
/// qualifying indices win, so the result equals the serial one.
pub fn decode_parallel(
    y: &SlotSeq,
    mu_t: u64,
    spec: &CodebookSpec,
    params: &ChannelParams,
) -> Result<DecodeOutcome> {
    let scan = DecodeScan::new(y, mu_t, spec, params)?;
    let messages = spec.messages();
    let chunk = (messages / (4 * rayon::current_num_threads() as u64)).max(1);
    let q = (0..messages.div_ceil(chunk))
        .into_par_iter()
        .map(|c| scan.scan(c * chunk..((c + 1) * chunk).min(messages)))
        .reduce(Qualifiers::default, Qualifiers::merge);
    Ok(q.outcome())
}
