//! Scalar information-theoretic primitives.
//!
//! Everything is computed in nats internally and converted to bits on the way
//! out. `0·log 0` is taken to be `0` throughout.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ones_fraction, ChannelParams, LawMode};

/// Iteration cap for [`blahut_arimoto`].
pub const BA_MAX_ITERATIONS: u64 = 1_000_000;

const GRID_STEP: f64 = 1e-3;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Unit tag carried by every rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateUnit {
    BitsPerSecond,
    BitsPerSlot,
    BitsPerChannelUse,
}

impl RateUnit {
    pub fn label(self) -> &'static str {
        match self {
            RateUnit::BitsPerSecond => "bits/sec",
            RateUnit::BitsPerSlot => "bits/slot",
            RateUnit::BitsPerChannelUse => "bits/use",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub capacity: f64,
    pub unit: RateUnit,
    /// Optimizing duty cycle: probability of a non-idle input.
    pub p_star: f64,
    pub iterations: u64,
    /// Full optimizing input distribution (empty for the closed-form optimizer).
    pub input_distribution: Vec<f64>,
}

#[inline]
fn xlogy_ratio(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / y).ln()
    }
}

fn check_probability(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} = {v} is not a probability")))
    }
}

/// `D(Ber(q) ‖ Ber(p))` in nats.
pub fn bernoulli_kl_nats(q: f64, p: f64) -> Result<f64> {
    check_probability("q", q)?;
    check_probability("p", p)?;
    if q == p {
        return Ok(0.0);
    }
    if (p == 0.0 && q > 0.0) || (p == 1.0 && q < 1.0) {
        return Err(Error::InfiniteDivergence { q, p });
    }
    let d = xlogy_ratio(q, p) + xlogy_ratio(1.0 - q, 1.0 - p);
    Ok(d.max(0.0))
}

/// `D(Ber(q) ‖ Ber(p))` in bits.
pub fn bernoulli_kl(q: f64, p: f64) -> Result<f64> {
    Ok(bernoulli_kl_nats(q, p)? / LN_2)
}

fn rate_nats(p: f64, peak: f64, dark: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let q = ones_fraction(p, peak, dark).clamp(0.0, 1.0);
    // p ∈ (0,1) so the divergence is finite
    (p * peak + dark) * bernoulli_kl_nats(q, p).unwrap_or(0.0)
}

/// `(pA+λ)·D(Ber(p(A+λ)/(pA+λ)) ‖ Ber(p))` in bits per second.
///
/// Returns the endpoint limit `0` outside `(0, 1)`.
pub fn achievable_rate(p: f64, peak: f64, dark: f64) -> f64 {
    rate_nats(p, peak, dark) / LN_2
}

/// Capacity `C(A, λ)` of the peak-limited Poisson channel in bits per second.
///
/// Maximizes [`achievable_rate`] over the duty cycle with a coarse grid scan
/// followed by golden-section refinement around the best grid point.
pub fn capacity_poisson(peak: f64, dark: f64) -> Result<CapacityResult> {
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::InvalidParams(format!("A must be positive, got {peak}")));
    }
    if !(dark >= 0.0 && dark.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "lambda must be non-negative, got {dark}"
        )));
    }
    let f = |p: f64| rate_nats(p, peak, dark);

    let steps = (1.0 / GRID_STEP).round() as usize;
    let (best_i, _) = (1..steps)
        .map(|i| (i, f(i as f64 * GRID_STEP)))
        .fold((1, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });

    let mut lo = (best_i - 1) as f64 * GRID_STEP;
    let mut hi = (best_i + 1) as f64 * GRID_STEP;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut iterations = 0;
    while hi - lo > 1e-12 && iterations < 200 {
        iterations += 1;
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let (p_star, best) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Ok(CapacityResult {
        capacity: best / LN_2,
        unit: RateUnit::BitsPerSecond,
        p_star,
        iterations,
        input_distribution: Vec::new(),
    })
}

/// Transition table `P(y|x)` of a discrete memoryless channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DmcLaw {
    rows: Vec<Vec<f64>>,
}

impl DmcLaw {
    /// Builds a law from its rows; each row must be a distribution within `1e-12`.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || width == 0 {
            return Err(Error::InvalidParams("empty channel law".into()));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidParams(format!(
                    "row {x} has {} outputs, expected {width}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidParams(format!("row {x} has an entry outside [0,1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParams(format!("row {x} sums to {sum}")));
            }
        }
        Ok(DmcLaw { rows })
    }

    /// Binary-input binary-output law with `P(1|0) = off`, `P(1|1) = on`.
    pub fn binary(off: f64, on: f64) -> Result<Self> {
        DmcLaw::new(vec![vec![1.0 - off, off], vec![1.0 - on, on]])
    }

    pub fn binary_symmetric(crossover: f64) -> Result<Self> {
        DmcLaw::binary(crossover, 1.0 - crossover)
    }

    /// Z-channel: input 0 is received perfectly, input 1 flips to 0 with `crossover`.
    pub fn z_channel(crossover: f64) -> Result<Self> {
        DmcLaw::binary(0.0, 1.0 - crossover)
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    /// Output distribution induced by `input`.
    pub fn output_distribution(&self, input: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.outputs()];
        for (row, &px) in self.rows.iter().zip(input) {
            for (o, &w) in out.iter_mut().zip(row) {
                *o += px * w;
            }
        }
        out
    }

    /// Same law with the output symbols permuted by `perm` (`y ↦ perm[y]`).
    pub fn relabel_outputs(&self, perm: &[usize]) -> Result<Self> {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut r = vec![0.0; row.len()];
                for (y, &w) in row.iter().enumerate() {
                    r[perm[y]] = w;
                }
                r
            })
            .collect();
        DmcLaw::new(rows)
    }
}

fn row_divergence_nats(row: &[f64], output: &[f64]) -> f64 {
    row.iter().zip(output).map(|(&w, &q)| xlogy_ratio(w, q)).sum()
}

/// `I(X;Y)` in bits for input distribution `input` over `law`.
pub fn mutual_information(input: &[f64], law: &DmcLaw) -> f64 {
    let out = law.output_distribution(input);
    let nats: f64 = law
        .rows
        .iter()
        .zip(input)
        .filter(|(_, &px)| px > 0.0)
        .map(|(row, &px)| px * row_divergence_nats(row, &out))
        .sum();
    nats / LN_2
}

/// Capacity of `law` in bits per channel use.
///
/// Iterates until the standard bounds `I(r) ≤ C ≤ max_x D(W(·|x) ‖ rW)` are
/// closer than `tol` bits and reports the lower bound.
///
/// The update is the usual `r_x ∝ r_x·exp(β·D_x)` with an adaptive exponent:
/// `β` doubles while the over-relaxed step keeps increasing `I(r)` and falls
/// back to the plain `β = 1` step (which never decreases `I`) otherwise. Nearly
/// useless channels, where plain iterations crawl, converge in a few hundred
/// steps this way.
pub fn blahut_arimoto(law: &DmcLaw, tol: f64) -> Result<CapacityResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    let n = law.inputs();
    let tol_nats = tol * LN_2;
    let mut r = vec![1.0 / n as f64; n];
    let mut d = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut beta = 1.0f64;
    let mut gap = f64::INFINITY;

    let step = |r: &[f64], d: &[f64], upper: f64, beta: f64, out: &mut [f64]| {
        let mut z = 0.0;
        for ((o, &rx), &dx) in out.iter_mut().zip(r).zip(d) {
            // shifted by the max exponent to stay in range
            *o = rx * (beta * (dx - upper)).exp();
            z += *o;
        }
        out.iter_mut().for_each(|o| *o /= z);
    };

    for it in 0..BA_MAX_ITERATIONS {
        let out = law.output_distribution(&r);
        for (dx, row) in d.iter_mut().zip(&law.rows) {
            *dx = row_divergence_nats(row, &out);
        }
        let lower: f64 = r.iter().zip(&d).map(|(a, b)| a * b).sum();
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        gap = upper - lower;
        if gap < tol_nats {
            return Ok(CapacityResult {
                capacity: lower.max(0.0) / LN_2,
                unit: RateUnit::BitsPerChannelUse,
                p_star: 1.0 - r[0],
                iterations: it,
                input_distribution: r,
            });
        }
        if beta > 1.0 {
            step(&r, &d, upper, beta, &mut trial);
            if mutual_information(&trial, law) * LN_2 > lower {
                std::mem::swap(&mut r, &mut trial);
                beta = (beta * 2.0).min(1e12);
                continue;
            }
        }
        step(&r, &d, upper, 1.0, &mut trial);
        std::mem::swap(&mut r, &mut trial);
        beta = 2.0;
    }
    Err(Error::NoConvergence {
        iterations: BA_MAX_ITERATIONS,
        gap: gap / LN_2,
    })
}

/// Capacity `C_Δ(A, λ)` of the slotted channel, in bits per slot, under the
/// linearized law `W(1|0) = λΔ`, `W(1|1) = (A+λ)Δ`.
pub fn discrete_capacity(params: &ChannelParams) -> Result<CapacityResult> {
    discrete_capacity_with(params, LawMode::Linearized)
}

/// [`discrete_capacity`] under an explicit slot law.
pub fn discrete_capacity_with(params: &ChannelParams, mode: LawMode) -> Result<CapacityResult> {
    params.validate()?;
    let law = params.slot_law(mode);
    let dmc = DmcLaw::binary(law.off, law.on)?;
    // relative accuracy ~1e-9 at every slot width
    let tol = (1e-9 * law.on).max(1e-300);
    let mut res = blahut_arimoto(&dmc, tol)?;
    res.unit = RateUnit::BitsPerSlot;
    Ok(res)
}

/// Exact binomial tail next to its Sanov exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SanovTail {
    /// `P[Binomial(n, p) ≥ ⌈qn⌉]`.
    pub exact_tail: f64,
    /// `log2` of the tail; stays finite when `exact_tail` underflows.
    pub log2_tail: f64,
    /// `n·D(Ber(q) ‖ Ber(p))` in bits.
    pub exponent: f64,
}

impl SanovTail {
    /// `exact_tail ≤ (n+1)·2^(−exponent)`, checked in the log domain.
    pub fn satisfies_bound(&self, n: u64) -> bool {
        self.log2_tail <= ((n + 1) as f64).log2() - self.exponent + 1e-9
    }
}

/// `⌈x⌉` that does not round an exact integer up because of representation error.
pub(crate) fn ceil_count(x: f64) -> u64 {
    if x <= 0.0 {
        return 0;
    }
    let c = x.ceil();
    if c - x > 1.0 - 1e-9 * x.max(1.0) {
        (c - 1.0) as u64
    } else {
        c as u64
    }
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Natural log of `P[Binomial(n, p) ≥ k]`, summed term by term in the log domain.
pub fn binomial_upper_tail_ln(n: u64, k: u64, p: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if k > n || p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    // ln C(n, k) accumulated as a product of ratios
    let ln_choose_k: f64 = (1..=k).map(|i| (((n - k + i) as f64) / i as f64).ln()).sum();
    let first = ln_choose_k + k as f64 * ln_p + (n - k) as f64 * ln_q;
    let mut terms = Vec::with_capacity((n - k + 1) as usize);
    let mut cur = first;
    terms.push(cur);
    let odds = ln_p - ln_q;
    for j in k..n {
        cur += (((n - j) as f64) / ((j + 1) as f64)).ln() + odds;
        terms.push(cur);
    }
    log_sum_exp(terms.iter().copied()).min(0.0)
}

/// Natural log of `P[Binomial(n, p) ≤ k]`.
pub fn binomial_lower_tail_ln(n: u64, k: u64, p: f64) -> f64 {
    if k >= n {
        return 0.0;
    }
    // P[Bin(n,p) ≤ k] = P[Bin(n,1−p) ≥ n−k]
    binomial_upper_tail_ln(n, n - k, 1.0 - p)
}

/// `P[Poisson(mean) ≥ k]`.
pub fn poisson_upper_tail(mean: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if mean <= 0.0 {
        return 0.0;
    }
    // ln of the pmf at k, then sum upward until terms are negligible
    let ln_fact_k: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    let mut cur = k as f64 * mean.ln() - mean - ln_fact_k;
    let mut terms = vec![cur];
    let mut j = k;
    loop {
        j += 1;
        cur += mean.ln() - (j as f64).ln();
        terms.push(cur);
        if (j as f64) > mean && cur < terms[0] - 60.0 {
            break;
        }
    }
    log_sum_exp(terms.iter().copied()).exp().min(1.0)
}

/// Exact tail `P[Binomial(n,p) ≥ ⌈qn⌉]` and the exponent `n·D(Ber(q)‖Ber(p))`.
pub fn sanov_binomial_exponent(n: u64, q: f64, p: f64) -> Result<SanovTail> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParams(format!("p must lie in (0,1), got {p}")));
    }
    if !(q > p && q <= 1.0) {
        return Err(Error::InvalidParams(format!("q must lie in (p, 1], got {q}")));
    }
    let k = ceil_count(q * n as f64).min(n);
    let ln_tail = binomial_upper_tail_ln(n, k, p);
    if !ln_tail.is_finite() {
        return Err(Error::PrecisionLoss { n, p, q });
    }
    Ok(SanovTail {
        exact_tail: ln_tail.exp(),
        log2_tail: ln_tail / LN_2,
        exponent: n as f64 * bernoulli_kl(q, p)?,
    })
}
