use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::experiment::{run_experiment, ExperimentResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    #[serde(rename = "T")]
    T,
    RateFraction,
    Nu,
    Delta,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::T => "T",
            SweepAxis::RateFraction => "rate_fraction",
            SweepAxis::Nu => "nu",
            SweepAxis::Delta => "delta",
        }
    }

    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &ExperimentConfig, value: f64) -> ExperimentConfig {
        let mut cfg = *base;
        match self {
            SweepAxis::T => cfg.t_seconds = value,
            SweepAxis::RateFraction => cfg.rate_fraction = value,
            SweepAxis::Nu => cfg.params.budget_rate = value,
            SweepAxis::Delta => cfg.params.slot = value,
        }
        cfg
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" | "t" => Ok(SweepAxis::T),
            "rate_fraction" | "rate" => Ok(SweepAxis::RateFraction),
            "nu" => Ok(SweepAxis::Nu),
            "delta" => Ok(SweepAxis::Delta),
            _ => Err(Error::Config(format!("unknown sweep axis `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub result: std::result::Result<ExperimentResult, String>,
}

/// Runs one experiment per value. Every point keeps the base seed, so the
/// points see common random numbers and a one-value sweep is a plain run.
/// A failing point is recorded and the sweep moves on.
pub fn sweep(base: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    Ok(values
        .iter()
        .map(|&value| SweepPoint {
            value,
            result: run_experiment(&axis.apply(base, value)).map_err(|e| e.to_string()),
        })
        .collect())
}

const CSV_HEADER: [&str; 20] = [
    "axis",
    "value",
    "status",
    "trials",
    "success",
    "encoder_failure",
    "miss",
    "false_decode",
    "training_failure",
    "error_rate",
    "ci_low",
    "ci_high",
    "m_bits",
    "k_bits",
    "n_train",
    "n_info",
    "rate",
    "capacity",
    "discrete_rate",
    "error",
];

/// Writes the sweep as one CSV table with a header row.
pub fn write_sweep_csv<W: Write>(axis: SweepAxis, points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for pt in points {
        let mut row = vec![axis.name().to_string(), pt.value.to_string()];
        match &pt.result {
            Ok(r) => {
                let c = &r.counts;
                row.push("ok".into());
                row.extend(
                    [c.total(), c.success, c.encoder_failure, c.miss, c.false_decode, c.training_failure]
                        .iter()
                        .map(u64::to_string),
                );
                row.extend(
                    [r.error_rate.value, r.error_rate.low, r.error_rate.high]
                        .iter()
                        .map(f64::to_string),
                );
                row.extend(
                    [r.plan.m_bits as usize, r.plan.k_bits as usize, r.plan.n_train, r.plan.n_info]
                        .iter()
                        .map(usize::to_string),
                );
                row.extend(
                    [r.plan.rate, r.plan.capacity, r.plan.discrete_rate]
                        .iter()
                        .map(f64::to_string),
                );
                row.push(String::new());
            }
            Err(e) => {
                row.push("error".into());
                row.extend(std::iter::repeat_n(String::new(), CSV_HEADER.len() - 4));
                row.push(e.clone());
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            t_seconds: 20.0,
            trials: 30,
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn single_value_is_one_run() {
        let pts = sweep(&base(), SweepAxis::T, &[20.0]).unwrap();
        let one = run_experiment(&base()).unwrap();
        assert_eq!(pts[0].result.as_ref().unwrap().to_json().unwrap(), one.to_json().unwrap());
    }

    #[test]
    fn bad_points_are_recorded_and_skipped() {
        let pts = sweep(&base(), SweepAxis::T, &[1.0, 20.0]).unwrap();
        assert!(pts[0].result.is_err());
        assert!(pts[1].result.is_ok());
        let mut buf = Vec::new();
        write_sweep_csv(SweepAxis::T, &pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut rows = csv::Reader::from_reader(text.as_bytes());
        let recs: Vec<_> = rows.records().map(|r| r.unwrap()).collect();
        assert_eq!(recs.len(), 2);
        assert_eq!(&recs[0][2], "error");
        assert!(recs[0][19].contains("message bit"));
        assert_eq!(&recs[1][2], "ok");
        assert_eq!(&recs[1][3], "30");
    }

    #[test]
    fn empty_sweep_is_rejected() {
        assert!(sweep(&base(), SweepAxis::Nu, &[]).is_err());
    }

    #[test]
    fn axes_touch_one_field() {
        let b = base();
        assert_eq!(SweepAxis::Delta.apply(&b, 1e-4).params.slot, 1e-4);
        assert_eq!(SweepAxis::Nu.apply(&b, 0.2).params.budget_rate, 0.2);
        assert_eq!(SweepAxis::RateFraction.apply(&b, 0.3).rate_fraction, 0.3);
        assert_eq!("rate_fraction".parse::<SweepAxis>().unwrap(), SweepAxis::RateFraction);
    }
}
