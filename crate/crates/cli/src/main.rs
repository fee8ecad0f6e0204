//! `poisson-csi`: capacities, Sanov checks and full-block Monte Carlo runs
//! from the command line.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use poisson_csi::causal::{causal_capacity, no_csi_capacity};
use poisson_csi::harness::{run_experiment, sweep, trace_trial, write_sweep_csv};
use poisson_csi::infomath::{capacity_poisson, discrete_capacity_with, sanov_binomial_exponent};
use poisson_csi::{
    AdversaryStrategy, ChannelParams, Error, ExperimentConfig, KBitsPolicy, LawMode, RandomStateLaw, SlotSeq,
    StateModel, SweepAxis,
};
use serde_json::json;

const SEED_ENV: &str = "POISSON_CSI_SEED";

#[derive(Parser)]
#[command(name = "poisson-csi", version, about = "Poisson channel with spurious counts known at the transmitter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity C(A, λ) of the peak-limited Poisson channel, and C_Δ/Δ when --delta is given.
    Capacity {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, value_enum, default_value_t = Mode::Linearized)]
        mode: Mode,
        #[arg(long)]
        json: bool,
    },
    /// Full-block Monte Carlo run; writes one JSON result document.
    Simulate {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Result document path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory receiving the state, input and output tracks of one trial.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = TraceFormat::Text)]
        trace_format: TraceFormat,
        #[arg(long, default_value_t = 0)]
        trace_trial: u64,
    },
    /// Capacities with and without causal state information, in bits per slot.
    Causal {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Spurious-count intensity μ in counts per second.
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        json: bool,
    },
    /// Exact binomial tail P[Bin(n,p) ≥ ⌈qn⌉] next to its Sanov exponent.
    Sanov {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        json: bool,
    },
    /// One experiment per value of an axis; writes a CSV table.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// CSV path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory receiving one JSON document per successful point.
        #[arg(long)]
        json_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Linearized,
    Exact,
}

impl From<Mode> for LawMode {
    fn from(m: Mode) -> LawMode {
        match m {
            Mode::Linearized => LawMode::Linearized,
            Mode::Exact => LawMode::Exact,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceFormat {
    Text,
    Rle,
}

#[derive(Args, Default)]
struct ChannelArgs {
    /// Peak intensity A.
    #[arg(long = "A")]
    peak: Option<f64>,
    /// Dark-current intensity λ.
    #[arg(long)]
    lambda: Option<f64>,
    /// Slot width Δ in seconds.
    #[arg(long)]
    delta: Option<f64>,
    /// Adversary budget ν in counts per second.
    #[arg(long)]
    nu: Option<f64>,
    /// Training overhead α.
    #[arg(long)]
    alpha: Option<f64>,
    /// Threshold slack ε.
    #[arg(long)]
    eps: Option<f64>,
    /// Codeword duty cycle p.
    #[arg(long)]
    p: Option<f64>,
}

impl ChannelArgs {
    fn apply(&self, params: &mut ChannelParams) {
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut params.peak, self.peak);
        set(&mut params.dark, self.lambda);
        set(&mut params.slot, self.delta);
        set(&mut params.budget_rate, self.nu);
        set(&mut params.training_overhead, self.alpha);
        set(&mut params.slack, self.eps);
        set(&mut params.duty_cycle, self.p);
    }

    fn params(&self) -> ChannelParams {
        let mut params = ChannelParams::default();
        self.apply(&mut params);
        params
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML file mirroring the experiment configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Information-phase duration T in seconds.
    #[arg(long = "T")]
    t_seconds: Option<f64>,
    #[arg(long)]
    rate_fraction: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Adversary placement: uniform, front, bursty or info.
    #[arg(long, conflicts_with = "states")]
    strategy: Option<String>,
    /// Random states: none, poisson:RATE or bursty:RATE:LEN.
    #[arg(long)]
    states: Option<String>,
    /// Fixed number of bin bits instead of the configured policy.
    #[arg(long)]
    k_bits: Option<u32>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn parse_states(s: &str) -> CliResult<RandomStateLaw> {
    let bad = || Failure::Config(format!("cannot parse state law `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| parts.get(i).ok_or_else(bad)?.parse::<f64>().map_err(|_| bad());
    match parts[0] {
        "none" if parts.len() == 1 => Ok(RandomStateLaw::None),
        "poisson" if parts.len() == 2 => Ok(RandomStateLaw::HomogeneousPoisson { rate: num(1)? }),
        "bursty" if parts.len() == 3 => Ok(RandomStateLaw::Bursty {
            rate: num(1)?,
            burst_len: parts[2].parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

impl ExperimentArgs {
    fn resolve(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
                toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
            }
            None => ExperimentConfig::default(),
        };
        self.channel.apply(&mut cfg.params);
        if let Some(v) = self.t_seconds {
            cfg.t_seconds = v;
        }
        if let Some(v) = self.rate_fraction {
            cfg.rate_fraction = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Ok(v) = std::env::var(SEED_ENV) {
            cfg.seed = v
                .trim()
                .parse()
                .map_err(|_| Failure::Config(format!("{SEED_ENV} must be an unsigned integer, got `{v}`")))?;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(s) = &self.strategy {
            let strategy: AdversaryStrategy = s.parse().map_err(Failure::from)?;
            cfg.adversary = StateModel::Adversarial(strategy);
        }
        if let Some(s) = &self.states {
            cfg.adversary = StateModel::Random(parse_states(s)?);
        }
        if let Some(bits) = self.k_bits {
            cfg.k_bits = KBitsPolicy::Fixed { bits };
        }
        if let Some(m) = self.mode {
            cfg.law_mode = m.into();
        }
        Ok(cfg)
    }
}

fn runtime(e: io::Error, what: &Path) -> Failure {
    Failure::Runtime(format!("cannot write {}: {e}", what.display()))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| runtime(e, path)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Runtime(e.to_string())),
    }
}

fn print_json(v: serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(&v).map_err(|e| Failure::Runtime(e.to_string()))?;
    emit(None, &(text + "\n"))
}

fn write_trace(dir: &Path, format: TraceFormat, tracks: [(&str, &SlotSeq); 3]) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| runtime(e, dir))?;
    for (name, seq) in tracks {
        let (path, bytes) = match format {
            TraceFormat::Text => {
                let mut buf = Vec::new();
                seq.write_text(&mut buf)?;
                (dir.join(format!("{name}.txt")), buf)
            }
            TraceFormat::Rle => (dir.join(format!("{name}.rle")), seq.to_rle_bytes()),
        };
        fs::write(&path, bytes).map_err(|e| runtime(e, &path))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Capacity { channel, mode, json } => {
            let params = channel.params();
            let c = capacity_poisson(params.peak, params.dark)?;
            let discrete = match channel.delta {
                Some(_) => Some(discrete_capacity_with(&params, mode.into())?),
                None => None,
            };
            if json {
                print_json(json!({
                    "A": params.peak,
                    "lambda": params.dark,
                    "capacity_bits_per_sec": c.capacity,
                    "p_star": c.p_star,
                    "discrete_bits_per_slot": discrete.as_ref().map(|d| d.capacity),
                    "discrete_bits_per_sec": discrete.as_ref().map(|d| d.capacity / params.slot),
                }))?;
            } else {
                println!("C(A={}, lambda={}) = {:.6} bits/sec", params.peak, params.dark, c.capacity);
                println!("p* = {:.6}", c.p_star);
                if let Some(d) = discrete {
                    println!(
                        "C_delta = {:.6e} bits/slot, C_delta/delta = {:.6} bits/sec (delta = {})",
                        d.capacity,
                        d.capacity / params.slot,
                        params.slot
                    );
                }
            }
        }
        Command::Causal { channel, mu, json } => {
            let params = channel.params();
            let with = causal_capacity(&params, mu)?;
            let without = no_csi_capacity(&params, mu)?;
            let diff = (with.capacity - without.capacity).abs();
            if json {
                print_json(json!({
                    "causal_bits_per_slot": with.capacity,
                    "no_csi_bits_per_slot": without.capacity,
                    "difference": diff,
                    "causal_p_star": with.p_star,
                    "no_csi_p_star": without.p_star,
                }))?;
            } else {
                println!("causal CSI: {:.12e} bits/slot (p* = {:.6})", with.capacity, with.p_star);
                println!("no CSI:     {:.12e} bits/slot (p* = {:.6})", without.capacity, without.p_star);
                println!("difference: {diff:.3e}");
            }
        }
        Command::Sanov { n, p, q, json } => {
            let s = sanov_binomial_exponent(n, q, p)?;
            let bound_log2 = ((n + 1) as f64).log2() - s.exponent;
            if json {
                print_json(json!({
                    "n": n,
                    "p": p,
                    "q": q,
                    "exact_tail": s.exact_tail,
                    "log2_tail": s.log2_tail,
                    "exponent_bits": s.exponent,
                    "log2_bound": bound_log2,
                    "bound_holds": s.satisfies_bound(n),
                }))?;
            } else {
                println!("P[Bin({n},{p}) >= ceil({q}n)] = {:.6e} (log2 {:.4})", s.exact_tail, s.log2_tail);
                println!("n*D(q||p) = {:.4} bits, (n+1)*2^(-nD) = 2^{bound_log2:.4}", s.exponent);
                println!("bound holds: {}", s.satisfies_bound(n));
            }
        }
        Command::Simulate { exp, out, trace, trace_format, trace_trial: index } => {
            let cfg = exp.resolve()?;
            let result = run_experiment(&cfg)?;
            emit(out.as_deref(), &result.to_json()?)?;
            if let Some(dir) = trace {
                let t = trace_trial(&cfg, &result.plan, index)?;
                write_trace(&dir, trace_format, [("states", &t.states), ("input", &t.input), ("output", &t.output)])?;
            }
            let c = result.counts;
            eprintln!(
                "error rate {:.4} [{:.4}, {:.4}] over {} trials (miss {}, false {}, encoder {}, training {}) in {:.2} s",
                result.error_rate.value,
                result.error_rate.low,
                result.error_rate.high,
                c.total(),
                c.miss,
                c.false_decode,
                c.encoder_failure,
                c.training_failure,
                result.wall_time.as_secs_f64()
            );
        }
        Command::Sweep { exp, axis, values, out, json_dir } => {
            let cfg = exp.resolve()?;
            let axis: SweepAxis = axis.parse()?;
            let points = sweep(&cfg, axis, &values)?;
            let mut buf = Vec::new();
            write_sweep_csv(axis, &points, &mut buf)?;
            emit(out.as_deref(), &String::from_utf8_lossy(&buf))?;
            if let Some(dir) = json_dir {
                fs::create_dir_all(&dir).map_err(|e| runtime(e, &dir))?;
                for (i, pt) in points.iter().enumerate() {
                    if let Ok(r) = &pt.result {
                        let path = dir.join(format!("point_{i:03}.json"));
                        r.write_json(&path).map_err(|e| Failure::Runtime(e.to_string()))?;
                    }
                }
            }
            let failed = points.iter().filter(|p| p.result.is_err()).count();
            if failed > 0 {
                eprintln!("{failed} of {} sweep points failed; see the error column", points.len());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("poisson-csi: configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("poisson-csi: {msg}");
            ExitCode::from(3)
        }
    }
}
