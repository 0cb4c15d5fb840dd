//! Monte Carlo experiments: many independent protocol runs, abort rate and
//! bias estimates with confidence intervals, and theory/simulation sweeps.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{bias_report, BiasReport, OracleSettings};
use crate::error::{Error, Result};
use crate::protocol::{
    BiasEstimate, BiasTally, BitPattern, CoinResult, PartyStrategy, ProtocolParams, Session, SingleCoin,
    StrategyKind, StringResult, Transcript,
};
use crate::rng::SeedStream;

/// Half-width of every confidence interval, in standard errors.
pub const Z: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Bitstring,
    SingleCoin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputFlags {
    /// Return one transcript per run alongside the report.
    pub transcripts: bool,
    /// Keep per-round records inside string transcripts.
    pub rounds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: ProtocolParams,
    #[serde(default = "PartyStrategy::honest")]
    pub alice: PartyStrategy,
    #[serde(default = "PartyStrategy::honest")]
    pub bob: PartyStrategy,
    pub runs: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub outputs: OutputFlags,
    /// Also run the grid oracle for the theory block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSettings>,
}

impl ExperimentConfig {
    pub fn new(params: ProtocolParams, alice: PartyStrategy, bob: PartyStrategy, runs: u64, master_seed: u64) -> Self {
        Self {
            params,
            alice,
            bob,
            runs,
            master_seed,
            mode: Mode::Bitstring,
            outputs: OutputFlags::default(),
            oracle: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidParameter {
                name: "runs",
                value: 0.0,
                range: ">= 1",
            });
        }
        Session::new(self.params, &self.alice, &self.bob)?;
        if let Some(o) = self.oracle {
            o.validate()?;
        }
        Ok(())
    }
}

/// A point estimate with a `Z`-standard-error interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    fn clamped(value: f64, se: f64, lo: f64, hi: f64) -> Self {
        Self {
            value,
            se,
            ci_low: (value - Z * se).max(lo),
            ci_high: (value + Z * se).min(hi),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

/// Which bias estimate the theory value should be compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasBasis {
    /// Conditional on the run not aborting.
    Conditional,
    /// Aborted runs counted as losses for the cheater.
    Unconditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedBias {
    pub value: f64,
    pub basis: BiasBasis,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub mode: Mode,
    pub params: ProtocolParams,
    /// Abort threshold actually used by Bob.
    pub gamma: f64,
    pub alice: PartyStrategy,
    pub bob: PartyStrategy,
    pub target: BitPattern,
    pub runs: u64,
    pub master_seed: u64,
    pub completed: u64,
    pub aborted: u64,
    pub delta_hat: Estimate,
    pub avg_bias: Estimate,
    pub avg_bias_unconditional: Estimate,
    pub worst_bit_bias: f64,
    pub expected_bias: Option<ExpectedBias>,
    pub theory: BiasReport,
    pub pass_flags: BTreeMap<String, bool>,
}

/// Per-run output, kept only when requested.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum RunRecord {
    String(Transcript),
    Coin(SingleCoin),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub transcripts: Vec<RunRecord>,
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn coin_as_string(coin: &SingleCoin) -> StringResult {
    match coin.result {
        CoinResult::Bit(x) => StringResult::Bits(vec![x]),
        CoinResult::Abort => StringResult::Abort,
    }
}

/// Theory value the simulated bias should reproduce, when one is known.
pub fn expected_bias(cfg: &ExperimentConfig, theory: &BiasReport) -> Option<ExpectedBias> {
    let (s, c) = cfg.params.theta.sin_cos();
    let conditional = |value| {
        Some(ExpectedBias {
            value,
            basis: BiasBasis::Conditional,
        })
    };
    match (cfg.mode, cfg.alice.kind, cfg.bob.kind) {
        (_, StrategyKind::Honest, StrategyKind::Honest) => conditional(0.0),
        (_, _, StrategyKind::CheatHelstrom) => conditional(0.5 * s),
        (_, _, StrategyKind::CheatUnambiguous) => conditional(0.5 * (1.0 - c)),
        (Mode::Bitstring, StrategyKind::CheatOptimal, _) => conditional(theory.eps_a_closed),
        (Mode::Bitstring, StrategyKind::CheatCustom(p), _) => conditional(p.q - 0.5),
        // The |chi> attack wins exactly when Bob's check passes.
        (Mode::SingleCoin, StrategyKind::CheatOptimal, _) => Some(ExpectedBias {
            value: 0.5 * c,
            basis: BiasBasis::Unconditional,
        }),
        _ => None,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let session = Session::new(cfg.params, &cfg.alice, &cfg.bob)?;
    let n = match cfg.mode {
        Mode::Bitstring => cfg.params.n,
        Mode::SingleCoin => 1,
    };
    let target = session.target().expand(n);
    let keep = cfg.outputs.transcripts;

    let run_one = |run: u64| -> (StringResult, Option<RunRecord>) {
        let stream = SeedStream::new(cfg.master_seed, run);
        match cfg.mode {
            Mode::Bitstring => {
                let t = session.run_bitstring(&stream, keep && cfg.outputs.rounds);
                (t.result.clone(), keep.then_some(RunRecord::String(t)))
            }
            Mode::SingleCoin => {
                let coin = session.run_single_coin(&mut stream.round_rng(0));
                (coin_as_string(&coin), keep.then_some(RunRecord::Coin(coin)))
            }
        }
    };

    let (tally, transcripts) = pool(threads)?.install(|| {
        if keep {
            let all: Vec<_> = (0..cfg.runs).into_par_iter().map(run_one).collect();
            let mut tally = BiasTally::new(n);
            let mut records = Vec::with_capacity(all.len());
            for (result, record) in all {
                tally.add(&result, &target);
                records.extend(record);
            }
            (tally, records)
        } else {
            // Integer sums, so the reduction order cannot change the result.
            let tally = (0..cfg.runs)
                .into_par_iter()
                .fold(
                    || BiasTally::new(n),
                    |mut acc, run| {
                        acc.add(&run_one(run).0, &target);
                        acc
                    },
                )
                .reduce(|| BiasTally::new(n), |a, b| a.merge(&b));
            (tally, Vec::new())
        }
    });

    let est = tally.estimate()?;
    let report = build_report(cfg, &session, &est)?;
    Ok(ExperimentOutput { report, transcripts })
}

fn build_report(cfg: &ExperimentConfig, session: &Session, est: &BiasEstimate) -> Result<ExperimentReport> {
    let runs = est.total;
    let aborted = est.total - est.completed;
    let p_abort = aborted as f64 / runs as f64;
    let delta_hat = Estimate::clamped(p_abort, (p_abort * (1.0 - p_abort) / runs as f64).sqrt(), 0.0, 1.0);
    let avg_bias = Estimate::clamped(est.bias, est.se, -0.5, 0.5);
    let avg_bias_unconditional = Estimate::clamped(est.unconditional_bias, est.unconditional_se, -0.5, 0.5);

    let theory = bias_report(cfg.params.f, cfg.params.theta, cfg.params.gamma, cfg.oracle)?;
    let expected = expected_bias(cfg, &theory);

    let mut pass_flags = BTreeMap::new();
    if let Some(e) = expected {
        let measured = match e.basis {
            BiasBasis::Conditional => &avg_bias,
            BiasBasis::Unconditional => &avg_bias_unconditional,
        };
        pass_flags.insert("bias_matches_theory".to_string(), measured.contains(e.value));
    }
    if !cfg.alice.kind.is_honest() && cfg.mode == Mode::Bitstring {
        pass_flags.insert(
            "bias_below_theorem1".to_string(),
            avg_bias.value <= theory.eps_a_theorem1 + Z * avg_bias.se,
        );
    }
    pass_flags.insert("abort_rate_below_5pct".to_string(), delta_hat.value < 0.05);

    Ok(ExperimentReport {
        mode: cfg.mode,
        params: cfg.params,
        gamma: session.gamma(),
        alice: cfg.alice.clone(),
        bob: cfg.bob.clone(),
        target: session.target().clone(),
        runs,
        master_seed: cfg.master_seed,
        completed: est.completed,
        aborted,
        delta_hat,
        avg_bias,
        avg_bias_unconditional,
        worst_bit_bias: est.worst_bit,
        expected_bias: expected,
        theory,
        pass_flags,
    })
}

/// Runs the experiment and renders its report as schema-stable JSON.
pub fn simulate_report_json(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<String> {
    crate::json::to_string(&run_experiment(cfg, threads)?.report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    F,
    Theta,
    Gamma,
    N,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f" => Ok(SweepAxis::F),
            "theta" => Ok(SweepAxis::Theta),
            "gamma" => Ok(SweepAxis::Gamma),
            "n" => Ok(SweepAxis::N),
            other => Err(Error::Config(format!("unknown sweep axis {other:?}; expected f, theta, gamma or n"))),
        }
    }
}

impl SweepAxis {
    fn apply(self, base: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut cfg = base.clone();
        match self {
            SweepAxis::F => cfg.params.f = value,
            SweepAxis::Theta => cfg.params.theta = value,
            SweepAxis::Gamma => cfg.params.gamma = Some(value),
            SweepAxis::N => {
                if value < 1.0 || value.fract() != 0.0 || value > usize::MAX as f64 {
                    return Err(Error::InvalidParameter {
                        name: "n",
                        value,
                        range: "a positive integer",
                    });
                }
                cfg.params.n = value as usize;
            }
        }
        cfg.params = ProtocolParams::new(cfg.params.theta, cfg.params.f, cfg.params.gamma, cfg.params.n)?;
        Ok(cfg)
    }
}

/// One sweep cell. Simulation columns are empty for theory-only sweeps and
/// everything but the axis value is empty when the cell failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    #[serde(rename = "eps_A_closed")]
    pub eps_a_closed: Option<f64>,
    #[serde(rename = "eps_A_oracle")]
    pub eps_a_oracle: Option<f64>,
    #[serde(rename = "eps_A_theorem1")]
    pub eps_a_theorem1: Option<f64>,
    #[serde(rename = "eps_B")]
    pub eps_b: Option<f64>,
    pub avg_bias_sim: Option<f64>,
    pub avg_bias_se: Option<f64>,
    pub delta_hat: Option<f64>,
    pub runs: u64,
    pub n: usize,
    pub seed: u64,
    #[serde(skip)]
    pub error: Option<String>,
}

fn sweep_cell(axis: SweepAxis, value: f64, base: &ExperimentConfig, theory_only: bool, threads: Option<usize>) -> SweepRow {
    let mut row = SweepRow {
        axis_value: value,
        eps_a_closed: None,
        eps_a_oracle: None,
        eps_a_theorem1: None,
        eps_b: None,
        avg_bias_sim: None,
        avg_bias_se: None,
        delta_hat: None,
        runs: if theory_only { 0 } else { base.runs },
        n: base.params.n,
        seed: base.master_seed,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let cfg = axis.apply(base, value)?;
        row.n = cfg.params.n;
        let theory = bias_report(cfg.params.f, cfg.params.theta, cfg.params.gamma, cfg.oracle)?;
        row.eps_a_closed = Some(theory.eps_a_closed);
        row.eps_a_oracle = theory.eps_a_oracle;
        row.eps_a_theorem1 = Some(theory.eps_a_theorem1);
        row.eps_b = Some(theory.eps_b);
        if !theory_only {
            let mut cfg = cfg;
            cfg.outputs = OutputFlags::default();
            let report = run_experiment(&cfg, threads)?.report;
            row.avg_bias_sim = Some(report.avg_bias.value);
            row.avg_bias_se = Some(report.avg_bias.se);
            row.delta_hat = Some(report.delta_hat.value);
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        row.error = Some(e.to_string());
    }
    row
}

/// One row per value; a failing cell records its error and the sweep goes on.
pub fn sweep(
    axis: SweepAxis,
    values: &[f64],
    base: &ExperimentConfig,
    theory_only: bool,
    threads: Option<usize>,
) -> Vec<SweepRow> {
    values
        .iter()
        .map(|&v| sweep_cell(axis, v, base, theory_only, threads))
        .collect()
}

pub const CSV_HEADER: [&str; 11] = [
    "axis_value",
    "eps_A_closed",
    "eps_A_oracle",
    "eps_A_theorem1",
    "eps_B",
    "avg_bias_sim",
    "avg_bias_se",
    "delta_hat",
    "runs",
    "n",
    "seed",
];

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let cell = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.axis_value.to_string(),
            cell(r.eps_a_closed),
            cell(r.eps_a_oracle),
            cell(r.eps_a_theorem1),
            cell(r.eps_b),
            cell(r.avg_bias_sim),
            cell(r.avg_bias_se),
            cell(r.delta_hat),
            r.runs.to_string(),
            r.n.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
