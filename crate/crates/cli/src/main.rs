use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qcoin_core::acceptance::{closed_form_f_star, mutated_f_star, Suite};
use qcoin_core::adversary::{bias_report, optimal_alice_bias, oracle_alice_bias, CheatPoint, OracleSettings};
use qcoin_core::harness::{run_experiment, sweep, write_csv, ExperimentConfig, Mode, SweepAxis};
use qcoin_core::protocol::{BitPattern, PartyStrategy, ProtocolParams, StrategyKind};
use qcoin_core::{json, Error};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Verification(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) | CliError::Core(Error::OracleInfeasible { .. }) => 1,
            CliError::Core(Error::AllAborted) => 3,
            _ => 2,
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "qcoin", version, about = "Coin tossing over a depolarizing qubit channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form biases, the general bound and the regime boundary.
    Theory {
        #[command(flatten)]
        theta: ThetaArg,
        #[arg(long)]
        f: f64,
        /// Fidelity deficit for the general bound [default: (1-f)/2].
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Grid-search optimum compared against the closed form.
    Oracle {
        #[command(flatten)]
        theta: ThetaArg,
        #[arg(long)]
        f: f64,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value_t = 3)]
        refine: usize,
    },
    /// Monte Carlo experiment; writes a JSON report.
    Simulate {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Report destination [default: standard output].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write one JSON line per run to this file.
        #[arg(long)]
        transcripts: Option<PathBuf>,
        /// Include per-round records in the transcripts.
        #[arg(long, requires = "transcripts")]
        rounds: bool,
    },
    /// Theory (and optionally simulation) along one parameter axis; writes CSV.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Skip the Monte Carlo columns.
        #[arg(long)]
        theory_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the acceptance suite, one JSON line per criterion.
    Selftest {
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, hide = true)]
        inject_wrong_fstar: bool,
    },
}

#[derive(Args, Clone, Copy)]
struct ThetaArg {
    /// Signal-state angle in radians, in (0, pi/2].
    #[arg(long, allow_hyphen_values = true, conflicts_with = "theta_deg")]
    theta: Option<f64>,
    /// Signal-state angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    theta_deg: Option<f64>,
}

impl ThetaArg {
    fn radians(&self) -> Option<f64> {
        self.theta.or(self.theta_deg.map(f64::to_radians))
    }

    fn require(&self) -> CliResult<f64> {
        self.radians()
            .ok_or_else(|| CliError::Usage("one of --theta or --theta-deg is required".into()))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AliceArg {
    Honest,
    Optimal,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum BobArg {
    Honest,
    Helstrom,
    Unambiguous,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Bitstring,
    SingleCoin,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    F,
    Theta,
    Gamma,
    N,
}

/// Experiment settings: a JSON config file, inline flags, or a file with
/// inline overrides.
#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    theta: ThetaArg,
    #[arg(long)]
    f: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    alice: Option<AliceArg>,
    #[arg(long, value_enum)]
    bob: Option<BobArg>,
    /// Custom Alice ensemble point.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    s_x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    s_z: Option<f64>,
    /// Cheater's target bits, repeated cyclically.
    #[arg(long)]
    target: Option<BitPattern>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Also run the grid oracle for the theory block.
    #[arg(long)]
    oracle: bool,
    /// Worker threads [default: all cores]. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

impl ExperimentArgs {
    fn build(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| CliError::File {
                    path: path.clone(),
                    source,
                })?;
                serde_json::from_str::<ExperimentConfig>(&text).map_err(Error::from)?
            }
            None => {
                let theta = self.theta.require()?;
                let f = self.f.ok_or_else(|| CliError::Usage("--f is required without --config".into()))?;
                let params = ProtocolParams {
                    theta,
                    f,
                    gamma: None,
                    n: 1000,
                };
                ExperimentConfig::new(params, PartyStrategy::honest(), PartyStrategy::honest(), 20, 0)
            }
        };
        if let Some(t) = self.theta.radians() {
            cfg.params.theta = t;
        }
        if let Some(f) = self.f {
            cfg.params.f = f;
        }
        if self.gamma.is_some() {
            cfg.params.gamma = self.gamma;
        }
        if let Some(n) = self.n {
            cfg.params.n = n;
        }
        if let Some(runs) = self.runs {
            cfg.runs = runs;
        }
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(mode) = self.mode {
            cfg.mode = match mode {
                ModeArg::Bitstring => Mode::Bitstring,
                ModeArg::SingleCoin => Mode::SingleCoin,
            };
        }
        if let Some(a) = self.alice {
            cfg.alice.kind = match a {
                AliceArg::Honest => StrategyKind::Honest,
                AliceArg::Optimal => StrategyKind::CheatOptimal,
                AliceArg::Custom => {
                    let (Some(q), Some(s_x), Some(s_z)) = (self.q, self.s_x, self.s_z) else {
                        return Err(CliError::Usage("--alice custom needs --q, --s-x and --s-z".into()));
                    };
                    StrategyKind::CheatCustom(CheatPoint { q, s_x, s_z })
                }
            };
        }
        if let Some(b) = self.bob {
            cfg.bob.kind = match b {
                BobArg::Honest => StrategyKind::Honest,
                BobArg::Helstrom => StrategyKind::CheatHelstrom,
                BobArg::Unambiguous => StrategyKind::CheatUnambiguous,
            };
        }
        if let Some(t) = &self.target {
            // The target belongs to whoever cheats.
            if cfg.bob.kind.is_honest() {
                cfg.alice.target = Some(t.clone());
            } else {
                cfg.bob.target = Some(t.clone());
            }
        }
        if self.oracle {
            cfg.oracle.get_or_insert_with(OracleSettings::default);
        }
        cfg.validate()?;
        cfg.params = ProtocolParams::new(cfg.params.theta, cfg.params.f, cfg.params.gamma, cfg.params.n)?;
        Ok(cfg)
    }
}

/// Writes one line to standard output. A closed pipe (`| head`) is not an error.
fn emit(line: &str) {
    let _ = writeln!(io::stdout().lock(), "{line}");
}

fn print_json<T: Serialize + ?Sized>(value: &T) -> CliResult {
    emit(&json::to_string(value)?);
    Ok(())
}

fn create(path: &PathBuf) -> CliResult<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(|source| CliError::File {
        path: path.clone(),
        source,
    })
}

fn write_file(path: &PathBuf, text: &str) -> CliResult {
    fs::write(path, text).map_err(|source| CliError::File {
        path: path.clone(),
        source,
    })
}

fn cmd_theory(theta: ThetaArg, f: f64, gamma: Option<f64>) -> CliResult {
    print_json(&bias_report(f, theta.require()?, gamma, None)?)
}

#[derive(Serialize)]
struct OracleComparison {
    q_oracle: f64,
    s_x: f64,
    s_z: f64,
    #[serde(rename = "eps_A_closed")]
    eps_a_closed: f64,
    abs_diff: f64,
}

fn cmd_oracle(theta: ThetaArg, f: f64, grid: usize, refine: usize) -> CliResult {
    let theta = theta.require()?;
    let oracle = oracle_alice_bias(f, theta, grid, refine)?;
    let closed = optimal_alice_bias(f, theta)?.eps_a;
    let cmp = OracleComparison {
        q_oracle: oracle.q,
        s_x: oracle.s_x,
        s_z: oracle.s_z,
        eps_a_closed: closed,
        abs_diff: (closed - oracle.eps_a()).abs(),
    };
    print_json(&cmp)?;
    if cmp.abs_diff > 1e-3 {
        return Err(CliError::Verification(format!(
            "oracle and closed form differ by {:.3e} > 1e-3",
            cmp.abs_diff
        )));
    }
    Ok(())
}

fn cmd_simulate(exp: &ExperimentArgs, out: Option<&PathBuf>, transcripts: Option<&PathBuf>, rounds: bool) -> CliResult {
    let mut cfg = exp.build()?;
    cfg.outputs.transcripts = transcripts.is_some();
    cfg.outputs.rounds = rounds;
    let output = run_experiment(&cfg, exp.threads)?;
    let report = json::to_string(&output.report)?;
    match out {
        Some(path) => write_file(path, &format!("{report}\n"))?,
        None => emit(&report),
    }
    if let Some(path) = transcripts {
        let mut w = create(path)?;
        for t in &output.transcripts {
            writeln!(w, "{}", json::to_string(t)?).map_err(Error::from)?;
        }
        w.flush().map_err(Error::from)?;
    }
    let r = &output.report;
    let theory = r
        .expected_bias
        .map_or_else(|| "n/a".to_string(), |e| format!("{:.6}", e.value));
    emit(&format!(
        "delta={:.6} bias={:.6} theory={theory}",
        r.delta_hat.value, r.avg_bias.value
    ));
    Ok(())
}

fn cmd_sweep(exp: &ExperimentArgs, axis: AxisArg, values: &[f64], theory_only: bool, out: Option<&PathBuf>) -> CliResult {
    let base = exp.build()?;
    let axis = match axis {
        AxisArg::F => SweepAxis::F,
        AxisArg::Theta => SweepAxis::Theta,
        AxisArg::Gamma => SweepAxis::Gamma,
        AxisArg::N => SweepAxis::N,
    };
    let rows = sweep(axis, values, &base, theory_only, exp.threads);
    for r in &rows {
        if let Some(e) = &r.error {
            eprintln!("warning: {} = {}: {e}", format!("{axis:?}").to_lowercase(), r.axis_value);
        }
    }
    match out {
        Some(path) => write_csv(&rows, create(path)?)?,
        None => write_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_selftest(threads: Option<usize>, seed: Option<u64>, inject_wrong_fstar: bool) -> CliResult {
    let mut suite = Suite {
        f_star: if inject_wrong_fstar { mutated_f_star } else { closed_form_f_star },
        threads,
        ..Suite::default()
    };
    if let Some(s) = seed {
        suite.seed = s;
    }
    let results = suite.run_all_with(|r| emit(&r.to_json_line()));
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("criteria failed: {failed:?}")))
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Theory { theta, f, gamma } => cmd_theory(theta, f, gamma),
        Command::Oracle { theta, f, grid, refine } => cmd_oracle(theta, f, grid, refine),
        Command::Simulate {
            exp,
            out,
            transcripts,
            rounds,
        } => cmd_simulate(&exp, out.as_ref(), transcripts.as_ref(), rounds),
        Command::Sweep {
            exp,
            axis,
            values,
            theory_only,
            out,
        } => cmd_sweep(&exp, axis, &values, theory_only, out.as_ref()),
        Command::Selftest {
            threads,
            seed,
            inject_wrong_fstar,
        } => cmd_selftest(threads, seed, inject_wrong_fstar),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcoin: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
