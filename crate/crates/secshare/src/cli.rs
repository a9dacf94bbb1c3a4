//! Command line arguments. The parsed [`Command`] is also the parameter
//! record of a run manifest, with every default filled in.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use secshare_core::optics::{MANUAL_JITTER_DEG, MOTORIZED_JITTER_DEG};
use secshare_core::protocol::{Family, Task, THETA_STAR};
use secshare_core::steering::{DirectionSet, DEFAULT_LEVEL};

use crate::error::{CliError, CliResult};
use crate::formats::Format;

#[derive(Debug, Parser)]
#[command(name = "secshare", version, about = "Secret sharing with entangled but unsteerable states: evaluation, bounds, steering certificates and experiment simulation")]
pub struct Cli {
    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = "secshare-out")]
    pub out: PathBuf,
    /// Format of tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Exact scores of the canonical protocol on a state.
    Eval(EvalArgs),
    /// Scores over a visibility grid (a θ grid for the pure family).
    Sweep(SweepArgs),
    /// Smallest visibility at which the canonical protocol beats a target.
    Threshold(ThresholdArgs),
    /// Exhaustive search over classical one-bit strategies.
    Classical(ClassicalArgs),
    /// Classical (Rscrt, Rctrl) frontier of the stochastic task.
    Frontier(FrontierArgs),
    /// Seesaw lower bounds over qubit strategies without entanglement.
    Seesaw(SeesawArgs),
    /// Steering certificates from the linear programs.
    Certify(CertifyArgs),
    /// Event-by-event simulation of the photonic experiment.
    Experiment(ExperimentArgs),
    /// Simulated two-qubit state tomography.
    Tomography(TomographyArgs),
    /// Checks the wave plate settings tables against their intended operations.
    VerifyTables(VerifyTablesArgs),
    /// Theoretical and simulated values next to the published ones.
    Reproduce(ReproduceArgs),
    /// Re-runs the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::Sweep(_) => "sweep",
            Command::Threshold(_) => "threshold",
            Command::Classical(_) => "classical",
            Command::Frontier(_) => "frontier",
            Command::Seesaw(_) => "seesaw",
            Command::Certify(_) => "certify",
            Command::Experiment(_) => "experiment",
            Command::Tomography(_) => "tomography",
            Command::VerifyTables(_) => "verify-tables",
            Command::Reproduce(_) => "reproduce",
            Command::Replay(_) => "replay",
        }
    }

    /// Seed of the random streams, for commands that sample.
    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Seesaw(a) => Some(a.seed),
            Command::Experiment(a) => Some(a.seed),
            Command::Tomography(a) => Some(a.seed),
            Command::Reproduce(a) => Some(a.seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskArg {
    #[value(alias = "deterministic")]
    Det,
    #[value(alias = "stochastic")]
    Stoch,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Det => Task::Deterministic,
            TaskArg::Stoch => Task::Stochastic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    /// v Φ+ + (1 - v) I/4.
    Isotropic,
    /// v |φθ><φθ| + (1 - v) I/4.
    Partial,
    /// |φθ><φθ|.
    Pure,
}

/// A member of a state family.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct StateArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Isotropic)]
    pub family: FamilyArg,
    /// Visibility.
    #[arg(long = "v", default_value_t = 1.0)]
    pub v: f64,
    /// Angle θ of the partial and pure families, in radians.
    #[arg(long, default_value_t = THETA_STAR)]
    pub theta: f64,
}

impl StateArgs {
    pub fn family(&self) -> CliResult<Family> {
        let f = match self.family {
            FamilyArg::Isotropic => Family::Isotropic { v: self.v },
            FamilyArg::Partial => Family::Partial { v: self.v, theta: self.theta },
            FamilyArg::Pure if self.v != 1.0 => {
                return Err(CliError::validation("the pure family takes no --v other than 1"))
            }
            FamilyArg::Pure => Family::Pure { theta: self.theta },
        };
        f.state()?;
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[command(flatten)]
    pub state: StateArgs,
    /// State file `{dim, re, im}`; replaces the family flags.
    #[arg(long = "state")]
    pub state_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long, value_enum, default_value_t = FamilyArg::Isotropic)]
    pub family: FamilyArg,
    /// Angle θ of the partial family, in radians.
    #[arg(long, default_value_t = THETA_STAR)]
    pub theta: f64,
    /// Grid points, endpoints included.
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Also write `sweep.svg`.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ThresholdArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long, value_enum, default_value_t = FamilyArg::Isotropic)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = THETA_STAR)]
    pub theta: f64,
    /// Score to reach; defaults to the task's bound without entanglement.
    #[arg(long)]
    pub target: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ClassicalArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FrontierArgs {}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SeesawArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long, default_value_t = 100)]
    pub restarts: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionArg {
    /// Bob measures, Charlie is steered.
    B2c,
    /// Charlie measures, Bob is steered.
    C2b,
    Both,
}

impl From<DirectionArg> for DirectionSet {
    fn from(d: DirectionArg) -> DirectionSet {
        match d {
            DirectionArg::B2c => DirectionSet::BobToCharlie,
            DirectionArg::C2b => DirectionSet::CharlieToBob,
            DirectionArg::Both => DirectionSet::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SteeringAxesArg {
    /// The measurement axes of the refinement level.
    Level,
    /// The three Pauli axes.
    Xyz,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long = "state")]
    pub state_file: Option<PathBuf>,
    /// Refinement level of the measurement polytope.
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    pub level: u32,
    #[arg(long, value_enum, default_value_t = DirectionArg::Both)]
    pub direction: DirectionArg,
    /// Axes used for steerability certificates.
    #[arg(long, value_enum, default_value_t = SteeringAxesArg::Level)]
    pub steering_axes: SteeringAxesArg,
    /// Also bisect the largest certified visibility of the family.
    #[arg(long)]
    pub scan: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ExperimentArgs {
    #[arg(long, value_enum, default_value_t = TaskArg::Det)]
    pub task: TaskArg,
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 800_000)]
    pub events: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Coincidences per second, used for the reported duration.
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    /// Standard deviation of the motorized plate settings, in degrees.
    #[arg(long, default_value_t = MOTORIZED_JITTER_DEG)]
    pub jitter_motorized: f64,
    /// Standard deviation of Alice's plate settings, in degrees.
    #[arg(long, default_value_t = MANUAL_JITTER_DEG)]
    pub jitter_manual: f64,
    /// TOML or JSON file whose entries override the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TomographyArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long = "state")]
    pub state_file: Option<PathBuf>,
    /// Events per Pauli setting (per Bell state with --recombine).
    #[arg(long, default_value_t = 1400)]
    pub events: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Measure the four Bell states separately and recombine with the
    /// isotropic mixing weights.
    #[arg(long)]
    pub recombine: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyTablesArgs {}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReproduceArgs {
    /// Events of every simulated run.
    #[arg(long, default_value_t = 800_000)]
    pub events: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Tomography events per setting and Bell state.
    #[arg(long, default_value_t = 1400)]
    pub tomography_events: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
}
