use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use predflow_cli::experiments::{
    exp_generalization, exp_learner_exactness, exp_warmstart_scaling, ExperimentOutput,
};
use predflow_core::formats::{parse_distribution, parse_flow, parse_network, read_sample_dir};
use predflow_core::learner::learn_prediction;
use predflow_core::sampler::{default_failure_prob, hoeffding_sample_count};
use predflow_core::warmstart::{
    robust_race, warm_start_max_flow, RaceWinner, RepairVariant, WarmStartOptions, RACE_QUANTUM,
};
use predflow_core::{max_flow_from, FlowAssignment, FlowNetwork};
use std::fs;
use std::path::{Path, PathBuf};

/// Error targets driven by the scaling experiment.
const SCALING_LADDER: [i64; 7] = [0, 1, 2, 4, 8, 12, 16];

#[derive(Parser)]
#[command(
    name = "predflow",
    version,
    about = "Maximum flow with learned warm starts: solvers, learner, experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum VariantArg {
    /// Cancel overflow cycle-first along the prediction's support
    #[default]
    Cancel,
    /// Repair via one auxiliary max-flow on the reversed support
    Circulation,
}

impl From<VariantArg> for RepairVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Cancel => RepairVariant::Cancel,
            VariantArg::Circulation => RepairVariant::Circulation,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a DIMACS max-flow instance from scratch
    Solve {
        /// Instance file (DIMACS max-flow format)
        instance: PathBuf,
        /// Write the maximum flow here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repair a predicted flow and finish solving from it
    WarmSolve {
        /// Instance file (DIMACS max-flow format)
        instance: PathBuf,
        /// Predicted flow file; may violate the instance's capacities
        prediction: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        variant: VariantArg,
        /// Cancel one unit per repair round instead of saturating each member
        #[arg(long)]
        strict_units: bool,
        /// Write the maximum flow here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Race the warm-started pipeline against a cold solve
    Race {
        /// Instance file (DIMACS max-flow format)
        instance: PathBuf,
        /// Predicted flow file; may violate the instance's capacities
        prediction: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        variant: VariantArg,
        /// Cancel one unit per repair round instead of saturating each member
        #[arg(long)]
        strict_units: bool,
        /// Write the winner's maximum flow here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn the error-minimizing prediction from a sample directory
    Learn {
        /// Directory holding instance.dimacs plus sample_*.caps files
        samples: PathBuf,
        /// Write the learned prediction here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the sample count that makes learned predictions generalize
    SampleCount {
        /// Capacity-distribution file
        distribution: PathBuf,
    },
    /// Warm-start work scaling across a ladder of prediction errors
    ExpScaling {
        /// Instance file (DIMACS max-flow format)
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        variant: VariantArg,
        /// Cancel one unit per repair round instead of saturating each member
        #[arg(long)]
        strict_units: bool,
        /// Trials per error target
        #[arg(long, default_value_t = 25)]
        trials: u64,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learner objective vs brute-force minimum on random small instances
    ExpExactness {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        trials: u64,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generalization gap of predictions learned from drawn samples
    ExpGeneralization {
        /// Instance file (DIMACS max-flow format)
        instance: PathBuf,
        /// Finite-support capacity-distribution file
        distribution: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Repetitions
        #[arg(long, default_value_t = 20)]
        trials: u64,
        /// Override the per-rep sample count
        #[arg(long)]
        k: Option<u64>,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve { instance, out } => {
            let network = read_network(&instance)?;
            let zero = FlowAssignment::zero(network.edge_count());
            let (flow, stats) = max_flow_from(&network, &zero)?;
            println!("value {}", network.flow_value(&flow)?);
            println!("augmentations {}", stats.augmentation_count);
            println!("work {}", stats.arcs_scanned);
            emit_flow(out.as_deref(), &network, &flow, &instance)
        }
        Command::WarmSolve {
            instance,
            prediction,
            variant,
            strict_units,
            out,
        } => {
            let network = read_network(&instance)?;
            let predicted = read_flow(&prediction, &network)?;
            let options = WarmStartOptions {
                variant: variant.into(),
                strict_units,
            };
            let (flow, report) = warm_start_max_flow(&network, &predicted, options)?;
            println!("value {}", report.final_value);
            println!("delta {}", report.delta);
            println!("repair_rounds {}", report.repair_rounds);
            println!("repair_units {}", report.repair_units);
            println!("step2_units {}", report.step2_stats.units_pushed);
            println!("work {}", report.total_work());
            emit_flow(out.as_deref(), &network, &flow, &instance)
        }
        Command::Race {
            instance,
            prediction,
            variant,
            strict_units,
            out,
        } => {
            let network = read_network(&instance)?;
            let predicted = read_flow(&prediction, &network)?;
            let options = WarmStartOptions {
                variant: variant.into(),
                strict_units,
            };
            let (flow, report) = robust_race(&network, &predicted, options)?;
            let winner = match report.winner {
                RaceWinner::Warm => "warm",
                RaceWinner::Cold => "cold",
            };
            println!("winner {winner}");
            println!("value {}", network.flow_value(&flow)?);
            println!("warm_work {}", report.warm_work);
            println!("cold_work {}", report.cold_work);
            println!("total_work {}", report.total_work());
            println!("quantum {RACE_QUANTUM}");
            emit_flow(out.as_deref(), &network, &flow, &instance)
        }
        Command::Learn { samples, out } => {
            let (network, sample_vectors) = read_sample_dir(&samples)
                .with_context(|| format!("reading sample directory {}", samples.display()))?;
            let learned = learn_prediction(&network, &sample_vectors)?;
            println!("samples {}", sample_vectors.len());
            println!(
                "objective {}/{}",
                learned.objective.numer(),
                learned.objective.denom()
            );
            emit_flow(out.as_deref(), &network, &learned.flow, &samples)
        }
        Command::SampleCount { distribution } => {
            let dist = read_distribution(&distribution)?;
            let p = default_failure_prob(dist.c_max(), dist.edge_count());
            let k = hoeffding_sample_count(dist.c_max(), dist.edge_count(), p)?;
            println!("c_max {}", dist.c_max());
            println!("edges {}", dist.edge_count());
            println!("failure_prob {p}");
            println!("k {k}");
            Ok(())
        }
        Command::ExpScaling {
            instance,
            seed,
            variant,
            strict_units,
            trials,
            out,
        } => {
            let network = read_network(&instance)?;
            let options = WarmStartOptions {
                variant: variant.into(),
                strict_units,
            };
            let output = exp_warmstart_scaling(&network, &SCALING_LADDER, trials, seed, options)?;
            finish_experiment(output, out.as_deref())
        }
        Command::ExpExactness { seed, trials, out } => {
            let output = exp_learner_exactness(trials, seed)?;
            finish_experiment(output, out.as_deref())
        }
        Command::ExpGeneralization {
            instance,
            distribution,
            seed,
            trials,
            k,
            out,
        } => {
            let network = read_network(&instance)?;
            let dist = read_distribution(&distribution)?;
            let output = exp_generalization(&network, &dist, trials, seed, k)?;
            finish_experiment(output, out.as_deref())
        }
    }
}

fn read_network(path: &Path) -> Result<FlowNetwork> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_network(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_flow(path: &Path, network: &FlowNetwork) -> Result<FlowAssignment> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_flow(&text, network).with_context(|| format!("parsing {}", path.display()))
}

fn read_distribution(path: &Path) -> Result<predflow_core::sampler::CapacityDistribution> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_distribution(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Writes the flow to `out`, or prints it when no path was given. The
/// instance name in the header comes from the input file's stem.
fn emit_flow(
    out: Option<&Path>,
    network: &FlowNetwork,
    flow: &FlowAssignment,
    source_path: &Path,
) -> Result<()> {
    let name = source_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let text = predflow_core::formats::serialize_flow(network, flow, &name)?;
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Writes the CSV, then fails the process if any assertion was violated.
fn finish_experiment(output: ExperimentOutput, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, &output.csv)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", output.csv),
    }
    if !output.passed() {
        for failure in &output.failures {
            eprintln!("assertion failed: {failure}");
        }
        bail!("{} experiment assertion(s) failed", output.failures.len());
    }
    Ok(())
}
