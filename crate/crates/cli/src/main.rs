use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rank1::bounds::{all_bounds, BoundInputs};
use rank1::harness::{
    aggregate_explore, aggregate_regret, run_all_with_threads, run_experiment, AlgoId,
    ExperimentConfig, GeneratorSpec, RunMode, RunRecord, Selection,
};
use rank1::model::{Rank1Instance, RewardDist};
use rank1::Error;

#[derive(Parser)]
#[command(
    name = "rank1",
    version,
    about = "Rank-1 matching bandit simulations and bounds"
)]
struct Cli {
    /// Worker threads for independent runs (all cores by default).
    #[arg(long, global = true, env = "RANK1_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regret benchmark.
    Bench {
        #[arg(value_enum)]
        selection: SelectionArg,
        #[command(flatten)]
        common: Common,
        /// Gap parameter of the generator.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Pure-exploration benchmark.
    Explore {
        #[command(flatten)]
        common: Common,
        /// Confidence parameter.
        #[arg(long)]
        delta: Option<f64>,
        /// Gap parameter of the generator.
        #[arg(long)]
        gap: Option<f64>,
    },
    /// Print every bound report for an instance file as JSON.
    Bounds {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 2e5)]
        horizon: f64,
        #[arg(long, default_value_t = 0.1)]
        confidence: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectionArg {
    Pair,
    Matching,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorArg {
    Bipartite,
    Equalpairs,
    Centered,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    algo: Option<String>,
    /// JSON experiment configuration; command-line values override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Instance file used for every run instead of a generator.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, value_enum)]
    generator: Option<GeneratorArg>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    u1: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    gaussian: bool,
    #[arg(long)]
    final_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn missing(what: &str) -> Error {
    Error::Parameter(format!("missing --{what} (or a --config providing it)"))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Error> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn generator_from_flags(
    common: &Common,
    algo: AlgoId,
    gap: Option<f64>,
) -> Result<GeneratorSpec, Error> {
    if let Some(path) = &common.instance {
        return Ok(GeneratorSpec::Fixed {
            instance: read_json(path)?,
        });
    }
    let kind = common.generator.unwrap_or(match (algo, common.mu) {
        (_, Some(_)) => GeneratorArg::Centered,
        (AlgoId::PairElim | AlgoId::Rank1Elim, _) => GeneratorArg::Bipartite,
        (AlgoId::Uniform, _) if common.u1.is_some() => GeneratorArg::Bipartite,
        _ => GeneratorArg::Equalpairs,
    });
    let n = common.n.ok_or_else(|| missing("n"))?;
    let gap = gap.ok_or_else(|| missing("delta"))?;
    Ok(match kind {
        GeneratorArg::Bipartite => GeneratorSpec::Bipartite {
            n,
            u1: common.u1.ok_or_else(|| missing("u1"))?,
            delta: gap,
        },
        GeneratorArg::Equalpairs => GeneratorSpec::MonoEqualpairs {
            n,
            delta_tilde: gap,
        },
        GeneratorArg::Centered => GeneratorSpec::MonoCentered {
            n,
            mu: common.mu.ok_or_else(|| missing("mu"))?,
            delta_tilde: gap,
        },
    })
}

fn build_config(
    common: &Common,
    mode: Option<RunMode>,
    gap: Option<f64>,
) -> Result<ExperimentConfig, Error> {
    let base = common
        .config
        .as_ref()
        .map(read_json::<ExperimentConfig>)
        .transpose()?;
    let algo = match (&common.algo, &base) {
        (Some(a), _) => a.parse()?,
        (None, Some(b)) => b.algo,
        (None, None) => return Err(missing("algo")),
    };
    let has_generator_flags = common.instance.is_some() || common.n.is_some();
    let generator = match &base {
        Some(b) if !has_generator_flags => b.generator.clone(),
        _ => generator_from_flags(common, algo, gap)?,
    };
    let mode = mode
        .or(base.as_ref().map(|b| b.mode))
        .ok_or_else(|| missing("horizon"))?;
    let dist = if common.gaussian {
        RewardDist::gaussian()
    } else {
        base.as_ref().map_or(RewardDist::Bernoulli, |b| b.dist)
    };
    Ok(ExperimentConfig {
        generator,
        dist,
        algo,
        selection: base.as_ref().and_then(|b| b.selection),
        mode,
        runs: common.runs.or(base.as_ref().map(|b| b.runs)).unwrap_or(20),
        base_seed: common
            .seed
            .or(base.as_ref().map(|b| b.base_seed))
            .unwrap_or(0),
        output: common
            .out
            .clone()
            .or(base.as_ref().and_then(|b| b.output.clone())),
        final_only: common.final_only || base.as_ref().is_some_and(|b| b.final_only),
    })
}

fn summarize(config: &ExperimentConfig, records: &[RunRecord]) -> Result<String, Error> {
    let failed: Vec<_> = records
        .iter()
        .filter(|r| r.status() == "failed")
        .map(|r| (r.run_id, format!("{:?}", r.outcome)))
        .collect();
    let summary = match config.mode {
        RunMode::Regret { .. } => serde_json::json!({
            "algo": config.algo,
            "final": aggregate_regret(records).last(),
            "failed": failed,
        }),
        RunMode::Explore { .. } => serde_json::json!({
            "algo": config.algo,
            "aggregate": aggregate_explore(records),
            "failed": failed,
        }),
    };
    Ok(serde_json::to_string_pretty(&summary)?)
}

fn execute(cli: Cli) -> Result<String, Error> {
    let (config, selection) = match &cli.command {
        Command::Bounds {
            instance,
            horizon,
            confidence,
        } => {
            let inst: Rank1Instance = read_json(instance)?;
            let inputs = BoundInputs {
                horizon: *horizon,
                delta: *confidence,
            };
            return Ok(serde_json::to_string_pretty(&all_bounds(&inst, &inputs)?)?);
        }
        Command::Bench {
            selection,
            common,
            delta,
            horizon,
        } => {
            let mode = horizon.map(|horizon| RunMode::Regret { horizon });
            let selection = match selection {
                SelectionArg::Pair => Selection::Pair,
                SelectionArg::Matching => Selection::Matching,
            };
            (build_config(common, mode, *delta)?, Some(selection))
        }
        Command::Explore { common, delta, gap } => {
            let mode = delta.map(|delta| RunMode::Explore { delta });
            (build_config(common, mode, *gap)?, None)
        }
    };
    let mut config = config;
    if let Some(s) = selection {
        config.selection = Some(s);
    }
    let records = if config.output.is_some() {
        run_experiment(&config, cli.threads)?
    } else {
        run_all_with_threads(&config, cli.threads)?
    };
    summarize(&config, &records)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
