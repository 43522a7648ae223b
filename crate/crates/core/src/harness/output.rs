use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{AlgoId, ExperimentConfig, RunOutcome, RunRecord};
use crate::error::{Error, Result};

/// Order statistic at `percent` of sorted values: element `⌈percent·n/100⌉`
/// (one-based), or the first element when that rank is zero.
pub fn nearest_rank<T: Copy>(sorted: &[T], percent: u32) -> T {
    assert!(!sorted.is_empty(), "nearest rank of an empty sample");
    let n = sorted.len();
    let rank = (percent as usize * n).div_ceil(100).max(1);
    sorted[rank.min(n) - 1]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileRow {
    pub algo: AlgoId,
    pub t: u64,
    pub median: f64,
    pub p5: f64,
    pub p95: f64,
}

/// Quantiles of cumulative regret at every checkpoint shared by all
/// successful runs.
pub fn aggregate_regret(records: &[RunRecord]) -> Vec<QuantileRow> {
    let mut by_t: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let mut ok = 0;
    let mut algo = None;
    for r in records {
        if let RunOutcome::Regret { checkpoints } = &r.outcome {
            ok += 1;
            algo = Some(r.algo);
            for &(t, x) in checkpoints {
                by_t.entry(t).or_default().push(x);
            }
        }
    }
    let Some(algo) = algo else { return Vec::new() };
    by_t.into_iter()
        .filter(|(_, v)| v.len() == ok)
        .map(|(t, mut v)| {
            v.sort_by(f64::total_cmp);
            QuantileRow {
                algo,
                t,
                median: nearest_rank(&v, 50),
                p5: nearest_rank(&v, 5),
                p95: nearest_rank(&v, 95),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExploreAggregate {
    pub algo: AlgoId,
    pub runs: usize,
    pub failed_runs: usize,
    pub median_tau: u64,
    pub p5_tau: u64,
    pub p95_tau: u64,
    /// Fraction of completed runs that returned a wrong answer.
    pub failure_rate: f64,
}

pub fn aggregate_explore(records: &[RunRecord]) -> Option<ExploreAggregate> {
    let done: Vec<(u64, bool)> = records.iter().filter_map(RunRecord::explore).collect();
    if done.is_empty() {
        return None;
    }
    let mut taus: Vec<u64> = done.iter().map(|d| d.0).collect();
    taus.sort_unstable();
    let wrong = done.iter().filter(|d| !d.1).count();
    Some(ExploreAggregate {
        algo: records[0].algo,
        runs: done.len(),
        failed_runs: records.len() - done.len(),
        median_tau: nearest_rank(&taus, 50),
        p5_tau: nearest_rank(&taus, 5),
        p95_tau: nearest_rank(&taus, 95),
        failure_rate: wrong as f64 / done.len() as f64,
    })
}

#[derive(Serialize)]
struct RegretRow {
    run_id: usize,
    algo: AlgoId,
    t: u64,
    cum_regret: f64,
}

#[derive(Serialize)]
struct ExploreRow {
    run_id: usize,
    algo: AlgoId,
    tau: u64,
    correct: bool,
}

#[derive(Serialize)]
struct StatusRow<'a> {
    run_id: usize,
    algo: AlgoId,
    seed: u64,
    instance_digest: &'a str,
    status: &'a str,
    message: &'a str,
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parameter(format!("csv: {other:?}")),
    }
}

/// Writes `config.json`, `records.json`, `status.csv` and either
/// `runs.csv` + `aggregate.csv` (regret) or `explore.csv` +
/// `explore_aggregate.json` (exploration) into `dir`.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, records: &[RunRecord]) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("config.json"),
        serde_json::to_string_pretty(config)?,
    )?;
    fs::write(
        dir.join("records.json"),
        serde_json::to_string_pretty(records)?,
    )?;
    write_csv(
        &dir.join("status.csv"),
        records.iter().map(|r| StatusRow {
            run_id: r.run_id,
            algo: r.algo,
            seed: r.seed,
            instance_digest: &r.instance_digest,
            status: r.status(),
            message: match &r.outcome {
                RunOutcome::Failed { message } => message,
                _ => "",
            },
        }),
    )?;
    match config.mode {
        super::RunMode::Regret { .. } => {
            let rows = records.iter().flat_map(|r| match &r.outcome {
                RunOutcome::Regret { checkpoints } => checkpoints
                    .iter()
                    .map(|&(t, cum_regret)| RegretRow {
                        run_id: r.run_id,
                        algo: r.algo,
                        t,
                        cum_regret,
                    })
                    .collect(),
                _ => Vec::new(),
            });
            write_csv(&dir.join("runs.csv"), rows)?;
            write_csv(&dir.join("aggregate.csv"), aggregate_regret(records))?;
        }
        super::RunMode::Explore { .. } => {
            let rows = records.iter().filter_map(|r| {
                r.explore().map(|(tau, correct)| ExploreRow {
                    run_id: r.run_id,
                    algo: r.algo,
                    tau,
                    correct,
                })
            });
            write_csv(&dir.join("explore.csv"), rows)?;
            fs::write(
                dir.join("explore_aggregate.json"),
                serde_json::to_string_pretty(&aggregate_explore(records))?,
            )?;
        }
    }
    Ok(())
}
