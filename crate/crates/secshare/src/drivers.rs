//! Parallel drivers over the core computations. Every driver returns exactly
//! what the sequential core routine returns, whatever the thread count.

use rayon::prelude::*;

use secshare_core::classical::{enumerate_pairs, Enumeration};
use secshare_core::optics::experiment::{finish, run_chunk, ExperimentConfig, ExperimentCounts, ExperimentResult};
use secshare_core::protocol::{evaluate_canonical, score, Family, Scores, Task};
use secshare_core::seesaw::{seesaw_restart, SeesawReport};

use crate::error::{CliError, CliResult};

/// Environment variable holding the worker thread count.
pub const THREADS_VAR: &str = "SECSHARE_THREADS";

/// Thread count from [`THREADS_VAR`]; `None` leaves the choice to rayon.
pub fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::validation(format!("{THREADS_VAR} must be a positive integer, found {s:?}"))),
        },
    }
}

/// Runs `f` on a pool sized by [`THREADS_VAR`].
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads_from_env()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::validation(format!("cannot start worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// Simulated run with chunks spread over the workers.
pub fn experiment(cfg: &ExperimentConfig) -> CliResult<ExperimentResult> {
    cfg.validate()?;
    let parts: Vec<ExperimentCounts> =
        (0..cfg.chunk_count()).into_par_iter().map(|c| run_chunk(cfg, c)).collect::<Result<_, _>>()?;
    let counts = parts.iter().fold(ExperimentCounts::empty(cfg.task), |acc, p| acc.merge(p));
    Ok(finish(cfg, counts)?)
}

/// Exhaustive classical scan split by encoder pair.
pub fn classical(task: Task) -> Enumeration {
    let parts: Vec<Enumeration> = (0..256u32).into_par_iter().map(|fg| enumerate_pairs(task, fg..fg + 1)).collect();
    parts.into_iter().reduce(Enumeration::merge).expect("256 parts")
}

/// Seesaw restarts `0..restarts` spread over the workers.
pub fn seesaw(task: Task, restarts: u64, seed: u64) -> CliResult<SeesawReport> {
    if restarts == 0 {
        return Err(CliError::validation("at least one restart is required"));
    }
    let runs = (0..restarts).into_par_iter().map(|k| seesaw_restart(task, k, seed)).collect();
    Ok(SeesawReport::from_restarts(task, runs)?)
}

/// Exact canonical scores on a list of family members.
pub fn sweep(members: &[Family], task: Task) -> CliResult<Vec<Scores>> {
    Ok(members
        .par_iter()
        .map(|f| Ok(score(&evaluate_canonical(&f.state()?, task))))
        .collect::<Result<_, secshare_core::Error>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use secshare_core::classical::enumerate_deterministic;
    use secshare_core::optics::experiment::run_experiment;
    use secshare_core::protocol::THETA_STAR;

    #[test]
    fn parallel_experiment_matches_sequential() {
        let cfg = ExperimentConfig::new(Family::Partial { v: 0.72, theta: THETA_STAR }, Task::Deterministic, 200_000, 4);
        assert_eq!(experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
    }

    #[test]
    fn parallel_scan_matches_sequential() {
        let par = classical(Task::Deterministic);
        let seq = enumerate_deterministic(Task::Deterministic);
        assert_eq!((par.best, par.maximizers, par.scanned), (seq.best, seq.maximizers, seq.scanned));
        assert_eq!(par.argmax, seq.argmax);
        assert_eq!(par.witnesses, seq.witnesses);
    }

    #[test]
    fn parallel_seesaw_matches_sequential() {
        let par = seesaw(Task::Deterministic, 6, 3).unwrap();
        assert_eq!(par, secshare_core::seesaw::seesaw(Task::Deterministic, 6, 3).unwrap());
    }
}
