//! MAP-Elites over the (communicativeness, risk aversion) grid.
//!
//! Individual `k` draws all of its randomness (random genes or parent
//! selection and variation, then its evaluation games) from the stream
//! `(master, INDIVIDUAL, k)`. An incumbent challenged by individual `k` is
//! re-measured with the stream `(master, INCUMBENT_REEVAL, k)`.
//!
//! With `batch_size = 1` individuals are generated, evaluated and inserted
//! one at a time; this is the reference schedule. Larger batches generate
//! and evaluate `batch_size` individuals in parallel against the archive as
//! it stood at the start of the batch, then insert them in order. That is a
//! different schedule (parents are drawn from a slightly stale archive), but
//! it is still deterministic and independent of the thread count.

mod archive;
mod evaluate;

pub use archive::{Archive, ArchiveEntry, ArchiveError, ArchiveFile, Elite, InsertOutcome};
pub use evaluate::{evaluate, evaluate_seeds, Evaluation};

use crate::agent::{make_offspring, Chromosome};
use crate::descriptors::NicheCoord;
use crate::seeding::{derive_seed, stream, ARCHIVE_REEVAL, FROZEN_GAMES, INCUMBENT_REEVAL, INDIVIDUAL};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct QdConfig {
    pub total_individuals: u64,
    /// Individuals with uniformly random genes before variation starts.
    pub random_init_count: u64,
    pub games_per_eval: u32,
    pub master_seed: u64,
    /// Individuals evaluated per parallel batch; 1 is the serial reference.
    pub batch_size: u32,
    /// Individuals between checkpoint callbacks.
    pub checkpoint_every: u64,
    /// Evaluate every individual on the same game seeds (noise-free mode).
    pub frozen_eval_seeds: bool,
}

impl Default for QdConfig {
    fn default() -> Self {
        QdConfig {
            total_individuals: 1_000_000,
            random_init_count: 10_000,
            games_per_eval: 100,
            master_seed: 0,
            batch_size: 1,
            checkpoint_every: 10_000,
            frozen_eval_seeds: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QdError {
    #[error("random_init_count ({init}) exceeds total_individuals ({total})")]
    InitExceedsTotal { init: u64, total: u64 },
    #[error("games_per_eval must be at least 1")]
    NoGames,
    #[error("batch_size must be at least 1")]
    NoBatch,
    #[error("checkpoint_every must be at least 1")]
    NoCheckpoint,
}

impl QdConfig {
    pub fn validate(&self) -> Result<(), QdError> {
        if self.random_init_count > self.total_individuals {
            return Err(QdError::InitExceedsTotal { init: self.random_init_count, total: self.total_individuals });
        }
        if self.games_per_eval == 0 {
            return Err(QdError::NoGames);
        }
        if self.batch_size == 0 {
            return Err(QdError::NoBatch);
        }
        if self.checkpoint_every == 0 {
            return Err(QdError::NoCheckpoint);
        }
        Ok(())
    }

    /// The shared game seeds of frozen mode.
    pub fn frozen_seeds(&self) -> Vec<u64> {
        (0..self.games_per_eval as u64).map(|i| derive_seed(self.master_seed, &[FROZEN_GAMES, i])).collect()
    }
}

/// Counters for one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    /// Individuals produced and evaluated.
    pub evaluations: u64,
    /// Incumbent re-measurements (one per contested niche).
    pub reevaluations: u64,
    pub inserted: u64,
    pub replaced: u64,
    pub retained: u64,
    /// Individuals discarded because they never had a token to hint with or never played.
    pub unnichable: u64,
}

impl RunStats {
    pub fn games_played(&self, games_per_eval: u32) -> u64 {
        (self.evaluations + self.reevaluations) * games_per_eval as u64
    }
}

pub struct Checkpoint<'a> {
    pub produced: u64,
    pub archive: &'a Archive,
    pub stats: &'a RunStats,
}

pub struct RunResult {
    pub archive: Archive,
    pub stats: RunStats,
}

pub fn run_map_elites(config: &QdConfig) -> Result<RunResult, QdError> {
    run_map_elites_with(config, |_| {})
}

struct Candidate {
    k: u64,
    chromosome: Chromosome,
    eval: Evaluation,
    /// Snapshot incumbent's chromosome and its re-measurement, if the niche was taken.
    reeval: Option<(Chromosome, Evaluation)>,
}

/// Runs MAP-Elites, calling `on_checkpoint` every `checkpoint_every`
/// individuals and once at the end.
pub fn run_map_elites_with(
    config: &QdConfig,
    mut on_checkpoint: impl FnMut(Checkpoint<'_>),
) -> Result<RunResult, QdError> {
    config.validate()?;
    let frozen = config.frozen_eval_seeds.then(|| config.frozen_seeds());
    let measure = |c: &Chromosome, rng: &mut dyn rand::RngCore| match &frozen {
        Some(seeds) => evaluate_seeds(c, seeds),
        None => evaluate(c, config.games_per_eval, rng),
    };
    let reeval_for = |k: u64, c: &Chromosome| {
        let mut rng = stream(config.master_seed, &[INCUMBENT_REEVAL, k]);
        measure(c, &mut rng)
    };

    let mut archive = Archive::new();
    let mut stats = RunStats::default();
    let mut next_checkpoint = config.checkpoint_every;
    let mut k = 0u64;
    while k < config.total_individuals {
        let end = (k + config.batch_size as u64).min(config.total_individuals);
        let snapshot = &archive;
        let produce = |k: u64| {
            let mut rng = stream(config.master_seed, &[INDIVIDUAL, k]);
            let chromosome = if k < config.random_init_count || snapshot.is_empty() {
                Chromosome::random(&mut rng)
            } else {
                let (parent, mate) = pick_parents(snapshot, &mut rng);
                make_offspring(&parent, &mate, &mut rng)
            };
            let eval = measure(&chromosome, &mut rng);
            let reeval = eval
                .descriptor()
                .and_then(|d| snapshot.get(d.niche()))
                .map(|inc| (inc.chromosome, reeval_for(k, &inc.chromosome)));
            Candidate { k, chromosome, eval, reeval }
        };
        let batch: Vec<Candidate> = if end - k == 1 {
            vec![produce(k)]
        } else {
            (k..end).into_par_iter().map(produce).collect()
        };

        for cand in batch {
            stats.evaluations += 1;
            let lineage = derive_seed(config.master_seed, &[INDIVIDUAL, cand.k]);
            let Some(elite) = Elite::from_evaluation(cand.chromosome, &cand.eval, lineage) else {
                stats.unnichable += 1;
                continue;
            };
            let outcome = archive.try_insert_with(elite, |inc| match cand.reeval {
                Some((c, e)) if c == inc.chromosome => e,
                _ => reeval_for(cand.k, &inc.chromosome),
            });
            match outcome {
                InsertOutcome::Inserted => stats.inserted += 1,
                InsertOutcome::Replaced { .. } => {
                    stats.reevaluations += 1;
                    stats.replaced += 1;
                }
                InsertOutcome::Retained { .. } => {
                    stats.reevaluations += 1;
                    stats.retained += 1;
                }
            }
        }
        k = end;
        if k >= next_checkpoint && k < config.total_individuals {
            on_checkpoint(Checkpoint { produced: k, archive: &archive, stats: &stats });
            next_checkpoint = (k / config.checkpoint_every + 1) * config.checkpoint_every;
        }
    }
    on_checkpoint(Checkpoint { produced: k, archive: &archive, stats: &stats });
    Ok(RunResult { archive, stats })
}

/// A uniformly random elite and a mate from a different random niche when one exists.
fn pick_parents<R: Rng + ?Sized>(archive: &Archive, rng: &mut R) -> (Chromosome, Chromosome) {
    let niches = archive.occupied_niches();
    let i = rng.random_range(0..niches.len());
    let j = if niches.len() > 1 {
        let j = rng.random_range(0..niches.len() - 1);
        if j >= i {
            j + 1
        } else {
            j
        }
    } else {
        i
    };
    let get = |n: NicheCoord| archive.get(n).expect("occupied").chromosome;
    (get(niches[i]), get(niches[j]))
}

/// One elite's fresh measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReevalRecord {
    pub niche: NicheCoord,
    pub previous_fitness: f64,
    pub fitness: f64,
    pub games: u32,
    pub sd: f64,
    pub sem: f64,
}

/// Replaces every elite's fitness with a fresh `n_games` measurement.
/// Niche keys and chromosomes stay as they are.
pub fn reevaluate_archive(archive: &Archive, n_games: u32, seed: u64) -> (Archive, Vec<ReevalRecord>) {
    assert!(n_games >= 1, "re-evaluation needs at least one game");
    let jobs: Vec<(NicheCoord, Elite)> = archive.iter().map(|(n, e)| (n, *e)).collect();
    let measured: Vec<(NicheCoord, Elite, Evaluation)> = jobs
        .into_par_iter()
        .map(|(n, e)| {
            let mut rng = stream(seed, &[ARCHIVE_REEVAL, n.index() as u64]);
            (n, e, evaluate(&e.chromosome, n_games, &mut rng))
        })
        .collect();
    let mut out = Archive::new();
    let mut records = Vec::with_capacity(measured.len());
    for (niche, e, eval) in measured {
        records.push(ReevalRecord {
            niche,
            previous_fitness: e.fitness,
            fitness: eval.fitness,
            games: eval.games,
            sd: eval.score_sd,
            sem: eval.sem(),
        });
        out.put(Elite { fitness: eval.fitness, games_played: eval.games, ..e });
    }
    (out, records)
}
