//! Post-hoc analyses of elite pools: cross-play, best partners, distance
//! profiles, Hamming distance, action similarity and cross-run comparison.
//!
//! Every game seed is derived from a caller-supplied seed and niche indices,
//! so results do not depend on thread count or on which other agents are in
//! the pool.

use crate::agent::{decide, Chromosome};
use crate::descriptors::NicheCoord;
use crate::game::{Action, PlayerView};
use crate::qd::{evaluate, Archive, Elite};
use crate::seeding::{stream, CORPUS, CROSSPLAY, CROSS_RUN};
use crate::sim::{game_views, play_game};
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::io::{BufRead, Write};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("the state corpus is empty")]
    EmptyCorpus,
    #[error("the agent pool is empty")]
    EmptyPool,
    #[error("corpus line {line}: {source}")]
    CorpusLine { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Positions at which two chromosomes differ.
pub fn hamming(a: &Chromosome, b: &Chromosome) -> u32 {
    a.genes().iter().zip(b.genes()).filter(|(x, y)| x != y).count() as u32
}

/// Mean score of `a` and `b` together over `games` games: `(games + 1) / 2`
/// with `a` in seat 0, the rest with `b` in seat 0.
pub fn paired_mean<R: Rng + ?Sized>(a: &Chromosome, b: &Chromosome, games: u32, rng: &mut R) -> f64 {
    assert!(games >= 1, "pairing needs at least one game");
    let first = games.div_ceil(2);
    let mut total = 0u64;
    for g in 0..games {
        let seats = if g < first { [a, b] } else { [b, a] };
        total += play_game(rng.next_u64(), seats).score as u64;
    }
    total as f64 / games as f64
}

/// Symmetric matrix of pair scores over a pool. The diagonal is self-play.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossplayMatrix {
    pub niches: Vec<NicheCoord>,
    pub games_per_pair: u32,
    /// Row-major `n × n`.
    pub cells: Vec<f64>,
}

impl CrossplayMatrix {
    pub fn len(&self) -> usize {
        self.niches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.niches.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.cells[i * self.len()..(i + 1) * self.len()]
    }

    /// Each agent's mean over the whole pool, itself included.
    pub fn agent_means(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.row(i).iter().sum::<f64>() / self.len() as f64).collect()
    }

    pub fn self_play_mean(&self) -> f64 {
        (0..self.len()).map(|i| self.get(i, i)).sum::<f64>() / self.len() as f64
    }

    /// Mean over distinct pairs; `None` for a pool of one.
    pub fn cross_play_mean(&self) -> Option<f64> {
        let n = self.len();
        (n > 1).then(|| {
            let off: f64 = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| self.get(i, j)).sum();
            off / (n * (n - 1) / 2) as f64
        })
    }

    pub fn games_planned(pool: usize, games_per_pair: u32) -> u64 {
        (pool * (pool + 1) / 2) as u64 * games_per_pair as u64
    }
}

/// Plays every unordered pair of the pool (and every agent with itself).
pub fn crossplay(pool: &[Elite], games_per_pair: u32, seed: u64) -> Result<CrossplayMatrix, HarnessError> {
    if pool.is_empty() {
        return Err(HarnessError::EmptyPool);
    }
    let n = pool.len();
    let niches: Vec<NicheCoord> = pool.iter().map(Elite::niche).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let scores: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut rng = stream(seed, &[CROSSPLAY, niches[i].index() as u64, niches[j].index() as u64]);
            paired_mean(&pool[i].chromosome, &pool[j].chromosome, games_per_pair, &mut rng)
        })
        .collect();
    let mut cells = vec![0.0; n * n];
    for (&(i, j), s) in pairs.iter().zip(scores) {
        cells[i * n + j] = s;
        cells[j * n + i] = s;
    }
    Ok(CrossplayMatrix { niches, games_per_pair, cells })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestPartners {
    /// `partner[i]` is the pool index of agent `i`'s best partner.
    pub partner: Vec<usize>,
    /// How many agents chose each agent.
    pub chosen: Vec<u32>,
}

/// Row-wise argmax; ties go to the lower niche.
pub fn best_partners(m: &CrossplayMatrix) -> BestPartners {
    let n = m.len();
    let partner: Vec<usize> = (0..n)
        .map(|i| {
            (0..n)
                .reduce(|b, j| {
                    let (sb, sj) = (m.get(i, b), m.get(i, j));
                    if sj > sb || (sj == sb && m.niches[j] < m.niches[b]) {
                        j
                    } else {
                        b
                    }
                })
                .expect("non-empty pool")
        })
        .collect();
    let mut chosen = vec![0u32; n];
    for &p in &partner {
        chosen[p] += 1;
    }
    BestPartners { partner, chosen }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceBucket {
    pub distance: u32,
    pub mean: f64,
    pub n: u64,
}

/// Mean pair score by Manhattan distance between niches, over unordered
/// pairs with the diagonal as distance 0. Empty distances are omitted.
pub fn manhattan_profile(m: &CrossplayMatrix) -> Vec<DistanceBucket> {
    let max = 2 * (crate::descriptors::GRID_SIZE as u32 - 1);
    let mut sums = vec![(0.0f64, 0u64); max as usize + 1];
    for i in 0..m.len() {
        for j in i..m.len() {
            let d = m.niches[i].manhattan(m.niches[j]) as usize;
            sums[d].0 += m.get(i, j);
            sums[d].1 += 1;
        }
    }
    sums.into_iter()
        .enumerate()
        .filter(|(_, (_, n))| *n > 0)
        .map(|(d, (s, n))| DistanceBucket { distance: d as u32, mean: s / n as f64, n })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spearman {
    pub rho: f64,
    /// Two-sided, from the t approximation with `n - 2` degrees of freedom.
    pub p_value: f64,
    pub n: usize,
}

fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties. `None` with fewer
/// than three points or a constant input.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<Spearman> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 3 {
        return None;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean) * (a - mean);
        syy += (b - mean) * (b - mean);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
        (2.0 * dist.cdf(-t.abs())).min(1.0)
    };
    Some(Spearman { rho, p_value, n })
}

/// One decision point seen during corpus collection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub view: PlayerView,
    /// Niche of the agent that produced the game.
    pub niche: NicheCoord,
    pub game: u32,
    pub turn: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StateCorpus {
    pub records: Vec<CorpusRecord>,
}

impl StateCorpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn mean_legal_actions(&self) -> Option<f64> {
        (!self.is_empty()).then(|| {
            let total: usize = self.records.iter().map(|r| r.view.legal_actions().len()).sum();
            total as f64 / self.len() as f64
        })
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<StateCorpus, HarnessError> {
        let mut records = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line).map_err(|source| HarnessError::CorpusLine { line: i + 1, source })?);
        }
        Ok(StateCorpus { records })
    }
}

/// Every pre-action view, both seats, of `games_each` self-play games per elite.
pub fn collect_corpus(pool: &[Elite], games_each: u32, seed: u64) -> StateCorpus {
    let per_elite: Vec<Vec<CorpusRecord>> = pool
        .par_iter()
        .map(|e| {
            let niche = e.niche();
            let mut rng = stream(seed, &[CORPUS, niche.index() as u64]);
            let mut out = Vec::new();
            for game in 0..games_each {
                let views = game_views(rng.next_u64(), [&e.chromosome, &e.chromosome]);
                out.extend(views.into_iter().enumerate().map(|(turn, (_, view))| CorpusRecord {
                    view,
                    niche,
                    game,
                    turn: turn as u32,
                }));
            }
            out
        })
        .collect();
    StateCorpus { records: per_elite.into_iter().flatten().collect() }
}

/// Fraction of corpus views on which both agents pick the identical action.
pub fn action_similarity(a: &Chromosome, b: &Chromosome, corpus: &StateCorpus) -> Result<f64, HarnessError> {
    if corpus.is_empty() {
        return Err(HarnessError::EmptyCorpus);
    }
    if a == b {
        return Ok(1.0);
    }
    let same = corpus.records.iter().filter(|r| decide(a, &r.view) == decide(b, &r.view)).count();
    Ok(same as f64 / corpus.len() as f64)
}

/// The actions both agents take on each view, for inspection.
pub fn action_pairs(a: &Chromosome, b: &Chromosome, corpus: &StateCorpus) -> Vec<(Action, Action)> {
    corpus.records.iter().map(|r| (decide(a, &r.view), decide(b, &r.view))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossRunRow {
    pub niche: NicheCoord,
    /// Corresponding elites playing together, seat-balanced.
    pub paired_score: f64,
    pub self_play_a: f64,
    pub self_play_b: f64,
    pub hamming: u32,
    pub similarity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossRunReport {
    pub games: u32,
    pub rows: Vec<CrossRunRow>,
    pub only_a: Vec<NicheCoord>,
    pub only_b: Vec<NicheCoord>,
    pub mean_paired_score: Option<f64>,
    /// Mean over both runs' self-play measurements.
    pub mean_self_play: Option<f64>,
    pub mean_hamming: Option<f64>,
    pub mean_similarity: Option<f64>,
}

/// Compares corresponding elites (same niche) of two archives. Each common
/// niche gets `games` paired games and `games` fresh self-play games per side.
pub fn cross_run_report(
    run_a: &Archive,
    run_b: &Archive,
    games: u32,
    seed: u64,
    corpus: &StateCorpus,
) -> Result<CrossRunReport, HarnessError> {
    let common: Vec<(NicheCoord, Elite, Elite)> =
        run_a.iter().filter_map(|(n, a)| run_b.get(n).map(|b| (n, *a, *b))).collect();
    if !common.is_empty() && corpus.is_empty() {
        return Err(HarnessError::EmptyCorpus);
    }
    let rows: Vec<CrossRunRow> = common
        .par_iter()
        .map(|(niche, a, b)| {
            let key = niche.index() as u64;
            let mut rng = stream(seed, &[CROSS_RUN, key, 0]);
            let paired_score = paired_mean(&a.chromosome, &b.chromosome, games, &mut rng);
            let self_play_a = evaluate(&a.chromosome, games, &mut stream(seed, &[CROSS_RUN, key, 1])).fitness;
            let self_play_b = evaluate(&b.chromosome, games, &mut stream(seed, &[CROSS_RUN, key, 2])).fitness;
            CrossRunRow {
                niche: *niche,
                paired_score,
                self_play_a,
                self_play_b,
                hamming: hamming(&a.chromosome, &b.chromosome),
                similarity: action_similarity(&a.chromosome, &b.chromosome, corpus).expect("corpus checked"),
            }
        })
        .collect();
    let only = |x: &Archive, y: &Archive| x.occupied_niches().into_iter().filter(|n| y.get(*n).is_none()).collect();
    let mean = |f: &dyn Fn(&CrossRunRow) -> f64| {
        (!rows.is_empty()).then(|| rows.iter().map(f).sum::<f64>() / rows.len() as f64)
    };
    Ok(CrossRunReport {
        games,
        mean_paired_score: mean(&|r| r.paired_score),
        mean_self_play: mean(&|r| (r.self_play_a + r.self_play_b) / 2.0),
        mean_hamming: mean(&|r| r.hamming as f64),
        mean_similarity: mean(&|r| r.similarity),
        only_a: only(run_a, run_b),
        only_b: only(run_b, run_a),
        rows,
    })
}
