use crate::agent::Chromosome;
use crate::descriptors::{BehaviorDescriptor, BehaviorStats};
use crate::sim::play_game_with_stats;
use rand::Rng;

/// Self-play measurement of one chromosome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    /// Mean final score.
    pub fitness: f64,
    pub games: u32,
    /// Sample standard deviation of the per-game scores.
    pub score_sd: f64,
    pub stats: BehaviorStats,
}

impl Evaluation {
    pub fn descriptor(&self) -> Option<BehaviorDescriptor> {
        self.stats.finalize()
    }

    pub fn sem(&self) -> f64 {
        self.score_sd / (self.games as f64).sqrt()
    }
}

/// Plays `n_games` self-play games with seeds drawn from `rng`.
pub fn evaluate<R: Rng + ?Sized>(chromosome: &Chromosome, n_games: u32, rng: &mut R) -> Evaluation {
    let seeds: Vec<u64> = (0..n_games).map(|_| rng.next_u64()).collect();
    evaluate_seeds(chromosome, &seeds)
}

/// Plays one self-play game per seed; both seats' behavior is pooled.
pub fn evaluate_seeds(chromosome: &Chromosome, seeds: &[u64]) -> Evaluation {
    assert!(!seeds.is_empty(), "evaluation needs at least one game");
    let mut stats = BehaviorStats::default();
    let (mut sum, mut sum_sq) = (0u64, 0u64);
    for &seed in seeds {
        let score = play_game_with_stats(seed, [chromosome, chromosome], &mut stats).score as u64;
        sum += score;
        sum_sq += score * score;
    }
    let n = seeds.len() as u64;
    let var = if n > 1 {
        // exact integer numerator: n * sum(x^2) - (sum x)^2
        let num = (n as u128 * sum_sq as u128) - (sum as u128 * sum as u128);
        num as f64 / (n as f64 * (n - 1) as f64)
    } else {
        0.0
    };
    Evaluation { fitness: sum as f64 / n as f64, games: n as u32, score_sd: var.sqrt(), stats }
}
