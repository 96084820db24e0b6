//! Game-trace records: a seed, the ordered actions, and per-turn counters.
//! One JSON object per game; replaying the actions from the seed must
//! reproduce every snapshot.

use crate::agent::Chromosome;
use crate::game::{Action, GameError, GameState, TerminalReason};
use crate::sim::play_game_observed;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnSnapshot {
    pub score: u8,
    pub info_tokens: u8,
    pub lives: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameTrace {
    pub seed: u64,
    pub actions: Vec<Action>,
    /// Counters after each action.
    pub snapshots: Vec<TurnSnapshot>,
    pub final_score: u8,
    pub terminal_reason: Option<TerminalReason>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("turn {turn}: {source}")]
    Illegal { turn: usize, source: GameError },
    #[error("turn {turn}: snapshot mismatch (recorded {recorded:?}, replayed {replayed:?})")]
    Snapshot { turn: usize, recorded: TurnSnapshot, replayed: TurnSnapshot },
    #[error("{actions} actions but {snapshots} snapshots")]
    Length { actions: usize, snapshots: usize },
    #[error("replay ends with score {replayed}, trace records {recorded}")]
    FinalScore { recorded: u8, replayed: u8 },
}

fn snapshot(state: &GameState) -> TurnSnapshot {
    TurnSnapshot { score: state.score(), info_tokens: state.info_tokens(), lives: state.lives() }
}

impl GameTrace {
    /// Applies `actions` from the seeded deal and records the result.
    pub fn from_actions(seed: u64, actions: &[Action]) -> Result<(GameTrace, GameState), ReplayError> {
        let mut state = GameState::new(seed);
        let mut snapshots = Vec::with_capacity(actions.len());
        for (turn, &a) in actions.iter().enumerate() {
            state.apply(a).map_err(|source| ReplayError::Illegal { turn, source })?;
            snapshots.push(snapshot(&state));
        }
        let trace = GameTrace {
            seed,
            actions: actions.to_vec(),
            snapshots,
            final_score: state.score(),
            terminal_reason: state.terminal_reason(),
        };
        Ok((trace, state))
    }

    /// Records a full game between two agents.
    pub fn record(seed: u64, seats: [&Chromosome; 2]) -> GameTrace {
        let mut actions = Vec::new();
        play_game_observed(seed, seats, |_, _, d| actions.push(d.action));
        GameTrace::from_actions(seed, &actions).expect("agent games are legal").0
    }

    /// Re-runs the trace, checking every snapshot, and returns the final state.
    pub fn replay(&self) -> Result<GameState, ReplayError> {
        if self.actions.len() != self.snapshots.len() {
            return Err(ReplayError::Length { actions: self.actions.len(), snapshots: self.snapshots.len() });
        }
        let mut state = GameState::new(self.seed);
        for (turn, (&a, &recorded)) in self.actions.iter().zip(&self.snapshots).enumerate() {
            state.apply(a).map_err(|source| ReplayError::Illegal { turn, source })?;
            let replayed = snapshot(&state);
            if replayed != recorded {
                return Err(ReplayError::Snapshot { turn, recorded, replayed });
            }
        }
        if state.score() != self.final_score {
            return Err(ReplayError::FinalScore { recorded: self.final_score, replayed: state.score() });
        }
        Ok(state)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<GameTrace> {
        serde_json::from_str(s)
    }
}
