//! Running complete games between rule-list agents.

use crate::agent::{decide_in, Chromosome, Decision};
use crate::descriptors::BehaviorStats;
use crate::game::{Action, GameState, PlayerView, TerminalReason};
use crate::rules::RuleContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameOutcome {
    pub score: u8,
    pub turns: u32,
    pub terminal: TerminalReason,
}

/// Plays one game; `observe(seat, ctx, decision)` sees every decision before it is applied.
pub fn play_game_observed<F>(seed: u64, seats: [&Chromosome; 2], mut observe: F) -> GameOutcome
where
    F: FnMut(usize, &RuleContext<'_>, &Decision),
{
    let mut state = GameState::new(seed);
    while !state.is_terminal() {
        let seat = state.current_player();
        let view = state.view_of(seat);
        let ctx = RuleContext::new(&view);
        let decision = decide_in(seats[seat], &ctx);
        observe(seat, &ctx, &decision);
        state.apply(decision.action).expect("agents only produce legal actions");
    }
    GameOutcome {
        score: state.score(),
        turns: state.turn(),
        terminal: state.terminal_reason().expect("loop exits on terminal states"),
    }
}

pub fn play_game(seed: u64, seats: [&Chromosome; 2]) -> GameOutcome {
    play_game_observed(seed, seats, |_, _, _| {})
}

/// Plays one game, pooling both seats' behavior into `stats`.
pub fn play_game_with_stats(seed: u64, seats: [&Chromosome; 2], stats: &mut BehaviorStats) -> GameOutcome {
    play_game_observed(seed, seats, |_, ctx, d| record_decision(stats, ctx, d))
}

#[inline]
pub(crate) fn record_decision(stats: &mut BehaviorStats, ctx: &RuleContext<'_>, d: &Decision) {
    let ratio = match d.action {
        Action::Play { slot } => ctx.beliefs().get(slot as usize).map(|b| b.playable),
        _ => None,
    };
    stats.record(ctx.view, d.action, ratio);
}

/// Every pre-action view of a game, in turn order, with the acting seat.
pub fn game_views(seed: u64, seats: [&Chromosome; 2]) -> Vec<(usize, PlayerView)> {
    let mut out = Vec::with_capacity(80);
    play_game_observed(seed, seats, |seat, ctx, _| out.push((seat, ctx.view.clone())));
    out
}
