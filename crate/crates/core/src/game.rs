//! Two-player Hanabi: state, legal moves, turn resolution and player views.
//!
//! Hands are ordered oldest-first: slot 0 is the card held longest, and a
//! freshly drawn card is appended at the end. The deck is drawn from its end.

use crate::belief::SlotKnowledge;
use crate::card::{Card, CardCounts, Color, MAX_RANK, NUM_COLORS};
use arrayvec::ArrayVec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

pub const NUM_PLAYERS: usize = 2;
pub const HAND_SIZE: usize = 5;
pub const MAX_INFO_TOKENS: u8 = 8;
pub const MAX_LIVES: u8 = 3;
pub const DECK_SIZE: usize = 50;
pub const MAX_SCORE: u8 = 25;

pub type Hand = ArrayVec<Card, HAND_SIZE>;
pub type HandKnowledge = ArrayVec<SlotKnowledge, HAND_SIZE>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Play { slot: u8 },
    Discard { slot: u8 },
    HintColor { target: u8, color: Color },
    HintRank { target: u8, rank: u8 },
}

impl Action {
    pub fn is_hint(self) -> bool {
        matches!(self, Action::HintColor { .. } | Action::HintRank { .. })
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Action::Play { slot } => write!(f, "play {slot}"),
            Action::Discard { slot } => write!(f, "discard {slot}"),
            Action::HintColor { target, color } => write!(f, "hint p{target} {color}"),
            Action::HintRank { target, rank } => write!(f, "hint p{target} {rank}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TerminalReason {
    Victory,
    LivesExhausted,
    DeckExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TurnOutcome {
    Played { card: Card, success: bool, drew: bool },
    Discarded { card: Card, drew: bool },
    /// `touched` is a bitmask over the target's slots.
    Hinted { touched: u8 },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("game over")]
    GameOver,
    #[error("slot {slot} is empty (hand holds {hand_len} cards)")]
    EmptySlot { slot: u8, hand_len: usize },
    #[error("cannot discard with all {MAX_INFO_TOKENS} information tokens available")]
    TokensFull,
    #[error("no information token available for a hint")]
    NoInfoTokens,
    #[error("hint target {target} is not the partner of player {actor}")]
    BadTarget { target: u8, actor: u8 },
    #[error("hint touches no card in the target's hand")]
    EmptyHint,
    #[error("rank {0} is outside 1..=5")]
    BadRank(u8),
}

/// Authoritative state of a game in progress.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GameState {
    deck: ArrayVec<Card, DECK_SIZE>,
    hands: [Hand; NUM_PLAYERS],
    knowledge: [HandKnowledge; NUM_PLAYERS],
    fireworks: [u8; NUM_COLORS],
    discard: CardCounts,
    info_tokens: u8,
    lives: u8,
    current_player: u8,
    final_turns_remaining: Option<u8>,
    terminal: Option<TerminalReason>,
    turn: u32,
}

impl GameState {
    /// Shuffles a standard deck with `seed` and deals five cards to each player.
    pub fn new(seed: u64) -> GameState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cards = CardCounts::STANDARD.to_cards();
        cards.shuffle(&mut rng);
        GameState::from_deck(cards.into_iter().collect())
    }

    /// Builds a fresh game from an explicit deck, listed in draw order
    /// (`deck[0]` is drawn first). Players are dealt alternately, player 0 first.
    pub fn from_deck_order(draw_order: &[Card]) -> GameState {
        GameState::from_deck(draw_order.iter().rev().copied().collect())
    }

    fn from_deck(deck: ArrayVec<Card, DECK_SIZE>) -> GameState {
        let mut state = GameState {
            deck,
            hands: Default::default(),
            knowledge: Default::default(),
            fireworks: [0; NUM_COLORS],
            discard: CardCounts::EMPTY,
            info_tokens: MAX_INFO_TOKENS,
            lives: MAX_LIVES,
            current_player: 0,
            final_turns_remaining: None,
            terminal: None,
            turn: 0,
        };
        for _ in 0..HAND_SIZE {
            for p in 0..NUM_PLAYERS {
                state.draw(p);
            }
        }
        state
    }

    fn draw(&mut self, player: usize) -> bool {
        match self.deck.pop() {
            Some(card) => {
                self.hands[player].push(card);
                self.knowledge[player].push(SlotKnowledge::UNKNOWN);
                true
            }
            None => false,
        }
    }

    pub fn score(&self) -> u8 {
        self.fireworks.iter().sum()
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal.is_some()
    }

    pub fn terminal_reason(&self) -> Option<TerminalReason> {
        self.terminal
    }

    pub fn current_player(&self) -> usize {
        self.current_player as usize
    }

    pub fn info_tokens(&self) -> u8 {
        self.info_tokens
    }

    pub fn lives(&self) -> u8 {
        self.lives
    }

    pub fn fireworks(&self) -> [u8; NUM_COLORS] {
        self.fireworks
    }

    pub fn discard(&self) -> &CardCounts {
        &self.discard
    }

    pub fn deck_size(&self) -> usize {
        self.deck.len()
    }

    /// Cards still to be drawn, next draw first.
    pub fn deck_in_draw_order(&self) -> Vec<Card> {
        self.deck.iter().rev().copied().collect()
    }

    pub fn hand(&self, player: usize) -> &[Card] {
        &self.hands[player]
    }

    pub fn knowledge(&self, player: usize) -> &[SlotKnowledge] {
        &self.knowledge[player]
    }

    pub fn final_turns_remaining(&self) -> Option<u8> {
        self.final_turns_remaining
    }

    /// Number of actions applied so far.
    pub fn turn(&self) -> u32 {
        self.turn
    }

    /// Every card of the game, wherever it currently sits. Constant over a game.
    pub fn card_multiset(&self) -> CardCounts {
        let mut all = self.discard;
        for c in self.deck.iter().chain(self.hands.iter().flatten()) {
            all.add(*c);
        }
        for (ci, &top) in self.fireworks.iter().enumerate() {
            for rank in 1..=top {
                all.add(Card::new(Color::from_index(ci), rank));
            }
        }
        all
    }

    pub fn legal_actions(&self) -> Result<Vec<Action>, GameError> {
        if self.is_terminal() {
            return Err(GameError::GameOver);
        }
        Ok(self.view_of(self.current_player()).legal_actions())
    }

    /// Checks `action` against the rules for the player to move.
    pub fn check_legal(&self, action: Action) -> Result<(), GameError> {
        if self.is_terminal() {
            return Err(GameError::GameOver);
        }
        let actor = self.current_player;
        match action {
            Action::Play { slot } => self.check_slot(actor, slot),
            Action::Discard { slot } => {
                self.check_slot(actor, slot)?;
                if self.info_tokens >= MAX_INFO_TOKENS {
                    return Err(GameError::TokensFull);
                }
                Ok(())
            }
            Action::HintColor { target, color } => {
                self.check_hint(actor, target)?;
                if self.hands[target as usize].iter().any(|c| c.color == color) {
                    Ok(())
                } else {
                    Err(GameError::EmptyHint)
                }
            }
            Action::HintRank { target, rank } => {
                if !(1..=MAX_RANK).contains(&rank) {
                    return Err(GameError::BadRank(rank));
                }
                self.check_hint(actor, target)?;
                if self.hands[target as usize].iter().any(|c| c.rank == rank) {
                    Ok(())
                } else {
                    Err(GameError::EmptyHint)
                }
            }
        }
    }

    fn check_slot(&self, actor: u8, slot: u8) -> Result<(), GameError> {
        let hand_len = self.hands[actor as usize].len();
        if (slot as usize) < hand_len {
            Ok(())
        } else {
            Err(GameError::EmptySlot { slot, hand_len })
        }
    }

    fn check_hint(&self, actor: u8, target: u8) -> Result<(), GameError> {
        if target as usize >= NUM_PLAYERS || target == actor {
            return Err(GameError::BadTarget { target, actor });
        }
        if self.info_tokens == 0 {
            return Err(GameError::NoInfoTokens);
        }
        Ok(())
    }

    /// Applies `action` for the player to move, in place.
    pub fn apply(&mut self, action: Action) -> Result<TurnOutcome, GameError> {
        self.check_legal(action)?;
        let actor = self.current_player as usize;
        let countdown_before = self.final_turns_remaining;

        let outcome = match action {
            Action::Play { slot } => {
                let card = self.take(actor, slot);
                let ci = card.color.index();
                let success = self.fireworks[ci] + 1 == card.rank;
                if success {
                    self.fireworks[ci] += 1;
                    if card.rank == MAX_RANK && self.info_tokens < MAX_INFO_TOKENS {
                        self.info_tokens += 1;
                    }
                } else {
                    self.discard.add(card);
                    self.lives -= 1;
                }
                let drew = self.draw(actor);
                TurnOutcome::Played { card, success, drew }
            }
            Action::Discard { slot } => {
                let card = self.take(actor, slot);
                self.discard.add(card);
                self.info_tokens += 1;
                let drew = self.draw(actor);
                TurnOutcome::Discarded { card, drew }
            }
            Action::HintColor { target, color } => {
                self.info_tokens -= 1;
                let t = target as usize;
                let mut touched = 0u8;
                for (i, (card, know)) in
                    self.hands[t].iter().zip(self.knowledge[t].iter_mut()).enumerate()
                {
                    let hit = card.color == color;
                    know.apply_color_hint(color, hit);
                    touched |= (hit as u8) << i;
                }
                TurnOutcome::Hinted { touched }
            }
            Action::HintRank { target, rank } => {
                self.info_tokens -= 1;
                let t = target as usize;
                let mut touched = 0u8;
                for (i, (card, know)) in
                    self.hands[t].iter().zip(self.knowledge[t].iter_mut()).enumerate()
                {
                    let hit = card.rank == rank;
                    know.apply_rank_hint(rank, hit);
                    touched |= (hit as u8) << i;
                }
                TurnOutcome::Hinted { touched }
            }
        };

        self.final_turns_remaining = match countdown_before {
            Some(n) => Some(n - 1),
            None if self.deck.is_empty() => Some(NUM_PLAYERS as u8),
            None => None,
        };
        self.terminal = if self.lives == 0 {
            Some(TerminalReason::LivesExhausted)
        } else if self.score() == MAX_SCORE {
            Some(TerminalReason::Victory)
        } else if self.final_turns_remaining == Some(0) {
            Some(TerminalReason::DeckExhausted)
        } else {
            None
        };
        self.current_player ^= 1;
        self.turn += 1;
        Ok(outcome)
    }

    fn take(&mut self, player: usize, slot: u8) -> Card {
        self.knowledge[player].remove(slot as usize);
        self.hands[player].remove(slot as usize)
    }

    /// What `player` can observe: the partner's cards face up, own cards hidden.
    pub fn view_of(&self, player: usize) -> PlayerView {
        let partner = 1 - player;
        PlayerView {
            player: player as u8,
            own_knowledge: self.knowledge[player].clone(),
            partner_hand: self.hands[partner].clone(),
            partner_knowledge: self.knowledge[partner].clone(),
            fireworks: self.fireworks,
            discard: self.discard,
            info_tokens: self.info_tokens,
            lives: self.lives,
            deck_size: self.deck.len() as u8,
        }
    }
}

/// Value-style transition: returns the successor state, leaving `state` untouched.
pub fn apply_action(
    state: &GameState,
    action: Action,
) -> Result<(GameState, TurnOutcome), GameError> {
    let mut next = state.clone();
    let outcome = next.apply(action)?;
    Ok((next, outcome))
}

/// One player's observation of the game. Own card identities never appear here.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlayerView {
    pub player: u8,
    pub own_knowledge: HandKnowledge,
    pub partner_hand: Hand,
    pub partner_knowledge: HandKnowledge,
    pub fireworks: [u8; NUM_COLORS],
    pub discard: CardCounts,
    pub info_tokens: u8,
    pub lives: u8,
    pub deck_size: u8,
}

impl PlayerView {
    pub fn partner(&self) -> u8 {
        1 - self.player
    }

    pub fn own_hand_size(&self) -> usize {
        self.own_knowledge.len()
    }

    /// Legal moves for the owner of this view, in canonical order: plays,
    /// discards, color hints (B,R,Y,W,G), rank hints (1..5).
    pub fn legal_actions(&self) -> Vec<Action> {
        let n = self.own_hand_size() as u8;
        let mut out = Vec::with_capacity(20);
        out.extend((0..n).map(|slot| Action::Play { slot }));
        if self.info_tokens < MAX_INFO_TOKENS {
            out.extend((0..n).map(|slot| Action::Discard { slot }));
        }
        if self.info_tokens > 0 {
            let target = self.partner();
            for color in Color::ALL {
                if self.partner_hand.iter().any(|c| c.color == color) {
                    out.push(Action::HintColor { target, color });
                }
            }
            for rank in 1..=MAX_RANK {
                if self.partner_hand.iter().any(|c| c.rank == rank) {
                    out.push(Action::HintRank { target, rank });
                }
            }
        }
        out
    }

    /// Whether `action` is legal from this view. Agrees with [`GameState::check_legal`].
    pub fn is_legal(&self, action: Action) -> bool {
        let n = self.own_hand_size() as u8;
        match action {
            Action::Play { slot } => slot < n,
            Action::Discard { slot } => slot < n && self.info_tokens < MAX_INFO_TOKENS,
            Action::HintColor { target, color } => {
                target == self.partner()
                    && self.info_tokens > 0
                    && self.partner_hand.iter().any(|c| c.color == color)
            }
            Action::HintRank { target, rank } => {
                target == self.partner()
                    && self.info_tokens > 0
                    && self.partner_hand.iter().any(|c| c.rank == rank)
            }
        }
    }

    /// Stable byte encoding of the view, independent of platform and of serde.
    pub fn canonical_bytes(&self) -> ArrayVec<u8, 96> {
        let mut out = ArrayVec::new();
        out.push(self.player);
        out.push(self.own_knowledge.len() as u8);
        for k in &self.own_knowledge {
            out.extend([k.colors, k.ranks, k.hinted as u8]);
        }
        out.push(self.partner_hand.len() as u8);
        for (c, k) in self.partner_hand.iter().zip(&self.partner_knowledge) {
            out.extend([c.color as u8, c.rank, k.colors, k.ranks, k.hinted as u8]);
        }
        out.extend(self.fireworks);
        for row in &self.discard.0 {
            out.extend(row.iter().copied());
        }
        out.extend([self.info_tokens, self.lives, self.deck_size]);
        out
    }

    /// 64-bit FNV-1a digest of [`PlayerView::canonical_bytes`].
    pub fn canonical_hash(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        self.canonical_bytes()
            .iter()
            .fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
    }
}
