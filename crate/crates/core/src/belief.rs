//! Grounded knowledge about one's own cards.
//!
//! Everything here uses only revealed hint information and visible cards;
//! there is no model of why a partner chose a hint. A slot's identity
//! distribution counts, for every identity still allowed by the slot's hint
//! knowledge, the copies the acting player cannot see (not in the partner's
//! hand, not discarded, not on the fireworks). The player's other hidden
//! slots are not deducted.

use crate::card::{Card, CardCounts, Color, MAX_RANK, NUM_COLORS, NUM_RANKS};
use crate::game::PlayerView;
use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

const ALL_COLORS: u8 = 0b1_1111;
const ALL_RANKS: u8 = 0b1_1111;

/// Hint-derived knowledge about one hand slot, as bitmasks over colors
/// (bit = color index) and ranks (bit = rank - 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlotKnowledge {
    pub colors: u8,
    pub ranks: u8,
    /// Touched by at least one positive hint.
    pub hinted: bool,
}

impl Default for SlotKnowledge {
    fn default() -> Self {
        SlotKnowledge::UNKNOWN
    }
}

impl SlotKnowledge {
    pub const UNKNOWN: SlotKnowledge = SlotKnowledge { colors: ALL_COLORS, ranks: ALL_RANKS, hinted: false };

    pub fn exact(card: Card) -> SlotKnowledge {
        SlotKnowledge {
            colors: 1 << card.color.index(),
            ranks: 1 << card.rank_index(),
            hinted: true,
        }
    }

    #[inline]
    pub fn may_be_color(self, color: Color) -> bool {
        self.colors & (1 << color.index()) != 0
    }

    #[inline]
    pub fn may_be_rank(self, rank: u8) -> bool {
        self.ranks & (1 << (rank - 1)) != 0
    }

    #[inline]
    pub fn allows(self, card: Card) -> bool {
        self.may_be_color(card.color) && self.may_be_rank(card.rank)
    }

    /// The color, if it is pinned down.
    pub fn color(self) -> Option<Color> {
        (self.colors.count_ones() == 1).then(|| Color::from_index(self.colors.trailing_zeros() as usize))
    }

    pub fn rank(self) -> Option<u8> {
        (self.ranks.count_ones() == 1).then(|| self.ranks.trailing_zeros() as u8 + 1)
    }

    pub fn color_known(self) -> bool {
        self.colors.count_ones() == 1
    }

    pub fn rank_known(self) -> bool {
        self.ranks.count_ones() == 1
    }

    pub fn apply_color_hint(&mut self, color: Color, hit: bool) {
        let bit = 1 << color.index();
        if hit {
            self.colors = bit;
            self.hinted = true;
        } else {
            self.colors &= !bit;
        }
    }

    pub fn apply_rank_hint(&mut self, rank: u8, hit: bool) {
        let bit = 1 << (rank - 1);
        if hit {
            self.ranks = bit;
            self.hinted = true;
        } else {
            self.ranks &= !bit;
        }
    }

    /// Identities compatible with this knowledge, ignoring copy counts.
    pub fn candidates(self) -> impl Iterator<Item = Card> {
        Color::ALL.into_iter().filter(move |&c| self.may_be_color(c)).flat_map(move |color| {
            (1..=MAX_RANK).filter(move |&r| self.may_be_rank(r)).map(move |rank| Card::new(color, rank))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BeliefError {
    #[error("slot {slot} is empty (hand holds {hand_len} cards)")]
    EmptySlot { slot: usize, hand_len: usize },
    #[error("no unseen identity is consistent with the knowledge of slot {slot}")]
    Inconsistent { slot: usize },
}

/// An exact probability `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u32,
    pub den: u32,
}

impl Ratio {
    pub fn new(num: u32, den: u32) -> Ratio {
        debug_assert!(den > 0 && num <= den);
        Ratio { num, den }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_certain(self) -> bool {
        self.num == self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// `self >= tenths / 10`, exactly.
    #[inline]
    pub fn at_least_tenths(self, tenths: u8) -> bool {
        self.num as u64 * 10 >= tenths as u64 * self.den as u64
    }

    /// Same rational value (different representations compare equal).
    pub fn same_value(self, other: Ratio) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }

    #[inline]
    pub fn cmp_value(self, other: Ratio) -> Ordering {
        (self.num as u64 * other.den as u64).cmp(&(other.num as u64 * self.den as u64))
    }
}

/// Copies of each identity a slot could still be, from the actor's perspective.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CardDistribution {
    pub counts: CardCounts,
}

impl CardDistribution {
    pub fn total(&self) -> u32 {
        self.counts.total()
    }

    /// Identities with a nonzero count.
    pub fn support(&self) -> impl Iterator<Item = (Card, u8)> + '_ {
        self.counts.iter().filter(|&(_, n)| n > 0)
    }
}

#[inline]
pub fn is_playable(card: Card, fireworks: &[u8; NUM_COLORS]) -> bool {
    fireworks[card.color.index()] + 1 == card.rank
}

/// Highest rank of each color that can still be reached: above the current
/// firework, the first rank with no copy left outside the discard pile caps it.
pub fn reachable_ranks(fireworks: &[u8; NUM_COLORS], discard: &CardCounts, composition: &CardCounts) -> [u8; NUM_COLORS] {
    let mut out = [MAX_RANK; NUM_COLORS];
    for (ci, reach) in out.iter_mut().enumerate() {
        for rank in fireworks[ci] + 1..=MAX_RANK {
            let ri = rank as usize - 1;
            if discard.0[ci][ri] >= composition.0[ci][ri] {
                *reach = rank - 1;
                break;
            }
        }
    }
    out
}

/// A card that can never be played: already played, or a lower rank of its
/// color is gone for good.
pub fn is_dead(card: Card, fireworks: &[u8; NUM_COLORS], discard: &CardCounts, composition: &CardCounts) -> bool {
    let ci = card.color.index();
    if card.rank <= fireworks[ci] {
        return true;
    }
    (fireworks[ci] + 1..card.rank).any(|r| {
        let ri = r as usize - 1;
        discard.0[ci][ri] >= composition.0[ci][ri]
    })
}

/// Copies of each identity not visible to the owner of `view`.
pub fn unseen_counts(view: &PlayerView, composition: &CardCounts) -> CardCounts {
    let mut unseen = *composition;
    for ci in 0..NUM_COLORS {
        for ri in 0..NUM_RANKS {
            let mut visible = view.discard.0[ci][ri];
            if ri < view.fireworks[ci] as usize {
                visible += 1;
            }
            unseen.0[ci][ri] = unseen.0[ci][ri].saturating_sub(visible);
        }
    }
    for &card in &view.partner_hand {
        let n = &mut unseen.0[card.color.index()][card.rank_index()];
        *n = n.saturating_sub(1);
    }
    unseen
}

fn slot_knowledge(view: &PlayerView, slot: usize) -> Result<SlotKnowledge, BeliefError> {
    view.own_knowledge
        .get(slot)
        .copied()
        .ok_or(BeliefError::EmptySlot { slot, hand_len: view.own_knowledge.len() })
}

pub fn possible_identities(view: &PlayerView, slot: usize) -> Result<CardDistribution, BeliefError> {
    possible_identities_with(view, slot, &CardCounts::STANDARD)
}

/// As [`possible_identities`], for a deck of arbitrary composition.
pub fn possible_identities_with(
    view: &PlayerView,
    slot: usize,
    composition: &CardCounts,
) -> Result<CardDistribution, BeliefError> {
    let know = slot_knowledge(view, slot)?;
    let mut counts = unseen_counts(view, composition);
    for ci in 0..NUM_COLORS {
        for ri in 0..NUM_RANKS {
            if know.colors & (1 << ci) == 0 || know.ranks & (1 << ri) == 0 {
                counts.0[ci][ri] = 0;
            }
        }
    }
    Ok(CardDistribution { counts })
}

pub fn playability(view: &PlayerView, slot: usize) -> Result<Ratio, BeliefError> {
    playability_with(view, slot, &CardCounts::STANDARD)
}

pub fn playability_with(view: &PlayerView, slot: usize, composition: &CardCounts) -> Result<Ratio, BeliefError> {
    let dist = possible_identities_with(view, slot, composition)?;
    let total = dist.total();
    if total == 0 {
        return Err(BeliefError::Inconsistent { slot });
    }
    let playable: u32 = dist
        .support()
        .filter(|(c, _)| is_playable(*c, &view.fireworks))
        .map(|(_, n)| n as u32)
        .sum();
    Ok(Ratio::new(playable, total))
}

pub fn playability_probability(view: &PlayerView, slot: usize) -> Result<f64, BeliefError> {
    playability(view, slot).map(Ratio::value)
}

pub fn uselessness(view: &PlayerView, slot: usize) -> Result<Ratio, BeliefError> {
    uselessness_with(view, slot, &CardCounts::STANDARD)
}

pub fn uselessness_with(view: &PlayerView, slot: usize, composition: &CardCounts) -> Result<Ratio, BeliefError> {
    let dist = possible_identities_with(view, slot, composition)?;
    let total = dist.total();
    if total == 0 {
        return Err(BeliefError::Inconsistent { slot });
    }
    let dead: u32 = dist
        .support()
        .filter(|(c, _)| is_dead(*c, &view.fireworks, &view.discard, composition))
        .map(|(_, n)| n as u32)
        .sum();
    Ok(Ratio::new(dead, total))
}

pub fn uselessness_indicator(view: &PlayerView, slot: usize) -> Result<f64, BeliefError> {
    uselessness(view, slot).map(Ratio::value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotBelief {
    pub playable: Ratio,
    pub useless: Ratio,
}

/// Playability and uselessness of every own slot, computed in one pass.
///
/// Slots whose knowledge is inconsistent with the visible cards (impossible in
/// a real game) get probability zero for both.
#[derive(Clone, Debug)]
pub struct HandBeliefs {
    slots: ArrayVec<SlotBelief, 5>,
}

impl HandBeliefs {
    #[allow(clippy::needless_range_loop)]
    pub fn compute(view: &PlayerView) -> HandBeliefs {
        let composition = &CardCounts::STANDARD;
        let unseen = unseen_counts(view, composition);
        let reach = reachable_ranks(&view.fireworks, &view.discard, composition);
        let mut slots = ArrayVec::new();
        for know in &view.own_knowledge {
            let (mut total, mut playable, mut useless) = (0u32, 0u32, 0u32);
            for ci in 0..NUM_COLORS {
                if know.colors & (1 << ci) == 0 {
                    continue;
                }
                let next = view.fireworks[ci] as usize;
                for ri in 0..NUM_RANKS {
                    if know.ranks & (1 << ri) == 0 {
                        continue;
                    }
                    let n = unseen.0[ci][ri] as u32;
                    total += n;
                    if ri == next {
                        playable += n;
                    } else if ri < next || ri >= reach[ci] as usize {
                        useless += n;
                    }
                }
            }
            let den = total.max(1);
            slots.push(SlotBelief { playable: Ratio::new(playable, den), useless: Ratio::new(useless, den) });
        }
        HandBeliefs { slots }
    }

    pub fn slots(&self) -> &[SlotBelief] {
        &self.slots
    }

    pub fn get(&self, slot: usize) -> Option<&SlotBelief> {
        self.slots.get(slot)
    }
}
