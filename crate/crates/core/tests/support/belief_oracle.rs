//! Exhaustive oracle for grounded playability and uselessness.
//!
//! Positions are built from explicit physical cards (deck, both hands,
//! discard, fireworks). The oracle enumerates every injective assignment of
//! the unseen physical cards to the actor's own slots; a slot's probability
//! is the fraction of assignments, among those consistent with that slot's
//! own knowledge, in which its card is playable (or dead). Other slots'
//! knowledge is deliberately not used, matching the grounded model.

use hanabi_elites::belief::{playability_with, uselessness_with, SlotKnowledge};
use hanabi_elites::card::{Card, CardCounts, Color};
use hanabi_elites::game::{HandKnowledge, PlayerView};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Position {
    pub composition: CardCounts,
    pub view: PlayerView,
    /// Physical cards the actor cannot see: own hand and deck.
    pub unseen: Vec<Card>,
    /// Physical cards still in play somewhere (hands and deck).
    pub live: Vec<Card>,
    pub own_hand: Vec<Card>,
}

fn random_knowledge<R: Rng>(card: Card, rng: &mut R) -> SlotKnowledge {
    let mut k = SlotKnowledge::UNKNOWN;
    for _ in 0..rng.random_range(0..4) {
        if rng.random_bool(0.5) {
            let c = Color::ALL[rng.random_range(0..5)];
            k.apply_color_hint(c, c == card.color);
        } else {
            let r = rng.random_range(1..=5);
            k.apply_rank_hint(r, r == card.rank);
        }
    }
    k
}

/// A random position over `composition`. `max_own` bounds the actor's hand.
pub fn random_position<R: Rng>(composition: CardCounts, max_own: usize, rng: &mut R) -> Position {
    let (fireworks, pool) = loop {
        let mut fireworks = [0u8; 5];
        let mut pool = composition;
        for color in Color::ALL {
            let top = (1..=5).take_while(|&r| composition.get(Card::new(color, r)) > 0).count() as u8;
            let f = rng.random_range(0..=top);
            for r in 1..=f {
                pool.remove(Card::new(color, r));
            }
            fireworks[color.index()] = f;
        }
        if pool.total() > 0 {
            break (fireworks, pool);
        }
    };
    let mut cards = pool.to_cards();
    cards.shuffle(rng);
    let own_n = rng.random_range(1..=max_own.min(cards.len()));
    let own_hand: Vec<Card> = cards.drain(..own_n).collect();
    let partner_n = rng.random_range(0..=5.min(cards.len()));
    let partner: Vec<Card> = cards.drain(..partner_n).collect();
    let discard_n = rng.random_range(0..=cards.len());
    let discard: Vec<Card> = cards.drain(..discard_n).collect();
    let deck = cards;

    let own_knowledge: HandKnowledge = own_hand.iter().map(|&c| random_knowledge(c, rng)).collect();
    let partner_knowledge: HandKnowledge = partner.iter().map(|&c| random_knowledge(c, rng)).collect();
    let view = PlayerView {
        player: 0,
        own_knowledge,
        partner_hand: partner.iter().copied().collect(),
        partner_knowledge,
        fireworks,
        discard: CardCounts::from_cards(&discard),
        info_tokens: rng.random_range(0..=8),
        lives: rng.random_range(1..=3),
        deck_size: deck.len() as u8,
    };
    let unseen: Vec<Card> = own_hand.iter().chain(&deck).copied().collect();
    let live: Vec<Card> = unseen.iter().chain(&partner).copied().collect();
    Position { composition, view, unseen, live, own_hand }
}

fn playable(card: Card, fireworks: &[u8; 5]) -> bool {
    card.rank == fireworks[card.color.index()] + 1
}

/// Dead: already played, or some lower rank of its color has no copy left in play.
fn dead(card: Card, fireworks: &[u8; 5], live: &[Card]) -> bool {
    let f = fireworks[card.color.index()];
    card.rank <= f || (f + 1..card.rank).any(|r| !live.iter().any(|c| c.color == card.color && c.rank == r))
}

/// Per own slot: (playable, dead, consistent) assignment counts.
pub fn enumerate(pos: &Position) -> Vec<(u64, u64, u64)> {
    let k = pos.own_hand.len();
    let mut counts = vec![(0u64, 0u64, 0u64); k];
    let mut used = vec![false; pos.unseen.len()];
    let mut chosen = Vec::with_capacity(k);
    fn rec(
        pos: &Position,
        used: &mut Vec<bool>,
        chosen: &mut Vec<Card>,
        counts: &mut Vec<(u64, u64, u64)>,
    ) {
        if chosen.len() == pos.own_hand.len() {
            for (i, &c) in chosen.iter().enumerate() {
                if pos.view.own_knowledge[i].allows(c) {
                    let e = &mut counts[i];
                    e.2 += 1;
                    if playable(c, &pos.view.fireworks) {
                        e.0 += 1;
                    }
                    if dead(c, &pos.view.fireworks, &pos.live) {
                        e.1 += 1;
                    }
                }
            }
            return;
        }
        for j in 0..pos.unseen.len() {
            if !used[j] {
                used[j] = true;
                chosen.push(pos.unseen[j]);
                rec(pos, used, chosen, counts);
                chosen.pop();
                used[j] = false;
            }
        }
    }
    rec(pos, &mut used, &mut chosen, &mut counts);
    counts
}

/// Compares the library against the oracle on one position; returns the number of slots checked.
pub fn check(pos: &Position) -> Result<usize, String> {
    let counts = enumerate(pos);
    for (slot, &(p, d, n)) in counts.iter().enumerate() {
        if n == 0 {
            return Err(format!("slot {slot}: oracle found no consistent assignment"));
        }
        let play = playability_with(&pos.view, slot, &pos.composition).map_err(|e| e.to_string())?;
        let use_ = uselessness_with(&pos.view, slot, &pos.composition).map_err(|e| e.to_string())?;
        if play.num as u64 * n != p * play.den as u64 {
            return Err(format!("slot {slot}: playability {}/{} vs oracle {p}/{n}\n{:?}", play.num, play.den, pos.view));
        }
        if use_.num as u64 * n != d * use_.den as u64 {
            return Err(format!("slot {slot}: uselessness {}/{} vs oracle {d}/{n}\n{:?}", use_.num, use_.den, pos.view));
        }
    }
    Ok(counts.len())
}

/// Two colors (B, R), ranks 1..=3, one or two copies of each: at most 12 cards.
pub fn small_composition<R: Rng>(rng: &mut R) -> CardCounts {
    let mut c = CardCounts::EMPTY;
    for color in [Color::B, Color::R] {
        for rank in 1..=3 {
            for _ in 0..rng.random_range(1..=2) {
                c.add(Card::new(color, rank));
            }
        }
    }
    c
}

/// Runs `n` small-deck positions; returns the number of slots compared.
pub fn run_small(n: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slots = 0;
    for i in 0..n {
        let comp = small_composition(&mut rng);
        let pos = random_position(comp, 4, &mut rng);
        slots += check(&pos).map_err(|e| format!("position {i}: {e}"))?;
    }
    Ok(slots)
}
