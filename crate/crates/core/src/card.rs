//! Cards, colors and card multisets.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

pub const NUM_COLORS: usize = 5;
pub const NUM_RANKS: usize = 5;
pub const MAX_RANK: u8 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    B,
    R,
    Y,
    W,
    G,
}

impl Color {
    /// Canonical enumeration order, also used for hint tie-breaking.
    pub const ALL: [Color; NUM_COLORS] = [Color::B, Color::R, Color::Y, Color::W, Color::G];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Color {
        Color::ALL[i]
    }

    pub fn letter(self) -> char {
        match self {
            Color::B => 'B',
            Color::R => 'R',
            Color::Y => 'Y',
            Color::W => 'W',
            Color::G => 'G',
        }
    }

    pub fn from_letter(c: char) -> Option<Color> {
        Some(match c.to_ascii_uppercase() {
            'B' => Color::B,
            'R' => Color::R,
            'Y' => Color::Y,
            'W' => Color::W,
            'G' => Color::G,
            _ => return None,
        })
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A single card. `rank` is always in `1..=5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Card {
    pub color: Color,
    pub rank: u8,
}

impl Card {
    pub fn new(color: Color, rank: u8) -> Card {
        assert!((1..=MAX_RANK).contains(&rank), "card rank {rank} out of range");
        Card { color, rank }
    }

    #[inline]
    pub(crate) fn rank_index(self) -> usize {
        self.rank as usize - 1
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.color.letter(), self.rank)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid card literal {0:?} (expected e.g. \"R3\")")]
pub struct ParseCardError(pub String);

impl FromStr for Card {
    type Err = ParseCardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        let (Some(c), Some(r), None) = (chars.next(), chars.next(), chars.next()) else {
            return Err(ParseCardError(s.to_string()));
        };
        let color = Color::from_letter(c).ok_or_else(|| ParseCardError(s.to_string()))?;
        let rank = r
            .to_digit(10)
            .filter(|d| (1..=5).contains(d))
            .ok_or_else(|| ParseCardError(s.to_string()))?;
        Ok(Card::new(color, rank as u8))
    }
}

impl Serialize for Card {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Card {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Multiset of card identities, indexed by `[color][rank - 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CardCounts(pub [[u8; NUM_RANKS]; NUM_COLORS]);

impl CardCounts {
    /// Standard composition: three 1s, two each of 2/3/4 and one 5 per color.
    pub const STANDARD: CardCounts = CardCounts([[3, 2, 2, 2, 1]; NUM_COLORS]);

    pub const EMPTY: CardCounts = CardCounts([[0; NUM_RANKS]; NUM_COLORS]);

    #[inline]
    pub fn get(&self, card: Card) -> u8 {
        self.0[card.color.index()][card.rank_index()]
    }

    #[inline]
    pub fn add(&mut self, card: Card) {
        self.0[card.color.index()][card.rank_index()] += 1;
    }

    /// Removes one copy; returns false when no copy was present.
    pub fn remove(&mut self, card: Card) -> bool {
        let slot = &mut self.0[card.color.index()][card.rank_index()];
        if *slot == 0 {
            return false;
        }
        *slot -= 1;
        true
    }

    pub fn total(&self) -> u32 {
        self.0.iter().flatten().map(|&n| n as u32).sum()
    }

    /// All identities with their counts (including zero counts), in color-major order.
    pub fn iter(&self) -> impl Iterator<Item = (Card, u8)> + '_ {
        Color::ALL.into_iter().flat_map(move |color| {
            (1..=MAX_RANK).map(move |rank| {
                let card = Card::new(color, rank);
                (card, self.get(card))
            })
        })
    }

    /// Expands the multiset into a card list in color-major, rank-ascending order.
    pub fn to_cards(&self) -> Vec<Card> {
        let mut out = Vec::with_capacity(self.total() as usize);
        for (card, n) in self.iter() {
            out.extend(std::iter::repeat_n(card, n as usize));
        }
        out
    }

    pub fn from_cards<'a>(cards: impl IntoIterator<Item = &'a Card>) -> CardCounts {
        let mut counts = CardCounts::EMPTY;
        for &c in cards {
            counts.add(c);
        }
        counts
    }
}
