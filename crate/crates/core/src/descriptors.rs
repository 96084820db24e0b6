//! Behavior descriptors: communicativeness and risk aversion, and the 20×20
//! niche grid they are discretized onto.

use crate::belief::{playability, Ratio};
use crate::game::{Action, PlayerView};
use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign};

pub const GRID_SIZE: usize = 20;
pub const NUM_NICHES: usize = GRID_SIZE * GRID_SIZE;
pub const NICHE_WIDTH: f64 = 0.05;

/// Largest possible playability denominator (the unseen-card count).
const MAX_DEN: u32 = 50;

/// Playability sums are exact integers in units of 1/lcm(1..=50), so merging
/// is associative and a run of plays at exactly 0.4 averages to exactly 0.4.
const PLAY_UNIT: u128 = lcm_upto(MAX_DEN as u128);

const fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

const fn lcm_upto(n: u128) -> u128 {
    let mut l = 1;
    let mut k = 2;
    while k <= n {
        l = l / gcd(l, k) * k;
        k += 1;
    }
    l
}

fn ratio_units(r: Ratio) -> u128 {
    assert!(r.den >= 1 && r.den <= MAX_DEN && r.num <= r.den, "playability {r:?} out of range");
    r.num as u128 * (PLAY_UNIT / r.den as u128)
}

/// `num / den` as the nearest f64 whenever the reduced fraction fits in 53 bits.
fn quotient(num: u128, den: u128) -> f64 {
    let g = gcd(num, den).max(1);
    (num / g) as f64 / (den / g) as f64
}

/// Pooled behavior counters over any number of turns and games.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BehaviorStats {
    /// Turns on which at least one information token was available.
    pub hint_opportunities: u64,
    /// Hints given on those turns.
    pub hints_given: u64,
    pub play_events: u64,
    playability_units: u128,
}

impl BehaviorStats {
    /// Sum of the grounded playability of every played card.
    pub fn playability_sum(&self) -> f64 {
        quotient(self.playability_units, PLAY_UNIT)
    }

    /// Records the action taken from `view`.
    pub fn accumulate(&mut self, view: &PlayerView, action: Action) {
        let play_ratio = match action {
            Action::Play { slot } => playability(view, slot as usize).ok(),
            _ => None,
        };
        self.record(view, action, play_ratio);
    }

    /// As [`BehaviorStats::accumulate`], with the played slot's playability
    /// supplied by the caller.
    #[inline]
    pub fn record(&mut self, view: &PlayerView, action: Action, play_ratio: Option<Ratio>) {
        if view.info_tokens >= 1 {
            self.hint_opportunities += 1;
            if action.is_hint() {
                self.hints_given += 1;
            }
        }
        if let Action::Play { .. } = action {
            self.play_events += 1;
            if let Some(r) = play_ratio {
                self.playability_units += ratio_units(r);
            }
        }
    }

    pub fn merge(&mut self, other: &BehaviorStats) {
        self.hint_opportunities += other.hint_opportunities;
        self.hints_given += other.hints_given;
        self.play_events += other.play_events;
        self.playability_units += other.playability_units;
    }

    pub fn finalize(&self) -> Option<BehaviorDescriptor> {
        if self.hint_opportunities == 0 || self.play_events == 0 {
            return None;
        }
        Some(BehaviorDescriptor {
            communicativeness: self.hints_given as f64 / self.hint_opportunities as f64,
            risk_aversion: quotient(self.playability_units, PLAY_UNIT * self.play_events as u128),
        })
    }
}

impl AddAssign<&BehaviorStats> for BehaviorStats {
    fn add_assign(&mut self, rhs: &BehaviorStats) {
        self.merge(rhs);
    }
}

impl Add for BehaviorStats {
    type Output = BehaviorStats;

    fn add(mut self, rhs: BehaviorStats) -> BehaviorStats {
        self.merge(&rhs);
        self
    }
}

/// The (c, r) pair. Serialized as a two-element array.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct BehaviorDescriptor {
    pub communicativeness: f64,
    pub risk_aversion: f64,
}

impl BehaviorDescriptor {
    pub fn new(communicativeness: f64, risk_aversion: f64) -> Self {
        BehaviorDescriptor { communicativeness, risk_aversion }
    }

    pub fn niche(&self) -> NicheCoord {
        niche_of(self)
    }
}

impl From<[f64; 2]> for BehaviorDescriptor {
    fn from([c, r]: [f64; 2]) -> Self {
        BehaviorDescriptor::new(c, r)
    }
}

impl From<BehaviorDescriptor> for [f64; 2] {
    fn from(d: BehaviorDescriptor) -> Self {
        [d.communicativeness, d.risk_aversion]
    }
}

/// Grid cell: `ci` indexes communicativeness, `ri` risk aversion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[u8; 2]", into = "[u8; 2]")]
pub struct NicheCoord {
    pub ci: u8,
    pub ri: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("niche index ({0}, {1}) outside the {GRID_SIZE}x{GRID_SIZE} grid")]
pub struct NicheRangeError(pub u8, pub u8);

impl NicheCoord {
    pub fn new(ci: u8, ri: u8) -> Result<NicheCoord, NicheRangeError> {
        if (ci as usize) < GRID_SIZE && (ri as usize) < GRID_SIZE {
            Ok(NicheCoord { ci, ri })
        } else {
            Err(NicheRangeError(ci, ri))
        }
    }

    /// Row-major position in `0..400`.
    pub fn index(self) -> usize {
        self.ci as usize * GRID_SIZE + self.ri as usize
    }

    pub fn from_index(i: usize) -> NicheCoord {
        NicheCoord { ci: (i / GRID_SIZE) as u8, ri: (i % GRID_SIZE) as u8 }
    }

    /// Lower bounds of the cell, e.g. `(0.40, 0.95)`.
    pub fn label(self) -> (f64, f64) {
        (self.ci as f64 * NICHE_WIDTH, self.ri as f64 * NICHE_WIDTH)
    }

    pub fn manhattan(self, other: NicheCoord) -> u32 {
        self.ci.abs_diff(other.ci) as u32 + self.ri.abs_diff(other.ri) as u32
    }

    pub fn all() -> impl Iterator<Item = NicheCoord> {
        (0..NUM_NICHES).map(NicheCoord::from_index)
    }

    /// Whether `d` lies in this cell (half-open, closed above for the last cell).
    pub fn contains(self, d: &BehaviorDescriptor) -> bool {
        let inside = |v: f64, i: u8| {
            let scaled = v * GRID_SIZE as f64;
            let i = i as f64;
            scaled >= i && (scaled < i + 1.0 || (i as usize == GRID_SIZE - 1 && v <= 1.0))
        };
        inside(d.communicativeness, self.ci) && inside(d.risk_aversion, self.ri)
    }
}

impl TryFrom<[u8; 2]> for NicheCoord {
    type Error = NicheRangeError;

    fn try_from([ci, ri]: [u8; 2]) -> Result<Self, Self::Error> {
        NicheCoord::new(ci, ri)
    }
}

impl From<NicheCoord> for [u8; 2] {
    fn from(n: NicheCoord) -> Self {
        [n.ci, n.ri]
    }
}

impl std::fmt::Display for NicheCoord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (c, r) = self.label();
        write!(f, "({c:.2},{r:.2})")
    }
}

fn bin(v: f64) -> u8 {
    // Multiplying (rather than dividing by 0.05) keeps decimal boundaries
    // such as 0.15 in the upper cell.
    let i = (v.clamp(0.0, 1.0) * GRID_SIZE as f64).floor() as usize;
    i.min(GRID_SIZE - 1) as u8
}

pub fn niche_of(d: &BehaviorDescriptor) -> NicheCoord {
    NicheCoord { ci: bin(d.communicativeness), ri: bin(d.risk_aversion) }
}
