//! Quality-diversity generation of rule-based Hanabi agents.
//!
//! The crate holds a deterministic two-player Hanabi engine, grounded belief
//! tracking, a 135-rule catalog, 15-gene rule-list agents, MAP-Elites over
//! (communicativeness, risk aversion), and the post-hoc analyses used to
//! compare agent pools (cross-play, best partners, distance profiles,
//! Hamming distance and action similarity).

pub mod agent;
pub mod belief;
pub mod card;
pub mod descriptors;
pub mod export;
pub mod game;
pub mod harness;
pub mod qd;
pub mod rules;
pub mod seeding;
pub mod sim;
pub mod trace;

pub use agent::{decide, Chromosome};
pub use belief::{playability_probability, uselessness_indicator, SlotKnowledge};
pub use card::{Card, CardCounts, Color};
pub use descriptors::{niche_of, BehaviorDescriptor, BehaviorStats, NicheCoord};
pub use game::{apply_action, Action, GameError, GameState, PlayerView, TerminalReason};
pub use rules::{catalog, catalog_hash, Rule, RuleCatalog};
pub use qd::{run_map_elites, Archive, Elite, QdConfig};
