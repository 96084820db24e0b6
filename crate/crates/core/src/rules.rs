//! The rule catalog: 135 deterministic condition→action rules.
//!
//! Each rule pairs one of 15 base templates with one of 9 guards. Rule ids
//! are `template_index * 9 + guard_index`, with templates and guards in the
//! order of [`Template::ALL`] and [`Guard::ALL`]. That order is part of the
//! archive format; [`catalog_hash`] fingerprints it.
//!
//! Tie-breaking inside a rule: lowest slot first; among hints, color hints
//! before rank hints, colors in B,R,Y,W,G order, ranks ascending.

use crate::belief::{is_dead, is_playable, HandBeliefs, Ratio, SlotKnowledge};
use crate::card::{Card, CardCounts, Color, MAX_RANK};
use crate::game::{Action, PlayerView, MAX_INFO_TOKENS};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::cell::OnceCell;
use std::sync::OnceLock;

pub const NUM_RULES: usize = 135;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Template {
    PlaySafeCard,
    /// Play the most likely playable card if its probability reaches `tenths / 10`.
    PlayProbablySafe { tenths: u8 },
    TellPartnerAboutPlayableCard,
    TellPartnerAboutUselessCard,
    TellMostInformative,
    TellUnknownRank,
    TellUnknownColor,
    DiscardCertainlyUseless,
    /// Discard the most likely useless card if its probability reaches `tenths / 10`.
    DiscardProbablyUseless { tenths: u8 },
    DiscardOldestUnhinted,
    DiscardOldest,
    DiscardRandom,
}

impl Template {
    pub const ALL: [Template; 15] = [
        Template::PlaySafeCard,
        Template::PlayProbablySafe { tenths: 4 },
        Template::PlayProbablySafe { tenths: 6 },
        Template::PlayProbablySafe { tenths: 8 },
        Template::TellPartnerAboutPlayableCard,
        Template::TellPartnerAboutUselessCard,
        Template::TellMostInformative,
        Template::TellUnknownRank,
        Template::TellUnknownColor,
        Template::DiscardCertainlyUseless,
        Template::DiscardProbablyUseless { tenths: 6 },
        Template::DiscardProbablyUseless { tenths: 8 },
        Template::DiscardOldestUnhinted,
        Template::DiscardOldest,
        Template::DiscardRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Template::PlaySafeCard => "PlaySafeCard",
            Template::PlayProbablySafe { .. } => "PlayProbablySafe",
            Template::TellPartnerAboutPlayableCard => "TellPartnerAboutPlayableCard",
            Template::TellPartnerAboutUselessCard => "TellPartnerAboutUselessCard",
            Template::TellMostInformative => "TellMostInformative",
            Template::TellUnknownRank => "TellUnknownRank",
            Template::TellUnknownColor => "TellUnknownColor",
            Template::DiscardCertainlyUseless => "DiscardCertainlyUseless",
            Template::DiscardProbablyUseless { .. } => "DiscardProbablyUseless",
            Template::DiscardOldestUnhinted => "DiscardOldestUnhinted",
            Template::DiscardOldest => "DiscardOldest",
            Template::DiscardRandom => "DiscardRandom",
        }
    }

    pub fn threshold(self) -> Option<f64> {
        match self {
            Template::PlayProbablySafe { tenths } | Template::DiscardProbablyUseless { tenths } => {
                Some(tenths as f64 / 10.0)
            }
            _ => None,
        }
    }

    pub fn is_hint(self) -> bool {
        matches!(
            self,
            Template::TellPartnerAboutPlayableCard
                | Template::TellPartnerAboutUselessCard
                | Template::TellMostInformative
                | Template::TellUnknownRank
                | Template::TellUnknownColor
        )
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.threshold() {
            Some(t) => write!(f, "{}({t:.1})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

/// Precondition on public game counters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Guard {
    Always,
    TokensBelow(u8),
    TokensAtLeast(u8),
    LivesExactly(u8),
    LivesAtLeast(u8),
    DeckBelow(u8),
    DeckAtLeast(u8),
}

impl Guard {
    pub const ALL: [Guard; 9] = [
        Guard::Always,
        Guard::TokensBelow(2),
        Guard::TokensBelow(4),
        Guard::TokensBelow(6),
        Guard::TokensAtLeast(4),
        Guard::LivesExactly(1),
        Guard::LivesAtLeast(2),
        Guard::DeckBelow(10),
        Guard::DeckAtLeast(10),
    ];

    #[inline]
    pub fn holds(self, view: &PlayerView) -> bool {
        match self {
            Guard::Always => true,
            Guard::TokensBelow(n) => view.info_tokens < n,
            Guard::TokensAtLeast(n) => view.info_tokens >= n,
            Guard::LivesExactly(n) => view.lives == n,
            Guard::LivesAtLeast(n) => view.lives >= n,
            Guard::DeckBelow(n) => view.deck_size < n,
            Guard::DeckAtLeast(n) => view.deck_size >= n,
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Guard::Always => f.write_str("always"),
            Guard::TokensBelow(n) => write!(f, "info_tokens<{n}"),
            Guard::TokensAtLeast(n) => write!(f, "info_tokens>={n}"),
            Guard::LivesExactly(n) => write!(f, "lives={n}"),
            Guard::LivesAtLeast(n) => write!(f, "lives>={n}"),
            Guard::DeckBelow(n) => write!(f, "deck_size<{n}"),
            Guard::DeckAtLeast(n) => write!(f, "deck_size>={n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub id: u8,
    pub template: Template,
    pub guard: Guard,
}

impl Rule {
    /// The rule's action on `view`, or `None` when it does not fire.
    pub fn apply(&self, view: &PlayerView) -> Option<Action> {
        apply_rule(self, view)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} {} if {}", self.id, self.template, self.guard)
    }
}

#[derive(Debug)]
pub struct RuleCatalog {
    rules: Vec<Rule>,
}

impl RuleCatalog {
    fn build() -> RuleCatalog {
        let mut rules = Vec::with_capacity(NUM_RULES);
        for template in Template::ALL {
            for guard in Guard::ALL {
                rules.push(Rule { id: rules.len() as u8, template, guard });
            }
        }
        RuleCatalog { rules }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&Rule> {
        self.rules.get(id)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Looks up the id of a (template, guard) combination.
    pub fn find(&self, template: Template, guard: Guard) -> Option<u8> {
        self.rules.iter().find(|r| r.template == template && r.guard == guard).map(|r| r.id)
    }

    /// `id,template,threshold,guard` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,template,threshold,guard\n");
        for r in &self.rules {
            let threshold = r.template.threshold().map(|t| format!("{t:.1}")).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", r.id, r.template.name(), threshold, r.guard));
        }
        out
    }
}

impl std::ops::Index<usize> for RuleCatalog {
    type Output = Rule;

    fn index(&self, id: usize) -> &Rule {
        &self.rules[id]
    }
}

pub fn catalog() -> &'static RuleCatalog {
    static CATALOG: OnceLock<RuleCatalog> = OnceLock::new();
    CATALOG.get_or_init(RuleCatalog::build)
}

/// SHA-256 of the catalog CSV, hex encoded.
pub fn catalog_hash() -> &'static str {
    static HASH: OnceLock<String> = OnceLock::new();
    HASH.get_or_init(|| {
        let digest = Sha256::digest(catalog().to_csv().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    })
}

/// A view plus lazily computed own-hand beliefs, shared across the rules of
/// one decision.
pub struct RuleContext<'a> {
    pub view: &'a PlayerView,
    beliefs: OnceCell<HandBeliefs>,
}

impl<'a> RuleContext<'a> {
    pub fn new(view: &'a PlayerView) -> Self {
        RuleContext { view, beliefs: OnceCell::new() }
    }

    pub fn beliefs(&self) -> &HandBeliefs {
        self.beliefs.get_or_init(|| HandBeliefs::compute(self.view))
    }
}

pub fn apply_rule(rule: &Rule, view: &PlayerView) -> Option<Action> {
    apply_rule_in(rule, &RuleContext::new(view))
}

pub fn apply_rule_in(rule: &Rule, ctx: &RuleContext<'_>) -> Option<Action> {
    let view = ctx.view;
    if !rule.guard.holds(view) {
        return None;
    }
    if rule.template.is_hint() && view.info_tokens == 0 {
        return None;
    }
    let is_discard = matches!(
        rule.template,
        Template::DiscardCertainlyUseless
            | Template::DiscardProbablyUseless { .. }
            | Template::DiscardOldestUnhinted
            | Template::DiscardOldest
            | Template::DiscardRandom
    );
    if is_discard && (view.info_tokens >= MAX_INFO_TOKENS || view.own_hand_size() == 0) {
        return None;
    }
    match rule.template {
        Template::PlaySafeCard => best_slot(ctx, |b| b.playable, 10).map(|slot| Action::Play { slot }),
        Template::PlayProbablySafe { tenths } => best_slot(ctx, |b| b.playable, tenths).map(|slot| Action::Play { slot }),
        Template::TellPartnerAboutPlayableCard => {
            tell_about(view, |card| is_playable(card, &view.fireworks), |k| known_playable(view, k))
        }
        Template::TellPartnerAboutUselessCard => tell_about(
            view,
            |card| is_dead(card, &view.fireworks, &view.discard, &CardCounts::STANDARD),
            |k| known_useless(view, k),
        ),
        Template::TellMostInformative => tell_most_informative(view),
        Template::TellUnknownRank => view
            .partner_hand
            .iter()
            .zip(&view.partner_knowledge)
            .find(|(_, k)| !k.rank_known())
            .map(|(card, _)| Action::HintRank { target: view.partner(), rank: card.rank }),
        Template::TellUnknownColor => view
            .partner_hand
            .iter()
            .zip(&view.partner_knowledge)
            .find(|(_, k)| !k.color_known())
            .map(|(card, _)| Action::HintColor { target: view.partner(), color: card.color }),
        Template::DiscardCertainlyUseless => best_slot(ctx, |b| b.useless, 10).map(|slot| Action::Discard { slot }),
        Template::DiscardProbablyUseless { tenths } => {
            best_slot(ctx, |b| b.useless, tenths).map(|slot| Action::Discard { slot })
        }
        Template::DiscardOldestUnhinted => view
            .own_knowledge
            .iter()
            .position(|k| !k.hinted)
            .map(|slot| Action::Discard { slot: slot as u8 }),
        Template::DiscardOldest => Some(Action::Discard { slot: 0 }),
        Template::DiscardRandom => {
            let slot = view.canonical_hash() % view.own_hand_size() as u64;
            Some(Action::Discard { slot: slot as u8 })
        }
    }
}

/// Lowest slot with the highest ratio, if that ratio reaches `tenths / 10`.
fn best_slot(ctx: &RuleContext<'_>, pick: impl Fn(&crate::belief::SlotBelief) -> Ratio, tenths: u8) -> Option<u8> {
    let mut best: Option<(usize, Ratio)> = None;
    for (slot, b) in ctx.beliefs().slots().iter().enumerate() {
        let r = pick(b);
        if best.is_none_or(|(_, top)| r.cmp_value(top).is_gt()) {
            best = Some((slot, r));
        }
    }
    best.filter(|(_, r)| r.at_least_tenths(tenths)).map(|(slot, _)| slot as u8)
}

/// Partner can tell from hint knowledge alone that the slot is playable.
fn known_playable(view: &PlayerView, k: SlotKnowledge) -> bool {
    k.candidates().all(|c| is_playable(c, &view.fireworks))
}

fn known_useless(view: &PlayerView, k: SlotKnowledge) -> bool {
    k.candidates().all(|c| is_dead(c, &view.fireworks, &view.discard, &CardCounts::STANDARD))
}

/// Hint the lowest partner slot whose card satisfies `wanted` but whose
/// knowledge does not yet reveal it. Prefers the hint (color, then rank) that
/// makes `revealed` true; otherwise the first hint that adds information.
fn tell_about(
    view: &PlayerView,
    wanted: impl Fn(Card) -> bool,
    revealed: impl Fn(SlotKnowledge) -> bool,
) -> Option<Action> {
    let target = view.partner();
    for (&card, &know) in view.partner_hand.iter().zip(&view.partner_knowledge) {
        if !wanted(card) || revealed(know) {
            continue;
        }
        let mut after_color = know;
        after_color.apply_color_hint(card.color, true);
        let mut after_rank = know;
        after_rank.apply_rank_hint(card.rank, true);
        let color_hint = (!know.color_known()).then_some((Action::HintColor { target, color: card.color }, after_color));
        let rank_hint = (!know.rank_known()).then_some((Action::HintRank { target, rank: card.rank }, after_rank));
        let options = [color_hint, rank_hint];
        if let Some((a, _)) = options.iter().flatten().find(|(_, k)| revealed(*k)) {
            return Some(*a);
        }
        if let Some((a, _)) = options.iter().flatten().next() {
            return Some(*a);
        }
    }
    None
}

/// The hint that newly pins down an attribute on the most partner cards.
fn tell_most_informative(view: &PlayerView) -> Option<Action> {
    let target = view.partner();
    let mut best: Option<(usize, Action)> = None;
    let mut consider = |gain: usize, action: Action| {
        if gain > 0 && best.is_none_or(|(g, _)| gain > g) {
            best = Some((gain, action));
        }
    };
    for color in Color::ALL {
        let gain = view
            .partner_hand
            .iter()
            .zip(&view.partner_knowledge)
            .filter(|(c, k)| c.color == color && !k.color_known())
            .count();
        consider(gain, Action::HintColor { target, color });
    }
    for rank in 1..=MAX_RANK {
        let gain = view
            .partner_hand
            .iter()
            .zip(&view.partner_knowledge)
            .filter(|(c, k)| c.rank == rank && !k.rank_known())
            .count();
        consider(gain, Action::HintRank { target, rank });
    }
    best.map(|(_, a)| a)
}
