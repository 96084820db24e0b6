//! Hand-scripted games with hand-derived final values.
//!
//! Decks are given in draw order: cards 0..10 are dealt alternately (even
//! indices to player 0), later cards are drawn in order. `full_deck(prefix)`
//! puts `prefix` first and the rest of the standard deck after it in
//! canonical order (B, R, Y, W, G; ranks ascending).
//!
//! A deck laid out in play order with every turn being "play slot 0" plays
//! card t on turn t, which is what most expectations below rely on.

use hanabi_elites::card::{Card, CardCounts, Color};
use hanabi_elites::game::{Action, GameState, TerminalReason};

pub struct Expect {
    pub score: u8,
    pub lives: u8,
    pub tokens: u8,
    pub discard: Vec<Card>,
    pub terminal: Option<TerminalReason>,
    pub turns: u32,
}

pub struct Script {
    pub name: &'static str,
    pub deck: Vec<Card>,
    pub actions: Vec<Action>,
    pub expect: Expect,
}

pub fn cards(s: &str) -> Vec<Card> {
    s.split_whitespace().map(|c| c.parse().expect("card literal")).collect()
}

pub fn canonical() -> Vec<Card> {
    CardCounts::STANDARD.to_cards()
}

pub fn full_deck(prefix: &[Card]) -> Vec<Card> {
    let mut rest = CardCounts::STANDARD;
    for &c in prefix {
        assert!(rest.remove(c), "prefix uses {c} too often");
    }
    let mut deck = prefix.to_vec();
    deck.extend(rest.to_cards());
    deck
}

/// Every standard card except `excluded`.
pub fn all_except(excluded: &[Card]) -> Vec<Card> {
    let mut rest = CardCounts::STANDARD;
    for &c in excluded {
        assert!(rest.remove(c));
    }
    rest.to_cards()
}

/// `P<slot>`, `D<slot>`, `HC:<color>`, `HR:<rank>`; players alternate from 0,
/// so hints target the player who did not act.
pub fn acts(s: &str) -> Vec<Action> {
    s.split_whitespace()
        .enumerate()
        .map(|(i, tok)| {
            let target = ((i + 1) % 2) as u8;
            match tok.split_at(1) {
                ("P", n) => Action::Play { slot: n.parse().unwrap() },
                ("D", n) => Action::Discard { slot: n.parse().unwrap() },
                ("H", rest) => match rest.split_once(':').unwrap() {
                    ("C", c) => Action::HintColor { target, color: Color::from_letter(c.chars().next().unwrap()).unwrap() },
                    ("R", r) => Action::HintRank { target, rank: r.parse().unwrap() },
                    _ => panic!("bad hint {tok}"),
                },
                _ => panic!("bad action {tok}"),
            }
        })
        .collect()
}

fn repeat(tok: &str, n: usize) -> String {
    vec![tok; n].join(" ")
}

const PLAY_ORDER: &str = "B1 B2 B3 B4 B5 R1 R2 R3 R4 R5 Y1 Y2 Y3 Y4 Y5 W1 W2 W3 W4 W5 G1 G2 G3 G4 G5";

/// Player 0 hints the color of player 1's oldest card, player 1 discards it,
/// until the deck is gone; then `last_two` are the two final-round turns.
fn hint_discard_until_empty(last_two: &str) -> Vec<Action> {
    let deck = canonical();
    // player 1's cards in the order they reach slot 0
    let queue: Vec<Card> = [1, 3, 5, 7, 9].iter().map(|&i| deck[i]).chain(deck[10..].iter().copied()).collect();
    let mut s = String::new();
    for card in &queue[..40] {
        s += &format!("HC:{} D0 ", card.color.letter());
    }
    s += last_two;
    acts(&s)
}

pub fn scripts() -> Vec<Script> {
    let play_order = cards(PLAY_ORDER);
    let mut out = vec![
        Script {
            name: "perfect game, colors in turn",
            deck: full_deck(&play_order),
            actions: acts(&repeat("P0", 25)),
            expect: Expect { score: 25, lives: 3, tokens: 8, discard: vec![], terminal: Some(TerminalReason::Victory), turns: 25 },
        },
        Script {
            name: "perfect game, ranks in turn",
            deck: full_deck(&cards(
                "B1 R1 Y1 W1 G1 B2 R2 Y2 W2 G2 B3 R3 Y3 W3 G3 B4 R4 Y4 W4 G4 B5 R5 Y5 W5 G5",
            )),
            actions: acts(&repeat("P0", 25)),
            expect: Expect { score: 25, lives: 3, tokens: 8, discard: vec![], terminal: Some(TerminalReason::Victory), turns: 25 },
        },
        Script {
            name: "perfect game, colors reversed",
            deck: full_deck(&cards(
                "G1 G2 G3 G4 G5 W1 W2 W3 W4 W5 Y1 Y2 Y3 Y4 Y5 R1 R2 R3 R4 R5 B1 B2 B3 B4 B5",
            )),
            actions: acts(&repeat("P0", 25)),
            expect: Expect { score: 25, lives: 3, tokens: 8, discard: vec![], terminal: Some(TerminalReason::Victory), turns: 25 },
        },
        Script {
            // hands: p0 B1 B3 B5 R2 R4, p1 B2 B4 R1 R3 R5; four hints leave 4 tokens,
            // five completed colors would give 9, capped at 8
            name: "perfect game after four hints",
            deck: full_deck(&play_order),
            actions: acts(&format!("HR:2 HR:1 HC:B HC:R {}", repeat("P0", 25))),
            expect: Expect { score: 25, lives: 3, tokens: 8, discard: vec![], terminal: Some(TerminalReason::Victory), turns: 29 },
        },
        Script {
            name: "perfect game after six hints",
            deck: full_deck(&play_order),
            actions: acts(&format!("HR:2 HR:1 HC:B HC:R HR:4 HR:3 {}", repeat("P0", 25))),
            expect: Expect { score: 25, lives: 3, tokens: 7, discard: vec![], terminal: Some(TerminalReason::Victory), turns: 31 },
        },
        Script {
            name: "three misplays in a row",
            deck: full_deck(&cards("B2 R2 Y2")),
            actions: acts("P0 P0 P0"),
            expect: Expect {
                score: 0,
                lives: 0,
                tokens: 8,
                discard: cards("B2 R2 Y2"),
                terminal: Some(TerminalReason::LivesExhausted),
                turns: 3,
            },
        },
        Script {
            name: "score kept when lives run out",
            deck: full_deck(&cards("B1 B2 B3 B5 R2 G4")),
            actions: acts(&repeat("P0", 6)),
            expect: Expect {
                score: 3,
                lives: 0,
                tokens: 8,
                discard: cards("B5 R2 G4"),
                terminal: Some(TerminalReason::LivesExhausted),
                turns: 6,
            },
        },
        Script {
            name: "duplicate ones misplayed",
            deck: full_deck(&cards("B1 B1 B1 R1")),
            actions: acts("P0 P0 P0 P0"),
            expect: Expect { score: 2, lives: 1, tokens: 8, discard: cards("B1 B1"), terminal: None, turns: 4 },
        },
        Script {
            // canonical deal: p0 B1 B1 B2 B3 B4, p1 B1 B2 B3 B4 B5
            name: "eight hints then two discards",
            deck: canonical(),
            actions: acts(&format!("{} D0 D4", repeat("HC:B", 8))),
            expect: Expect { score: 0, lives: 3, tokens: 2, discard: cards("B1 B5"), terminal: None, turns: 10 },
        },
        Script {
            name: "blue completed from mixed slots, token returned",
            deck: canonical(),
            actions: acts("HC:B P0 P2 P1 P3 P2 P3 P2 P3"),
            expect: Expect { score: 7, lives: 2, tokens: 8, discard: cards("R1"), terminal: None, turns: 9 },
        },
        Script {
            name: "hint and discard pairs",
            deck: canonical(),
            actions: acts("HR:1 D0 HR:1 D4 HR:5 D3"),
            expect: Expect { score: 0, lives: 3, tokens: 8, discard: cards("B1 R1 B5"), terminal: None, turns: 6 },
        },
        Script {
            name: "tokens drained then play, misplay, discard",
            deck: canonical(),
            actions: acts(&format!("{} P0 P0 D0", repeat("HC:B", 8))),
            expect: Expect { score: 1, lives: 2, tokens: 1, discard: cards("B1 B1"), terminal: None, turns: 11 },
        },
        Script {
            name: "deck exhausted, two final discards",
            deck: canonical(),
            actions: hint_discard_until_empty("HC:G D0"),
            expect: Expect {
                score: 0,
                lives: 3,
                tokens: 8,
                discard: all_except(&cards("B1 B1 B2 B3 B4 G3 G4 G4 G5")),
                terminal: Some(TerminalReason::DeckExhausted),
                turns: 82,
            },
        },
        Script {
            // final round: p0 plays B1, p1 misplays G3
            name: "deck exhausted, final round plays",
            deck: canonical(),
            actions: hint_discard_until_empty("P0 P0"),
            expect: Expect {
                score: 1,
                lives: 2,
                tokens: 8,
                discard: all_except(&cards("B1 B1 B2 B3 B4 G3 G4 G4 G5")),
                terminal: Some(TerminalReason::DeckExhausted),
                turns: 82,
            },
        },
        Script {
            name: "twelve cards played",
            deck: full_deck(&play_order),
            actions: acts(&repeat("P0", 12)),
            expect: Expect { score: 12, lives: 3, tokens: 8, discard: vec![], terminal: None, turns: 12 },
        },
    ];
    // k good plays followed by three misplays
    for (k, misplays) in [(1, "R2 B1 G5"), (5, "B1 R2 Y3"), (10, "B1 R1 Y2"), (17, "Y1 W4 G2"), (24, "B1 R1 Y1")] {
        let mut prefix = play_order[..k].to_vec();
        prefix.extend(cards(misplays));
        out.push(Script {
            name: Box::leak(format!("{k} plays then three misplays").into_boxed_str()),
            deck: full_deck(&prefix),
            actions: acts(&repeat("P0", k + 3)),
            expect: Expect {
                score: k as u8,
                lives: 0,
                tokens: 8,
                discard: cards(misplays),
                terminal: Some(TerminalReason::LivesExhausted),
                turns: k as u32 + 3,
            },
        });
    }
    out
}

/// Replays `script`, checking invariants after every action, and returns the
/// first mismatch against the expectation.
pub fn check(script: &Script) -> Result<(), String> {
    let mut state = GameState::from_deck_order(&script.deck);
    let mut deck_empty_at = None;
    for (i, &a) in script.actions.iter().enumerate() {
        state.apply(a).map_err(|e| format!("action {i} ({a}): {e}"))?;
        if state.card_multiset() != CardCounts::STANDARD {
            return Err(format!("card multiset changed at action {i}"));
        }
        if state.is_terminal() && i + 1 != script.actions.len() {
            return Err(format!("game ended early at action {i}"));
        }
        if deck_empty_at.is_none() && state.deck_size() == 0 {
            deck_empty_at = Some(i);
        }
    }
    let e = &script.expect;
    let got_discard = state.discard().to_cards();
    let mut want_discard = e.discard.clone();
    want_discard.sort();
    let got = (state.score(), state.lives(), state.info_tokens(), state.terminal_reason(), state.turn());
    let want = (e.score, e.lives, e.tokens, e.terminal, e.turns);
    if got != want {
        return Err(format!("(score, lives, tokens, terminal, turns): got {got:?}, want {want:?}"));
    }
    if got_discard != want_discard {
        return Err(format!("discard: got {got_discard:?}, want {want_discard:?}"));
    }
    if e.terminal == Some(TerminalReason::DeckExhausted) {
        let extra = script.actions.len() - 1 - deck_empty_at.expect("deck emptied");
        if extra != 2 {
            return Err(format!("{extra} turns after the last draw, want 2"));
        }
    }
    Ok(())
}
