//! Rule-list agents: the chromosome genotype, its decision procedure, and the
//! genetic operators used by the search.

use crate::game::{Action, PlayerView, MAX_INFO_TOKENS};
use crate::rules::{apply_rule_in, catalog, RuleContext, NUM_RULES};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub const CHROMOSOME_LEN: usize = 15;
pub const MUTATION_RATE: f64 = 0.1;
pub const CROSSOVER_RATE: f64 = 0.5;
/// Per-gene probability of taking the mate's gene during crossover.
pub const GENE_SWAP_RATE: f64 = 0.5;

/// Fifteen rule ids, evaluated in order. Duplicates and rules that never
/// fire are allowed and are inherited like any other gene.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Chromosome([u8; CHROMOSOME_LEN]);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChromosomeError {
    #[error("chromosome needs {CHROMOSOME_LEN} genes, got {0}")]
    Length(usize),
    #[error("gene {0} is not a rule id (0..{NUM_RULES})")]
    Gene(u64),
    #[error("cannot parse gene {0:?}")]
    Parse(String),
}

impl Chromosome {
    pub fn new(genes: [u8; CHROMOSOME_LEN]) -> Result<Chromosome, ChromosomeError> {
        match genes.iter().find(|&&g| g as usize >= NUM_RULES) {
            Some(&g) => Err(ChromosomeError::Gene(g as u64)),
            None => Ok(Chromosome(genes)),
        }
    }

    pub fn genes(&self) -> &[u8; CHROMOSOME_LEN] {
        &self.0
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Chromosome {
        let mut genes = [0u8; CHROMOSOME_LEN];
        for g in &mut genes {
            *g = rng.random_range(0..NUM_RULES as u8);
        }
        Chromosome(genes)
    }

    /// A hand-written agent: play what is known safe, take measured risks
    /// with lives to spare, point out playable and useless cards, discard
    /// conservatively. Remaining genes repeat the first and never fire.
    pub fn reference() -> Chromosome {
        use crate::rules::{Guard, Template};
        let id = |t, g| catalog().find(t, g).expect("rule in catalog");
        let head = [
            id(Template::PlaySafeCard, Guard::Always),
            id(Template::PlayProbablySafe { tenths: 6 }, Guard::LivesAtLeast(2)),
            id(Template::TellPartnerAboutPlayableCard, Guard::Always),
            id(Template::DiscardCertainlyUseless, Guard::Always),
            id(Template::TellPartnerAboutUselessCard, Guard::TokensAtLeast(4)),
            id(Template::DiscardOldestUnhinted, Guard::Always),
            id(Template::DiscardOldest, Guard::Always),
            id(Template::TellMostInformative, Guard::Always),
        ];
        let mut genes = [head[0]; CHROMOSOME_LEN];
        genes[..head.len()].copy_from_slice(&head);
        Chromosome(genes)
    }

    /// Comma-separated gene list, e.g. `0,36,117,...`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl TryFrom<Vec<u8>> for Chromosome {
    type Error = ChromosomeError;

    fn try_from(v: Vec<u8>) -> Result<Self, Self::Error> {
        let genes: [u8; CHROMOSOME_LEN] = v.as_slice().try_into().map_err(|_| ChromosomeError::Length(v.len()))?;
        Chromosome::new(genes)
    }
}

impl From<Chromosome> for Vec<u8> {
    fn from(c: Chromosome) -> Vec<u8> {
        c.0.to_vec()
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for Chromosome {
    type Err = ChromosomeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let genes = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                let v: u64 = t.parse().map_err(|_| ChromosomeError::Parse(t.to_string()))?;
                if v as usize >= NUM_RULES {
                    return Err(ChromosomeError::Gene(v));
                }
                Ok(v as u8)
            })
            .collect::<Result<Vec<u8>, _>>()?;
        Chromosome::try_from(genes)
    }
}

/// Which gene produced a decision; `None` means the fallback fired.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub action: Action,
    pub gene: Option<usize>,
}

/// The first firing rule's action, or the fallback: discard the oldest card
/// when a token is missing, otherwise hint the rank of the partner's oldest card.
pub fn decide(chromosome: &Chromosome, view: &PlayerView) -> Action {
    decide_in(chromosome, &RuleContext::new(view)).action
}

pub fn decide_in(chromosome: &Chromosome, ctx: &RuleContext<'_>) -> Decision {
    let rules = catalog();
    for (i, &gene) in chromosome.0.iter().enumerate() {
        if let Some(action) = apply_rule_in(&rules[gene as usize], ctx) {
            return Decision { action, gene: Some(i) };
        }
    }
    Decision { action: fallback(ctx.view), gene: None }
}

pub fn fallback(view: &PlayerView) -> Action {
    if view.info_tokens < MAX_INFO_TOKENS {
        Action::Discard { slot: 0 }
    } else {
        Action::HintRank { target: view.partner(), rank: view.partner_hand[0].rank }
    }
}

/// Replaces each gene, independently with probability 0.1, by a uniformly
/// drawn rule id (which may equal the old one).
pub fn mutate<R: Rng + ?Sized>(chromosome: &Chromosome, rng: &mut R) -> Chromosome {
    let mut genes = chromosome.0;
    for g in &mut genes {
        if rng.random_bool(MUTATION_RATE) {
            *g = rng.random_range(0..NUM_RULES as u8);
        }
    }
    Chromosome(genes)
}

/// Uniform crossover: each position comes from `b` with probability 0.5, else from `a`.
pub fn crossover<R: Rng + ?Sized>(a: &Chromosome, b: &Chromosome, rng: &mut R) -> Chromosome {
    let mut genes = a.0;
    for (g, &other) in genes.iter_mut().zip(&b.0) {
        if rng.random_bool(GENE_SWAP_RATE) {
            *g = other;
        }
    }
    Chromosome(genes)
}

/// Crossover with `mate` (probability 0.5), then mutation.
pub fn make_offspring<R: Rng + ?Sized>(elite: &Chromosome, mate: &Chromosome, rng: &mut R) -> Chromosome {
    let child = if rng.random_bool(CROSSOVER_RATE) { crossover(elite, mate, rng) } else { *elite };
    mutate(&child, rng)
}
