use super::evaluate::{evaluate, Evaluation};
use super::QdConfig;
use crate::agent::Chromosome;
use crate::descriptors::{niche_of, BehaviorDescriptor, NicheCoord, NUM_NICHES};
use crate::rules::catalog_hash;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// The best known individual of a niche.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Elite {
    pub chromosome: Chromosome,
    /// Mean self-play score of the latest measurement.
    pub fitness: f64,
    /// Games behind `fitness`.
    pub games_played: u32,
    pub descriptor: BehaviorDescriptor,
    /// Seed of the stream the individual was generated from.
    pub lineage_seed: u64,
}

impl Elite {
    pub fn from_evaluation(chromosome: Chromosome, eval: &Evaluation, lineage_seed: u64) -> Option<Elite> {
        Some(Elite {
            chromosome,
            fitness: eval.fitness,
            games_played: eval.games,
            descriptor: eval.descriptor()?,
            lineage_seed,
        })
    }

    pub fn niche(&self) -> NicheCoord {
        niche_of(&self.descriptor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InsertOutcome {
    /// The niche was empty.
    Inserted,
    /// The candidate beat the re-measured incumbent.
    Replaced { incumbent_fitness: f64 },
    /// The incumbent held (ties included); its fitness is now the re-measurement.
    Retained { incumbent_fitness: f64 },
}

/// One elite per niche of the 20×20 grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Archive {
    cells: Vec<Option<Elite>>,
    /// Occupied niche indices, ascending.
    occupied: Vec<u16>,
}

impl Default for Archive {
    fn default() -> Self {
        Archive::new()
    }
}

impl Archive {
    pub fn new() -> Archive {
        Archive { cells: vec![None; NUM_NICHES], occupied: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn get(&self, niche: NicheCoord) -> Option<&Elite> {
        self.cells[niche.index()].as_ref()
    }

    /// Elites in ascending niche order.
    pub fn iter(&self) -> impl Iterator<Item = (NicheCoord, &Elite)> + '_ {
        self.occupied.iter().map(|&i| {
            let i = i as usize;
            (NicheCoord::from_index(i), self.cells[i].as_ref().expect("occupied cell"))
        })
    }

    pub fn elites(&self) -> impl Iterator<Item = &Elite> + '_ {
        self.iter().map(|(_, e)| e)
    }

    pub fn occupied_niches(&self) -> Vec<NicheCoord> {
        self.occupied.iter().map(|&i| NicheCoord::from_index(i as usize)).collect()
    }

    /// Niches whose elite has nonzero fitness.
    pub fn coverage(&self) -> usize {
        self.elites().filter(|e| e.fitness > 0.0).count()
    }

    /// Elites with nonzero fitness, in niche order.
    pub fn valid_elites(&self) -> Vec<Elite> {
        self.elites().filter(|e| e.fitness > 0.0).copied().collect()
    }

    /// Highest-fitness elite; ties go to the lower niche.
    pub fn best(&self) -> Option<&Elite> {
        self.elites().fold(None, |best: Option<&Elite>, e| match best {
            Some(b) if b.fitness >= e.fitness => Some(b),
            _ => Some(e),
        })
    }

    pub fn mean_fitness(&self) -> Option<f64> {
        (!self.is_empty()).then(|| self.elites().map(|e| e.fitness).sum::<f64>() / self.len() as f64)
    }

    /// Stores `elite` under its descriptor's niche, replacing any incumbent.
    pub fn put(&mut self, elite: Elite) -> Option<Elite> {
        let idx = elite.niche().index();
        let old = self.cells[idx].replace(elite);
        if old.is_none() {
            let pos = self.occupied.binary_search(&(idx as u16)).unwrap_err();
            self.occupied.insert(pos, idx as u16);
        }
        old
    }

    /// Uniformly random occupied niche.
    pub fn random_niche<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<NicheCoord> {
        if self.is_empty() {
            return None;
        }
        let i = rng.random_range(0..self.occupied.len());
        Some(NicheCoord::from_index(self.occupied[i] as usize))
    }

    /// Competes `candidate` for its niche. An incumbent is first re-measured
    /// with `games` fresh games; the higher fitness wins, ties keep the incumbent.
    pub fn try_insert<R: Rng + ?Sized>(&mut self, candidate: Elite, games: u32, rng: &mut R) -> InsertOutcome {
        self.try_insert_with(candidate, |inc| evaluate(&inc.chromosome, games, rng))
    }

    /// As [`Archive::try_insert`], with the incumbent re-measurement supplied by `reevaluate`.
    pub fn try_insert_with(
        &mut self,
        candidate: Elite,
        reevaluate: impl FnOnce(&Elite) -> Evaluation,
    ) -> InsertOutcome {
        let idx = candidate.niche().index();
        let Some(incumbent) = self.cells[idx].as_mut() else {
            self.put(candidate);
            return InsertOutcome::Inserted;
        };
        let re = reevaluate(incumbent);
        incumbent.fitness = re.fitness;
        incumbent.games_played = re.games;
        if candidate.fitness > re.fitness {
            *incumbent = candidate;
            InsertOutcome::Replaced { incumbent_fitness: re.fitness }
        } else {
            InsertOutcome::Retained { incumbent_fitness: re.fitness }
        }
    }

    pub fn to_file(&self, config: &QdConfig) -> ArchiveFile {
        ArchiveFile {
            config: *config,
            rule_catalog_hash: catalog_hash().to_string(),
            entries: self
                .iter()
                .map(|(niche, e)| ArchiveEntry {
                    niche,
                    genes: e.chromosome,
                    fitness: e.fitness,
                    games_played: e.games_played,
                    descriptor: e.descriptor,
                    lineage_seed: e.lineage_seed,
                })
                .collect(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ArchiveError {
    #[error("archive was built with rule catalog {found}, this build has {expected}")]
    CatalogMismatch { expected: String, found: String },
    #[error("entry for niche {niche} has descriptor ({c}, {r}) which maps elsewhere")]
    NicheMismatch { niche: NicheCoord, c: f64, r: f64 },
    #[error("niche {0} appears more than once")]
    DuplicateNiche(NicheCoord),
    #[error("fitness {0} outside [0, 25]")]
    Fitness(f64),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub niche: NicheCoord,
    pub genes: Chromosome,
    pub fitness: f64,
    pub games_played: u32,
    pub descriptor: BehaviorDescriptor,
    #[serde(default)]
    pub lineage_seed: u64,
}

/// On-disk archive: `{config, rule_catalog_hash, entries: [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveFile {
    pub config: QdConfig,
    pub rule_catalog_hash: String,
    pub entries: Vec<ArchiveEntry>,
}

impl ArchiveFile {
    /// Validates the file against this build's catalog and rebuilds the archive.
    pub fn into_archive(self) -> Result<(Archive, QdConfig), ArchiveError> {
        if self.rule_catalog_hash != catalog_hash() {
            return Err(ArchiveError::CatalogMismatch {
                expected: catalog_hash().to_string(),
                found: self.rule_catalog_hash,
            });
        }
        let mut archive = Archive::new();
        for e in self.entries {
            if niche_of(&e.descriptor) != e.niche {
                let BehaviorDescriptor { communicativeness: c, risk_aversion: r } = e.descriptor;
                return Err(ArchiveError::NicheMismatch { niche: e.niche, c, r });
            }
            if !(0.0..=25.0).contains(&e.fitness) {
                return Err(ArchiveError::Fitness(e.fitness));
            }
            let elite = Elite {
                chromosome: e.genes,
                fitness: e.fitness,
                games_played: e.games_played,
                descriptor: e.descriptor,
                lineage_seed: e.lineage_seed,
            };
            if archive.put(elite).is_some() {
                return Err(ArchiveError::DuplicateNiche(e.niche));
            }
        }
        Ok((archive, self.config))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("archive serializes")
    }

    pub fn load(path: &Path) -> Result<(Archive, QdConfig), ArchiveError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str::<ArchiveFile>(&text)?.into_archive()
    }

    /// Writes to a sibling temporary file, then renames over `path`.
    pub fn save_atomic(&self, path: &Path) -> Result<(), ArchiveError> {
        let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
        tmp_name.push(".tmp");
        let tmp = path.with_file_name(tmp_name);
        {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(self.to_json().as_bytes())?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}
