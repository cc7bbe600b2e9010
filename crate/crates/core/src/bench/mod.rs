//! Dataset assembly, evaluation, the random-guess baseline and manifest
//! verification.
//!
//! A dataset is a list of *cells*. Each cell is a task plus a subtype (a
//! perturbation name or `mixed` for grounding, `easy`/`hard` for counting
//! and jigsaw) and a record count. Cells are expanded into work items in
//! order; every item's content depends only on the master seed, the video
//! it lands on, its cell and its index.

pub mod assemble;
pub mod baseline;
pub mod corpus;
pub mod evaluate;
pub mod manifest;
pub mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Fps;
use crate::perturb::{PerturbParams, PerturbationKind};
use crate::taskgen::{CountingSpec, Difficulty, GroundingSpec, JigsawSpec, Task};

pub use assemble::{assemble_dataset, plan_dataset, AssembleOptions, AssembleSummary};
pub use baseline::random_baseline;
pub use corpus::{Corpus, CorpusEntry};
pub use evaluate::{
    evaluate, parse_predictions, Aggregate, Prediction, PredictionSet, RecordScore, RecordStatus,
    ScoreMode, ScoreReport,
};
pub use manifest::{read_manifest, write_manifest, MANIFEST_FILE};
pub use verify::{verify_manifest, verify_records, RecordCheck, VerifyReport};

/// Grounding cell subtype that draws the kind from the whole pool.
pub const MIXED: &str = "mixed";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ByDifficulty<T> {
    pub easy: T,
    pub hard: T,
}

impl<T> ByDifficulty<T> {
    pub fn get(&self, d: Difficulty) -> &T {
        match d {
            Difficulty::Easy => &self.easy,
            Difficulty::Hard => &self.hard,
        }
    }
}

/// One entry of the task mix. Give either `count` or `fraction` (of
/// `total_items`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub task: Task,
    pub subtype: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
}

impl CellSpec {
    pub fn counted(task: Task, subtype: &str, count: usize) -> Self {
        CellSpec {
            task,
            subtype: subtype.to_string(),
            count: Some(count),
            fraction: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub name: String,
    pub total_items: usize,
    pub mix: Vec<CellSpec>,
    pub grounding: GroundingSpec,
    pub counting: ByDifficulty<CountingSpec>,
    pub jigsaw: ByDifficulty<JigsawSpec>,
    pub perturb: PerturbParams,
    pub master_seed: u64,
    /// Default corpus location; the command line can override it.
    pub corpus: Option<PathBuf>,
    /// Frame rate for decoding container videos and for frame directories
    /// without a sidecar.
    pub fps: Fps,
    /// Further videos tried when one fails a task precondition.
    pub max_video_retries: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            name: "custom".into(),
            total_items: 0,
            mix: Vec::new(),
            grounding: GroundingSpec::default(),
            counting: ByDifficulty {
                easy: CountingSpec::for_difficulty(Difficulty::Easy),
                hard: CountingSpec::for_difficulty(Difficulty::Hard),
            },
            jigsaw: ByDifficulty {
                easy: JigsawSpec::for_difficulty(Difficulty::Easy),
                hard: JigsawSpec::for_difficulty(Difficulty::Hard),
            },
            perturb: PerturbParams::default(),
            master_seed: 0,
            corpus: None,
            fps: Fps::integer(2).expect("nonzero"),
            max_video_retries: 8,
        }
    }
}

/// What a resolved cell generates.
#[derive(Clone, Debug, PartialEq)]
pub enum CellVariant {
    Grounding(GroundingSpec),
    Counting(CountingSpec, Difficulty),
    Jigsaw(JigsawSpec, Difficulty),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedCell {
    pub task: Task,
    pub subtype: String,
    pub count: usize,
    pub variant: CellVariant,
}

impl ResolvedCell {
    /// `task-subtype`, the record id prefix.
    pub fn key(&self) -> String {
        format!("{}-{}", self.task, self.subtype)
    }
}

impl DatasetConfig {
    /// 2700 items: five benchmark perturbations, counting and jigsaw at two
    /// difficulties, 300 each.
    pub fn viubench() -> Self {
        let mut mix: Vec<CellSpec> = PerturbationKind::BENCHMARK
            .iter()
            .map(|k| CellSpec::counted(Task::Grounding, k.name(), 300))
            .collect();
        for task in [Task::Counting, Task::Jigsaw] {
            for d in ["easy", "hard"] {
                mix.push(CellSpec::counted(task, d, 300));
            }
        }
        DatasetConfig {
            name: "viubench".into(),
            total_items: 2700,
            mix,
            ..DatasetConfig::default()
        }
    }

    /// 30k training items split evenly across the three tasks.
    pub fn videossr30k() -> Self {
        DatasetConfig {
            name: "videossr30k".into(),
            total_items: 30000,
            mix: vec![
                CellSpec::counted(Task::Grounding, MIXED, 10000),
                CellSpec::counted(Task::Counting, "easy", 5000),
                CellSpec::counted(Task::Counting, "hard", 5000),
                CellSpec::counted(Task::Jigsaw, "easy", 5000),
                CellSpec::counted(Task::Jigsaw, "hard", 5000),
            ],
            ..DatasetConfig::default()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "viubench" => Some(Self::viubench()),
            "videossr30k" => Some(Self::videossr30k()),
            _ => None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("dataset config", e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Validates the config and expands the mix into concrete cells whose
    /// counts sum to `total_items`. Fractions are rounded by largest
    /// remainder, ties going to the earlier cell.
    pub fn resolve(&self) -> Result<Vec<ResolvedCell>> {
        if self.mix.is_empty() {
            return Err(Error::Config("dataset mix is empty".into()));
        }
        self.perturb.validate()?;
        let mut counts = vec![0usize; self.mix.len()];
        let mut fractional: Vec<(usize, f64)> = Vec::new();
        let mut fixed = 0usize;
        let mut frac_sum = 0.0;
        for (i, cell) in self.mix.iter().enumerate() {
            match (cell.count, cell.fraction) {
                (Some(c), None) => {
                    counts[i] = c;
                    fixed += c;
                }
                (None, Some(f)) => {
                    if !(f.is_finite() && f >= 0.0) {
                        return Err(Error::Config(format!("cell {i}: fraction {f} is not a proportion")));
                    }
                    let exact = f * self.total_items as f64;
                    counts[i] = exact.floor() as usize;
                    fractional.push((i, exact - exact.floor()));
                    frac_sum += f;
                }
                _ => {
                    return Err(Error::Config(format!(
                        "cell {i} ({}/{}) needs exactly one of count or fraction",
                        cell.task, cell.subtype
                    )))
                }
            }
        }
        if frac_sum > 1.0 + 1e-9 {
            return Err(Error::Config(format!("mix fractions sum to {frac_sum} > 1")));
        }
        let assigned: usize = counts.iter().sum();
        if assigned > self.total_items {
            return Err(Error::Config(format!(
                "mix assigns {assigned} items but total_items is {}",
                self.total_items
            )));
        }
        let mut short = self.total_items - assigned;
        if short > 0 {
            if fractional.is_empty() {
                return Err(Error::Config(format!(
                    "mix counts sum to {fixed} but total_items is {}",
                    self.total_items
                )));
            }
            fractional.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            for &(i, _) in fractional.iter().cycle() {
                if short == 0 {
                    break;
                }
                counts[i] += 1;
                short -= 1;
            }
        }
        self.mix
            .iter()
            .zip(counts)
            .map(|(cell, count)| self.resolve_cell(cell, count))
            .collect()
    }

    fn resolve_cell(&self, cell: &CellSpec, count: usize) -> Result<ResolvedCell> {
        let unknown = || {
            Error::Config(format!(
                "unknown {} subtype {:?}",
                cell.task, cell.subtype
            ))
        };
        let (subtype, variant) = match cell.task {
            Task::Grounding => {
                self.grounding.validate()?;
                if cell.subtype.eq_ignore_ascii_case(MIXED) {
                    (MIXED.to_string(), CellVariant::Grounding(self.grounding.clone()))
                } else {
                    let kind: PerturbationKind = cell.subtype.parse().map_err(|_| unknown())?;
                    (kind.name().to_string(), CellVariant::Grounding(self.grounding.with_kind(kind)))
                }
            }
            Task::Counting => {
                let d: Difficulty = cell.subtype.parse().map_err(|_| unknown())?;
                let spec = self.counting.get(d).clone();
                spec.validate()?;
                (d.name().to_string(), CellVariant::Counting(spec, d))
            }
            Task::Jigsaw => {
                let d: Difficulty = cell.subtype.parse().map_err(|_| unknown())?;
                let spec = self.jigsaw.get(d).clone();
                spec.validate()?;
                (d.name().to_string(), CellVariant::Jigsaw(spec, d))
            }
        };
        Ok(ResolvedCell {
            task: cell.task,
            subtype,
            count,
            variant,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn viubench_has_2700_items() {
        let cells = DatasetConfig::viubench().resolve().unwrap();
        assert_eq!(cells.len(), 9);
        assert_eq!(cells.iter().map(|c| c.count).sum::<usize>(), 2700);
        assert!(cells.iter().all(|c| c.count == 300));
        assert_eq!(cells[0].key(), "grounding-ChannelSwap");
    }

    #[test]
    fn nine_split_three_ways() {
        let cfg = DatasetConfig {
            total_items: 9,
            mix: vec![
                CellSpec::counted(Task::Grounding, "mixed", 3),
                CellSpec::counted(Task::Counting, "easy", 3),
                CellSpec::counted(Task::Jigsaw, "hard", 3),
            ],
            ..Default::default()
        };
        let cells = cfg.resolve().unwrap();
        assert_eq!(cells.iter().map(|c| c.count).collect::<Vec<_>>(), [3, 3, 3]);
    }

    #[test]
    fn fractions_round_to_total() {
        let frac = |task, sub: &str, f| CellSpec {
            task,
            subtype: sub.into(),
            count: None,
            fraction: Some(f),
        };
        let cfg = DatasetConfig {
            total_items: 10,
            mix: vec![
                frac(Task::Grounding, "Invert", 1.0 / 3.0),
                frac(Task::Counting, "easy", 1.0 / 3.0),
                frac(Task::Jigsaw, "easy", 1.0 / 3.0),
            ],
            ..Default::default()
        };
        let counts: Vec<usize> = cfg.resolve().unwrap().iter().map(|c| c.count).collect();
        assert_eq!(counts, [4, 3, 3]);
    }

    #[test]
    fn bad_mixes_rejected() {
        let mut cfg = DatasetConfig {
            total_items: 10,
            mix: vec![CellSpec::counted(Task::Counting, "easy", 9)],
            ..Default::default()
        };
        assert!(matches!(cfg.resolve(), Err(Error::Config(_))));
        cfg.mix = vec![CellSpec::counted(Task::Counting, "medium", 10)];
        assert!(matches!(cfg.resolve(), Err(Error::Config(_))));
        cfg.mix = vec![CellSpec::counted(Task::Grounding, "Sepia", 10)];
        assert!(matches!(cfg.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = DatasetConfig::viubench();
        let back = DatasetConfig::from_json(&cfg.to_json_pretty()).unwrap();
        assert_eq!(cfg, back);
        // every field has a default
        let sparse = DatasetConfig::from_json(r#"{"total_items": 3, "mix": [{"task": "jigsaw", "subtype": "easy", "count": 3}]}"#).unwrap();
        assert_eq!(sparse.jigsaw.easy.n, 6);
    }
}
