//! Scoring prediction files against a manifest.
//!
//! Strict mode is the benchmark metric: IoU for grounding, exact matching
//! for counting and jigsaw. Smooth mode uses the training rewards. Means
//! are reported on a 0-100 scale; a task's mean is the mean of its subtype
//! means and the overall mean is the mean over all subtypes.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perturb::PerturbationKind;
use crate::rewards::{answer_arity, parse_answer, recall_at, score_answer, ParsedAnswer, DEFAULT_EPSILON};
use crate::taskgen::{AnswerValue, QARecord, Task};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    #[default]
    Strict,
    Smooth,
}

impl fmt::Display for ScoreMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreMode::Strict => "strict",
            ScoreMode::Smooth => "smooth",
        })
    }
}

impl FromStr for ScoreMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "strict" | "benchmark" => Ok(ScoreMode::Strict),
            "smooth" | "training" => Ok(ScoreMode::Smooth),
            _ => Err(Error::Config(format!("unknown score mode {s:?}"))),
        }
    }
}

/// One prediction line: free text, a typed answer, or both (the typed
/// answer wins).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub record_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<AnswerValue>,
}

impl Prediction {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("prediction serializes")
    }
}

/// Predictions keyed by record id, plus per-line problems found while
/// reading them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PredictionSet {
    pub by_id: HashMap<String, Prediction>,
    pub diagnostics: Vec<String>,
}

impl PredictionSet {
    pub fn from_predictions(preds: impl IntoIterator<Item = Prediction>) -> Self {
        let mut set = PredictionSet::default();
        for (i, p) in preds.into_iter().enumerate() {
            set.insert(i + 1, p);
        }
        set
    }

    fn insert(&mut self, line: usize, p: Prediction) {
        if p.text.is_none() && p.answer.is_none() {
            self.diagnostics
                .push(format!("line {line}: prediction for {} has neither text nor answer", p.record_id));
            return;
        }
        if self.by_id.contains_key(&p.record_id) {
            self.diagnostics
                .push(format!("line {line}: duplicate prediction for {}, keeping the first", p.record_id));
            return;
        }
        self.by_id.insert(p.record_id.clone(), p);
    }
}

/// Reads a predictions JSONL text. Bad lines become diagnostics.
pub fn parse_predictions(text: &str) -> PredictionSet {
    let mut set = PredictionSet::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Prediction>(line) {
            Ok(p) => set.insert(i + 1, p),
            Err(e) => set.diagnostics.push(format!("line {}: {e}", i + 1)),
        }
    }
    set
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordStatus {
    Scored,
    Missing,
    Unparseable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordScore {
    pub record_id: String,
    pub task: Task,
    pub subtype: String,
    /// In `[0, 1]`, under the report's mode.
    pub score: f64,
    pub status: RecordStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub mode: ScoreMode,
    /// Keyed `task/subtype`.
    pub per_subtype: BTreeMap<String, Aggregate>,
    pub per_task: BTreeMap<String, Aggregate>,
    pub overall: f64,
    pub missing: usize,
    pub unparseable: usize,
    /// Grounding recall at IoU thresholds 0.3, 0.5 and 0.7, in percent.
    pub grounding_recall: BTreeMap<String, f64>,
    pub diagnostics: Vec<String>,
    pub records: Vec<RecordScore>,
}

fn score_record(rec: &QARecord, pred: Option<&Prediction>, mode: ScoreMode) -> (RecordScore, Option<String>) {
    let make = |score: f64, status| RecordScore {
        record_id: rec.id.clone(),
        task: rec.task,
        subtype: rec.subtype.clone(),
        score,
        status,
    };
    let Some(pred) = pred else {
        return (make(0.0, RecordStatus::Missing), None);
    };
    let parsed = match (&pred.answer, &pred.text) {
        (Some(a), _) => ParsedAnswer::Answer(a.clone()),
        (None, Some(t)) => parse_answer(t, rec.task, answer_arity(&rec.answer)),
        (None, None) => ParsedAnswer::Unparseable,
    };
    if parsed.is_unparseable() {
        return (make(0.0, RecordStatus::Unparseable), None);
    }
    match score_answer(&rec.answer, &parsed, DEFAULT_EPSILON) {
        Ok(s) => {
            let v = match mode {
                ScoreMode::Strict => s.strict,
                ScoreMode::Smooth => s.smooth,
            };
            (make(v, RecordStatus::Scored), None)
        }
        // a typed answer of the wrong kind or size cannot be scored
        Err(e) => (
            make(0.0, RecordStatus::Unparseable),
            Some(format!("record {}: {e}", rec.id)),
        ),
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> Aggregate {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    Aggregate {
        mean: if n == 0 { 0.0 } else { sum / n as f64 },
        n,
    }
}

pub fn evaluate(records: &[QARecord], preds: &PredictionSet, mode: ScoreMode) -> ScoreReport {
    let run = |rec: &QARecord| score_record(rec, preds.by_id.get(&rec.id), mode);
    #[cfg(feature = "parallel")]
    let scored: Vec<(RecordScore, Option<String>)> = {
        use rayon::prelude::*;
        records.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let scored: Vec<(RecordScore, Option<String>)> = records.iter().map(run).collect();

    let mut diagnostics = preds.diagnostics.clone();
    let known: std::collections::HashSet<&str> = records.iter().map(|r| r.id.as_str()).collect();
    let mut unknown: Vec<&String> = preds.by_id.keys().filter(|k| !known.contains(k.as_str())).collect();
    unknown.sort();
    diagnostics.extend(unknown.into_iter().map(|k| format!("prediction for unknown record {k}")));

    let mut scores = Vec::with_capacity(scored.len());
    for (s, diag) in scored {
        diagnostics.extend(diag);
        scores.push(s);
    }

    // fixed-order folds keep the report independent of scheduling
    let mut by_subtype: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for s in &scores {
        by_subtype
            .entry(format!("{}/{}", s.task, s.subtype))
            .or_default()
            .push(s.score * 100.0);
    }
    let per_subtype: BTreeMap<String, Aggregate> =
        by_subtype.iter().map(|(k, v)| (k.clone(), mean(v.iter().copied()))).collect();
    let mut per_task = BTreeMap::new();
    for task in Task::ALL {
        let prefix = format!("{task}/");
        let cells: Vec<&Aggregate> = per_subtype
            .iter()
            .filter(|(k, _)| k.starts_with(&prefix))
            .map(|(_, a)| a)
            .collect();
        if cells.is_empty() {
            continue;
        }
        let agg = mean(cells.iter().map(|a| a.mean));
        per_task.insert(
            task.name().to_string(),
            Aggregate {
                mean: agg.mean,
                n: cells.iter().map(|a| a.n).sum(),
            },
        );
    }
    let overall = mean(per_subtype.values().map(|a| a.mean)).mean;

    let mut grounding_recall = BTreeMap::new();
    if mode == ScoreMode::Strict {
        let ious: Vec<f64> = scores
            .iter()
            .filter(|s| s.task == Task::Grounding)
            .map(|s| s.score)
            .collect();
        if !ious.is_empty() {
            for tau in ["0.3", "0.5", "0.7"] {
                let r = recall_at(&ious, tau.parse().expect("literal")).expect("threshold in range");
                grounding_recall.insert(tau.to_string(), r * 100.0);
            }
        }
    }

    ScoreReport {
        mode,
        missing: scores.iter().filter(|s| s.status == RecordStatus::Missing).count(),
        unparseable: scores.iter().filter(|s| s.status == RecordStatus::Unparseable).count(),
        per_subtype,
        per_task,
        overall,
        grounding_recall,
        diagnostics,
        records: scores,
    }
}

fn subtype_rank(key: &str) -> (usize, usize, String) {
    let (task, sub) = key.split_once('/').unwrap_or((key, ""));
    let t = Task::ALL.iter().position(|x| x.name() == task).unwrap_or(Task::ALL.len());
    // counting and jigsaw first in the order the benchmark table uses them
    let t = [1, 0, 2].get(t).copied().unwrap_or(3);
    let s = match sub {
        "easy" => 0,
        "hard" => 1,
        _ => sub
            .parse::<PerturbationKind>()
            .ok()
            .and_then(|k| PerturbationKind::ALL.iter().position(|x| *x == k))
            .map_or(PerturbationKind::ALL.len(), |p| p + 2),
    };
    (t, s, sub.to_string())
}

impl ScoreReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text table: one row per subtype, a task average after
    /// each task's rows, then the overall mean.
    pub fn to_table(&self) -> String {
        let mut keys: Vec<&String> = self.per_subtype.keys().collect();
        keys.sort_by_key(|k| subtype_rank(k));
        let mut out = String::new();
        let _ = writeln!(out, "{:<10} {:<14} {:>6} {:>7}", "task", "subtype", "n", self.mode);
        let mut current: Option<&str> = None;
        let flush = |out: &mut String, task: Option<&str>| {
            if let Some(t) = task {
                if let Some(a) = self.per_task.get(t) {
                    let _ = writeln!(out, "{:<10} {:<14} {:>6} {:>7.1}", t, "average", a.n, a.mean);
                }
            }
        };
        for key in keys {
            let (task, sub) = key.split_once('/').unwrap_or((key, ""));
            if current != Some(task) {
                flush(&mut out, current);
                current = Some(task);
            }
            let a = &self.per_subtype[key];
            let _ = writeln!(out, "{:<10} {:<14} {:>6} {:>7.1}", task, sub, a.n, a.mean);
        }
        flush(&mut out, current);
        let _ = writeln!(out, "{:<10} {:<14} {:>6} {:>7.1}", "overall", "", self.records.len(), self.overall);
        for (tau, r) in &self.grounding_recall {
            let _ = writeln!(out, "grounding R@{tau}: {r:.1}");
        }
        let _ = writeln!(out, "missing: {}  unparseable: {}", self.missing, self.unparseable);
        out
    }
}
