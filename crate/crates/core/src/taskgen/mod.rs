//! Pretext-task generators: anomaly grounding, object counting and temporal
//! jigsaw.
//!
//! Each generator is split into a *plan* step, which draws every random
//! choice that determines the answer, and a *render* step, which does the
//! pixel work. Plans need only the video's shape (frame count, fps,
//! resolution), so answer distributions can be studied without touching
//! pixels. All randomness comes from the per-record seed: the plan reads
//! stream 0 of a ChaCha8 generator and the render reads stream 1.

pub mod counting;
pub mod grounding;
pub mod jigsaw;
pub mod prompt;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::frame::{Fps, FrameSequence, TimeInterval};

pub use counting::{
    gen_counting, plan_counting, planned_counting, render_counting, CountingParams, CountingPlan, CountingSpec, PlacedShape,
};
pub use grounding::{
    gen_grounding, plan_grounding, planned_grounding, GroundingParams, GroundingPlan, GroundingSpec,
};
pub use jigsaw::{
    arrange_segments, gen_jigsaw, invert_permutation, plan_jigsaw, planned_jigsaw, JigsawParams, JigsawPlan,
    JigsawSpec,
};
pub use prompt::{render_prompt, PromptParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Grounding,
    Counting,
    Jigsaw,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Grounding, Task::Counting, Task::Jigsaw];

    pub fn name(self) -> &'static str {
        match self {
            Task::Grounding => "grounding",
            Task::Counting => "counting",
            Task::Jigsaw => "jigsaw",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "grounding" | "anomaly_grounding" => Ok(Task::Grounding),
            "counting" | "object_counting" => Ok(Task::Counting),
            "jigsaw" | "temporal_jigsaw" => Ok(Task::Jigsaw),
            _ => Err(Error::Config(format!("unknown task {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Hard,
}

impl Difficulty {
    pub fn name(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Hard => "hard",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Difficulty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "hard" => Ok(Difficulty::Hard),
            _ => Err(Error::Config(format!("unknown difficulty {s:?}"))),
        }
    }
}

/// A typed ground-truth (or parsed predicted) answer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum AnswerValue {
    Interval { start: f64, end: f64 },
    Counts { values: Vec<i64> },
    Permutation { order: Vec<usize> },
}

impl AnswerValue {
    pub fn interval(iv: TimeInterval) -> Self {
        AnswerValue::Interval {
            start: iv.start(),
            end: iv.end(),
        }
    }

    pub fn task(&self) -> Task {
        match self {
            AnswerValue::Interval { .. } => Task::Grounding,
            AnswerValue::Counts { .. } => Task::Counting,
            AnswerValue::Permutation { .. } => Task::Jigsaw,
        }
    }

    pub fn as_interval(&self) -> Option<TimeInterval> {
        match self {
            AnswerValue::Interval { start, end } => TimeInterval::new(*start, *end).ok(),
            _ => None,
        }
    }

    pub fn as_counts(&self) -> Option<&[i64]> {
        match self {
            AnswerValue::Counts { values } => Some(values),
            _ => None,
        }
    }

    pub fn as_permutation(&self) -> Option<&[usize]> {
        match self {
            AnswerValue::Permutation { order } => Some(order),
            _ => None,
        }
    }

    /// The answer as a model would be expected to write it.
    pub fn display_text(&self) -> String {
        match self {
            AnswerValue::Interval { start, end } => format!("{start} - {end}"),
            AnswerValue::Counts { values } => values
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(", "),
            AnswerValue::Permutation { order } => permutation_text(order),
        }
    }
}

/// Digits without separators for n <= 9, comma separated otherwise.
pub fn permutation_text(order: &[usize]) -> String {
    if order.len() <= 9 {
        order.iter().map(|v| v.to_string()).collect()
    } else {
        order.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Checks that `order` is a bijection on `1..=order.len()`.
pub fn is_permutation(order: &[usize]) -> bool {
    let n = order.len();
    let mut seen = vec![false; n];
    for &v in order {
        if v == 0 || v > n || seen[v - 1] {
            return false;
        }
        seen[v - 1] = true;
    }
    true
}

/// One generated task instance, one line of the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QARecord {
    pub id: String,
    pub task: Task,
    pub subtype: String,
    pub difficulty: Option<Difficulty>,
    pub video_dir: String,
    pub fps: Fps,
    pub prompt: String,
    pub answer: AnswerValue,
    pub seed: u64,
    pub gen_params: serde_json::Value,
}

impl QARecord {
    /// `task/subtype`, the report key for this record.
    pub fn cell(&self) -> String {
        format!("{}/{}", self.task, self.subtype)
    }

    pub fn source(&self) -> Result<SourceRef> {
        let v = self
            .gen_params
            .get("source")
            .ok_or_else(|| Error::Config(format!("record {} has no source in gen_params", self.id)))?;
        serde_json::from_value(v.clone()).map_err(|e| Error::json(format!("record {}", self.id), e))
    }
}

/// Where a generated video came from. Stored in `gen_params.source`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceRef {
    pub video_id: String,
    /// Source frame directory, when the source lives on disk.
    pub dir: Option<String>,
    pub num_frames: usize,
    pub fps: Fps,
    pub width: u32,
    pub height: u32,
}

impl SourceRef {
    pub fn of(seq: &FrameSequence, dir: Option<String>) -> Self {
        SourceRef {
            video_id: seq.id().to_string(),
            dir,
            num_frames: seq.len(),
            fps: seq.fps(),
            width: seq.width(),
            height: seq.height(),
        }
    }

    pub fn from_shape(video_id: &str, shape: &VideoShape, dir: Option<String>) -> Self {
        SourceRef {
            video_id: video_id.to_string(),
            dir,
            num_frames: shape.num_frames,
            fps: shape.fps,
            width: shape.width,
            height: shape.height,
        }
    }

    pub fn shape(&self) -> VideoShape {
        VideoShape {
            num_frames: self.num_frames,
            fps: self.fps,
            width: self.width,
            height: self.height,
        }
    }

    pub fn duration(&self) -> f64 {
        self.fps.duration(self.num_frames)
    }
}

/// Shape of a video, all a plan needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VideoShape {
    pub num_frames: usize,
    pub fps: Fps,
    pub width: u32,
    pub height: u32,
}

impl VideoShape {
    pub fn of(seq: &FrameSequence) -> Self {
        VideoShape {
            num_frames: seq.len(),
            fps: seq.fps(),
            width: seq.width(),
            height: seq.height(),
        }
    }

    pub fn duration(&self) -> f64 {
        self.fps.duration(self.num_frames)
    }
}

/// Identity of the record being generated.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordMeta {
    pub id: String,
    pub video_dir: String,
    pub seed: u64,
    /// Source directory recorded in `gen_params` for later verification.
    pub source_dir: Option<String>,
}

/// 64-bit record seed from a hash of its identity. Independent of generation
/// order, so records can be produced in parallel.
pub fn record_seed(master_seed: u64, video_id: &str, task: Task, subtype: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    for part in [video_id, task.name(), subtype] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 has 32 bytes"))
}

pub(crate) fn plan_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

pub(crate) fn render_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

pub(crate) fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("generator params serialize")
}
