//! Temporal jigsaw: cut the video into `n` equal segments, shuffle them,
//! and ask for the order that restores the original.
//!
//! With `V' = [S_pi(1), ..., S_pi(n)]` the answer is `pi^-1`: entry `i` is
//! the position in the shuffled video of original segment `i`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    is_permutation, plan_rng, to_value, AnswerValue, Difficulty, QARecord, RecordMeta, SourceRef,
    Task, VideoShape,
};
use crate::error::{Error, Result};
use crate::frame::{Frame, FrameSequence};
use crate::perturb::non_identity_permutation;
use crate::taskgen::prompt::{render_prompt, PromptParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JigsawSpec {
    pub n: usize,
}

impl JigsawSpec {
    pub fn for_difficulty(d: Difficulty) -> Self {
        match d {
            Difficulty::Easy => JigsawSpec { n: 6 },
            Difficulty::Hard => JigsawSpec { n: 8 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("jigsaw needs n >= 2, got {}", self.n)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JigsawPlan {
    pub n: usize,
    pub segment_len: usize,
    /// `pi`, 1-based: shuffled slot `j` holds original segment `pi[j]`.
    pub permutation: Vec<usize>,
    /// `pi^-1`, the expected answer.
    pub answer: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JigsawParams {
    pub source: SourceRef,
    pub n: usize,
    pub segment_len: usize,
    /// Leading source frames used; the `T mod n` tail is dropped.
    pub used_frames: usize,
    pub permutation: Vec<usize>,
}

/// Inverse of a 1-based permutation.
pub fn invert_permutation(perm: &[usize]) -> Result<Vec<usize>> {
    if !is_permutation(perm) {
        return Err(Error::NotPermutation {
            n: perm.len(),
            values: perm.to_vec(),
        });
    }
    let mut inv = vec![0; perm.len()];
    for (j, &v) in perm.iter().enumerate() {
        inv[v - 1] = j + 1;
    }
    Ok(inv)
}

pub fn plan_jigsaw<R: Rng + ?Sized>(shape: &VideoShape, spec: &JigsawSpec, rng: &mut R) -> Result<JigsawPlan> {
    spec.validate()?;
    if shape.num_frames < spec.n {
        return Err(Error::VideoTooShort {
            id: String::new(),
            reason: format!("{} frames cannot form {} segments", shape.num_frames, spec.n),
        });
    }
    let permutation: Vec<usize> = non_identity_permutation(spec.n, rng)
        .into_iter()
        .map(|v| v + 1)
        .collect();
    let answer = invert_permutation(&permutation)?;
    Ok(JigsawPlan {
        n: spec.n,
        segment_len: shape.num_frames / spec.n,
        permutation,
        answer,
    })
}

/// Reorders equal segments of `frames` so that slot `j` holds segment `order[j]`.
pub fn arrange_segments(frames: &[Frame], segment_len: usize, order: &[usize]) -> Vec<Frame> {
    order
        .iter()
        .flat_map(|&s| frames[(s - 1) * segment_len..s * segment_len].iter().cloned())
        .collect()
}

fn build_record(plan: JigsawPlan, source: SourceRef, difficulty: Option<Difficulty>, meta: &RecordMeta) -> QARecord {
    let fps = source.fps;
    let n = plan.n;
    let gen_params = JigsawParams {
        source,
        n,
        segment_len: plan.segment_len,
        used_frames: n * plan.segment_len,
        permutation: plan.permutation,
    };
    QARecord {
        id: meta.id.clone(),
        task: Task::Jigsaw,
        subtype: difficulty.map_or_else(|| format!("n{n}"), |d| d.name().to_string()),
        difficulty,
        video_dir: meta.video_dir.clone(),
        fps,
        prompt: render_prompt(&PromptParams::Jigsaw { n }),
        answer: AnswerValue::Permutation { order: plan.answer },
        seed: meta.seed,
        gen_params: to_value(&gen_params),
    }
}

fn tag_video(id: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::VideoTooShort { reason, .. } => Error::VideoTooShort {
            id: id.to_string(),
            reason,
        },
        other => other,
    }
}

pub fn gen_jigsaw(
    seq: &FrameSequence,
    spec: &JigsawSpec,
    difficulty: Option<Difficulty>,
    meta: &RecordMeta,
) -> Result<(FrameSequence, QARecord)> {
    let plan = plan_jigsaw(&VideoShape::of(seq), spec, &mut plan_rng(meta.seed)).map_err(tag_video(seq.id()))?;
    let frames = arrange_segments(seq.frames(), plan.segment_len, &plan.permutation);
    let video = FrameSequence::new(meta.id.clone(), seq.fps(), frames)?;
    let record = build_record(plan, SourceRef::of(seq, meta.source_dir.clone()), difficulty, meta);
    Ok((video, record))
}

/// The record [`gen_jigsaw`] would produce, without touching frames.
pub fn planned_jigsaw(
    source: &SourceRef,
    spec: &JigsawSpec,
    difficulty: Option<Difficulty>,
    meta: &RecordMeta,
) -> Result<QARecord> {
    let plan = plan_jigsaw(&source.shape(), spec, &mut plan_rng(meta.seed)).map_err(tag_video(&source.video_id))?;
    Ok(build_record(plan, source.clone(), difficulty, meta))
}
