//! Scoring engine.
//!
//! Smooth rewards give dense `[0, 1]` signals for training:
//!
//! * grounding: temporal IoU of predicted and true intervals;
//! * counting: per class `max(0, 1 - |pred - gt| / (gt + eps))`, averaged;
//! * jigsaw: `1 - E / E_max`, where `E` sums each element's displacement and
//!   `E_max = floor(n^2 / 2)` is the displacement of the reversal.
//!
//! Strict scores are the benchmark rules: raw IoU for grounding, exact
//! per-class matches for counting, all-or-nothing for jigsaw.

pub mod parse;
pub mod protocol;
pub mod vectors;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::frame::TimeInterval;
use crate::taskgen::{is_permutation, AnswerValue};

pub use parse::{parse_answer, ParsedAnswer};

pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardValue {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<f64>,
}

/// `|a ∩ b| / |a ∪ b|`.
pub fn iou(a: &TimeInterval, b: &TimeInterval) -> f64 {
    let inter = (a.end().min(b.end()) - a.start().max(b.start())).max(0.0);
    let union = a.length() + b.length() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

fn check_len(gt: usize, pred: usize) -> Result<()> {
    if gt != pred {
        return Err(Error::SizeMismatch {
            expected: gt,
            got: pred,
        });
    }
    Ok(())
}

/// Mean over classes of `max(0, 1 - |pred - gt| / (gt + eps))`. Negative
/// predictions are clamped to zero first.
pub fn reward_count(gt: &[i64], pred: &[i64], eps: f64) -> Result<RewardValue> {
    check_len(gt.len(), pred.len())?;
    if gt.is_empty() {
        return Err(Error::SizeMismatch { expected: 1, got: 0 });
    }
    let components: Vec<f64> = gt
        .iter()
        .zip(pred)
        .map(|(&y, &p)| {
            let y = y.max(0) as f64;
            let p = p.max(0) as f64;
            (1.0 - (p - y).abs() / (y + eps)).max(0.0)
        })
        .collect();
    let value = components.iter().sum::<f64>() / components.len() as f64;
    Ok(RewardValue { value, components })
}

/// Fraction of classes counted exactly.
pub fn strict_count_score(gt: &[i64], pred: &[i64]) -> Result<f64> {
    check_len(gt.len(), pred.len())?;
    if gt.is_empty() {
        return Err(Error::SizeMismatch { expected: 1, got: 0 });
    }
    let hits = gt.iter().zip(pred).filter(|(y, p)| y == p).count();
    Ok(hits as f64 / gt.len() as f64)
}

fn check_perms(gt: &[usize], pred: &[usize]) -> Result<()> {
    check_len(gt.len(), pred.len())?;
    for p in [gt, pred] {
        if !is_permutation(p) {
            return Err(Error::NotPermutation {
                n: p.len(),
                values: p.to_vec(),
            });
        }
    }
    Ok(())
}

/// `sum_k |pos(k, pred) - pos(k, gt)|`.
pub fn displacement_error(gt: &[usize], pred: &[usize]) -> Result<usize> {
    check_perms(gt, pred)?;
    let n = gt.len();
    let mut pos_gt = vec![0usize; n];
    let mut pos_pred = vec![0usize; n];
    for i in 0..n {
        pos_gt[gt[i] - 1] = i;
        pos_pred[pred[i] - 1] = i;
    }
    Ok(pos_gt.iter().zip(&pos_pred).map(|(a, b)| a.abs_diff(*b)).sum())
}

/// Largest possible displacement error for `n` elements, `floor(n^2 / 2)`.
pub fn e_max(n: usize) -> usize {
    n * n / 2
}

pub fn reward_jigsaw(gt: &[usize], pred: &[usize]) -> Result<RewardValue> {
    let e = displacement_error(gt, pred)?;
    let n = gt.len();
    if n < 2 {
        return Err(Error::InvalidParams(format!("jigsaw reward needs n >= 2, got {n}")));
    }
    let value = 1.0 - e as f64 / e_max(n) as f64;
    Ok(RewardValue {
        value,
        components: vec![e as f64, e_max(n) as f64],
    })
}

pub fn strict_jigsaw_score(gt: &[usize], pred: &[usize]) -> Result<f64> {
    check_perms(gt, pred)?;
    Ok(if gt == pred { 1.0 } else { 0.0 })
}

/// Fraction of IoUs at or above `tau`.
pub fn recall_at(ious: &[f64], tau: f64) -> Result<f64> {
    if ious.is_empty() {
        return Err(Error::InvalidParams("recall over an empty list".into()));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidParams(format!("threshold {tau} outside (0, 1]")));
    }
    Ok(ious.iter().filter(|&&v| v >= tau).count() as f64 / ious.len() as f64)
}

/// Smooth and strict scores for one prediction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub smooth: f64,
    pub strict: f64,
    pub components: serde_json::Value,
}

impl Score {
    pub fn zero() -> Self {
        Score {
            smooth: 0.0,
            strict: 0.0,
            components: json!({}),
        }
    }
}

/// Scores a parsed prediction against ground truth. Unparseable
/// predictions score zero in both modes.
pub fn score_answer(gt: &AnswerValue, pred: &ParsedAnswer, eps: f64) -> Result<Score> {
    let pred = match pred {
        ParsedAnswer::Answer(a) => a,
        ParsedAnswer::Unparseable => return Ok(Score::zero()),
    };
    match (gt, pred) {
        (AnswerValue::Interval { .. }, AnswerValue::Interval { .. }) => {
            let g = gt
                .as_interval()
                .ok_or_else(|| Error::InvalidParams("ground-truth interval is invalid".into()))?;
            let Some(p) = pred.as_interval() else {
                return Ok(Score::zero());
            };
            let v = iou(&g, &p);
            Ok(Score {
                smooth: v,
                strict: v,
                components: json!({ "iou": v }),
            })
        }
        (AnswerValue::Counts { values: g }, AnswerValue::Counts { values: p }) => {
            let r = reward_count(g, p, eps)?;
            let strict = strict_count_score(g, p)?;
            Ok(Score {
                smooth: r.value,
                strict,
                components: json!({ "per_class": r.components }),
            })
        }
        (AnswerValue::Permutation { order: g }, AnswerValue::Permutation { order: p }) => {
            let r = reward_jigsaw(g, p)?;
            let strict = strict_jigsaw_score(g, p)?;
            Ok(Score {
                smooth: r.value,
                strict,
                components: json!({
                    "displacement": r.components[0] as u64,
                    "e_max": r.components[1] as u64,
                }),
            })
        }
        _ => Err(Error::InvalidParams(format!(
            "prediction type {:?} does not match ground truth {:?}",
            pred.task(),
            gt.task()
        ))),
    }
}

/// Size parameter a parser needs: `n` for jigsaw, `K` for counting.
pub fn answer_arity(gt: &AnswerValue) -> usize {
    match gt {
        AnswerValue::Interval { .. } => 2,
        AnswerValue::Counts { values } => values.len(),
        AnswerValue::Permutation { order } => order.len(),
    }
}

/// Convenience: parse free text against `gt` and score it.
pub fn score_text(gt: &AnswerValue, text: &str, eps: f64) -> Result<(Score, ParsedAnswer)> {
    let parsed = parse_answer(text, gt.task(), answer_arity(gt));
    let score = score_answer(gt, &parsed, eps)?;
    Ok((score, parsed))
}
