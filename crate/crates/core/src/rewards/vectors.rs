//! Golden test vectors for clients of the scoring protocol.
//!
//! Each vector pairs a request with the response this engine produces for
//! it. The mix covers all three tasks, typed and free-text predictions, and
//! unparseable text.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::protocol::{score_request, ScoreRequest, ScoreResponse};
use crate::taskgen::{permutation_text, AnswerValue, Task};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenVector {
    pub request: ScoreRequest,
    pub expected: ScoreResponse,
}

/// Parameters of the shipped `test_vectors.jsonl`.
pub const GOLDEN_COUNT: usize = 500;
pub const GOLDEN_SEED: u64 = 20251016;

const JUNK: [&str; 6] = [
    "I cannot tell from the video.",
    "",
    "The answer is unclear",
    "maybe around the middle",
    "none",
    "order: ?",
];

fn random_perm<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (1..=n).collect();
    p.shuffle(rng);
    p
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

fn make_request<R: Rng>(i: usize, rng: &mut R) -> ScoreRequest {
    let task = Task::ALL[i % 3];
    let junk = rng.random_bool(0.1);
    let typed = !junk && rng.random_bool(0.3);
    let (gt, pred_text, pred) = match task {
        Task::Grounding => {
            let d = rng.random_range(20.0..120.0f64);
            let s = round1(rng.random_range(0.0..d * 0.8));
            let e = round1(s + rng.random_range(1.0..d * 0.5)).max(s + 0.5);
            let ps = round1(rng.random_range(0.0..d * 0.8));
            let pe = round1(ps + rng.random_range(0.5..d * 0.5));
            let gt = AnswerValue::Interval { start: s, end: e };
            let text = format!("The anomaly spans {ps} - {pe} seconds.");
            (gt, text, AnswerValue::Interval { start: ps, end: pe })
        }
        Task::Counting => {
            let max = if rng.random_bool(0.5) { 9 } else { 16 };
            let gt: Vec<i64> = (0..3).map(|_| rng.random_range(1..=max)).collect();
            let pred: Vec<i64> = gt
                .iter()
                .map(|&g| (g + rng.random_range(-3..=3)).max(0))
                .collect();
            let text = format!(
                "circles: {}, rectangles: {}, triangles: {}",
                pred[0], pred[1], pred[2]
            );
            (
                AnswerValue::Counts { values: gt },
                text,
                AnswerValue::Counts { values: pred },
            )
        }
        Task::Jigsaw => {
            let n = if rng.random_bool(0.5) { 6 } else { 8 };
            let gt = random_perm(n, rng);
            let pred = if rng.random_bool(0.2) {
                gt.clone()
            } else {
                random_perm(n, rng)
            };
            let text = format!("The correct order is {}.", permutation_text(&pred));
            (
                AnswerValue::Permutation { order: gt },
                text,
                AnswerValue::Permutation { order: pred },
            )
        }
    };
    let record_id = format!("vec-{i:04}");
    if junk {
        ScoreRequest {
            record_id,
            task,
            gt,
            pred_text: Some(JUNK[rng.random_range(0..JUNK.len())].to_string()),
            pred: None,
            epsilon: None,
        }
    } else if typed {
        ScoreRequest {
            record_id,
            task,
            gt,
            pred_text: None,
            pred: Some(pred),
            epsilon: None,
        }
    } else {
        ScoreRequest {
            record_id,
            task,
            gt,
            pred_text: Some(pred_text),
            pred: None,
            epsilon: None,
        }
    }
}

pub fn golden_vectors(count: usize, seed: u64) -> Vec<GoldenVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let request = make_request(i, &mut rng);
            let expected = score_request(&request).expect("generated requests are well formed");
            GoldenVector { request, expected }
        })
        .collect()
}
