//! Random-guess agent.
//!
//! * grounding: an interval drawn from the record's own interval
//!   distribution over the source duration;
//! * counting: each class uniform in `[1, max_frames * max_per_shape_per_frame]`;
//! * jigsaw: a uniform permutation of `1..=n`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Deserialize;

use crate::bench::evaluate::Prediction;
use crate::taskgen::{
    record_seed, AnswerValue, CountingSpec, GroundingSpec, QARecord, SourceRef, Task,
};

#[derive(Deserialize)]
struct GroundingInfo {
    source: SourceRef,
    #[serde(default)]
    spec: GroundingSpec,
}

#[derive(Deserialize)]
struct CountingInfo {
    spec: CountingSpec,
}

fn guess<R: Rng>(rec: &QARecord, rng: &mut R) -> AnswerValue {
    match rec.task {
        Task::Grounding => {
            let info: Option<GroundingInfo> = serde_json::from_value(rec.gen_params.clone()).ok();
            let (duration, spec) = match info {
                Some(i) => (i.source.duration(), i.spec),
                // without provenance the ground-truth end bounds the video
                None => (
                    rec.answer.as_interval().map_or(1.0, |iv| iv.end()),
                    GroundingSpec::default(),
                ),
            };
            let (start, end) = spec.sample_interval(duration, rng);
            AnswerValue::Interval { start, end }
        }
        Task::Counting => {
            let k = rec.answer.as_counts().map_or(0, |c| c.len());
            let max = serde_json::from_value::<CountingInfo>(rec.gen_params.clone())
                .map(|i| i.spec.max_total())
                .unwrap_or_else(|_| {
                    rec.difficulty
                        .map_or_else(CountingSpec::default, CountingSpec::for_difficulty)
                        .max_total()
                })
                .max(1) as i64;
            AnswerValue::Counts {
                values: (0..k).map(|_| rng.random_range(1..=max)).collect(),
            }
        }
        Task::Jigsaw => {
            let n = rec.answer.as_permutation().map_or(0, |p| p.len());
            let mut order: Vec<usize> = (1..=n).collect();
            order.shuffle(rng);
            AnswerValue::Permutation { order }
        }
    }
}

/// One typed guess per record. Each record gets its own generator derived
/// from `seed` and the record id, so guesses do not depend on record order.
pub fn random_baseline(records: &[QARecord], seed: u64) -> Vec<Prediction> {
    records
        .iter()
        .map(|rec| {
            let mut rng = crate::taskgen::plan_rng(record_seed(seed, &rec.id, rec.task, "random-baseline", 0));
            Prediction {
                record_id: rec.id.clone(),
                text: None,
                answer: Some(guess(rec, &mut rng)),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{plan_dataset, CellSpec, Corpus, CorpusEntry, DatasetConfig};
    use crate::frame::{Fps, SequenceMeta};
    use crate::taskgen::is_permutation;
    use std::path::PathBuf;

    fn corpus() -> Corpus {
        Corpus::new(vec![CorpusEntry {
            id: "v".into(),
            dir: PathBuf::new(),
            meta: SequenceMeta {
                id: "v".into(),
                fps: Fps::integer(2).unwrap(),
                width: 128,
                height: 128,
                num_frames: 120,
            },
        }])
        .unwrap()
    }

    #[test]
    fn guesses_stay_in_their_spaces() {
        let cfg = DatasetConfig {
            total_items: 60,
            mix: vec![
                CellSpec::counted(Task::Grounding, "mixed", 20),
                CellSpec::counted(Task::Counting, "hard", 20),
                CellSpec::counted(Task::Jigsaw, "easy", 20),
            ],
            ..Default::default()
        };
        let recs = plan_dataset(&cfg, &corpus()).unwrap();
        let preds = random_baseline(&recs, 9);
        assert_eq!(preds, random_baseline(&recs, 9));
        for (r, p) in recs.iter().zip(&preds) {
            let a = p.answer.as_ref().unwrap();
            match a {
                AnswerValue::Interval { start, end } => assert!(0.0 <= *start && start < end && *end <= 60.0),
                AnswerValue::Counts { values } => {
                    assert_eq!(values.len(), 3);
                    assert!(values.iter().all(|v| (1..=16).contains(v)));
                }
                AnswerValue::Permutation { order } => assert!(order.len() == 6 && is_permutation(order)),
            }
            assert_eq!(a.task(), r.task);
        }
    }
}
