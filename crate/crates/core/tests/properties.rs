use proptest::prelude::*;

use ssr_forge::frame::{slice_positions, Fps};
use ssr_forge::rewards::{
    displacement_error, e_max, iou, parse_answer, reward_count, reward_jigsaw, score_text, strict_count_score,
    strict_jigsaw_score, ParsedAnswer, DEFAULT_EPSILON,
};
use ssr_forge::taskgen::invert_permutation;
use ssr_forge::{AnswerValue, Task, TimeInterval};

fn interval() -> impl Strategy<Value = TimeInterval> {
    (0.0..500.0f64, 0.01..200.0f64).prop_map(|(s, len)| TimeInterval::new(s, s + len).unwrap())
}

fn permutation(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<usize>> {
    n.prop_flat_map(|n| Just((1..=n).collect::<Vec<_>>()).prop_shuffle())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn iou_is_symmetric_and_bounded(a in interval(), b in interval()) {
        let v = iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, iou(&b, &a));
        prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn count_reward_bounded_and_exact_only_at_truth(
        gt in proptest::collection::vec(0i64..40, 1..6),
        noise in proptest::collection::vec(-10i64..10, 6),
    ) {
        let pred: Vec<i64> = gt.iter().zip(&noise).map(|(g, d)| (g + d).max(0)).collect();
        let r = reward_count(&gt, &pred, DEFAULT_EPSILON).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.value));
        prop_assert_eq!(r.components.len(), gt.len());
        let strict = strict_count_score(&gt, &pred).unwrap();
        prop_assert!(strict <= 1.0);
        prop_assert_eq!(strict == 1.0, pred == gt);
        prop_assert_eq!(reward_count(&gt, &gt, DEFAULT_EPSILON).unwrap().value, 1.0);
    }

    #[test]
    fn jigsaw_reward_spans_zero_to_one(gt in permutation(2..=10), pred_seed in any::<u64>()) {
        let n = gt.len();
        let mut pred = gt.clone();
        let k = (pred_seed as usize) % n;
        pred.rotate_left(k);
        let r = reward_jigsaw(&gt, &pred).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.value));
        let e = displacement_error(&gt, &pred).unwrap();
        prop_assert!(e <= e_max(n));
        prop_assert_eq!(e % 2, 0);
        prop_assert_eq!(strict_jigsaw_score(&gt, &pred).unwrap() == 1.0, k == 0);
        let reversed: Vec<usize> = gt.iter().rev().copied().collect();
        prop_assert_eq!(reward_jigsaw(&gt, &reversed).unwrap().value, 0.0);
    }

    #[test]
    fn inverse_permutation_composes_to_identity(p in permutation(1..=12)) {
        let inv = invert_permutation(&p).unwrap();
        for (i, &v) in p.iter().enumerate() {
            prop_assert_eq!(inv[v - 1], i + 1);
        }
        prop_assert_eq!(invert_permutation(&inv).unwrap(), p);
    }

    #[test]
    fn answers_survive_their_own_display_text(
        counts in proptest::collection::vec(0i64..100, 1..5),
        order in permutation(2..=12),
        start in 0u32..2000,
        len in 1u32..2000,
    ) {
        let answers = [
            AnswerValue::Counts { values: counts },
            AnswerValue::Permutation { order },
            AnswerValue::Interval { start: start as f64 / 10.0, end: (start + len) as f64 / 10.0 },
        ];
        for a in answers {
            let arity = match &a {
                AnswerValue::Counts { values } => values.len(),
                AnswerValue::Permutation { order } => order.len(),
                AnswerValue::Interval { .. } => 2,
            };
            let text = format!("Final answer: {}", a.display_text());
            prop_assert_eq!(parse_answer(&text, a.task(), arity), ParsedAnswer::Answer(a.clone()));
            let (score, _) = score_text(&a, &text, DEFAULT_EPSILON).unwrap();
            prop_assert_eq!((score.smooth, score.strict), (1.0, 1.0));
        }
    }

    #[test]
    fn free_text_never_panics(text in "\\PC{0,80}", n in 1usize..10) {
        for task in [Task::Grounding, Task::Counting, Task::Jigsaw] {
            let _ = parse_answer(&text, task, n);
        }
    }

    #[test]
    fn slices_select_frames_whose_timestamps_fall_inside(
        frames in 2usize..300,
        fps in 1u32..31,
        a in 0.0..1.0f64,
        b in 0.0..1.0f64,
    ) {
        let fps = Fps::integer(fps).unwrap();
        let d = fps.duration(frames);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi > lo);
        let iv = TimeInterval::new(lo * d, hi * d).unwrap();
        if let Ok(range) = slice_positions(fps, frames, &iv) {
            for i in 0..frames {
                let t = fps.timestamp(i);
                let inside = t >= iv.start() - 1e-9 && t <= iv.end() + 1e-9;
                prop_assert_eq!(range.contains(&i), inside, "frame {} at {}", i, t);
            }
        } else {
            let none_inside = (0..frames).all(|i| {
                let t = fps.timestamp(i);
                t < iv.start() - 1e-9 || t > iv.end() + 1e-9
            });
            prop_assert!(none_inside);
        }
    }
}
