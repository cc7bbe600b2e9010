//! Anomaly grounding: perturb one random interval, ask for its bounds.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    plan_rng, render_rng, to_value, AnswerValue, QARecord, RecordMeta, SourceRef, Task, VideoShape,
};
use crate::error::{Error, Result};
use crate::frame::{slice_positions, FrameSequence, TimeInterval};
use crate::perturb::{apply_perturbation, PerturbParams, PerturbationKind};
use crate::taskgen::prompt::{render_prompt, PromptParams};

const MAX_PLAN_ATTEMPTS: usize = 100;
const MAX_RENDER_ATTEMPTS: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroundingSpec {
    pub kinds_pool: Vec<PerturbationKind>,
    pub min_len_frac: f64,
    pub max_len_frac: f64,
    pub min_len_seconds: f64,
}

impl Default for GroundingSpec {
    fn default() -> Self {
        GroundingSpec {
            kinds_pool: PerturbationKind::ALL.to_vec(),
            min_len_frac: 0.05,
            max_len_frac: 0.5,
            min_len_seconds: 1.0,
        }
    }
}

impl GroundingSpec {
    pub fn with_kind(&self, kind: PerturbationKind) -> Self {
        GroundingSpec {
            kinds_pool: vec![kind],
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kinds_pool.is_empty() {
            return Err(Error::Config("grounding kinds_pool is empty".into()));
        }
        let (lo, hi) = (self.min_len_frac, self.max_len_frac);
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return Err(Error::Config(format!(
                "grounding length fractions must satisfy 0 < min <= max <= 1, got {lo}, {hi}"
            )));
        }
        if !(self.min_len_seconds >= 0.0 && self.min_len_seconds.is_finite()) {
            return Err(Error::Config("min_len_seconds must be >= 0".into()));
        }
        Ok(())
    }

    /// Shortest video this spec accepts.
    pub fn min_duration(&self) -> f64 {
        self.min_len_seconds / self.min_len_frac
    }

    /// Draws `(start, end)`: length is `D * U[min_frac, max_frac]`, raised
    /// to at least `min_len_seconds`, start is uniform over what fits.
    pub fn sample_interval<R: Rng + ?Sized>(&self, duration: f64, rng: &mut R) -> (f64, f64) {
        let frac = if self.max_len_frac > self.min_len_frac {
            rng.random_range(self.min_len_frac..=self.max_len_frac)
        } else {
            self.min_len_frac
        };
        let len = (duration * frac).max(self.min_len_seconds).min(duration);
        let start = rng.random::<f64>() * (duration - len);
        (start, start + len)
    }
}

/// Answer-determining draws for one grounding record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundingPlan {
    pub kind: PerturbationKind,
    /// Interval as drawn, before snapping to frame timestamps.
    pub sampled: [f64; 2],
    /// 0-based half-open frame range that gets perturbed.
    pub frame_range: [usize; 2],
    pub answer: TimeInterval,
}

impl GroundingPlan {
    pub fn range(&self) -> Range<usize> {
        self.frame_range[0]..self.frame_range[1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundingParams {
    pub source: SourceRef,
    pub kind: PerturbationKind,
    pub sampled: [f64; 2],
    pub frame_range: [usize; 2],
    /// Interval distribution, kept so baselines can draw from it.
    pub spec: GroundingSpec,
    pub perturb: PerturbParams,
    /// Render attempts used; 0 for answer-only records.
    pub attempts: usize,
}

fn build_record(plan: &GroundingPlan, gen_params: &GroundingParams, meta: &RecordMeta) -> QARecord {
    QARecord {
        id: meta.id.clone(),
        task: Task::Grounding,
        subtype: plan.kind.name().to_string(),
        difficulty: None,
        video_dir: meta.video_dir.clone(),
        fps: gen_params.source.fps,
        prompt: render_prompt(&PromptParams::Grounding { kind: plan.kind }),
        answer: AnswerValue::interval(plan.answer),
        seed: meta.seed,
        gen_params: to_value(gen_params),
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

/// The record [`gen_grounding`] would produce on its first render attempt,
/// without any pixels.
pub fn planned_grounding(
    source: &SourceRef,
    spec: &GroundingSpec,
    params: &PerturbParams,
    meta: &RecordMeta,
) -> Result<QARecord> {
    let plan = plan_grounding(&source.shape(), spec, &mut plan_rng(meta.seed)).map_err(tag_video(&source.video_id))?;
    let gen_params = GroundingParams {
        source: source.clone(),
        kind: plan.kind,
        sampled: plan.sampled,
        frame_range: plan.frame_range,
        spec: spec.clone(),
        perturb: params.clone(),
        attempts: 0,
    };
    Ok(build_record(&plan, &gen_params, meta))
}

pub fn plan_grounding<R: Rng + ?Sized>(
    shape: &VideoShape,
    spec: &GroundingSpec,
    rng: &mut R,
) -> Result<GroundingPlan> {
    spec.validate()?;
    let d = shape.duration();
    if d + 1e-9 < spec.min_duration() || shape.num_frames < 2 {
        return Err(Error::VideoTooShort {
            id: String::new(),
            reason: format!(
                "duration {d:.3}s below {:.3}s needed by the grounding spec",
                spec.min_duration()
            ),
        });
    }
    let kind = spec.kinds_pool[rng.random_range(0..spec.kinds_pool.len())];
    for _ in 0..MAX_PLAN_ATTEMPTS {
        let (start, end) = spec.sample_interval(d, rng);
        let Ok(iv) = TimeInterval::new(start, end) else {
            continue;
        };
        let Ok(range) = slice_positions(shape.fps, shape.num_frames, &iv) else {
            continue;
        };
        // a one-frame slice has no extent to ground
        if range.len() < 2 {
            continue;
        }
        let answer = TimeInterval::new(
            shape.fps.timestamp(range.start),
            shape.fps.timestamp(range.end - 1),
        )?;
        return Ok(GroundingPlan {
            kind,
            sampled: [start, end],
            frame_range: [range.start, range.end],
            answer,
        });
    }
    Err(Error::VideoTooShort {
        id: String::new(),
        reason: "no interval covering two frames could be drawn".into(),
    })
}

/// Perturbs one random interval of `seq` and records its timestamp bounds.
pub fn gen_grounding(
    seq: &FrameSequence,
    spec: &GroundingSpec,
    params: &PerturbParams,
    meta: &RecordMeta,
) -> Result<(FrameSequence, QARecord)> {
    let shape = VideoShape::of(seq);
    let mut plan_rng = plan_rng(meta.seed);
    let mut render_rng = render_rng(meta.seed);
    let tag = tag_video(seq.id());
    for attempt in 1..=MAX_RENDER_ATTEMPTS {
        let plan = plan_grounding(&shape, spec, &mut plan_rng).map_err(&tag)?;
        let range = plan.range();
        let perturbed = apply_perturbation(seq.frames(), range.clone(), plan.kind, params, &mut render_rng)?;
        // reject draws where the perturbation happens to be a no-op
        if perturbed.as_slice() == &seq.frames()[range.clone()] {
            continue;
        }
        let video = seq.replace_range(range, perturbed)?.with_id(meta.id.clone());
        let gen_params = GroundingParams {
            source: SourceRef::of(seq, meta.source_dir.clone()),
            kind: plan.kind,
            sampled: plan.sampled,
            frame_range: plan.frame_range,
            spec: spec.clone(),
            perturb: params.clone(),
            attempts: attempt,
        };
        return Ok((video, build_record(&plan, &gen_params, meta)));
    }
    Err(Error::InvalidSequence(format!(
        "video {}: perturbation left the segment unchanged in {MAX_RENDER_ATTEMPTS} attempts",
        seq.id()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{Fps, Frame};
    use crate::synth::{synth_video, SynthSpec};

    fn meta(seed: u64) -> RecordMeta {
        RecordMeta {
            id: "g-1".into(),
            video_dir: "videos/g-1".into(),
            seed,
            source_dir: None,
        }
    }

    fn video(secs: u32) -> FrameSequence {
        synth_video(&SynthSpec {
            id: "src".into(),
            width: 32,
            height: 24,
            fps: Fps::integer(2).unwrap(),
            num_frames: (secs * 2) as usize,
            seed: 5,
        })
    }

    #[test]
    fn answer_matches_replaced_frames() {
        let seq = video(30);
        for seed in 0..20 {
            let (out, rec) = gen_grounding(&seq, &GroundingSpec::default(), &PerturbParams::default(), &meta(seed)).unwrap();
            let iv = rec.answer.as_interval().unwrap();
            let inside = seq.slice_range(&iv).unwrap();
            for i in 0..seq.len() {
                if !inside.contains(&i) {
                    assert_eq!(out.frames()[i], seq.frames()[i], "seed {seed} frame {i}");
                }
            }
            assert_ne!(&out.frames()[inside.clone()], &seq.frames()[inside]);
            assert_eq!(out.len(), seq.len());
            assert_eq!(rec.subtype, rec.gen_params["kind"].as_str().unwrap());
        }
    }

    #[test]
    fn degenerate_spec_covers_whole_video() {
        let seq = video(10);
        let spec = GroundingSpec {
            kinds_pool: vec![PerturbationKind::Invert],
            min_len_frac: 1.0,
            max_len_frac: 1.0,
            min_len_seconds: 1.0,
        };
        let (out, rec) = gen_grounding(&seq, &spec, &PerturbParams::default(), &meta(1)).unwrap();
        let iv = rec.answer.as_interval().unwrap();
        assert_eq!(iv.start(), 0.0);
        assert_eq!(iv.end(), seq.timestamp(seq.len()));
        assert!(out.frames().iter().zip(seq.frames()).all(|(a, b)| a != b));
    }

    #[test]
    fn same_seed_same_output() {
        let seq = video(30);
        let spec = GroundingSpec::default();
        let a = gen_grounding(&seq, &spec, &PerturbParams::default(), &meta(77)).unwrap();
        let b = gen_grounding(&seq, &spec, &PerturbParams::default(), &meta(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_short_video_rejected() {
        let seq = video(10);
        let err = gen_grounding(&seq, &GroundingSpec::default(), &PerturbParams::default(), &meta(1)).unwrap_err();
        assert!(matches!(err, Error::VideoTooShort { ref id, .. } if id == "src"));
    }

    #[test]
    fn empty_pool_rejected() {
        let seq = video(30);
        let spec = GroundingSpec {
            kinds_pool: vec![],
            ..Default::default()
        };
        assert!(matches!(
            gen_grounding(&seq, &spec, &PerturbParams::default(), &meta(1)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn static_video_cannot_hide_a_shuffle() {
        let frames = vec![Frame::filled(8, 8, [40, 40, 40]); 60];
        let seq = FrameSequence::new("flat", Fps::integer(2).unwrap(), frames).unwrap();
        let spec = GroundingSpec::default().with_kind(PerturbationKind::Shuffle);
        assert!(gen_grounding(&seq, &spec, &PerturbParams::default(), &meta(1)).is_err());
    }

    #[test]
    fn plan_snaps_to_frame_timestamps() {
        let shape = VideoShape {
            num_frames: 60,
            fps: Fps::integer(2).unwrap(),
            width: 8,
            height: 8,
        };
        let mut rng = plan_rng(3);
        for _ in 0..200 {
            let p = plan_grounding(&shape, &GroundingSpec::default(), &mut rng).unwrap();
            let [s, e] = p.sampled;
            assert!(p.answer.start() >= s - 1e-9 && p.answer.end() <= e + 1e-9);
            assert!((p.answer.start() * 2.0).fract() == 0.0);
            assert!((p.answer.end() * 2.0).fract() == 0.0);
            assert!(e - s >= 1.0 - 1e-9);
        }
    }
}
