//! Object counting: overlay random shapes on a few frames, ask for the
//! per-class totals.

use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    plan_rng, to_value, AnswerValue, Difficulty, QARecord, RecordMeta, SourceRef, Task, VideoShape,
};
use crate::error::{Error, Result};
use crate::frame::FrameSequence;
use crate::perturb::shapes::bboxes_overlap;
use crate::perturb::{render_shapes, Rgb, ShapeKind, ShapeSpec};
use crate::taskgen::prompt::{render_prompt, PromptParams};

/// High-saturation fills.
pub const PALETTE: [Rgb; 8] = [
    [230, 25, 25],
    [25, 200, 40],
    [30, 60, 230],
    [250, 220, 20],
    [240, 30, 220],
    [20, 220, 230],
    [250, 130, 10],
    [140, 40, 240],
];

const FRAME_RESTARTS: usize = 8;
const MIN_SIZE_PX: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CountingSpec {
    pub shapes: Vec<ShapeKind>,
    pub max_frames: usize,
    pub max_per_shape_per_frame: usize,
    pub min_total_per_shape: usize,
    /// Shape size range as fractions of `min(width, height)`.
    pub size_frac: [f64; 2],
    pub outline_width: f64,
    pub max_attempts_per_shape: usize,
}

impl Default for CountingSpec {
    fn default() -> Self {
        CountingSpec::for_difficulty(Difficulty::Easy)
    }
}

impl CountingSpec {
    pub fn for_difficulty(d: Difficulty) -> Self {
        let n = match d {
            Difficulty::Easy => 3,
            Difficulty::Hard => 4,
        };
        CountingSpec {
            shapes: ShapeKind::ALL.to_vec(),
            max_frames: n,
            max_per_shape_per_frame: n,
            min_total_per_shape: 1,
            size_frac: [0.04, 0.12],
            outline_width: 2.0,
            max_attempts_per_shape: 200,
        }
    }

    /// Largest per-class total this spec can produce.
    pub fn max_total(&self) -> usize {
        self.max_frames * self.max_per_shape_per_frame
    }

    pub fn validate(&self) -> Result<()> {
        if self.shapes.is_empty() {
            return Err(Error::Config("counting needs at least one shape class".into()));
        }
        if self.max_frames == 0 || self.max_per_shape_per_frame == 0 {
            return Err(Error::Config("counting max_frames and max_per_shape_per_frame must be >= 1".into()));
        }
        if self.min_total_per_shape > self.max_total() {
            return Err(Error::Config(format!(
                "min_total_per_shape {} exceeds the reachable maximum {}",
                self.min_total_per_shape,
                self.max_total()
            )));
        }
        let [lo, hi] = self.size_frac;
        if !(lo > 0.0 && lo <= hi && hi < 0.5) {
            return Err(Error::Config(format!("bad size_frac [{lo}, {hi}]")));
        }
        if self.max_attempts_per_shape == 0 {
            return Err(Error::Config("max_attempts_per_shape must be >= 1".into()));
        }
        Ok(())
    }
}

/// One rendered shape and the 1-based frame it was drawn on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacedShape {
    pub frame: usize,
    pub shape: ShapeSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingPlan {
    /// 1-based indices of the modified frames, ascending.
    pub frames: Vec<usize>,
    pub placements: Vec<PlacedShape>,
    pub counts: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingParams {
    pub source: SourceRef,
    pub spec: CountingSpec,
    pub frames: Vec<usize>,
    pub placements: Vec<PlacedShape>,
}

fn outline_for(fill: Rgb) -> Rgb {
    let y = 0.299 * fill[0] as f64 + 0.587 * fill[1] as f64 + 0.114 * fill[2] as f64;
    if y > 140.0 {
        [0, 0, 0]
    } else {
        [255, 255, 255]
    }
}

/// Per-frame, per-class instance counts with every class total at least
/// `min_total_per_shape`.
fn draw_counts<R: Rng + ?Sized>(spec: &CountingSpec, frames: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut per_class = Vec::with_capacity(spec.shapes.len());
    for _ in &spec.shapes {
        loop {
            let counts: Vec<usize> = (0..frames)
                .map(|_| rng.random_range(0..=spec.max_per_shape_per_frame))
                .collect();
            if counts.iter().sum::<usize>() >= spec.min_total_per_shape {
                per_class.push(counts);
                break;
            }
        }
    }
    per_class
}

fn place_frame<R: Rng + ?Sized>(
    spec: &CountingSpec,
    shape: &VideoShape,
    kinds: &[ShapeKind],
    rng: &mut R,
) -> Option<Vec<ShapeSpec>> {
    let side = shape.width.min(shape.height) as f64;
    let (w, h) = (shape.width as f64, shape.height as f64);
    let mut placed: Vec<ShapeSpec> = Vec::with_capacity(kinds.len());
    'shapes: for &kind in kinds {
        for _ in 0..spec.max_attempts_per_shape {
            let size = (rng.random_range(spec.size_frac[0]..=spec.size_frac[1]) * side).max(MIN_SIZE_PX);
            let rotation = rng.random_range(0.0..360.0);
            let fill = PALETTE[rng.random_range(0..PALETTE.len())];
            let mut s = ShapeSpec {
                kind,
                center: [0.0, 0.0],
                size,
                rotation,
                fill,
                outline: outline_for(fill),
                outline_width: spec.outline_width,
            };
            // bbox at the origin gives the admissible center range
            let b = s.bbox();
            let (lo_x, hi_x) = (-b[0] as f64, w - 1.0 - b[2] as f64);
            let (lo_y, hi_y) = (-b[1] as f64, h - 1.0 - b[3] as f64);
            if lo_x > hi_x || lo_y > hi_y {
                continue;
            }
            s.center = [
                rng.random_range(lo_x..=hi_x).floor(),
                rng.random_range(lo_y..=hi_y).floor(),
            ];
            if !s.in_bounds(shape.width, shape.height) {
                continue;
            }
            let bb = s.bbox();
            if placed.iter().any(|p| bboxes_overlap(&p.bbox(), &bb)) {
                continue;
            }
            placed.push(s);
            continue 'shapes;
        }
        return None;
    }
    Some(placed)
}

pub fn plan_counting<R: Rng + ?Sized>(
    shape: &VideoShape,
    spec: &CountingSpec,
    rng: &mut R,
) -> Result<CountingPlan> {
    spec.validate()?;
    let m_max = spec.max_frames.min(shape.num_frames);
    let m = rng.random_range(1..=m_max);
    let mut frames: Vec<usize> = index::sample(rng, shape.num_frames, m)
        .into_iter()
        .map(|p| p + 1)
        .collect();
    frames.sort_unstable();
    let per_class = draw_counts(spec, m, rng);

    let mut placements = Vec::new();
    let mut attempts = 0;
    for (slot, &frame) in frames.iter().enumerate() {
        let mut kinds: Vec<ShapeKind> = spec
            .shapes
            .iter()
            .zip(&per_class)
            .flat_map(|(&k, counts)| std::iter::repeat_n(k, counts[slot]))
            .collect();
        kinds.shuffle(rng);
        let mut done = None;
        for _ in 0..FRAME_RESTARTS {
            attempts += kinds.len() * spec.max_attempts_per_shape;
            if let Some(shapes) = place_frame(spec, shape, &kinds, rng) {
                done = Some(shapes);
                break;
            }
        }
        let shapes = done.ok_or(Error::PlacementFailed { attempts })?;
        placements.extend(shapes.into_iter().map(|shape| PlacedShape { frame, shape }));
    }
    let counts = spec
        .shapes
        .iter()
        .map(|k| placements.iter().filter(|p| p.shape.kind == *k).count() as i64)
        .collect();
    Ok(CountingPlan {
        frames,
        placements,
        counts,
    })
}

/// Draws the planned shapes onto their frames.
pub fn render_counting(seq: &FrameSequence, plan: &CountingPlan) -> Result<FrameSequence> {
    let mut by_frame: BTreeMap<usize, Vec<ShapeSpec>> = BTreeMap::new();
    for p in &plan.placements {
        by_frame.entry(p.frame).or_default().push(p.shape.clone());
    }
    let mut frames = seq.frames().to_vec();
    for (frame, shapes) in by_frame {
        frames[frame - 1] = render_shapes(&frames[frame - 1], &shapes)?;
    }
    seq.with_frames(frames)
}

fn build_record(plan: CountingPlan, source: SourceRef, spec: &CountingSpec, difficulty: Option<Difficulty>, meta: &RecordMeta) -> QARecord {
    let fps = source.fps;
    let gen_params = CountingParams {
        source,
        spec: spec.clone(),
        frames: plan.frames,
        placements: plan.placements,
    };
    QARecord {
        id: meta.id.clone(),
        task: Task::Counting,
        subtype: difficulty.map_or("custom", |d| d.name()).to_string(),
        difficulty,
        video_dir: meta.video_dir.clone(),
        fps,
        prompt: render_prompt(&PromptParams::Counting {
            shapes: spec.shapes.clone(),
        }),
        answer: AnswerValue::Counts { values: plan.counts },
        seed: meta.seed,
        gen_params: to_value(&gen_params),
    }
}

pub fn gen_counting(
    seq: &FrameSequence,
    spec: &CountingSpec,
    difficulty: Option<Difficulty>,
    meta: &RecordMeta,
) -> Result<(FrameSequence, QARecord)> {
    let plan = plan_counting(&VideoShape::of(seq), spec, &mut plan_rng(meta.seed))?;
    let video = render_counting(seq, &plan)?.with_id(meta.id.clone());
    let record = build_record(plan, SourceRef::of(seq, meta.source_dir.clone()), spec, difficulty, meta);
    Ok((video, record))
}

/// The record [`gen_counting`] would produce, without rendering.
pub fn planned_counting(
    source: &SourceRef,
    spec: &CountingSpec,
    difficulty: Option<Difficulty>,
    meta: &RecordMeta,
) -> Result<QARecord> {
    let plan = plan_counting(&source.shape(), spec, &mut plan_rng(meta.seed))?;
    Ok(build_record(plan, source.clone(), spec, difficulty, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Fps;
    use crate::perturb::shapes::BBox;
    use crate::taskgen::plan_rng;

    fn shape(n: usize, side: u32) -> VideoShape {
        VideoShape {
            num_frames: n,
            fps: Fps::integer(2).unwrap(),
            width: side,
            height: side,
        }
    }

    #[test]
    fn easy_totals_in_range() {
        let spec = CountingSpec::for_difficulty(Difficulty::Easy);
        let mut rng = plan_rng(11);
        for _ in 0..300 {
            let plan = plan_counting(&shape(60, 256), &spec, &mut rng).unwrap();
            assert!(plan.frames.len() <= 3);
            for &c in &plan.counts {
                assert!((1..=9).contains(&c));
            }
        }
    }

    #[test]
    fn hard_totals_in_range_and_reach_above_nine() {
        let spec = CountingSpec::for_difficulty(Difficulty::Hard);
        let mut rng = plan_rng(12);
        let mut max_seen = 0;
        for _ in 0..400 {
            let plan = plan_counting(&shape(60, 256), &spec, &mut rng).unwrap();
            for &c in &plan.counts {
                assert!((1..=16).contains(&c));
                max_seen = max_seen.max(c);
            }
        }
        assert!(max_seen > 9);
    }

    #[test]
    fn placements_disjoint_and_in_bounds() {
        let spec = CountingSpec::for_difficulty(Difficulty::Hard);
        let mut rng = plan_rng(13);
        for _ in 0..100 {
            let plan = plan_counting(&shape(40, 128), &spec, &mut rng).unwrap();
            for f in &plan.frames {
                let boxes: Vec<BBox> = plan
                    .placements
                    .iter()
                    .filter(|p| p.frame == *f)
                    .map(|p| p.shape.bbox())
                    .collect();
                for (i, a) in boxes.iter().enumerate() {
                    for b in &boxes[i + 1..] {
                        assert!(!bboxes_overlap(a, b));
                    }
                }
            }
            assert!(plan.placements.iter().all(|p| p.shape.in_bounds(128, 128)));
        }
    }

    #[test]
    fn tiny_frames_fail_placement() {
        let spec = CountingSpec::for_difficulty(Difficulty::Hard);
        let mut rng = plan_rng(1);
        let r = (0..20).find_map(|_| plan_counting(&shape(40, 8), &spec, &mut rng).err());
        assert!(matches!(r, Some(Error::PlacementFailed { .. })));
    }

    #[test]
    fn impossible_min_total_is_config_error() {
        let spec = CountingSpec {
            min_total_per_shape: 10,
            ..CountingSpec::for_difficulty(Difficulty::Easy)
        };
        assert!(matches!(spec.validate(), Err(Error::Config(_))));
    }
}
