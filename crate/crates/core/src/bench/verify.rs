//! Re-checks generated records against their source videos.
//!
//! * grounding: the video differs from the source only inside the answer
//!   interval, and somewhere inside it;
//! * counting: the placement log recounts to the answer, and re-rendering
//!   the log onto the source reproduces every frame;
//! * jigsaw: reordering segments by the answer restores the source.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bench::manifest::{manifest_root, read_manifest};
use crate::error::Result;
use crate::frame::{slice_positions, FrameSequence};
use crate::perturb::shapes::bboxes_overlap;
use crate::perturb::{render_shapes, ShapeSpec};
use crate::taskgen::{
    arrange_segments, invert_permutation, is_permutation, CountingParams, GroundingParams, JigsawParams, QARecord,
    Task,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordCheck {
    pub record_id: String,
    pub ok: bool,
    pub problems: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub records: Vec<RecordCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> usize {
        self.records.iter().filter(|r| r.ok).count()
    }

    pub fn failed(&self) -> impl Iterator<Item = &RecordCheck> {
        self.records.iter().filter(|r| !r.ok)
    }

    pub fn all_ok(&self) -> bool {
        self.records.iter().all(|r| r.ok)
    }
}

type Problems = Vec<String>;

fn params<T: for<'de> Deserialize<'de>>(rec: &QARecord, p: &mut Problems) -> Option<T> {
    match serde_json::from_value(rec.gen_params.clone()) {
        Ok(v) => Some(v),
        Err(e) => {
            p.push(format!("gen_params unreadable: {e}"));
            None
        }
    }
}

fn check_grounding(rec: &QARecord, video: &FrameSequence, source: &FrameSequence, p: &mut Problems) {
    let Some(gp) = params::<GroundingParams>(rec, p) else { return };
    if rec.subtype != gp.kind.name() {
        p.push(format!("subtype {} but kind {}", rec.subtype, gp.kind.name()));
    }
    if video.len() != source.len() {
        p.push(format!("{} frames, source has {}", video.len(), source.len()));
        return;
    }
    let Some(iv) = rec.answer.as_interval() else {
        p.push("answer is not an interval".into());
        return;
    };
    let range = match slice_positions(source.fps(), source.len(), &iv) {
        Ok(r) => r,
        Err(e) => {
            p.push(format!("answer does not select frames: {e}"));
            return;
        }
    };
    if [range.start, range.end] != gp.frame_range {
        p.push(format!("answer covers frames {range:?}, log says {:?}", gp.frame_range));
    }
    let outside: Vec<usize> = (0..source.len())
        .filter(|i| !range.contains(i) && video.frames()[*i] != source.frames()[*i])
        .collect();
    if !outside.is_empty() {
        p.push(format!("{} frame(s) outside the interval changed, first at position {}", outside.len(), outside[0]));
    }
    if video.frames()[range.clone()] == source.frames()[range] {
        p.push("no frame inside the interval changed".into());
    }
}

fn check_counting(rec: &QARecord, video: &FrameSequence, source: &FrameSequence, p: &mut Problems) {
    let Some(cp) = params::<CountingParams>(rec, p) else { return };
    let recount: Vec<i64> = cp
        .spec
        .shapes
        .iter()
        .map(|k| cp.placements.iter().filter(|s| s.shape.kind == *k).count() as i64)
        .collect();
    if rec.answer.as_counts() != Some(recount.as_slice()) {
        p.push(format!("answer {:?} but the placement log counts {recount:?}", rec.answer.as_counts()));
    }
    if video.len() != source.len() {
        p.push(format!("{} frames, source has {}", video.len(), source.len()));
        return;
    }
    let mut by_frame: BTreeMap<usize, Vec<ShapeSpec>> = BTreeMap::new();
    for s in &cp.placements {
        if !cp.frames.contains(&s.frame) {
            p.push(format!("shape on unlisted frame {}", s.frame));
        }
        if !s.shape.in_bounds(source.width(), source.height()) {
            p.push(format!("shape on frame {} leaves the frame", s.frame));
        }
        by_frame.entry(s.frame).or_default().push(s.shape.clone());
    }
    for (frame, shapes) in &by_frame {
        for (i, a) in shapes.iter().enumerate() {
            if shapes[i + 1..].iter().any(|b| bboxes_overlap(&a.bbox(), &b.bbox())) {
                p.push(format!("overlapping shapes on frame {frame}"));
            }
        }
    }
    for (pos, (got, src)) in video.frames().iter().zip(source.frames()).enumerate() {
        let expected = match by_frame.get(&(pos + 1)) {
            Some(shapes) => match render_shapes(src, shapes) {
                Ok(f) => f,
                Err(e) => {
                    p.push(format!("frame {}: {e}", pos + 1));
                    continue;
                }
            },
            None => src.clone(),
        };
        if *got != expected {
            p.push(format!("frame {} does not match the placement log", pos + 1));
        }
    }
}

fn check_jigsaw(rec: &QARecord, video: &FrameSequence, source: &FrameSequence, p: &mut Problems) {
    let Some(jp) = params::<JigsawParams>(rec, p) else { return };
    let Some(order) = rec.answer.as_permutation() else {
        p.push("answer is not a permutation".into());
        return;
    };
    if order.len() != jp.n || !is_permutation(order) {
        p.push(format!("answer {order:?} is not a permutation of 1..={}", jp.n));
        return;
    }
    if invert_permutation(&jp.permutation).ok().as_deref() != Some(order) {
        p.push("answer is not the inverse of the logged shuffle".into());
    }
    if video.len() != jp.n * jp.segment_len || jp.used_frames > source.len() {
        p.push(format!("{} frames for {} segments of {}", video.len(), jp.n, jp.segment_len));
        return;
    }
    let restored = arrange_segments(video.frames(), jp.segment_len, order);
    if restored.as_slice() != &source.frames()[..jp.used_frames] {
        p.push("reordering by the answer does not restore the source".into());
    }
}

fn check_record(root: &Path, rec: &QARecord) -> RecordCheck {
    let mut problems = Vec::new();
    let video_dir = root.join(&rec.video_dir);
    let outcome = (|| -> std::result::Result<(FrameSequence, FrameSequence), String> {
        if !video_dir.is_dir() {
            return Err(format!("missing video directory {}", video_dir.display()));
        }
        let video = FrameSequence::load_dir(&video_dir, Some(rec.fps)).map_err(|e| e.to_string())?;
        let src = rec.source().map_err(|e| e.to_string())?;
        let dir = src.dir.clone().ok_or("record has no source directory")?;
        let source = FrameSequence::load_dir(Path::new(&dir), Some(src.fps))
            .map_err(|e| format!("source unavailable: {e}"))?;
        Ok((video, source))
    })();
    match outcome {
        Err(msg) => problems.push(msg),
        Ok((video, source)) => {
            if video.fps() != rec.fps {
                problems.push(format!("video is {} fps, record says {}", video.fps(), rec.fps));
            }
            if (video.width(), video.height()) != (source.width(), source.height()) {
                problems.push("video and source dimensions differ".into());
            } else {
                match rec.task {
                    Task::Grounding => check_grounding(rec, &video, &source, &mut problems),
                    Task::Counting => check_counting(rec, &video, &source, &mut problems),
                    Task::Jigsaw => check_jigsaw(rec, &video, &source, &mut problems),
                }
            }
        }
    }
    RecordCheck {
        record_id: rec.id.clone(),
        ok: problems.is_empty(),
        problems,
    }
}

/// Checks every record of the manifest at `path` (file or directory).
pub fn verify_manifest(path: &Path) -> Result<VerifyReport> {
    let records = read_manifest(path)?;
    let root = manifest_root(path);
    Ok(verify_records(&root, &records))
}

pub fn verify_records(root: &Path, records: &[QARecord]) -> VerifyReport {
    #[cfg(feature = "parallel")]
    let records = {
        use rayon::prelude::*;
        records.par_iter().map(|r| check_record(root, r)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let records = records.iter().map(|r| check_record(root, r)).collect();
    VerifyReport { records }
}
