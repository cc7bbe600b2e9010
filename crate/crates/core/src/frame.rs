//! Frame sequences: the single video model every other module consumes.
//!
//! A [`FrameSequence`] is an immutable, evenly timestamped list of RGB8
//! frames. Frame `i` (1-based) sits at `(i - 1) / fps` seconds and the
//! sequence lasts `D = T / fps` seconds. Timestamps are never stored, so they
//! cannot drift from the index.
//!
//! On disk a sequence is a directory of `frame_%06d.png` files plus a
//! `metadata.json` sidecar.

use std::fmt;
use std::fs;
use std::io::BufWriter;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when comparing second-valued timestamps.
pub const TIME_EPS: f64 = 1e-9;

pub const METADATA_FILE: &str = "metadata.json";

/// Frames per second as a positive rational.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fps {
    num: u32,
    den: u32,
}

impl Fps {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidParams(format!("fps {num}/{den} must be positive")));
        }
        let g = gcd(num, den);
        Ok(Fps {
            num: num / g,
            den: den / g,
        })
    }

    pub fn integer(fps: u32) -> Result<Self> {
        Fps::new(fps, 1)
    }

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Timestamp in seconds of the frame at 0-based position `pos`.
    pub fn timestamp(&self, pos: usize) -> f64 {
        (pos as f64 * self.den as f64) / self.num as f64
    }

    /// Duration of `frames` frames.
    pub fn duration(&self, frames: usize) -> f64 {
        self.timestamp(frames)
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for Fps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Fps {
    type Err = Error;

    /// Accepts `"30"`, `"30000/1001"` or a decimal such as `"29.97"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParams(format!("cannot parse fps {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse().map_err(|_| bad())?;
            let d = d.trim().parse().map_err(|_| bad())?;
            return Fps::new(n, d);
        }
        if let Ok(n) = s.parse::<u32>() {
            return Fps::new(n, 1);
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        Fps::from_f64(v).ok_or_else(bad)
    }
}

impl Fps {
    fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() || v <= 0.0 {
            return None;
        }
        let scaled = (v * 1000.0).round();
        if scaled < 1.0 || scaled > u32::MAX as f64 {
            return None;
        }
        Fps::new(scaled as u32, 1000).ok()
    }
}

impl Serialize for Fps {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.den == 1 {
            s.serialize_u32(self.num)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Fps {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u32),
            Float(f64),
            Text(String),
        }
        let fps = match Repr::deserialize(d)? {
            Repr::Int(n) => Fps::new(n, 1).ok(),
            Repr::Float(v) => Fps::from_f64(v),
            Repr::Text(s) => s.parse().ok(),
        };
        fps.ok_or_else(|| serde::de::Error::custom("fps must be a positive number or \"num/den\""))
    }
}

/// One RGB8 frame, row-major, `width * height * 3` bytes.
///
/// Pixel storage is reference counted so that temporal operations (repeat,
/// reorder) share buffers instead of copying them.
#[derive(Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    data: Arc<[u8]>,
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Frame")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl Frame {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        let expected = width as usize * height as usize * 3;
        if width == 0 || height == 0 {
            return Err(Error::InvalidSequence("frame has zero area".into()));
        }
        if data.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                got: data.len(),
            });
        }
        Ok(Frame {
            width,
            height,
            data: data.into(),
        })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let data: Vec<u8> = std::iter::repeat_n(rgb, width as usize * height as usize)
            .flatten()
            .collect();
        Frame {
            width,
            height,
            data: data.into(),
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn to_vec(&self) -> Vec<u8> {
        self.data.to_vec()
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn same_dims(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// True when both frames share the same buffer (cheap identity check).
    pub fn shares_buffer(&self, other: &Frame) -> bool {
        Arc::ptr_eq(&self.data, &other.data)
    }
}

/// A closed time interval in seconds with `0 <= start < end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct TimeInterval {
    start: f64,
    end: f64,
}

#[derive(Deserialize)]
struct RawInterval {
    start: f64,
    end: f64,
}

impl TryFrom<RawInterval> for TimeInterval {
    type Error = Error;

    fn try_from(r: RawInterval) -> Result<Self> {
        TimeInterval::new(r.start, r.end)
    }
}

impl TimeInterval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidInterval {
            start,
            end,
            reason: reason.into(),
        };
        if !start.is_finite() || !end.is_finite() {
            return Err(invalid("non-finite bound"));
        }
        if start < 0.0 {
            return Err(invalid("negative start"));
        }
        if start >= end {
            return Err(invalid("start must precede end"));
        }
        Ok(TimeInterval { start, end })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        TimeInterval::new(self.start * factor, self.end * factor)
    }
}

/// Sidecar record written next to every saved sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceMeta {
    pub id: String,
    pub fps: Fps,
    pub width: u32,
    pub height: u32,
    pub num_frames: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameSequence {
    id: String,
    fps: Fps,
    width: u32,
    height: u32,
    frames: Vec<Frame>,
}

impl FrameSequence {
    pub fn new(id: impl Into<String>, fps: Fps, frames: Vec<Frame>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidSequence("a sequence needs at least one frame".into()))?;
        let (width, height) = (first.width, first.height);
        for f in &frames {
            if f.width != width || f.height != height {
                return Err(Error::DimensionMismatch {
                    got_w: f.width,
                    got_h: f.height,
                    want_w: width,
                    want_h: height,
                });
            }
        }
        Ok(FrameSequence {
            id: id.into(),
            fps,
            width,
            height,
            frames,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn fps(&self) -> Fps {
        self.fps
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Duration `D = T / fps` in seconds.
    pub fn duration(&self) -> f64 {
        self.fps.duration(self.frames.len())
    }

    /// Timestamp of the frame with 1-based `index`.
    pub fn timestamp(&self, index: usize) -> f64 {
        assert!(index >= 1, "frame indices are 1-based");
        self.fps.timestamp(index - 1)
    }

    pub fn timestamps(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.frames.len()).map(|p| self.fps.timestamp(p))
    }

    pub fn meta(&self) -> SequenceMeta {
        SequenceMeta {
            id: self.id.clone(),
            fps: self.fps,
            width: self.width,
            height: self.height,
            num_frames: self.frames.len(),
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Same id and fps, new frames.
    pub fn with_frames(&self, frames: Vec<Frame>) -> Result<Self> {
        FrameSequence::new(self.id.clone(), self.fps, frames)
    }

    /// Checks `interval` against `[0, D]`.
    pub fn check_interval(&self, interval: &TimeInterval) -> Result<()> {
        let d = self.duration();
        if interval.end() > d + TIME_EPS {
            return Err(Error::InvalidInterval {
                start: interval.start(),
                end: interval.end(),
                reason: format!("outside sequence duration {d}"),
            });
        }
        Ok(())
    }

    /// 0-based positions of frames whose timestamp lies in the closed interval.
    pub fn slice_range(&self, interval: &TimeInterval) -> Result<Range<usize>> {
        slice_positions(self.fps, self.frames.len(), interval)
    }

    /// `S = { f_i | timestamp(f_i) in [start, end] }`.
    pub fn slice(&self, interval: &TimeInterval) -> Result<&[Frame]> {
        let r = self.slice_range(interval)?;
        Ok(&self.frames[r])
    }

    /// Interval spanning exactly the timestamps of the frames in `range`.
    pub fn range_interval(&self, range: &Range<usize>) -> Result<TimeInterval> {
        if range.is_empty() || range.end > self.frames.len() {
            return Err(Error::InvalidSequence(format!("bad frame range {range:?}")));
        }
        TimeInterval::new(
            self.fps.timestamp(range.start),
            self.fps.timestamp(range.end - 1),
        )
    }

    /// Splice `new_frames` over the slice selected by `interval`.
    pub fn replace_segment(&self, interval: &TimeInterval, new_frames: Vec<Frame>) -> Result<Self> {
        let range = self.slice_range(interval)?;
        self.replace_range(range, new_frames)
    }

    pub fn replace_range(&self, range: Range<usize>, new_frames: Vec<Frame>) -> Result<Self> {
        if range.end > self.frames.len() {
            return Err(Error::InvalidSequence(format!("range {range:?} exceeds sequence")));
        }
        if new_frames.len() != range.len() {
            return Err(Error::LengthMismatch {
                expected: range.len(),
                got: new_frames.len(),
            });
        }
        if let Some(f) = new_frames
            .iter()
            .find(|f| f.width != self.width || f.height != self.height)
        {
            return Err(Error::DimensionMismatch {
                got_w: f.width,
                got_h: f.height,
                want_w: self.width,
                want_h: self.height,
            });
        }
        let mut frames = self.frames.clone();
        frames.splice(range, new_frames);
        Ok(FrameSequence {
            frames,
            ..self.clone_header()
        })
    }

    fn clone_header(&self) -> Self {
        FrameSequence {
            id: self.id.clone(),
            fps: self.fps,
            width: self.width,
            height: self.height,
            frames: Vec::new(),
        }
    }

    /// Evaluation-side subsampling: uniform at `fps_target`, then capped to
    /// `max_frames` by a second uniform pass.
    pub fn sample_for_model(&self, fps_target: Fps, max_frames: usize) -> ModelInput {
        let max_frames = max_frames.max(1);
        let t = self.frames.len();
        let ratio = self.fps.as_f64() / fps_target.as_f64();
        let wanted = ((self.duration() * fps_target.as_f64()) + TIME_EPS).floor() as usize;
        let wanted = wanted.max(1);
        let mut positions: Vec<usize> = (0..wanted)
            .map(|k| ((k as f64 * ratio + TIME_EPS).floor() as usize).min(t - 1))
            .collect();
        positions.dedup();
        if positions.len() > max_frames {
            let n = positions.len();
            positions = (0..max_frames).map(|j| positions[j * n / max_frames]).collect();
        }
        ModelInput {
            timestamps: positions.iter().map(|&p| self.fps.timestamp(p)).collect(),
            frames: positions.iter().map(|&p| self.frames[p].clone()).collect(),
            source_positions: positions,
        }
    }

    /// Writes `frame_%06d.png` files and the metadata sidecar into `dir`.
    pub fn save(&self, dir: &Path) -> Result<SequenceMeta> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (pos, frame) in self.frames.iter().enumerate() {
            let path = dir.join(frame_file_name(pos + 1));
            write_png(&path, frame)?;
        }
        let meta = self.meta();
        let path = dir.join(METADATA_FILE);
        let text = serde_json::to_string(&meta).map_err(|e| Error::json("metadata", e))?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(meta)
    }

    /// Loads every image in `dir` in lexicographic filename order.
    pub fn load(dir: &Path, fps: Fps) -> Result<Self> {
        let id = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        load_with(dir, id, fps)
    }

    /// Loads a directory written by [`FrameSequence::save`], taking id and fps
    /// from the sidecar. Falls back to `default_fps` when no sidecar exists.
    pub fn load_dir(dir: &Path, default_fps: Option<Fps>) -> Result<Self> {
        let meta_path = dir.join(METADATA_FILE);
        if meta_path.exists() {
            let meta = read_meta(dir)?;
            let seq = load_with(dir, meta.id.clone(), meta.fps)?;
            if seq.len() != meta.num_frames || seq.width != meta.width || seq.height != meta.height {
                return Err(Error::InvalidSequence(format!(
                    "{} disagrees with its metadata sidecar",
                    dir.display()
                )));
            }
            return Ok(seq);
        }
        match default_fps {
            Some(fps) => FrameSequence::load(dir, fps),
            None => Err(Error::InvalidSequence(format!(
                "{} has no {METADATA_FILE} and no fps was given",
                dir.display()
            ))),
        }
    }
}

/// Positions selected by a closed interval in a `num_frames` video at `fps`.
pub fn slice_positions(fps: Fps, num_frames: usize, interval: &TimeInterval) -> Result<Range<usize>> {
    let d = fps.duration(num_frames);
    if interval.end() > d + TIME_EPS {
        return Err(Error::InvalidInterval {
            start: interval.start(),
            end: interval.end(),
            reason: format!("outside sequence duration {d}"),
        });
    }
    let rate = fps.as_f64();
    let tol = TIME_EPS * rate.max(1.0);
    let lo = (interval.start() * rate - tol).ceil().max(0.0) as usize;
    let hi = ((interval.end() * rate + tol).floor() as usize).min(num_frames.saturating_sub(1));
    if lo > hi || lo >= num_frames {
        return Err(Error::EmptySlice {
            start: interval.start(),
            end: interval.end(),
        });
    }
    Ok(lo..hi + 1)
}

pub fn read_meta(dir: &Path) -> Result<SequenceMeta> {
    let path = dir.join(METADATA_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
}

/// Shape of a frame directory without decoding it: the sidecar when there is
/// one, otherwise the image count and the first image's dimensions.
pub fn probe_dir(dir: &Path, default_fps: Option<Fps>) -> Result<SequenceMeta> {
    if dir.join(METADATA_FILE).exists() {
        return read_meta(dir);
    }
    let fps = default_fps.ok_or_else(|| {
        Error::InvalidSequence(format!("{} has no {METADATA_FILE} and no fps was given", dir.display()))
    })?;
    let paths = image_paths(dir)?;
    let (width, height) = image::image_dimensions(&paths[0]).map_err(|source| Error::Image {
        path: paths[0].clone(),
        source,
    })?;
    Ok(SequenceMeta {
        id: dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        fps,
        width,
        height,
        num_frames: paths.len(),
    })
}

/// Frames picked for a model together with their source timestamps.
#[derive(Clone, Debug)]
pub struct ModelInput {
    pub frames: Vec<Frame>,
    pub timestamps: Vec<f64>,
    pub source_positions: Vec<usize>,
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.png")
}

fn is_image_file(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref(),
        Some("png" | "jpg" | "jpeg")
    )
}

fn image_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_image_file(p))
        .collect();
    if paths.is_empty() {
        return Err(Error::NoFrames(dir.to_path_buf()));
    }
    paths.sort();
    Ok(paths)
}

fn load_with(dir: &Path, id: String, fps: Fps) -> Result<FrameSequence> {
    let paths = image_paths(dir)?;
    let mut frames = Vec::with_capacity(paths.len());
    let mut dims: Option<(u32, u32)> = None;
    for path in paths {
        let img = image::open(&path)
            .map_err(|source| Error::Image {
                path: path.clone(),
                source,
            })?
            .into_rgb8();
        let (w, h) = img.dimensions();
        match dims {
            None => dims = Some((w, h)),
            Some((want_w, want_h)) if (w, h) != (want_w, want_h) => {
                return Err(Error::MixedDimensions {
                    path,
                    got_w: w,
                    got_h: h,
                    want_w,
                    want_h,
                });
            }
            Some(_) => {}
        }
        frames.push(Frame::new(w, h, img.into_raw())?);
    }
    FrameSequence::new(id, fps, frames)
}

pub fn write_png(path: &Path, frame: &Frame) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let encoder = PngEncoder::new_with_quality(
        BufWriter::new(file),
        CompressionType::Fast,
        FilterType::Sub,
    );
    encoder
        .write_image(frame.data(), frame.width(), frame.height(), ExtendedColorType::Rgb8)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(n: usize, fps: u32) -> FrameSequence {
        let frames = (0..n).map(|i| Frame::filled(4, 3, [i as u8, 0, 0])).collect();
        FrameSequence::new("t", Fps::integer(fps).unwrap(), frames).unwrap()
    }

    #[test]
    fn three_frames_at_two_fps() {
        let s = seq(3, 2);
        assert_eq!(s.len(), 3);
        assert_eq!(s.duration(), 1.5);
        assert_eq!(s.timestamps().collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn sixty_four_frames_last_timestamp() {
        let s = seq(64, 2);
        assert_eq!(s.duration(), 32.0);
        assert_eq!(s.timestamp(64), 31.5);
    }

    #[test]
    fn slice_closed_interval() {
        let s = seq(10, 2);
        let r = s.slice_range(&TimeInterval::new(1.0, 2.0).unwrap()).unwrap();
        // 1-based indices 3, 4, 5
        assert_eq!(r, 2..5);
    }

    #[test]
    fn slice_full_cover() {
        let s = seq(7, 2);
        let all = s.slice(&TimeInterval::new(0.0, s.duration()).unwrap()).unwrap();
        assert_eq!(all, s.frames());
    }

    #[test]
    fn slice_between_timestamps_is_empty() {
        let s = seq(7, 2);
        let err = s.slice(&TimeInterval::new(0.1, 0.2).unwrap()).unwrap_err();
        assert!(matches!(err, Error::EmptySlice { .. }));
    }

    #[test]
    fn slice_outside_duration_errors() {
        let s = seq(4, 2);
        assert!(s.slice(&TimeInterval::new(1.0, 2.5).unwrap()).is_err());
    }

    #[test]
    fn slice_with_rational_fps() {
        let frames = (0..60).map(|_| Frame::filled(2, 2, [0; 3])).collect();
        let s = FrameSequence::new("r", Fps::new(30000, 1001).unwrap(), frames).unwrap();
        let t = s.timestamp(31);
        let r = s.slice_range(&TimeInterval::new(t, s.timestamp(40)).unwrap()).unwrap();
        assert_eq!(r, 30..40);
    }

    #[test]
    fn replace_with_own_slice_is_identity() {
        let s = seq(8, 2);
        let iv = TimeInterval::new(1.0, 2.0).unwrap();
        let same = s.slice(&iv).unwrap().to_vec();
        assert_eq!(s.replace_segment(&iv, same).unwrap(), s);
    }

    #[test]
    fn replace_is_local() {
        let s = seq(8, 2);
        let iv = TimeInterval::new(1.0, 2.0).unwrap();
        let black = vec![Frame::filled(4, 3, [9, 9, 9]); 3];
        let out = s.replace_segment(&iv, black).unwrap();
        let changed: Vec<usize> = (0..8).filter(|&i| out.frames()[i] != s.frames()[i]).collect();
        assert_eq!(changed, vec![2, 3, 4]);
        assert_eq!(out.len(), s.len());
        assert_eq!(out.fps(), s.fps());
    }

    #[test]
    fn replace_length_mismatch() {
        let s = seq(8, 2);
        let iv = TimeInterval::new(1.0, 2.0).unwrap();
        let err = s
            .replace_segment(&iv, vec![Frame::filled(4, 3, [0; 3]); 2])
            .unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { expected: 3, got: 2 }));
    }

    #[test]
    fn replace_dimension_mismatch() {
        let s = seq(8, 2);
        let iv = TimeInterval::new(1.0, 2.0).unwrap();
        let err = s
            .replace_segment(&iv, vec![Frame::filled(5, 3, [0; 3]); 3])
            .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn sample_downsamples_to_target_fps() {
        let s = seq(120, 30);
        let m = s.sample_for_model(Fps::integer(2).unwrap(), 48);
        assert_eq!(m.frames.len(), 8);
        assert_eq!(m.timestamps, vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5]);
    }

    #[test]
    fn sample_identity_at_source_fps() {
        let s = seq(20, 4);
        let m = s.sample_for_model(Fps::integer(4).unwrap(), 64);
        assert_eq!(m.frames, s.frames());
    }

    #[test]
    fn sample_cap_binds() {
        let frames = (0..1200).map(|_| Frame::filled(1, 1, [0; 3])).collect();
        let s = FrameSequence::new("long", Fps::integer(2).unwrap(), frames).unwrap();
        let m = s.sample_for_model(Fps::integer(2).unwrap(), 48);
        assert_eq!(m.frames.len(), 48);
        let gaps: Vec<usize> = m.source_positions.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(gaps.iter().all(|&g| g == 25));
    }

    #[test]
    fn sample_never_empty() {
        let s = seq(1, 30);
        let m = s.sample_for_model(Fps::integer(1).unwrap(), 1);
        assert_eq!(m.frames.len(), 1);
    }

    #[test]
    fn fps_parsing_and_serde() {
        assert_eq!("2".parse::<Fps>().unwrap(), Fps::integer(2).unwrap());
        assert_eq!("30000/1001".parse::<Fps>().unwrap().num(), 30000);
        assert_eq!("2.5".parse::<Fps>().unwrap(), Fps::new(5, 2).unwrap());
        assert!("0".parse::<Fps>().is_err());
        assert_eq!(serde_json::to_string(&Fps::integer(2).unwrap()).unwrap(), "2");
        let f: Fps = serde_json::from_str("\"30000/1001\"").unwrap();
        assert_eq!(f.den(), 1001);
    }

    #[test]
    fn interval_validation() {
        assert!(TimeInterval::new(2.0, 1.0).is_err());
        assert!(TimeInterval::new(1.0, 1.0).is_err());
        assert!(TimeInterval::new(-1.0, 1.0).is_err());
        assert!(serde_json::from_str::<TimeInterval>(r#"{"start":3,"end":1}"#).is_err());
    }

    #[test]
    fn empty_sequence_rejected() {
        assert!(FrameSequence::new("e", Fps::integer(2).unwrap(), vec![]).is_err());
    }
}
