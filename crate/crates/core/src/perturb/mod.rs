//! The perturbation family used to inject anomalies, plus the shape
//! rasterizer used by the counting task.
//!
//! Fourteen kinds are grouped into fine-grained, spatial and temporal
//! categories. Every kind maps an `m`-frame segment to another `m`-frame
//! segment, so timestamps stay evenly spaced after splicing.

mod pixel;
pub mod shapes;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;

pub use pixel::{
    blur, channel_swap, grayscale, invert, mirror, noise, rotate_180, saturate, zoom_in, zoom_out,
};
pub use shapes::{render_shapes, Rgb, ShapeKind, ShapeSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    FineGrained,
    Spatial,
    Temporal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PerturbationKind {
    Saturation,
    Noise,
    Blur,
    Grayscale,
    Invert,
    ChannelSwap,
    ZoomIn,
    Rotate,
    ZoomOut,
    Mirror,
    Slow,
    Fast,
    StutterHold,
    Shuffle,
}

use PerturbationKind::*;

const SPECIAL_NOTE: &str = "To ensure a fair challenge, even if the video's actual speed changes \
(e.g., slow motion or fast forward), the timestamps for each frame have been intentionally kept \
evenly spaced. This creates the illusion of a constant playback speed. Therefore, you should not \
rely on the timestamps when judging the speed. Instead, your judgment must be based solely on the \
visual content. You should analyze the motion within the video itself by observing how much or how \
little the scene changes between consecutive frames to determine the true playback speed.";

impl PerturbationKind {
    pub const ALL: [PerturbationKind; 14] = [
        Saturation, Noise, Blur, Grayscale, Invert, ChannelSwap, ZoomIn, Rotate, ZoomOut, Mirror,
        Slow, Fast, StutterHold, Shuffle,
    ];

    /// The five kinds used by the benchmark preset.
    pub const BENCHMARK: [PerturbationKind; 5] = [ChannelSwap, Rotate, ZoomOut, Mirror, Shuffle];

    pub fn category(self) -> Category {
        match self {
            Saturation | Noise | Blur | Grayscale | Invert | ChannelSwap => Category::FineGrained,
            ZoomIn | Rotate | ZoomOut | Mirror => Category::Spatial,
            Slow | Fast | StutterHold | Shuffle => Category::Temporal,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Saturation => "Saturation",
            Noise => "Noise",
            Blur => "Blur",
            Grayscale => "Grayscale",
            Invert => "Invert",
            ChannelSwap => "ChannelSwap",
            ZoomIn => "ZoomIn",
            Rotate => "Rotate",
            ZoomOut => "ZoomOut",
            Mirror => "Mirror",
            Slow => "Slow",
            Fast => "Fast",
            StutterHold => "StutterHold",
            Shuffle => "Shuffle",
        }
    }

    /// Text substituted into the grounding prompt's `{description}` slot.
    pub fn describe(self) -> String {
        let base = match self {
            Saturation => "the colors in the video become oversaturated and unnaturally vibrant.",
            Noise => "Gaussian noise is added to the video.",
            Blur => "the video becomes blurry or out of focus.",
            Grayscale => "the video becomes black and white.",
            Invert => "the colors in the video are inverted.",
            ChannelSwap => "the red and blue color channels in the video are swapped.",
            ZoomIn => "the video is zoomed in.",
            Rotate => "the video is rotated 180 degrees.",
            ZoomOut => "the video is zoomed out.",
            Mirror => "The video is mirrored horizontally.",
            Slow => {
                "the video slows down, this means the action unfolds at an unusually slow pace, \
                 making movements appear prolonged."
            }
            Fast => {
                "the video speeds up, this means the segment plays at a high speed, compressing \
                 the action and making movements appear jerky or rushed."
            }
            StutterHold => {
                "the video appears to freeze and stutter on a few frames, this means instead of \
                 playing smoothly, the video repeatedly freezes on a single frame before jumping \
                 to the next."
            }
            Shuffle => {
                "the frames are shuffled, this means the order of events is scrambled, making the \
                 action appear illogical and chaotic."
            }
        };
        match self {
            Slow | Fast => format!("{base}\n\nNote: {SPECIAL_NOTE}"),
            _ => base.to_string(),
        }
    }

    /// Kinds whose effect on a single frame does not depend on its neighbours.
    pub fn is_per_frame(self) -> bool {
        self.category() != Category::Temporal
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PerturbationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        let kind = match key.as_str() {
            "saturation" => Saturation,
            "noise" => Noise,
            "blur" => Blur,
            "grayscale" | "greyscale" => Grayscale,
            "invert" => Invert,
            "channelswap" | "channel" => ChannelSwap,
            "zoomin" => ZoomIn,
            "rotate" => Rotate,
            "zoomout" => ZoomOut,
            "mirror" => Mirror,
            "slow" => Slow,
            "fast" => Fast,
            "stutterhold" | "stutter" => StutterHold,
            "shuffle" => Shuffle,
            _ => return Err(Error::UnknownKind(s.to_string())),
        };
        Ok(kind)
    }
}

impl TryFrom<String> for PerturbationKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PerturbationKind> for String {
    fn from(k: PerturbationKind) -> String {
        k.name().to_string()
    }
}

/// Magnitudes for every kind. All are configurable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbParams {
    pub saturation_factor: f64,
    /// Standard deviation in 8-bit units.
    pub noise_sigma: f64,
    pub blur_radius: u32,
    pub zoom_in_factor: f64,
    pub zoom_out_factor: f64,
    pub stutter_hold_frames: usize,
    pub slow_factor: usize,
    pub fast_factor: usize,
    /// Shrink the Fast window when the video ends before the full window.
    pub fast_fallback: bool,
}

impl Default for PerturbParams {
    fn default() -> Self {
        PerturbParams {
            saturation_factor: 2.0,
            noise_sigma: 25.0,
            blur_radius: 4,
            zoom_in_factor: 2.0,
            zoom_out_factor: 0.5,
            stutter_hold_frames: 4,
            slow_factor: 2,
            fast_factor: 2,
            fast_fallback: true,
        }
    }
}

impl PerturbParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("saturation_factor", self.saturation_factor),
            ("noise_sigma", self.noise_sigma),
            ("blur_radius", self.blur_radius as f64),
            ("zoom_in_factor", self.zoom_in_factor),
            ("zoom_out_factor", self.zoom_out_factor),
            ("slow_factor", self.slow_factor as f64),
            ("fast_factor", self.fast_factor as f64),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.stutter_hold_frames < 2 {
            return Err(Error::InvalidParams(format!(
                "stutter_hold_frames must be >= 2, got {}",
                self.stutter_hold_frames
            )));
        }
        Ok(())
    }
}

/// Perturbs `source[range]`.
///
/// The whole source is passed so that `Fast` can read past the end of the
/// segment. The result always has `range.len()` frames.
pub fn apply_perturbation<R: Rng + ?Sized>(
    source: &[Frame],
    range: Range<usize>,
    kind: PerturbationKind,
    params: &PerturbParams,
    rng: &mut R,
) -> Result<Vec<Frame>> {
    if range.is_empty() || range.end > source.len() {
        return Err(Error::InvalidSequence(format!(
            "segment {range:?} is empty or outside {} frames",
            source.len()
        )));
    }
    params.validate()?;
    let segment = &source[range.clone()];
    let per_frame = |f: &dyn Fn(&Frame) -> Frame| segment.iter().map(f).collect::<Vec<_>>();
    let out = match kind {
        Saturation => per_frame(&|f| saturate(f, params.saturation_factor)),
        Noise => segment.iter().map(|f| noise(f, params.noise_sigma, rng)).collect(),
        Blur => per_frame(&|f| blur(f, params.blur_radius)),
        Grayscale => per_frame(&grayscale),
        Invert => per_frame(&invert),
        ChannelSwap => per_frame(&channel_swap),
        ZoomIn => per_frame(&|f| zoom_in(f, params.zoom_in_factor)),
        Rotate => per_frame(&rotate_180),
        ZoomOut => per_frame(&|f| zoom_out(f, params.zoom_out_factor)),
        Mirror => per_frame(&mirror),
        Slow => slow(segment, params.slow_factor),
        Fast => fast(source, range, params.fast_factor, params.fast_fallback)?,
        StutterHold => stutter_hold(segment, params.stutter_hold_frames),
        Shuffle => shuffle(segment, rng),
    };
    debug_assert_eq!(out.len(), segment.len());
    Ok(out)
}

/// Perturbs a standalone segment with no context beyond it.
pub fn apply_to_segment<R: Rng + ?Sized>(
    segment: &[Frame],
    kind: PerturbationKind,
    params: &PerturbParams,
    rng: &mut R,
) -> Result<Vec<Frame>> {
    apply_perturbation(segment, 0..segment.len(), kind, params, rng)
}

/// First `ceil(m / k)` frames, each repeated `k` times, truncated to `m`.
pub fn slow(segment: &[Frame], factor: usize) -> Vec<Frame> {
    let m = segment.len();
    let factor = factor.max(1);
    segment[..m.div_ceil(factor)]
        .iter()
        .flat_map(|f| std::iter::repeat_n(f.clone(), factor))
        .take(m)
        .collect()
}

/// Source positions read by `Fast` for the segment at `range`.
///
/// The nominal window starts at the segment start and spans `factor` times
/// the segment, read with stride `factor`. When the source ends first and
/// `fallback` is set, the window shrinks to what is available and the stride
/// shrinks with it.
pub fn fast_positions(
    source_len: usize,
    range: Range<usize>,
    factor: usize,
    fallback: bool,
) -> Result<Vec<usize>> {
    let m = range.len();
    let start = range.start;
    if m <= 1 {
        return Ok(range.collect());
    }
    let needed = (m - 1) * factor + 1;
    let available = source_len - start;
    if available >= needed {
        return Ok((0..m).map(|j| start + j * factor).collect());
    }
    if !fallback {
        return Err(Error::InsufficientContext { needed, available });
    }
    let stride = (available - 1) as f64 / (m - 1) as f64;
    Ok((0..m)
        .map(|j| start + ((j as f64 * stride) + 1e-9).floor() as usize)
        .collect())
}

fn fast(source: &[Frame], range: Range<usize>, factor: usize, fallback: bool) -> Result<Vec<Frame>> {
    Ok(fast_positions(source.len(), range, factor, fallback)?
        .into_iter()
        .map(|p| source[p].clone())
        .collect())
}

/// Runs of `hold` frames collapse onto their first frame.
pub fn stutter_hold(segment: &[Frame], hold: usize) -> Vec<Frame> {
    segment
        .chunks(hold.max(1))
        .flat_map(|run| std::iter::repeat_n(run[0].clone(), run.len()))
        .collect()
}

/// Uniform random non-identity permutation of the segment (identity only
/// when the segment has one frame).
pub fn shuffle<R: Rng + ?Sized>(segment: &[Frame], rng: &mut R) -> Vec<Frame> {
    let order = non_identity_permutation(segment.len(), rng);
    order.into_iter().map(|i| segment[i].clone()).collect()
}

/// Uniform over all permutations of `0..n` except the identity (for n >= 2).
pub fn non_identity_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    if n < 2 {
        return order;
    }
    loop {
        order.shuffle(rng);
        if order.iter().enumerate().any(|(i, &v)| i != v) {
            return order;
        }
    }
}
