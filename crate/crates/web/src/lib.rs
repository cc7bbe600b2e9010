//! Browser demo. Everything runs on a small procedural clip generated in
//! the page; nothing is fetched.
//!
//! The plain functions are what the tests exercise; the `wasm_bindgen`
//! wrappers only move bytes and strings across.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssr_forge::frame::{Fps, Frame, FrameSequence};
use ssr_forge::perturb::{apply_perturbation, PerturbParams, PerturbationKind};
use ssr_forge::rewards::{score_text, DEFAULT_EPSILON};
use ssr_forge::synth::{synth_video, SynthSpec};
use ssr_forge::taskgen::{plan_counting, render_counting, CountingSpec, VideoShape};
use ssr_forge::{AnswerValue, Difficulty};
use wasm_bindgen::prelude::*;

pub const CLIP_WIDTH: u32 = 80;
pub const CLIP_HEIGHT: u32 = 60;
pub const CLIP_FRAMES: usize = 12;
/// Positions of the perturbed window inside the clip.
pub const WINDOW: std::ops::Range<usize> = 4..8;

/// An RGBA image ready for `ImageData`.
#[wasm_bindgen]
#[derive(Clone, Debug, PartialEq)]
pub struct Strip {
    width: u32,
    height: u32,
    rgba: Vec<u8>,
    caption: String,
}

#[wasm_bindgen]
impl Strip {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[wasm_bindgen(getter)]
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn caption(&self) -> String {
        self.caption.clone()
    }
}

fn clip(seed: u64) -> FrameSequence {
    synth_video(&SynthSpec {
        id: "demo".into(),
        width: CLIP_WIDTH,
        height: CLIP_HEIGHT,
        fps: Fps::integer(2).expect("2 fps"),
        num_frames: CLIP_FRAMES,
        seed,
    })
}

/// Lays rows of equal-sized frames out left to right, one pixel apart.
fn strip(rows: &[&[Frame]], caption: String) -> Strip {
    let (fw, fh) = (CLIP_WIDTH, CLIP_HEIGHT);
    let cols = rows.iter().map(|r| r.len()).max().unwrap_or(0) as u32;
    let width = cols * (fw + 1);
    let height = rows.len() as u32 * (fh + 1);
    let mut rgba = vec![255u8; (width * height * 4) as usize];
    for (r, row) in rows.iter().enumerate() {
        for (c, f) in row.iter().enumerate() {
            let (ox, oy) = (c as u32 * (fw + 1), r as u32 * (fh + 1));
            for y in 0..fh {
                for x in 0..fw {
                    let at = (((oy + y) * width + ox + x) * 4) as usize;
                    rgba[at..at + 3].copy_from_slice(&f.pixel(x, y));
                }
            }
        }
    }
    Strip {
        width,
        height,
        rgba,
        caption,
    }
}

/// Names accepted by [`perturbation_preview`].
pub fn kind_names() -> Vec<&'static str> {
    PerturbationKind::ALL.iter().map(|k| k.name()).collect()
}

/// Original clip on the top row, the clip with `kind` applied to
/// [`WINDOW`] below it.
pub fn perturbation_preview(kind: &str, seed: u64) -> Result<Strip, String> {
    let kind: PerturbationKind = kind.parse().map_err(|e: ssr_forge::Error| e.to_string())?;
    let src = clip(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let segment = apply_perturbation(src.frames(), WINDOW, kind, &PerturbParams::default(), &mut rng)
        .map_err(|e| e.to_string())?;
    let mut edited = src.frames().to_vec();
    edited.splice(WINDOW, segment);
    let caption = format!("{}: frames {}-{} edited", kind.name(), WINDOW.start + 1, WINDOW.end);
    Ok(strip(&[src.frames(), &edited], caption))
}

/// The frames that received shapes, and the answer a model should give.
pub fn counting_preview(difficulty: &str, seed: u64) -> Result<Strip, String> {
    let d = match difficulty {
        "easy" => Difficulty::Easy,
        "hard" => Difficulty::Hard,
        other => return Err(format!("unknown difficulty {other}")),
    };
    let src = clip(seed);
    let spec = CountingSpec::for_difficulty(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = plan_counting(&VideoShape::of(&src), &spec, &mut rng).map_err(|e| e.to_string())?;
    let video = render_counting(&src, &plan).map_err(|e| e.to_string())?;
    let shown: Vec<Frame> = plan.frames.iter().map(|&i| video.frames()[i - 1].clone()).collect();
    let answer: Vec<String> = spec
        .shapes
        .iter()
        .zip(&plan.counts)
        .map(|(k, n)| format!("{n} {}", k.plural()))
        .collect();
    Ok(strip(&[&shown], answer.join(", ")))
}

/// Scores free text against a ground-truth answer given as JSON, e.g.
/// `{"type":"counts","values":[2,3,1]}`. Returns the score as JSON.
pub fn score_json(answer_json: &str, text: &str) -> Result<String, String> {
    let gt: AnswerValue = serde_json::from_str(answer_json).map_err(|e| format!("answer: {e}"))?;
    let (score, parsed) = score_text(&gt, text, DEFAULT_EPSILON).map_err(|e| e.to_string())?;
    let parsed = match parsed {
        ssr_forge::rewards::ParsedAnswer::Answer(a) => serde_json::to_value(a).unwrap_or_default(),
        ssr_forge::rewards::ParsedAnswer::Unparseable => serde_json::Value::Null,
    };
    Ok(serde_json::json!({
        "smooth": score.smooth,
        "strict": score.strict,
        "components": score.components,
        "parsed": parsed,
    })
    .to_string())
}

#[wasm_bindgen(js_name = kindNames)]
pub fn js_kind_names() -> Vec<String> {
    kind_names().into_iter().map(String::from).collect()
}

#[wasm_bindgen(js_name = perturbationPreview)]
pub fn js_perturbation_preview(kind: &str, seed: u32) -> Result<Strip, JsError> {
    perturbation_preview(kind, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = countingPreview)]
pub fn js_counting_preview(difficulty: &str, seed: u32) -> Result<Strip, JsError> {
    counting_preview(difficulty, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = scoreText)]
pub fn js_score_text(answer_json: &str, text: &str) -> Result<String, JsError> {
    score_json(answer_json, text).map_err(|e| JsError::new(&e))
}
