//! Procedural test videos: a drifting gradient with two moving objects, so
//! that every frame differs from its neighbours and temporal edits are
//! visible.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::frame::{Fps, Frame, FrameSequence};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub fps: Fps,
    pub num_frames: usize,
    pub seed: u64,
}

struct Scene {
    tint: [f64; 3],
    ball: [u8; 3],
    bar: [u8; 3],
    period: [f64; 2],
    phase: [f64; 2],
    bar_speed: f64,
}

impl Scene {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut color = || [rng.random(), rng.random(), rng.random()];
        let tint = color().map(|v: u8| 0.4 + 0.6 * v as f64 / 255.0);
        let ball = color();
        let bar = color();
        Scene {
            tint,
            ball,
            bar,
            period: [rng.random_range(40.0..90.0), rng.random_range(30.0..70.0)],
            phase: [rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)],
            bar_speed: rng.random_range(0.7..2.0),
        }
    }
}

pub fn synth_frame(spec: &SynthSpec, pos: usize) -> Frame {
    let scene = Scene::new(spec.seed);
    render(&scene, spec.width, spec.height, pos)
}

fn render(scene: &Scene, width: u32, height: u32, pos: usize) -> Frame {
    let (w, h) = (width as f64, height as f64);
    let t = pos as f64;
    let radius = (w.min(h) / 8.0).max(1.0);
    let cx = w / 2.0 + (w / 2.0 - radius - 1.0).max(0.0) * (TAU * t / scene.period[0] + scene.phase[0]).sin();
    let cy = h / 2.0 + (h / 2.0 - radius - 1.0).max(0.0) * (TAU * t / scene.period[1] + scene.phase[1]).cos();
    let bar_w = (w / 12.0).max(1.0);
    let bar_x = (t * scene.bar_speed * w / 40.0) % (w + bar_w) - bar_w;
    let shift = t * 2.0;
    let mut data = Vec::with_capacity((width * height * 3) as usize);
    for y in 0..height {
        for x in 0..width {
            let (xf, yf) = (x as f64, y as f64);
            let rgb = if (xf - cx).hypot(yf - cy) <= radius {
                scene.ball
            } else if xf >= bar_x && xf < bar_x + bar_w {
                scene.bar
            } else {
                let r = ((xf / w * 200.0 + shift) % 256.0) * scene.tint[0];
                let g = (yf / h * 200.0 + 30.0) * scene.tint[1];
                let b = (((xf + yf) / (w + h) * 180.0 + shift * 0.5) % 256.0) * scene.tint[2];
                [r as u8, g as u8, b as u8]
            };
            data.extend_from_slice(&rgb);
        }
    }
    Frame::new(width, height, data).expect("synth frame size")
}

pub fn synth_video(spec: &SynthSpec) -> FrameSequence {
    let scene = Scene::new(spec.seed);
    let frames = (0..spec.num_frames.max(1))
        .map(|p| render(&scene, spec.width, spec.height, p))
        .collect();
    FrameSequence::new(spec.id.clone(), spec.fps, frames).expect("synth video is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbouring_frames_differ() {
        let v = synth_video(&SynthSpec {
            id: "s".into(),
            width: 16,
            height: 12,
            fps: Fps::integer(2).unwrap(),
            num_frames: 120,
            seed: 1,
        });
        assert!(v.frames().windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn deterministic() {
        let spec = SynthSpec {
            id: "s".into(),
            width: 8,
            height: 8,
            fps: Fps::integer(4).unwrap(),
            num_frames: 5,
            seed: 9,
        };
        assert_eq!(synth_video(&spec), synth_video(&spec));
        assert_eq!(synth_frame(&spec, 3), synth_video(&spec).frames()[3]);
    }
}
