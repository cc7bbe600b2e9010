//! Optional adapter around an external command-line video transcoder.
//!
//! The core never decodes containers itself. Videos are exploded into PNG
//! frame directories by running a shell command template, and frame
//! directories can be reassembled the same way.
//!
//! Templates use `{input}`, `{output}` and `{fps}` placeholders; paths are
//! shell-quoted before substitution.

use std::path::Path;
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Fps;

/// Overrides [`TranscoderConfig::decode_template`].
pub const TRANSCODER_ENV: &str = "SSR_FORGE_TRANSCODER";

pub const VIDEO_EXTENSIONS: [&str; 6] = ["mp4", "mkv", "webm", "mov", "avi", "m4v"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TranscoderConfig {
    pub decode_template: String,
    pub encode_template: String,
}

impl Default for TranscoderConfig {
    fn default() -> Self {
        TranscoderConfig {
            decode_template: "ffmpeg -nostdin -loglevel error -y -i {input} -vf fps={fps} -pix_fmt rgb24 {output}/frame_%06d.png".into(),
            encode_template: "ffmpeg -nostdin -loglevel error -y -framerate {fps} -i {input}/frame_%06d.png -c:v libx264 -pix_fmt yuv420p {output}".into(),
        }
    }
}

impl TranscoderConfig {
    /// Default config with the decode template taken from the environment
    /// when set.
    pub fn from_env() -> Self {
        let mut cfg = TranscoderConfig::default();
        if let Ok(t) = std::env::var(TRANSCODER_ENV) {
            if !t.trim().is_empty() {
                cfg.decode_template = t;
            }
        }
        cfg
    }

    /// Explodes `video` into `frame_%06d.png` files under `out_dir`.
    pub fn decode(&self, video: &Path, out_dir: &Path, fps: Fps) -> Result<()> {
        std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        run(&fill(&self.decode_template, video, out_dir, fps))
    }

    /// Reassembles a frame directory into `video`.
    pub fn encode(&self, frames_dir: &Path, video: &Path, fps: Fps) -> Result<()> {
        run(&fill(&self.encode_template, frames_dir, video, fps))
    }
}

pub fn is_video_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| VIDEO_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

fn fill(template: &str, input: &Path, output: &Path, fps: Fps) -> String {
    template
        .replace("{input}", &shell_quote(&input.to_string_lossy()))
        .replace("{output}", &shell_quote(&output.to_string_lossy()))
        .replace("{fps}", &fps.to_string())
}

fn run(command: &str) -> Result<()> {
    let out = Command::new("sh")
        .arg("-c")
        .arg(command)
        .output()
        .map_err(|e| Error::Transcoder(format!("cannot spawn `{command}`: {e}")))?;
    if !out.status.success() {
        return Err(Error::Transcoder(format!(
            "`{command}` exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr).trim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders_are_quoted() {
        let s = fill(
            "tool {input} -r {fps} {output}/x",
            Path::new("/tmp/my video.mp4"),
            Path::new("/tmp/o'ut"),
            Fps::new(30000, 1001).unwrap(),
        );
        assert_eq!(s, r"tool '/tmp/my video.mp4' -r 30000/1001 '/tmp/o'\''ut'/x");
    }

    #[test]
    fn failing_command_reports_stderr() {
        let err = run("echo boom >&2; exit 3").unwrap_err();
        assert!(err.to_string().contains("boom"));
    }

    #[test]
    fn video_extensions() {
        assert!(is_video_file(Path::new("a/b.MP4")));
        assert!(!is_video_file(Path::new("a/b.png")));
    }
}
