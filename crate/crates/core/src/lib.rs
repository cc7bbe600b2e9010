//! Verifiable video pretext tasks.
//!
//! Generates question–answer records (anomaly grounding, object counting,
//! temporal jigsaw) directly from raw frame sequences, and scores model
//! predictions with smooth training rewards and strict benchmark metrics.
//!
//! * [`frame`]: frame sequences, slicing, splicing, PNG directories.
//! * [`perturb`]: the fourteen perturbation kinds and the shape rasterizer.
//! * [`taskgen`]: the three generators and their prompts.
//! * [`rewards`]: rewards, strict scores, answer parsing, JSONL protocol.
//! * [`bench`]: dataset assembly, evaluation, random baseline, verification.

pub mod bench;
pub mod error;
pub mod frame;
pub mod perturb;
pub mod rewards;
pub mod synth;
pub mod taskgen;
pub mod transcoder;

pub use error::{Error, Result};
pub use frame::{Fps, Frame, FrameSequence, TimeInterval};
pub use perturb::{PerturbParams, PerturbationKind};
pub use taskgen::{AnswerValue, Difficulty, QARecord, Task};
