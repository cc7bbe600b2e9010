//! JSONL scoring protocol.
//!
//! Each input line is a request
//! `{"record_id", "task", "gt": {...}, "pred_text": "..."}` or with
//! `"pred": {...}` in place of `pred_text`. Each produces exactly one output
//! line `{"record_id", "smooth", "strict", "components", "unparseable"}`, in
//! input order. Lines that cannot be scored carry an `"error"` field and
//! score zero.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{answer_arity, parse_answer, score_answer, ParsedAnswer, Score, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::taskgen::{AnswerValue, Task};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub record_id: String,
    pub task: Task,
    pub gt: AnswerValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pred_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pred: Option<AnswerValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub record_id: Option<String>,
    pub smooth: f64,
    pub strict: f64,
    pub components: serde_json::Value,
    pub unparseable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ScoreResponse {
    fn failed(record_id: Option<String>, error: String) -> Self {
        let zero = Score::zero();
        ScoreResponse {
            record_id,
            smooth: zero.smooth,
            strict: zero.strict,
            components: zero.components,
            unparseable: false,
            error: Some(error),
        }
    }
}

pub fn score_request(req: &ScoreRequest) -> Result<ScoreResponse> {
    if req.gt.task() != req.task {
        return Err(Error::InvalidParams(format!(
            "task {} does not match ground-truth type {}",
            req.task,
            req.gt.task()
        )));
    }
    let parsed = match (&req.pred, &req.pred_text) {
        (Some(p), _) => ParsedAnswer::Answer(p.clone()),
        (None, Some(text)) => parse_answer(text, req.task, answer_arity(&req.gt)),
        (None, None) => return Err(Error::InvalidParams("request has neither pred nor pred_text".into())),
    };
    let score = score_answer(&req.gt, &parsed, req.epsilon.unwrap_or(DEFAULT_EPSILON))?;
    Ok(ScoreResponse {
        record_id: Some(req.record_id.clone()),
        smooth: score.smooth,
        strict: score.strict,
        components: score.components,
        unparseable: parsed.is_unparseable(),
        error: None,
    })
}

/// Scores one raw line. Never fails; problems become an `error` field.
pub fn handle_line(line: &str) -> ScoreResponse {
    let value: serde_json::Value = match serde_json::from_str(line) {
        Ok(v) => v,
        Err(e) => return ScoreResponse::failed(None, format!("invalid json: {e}")),
    };
    let record_id = value
        .get("record_id")
        .and_then(|v| v.as_str())
        .map(str::to_string);
    let req: ScoreRequest = match serde_json::from_value(value) {
        Ok(r) => r,
        Err(e) => return ScoreResponse::failed(record_id, format!("invalid request: {e}")),
    };
    score_request(&req).unwrap_or_else(|e| ScoreResponse::failed(record_id, e.to_string()))
}

/// Reads requests until EOF, flushing after every response so a client can
/// stream. Blank lines are skipped. Returns the number of responses.
pub fn serve<R: BufRead, W: Write>(input: R, mut output: W) -> io::Result<usize> {
    let mut n = 0;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let resp = handle_line(&line);
        serde_json::to_writer(&mut output, &resp)?;
        output.write_all(b"\n")?;
        output.flush()?;
        n += 1;
    }
    Ok(n)
}
