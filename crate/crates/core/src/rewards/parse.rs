//! Lenient extraction of typed answers from free-text model output.
//!
//! * grounding: the last two numbers, ordered `(min, max)`;
//! * counting: the last `K` integers;
//! * jigsaw: for `n <= 9` the last run of at least `n` digits, read one
//!   digit per entry (a longer run is rejected), otherwise the last `n`
//!   integers.
//!
//! Anything that does not yield a valid answer is [`ParsedAnswer::Unparseable`].

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::taskgen::{is_permutation, AnswerValue, Task};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParsedAnswer {
    Answer(AnswerValue),
    Unparseable,
}

impl ParsedAnswer {
    pub fn is_unparseable(&self) -> bool {
        matches!(self, ParsedAnswer::Unparseable)
    }
}

static NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+(?:\.\d+)?").unwrap());
static DIGITS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+").unwrap());

struct Token {
    value: f64,
    integral: bool,
}

/// Numbers in order of appearance. A leading `-` counts as a sign only when
/// it does not directly follow a letter or digit, so "3-7" reads as 3 and 7.
fn numbers(text: &str) -> Vec<Token> {
    let bytes = text.as_bytes();
    NUMBER
        .find_iter(text)
        .filter_map(|m| {
            let s = m.as_str();
            let mut value: f64 = s.parse().ok()?;
            let start = m.start();
            if start >= 1 && bytes[start - 1] == b'-' {
                let prev = start.checked_sub(2).map(|i| bytes[i]);
                if prev.is_none_or(|b| !b.is_ascii_alphanumeric() && b != b'.') {
                    value = -value;
                }
            }
            Some(Token {
                value,
                integral: !s.contains('.'),
            })
        })
        .collect()
}

fn parse_interval(text: &str) -> Option<AnswerValue> {
    let nums = numbers(text);
    let [a, b] = nums.get(nums.len().checked_sub(2)?..)? else {
        return None;
    };
    let (lo, hi) = if a.value <= b.value {
        (a.value, b.value)
    } else {
        (b.value, a.value)
    };
    let lo = lo.max(0.0);
    if hi.is_nan() || hi <= lo {
        return None;
    }
    Some(AnswerValue::Interval { start: lo, end: hi })
}

fn parse_counts(text: &str, k: usize) -> Option<AnswerValue> {
    let ints: Vec<i64> = numbers(text)
        .into_iter()
        .filter(|t| t.integral && t.value.abs() < i64::MAX as f64)
        .map(|t| t.value as i64)
        .collect();
    if k == 0 || ints.len() < k {
        return None;
    }
    Some(AnswerValue::Counts {
        values: ints[ints.len() - k..].to_vec(),
    })
}

fn parse_permutation(text: &str, n: usize) -> Option<AnswerValue> {
    if n == 0 {
        return None;
    }
    let order: Vec<usize> = if n <= 9 {
        if let Some(run) = DIGITS.find_iter(text).filter(|m| m.as_str().len() >= n).last() {
            run.as_str().bytes().map(|b| (b - b'0') as usize).collect()
        } else {
            last_integers(text, n)?
        }
    } else {
        last_integers(text, n)?
    };
    (order.len() == n && is_permutation(&order)).then_some(AnswerValue::Permutation { order })
}

fn last_integers(text: &str, n: usize) -> Option<Vec<usize>> {
    let ints: Vec<usize> = numbers(text)
        .into_iter()
        .filter(|t| t.integral && t.value >= 0.0)
        .map(|t| t.value as usize)
        .collect();
    (ints.len() >= n).then(|| ints[ints.len() - n..].to_vec())
}

/// `arity` is `K` for counting, `n` for jigsaw and ignored for grounding.
pub fn parse_answer(text: &str, task: Task, arity: usize) -> ParsedAnswer {
    let parsed = match task {
        Task::Grounding => parse_interval(text),
        Task::Counting => parse_counts(text, arity),
        Task::Jigsaw => parse_permutation(text, arity),
    };
    parsed.map_or(ParsedAnswer::Unparseable, ParsedAnswer::Answer)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(text: &str) -> ParsedAnswer {
        parse_answer(text, Task::Grounding, 2)
    }

    #[test]
    fn grounding_examples() {
        assert_eq!(
            interval("anomaly from 6.9 to 9.2 seconds"),
            ParsedAnswer::Answer(AnswerValue::Interval { start: 6.9, end: 9.2 })
        );
        assert_eq!(
            interval("6.9-9.2"),
            ParsedAnswer::Answer(AnswerValue::Interval { start: 6.9, end: 9.2 })
        );
        // reversed bounds are swapped
        assert_eq!(
            interval("ends at 9.2, starts at 6.9"),
            ParsedAnswer::Answer(AnswerValue::Interval { start: 6.9, end: 9.2 })
        );
        assert_eq!(interval("at 4.0"), ParsedAnswer::Unparseable);
        assert_eq!(interval("4 - 4"), ParsedAnswer::Unparseable);
        assert_eq!(
            interval("from -2 to 3"),
            ParsedAnswer::Answer(AnswerValue::Interval { start: 0.0, end: 3.0 })
        );
    }

    #[test]
    fn counting_examples() {
        assert_eq!(
            parse_answer("circles: 3, rectangles: 2, triangles: 3", Task::Counting, 3),
            ParsedAnswer::Answer(AnswerValue::Counts { values: vec![3, 2, 3] })
        );
        assert_eq!(
            parse_answer("I count 1 then 7, 2, 0", Task::Counting, 3),
            ParsedAnswer::Answer(AnswerValue::Counts { values: vec![7, 2, 0] })
        );
        assert_eq!(parse_answer("2 and 3", Task::Counting, 3), ParsedAnswer::Unparseable);
        assert_eq!(
            parse_answer("counts: -1, 2, 3", Task::Counting, 3),
            ParsedAnswer::Answer(AnswerValue::Counts { values: vec![-1, 2, 3] })
        );
    }

    #[test]
    fn jigsaw_examples() {
        assert_eq!(
            parse_answer("the order is 452316", Task::Jigsaw, 6),
            ParsedAnswer::Answer(AnswerValue::Permutation {
                order: vec![4, 5, 2, 3, 1, 6]
            })
        );
        assert_eq!(
            parse_answer("[4, 5, 2, 3, 1, 6]", Task::Jigsaw, 6),
            ParsedAnswer::Answer(AnswerValue::Permutation {
                order: vec![4, 5, 2, 3, 1, 6]
            })
        );
        assert_eq!(parse_answer("112345", Task::Jigsaw, 6), ParsedAnswer::Unparseable);
        assert_eq!(parse_answer("1234567", Task::Jigsaw, 6), ParsedAnswer::Unparseable);
        assert_eq!(
            parse_answer("first guess 123 then 3,1,2", Task::Jigsaw, 3),
            ParsedAnswer::Answer(AnswerValue::Permutation { order: vec![1, 2, 3] })
        );
        let ten = "10,9,8,7,6,5,4,3,2,1";
        assert_eq!(
            parse_answer(ten, Task::Jigsaw, 10),
            ParsedAnswer::Answer(AnswerValue::Permutation {
                order: (1..=10).rev().collect()
            })
        );
    }

    #[test]
    fn total_on_junk() {
        for text in ["", "no numbers", "....", "-", "1e9999", "٣٤٥"] {
            for task in Task::ALL {
                let _ = parse_answer(text, task, 3);
            }
        }
    }
}
