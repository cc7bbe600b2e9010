//! Prompt templates for the three tasks.

use crate::perturb::{PerturbationKind, ShapeKind};

#[derive(Clone, Debug, PartialEq)]
pub enum PromptParams {
    Grounding { kind: PerturbationKind },
    Counting { shapes: Vec<ShapeKind> },
    Jigsaw { n: usize },
}

const GROUNDING_TEMPLATE: &str = "\
Watch the video carefully. The frames are shown with their timestamps. Somewhere in the video there \
is one contiguous anomalous segment in which the following happens:
{description}

Find the anomalous segment and output its start and end time in seconds, in the format \
\"start - end\" (for example: 3.5 - 7.0).";

const COUNTING_TEMPLATE: &str = "\
Watch the video carefully. Some frames of the video have simple geometric shapes drawn on top of \
them. The possible shapes are: {shape_list}.

Count the total number of {shape_list} that appear across all frames of the video. A shape drawn on \
two different frames counts twice. Output {k} integers in the order {shape_list}, separated by \
commas (for example: {example}).";

const JIGSAW_TEMPLATE: &str = "\
The video has been cut into {n} clips of equal length, and the clips have been shuffled. You are \
shown the clips in their shuffled order, numbered 1 to {n}.

Restore the original temporal order of the video. For each position of the original video, from \
first to last, give the number of the shuffled clip that belongs there. Output the {n} clip \
numbers {format_hint} (for example: {example}).";

fn join_names(shapes: &[ShapeKind]) -> String {
    let names: Vec<&str> = shapes.iter().map(|s| s.plural()).collect();
    match names.as_slice() {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

/// Fills the template for one task.
pub fn render_prompt(params: &PromptParams) -> String {
    match params {
        PromptParams::Grounding { kind } => {
            GROUNDING_TEMPLATE.replace("{description}", &kind.describe())
        }
        PromptParams::Counting { shapes } => {
            let example: Vec<String> = (0..shapes.len()).map(|i| ((i * 2) % 5 + 1).to_string()).collect();
            COUNTING_TEMPLATE
                .replace("{shape_list}", &join_names(shapes))
                .replace("{k}", &shapes.len().to_string())
                .replace("{example}", &example.join(", "))
        }
        PromptParams::Jigsaw { n } => {
            // a fixed rotation keeps the example from leaking the answer
            let example: Vec<usize> = (0..*n).map(|i| (i + 1) % n + 1).collect();
            let (hint, example) = if *n <= 9 {
                (
                    "as a single string of digits without separators",
                    example.iter().map(|v| v.to_string()).collect::<String>(),
                )
            } else {
                (
                    "separated by commas",
                    example.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
                )
            };
            JIGSAW_TEMPLATE
                .replace("{n}", &n.to_string())
                .replace("{format_hint}", hint)
                .replace("{example}", &example)
        }
    }
}
