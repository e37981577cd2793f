//! Line-delimited event records and replay.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::group::S3Element;
use super::{AnyonKind, DoubleError, DoubleState, Site};

/// One entry of a [`DoubleState`] history. Every record carries enough to
/// reapply it without a random generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Event {
    /// Start of a noise step; advances the clock.
    Tick {
        clock: u64,
    },
    Create {
        ids: [u64; 2],
        flux: S3Element,
        sites: [Site; 2],
        anyon: AnyonKind,
    },
    Move {
        id: u64,
        from: Site,
        to: Site,
    },
    /// `inverse` is the opposite orientation of the loop.
    Braid {
        moving: u64,
        around: u64,
        inverse: bool,
    },
    Fuse {
        left: u64,
        right: u64,
        product: S3Element,
        residual: Option<u64>,
        wrong_pair: bool,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: event does not apply: {source}")]
    Replay { line: usize, source: DoubleError },
}

pub fn to_jsonl(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("events serialize"));
        out.push('\n');
    }
    out
}

/// Parses one record per non-blank line.
pub fn parse_jsonl(text: &str) -> Result<Vec<Event>, LogError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| LogError::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Rebuilds a state on an empty `l × l` grid by reapplying `events`.
pub fn replay(l: usize, events: &[Event]) -> Result<DoubleState, LogError> {
    let mut s = DoubleState::new(l, 0).map_err(|source| LogError::Replay { line: 0, source })?;
    for (i, e) in events.iter().enumerate() {
        s.apply(e).map_err(|source| LogError::Replay { line: i + 1, source })?;
    }
    Ok(s)
}

/// Parses and replays a log in one go.
pub fn replay_jsonl(l: usize, text: &str) -> Result<DoubleState, LogError> {
    replay(l, &parse_jsonl(text)?)
}
