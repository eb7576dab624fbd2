use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Dot,
    Csv,
    Text,
}

/// Inclusive integer range written `lo..hi`, `lo..=hi` or a single value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub lo: usize,
    pub hi: usize,
}

impl Span {
    pub fn single(v: usize) -> Span {
        Span { lo: v, hi: v }
    }

    pub fn iter(&self) -> RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Span, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad bound {t:?}: {e}"));
        let span = match s.split_once("..") {
            Some((lo, hi)) => Span { lo: num(lo)?, hi: num(hi.strip_prefix('=').unwrap_or(hi))? },
            None => Span::single(num(s)?),
        };
        if span.lo > span.hi {
            return Err(format!("empty range {s:?}"));
        }
        Ok(span)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

/// Flat record of one invocation, independent of the flag layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub word: Option<String>,
    pub rank: usize,
    pub cap: Option<usize>,
    /// Largest rank (index) or degree (enumerate) the command may reach.
    pub degree_guard: Option<usize>,
    pub format: Format,
    pub workers: Option<usize>,
    pub output: Option<String>,
}
