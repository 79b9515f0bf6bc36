use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// History depth `m` of an accelerated method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Depth {
    Finite(usize),
    /// Never evict; every past iterate stays in the window.
    Untruncated,
}

impl Depth {
    /// Effective depth at a given step count: `min(k, m)`.
    pub fn truncate(self, k: usize) -> usize {
        match self {
            Depth::Finite(m) => k.min(m),
            Depth::Untruncated => k,
        }
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Finite(m) => write!(f, "{m}"),
            Depth::Untruncated => f.write_str("inf"),
        }
    }
}

impl Serialize for Depth {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Depth::Finite(m) => s.serialize_u64(*m as u64),
            Depth::Untruncated => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Depth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(m) => Ok(Depth::Finite(m)),
            Raw::Text(t) if t == "inf" => Ok(Depth::Untruncated),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "depth must be a count or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// Sliding window of `(iterate, residual)` pairs, oldest first.
///
/// A window of depth `m` holds at most `m + 1` entries; pushing beyond that
/// evicts the oldest pair.
#[derive(Debug, Clone)]
pub struct HistoryWindow {
    depth: Depth,
    iterates: VecDeque<Vec<f64>>,
    residuals: VecDeque<Vec<f64>>,
}

impl HistoryWindow {
    pub fn new(depth: Depth) -> Self {
        Self {
            depth,
            iterates: VecDeque::new(),
            residuals: VecDeque::new(),
        }
    }

    pub fn depth(&self) -> Depth {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn push(&mut self, x: Vec<f64>, f: Vec<f64>) {
        debug_assert_eq!(x.len(), f.len());
        self.iterates.push_back(x);
        self.residuals.push_back(f);
        if let Depth::Finite(m) = self.depth {
            while self.iterates.len() > m + 1 {
                self.iterates.pop_front();
                self.residuals.pop_front();
            }
        }
    }

    /// The last `count` iterates (or all of them if fewer are stored).
    pub fn iterates_tail(&self, count: usize) -> Vec<&[f64]> {
        let skip = self.len().saturating_sub(count);
        self.iterates.iter().skip(skip).map(Vec::as_slice).collect()
    }

    pub fn residuals_tail(&self, count: usize) -> Vec<&[f64]> {
        let skip = self.len().saturating_sub(count);
        self.residuals
            .iter()
            .skip(skip)
            .map(Vec::as_slice)
            .collect()
    }

    pub fn iterates(&self) -> Vec<&[f64]> {
        self.iterates_tail(self.len())
    }

    pub fn residuals(&self) -> Vec<&[f64]> {
        self.residuals_tail(self.len())
    }

    pub fn latest(&self) -> Option<(&[f64], &[f64])> {
        Some((self.iterates.back()?, self.residuals.back()?))
    }

    /// Overwrites the residual stored with the newest iterate.
    pub fn replace_latest_residual(&mut self, f: Vec<f64>) {
        if let Some(last) = self.residuals.back_mut() {
            *last = f;
        }
    }
}
