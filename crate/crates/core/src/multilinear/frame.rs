use std::collections::HashSet;

use crate::error::{Error, Result};

/// Labeled orthonormal basis of the ambient vector space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    labels: Vec<String>,
}

impl Frame {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// `prefix1, prefix2, …, prefix{n}`.
    pub fn numbered(prefix: &str, n: usize) -> Self {
        Self { labels: (1..=n).map(|i| format!("{prefix}{i}")).collect() }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Frame of `self ⊕ other`; fails on label collisions.
    pub fn concat(&self, other: &Frame) -> Result<Frame> {
        Frame::new(self.labels.iter().chain(other.labels.iter()).cloned())
    }

    pub fn select(&self, indices: &[usize]) -> Frame {
        Frame { labels: indices.iter().map(|&i| self.labels[i].clone()).collect() }
    }

    /// Label of a basis multivector, e.g. `m2∧m3`.
    pub fn multi_label(&self, idx: &[usize]) -> String {
        if idx.is_empty() {
            return "1".to_string();
        }
        idx.iter().map(|&i| self.labels[i].as_str()).collect::<Vec<_>>().join("∧")
    }

    /// Stable 64-bit FNV-1a digest of the labels.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for l in &self.labels {
            for b in l.bytes().chain(std::iter::once(0u8)) {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        format!("{}:{h:016x}", self.labels.len())
    }
}
