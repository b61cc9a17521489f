use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finitely supported real sequence, stored sparsely with 1-based indices.
///
/// Entries are kept sorted by index. Explicit zeros are allowed and count as
/// stored entries but not as support.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, f64)>", into = "Vec<(usize, f64)>")]
pub struct FiniteSequence {
    entries: Vec<(usize, f64)>,
}

impl FiniteSequence {
    pub fn new(mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.sort_by_key(|&(i, _)| i);
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::InvalidArgument(format!(
                    "duplicate index {}",
                    pair[0].0
                )));
            }
        }
        if let Some(&(i, _)) = entries.first() {
            if i == 0 {
                return Err(Error::InvalidArgument("indices start at 1".into()));
            }
        }
        if let Some(&(i, v)) = entries.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value {v} at index {i}"
            )));
        }
        Ok(Self { entries })
    }

    /// Coordinates `1..=values.len()`.
    pub fn from_dense(values: &[f64]) -> Self {
        Self {
            entries: values
                .iter()
                .enumerate()
                .map(|(i, &v)| (i + 1, v))
                .collect(),
        }
    }

    /// The unit vector `e_i`.
    pub fn unit(index: usize) -> Self {
        assert!(index >= 1, "indices start at 1");
        Self {
            entries: vec![(index, 1.0)],
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|&(_, v)| v)
    }

    /// Number of stored entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of non-zero coordinates.
    pub fn support_len(&self) -> usize {
        self.entries.iter().filter(|&&(_, v)| v != 0.0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&(_, v)| v == 0.0)
    }

    pub fn max_index(&self) -> usize {
        self.entries.last().map_or(0, |&(i, _)| i)
    }

    /// Dense copy of coordinates `1..=max_index`.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.max_index()];
        for &(i, v) in &self.entries {
            out[i - 1] = v;
        }
        out
    }

    /// Restriction to the index range `lo..=hi`.
    pub fn restrict(&self, lo: usize, hi: usize) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .copied()
                .filter(|&(i, _)| i >= lo && i <= hi)
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|&(i, v)| (i, v * factor)).collect(),
        }
    }

    /// Coordinatewise sum.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (
            self.entries.iter().peekable(),
            other.entries.iter().peekable(),
        );
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(i, x)), Some(&&(j, y))) => {
                    if i == j {
                        out.push((i, x + y));
                        a.next();
                        b.next();
                    } else if i < j {
                        out.push((i, x));
                        a.next();
                    } else {
                        out.push((j, y));
                        b.next();
                    }
                }
                (Some(&&e), None) => {
                    out.push(e);
                    a.next();
                }
                (None, Some(&&e)) => {
                    out.push(e);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Self { entries: out }
    }
}

impl TryFrom<Vec<(usize, f64)>> for FiniteSequence {
    type Error = Error;

    fn try_from(entries: Vec<(usize, f64)>) -> Result<Self> {
        Self::new(entries)
    }
}

impl From<FiniteSequence> for Vec<(usize, f64)> {
    fn from(seq: FiniteSequence) -> Self {
        seq.entries
    }
}
