//! Multi-indices of positive levels and their enumeration.

use std::fmt;

/// A `d`-vector of levels `i_j >= 1`. Level `1` is the one-point rule, so
/// component `i_j` here corresponds to `i_j - 1` in zero-based notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    levels: Vec<u32>,
    order: u32,
}

impl MultiIndex {
    /// Returns `None` if any component is zero or `levels` is empty.
    pub fn new(levels: Vec<u32>) -> Option<Self> {
        if levels.is_empty() || levels.contains(&0) {
            return None;
        }
        let order = levels.iter().sum();
        Some(Self { levels, order })
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    /// `|i| = sum of components`.
    pub fn order(&self) -> u32 {
        self.order
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (n, l) in self.levels.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// Iterator over all `d`-dimensional multi-indices with
/// `min_order <= |i| <= max_order`, in colexicographic order (first component
/// varies fastest).
#[derive(Debug, Clone)]
pub struct MultiIndices {
    current: Option<Vec<u32>>,
    sum: u32,
    min_order: u32,
    max_order: u32,
}

impl Iterator for MultiIndices {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        loop {
            let current = self.current.as_mut()?;
            let out = (self.sum >= self.min_order).then(|| MultiIndex {
                levels: current.clone(),
                order: self.sum,
            });
            // odometer step bounded by max_order
            let mut pos = 0;
            loop {
                if pos == current.len() {
                    self.current = None;
                    break;
                }
                if self.sum < self.max_order {
                    current[pos] += 1;
                    self.sum += 1;
                    break;
                }
                self.sum -= current[pos] - 1;
                current[pos] = 1;
                pos += 1;
            }
            if out.is_some() {
                return out;
            }
        }
    }
}

pub fn multi_indices(dim: usize, min_order: u32, max_order: u32) -> MultiIndices {
    let d = dim as u32;
    let current = (dim > 0 && max_order >= d).then(|| vec![1; dim]);
    MultiIndices {
        current,
        sum: d,
        min_order,
        max_order,
    }
}
