// SPDX-License-Identifier: MIT OR Apache-2.0

//! Break positions and per-segment orders of a piecewise QAR model.
//!
//! Indexing: a break `k_j` is the 1-based index of the last observation of
//! segment `j`, which is also the 0-based index of the first observation of
//! segment `j + 1`. Segment `j` therefore owns the 0-based half-open range
//! `k_{j-1}..k_j` with `k_0 = 0` and `k_{m+1} = n`.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

/// Largest autoregressive order the minimum-length table covers.
pub const MAX_TABLE_ORDER: usize = 20;

/// Minimum admissible segment length `m_p` for each order `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinLengthTable {
    lengths: [usize; MAX_TABLE_ORDER + 1],
}

impl Default for MinLengthTable {
    fn default() -> Self {
        let mut lengths = [0; MAX_TABLE_ORDER + 1];
        for (p, slot) in lengths.iter_mut().enumerate() {
            *slot = match p {
                0 | 1 => 10,
                2 => 12,
                3 => 14,
                4 => 16,
                5 => 18,
                6 => 20,
                7..=10 => 25,
                _ => 50,
            };
        }
        Self { lengths }
    }
}

impl MinLengthTable {
    /// Custom table; must be nondecreasing in the order.
    pub fn from_lengths(lengths: [usize; MAX_TABLE_ORDER + 1]) -> Result<Self> {
        if lengths.windows(2).any(|w| w[1] < w[0]) || lengths[0] == 0 {
            return Err(Error::InvalidConfig(
                "minimum lengths must be positive and nondecreasing in the order".into(),
            ));
        }
        Ok(Self { lengths })
    }

    pub fn get(&self, order: usize) -> Option<usize> {
        self.lengths.get(order).copied()
    }

    /// Lookup for an order already known to be in range.
    pub fn min_length(&self, order: usize) -> usize {
        self.lengths[order]
    }

    /// Smallest `m_p` over the admissible orders `1..=max_order`.
    pub fn smallest(&self) -> usize {
        self.lengths[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub index: usize,
    /// 0-based first observation.
    pub start: usize,
    /// 0-based one-past-last observation.
    pub end: usize,
    pub order: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }
}

/// The model skeleton `(m, K, p)`: number of breaks, their positions and the
/// QAR order of every segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segmentation {
    n: usize,
    breaks: Vec<usize>,
    orders: Vec<usize>,
}

impl Segmentation {
    /// Validated constructor. Orders must lie in `1..=max_order` and every
    /// segment must be at least as long as the table demands for its order.
    pub fn new(
        n: usize,
        breaks: Vec<usize>,
        orders: Vec<usize>,
        max_order: usize,
        table: &MinLengthTable,
    ) -> Result<Self> {
        let seg = Self { n, breaks, orders };
        seg.validate(max_order, table)?;
        Ok(seg)
    }

    /// Builds a segmentation without the order and minimum-length checks.
    /// Only structural consistency (sorted interior breaks, one order per
    /// segment) is enforced. Useful for scoring hand-made candidates.
    pub fn from_parts(n: usize, breaks: Vec<usize>, orders: Vec<usize>) -> Result<Self> {
        let seg = Self { n, breaks, orders };
        seg.check_structure()?;
        Ok(seg)
    }

    pub fn single(n: usize, order: usize) -> Result<Self> {
        Self::from_parts(n, Vec::new(), alloc::vec![order])
    }

    fn check_structure(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSegmentation("series length is zero".into()));
        }
        if self.orders.len() != self.breaks.len() + 1 {
            return Err(Error::InvalidSegmentation(format!(
                "{} breaks need {} orders, got {}",
                self.breaks.len(),
                self.breaks.len() + 1,
                self.orders.len()
            )));
        }
        let mut prev = 0;
        for &k in &self.breaks {
            if k <= prev || k >= self.n {
                return Err(Error::InvalidSegmentation(format!(
                    "breaks must be strictly increasing inside (0, {}), got {:?}",
                    self.n, self.breaks
                )));
            }
            prev = k;
        }
        Ok(())
    }

    pub fn validate(&self, max_order: usize, table: &MinLengthTable) -> Result<()> {
        self.check_structure()?;
        for seg in self.segments() {
            if seg.order == 0 || seg.order > max_order {
                return Err(Error::InvalidSegmentation(format!(
                    "segment {} has order {} outside 1..={}",
                    seg.index + 1,
                    seg.order,
                    max_order
                )));
            }
            let min = table.get(seg.order).ok_or_else(|| {
                Error::InvalidSegmentation(format!("no minimum length for order {}", seg.order))
            })?;
            if seg.len() < min {
                return Err(Error::InvalidSegmentation(format!(
                    "segment {} has {} observations, order {} needs {}",
                    seg.index + 1,
                    seg.len(),
                    seg.order,
                    min
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn breaks(&self) -> &[usize] {
        &self.breaks
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    /// Number of breaks `m`.
    pub fn num_breaks(&self) -> usize {
        self.breaks.len()
    }

    pub fn num_segments(&self) -> usize {
        self.orders.len()
    }

    pub fn segment(&self, index: usize) -> Segment {
        let start = if index == 0 { 0 } else { self.breaks[index - 1] };
        let end = self.breaks.get(index).copied().unwrap_or(self.n);
        Segment {
            index,
            start,
            end,
            order: self.orders[index],
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        (0..self.orders.len()).map(move |i| self.segment(i))
    }

    /// Segment lengths `n_j`; they sum to `n`.
    pub fn lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.segments().map(|s| s.len())
    }
}

/// Relative break locations `k_j / n`.
pub fn relative_locations(seg: &Segmentation) -> Vec<f64> {
    let n = seg.n() as f64;
    seg.breaks().iter().map(|&k| k as f64 / n).collect()
}
