// SPDX-License-Identifier: MIT OR Apache-2.0

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::segmentation::{MinLengthTable, Segmentation};

/// Gene value meaning "no segment starts here".
pub const NO_BREAK: i8 = -1;

/// Length-`n` gene vector. Gene `t` (0-based) holds the order of the
/// segment starting at observation `t`, or [`NO_BREAK`]. Gene 0 always
/// starts the first segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chromosome {
    genes: Vec<i8>,
}

impl Chromosome {
    pub fn from_genes(genes: Vec<i8>, max_order: usize, table: &MinLengthTable) -> Result<Self> {
        validate(&genes, max_order, table)?;
        Ok(Self { genes })
    }

    /// Trusted constructor for operators that build valid genes by
    /// construction.
    pub(crate) fn from_valid(genes: Vec<i8>) -> Self {
        Self { genes }
    }

    /// Encoding of a segmentation; fails if an order does not fit in a gene.
    pub fn encode(seg: &Segmentation) -> Result<Self> {
        let mut genes = vec![NO_BREAK; seg.n()];
        for s in seg.segments() {
            genes[s.start] = i8::try_from(s.order)
                .ok()
                .filter(|&g| g > 0)
                .ok_or_else(|| {
                    Error::InvalidChromosome(format!("order {} cannot be encoded", s.order))
                })?;
        }
        Ok(Self { genes })
    }

    pub fn genes(&self) -> &[i8] {
        &self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    /// Segment starts, 0-based.
    pub fn starts(&self) -> impl Iterator<Item = usize> + '_ {
        self.genes
            .iter()
            .enumerate()
            .filter(|(_, &g)| g != NO_BREAK)
            .map(|(t, _)| t)
    }

    pub fn num_breaks(&self) -> usize {
        self.starts().count().saturating_sub(1)
    }

    pub fn decode(&self) -> Segmentation {
        let (breaks, orders) = split(&self.genes);
        Segmentation::from_parts(self.genes.len(), breaks, orders)
            .expect("chromosome invariants imply a well-formed segmentation")
    }
}

fn split(genes: &[i8]) -> (Vec<usize>, Vec<usize>) {
    let mut breaks = Vec::new();
    let mut orders = Vec::new();
    for (t, &g) in genes.iter().enumerate() {
        if g != NO_BREAK {
            if t > 0 {
                breaks.push(t);
            }
            orders.push(g as usize);
        }
    }
    (breaks, orders)
}

/// Decodes a raw gene vector, validating it first.
pub fn decode(genes: &[i8], max_order: usize, table: &MinLengthTable) -> Result<Segmentation> {
    validate(genes, max_order, table)?;
    let (breaks, orders) = split(genes);
    Segmentation::from_parts(genes.len(), breaks, orders)
}

pub fn validate(genes: &[i8], max_order: usize, table: &MinLengthTable) -> Result<()> {
    let n = genes.len();
    if n == 0 {
        return Err(Error::InvalidChromosome("empty gene vector".into()));
    }
    if genes[0] < 1 {
        return Err(Error::InvalidChromosome(
            "the first gene must start a segment".into(),
        ));
    }
    let mut last: Option<(usize, usize)> = None;
    for (t, &g) in genes.iter().enumerate() {
        if g == NO_BREAK {
            continue;
        }
        if g < 1 || g as usize > max_order {
            return Err(Error::InvalidChromosome(format!(
                "gene {} = {} is neither -1 nor an order in 1..={}",
                t + 1,
                g,
                max_order
            )));
        }
        let order = g as usize;
        if table.get(order).is_none() {
            return Err(Error::InvalidChromosome(format!(
                "order {order} has no minimum length"
            )));
        }
        if let Some((start, p)) = last {
            let need = table.min_length(p);
            if t - start < need {
                return Err(Error::InvalidChromosome(format!(
                    "segment starting at {} (order {}) is {} long, needs {}",
                    start + 1,
                    p,
                    t - start,
                    need
                )));
            }
        }
        last = Some((t, order));
    }
    if let Some((start, p)) = last {
        let need = table.min_length(p);
        if n - start < need {
            return Err(Error::InvalidChromosome(format!(
                "last segment starting at {} (order {}) is {} long, needs {}",
                start + 1,
                p,
                n - start,
                need
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_examples() {
        let t = MinLengthTable::default();
        let mut g = vec![NO_BREAK; 100];
        g[0] = 2;
        let s = decode(&g, 20, &t).unwrap();
        assert_eq!(s.num_breaks(), 0);
        assert_eq!(s.orders(), &[2]);

        let mut g = vec![NO_BREAK; 1000];
        g[0] = 1;
        g[500] = 3; // observation 501
        let s = decode(&g, 20, &t).unwrap();
        assert_eq!(s.breaks(), &[500]);
        assert_eq!(s.segment(1).start, 500);
        assert_eq!(s.orders(), &[1, 3]);
        let c = Chromosome::encode(&s).unwrap();
        assert_eq!(c.genes(), &g[..]);
    }

    #[test]
    fn malformed_genes_rejected() {
        let t = MinLengthTable::default();
        let mut g = vec![NO_BREAK; 100];
        assert!(decode(&g, 20, &t).is_err());
        g[0] = 1;
        g[5] = 1; // too close
        assert!(decode(&g, 20, &t).is_err());
        g[5] = NO_BREAK;
        g[95] = 1; // last piece too short
        assert!(decode(&g, 20, &t).is_err());
        g[95] = NO_BREAK;
        g[50] = 21;
        assert!(decode(&g, 20, &t).is_err());
        g[50] = 0;
        assert!(decode(&g, 20, &t).is_err());
        g[50] = -3;
        assert!(decode(&g, 20, &t).is_err());
        assert!(decode(&[], 20, &t).is_err());
    }
}
