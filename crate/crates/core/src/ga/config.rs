// SPDX-License-Identifier: MIT OR Apache-2.0

use alloc::format;

use crate::error::{Error, Result};
use crate::segmentation::{MinLengthTable, MAX_TABLE_ORDER};

/// Island-model GA settings. Defaults: 40 islands of 40 chromosomes,
/// migration of the 2 best every 5 generations, stop after 20 migrations
/// without improvement or 100 generations, orders up to 20.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct GaConfig {
    pub islands: usize,
    pub subpopulation: usize,
    pub migration_interval: usize,
    pub migrants: usize,
    pub stall_limit: usize,
    pub max_generations: usize,
    pub seed: u64,
    pub max_order: usize,
    /// Probability that an eligible position of a fresh chromosome starts a
    /// segment. `None` means `min(m_p) / n`.
    pub break_prob: Option<f64>,
    /// Probability of breeding by crossover rather than mutation. `None`
    /// means `1 - min(m_p) / n`.
    pub crossover_prob: Option<f64>,
    /// Mutation: probability of keeping the parent's gene.
    pub keep_prob: f64,
    /// Mutation: probability of clearing the gene.
    pub remove_prob: f64,
    pub min_lengths: MinLengthTable,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            islands: 40,
            subpopulation: 40,
            migration_interval: 5,
            migrants: 2,
            stall_limit: 20,
            max_generations: 100,
            seed: 0,
            max_order: 20,
            break_prob: None,
            crossover_prob: None,
            keep_prob: 0.3,
            remove_prob: 0.3,
            min_lengths: MinLengthTable::default(),
        }
    }
}

/// Probabilities resolved for a series length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub break_prob: f64,
    pub crossover_prob: f64,
    pub keep_prob: f64,
    pub remove_prob: f64,
    pub max_order: usize,
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} = {p} is not a probability")))
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("islands", self.islands),
            ("subpopulation", self.subpopulation),
            ("migration_interval", self.migration_interval),
            ("migrants", self.migrants),
            ("stall_limit", self.stall_limit),
            ("max_generations", self.max_generations),
            ("max_order", self.max_order),
        ] {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.subpopulation < 2 {
            return Err(Error::InvalidConfig("subpopulation needs at least 2 members".into()));
        }
        if self.migrants >= self.subpopulation {
            return Err(Error::InvalidConfig(format!(
                "migrants ({}) must be fewer than the subpopulation ({})",
                self.migrants, self.subpopulation
            )));
        }
        if self.max_order > MAX_TABLE_ORDER || self.max_order > i8::MAX as usize {
            return Err(Error::InvalidConfig(format!(
                "max_order {} exceeds the minimum-length table ({})",
                self.max_order, MAX_TABLE_ORDER
            )));
        }
        if let Some(p) = self.break_prob {
            check_prob("break_prob", p)?;
        }
        if let Some(p) = self.crossover_prob {
            check_prob("crossover_prob", p)?;
        }
        check_prob("keep_prob", self.keep_prob)?;
        check_prob("remove_prob", self.remove_prob)?;
        if self.keep_prob + self.remove_prob > 1.0 + 1e-12 {
            return Err(Error::InvalidConfig(
                "keep_prob + remove_prob must not exceed 1".into(),
            ));
        }
        Ok(())
    }

    pub fn rates(&self, n: usize) -> Rates {
        let base = (self.min_lengths.smallest() as f64 / n as f64).min(1.0);
        Rates {
            break_prob: self.break_prob.unwrap_or(base),
            crossover_prob: self.crossover_prob.unwrap_or(1.0 - base),
            keep_prob: self.keep_prob,
            remove_prob: self.remove_prob,
            max_order: self.max_order,
        }
    }
}
