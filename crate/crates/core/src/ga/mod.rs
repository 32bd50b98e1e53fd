// SPDX-License-Identifier: MIT OR Apache-2.0

//! Island-model genetic search for the MDL-best segmentation.
//!
//! Every island evolves its own subpopulation with rank-based parent
//! selection, crossover or mutation, and elitism (the worst child is
//! replaced by the parent generation's best). Every `migration_interval`
//! generations the best `migrants` chromosomes of island `i` replace the
//! worst of island `i + 1` (a ring). The search stops when the overall best
//! codelength has not improved over `stall_limit` consecutive migrations or
//! after `max_generations` generations.
//!
//! Island `i` draws from its own ChaCha stream `i` under the master seed,
//! and islands only interact at migrations, so results do not depend on how
//! an [`IslandExecutor`] schedules the islands.

mod chromosome;
mod config;
mod operators;

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use chromosome::{decode, validate, Chromosome, NO_BREAK};
pub use config::{GaConfig, Rates};
pub use operators::{crossover, mutate, random_chromosome};

use crate::error::{Error, Result};
use crate::mdl::{self, LossCache, MdlObjective, MdlScore, QuantileSpec};
pub use crate::segmentation::MinLengthTable;
use crate::qr::SegmentFit;
use crate::segmentation::Segmentation;
use crate::series::TimeSeries;

/// Shortest series the search accepts.
pub const MIN_SERIES_LEN: usize = 20;

#[derive(Debug, Clone)]
struct Member {
    chromosome: Chromosome,
    fitness: f64,
}

/// One subpopulation with its private random stream.
#[derive(Debug, Clone)]
pub struct Island {
    rng: ChaCha8Rng,
    members: Vec<Member>,
    best_history: Vec<f64>,
    evaluations: usize,
}

impl Island {
    pub fn best_fitness(&self) -> f64 {
        self.members
            .iter()
            .map(|m| m.fitness)
            .fold(f64::INFINITY, f64::min)
    }

    /// Best codelength after each completed generation, starting with the
    /// initial population.
    pub fn best_history(&self) -> &[f64] {
        &self.best_history
    }

    fn sort(&mut self) {
        // stable: ties keep their previous order
        self.members.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
    }
}

/// Context shared read-only by all islands during an epoch.
pub struct Breeder<'a, C: ?Sized> {
    objective: MdlObjective<'a, C>,
    rates: Rates,
    table: &'a MinLengthTable,
}

impl<C: LossCache + ?Sized> Breeder<'_, C> {
    fn evaluate(&self, chromosome: Chromosome) -> Member {
        let fitness = self.objective.evaluate(&chromosome.decode());
        Member {
            chromosome,
            fitness,
        }
    }

    /// Parent index drawn with probability proportional to the rank counted
    /// from the worst member; `members` must be sorted best first.
    fn select(rng: &mut ChaCha8Rng, size: usize) -> usize {
        let total = size * (size + 1) / 2;
        let mut ticket = rng.gen_range(0..total);
        for i in 0..size {
            let weight = size - i;
            if ticket < weight {
                return i;
            }
            ticket -= weight;
        }
        size - 1
    }

    /// Advances an island by one generation.
    pub fn step(&self, island: &mut Island) {
        island.sort();
        let size = island.members.len();
        let mut children = Vec::with_capacity(size);
        for _ in 0..size {
            let child = if island.rng.gen::<f64>() < self.rates.crossover_prob {
                let a = Self::select(&mut island.rng, size);
                let b = Self::select(&mut island.rng, size);
                crossover(
                    &island.members[a].chromosome,
                    &island.members[b].chromosome,
                    self.table,
                    &mut island.rng,
                )
            } else {
                let a = Self::select(&mut island.rng, size);
                mutate(
                    &island.members[a].chromosome,
                    &self.rates,
                    self.table,
                    &mut island.rng,
                )
            };
            children.push(self.evaluate(child));
        }
        island.evaluations += size;
        // elitism
        let worst = children
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.fitness.total_cmp(&b.1.fitness))
            .map(|(i, _)| i)
            .expect("subpopulation is not empty");
        children[worst] = island.members[0].clone();
        island.members = children;
        let best = island.best_fitness();
        island.best_history.push(best);
    }
}

/// Schedules islands between migrations.
pub trait IslandExecutor {
    /// Calls `task` exactly once on every island. Islands are independent,
    /// so any order or degree of parallelism is allowed.
    fn for_each_island(&self, islands: &mut [Island], task: &(dyn Fn(&mut Island) + Sync));
}

/// Runs islands one after another on the calling thread.
#[derive(Debug, Default, Clone, Copy)]
pub struct Sequential;

impl IslandExecutor for Sequential {
    fn for_each_island(&self, islands: &mut [Island], task: &(dyn Fn(&mut Island) + Sync)) {
        islands.iter_mut().for_each(task);
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenerationRecord {
    pub generation: usize,
    pub island_best: Vec<f64>,
    pub global_best: f64,
}

/// Result of a search.
#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub segmentation: Segmentation,
    pub chromosome: Chromosome,
    pub score: MdlScore,
    /// `fits[l][j]`: segment `j` at quantile `l`.
    pub fits: Vec<Vec<SegmentFit>>,
    pub generations: usize,
    pub migrations: usize,
    pub evaluations: usize,
    /// Best codelength of every island after every generation; record 0 is
    /// the initial population.
    pub log: Vec<GenerationRecord>,
}

fn new_island<C: LossCache + ?Sized>(
    breeder: &Breeder<'_, C>,
    n: usize,
    seed: u64,
    index: usize,
    size: usize,
) -> Result<Island> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut members = Vec::with_capacity(size);
    for _ in 0..size {
        let c = random_chromosome(n, &breeder.rates, breeder.table, &mut rng)?;
        members.push(breeder.evaluate(c));
    }
    let mut island = Island {
        rng,
        members,
        best_history: Vec::new(),
        evaluations: size,
    };
    let best = island.best_fitness();
    island.best_history.push(best);
    Ok(island)
}

fn migrate(islands: &mut [Island], count: usize) {
    for island in islands.iter_mut() {
        island.sort();
    }
    let emigrants: Vec<Vec<Member>> = islands
        .iter()
        .map(|isl| isl.members[..count].to_vec())
        .collect();
    let len = islands.len();
    for (i, group) in emigrants.into_iter().enumerate() {
        let target = &mut islands[(i + 1) % len];
        let size = target.members.len();
        for (slot, m) in target.members[size - count..].iter_mut().zip(group) {
            *slot = m;
        }
    }
}

fn global_best(islands: &[Island]) -> (f64, usize, usize) {
    let mut best = (f64::INFINITY, 0, 0);
    for (i, isl) in islands.iter().enumerate() {
        for (j, m) in isl.members.iter().enumerate() {
            if m.fitness < best.0 {
                best = (m.fitness, i, j);
            }
        }
    }
    best
}

/// Searches for the segmentation minimizing the (weighted) MDL of `series`.
pub fn run<C, E>(
    series: &TimeSeries,
    spec: &QuantileSpec,
    config: &GaConfig,
    cache: &C,
    executor: &E,
) -> Result<GaOutcome>
where
    C: LossCache + ?Sized,
    E: IslandExecutor + ?Sized,
{
    config.validate()?;
    let n = series.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::InvalidSeries(alloc::format!(
            "the search needs at least {MIN_SERIES_LEN} observations, got {n}"
        )));
    }
    if spec.len() > u8::MAX as usize || n > u32::MAX as usize {
        return Err(Error::InvalidConfig("problem too large for the loss cache keys".into()));
    }
    let breeder = Breeder {
        objective: MdlObjective::new(series, spec, cache),
        rates: config.rates(n),
        table: &config.min_lengths,
    };

    let mut islands = (0..config.islands)
        .map(|i| new_island(&breeder, n, config.seed, i, config.subpopulation))
        .collect::<Result<Vec<_>>>()?;

    let mut generation = 0;
    let mut migrations = 0;
    let mut stall = 0;
    let mut best_so_far = global_best(&islands).0;
    while generation < config.max_generations {
        let epoch = config
            .migration_interval
            .min(config.max_generations - generation);
        executor.for_each_island(&mut islands, &|island: &mut Island| {
            for _ in 0..epoch {
                breeder.step(island);
            }
        });
        generation += epoch;
        if epoch < config.migration_interval {
            break;
        }
        migrate(&mut islands, config.migrants);
        migrations += 1;
        let current = global_best(&islands).0;
        if current < best_so_far {
            best_so_far = current;
            stall = 0;
        } else {
            stall += 1;
            if stall >= config.stall_limit {
                break;
            }
        }
    }

    let log = (0..=generation)
        .map(|g| {
            let island_best: Vec<f64> = islands.iter().map(|i| i.best_history[g]).collect();
            let global_best = island_best.iter().copied().fold(f64::INFINITY, f64::min);
            GenerationRecord {
                generation: g,
                island_best,
                global_best,
            }
        })
        .collect();
    let (_, bi, bj) = global_best(&islands);
    let chromosome = islands[bi].members[bj].chromosome.clone();
    let segmentation = chromosome.decode();
    let (score, fits) = mdl::score(series, &segmentation, spec)?;
    Ok(GaOutcome {
        segmentation,
        chromosome,
        score,
        fits,
        generations: generation,
        migrations,
        evaluations: islands.iter().map(|i| i.evaluations).sum(),
        log,
    })
}
