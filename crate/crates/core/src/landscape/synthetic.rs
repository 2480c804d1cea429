//! Seeded synthetic replicator landscape for full-scale (26^9) experiments.
//!
//! The real length-9 viable set is not published, so runs at that scale use a
//! motif-family sampler whose ground truth we control. The scheme:
//!
//! 1. Draw `families` motif families. A family assigns to each of the `L`
//!    positions a core of `core_symbols` distinct symbols together with a
//!    fixed descending weight profile (`1/(rank+1)`, normalized).
//! 2. Sample members by picking a family uniformly, then sampling each
//!    position independently from that family's core weights.
//! 3. Repeat until exactly `target_count` distinct sequences accumulate.
//!
//! Members therefore show strong positional symbol structure (what a
//! classifier can learn) while occupying a tiny pseudo-random subset of the
//! union of family envelopes (what it cannot): with the default six families
//! of six core symbols over nine positions the envelope holds ~6 * 6^9 ~ 60M
//! sequences, of which only `target_count` are members. Every artifact that
//! reports on such a landscape tags it as synthetic.

use super::ReplicatorSet;
use crate::seq::{Alphabet, RngState, Sequence};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub alphabet_size: usize,
    pub length: usize,
    pub target_count: usize,
    pub families: usize,
    pub core_symbols: usize,
}

impl Default for SyntheticConfig {
    /// Full-scale defaults: 36,171 members over the 26-letter alphabet,
    /// matching the reference count of the length-9 viable set. Three
    /// families of six core symbols keep the reference training schedule
    /// comfortably above 99% test accuracy while the union envelope
    /// (~3 * 6^9 ~ 30M sequences) stays three orders of magnitude larger
    /// than the member set.
    fn default() -> Self {
        SyntheticConfig {
            alphabet_size: 26,
            length: 9,
            target_count: 36_171,
            families: 3,
            core_symbols: 6,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=26).contains(&self.alphabet_size) {
            return Err(Error::InvalidConfig(format!(
                "synthetic alphabet size must be in 2..=26, got {}",
                self.alphabet_size
            )));
        }
        if self.length == 0 {
            return Err(Error::InvalidConfig("synthetic length must be >= 1".into()));
        }
        if self.families == 0 {
            return Err(Error::InvalidConfig("need at least one motif family".into()));
        }
        if self.core_symbols == 0 || self.core_symbols > self.alphabet_size {
            return Err(Error::InvalidConfig(format!(
                "core symbols must be in 1..={}, got {}",
                self.alphabet_size, self.core_symbols
            )));
        }
        if self.target_count == 0 {
            return Err(Error::InvalidConfig("target count must be >= 1".into()));
        }
        Ok(())
    }
}

/// One family's per-position cores, as symbol indices ordered by weight rank.
struct Family {
    cores: Vec<Vec<u8>>,
}

/// Generate the synthetic landscape. Deterministic in (config, seed).
pub fn generate_synthetic(config: &SyntheticConfig, seed: u64) -> Result<ReplicatorSet> {
    config.validate()?;
    let alphabet = Alphabet::lowercase_prefix(config.alphabet_size)?;
    let mut rng = RngState::new(seed);

    let families: Vec<Family> = (0..config.families)
        .map(|_| Family {
            cores: (0..config.length)
                .map(|_| {
                    let mut symbols: Vec<u8> = (0..config.alphabet_size as u8).collect();
                    rng.shuffle(&mut symbols);
                    symbols.truncate(config.core_symbols);
                    symbols
                })
                .collect(),
        })
        .collect();

    // descending weight profile over core ranks, shared by all positions
    let weights: Vec<f64> = {
        let raw: Vec<f64> = (0..config.core_symbols).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|w| w / total).collect()
    };

    let mut members: HashSet<Sequence> = HashSet::with_capacity(config.target_count);
    let mut ordered: Vec<Sequence> = Vec::with_capacity(config.target_count);
    let max_attempts = 200u64 * config.target_count as u64;
    let mut attempts = 0u64;
    while ordered.len() < config.target_count {
        if attempts >= max_attempts {
            return Err(Error::SyntheticExhausted {
                target: config.target_count,
                attempts,
            });
        }
        attempts += 1;
        let family = &families[rng.below(config.families)];
        let indices: Vec<u8> = (0..config.length)
            .map(|pos| {
                let mut u = rng.unit();
                let core = &family.cores[pos];
                for (rank, &w) in weights.iter().enumerate() {
                    if u < w || rank == core.len() - 1 {
                        return core[rank];
                    }
                    u -= w;
                }
                unreachable!("weights sum to 1")
            })
            .collect();
        let seq = Sequence::from_indices(indices, &alphabet)?;
        if members.insert(seq.clone()) {
            ordered.push(seq);
        }
    }

    ReplicatorSet::from_members(alphabet, config.length, ordered)
}
