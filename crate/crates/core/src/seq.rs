//! Alphabets, fixed-length sequences, mutation proposals and Hamming
//! geometry.
//!
//! Sequences are stored as vectors of alphabet indices and rendered to
//! lowercase text only at I/O boundaries, so symbol comparison is O(1) and a
//! full 9-mer costs nine bytes during enumeration.

use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// An ordered set of distinct symbols. The default experiment alphabet is the
/// 26 lowercase letters `a`–`z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: Vec<char>) -> Result<Self> {
        if symbols.len() < 2 {
            return Err(Error::InvalidAlphabet(format!(
                "need at least 2 symbols, got {}",
                symbols.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for &c in &symbols {
            if !seen.insert(c) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol {c:?}")));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// The 26 lowercase letters.
    pub fn lowercase() -> Self {
        Alphabet {
            symbols: ('a'..='z').collect(),
        }
    }

    /// The first `k` lowercase letters, e.g. `a`–`h` for the MiniRep VM.
    pub fn lowercase_prefix(k: usize) -> Result<Self> {
        if !(2..=26).contains(&k) {
            return Err(Error::InvalidAlphabet(format!(
                "lowercase prefix size must be in 2..=26, got {k}"
            )));
        }
        Ok(Alphabet {
            symbols: ('a'..='z').take(k).collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn symbol(&self, index: u8) -> Result<char> {
        self.symbols
            .get(index as usize)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index,
                alphabet_size: self.size(),
            })
    }

    pub fn index_of(&self, c: char) -> Result<u8> {
        self.symbols
            .iter()
            .position(|&s| s == c)
            .map(|i| i as u8)
            .ok_or(Error::InvalidSymbol {
                symbol: c,
                alphabet_size: self.size(),
            })
    }
}

/// A fixed-length string over an [`Alphabet`], stored as indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Sequence {
    indices: Vec<u8>,
}

impl Sequence {
    pub fn from_indices(indices: Vec<u8>, alphabet: &Alphabet) -> Result<Self> {
        let k = alphabet.size() as u8;
        for &i in &indices {
            if i >= k {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    alphabet_size: alphabet.size(),
                });
            }
        }
        Ok(Sequence { indices })
    }

    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let indices = text
            .chars()
            .map(|c| alphabet.index_of(c))
            .collect::<Result<Vec<u8>>>()?;
        Ok(Sequence { indices })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u8] {
        &self.indices
    }

    /// Render as exactly `len()` lowercase characters, no delimiter.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        self.indices
            .iter()
            .map(|&i| alphabet.symbols()[i as usize])
            .collect()
    }
}

/// Count of positions at which two equal-length sequences differ.
pub fn hamming(a: &Sequence, b: &Sequence) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.indices
        .iter()
        .zip(&b.indices)
        .filter(|(x, y)| x != y)
        .count())
}

/// Seeded random stream. Identical seed, identical draws; each run of the
/// campaign gets its own state derived from the master seed.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }

    /// Uniform integer in `0..upper`.
    pub fn below(&mut self, upper: usize) -> usize {
        self.rng.random_range(0..upper)
    }

    /// Uniform f64 in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.random()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        use rand::seq::SliceRandom;
        items.shuffle(&mut self.rng);
    }
}

/// Named seed streams. Every derived seed is a pure function of
/// (master seed, domain, counter); see [`derive_seed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedDomain {
    Landscape,
    Splits,
    ModelInit,
    Training,
    Campaign,
}

impl SeedDomain {
    fn salt(self) -> u64 {
        match self {
            SeedDomain::Landscape => 0x6c616e6473636170, // "landscap"
            SeedDomain::Splits => 0x73706c6974730000,
            SeedDomain::ModelInit => 0x6d6f64656c696e69,
            SeedDomain::Training => 0x747261696e696e67,
            SeedDomain::Campaign => 0x63616d706169676e,
        }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based seed derivation: two rounds of the SplitMix64 finalizer over
/// the master seed, a per-domain salt, and a counter. Campaign run `i` of
/// replicate `r` uses `counter = r * RUN_COUNTER_STRIDE + slot(i)`, so all
/// 1,560 runs are independently reproducible from the one master seed.
pub fn derive_seed(master: u64, domain: SeedDomain, counter: u64) -> u64 {
    splitmix64(splitmix64(master ^ domain.salt()) ^ counter)
}

/// Stride between replicates in the campaign counter space; uniform starts
/// occupy slots `0..K`, random starts `RANDOM_SLOT_BASE..RANDOM_SLOT_BASE+K`.
pub const RUN_COUNTER_STRIDE: u64 = 4096;
pub const RANDOM_SLOT_BASE: u64 = 2048;

/// Single-site mutant: position uniform over the length, replacement symbol
/// uniform over the K-1 symbols other than the current one, so the proposal
/// is never a no-op.
pub fn propose_point_mutation(s: &Sequence, alphabet: &Alphabet, rng: &mut RngState) -> Sequence {
    let pos = rng.below(s.len());
    let k = alphabet.size();
    let current = s.indices[pos];
    let mut replacement = rng.below(k - 1) as u8;
    if replacement >= current {
        replacement += 1;
    }
    let mut indices = s.indices.clone();
    indices[pos] = replacement;
    Sequence { indices }
}

/// The K constant sequences: symbol `i` repeated `len` times, in alphabet
/// order (`aaaaaaaaa` through `zzzzzzzzz` for the default alphabet).
pub fn uniform_sequences(alphabet: &Alphabet, len: usize) -> Vec<Sequence> {
    (0..alphabet.size() as u8)
        .map(|i| Sequence {
            indices: vec![i; len],
        })
        .collect()
}

/// Each symbol drawn independently and uniformly from the alphabet.
pub fn random_sequence(alphabet: &Alphabet, len: usize, rng: &mut RngState) -> Sequence {
    let k = alphabet.size();
    Sequence {
        indices: (0..len).map(|_| rng.below(k) as u8).collect(),
    }
}
