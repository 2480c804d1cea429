//! MiniRep: a deliberately small self-replication virtual machine.
//!
//! The machine exists to produce a genuine, exhaustively enumerable fitness
//! landscape in which exact self-copying is possible but rare. Semantics
//! (version tag [`crate::VM_SEMANTICS_VERSION`]):
//!
//! - **Memory** is a tape of `2*L + 2` cells. The program (the genotype)
//!   is loaded at cells `0..L`; every other cell starts as the reserved
//!   blank value `0xFF`, which is not a symbol of any program alphabet.
//! - **State** is (instruction pointer, read head, write head). The
//!   instruction pointer starts at 0 and always stays inside `0..L`,
//!   wrapping modulo `L` when it advances past the end. The read head
//!   starts at cell 0, the write head at cell `L + 1`; both heads wrap
//!   modulo the tape length.
//! - **Instructions** (symbol value -> meaning; a fetched blank executes as
//!   `nop-a`):
//!
//!   | value | name           | effect                                        |
//!   |-------|----------------|-----------------------------------------------|
//!   | 0     | copy           | `tape[write] = tape[read]`; heads unchanged   |
//!   | 1     | advance-read   | `read += 1` (wrapping)                        |
//!   | 2     | advance-write  | `write += 1` (wrapping)                       |
//!   | 3     | jump-if-not-done | if `read < L`, set instruction pointer to 0 |
//!   | 4     | halt           | stop execution                                |
//!   | 5     | nop-a          | nothing                                       |
//!   | 6     | nop-b          | nothing                                       |
//!   | 7     | swap-heads     | exchange read and write head positions        |
//!
//!   Alphabets smaller than 8 use the instruction-set prefix, so the copy
//!   machinery survives at `K = 4` (copy, advance-read, advance-write,
//!   jump-if-not-done) and toy landscapes stay nonempty.
//! - After each instruction other than a taken jump, the instruction pointer
//!   advances by one and wraps modulo `L`. Execution stops at `halt` or when
//!   the step budget runs out.
//! - **Viability**: a program is viable exactly when, at any point during
//!   execution, an exact contiguous copy of the original genotype appears at
//!   a window disjoint from the program region, i.e. at a start position in
//!   `L ..= tape_len - L`. Self-modification (a write landing inside
//!   `0..L` after `swap-heads`) is allowed but the comparison is always
//!   against the original genotype.
//!
//! `copy` moves no heads; a self-copier must interleave explicit
//! `advance-read`/`advance-write` steps (or rely on instruction-pointer
//! wrap-around), which is what keeps viable programs rare in the landscape.

use super::ReplicatorSet;
use crate::seq::{Alphabet, Sequence};
use crate::{Error, Result, VM_SEMANTICS_VERSION};
use serde::{Deserialize, Serialize};

/// Upper bound on `K^L` for exhaustive enumeration.
pub const ENUMERATION_GUARD: u128 = 1_000_000_000;

const BLANK: u8 = 0xFF;

const OP_COPY: u8 = 0;
const OP_ADVANCE_READ: u8 = 1;
const OP_ADVANCE_WRITE: u8 = 2;
const OP_JUMP_IF_NOT_DONE: u8 = 3;
const OP_HALT: u8 = 4;

/// Configuration of a MiniRep enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiniRepConfig {
    /// VM alphabet size; at most the 8 defined instructions.
    pub alphabet_size: usize,
    /// Program (genotype) length.
    pub program_len: usize,
    /// Maximum executed instructions per program.
    pub step_budget: u32,
    /// Semantics tag; must match the tag this build implements.
    pub semantics_version: String,
}

impl Default for MiniRepConfig {
    fn default() -> Self {
        MiniRepConfig {
            alphabet_size: 8,
            program_len: 8,
            step_budget: 100,
            semantics_version: VM_SEMANTICS_VERSION.to_string(),
        }
    }
}

impl MiniRepConfig {
    pub fn new(alphabet_size: usize, program_len: usize, step_budget: u32) -> Self {
        MiniRepConfig {
            alphabet_size,
            program_len,
            step_budget,
            semantics_version: VM_SEMANTICS_VERSION.to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=8).contains(&self.alphabet_size) {
            return Err(Error::InvalidVmConfig(format!(
                "alphabet size must be in 2..=8, got {}",
                self.alphabet_size
            )));
        }
        if self.program_len == 0 {
            return Err(Error::InvalidVmConfig("program length must be >= 1".into()));
        }
        if self.semantics_version != VM_SEMANTICS_VERSION {
            return Err(Error::InvalidVmConfig(format!(
                "semantics version {:?} not supported by this build ({})",
                self.semantics_version, VM_SEMANTICS_VERSION
            )));
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Result<Alphabet> {
        Alphabet::lowercase_prefix(self.alphabet_size)
    }
}

/// Why a viability run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictReason {
    CopiedSelf,
    BudgetExhausted,
    HaltedWithoutCopy,
}

/// Outcome of executing one program. `viable` is true exactly when `reason`
/// is [`VerdictReason::CopiedSelf`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ViabilityVerdict {
    pub viable: bool,
    pub steps: u32,
    pub reason: VerdictReason,
}

/// Size of the program space `K^L`.
pub fn program_space_size(config: &MiniRepConfig) -> Result<u128> {
    (config.alphabet_size as u128)
        .checked_pow(config.program_len as u32)
        .ok_or_else(|| Error::InvalidVmConfig("program space overflows u128".into()))
}

/// Run one program to a verdict under the documented semantics.
pub fn vm_check_viability(program: &Sequence, config: &MiniRepConfig) -> Result<ViabilityVerdict> {
    config.validate()?;
    if program.len() != config.program_len {
        return Err(Error::LengthMismatch {
            left: program.len(),
            right: config.program_len,
        });
    }
    if let Some(&i) = program
        .indices()
        .iter()
        .find(|&&i| i as usize >= config.alphabet_size)
    {
        return Err(Error::IndexOutOfRange {
            index: i,
            alphabet_size: config.alphabet_size,
        });
    }
    let mut tape = vec![BLANK; 2 * config.program_len + 2];
    Ok(run_program(program.indices(), config, &mut tape))
}

/// Core interpreter. `tape` is caller-provided scratch so enumeration can
/// reuse one allocation; it is fully reinitialized here.
fn run_program(genotype: &[u8], config: &MiniRepConfig, tape: &mut [u8]) -> ViabilityVerdict {
    let len = genotype.len();
    let tape_len = 2 * len + 2;
    debug_assert_eq!(tape.len(), tape_len);
    tape[..len].copy_from_slice(genotype);
    tape[len..].fill(BLANK);

    let mut ip = 0usize;
    let mut read = 0usize;
    let mut write = len + 1;
    let mut steps = 0u32;

    while steps < config.step_budget {
        let op = tape[ip];
        steps += 1;
        match op {
            OP_COPY => {
                tape[write] = tape[read];
                if copy_present(genotype, tape) {
                    return ViabilityVerdict {
                        viable: true,
                        steps,
                        reason: VerdictReason::CopiedSelf,
                    };
                }
                ip = advance(ip, len);
            }
            OP_ADVANCE_READ => {
                read = (read + 1) % tape_len;
                ip = advance(ip, len);
            }
            OP_ADVANCE_WRITE => {
                write = (write + 1) % tape_len;
                ip = advance(ip, len);
            }
            OP_JUMP_IF_NOT_DONE => {
                if read < len {
                    ip = 0;
                } else {
                    ip = advance(ip, len);
                }
            }
            OP_HALT => {
                return ViabilityVerdict {
                    viable: false,
                    steps,
                    reason: VerdictReason::HaltedWithoutCopy,
                };
            }
            7 => {
                std::mem::swap(&mut read, &mut write);
                ip = advance(ip, len);
            }
            // nop-a, nop-b, and fetched blanks
            _ => {
                ip = advance(ip, len);
            }
        }
    }
    ViabilityVerdict {
        viable: false,
        steps,
        reason: VerdictReason::BudgetExhausted,
    }
}

#[inline]
fn advance(ip: usize, len: usize) -> usize {
    let next = ip + 1;
    if next == len {
        0
    } else {
        next
    }
}

/// Does the original genotype appear at any window disjoint from the program
/// region? Window starts run from `L` to `tape_len - L` inclusive.
#[inline]
fn copy_present(genotype: &[u8], tape: &[u8]) -> bool {
    let len = genotype.len();
    tape[len..]
        .windows(len)
        .any(|w| w == genotype)
}

/// Exhaustively classify every program in the space. Deterministic and
/// independent of worker count: programs are visited in lexicographic order
/// and shards are merged in order.
pub fn enumerate_landscape(config: &MiniRepConfig) -> Result<ReplicatorSet> {
    config.validate()?;
    let space = program_space_size(config)?;
    if space > ENUMERATION_GUARD {
        return Err(Error::EnumerationGuard {
            space,
            limit: ENUMERATION_GUARD,
        });
    }
    let total = space as u64;
    let k = config.alphabet_size as u64;
    let len = config.program_len;

    let decode = |id: u64| -> Vec<u8> {
        // big-endian base-K digits, so ascending ids are lexicographic
        let mut digits = vec![0u8; len];
        let mut rest = id;
        for slot in digits.iter_mut().rev() {
            *slot = (rest % k) as u8;
            rest /= k;
        }
        digits
    };

    let alphabet = config.alphabet()?;
    let scan_chunk = |range: std::ops::Range<u64>| -> Vec<Sequence> {
        let mut tape = vec![BLANK; 2 * len + 2];
        let mut found = Vec::new();
        for id in range {
            let genotype = decode(id);
            let verdict = run_program(&genotype, config, &mut tape);
            if verdict.viable {
                found.push(
                    Sequence::from_indices(genotype, &alphabet)
                        .expect("decoded program is alphabet-valid"),
                );
            }
        }
        found
    };

    const CHUNK: u64 = 1 << 16;
    let chunk_ranges: Vec<std::ops::Range<u64>> = (0..total.div_ceil(CHUNK))
        .map(|c| (c * CHUNK)..((c + 1) * CHUNK).min(total))
        .collect();

    #[cfg(feature = "parallel")]
    let shards: Vec<Vec<Sequence>> = {
        use rayon::prelude::*;
        chunk_ranges.into_par_iter().map(scan_chunk).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let shards: Vec<Vec<Sequence>> = chunk_ranges.into_iter().map(scan_chunk).collect();

    let members: Vec<Sequence> = shards.into_iter().flatten().collect();
    ReplicatorSet::from_members(config.alphabet()?, len, members)
}

/// Sidecar metadata written next to an enumerated list file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnumerationMeta {
    pub config: MiniRepConfig,
    pub count: usize,
    pub space: u128,
    pub fraction: f64,
    pub semantics_version: String,
    pub wall_time_secs: f64,
}
