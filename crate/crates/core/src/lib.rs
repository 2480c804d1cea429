//! Spoofbench: how a near-perfect replicator classifier gets fooled.
//!
//! The crate builds a ground-truth landscape of self-replicating sequences
//! (either by exhaustively running a small virtual machine over every program,
//! or by a seeded synthetic sampler at the 26^9 scale), trains a from-scratch
//! MLP to separate replicators from uniformly sampled non-replicators, and
//! then runs greedy confidence hill-climbs against the trained model. The
//! climbs reliably reach near-certain "replicator" confidence on sequences
//! the oracle rejects; the `analysis` module aggregates those campaigns into
//! CSV tables and static SVG charts.
//!
//! Module map:
//! - [`seq`]: alphabets, fixed-length sequences, Hamming geometry, seeded RNG.
//! - [`landscape`]: replicator sets, the MiniRep VM, exhaustive enumeration,
//!   and the synthetic motif landscape.
//! - [`neural`]: embedding + GELU MLP, reverse-mode gradients, AdamW,
//!   checkpoint I/O.
//! - [`training`]: split construction, negative sampling, the training loop,
//!   evaluation metrics.
//! - [`spoof`]: the greedy confidence climb and campaign orchestration.
//! - [`analysis`]: confidence-by-query tables, endpoint statistics, Hamming
//!   histograms, positional frequencies, CSV/SVG emission.
//! - [`pipeline`]: declarative experiment config and the one-shot
//!   enumerate/train/spoof/analyze pipeline with a provenance manifest.

pub mod analysis;
pub mod error;
pub mod landscape;
pub mod neural;
pub mod pipeline;
pub mod seq;
pub mod spoof;
pub mod training;

pub use error::Error;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Version tag of the MiniRep VM semantics. Bump on any change to the
/// instruction set, tape layout, or viability rule.
pub const VM_SEMANTICS_VERSION: &str = "minirep-v1";

/// Version tag of the model checkpoint layout.
pub const MODEL_FORMAT_VERSION: &str = "mlp-ckpt-v1";

/// Version tag of the trajectory log schema.
pub const LOG_FORMAT_VERSION: &str = "spooflog-v1";
