//! Greedy confidence hill-climbing against a trained classifier.
//!
//! One run starts from a uniform or random sequence, proposes single-site
//! mutants, and accepts a mutant exactly when the model's replicator
//! confidence strictly increases. Every confidence evaluation counts against
//! the query budget: the start evaluation is query 0 and rejected proposals
//! are logged like accepted ones, so a budget of 300 means 300 model calls,
//! no more.
//!
//! A campaign is the full grid: per replicate, one run from each of the K
//! uniform sequences plus K random starts (re-drawn if the draw happens to
//! be a known replicator), each with its own seed derived from the master
//! seed via [`crate::seq::derive_seed`]. Runs are independent, so they can
//! execute on any number of workers without changing a single logged byte;
//! output order is fixed by run id.

use crate::landscape::ReplicatorSet;
use crate::neural::MlpModel;
use crate::seq::{
    derive_seed, propose_point_mutation, random_sequence, uniform_sequences, Alphabet, RngState,
    SeedDomain, Sequence, RANDOM_SLOT_BASE, RUN_COUNTER_STRIDE,
};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    Uniform,
    Random,
}

impl StartKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StartKind::Uniform => "uniform",
            StartKind::Random => "random",
        }
    }
}

/// Campaign shape: query budget per run and replicate count. The target
/// class is always "replicator" and every replicate runs both start kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpoofConfig {
    pub query_budget: u32,
    pub replicates: u32,
}

impl Default for SpoofConfig {
    /// Reference design: budget 300, 30 replicates (1,560 runs over a
    /// 26-letter alphabet).
    fn default() -> Self {
        SpoofConfig {
            query_budget: 300,
            replicates: 30,
        }
    }
}

impl SpoofConfig {
    pub fn validate(&self) -> Result<()> {
        if self.query_budget == 0 {
            return Err(Error::InvalidConfig("query budget must be >= 1".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicate count must be >= 1".into()));
        }
        Ok(())
    }
}

/// One logged model query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRecord {
    pub query: u32,
    pub sequence: Sequence,
    pub confidence: f64,
    pub accepted: bool,
}

/// Full record of one hill-climb. `steps[0]` is the start evaluation
/// (query 0, always accepted as the initial current sequence); accepted
/// confidences are strictly increasing and consecutive accepted sequences
/// differ at exactly one site.
#[derive(Debug, Clone, PartialEq)]
pub struct SpoofTrajectory {
    pub run_id: String,
    pub replicate: u32,
    pub start_kind: StartKind,
    pub steps: Vec<QueryRecord>,
    pub final_sequence: Sequence,
    pub final_confidence: f64,
}

impl SpoofTrajectory {
    pub fn start_sequence(&self) -> &Sequence {
        &self.steps[0].sequence
    }

    /// Confidence of the current (last accepted) sequence as of query
    /// `checkpoint`: the step function the confidence tables aggregate.
    pub fn confidence_at(&self, checkpoint: u32) -> f64 {
        let mut current = self.steps[0].confidence;
        for step in &self.steps[1..] {
            if step.query > checkpoint {
                break;
            }
            if step.accepted {
                current = step.confidence;
            }
        }
        current
    }

    pub fn query_count(&self) -> u32 {
        self.steps.len() as u32
    }
}

/// Identity of one run within a campaign.
#[derive(Debug, Clone)]
pub struct RunLabel {
    pub run_id: String,
    pub replicate: u32,
    pub start_kind: StartKind,
}

/// One greedy climb from `start`, spending exactly `budget` model queries.
pub fn spoof_run(
    model: &MlpModel,
    alphabet: &Alphabet,
    start: Sequence,
    budget: u32,
    rng: &mut RngState,
    label: RunLabel,
) -> Result<SpoofTrajectory> {
    if budget == 0 {
        return Err(Error::InvalidConfig("query budget must be >= 1".into()));
    }
    let mut steps = Vec::with_capacity(budget as usize);
    let start_confidence = model.predict_confidence(&start)?;
    steps.push(QueryRecord {
        query: 0,
        sequence: start.clone(),
        confidence: start_confidence,
        accepted: true,
    });
    let mut current = start;
    let mut current_confidence = start_confidence;
    for query in 1..budget {
        let proposal = propose_point_mutation(&current, alphabet, rng);
        let confidence = model.predict_confidence(&proposal)?;
        let accepted = confidence > current_confidence;
        steps.push(QueryRecord {
            query,
            sequence: proposal.clone(),
            confidence,
            accepted,
        });
        if accepted {
            current = proposal;
            current_confidence = confidence;
        }
    }
    Ok(SpoofTrajectory {
        run_id: label.run_id,
        replicate: label.replicate,
        start_kind: label.start_kind,
        steps,
        final_sequence: current,
        final_confidence: current_confidence,
    })
}

struct RunSpec {
    replicate: u32,
    start_kind: StartKind,
    index: usize,
    seed: u64,
}

/// The full grid of `replicates x (K uniform + K random)` runs, each seeded
/// independently from `master_seed`. Output order is (replicate, uniform
/// runs in alphabet order, random runs in draw order) regardless of worker
/// scheduling.
pub fn run_campaign(
    model: &MlpModel,
    set: &ReplicatorSet,
    config: &SpoofConfig,
    master_seed: u64,
) -> Result<Vec<SpoofTrajectory>> {
    config.validate()?;
    let alphabet = set.alphabet();
    if alphabet.size() != model.config.alphabet_size
        || set.sequence_len() != model.config.seq_len
    {
        return Err(Error::ShapeMismatch(format!(
            "landscape ({} symbols, length {}) does not match model ({} symbols, length {})",
            alphabet.size(),
            set.sequence_len(),
            model.config.alphabet_size,
            model.config.seq_len
        )));
    }
    let k = alphabet.size();
    let uniform_starts = uniform_sequences(alphabet, set.sequence_len());

    let mut specs = Vec::with_capacity(config.replicates as usize * 2 * k);
    for replicate in 0..config.replicates {
        for index in 0..k {
            specs.push(RunSpec {
                replicate,
                start_kind: StartKind::Uniform,
                index,
                seed: derive_seed(
                    master_seed,
                    SeedDomain::Campaign,
                    replicate as u64 * RUN_COUNTER_STRIDE + index as u64,
                ),
            });
        }
        for index in 0..k {
            specs.push(RunSpec {
                replicate,
                start_kind: StartKind::Random,
                index,
                seed: derive_seed(
                    master_seed,
                    SeedDomain::Campaign,
                    replicate as u64 * RUN_COUNTER_STRIDE + RANDOM_SLOT_BASE + index as u64,
                ),
            });
        }
    }

    let run_one = |spec: &RunSpec| -> Result<SpoofTrajectory> {
        let mut rng = RngState::new(spec.seed);
        let (start, tag) = match spec.start_kind {
            StartKind::Uniform => (uniform_starts[spec.index].clone(), "uni"),
            StartKind::Random => {
                // re-draw on the negligible chance of starting on a true
                // replicator; spoofing a member would be meaningless
                let start = loop {
                    let candidate = random_sequence(alphabet, set.sequence_len(), &mut rng);
                    if !set.is_replicator(&candidate)? {
                        break candidate;
                    }
                };
                (start, "rnd")
            }
        };
        let label = RunLabel {
            run_id: format!("rep{:02}-{}{:02}", spec.replicate, tag, spec.index),
            replicate: spec.replicate,
            start_kind: spec.start_kind,
        };
        spoof_run(model, alphabet, start, config.query_budget, &mut rng, label)
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        specs.par_iter().map(run_one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        specs.iter().map(run_one).collect()
    }
}

/// Oracle check of one endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointCheck {
    pub run_id: String,
    pub start_kind: StartKind,
    pub final_confidence: f64,
    pub is_replicator: bool,
}

/// Campaign-level endpoint verification: which high-confidence endpoints are
/// actually replicators, and the resulting false-attractor rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointVerification {
    pub checks: Vec<EndpointCheck>,
    pub total: usize,
    pub replicator_endpoints: usize,
    /// Fraction of runs whose final sequence the oracle rejects.
    pub false_attractor_rate: f64,
}

pub fn verify_endpoints(
    set: &ReplicatorSet,
    trajectories: &[SpoofTrajectory],
) -> Result<EndpointVerification> {
    let mut checks = Vec::with_capacity(trajectories.len());
    let mut replicator_endpoints = 0usize;
    for t in trajectories {
        let is_replicator = set.is_replicator(&t.final_sequence)?;
        if is_replicator {
            replicator_endpoints += 1;
        }
        checks.push(EndpointCheck {
            run_id: t.run_id.clone(),
            start_kind: t.start_kind,
            final_confidence: t.final_confidence,
            is_replicator,
        });
    }
    let total = trajectories.len();
    Ok(EndpointVerification {
        checks,
        total,
        replicator_endpoints,
        false_attractor_rate: if total == 0 {
            0.0
        } else {
            (total - replicator_endpoints) as f64 / total as f64
        },
    })
}

/// One line of the JSON-lines campaign log (`spooflog-v1`).
#[derive(Debug, Serialize, Deserialize)]
struct LogLine {
    run_id: String,
    replicate: u32,
    start_kind: StartKind,
    query: u32,
    sequence: String,
    confidence: f64,
    accepted: bool,
}

/// Write the campaign log: one JSON object per query, runs in campaign
/// order. Byte-deterministic for identical trajectories.
pub fn save_trajectories(
    trajectories: &[SpoofTrajectory],
    alphabet: &Alphabet,
    path: &Path,
) -> Result<()> {
    let display = path.display().to_string();
    let file = std::fs::File::create(path).map_err(|e| Error::io(display.clone(), e))?;
    let mut out = BufWriter::new(file);
    for t in trajectories {
        for step in &t.steps {
            let line = LogLine {
                run_id: t.run_id.clone(),
                replicate: t.replicate,
                start_kind: t.start_kind,
                query: step.query,
                sequence: step.sequence.render(alphabet),
                confidence: step.confidence,
                accepted: step.accepted,
            };
            let json =
                serde_json::to_string(&line).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            writeln!(out, "{json}").map_err(|e| Error::io(display.clone(), e))?;
        }
    }
    out.flush().map_err(|e| Error::io(display, e))?;
    Ok(())
}

/// Reload a campaign log written by [`save_trajectories`].
pub fn load_trajectories(path: &Path, alphabet: &Alphabet) -> Result<Vec<SpoofTrajectory>> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(display.clone(), e))?;
    let mut trajectories: Vec<SpoofTrajectory> = Vec::new();
    for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(display.clone(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: LogLine = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            path: display.clone(),
            line: lineno + 1,
            reason: e.to_string(),
        })?;
        let sequence =
            Sequence::parse(&record.sequence, alphabet).map_err(|e| Error::MalformedLine {
                path: display.clone(),
                line: lineno + 1,
                reason: e.to_string(),
            })?;
        let step = QueryRecord {
            query: record.query,
            sequence,
            confidence: record.confidence,
            accepted: record.accepted,
        };
        let start_new = record.query == 0;
        if start_new {
            trajectories.push(SpoofTrajectory {
                run_id: record.run_id,
                replicate: record.replicate,
                start_kind: record.start_kind,
                final_sequence: step.sequence.clone(),
                final_confidence: step.confidence,
                steps: vec![step],
            });
        } else {
            let current = trajectories.last_mut().ok_or_else(|| Error::MalformedLine {
                path: display.clone(),
                line: lineno + 1,
                reason: "query record before any run start".into(),
            })?;
            if current.run_id != record.run_id
                || step.query != current.steps.last().unwrap().query + 1
            {
                return Err(Error::MalformedLine {
                    path: display.clone(),
                    line: lineno + 1,
                    reason: format!(
                        "out-of-order record for run {} (query {})",
                        record.run_id, step.query
                    ),
                });
            }
            if step.accepted {
                current.final_sequence = step.sequence.clone();
                current.final_confidence = step.confidence;
            }
            current.steps.push(step);
        }
    }
    Ok(trajectories)
}
