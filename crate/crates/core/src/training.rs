//! Dataset construction and the training loop.
//!
//! Positives are the replicator set, shuffled and partitioned 80/10/10 by
//! floor arithmetic (remainder to test). Each split gets exactly one
//! negative per positive, drawn uniformly from the full K^L space with
//! rejection of known replicators and of any sequence already used as a
//! negative in *any* split, so no sequence ever appears twice across the
//! dataset.

use crate::landscape::ReplicatorSet;
use crate::neural::{Mode, MlpModel, TrainerState};
use crate::seq::{random_sequence, RngState, Sequence};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub sequence: Sequence,
    /// 1 = replicator, 0 = non-replicator.
    pub label: u8,
}

impl LabeledExample {
    pub fn label_f64(&self) -> f64 {
        self.label as f64
    }
}

#[derive(Debug, Clone)]
pub struct DatasetSplits {
    pub train: Vec<LabeledExample>,
    pub validation: Vec<LabeledExample>,
    pub test: Vec<LabeledExample>,
    /// Seed the splits were derived from, recorded for provenance.
    pub seed: u64,
}

impl DatasetSplits {
    pub fn split(&self, name: SplitName) -> &[LabeledExample] {
        match name {
            SplitName::Train => &self.train,
            SplitName::Validation => &self.validation,
            SplitName::Test => &self.test,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitName {
    Train,
    Validation,
    Test,
}

impl SplitName {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Validation => "validation",
            SplitName::Test => "test",
        }
    }
}

impl std::str::FromStr for SplitName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitName::Train),
            "validation" => Ok(SplitName::Validation),
            "test" => Ok(SplitName::Test),
            other => Err(Error::InvalidConfig(format!("unknown split {other:?}"))),
        }
    }
}

/// Confusion counts and derived metrics at a decision threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub mean_bce: f64,
    pub true_positives: usize,
    pub true_negatives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Per-epoch curves recorded after each pass over the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub validation_loss: f64,
    pub validation_accuracy: f64,
}

/// Shuffle positives, partition 80/10/10, and balance each split with
/// freshly sampled negatives. Deterministic in (`set`, `rng`).
pub fn build_splits(set: &ReplicatorSet, rng: &mut RngState) -> Result<DatasetSplits> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let seed = rng.seed();
    let mut positives: Vec<Sequence> = set.members().to_vec();
    rng.shuffle(&mut positives);

    let n = positives.len();
    let n_train = n * 8 / 10;
    let n_val = n / 10;

    let alphabet = set.alphabet();
    let len = set.sequence_len();
    let mut used_negatives: HashSet<Sequence> = HashSet::with_capacity(n);
    let mut negatives: Vec<Sequence> = Vec::with_capacity(n);
    let max_attempts = 200 * n as u64 + 1_000;
    let mut attempts = 0u64;
    while negatives.len() < n {
        if attempts >= max_attempts {
            return Err(Error::NegativeSpaceExhausted { attempts });
        }
        attempts += 1;
        let candidate = random_sequence(alphabet, len, rng);
        if set.is_replicator(&candidate)? || used_negatives.contains(&candidate) {
            continue;
        }
        used_negatives.insert(candidate.clone());
        negatives.push(candidate);
    }

    let make_split = |pos: &[Sequence], neg: &[Sequence]| -> Vec<LabeledExample> {
        pos.iter()
            .map(|s| LabeledExample {
                sequence: s.clone(),
                label: 1,
            })
            .chain(neg.iter().map(|s| LabeledExample {
                sequence: s.clone(),
                label: 0,
            }))
            .collect()
    };

    Ok(DatasetSplits {
        train: make_split(&positives[..n_train], &negatives[..n_train]),
        validation: make_split(
            &positives[n_train..n_train + n_val],
            &negatives[n_train..n_train + n_val],
        ),
        test: make_split(&positives[n_train + n_val..], &negatives[n_train + n_val..]),
        seed,
    })
}

/// Epoch and batch-size settings (the optimizer hyperparameters live in
/// [`crate::neural::AdamWParams`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainSettings {
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for TrainSettings {
    /// Reference schedule: batch size 8,192 for 10 epochs.
    fn default() -> Self {
        TrainSettings {
            epochs: 10,
            batch_size: 8_192,
        }
    }
}

/// Train in place: `epochs` passes over the train split, reshuffled each
/// epoch, final partial batch included. Records train/validation loss and
/// accuracy after every epoch. The validation split is never used for model
/// selection; the schedule runs to completion.
pub fn train_model(
    model: &mut MlpModel,
    splits: &DatasetSplits,
    state: &mut TrainerState,
    rng: &mut RngState,
    settings: TrainSettings,
) -> Result<Vec<EpochStats>> {
    if splits.train.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let mut order: Vec<usize> = (0..splits.train.len()).collect();
    let mut curves = Vec::with_capacity(settings.epochs);

    for epoch in 1..=settings.epochs {
        rng.shuffle(&mut order);
        for (batch_index, chunk) in order.chunks(settings.batch_size).enumerate() {
            let batch: Vec<Sequence> = chunk
                .iter()
                .map(|&i| splits.train[i].sequence.clone())
                .collect();
            let labels: Vec<f64> = chunk.iter().map(|&i| splits.train[i].label_f64()).collect();
            let cache = model.forward_cached(&batch, Mode::Train, rng)?;
            let loss = MlpModel::mean_loss(&cache, &labels);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: batch_index,
                    loss,
                });
            }
            let grads = model.backward(&cache, &labels, Mode::Train)?;
            state.apply(model, &grads)?;
        }
        let train_eval = evaluate(model, &splits.train, 0.5)?;
        let val_eval = evaluate(model, &splits.validation, 0.5)?;
        curves.push(EpochStats {
            epoch,
            train_loss: train_eval.mean_bce,
            train_accuracy: train_eval.accuracy,
            validation_loss: val_eval.mean_bce,
            validation_accuracy: val_eval.accuracy,
        });
    }

    if let (Some(first), Some(last)) = (curves.first(), curves.last()) {
        if last.train_loss >= first.train_loss && settings.epochs > 1 {
            eprintln!(
                "warning: training loss did not improve ({} -> {}); the landscape may not be learnable at these settings",
                first.train_loss, last.train_loss
            );
        }
    }
    Ok(curves)
}

/// Confusion counts at `threshold`. A probability exactly equal to the
/// threshold classifies as negative, so tie behavior is reproducible.
pub fn evaluate(model: &MlpModel, examples: &[LabeledExample], threshold: f64) -> Result<EvalMetrics> {
    if examples.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    const EVAL_CHUNK: usize = 8_192;
    let mut probabilities = Vec::with_capacity(examples.len());
    for chunk in examples.chunks(EVAL_CHUNK) {
        let batch: Vec<Sequence> = chunk.iter().map(|e| e.sequence.clone()).collect();
        probabilities.extend(model.predict_batch(&batch)?);
    }
    let labels: Vec<f64> = examples.iter().map(|e| e.label_f64()).collect();
    Ok(metrics_from_probabilities(&probabilities, &labels, threshold))
}

/// Metric arithmetic shared by [`evaluate`] and report code. Precision and
/// recall fall back to 0 when their denominators are empty.
pub fn metrics_from_probabilities(probabilities: &[f64], labels: &[f64], threshold: f64) -> EvalMetrics {
    let mut tp = 0usize;
    let mut tn = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    let mut loss_sum = 0.0;
    for (&p, &y) in probabilities.iter().zip(labels) {
        let predicted_positive = p > threshold;
        let actual_positive = y >= 0.5;
        match (predicted_positive, actual_positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
        loss_sum += crate::neural::bce_loss(p, y);
    }
    let total = probabilities.len() as f64;
    EvalMetrics {
        accuracy: (tp + tn) as f64 / total,
        precision: if tp + fp > 0 {
            tp as f64 / (tp + fp) as f64
        } else {
            0.0
        },
        recall: if tp + fn_ > 0 {
            tp as f64 / (tp + fn_) as f64
        } else {
            0.0
        },
        mean_bce: loss_sum / total,
        true_positives: tp,
        true_negatives: tn,
        false_positives: fp,
        false_negatives: fn_,
    }
}

/// Sidecar manifest for persisted splits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitsManifest {
    pub seed: u64,
    pub landscape_hash: String,
    pub counts: SplitCounts,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

/// Write `train.csv` / `validation.csv` / `test.csv` (`sequence,label`
/// lines, no header) plus `splits.json`.
pub fn save_splits(
    splits: &DatasetSplits,
    set: &ReplicatorSet,
    dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let alphabet = set.alphabet();
    for (name, examples) in [
        ("train.csv", &splits.train),
        ("validation.csv", &splits.validation),
        ("test.csv", &splits.test),
    ] {
        let path = dir.join(name);
        let file =
            std::fs::File::create(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut out = BufWriter::new(file);
        for example in examples.iter() {
            writeln!(out, "{},{}", example.sequence.render(alphabet), example.label)
                .map_err(|e| Error::io(path.display().to_string(), e))?;
        }
        out.flush().map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    let manifest = SplitsManifest {
        seed: splits.seed,
        landscape_hash: set.identity_hash(),
        counts: SplitCounts {
            train: splits.train.len(),
            validation: splits.validation.len(),
            test: splits.test.len(),
        },
    };
    let path = dir.join("splits.json");
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

/// Reload persisted splits; the inverse of [`save_splits`].
pub fn load_splits(
    dir: &Path,
    alphabet: &crate::seq::Alphabet,
    len: usize,
) -> Result<DatasetSplits> {
    let manifest_path = dir.join("splits.json");
    let manifest: SplitsManifest = serde_json::from_str(
        &std::fs::read_to_string(&manifest_path)
            .map_err(|e| Error::io(manifest_path.display().to_string(), e))?,
    )
    .map_err(|e| Error::ConfigParse(e.to_string()))?;

    let load = |name: &str| -> Result<Vec<LabeledExample>> {
        let path = dir.join(name);
        let display = path.display().to_string();
        let file = std::fs::File::open(&path).map_err(|e| Error::io(display.clone(), e))?;
        let mut examples = Vec::new();
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(display.clone(), e))?;
            let text = line.trim_end_matches('\r');
            if text.is_empty() {
                continue;
            }
            let (seq_text, label_text) = text.split_once(',').ok_or_else(|| Error::MalformedLine {
                path: display.clone(),
                line: lineno + 1,
                reason: "expected sequence,label".into(),
            })?;
            if seq_text.chars().count() != len {
                return Err(Error::MalformedLine {
                    path: display.clone(),
                    line: lineno + 1,
                    reason: format!("expected {len} symbols, got {}", seq_text.chars().count()),
                });
            }
            let sequence = Sequence::parse(seq_text, alphabet).map_err(|e| Error::MalformedLine {
                path: display.clone(),
                line: lineno + 1,
                reason: e.to_string(),
            })?;
            let label: u8 = match label_text {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(Error::MalformedLine {
                        path: display.clone(),
                        line: lineno + 1,
                        reason: format!("label must be 0 or 1, got {other:?}"),
                    })
                }
            };
            examples.push(LabeledExample { sequence, label });
        }
        Ok(examples)
    };

    Ok(DatasetSplits {
        train: load("train.csv")?,
        validation: load("validation.csv")?,
        test: load("test.csv")?,
        seed: manifest.seed,
    })
}
