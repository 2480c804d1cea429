//! One-shot experiment pipeline with durable provenance.
//!
//! An [`ExperimentConfig`] is a single declarative TOML document naming the
//! landscape source, architecture, training schedule, campaign shape, and
//! one master seed. Every stage seed is derived from the master seed by the
//! counter scheme in [`crate::seq::derive_seed`], so a config is sufficient
//! to re-derive every output file; `reproduce` records their SHA-256 hashes
//! in `manifest.json` and a rerun must match byte for byte.
//!
//! Output layout under the chosen directory:
//!
//! ```text
//! replicators.txt      ground-truth list (sorted, one sequence per line)
//! splits/              train/validation/test CSVs + splits.json
//! model.ckpt           trained model checkpoint
//! metrics.json         test metrics + per-epoch curves
//! trajectories.jsonl   campaign log, one JSON object per model query
//! report/              CSV tables, summary.json, SVG charts
//! manifest.json        config echo, derived seeds, version tags, file hashes
//! ```

use crate::analysis::{analyze_campaign, emit_report, CampaignReport, LandscapeInfo};
use crate::landscape::{
    enumerate_landscape, generate_synthetic, load_replicators, MiniRepConfig, ReplicatorSet,
    SyntheticConfig,
};
use crate::neural::{save_model, AdamWParams, MlpConfig, MlpModel, TrainerState};
use crate::seq::{derive_seed, RngState, SeedDomain};
use crate::spoof::{run_campaign, save_trajectories, SpoofConfig, SpoofTrajectory};
use crate::training::{
    build_splits, evaluate, save_splits, train_model, DatasetSplits, EpochStats, EvalMetrics,
    TrainSettings,
};
use crate::{Error, Result, LOG_FORMAT_VERSION, MODEL_FORMAT_VERSION, VM_SEMANTICS_VERSION};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Ground-truth source. Exactly one; all scale parameters are explicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum LandscapeSpec {
    /// Load an existing replicator list (e.g. an enumeration output or an
    /// externally supplied length-9 list).
    File {
        path: PathBuf,
        alphabet_size: usize,
        length: usize,
    },
    /// Exhaustively enumerate the MiniRep VM.
    Minirep {
        alphabet_size: usize,
        program_len: usize,
        step_budget: u32,
    },
    /// Seeded motif-family sampler.
    Synthetic {
        alphabet_size: usize,
        length: usize,
        target_count: usize,
        families: usize,
        core_symbols: usize,
    },
}

impl LandscapeSpec {
    pub fn alphabet_size(&self) -> usize {
        match self {
            LandscapeSpec::File { alphabet_size, .. }
            | LandscapeSpec::Minirep { alphabet_size, .. }
            | LandscapeSpec::Synthetic { alphabet_size, .. } => *alphabet_size,
        }
    }

    pub fn sequence_len(&self) -> usize {
        match self {
            LandscapeSpec::File { length, .. } | LandscapeSpec::Synthetic { length, .. } => *length,
            LandscapeSpec::Minirep { program_len, .. } => *program_len,
        }
    }

    pub fn source_name(&self) -> &'static str {
        match self {
            LandscapeSpec::File { .. } => "file",
            LandscapeSpec::Minirep { .. } => "minirep",
            LandscapeSpec::Synthetic { .. } => "synthetic",
        }
    }
}

/// Architecture knobs (alphabet size and length come from the landscape).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub embed_dim: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub dropout: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            embed_dim: 32,
            hidden1: 512,
            hidden2: 256,
            dropout: 0.1,
        }
    }
}

/// Training schedule and optimizer scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSpec {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
}

impl Default for TrainSpec {
    fn default() -> Self {
        TrainSpec {
            epochs: 10,
            batch_size: 8_192,
            learning_rate: 2e-3,
            weight_decay: 1e-4,
        }
    }
}

/// The whole experiment in one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Master seed; every stage seed is derived from it.
    pub seed: u64,
    pub landscape: LandscapeSpec,
    pub model: ModelSpec,
    pub train: TrainSpec,
    pub spoof: SpoofConfig,
}

impl ExperimentConfig {
    /// Full-scale preset: synthetic 26^9 landscape with 36,171 members, the
    /// reference architecture and schedule, 300-query budget, 30 replicates
    /// (1,560 runs).
    pub fn paper(seed: u64) -> Self {
        let synthetic = SyntheticConfig::default();
        ExperimentConfig {
            seed,
            landscape: LandscapeSpec::Synthetic {
                alphabet_size: synthetic.alphabet_size,
                length: synthetic.length,
                target_count: synthetic.target_count,
                families: synthetic.families,
                core_symbols: synthetic.core_symbols,
            },
            model: ModelSpec::default(),
            train: TrainSpec::default(),
            spoof: SpoofConfig::default(),
        }
    }

    /// Seconds-scale preset for CI and the browser demo: 6-letter alphabet,
    /// ~200 positives, 32/16 hidden sizes, budget 60, 2 replicates.
    pub fn micro(seed: u64) -> Self {
        ExperimentConfig {
            seed,
            landscape: LandscapeSpec::Synthetic {
                alphabet_size: 6,
                length: 7,
                target_count: 200,
                families: 3,
                core_symbols: 3,
            },
            model: ModelSpec {
                embed_dim: 8,
                hidden1: 32,
                hidden2: 16,
                dropout: 0.1,
            },
            train: TrainSpec {
                epochs: 30,
                batch_size: 32,
                learning_rate: 2e-3,
                weight_decay: 1e-4,
            },
            spoof: SpoofConfig {
                query_budget: 60,
                replicates: 2,
            },
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_toml(&text)
    }

    pub fn mlp_config(&self) -> MlpConfig {
        MlpConfig {
            alphabet_size: self.landscape.alphabet_size(),
            seq_len: self.landscape.sequence_len(),
            embed_dim: self.model.embed_dim,
            hidden1: self.model.hidden1,
            hidden2: self.model.hidden2,
            dropout: self.model.dropout,
        }
    }

    pub fn adamw_params(&self) -> AdamWParams {
        AdamWParams {
            learning_rate: self.train.learning_rate,
            weight_decay: self.train.weight_decay,
            ..AdamWParams::default()
        }
    }

    pub fn train_settings(&self) -> TrainSettings {
        TrainSettings {
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
        }
    }

    /// The stage seeds this config derives from its master seed.
    pub fn derived_seeds(&self) -> DerivedSeeds {
        DerivedSeeds {
            landscape: derive_seed(self.seed, SeedDomain::Landscape, 0),
            splits: derive_seed(self.seed, SeedDomain::Splits, 0),
            model_init: derive_seed(self.seed, SeedDomain::ModelInit, 0),
            training: derive_seed(self.seed, SeedDomain::Training, 0),
            campaign_master: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedSeeds {
    pub landscape: u64,
    pub splits: u64,
    pub model_init: u64,
    pub training: u64,
    /// Per-run campaign seeds derive from this inside `run_campaign`.
    pub campaign_master: u64,
}

/// Build the ground truth named by a landscape spec.
pub fn build_landscape(spec: &LandscapeSpec, landscape_seed: u64) -> Result<ReplicatorSet> {
    match spec {
        LandscapeSpec::File {
            path,
            alphabet_size,
            length,
        } => {
            let alphabet = crate::seq::Alphabet::lowercase_prefix(*alphabet_size)?;
            load_replicators(path, &alphabet, *length)
        }
        LandscapeSpec::Minirep {
            alphabet_size,
            program_len,
            step_budget,
        } => enumerate_landscape(&MiniRepConfig::new(*alphabet_size, *program_len, *step_budget)),
        LandscapeSpec::Synthetic {
            alphabet_size,
            length,
            target_count,
            families,
            core_symbols,
        } => generate_synthetic(
            &SyntheticConfig {
                alphabet_size: *alphabet_size,
                length: *length,
                target_count: *target_count,
                families: *families,
                core_symbols: *core_symbols,
            },
            landscape_seed,
        ),
    }
}

/// Version tags snapshotted into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersionTags {
    pub vm_semantics: String,
    pub model_format: String,
    pub log_format: String,
}

impl VersionTags {
    pub fn current() -> Self {
        VersionTags {
            vm_semantics: VM_SEMANTICS_VERSION.to_string(),
            model_format: MODEL_FORMAT_VERSION.to_string(),
            log_format: LOG_FORMAT_VERSION.to_string(),
        }
    }
}

/// `manifest.json`: everything needed to audit or re-derive a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub seeds: DerivedSeeds,
    pub versions: VersionTags,
    pub landscape: LandscapeInfo,
    /// Relative path -> SHA-256 of every file the pipeline wrote.
    pub files: BTreeMap<String, String>,
}

/// Test metrics plus per-epoch curves (`metrics.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub test: EvalMetrics,
    pub curves: Vec<EpochStats>,
}

/// In-memory results of a full pipeline run.
#[derive(Debug)]
pub struct PipelineOutputs {
    pub out_dir: PathBuf,
    pub set: ReplicatorSet,
    pub splits: DatasetSplits,
    pub model: MlpModel,
    pub curves: Vec<EpochStats>,
    pub test_metrics: EvalMetrics,
    pub trajectories: Vec<SpoofTrajectory>,
    pub report: CampaignReport,
    pub manifest: Manifest,
}

fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// The whole experiment: landscape, splits, training, evaluation, spoofing
/// campaign, endpoint verification, analysis, report emission, manifest.
/// Any stage failure aborts with the stage name attached.
pub fn reproduce(config: &ExperimentConfig, out_dir: &Path) -> Result<PipelineOutputs> {
    config.spoof.validate().map_err(|e| e.in_stage("config"))?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let seeds = config.derived_seeds();
    let mut files: Vec<PathBuf> = Vec::new();

    // landscape
    let set = build_landscape(&config.landscape, seeds.landscape)
        .map_err(|e| e.in_stage("landscape"))?;
    let landscape_path = out_dir.join("replicators.txt");
    set.save(&landscape_path).map_err(|e| e.in_stage("landscape"))?;
    files.push(landscape_path);
    let landscape_info = LandscapeInfo::new(
        config.landscape.source_name(),
        matches!(config.landscape, LandscapeSpec::Synthetic { .. }),
        &set,
    );

    // splits
    let splits = build_splits(&set, &mut RngState::new(seeds.splits))
        .map_err(|e| e.in_stage("splits"))?;
    let splits_dir = out_dir.join("splits");
    save_splits(&splits, &set, &splits_dir).map_err(|e| e.in_stage("splits"))?;
    for name in ["train.csv", "validation.csv", "test.csv", "splits.json"] {
        files.push(splits_dir.join(name));
    }

    // train
    let mut model =
        MlpModel::init(config.mlp_config(), seeds.model_init).map_err(|e| e.in_stage("train"))?;
    let mut trainer = TrainerState::new(&model.config, config.adamw_params());
    let curves = train_model(
        &mut model,
        &splits,
        &mut trainer,
        &mut RngState::new(seeds.training),
        config.train_settings(),
    )
    .map_err(|e| e.in_stage("train"))?;
    let model_path = out_dir.join("model.ckpt");
    save_model(&model, &model_path).map_err(|e| e.in_stage("train"))?;
    files.push(model_path);

    // evaluate
    let test_metrics =
        evaluate(&model, &splits.test, 0.5).map_err(|e| e.in_stage("evaluate"))?;
    let metrics = MetricsFile {
        test: test_metrics.clone(),
        curves: curves.clone(),
    };
    let metrics_path = out_dir.join("metrics.json");
    let metrics_json = serde_json::to_string_pretty(&metrics)
        .map_err(|e| Error::InvalidConfig(e.to_string()).in_stage("evaluate"))?;
    std::fs::write(&metrics_path, metrics_json + "\n")
        .map_err(|e| Error::io(metrics_path.display().to_string(), e).in_stage("evaluate"))?;
    files.push(metrics_path);

    // spoof campaign
    let trajectories = run_campaign(&model, &set, &config.spoof, seeds.campaign_master)
        .map_err(|e| e.in_stage("spoof"))?;
    let trajectories_path = out_dir.join("trajectories.jsonl");
    save_trajectories(&trajectories, set.alphabet(), &trajectories_path)
        .map_err(|e| e.in_stage("spoof"))?;
    files.push(trajectories_path);

    // verify + analyze + report
    let report = analyze_campaign(
        &trajectories,
        &set,
        landscape_info.clone(),
        Some(curves.clone()),
        Some(test_metrics.clone()),
    )
    .map_err(|e| e.in_stage("analyze"))?;
    let report_dir = out_dir.join("report");
    let report_files = emit_report(&report, &report_dir).map_err(|e| e.in_stage("analyze"))?;
    files.extend(report_files);

    // manifest
    let mut hashes = BTreeMap::new();
    for path in &files {
        let relative = path
            .strip_prefix(out_dir)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/");
        hashes.insert(relative, sha256_hex(path).map_err(|e| e.in_stage("manifest"))?);
    }
    let manifest = Manifest {
        config: config.clone(),
        seeds,
        versions: VersionTags::current(),
        landscape: landscape_info,
        files: hashes,
    };
    let manifest_path = out_dir.join("manifest.json");
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::InvalidConfig(e.to_string()).in_stage("manifest"))?;
    std::fs::write(&manifest_path, manifest_json + "\n")
        .map_err(|e| Error::io(manifest_path.display().to_string(), e).in_stage("manifest"))?;

    Ok(PipelineOutputs {
        out_dir: out_dir.to_path_buf(),
        set,
        splits,
        model,
        curves,
        test_metrics,
        trajectories,
        report,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_toml_round_trips() {
        let config = ExperimentConfig::paper(7);
        let text = config.to_toml().unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(config, back);

        let micro = ExperimentConfig::micro(1);
        let back = ExperimentConfig::from_toml(&micro.to_toml().unwrap()).unwrap();
        assert_eq!(micro, back);
    }

    #[test]
    fn config_parse_errors_are_reported() {
        assert!(matches!(
            ExperimentConfig::from_toml("seed = \"not a number\""),
            Err(Error::ConfigParse(_))
        ));
    }

    #[test]
    fn derived_seeds_differ_per_stage() {
        let seeds = ExperimentConfig::micro(5).derived_seeds();
        let all = [seeds.landscape, seeds.splits, seeds.model_init, seeds.training];
        let distinct: std::collections::HashSet<u64> = all.iter().copied().collect();
        assert_eq!(distinct.len(), all.len());
    }

    #[test]
    fn micro_reproduce_writes_everything_and_is_deterministic() {
        let config = ExperimentConfig::micro(2024);
        let dir = tempfile::tempdir().unwrap();
        let out1 = dir.path().join("run1");
        let out2 = dir.path().join("run2");
        let first = reproduce(&config, &out1).unwrap();
        let second = reproduce(&config, &out2).unwrap();

        // campaign shape: replicates x (K uniform + K random)
        assert_eq!(first.trajectories.len(), 2 * (6 + 6));
        // replicators.txt + 4 split files + model.ckpt + metrics.json +
        // trajectories.jsonl + 10 report files
        assert_eq!(first.manifest.files.len(), 18);
        for name in [
            "replicators.txt",
            "model.ckpt",
            "metrics.json",
            "trajectories.jsonl",
            "manifest.json",
        ] {
            assert!(out1.join(name).exists(), "{name} missing");
        }

        // spoof endpoints echo the replicator motifs without matching them:
        // the two positional matrices must differ somewhere
        let l1_gap: f64 = first
            .report
            .positional_true
            .rows
            .iter()
            .zip(&first.report.positional_spoof.rows)
            .map(|(t, s)| t.iter().zip(s).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        assert!(l1_gap > 0.0, "positional matrices should not coincide");

        assert_eq!(
            first.manifest.files, second.manifest.files,
            "independent runs of the same config must hash identically"
        );
        assert_eq!(
            std::fs::read(out1.join("trajectories.jsonl")).unwrap(),
            std::fs::read(out2.join("trajectories.jsonl")).unwrap()
        );
        assert_eq!(
            std::fs::read(out1.join("manifest.json")).unwrap(),
            std::fs::read(out2.join("manifest.json")).unwrap()
        );

        // a different seed must change the campaign
        let other = reproduce(&ExperimentConfig::micro(2025), &dir.path().join("run3")).unwrap();
        assert_ne!(first.manifest.files, other.manifest.files);
    }

    #[test]
    fn single_replicate_paper_shape_gives_52_runs() {
        // paper-scale run grid at a tiny landscape: 26 uniform + 26 random
        let mut config = ExperimentConfig::paper(9);
        config.landscape = LandscapeSpec::Synthetic {
            alphabet_size: 26,
            length: 5,
            target_count: 60,
            families: 2,
            core_symbols: 3,
        };
        config.model = ModelSpec {
            embed_dim: 4,
            hidden1: 16,
            hidden2: 8,
            dropout: 0.1,
        };
        config.train = TrainSpec {
            epochs: 2,
            batch_size: 32,
            learning_rate: 2e-3,
            weight_decay: 1e-4,
        };
        config.spoof = SpoofConfig {
            query_budget: 30,
            replicates: 1,
        };
        let dir = tempfile::tempdir().unwrap();
        let outputs = reproduce(&config, dir.path()).unwrap();
        assert_eq!(outputs.trajectories.len(), 52);
        assert_eq!(outputs.report.uniform_runs, 26);
        assert_eq!(outputs.report.random_runs, 26);
    }

    #[test]
    fn file_source_round_trips_through_reproduce() {
        let dir = tempfile::tempdir().unwrap();
        // build a toy landscape file first
        let set = generate_synthetic(
            &SyntheticConfig {
                alphabet_size: 6,
                length: 7,
                target_count: 150,
                families: 3,
                core_symbols: 3,
            },
            3,
        )
        .unwrap();
        let list_path = dir.path().join("list.txt");
        set.save(&list_path).unwrap();

        let mut config = ExperimentConfig::micro(8);
        config.landscape = LandscapeSpec::File {
            path: list_path,
            alphabet_size: 6,
            length: 7,
        };
        let outputs = reproduce(&config, &dir.path().join("out")).unwrap();
        assert_eq!(outputs.set.count(), 150);
        assert!(!outputs.report.landscape.synthetic);
        assert_eq!(outputs.report.landscape.source, "file");
    }

    #[test]
    fn stage_labels_survive_failures() {
        let mut config = ExperimentConfig::micro(1);
        config.landscape = LandscapeSpec::File {
            path: PathBuf::from("/nonexistent/list.txt"),
            alphabet_size: 6,
            length: 7,
        };
        let dir = tempfile::tempdir().unwrap();
        match reproduce(&config, dir.path()) {
            Err(Error::Stage { stage, .. }) => assert_eq!(stage, "landscape"),
            other => panic!("expected stage error, got {other:?}"),
        }
    }
}
