//! Report emission: CSV tables, a campaign summary JSON, and static SVG
//! charts, all byte-deterministic functions of the campaign data.
//!
//! Files written by [`emit_report`]:
//!
//! | file                  | contents                                            |
//! |-----------------------|-----------------------------------------------------|
//! | `table2.csv`          | `query,random_start_mean,uniform_start_mean`        |
//! | `endpoints.csv`       | `start_kind,rank,sequence,count` (descending count) |
//! | `hamming.csv`         | `start_kind,distance,count`                         |
//! | `positional_true.csv` | `position,<symbol...>` frequency rows (replicators) |
//! | `positional_spoof.csv`| same, for spoof endpoints                           |
//! | `curves.csv`          | per-epoch train/validation loss and accuracy        |
//! | `summary.json`        | [`ReportSummary`]                                   |
//! | `confidence.svg`      | mean confidence vs query count, one line per start kind |
//! | `hamming.svg`         | endpoint nearest-replicator distance histogram      |
//! | `positional.svg`      | positional frequency heatmaps, true over spoofed    |

use super::svg;
use super::{
    confidence_by_query, default_checkpoints, endpoint_frequency, hamming_histogram,
    positional_frequency, ConfidenceByQuery, EndpointStats, HammingHistogram, PositionalFrequency,
};
use crate::landscape::ReplicatorSet;
use crate::seq::{Alphabet, Sequence};
use crate::spoof::{verify_endpoints, EndpointVerification, SpoofTrajectory, StartKind};
use crate::training::{EpochStats, EvalMetrics};
use crate::{Error, Result, LOG_FORMAT_VERSION, VM_SEMANTICS_VERSION};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Where the ground truth came from; every report carries this so synthetic
/// landscapes are never mistaken for the real thing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeInfo {
    /// "file", "minirep", or "synthetic".
    pub source: String,
    pub synthetic: bool,
    pub alphabet_size: usize,
    pub sequence_len: usize,
    pub count: usize,
    pub fraction: f64,
    pub identity_hash: String,
}

impl LandscapeInfo {
    pub fn new(source: &str, synthetic: bool, set: &ReplicatorSet) -> Self {
        LandscapeInfo {
            source: source.to_string(),
            synthetic,
            alphabet_size: set.alphabet().size(),
            sequence_len: set.sequence_len(),
            count: set.count(),
            fraction: set.fraction(),
            identity_hash: set.identity_hash(),
        }
    }
}

/// Everything the report files are rendered from.
#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub alphabet: Alphabet,
    pub confidence: ConfidenceByQuery,
    pub endpoints: EndpointStats,
    pub hamming: HammingHistogram,
    pub positional_true: PositionalFrequency,
    pub positional_spoof: PositionalFrequency,
    pub verification: EndpointVerification,
    pub landscape: LandscapeInfo,
    pub query_budget: u32,
    pub replicates: u32,
    pub uniform_runs: usize,
    pub random_runs: usize,
    pub curves: Option<Vec<EpochStats>>,
    pub test_metrics: Option<EvalMetrics>,
}

/// Aggregate a campaign into a [`CampaignReport`].
pub fn analyze_campaign(
    trajectories: &[SpoofTrajectory],
    set: &ReplicatorSet,
    landscape: LandscapeInfo,
    curves: Option<Vec<EpochStats>>,
    test_metrics: Option<EvalMetrics>,
) -> Result<CampaignReport> {
    if trajectories.is_empty() {
        return Err(Error::EmptyTrajectories);
    }
    let budget = trajectories.iter().map(|t| t.query_count()).min().unwrap();
    let checkpoints = default_checkpoints(budget);
    let alphabet = set.alphabet().clone();
    let endpoints: Vec<&Sequence> = trajectories.iter().map(|t| &t.final_sequence).collect();
    let members: Vec<&Sequence> = set.members().iter().collect();
    let replicates = trajectories.iter().map(|t| t.replicate).max().unwrap() + 1;
    Ok(CampaignReport {
        confidence: confidence_by_query(trajectories, &checkpoints)?,
        endpoints: endpoint_frequency(trajectories, &alphabet),
        hamming: hamming_histogram(trajectories, set)?,
        positional_true: positional_frequency(&members, &alphabet, "true-replicators")?,
        positional_spoof: positional_frequency(&endpoints, &alphabet, "spoof-endpoints")?,
        verification: verify_endpoints(set, trajectories)?,
        landscape,
        query_budget: budget,
        replicates,
        uniform_runs: trajectories
            .iter()
            .filter(|t| t.start_kind == StartKind::Uniform)
            .count(),
        random_runs: trajectories
            .iter()
            .filter(|t| t.start_kind == StartKind::Random)
            .count(),
        alphabet,
        curves,
        test_metrics,
    })
}

/// Machine-readable campaign summary (schema of `summary.json`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportSummary {
    pub log_format_version: String,
    pub vm_semantics_version: String,
    pub landscape: LandscapeInfo,
    pub campaign: CampaignCounts,
    pub confidence_table: Vec<ConfidenceRow>,
    pub verification: VerificationSummary,
    pub hamming_mode: HammingModes,
    pub top_endpoints: TopEndpoints,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_metrics: Option<EvalMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_epoch: Option<EpochStats>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignCounts {
    pub total_runs: usize,
    pub uniform_runs: usize,
    pub random_runs: usize,
    pub query_budget: u32,
    pub replicates: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfidenceRow {
    pub query: u32,
    pub random_mean: f64,
    pub uniform_mean: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub total: usize,
    pub replicator_endpoints: usize,
    pub false_attractor_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HammingModes {
    pub uniform: usize,
    pub random: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopEndpoints {
    pub uniform: Vec<EndpointCount>,
    pub random: Vec<EndpointCount>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndpointCount {
    pub sequence: String,
    pub count: u32,
}

fn summary_of(report: &CampaignReport) -> ReportSummary {
    let top = |entries: &[(String, u32)]| -> Vec<EndpointCount> {
        entries
            .iter()
            .take(10)
            .map(|(sequence, count)| EndpointCount {
                sequence: sequence.clone(),
                count: *count,
            })
            .collect()
    };
    ReportSummary {
        log_format_version: LOG_FORMAT_VERSION.to_string(),
        vm_semantics_version: VM_SEMANTICS_VERSION.to_string(),
        landscape: report.landscape.clone(),
        campaign: CampaignCounts {
            total_runs: report.uniform_runs + report.random_runs,
            uniform_runs: report.uniform_runs,
            random_runs: report.random_runs,
            query_budget: report.query_budget,
            replicates: report.replicates,
        },
        confidence_table: report
            .confidence
            .checkpoints
            .iter()
            .enumerate()
            .map(|(i, &query)| ConfidenceRow {
                query,
                random_mean: report.confidence.random_mean[i],
                uniform_mean: report.confidence.uniform_mean[i],
            })
            .collect(),
        verification: VerificationSummary {
            total: report.verification.total,
            replicator_endpoints: report.verification.replicator_endpoints,
            false_attractor_rate: report.verification.false_attractor_rate,
        },
        hamming_mode: HammingModes {
            uniform: report.hamming.mode(StartKind::Uniform),
            random: report.hamming.mode(StartKind::Random),
        },
        top_endpoints: TopEndpoints {
            uniform: top(&report.endpoints.uniform),
            random: top(&report.endpoints.random),
        },
        test_metrics: report.test_metrics.clone(),
        final_epoch: report.curves.as_ref().and_then(|c| c.last().cloned()),
    }
}

/// Per-epoch curves in the `curves.csv` layout.
pub fn curves_csv(curves: &[EpochStats]) -> String {
    let mut out =
        String::from("epoch,train_loss,train_accuracy,validation_loss,validation_accuracy\n");
    for e in curves {
        writeln!(
            out,
            "{},{},{},{},{}",
            e.epoch, e.train_loss, e.train_accuracy, e.validation_loss, e.validation_accuracy
        )
        .unwrap();
    }
    out
}

fn write_file(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(path.display().to_string(), e))?;
    written.push(path);
    Ok(())
}

/// Render and write every report file; returns the paths written (used by
/// the pipeline manifest). Re-running over identical inputs reproduces every
/// file byte for byte.
pub fn emit_report(report: &CampaignReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let mut written = Vec::new();

    // table2.csv
    let mut table2 = String::from("query,random_start_mean,uniform_start_mean\n");
    for (i, &query) in report.confidence.checkpoints.iter().enumerate() {
        writeln!(
            table2,
            "{query},{},{}",
            report.confidence.random_mean[i], report.confidence.uniform_mean[i]
        )
        .unwrap();
    }
    write_file(out_dir, "table2.csv", &table2, &mut written)?;

    // endpoints.csv
    let mut endpoints = String::from("start_kind,rank,sequence,count\n");
    for (kind, entries) in [
        ("uniform", &report.endpoints.uniform),
        ("random", &report.endpoints.random),
    ] {
        for (rank, (sequence, count)) in entries.iter().enumerate() {
            writeln!(endpoints, "{kind},{},{sequence},{count}", rank + 1).unwrap();
        }
    }
    write_file(out_dir, "endpoints.csv", &endpoints, &mut written)?;

    // hamming.csv
    let mut hamming = String::from("start_kind,distance,count\n");
    for (kind, buckets) in [
        ("uniform", &report.hamming.uniform),
        ("random", &report.hamming.random),
    ] {
        for (distance, count) in buckets.iter().enumerate() {
            writeln!(hamming, "{kind},{distance},{count}").unwrap();
        }
    }
    write_file(out_dir, "hamming.csv", &hamming, &mut written)?;

    // positional_{true,spoof}.csv
    let symbols = report.alphabet.symbols();
    let positional_csv = |freq: &PositionalFrequency| -> String {
        let mut out = String::from("position");
        for &s in symbols {
            write!(out, ",{s}").unwrap();
        }
        out.push('\n');
        for (position, row) in freq.rows.iter().enumerate() {
            write!(out, "{position}").unwrap();
            for value in row {
                write!(out, ",{value}").unwrap();
            }
            out.push('\n');
        }
        out
    };
    write_file(
        out_dir,
        "positional_true.csv",
        &positional_csv(&report.positional_true),
        &mut written,
    )?;
    write_file(
        out_dir,
        "positional_spoof.csv",
        &positional_csv(&report.positional_spoof),
        &mut written,
    )?;

    // curves.csv
    if let Some(curves) = &report.curves {
        write_file(out_dir, "curves.csv", &curves_csv(curves), &mut written)?;
    }

    // summary.json
    let summary = summary_of(report);
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    write_file(out_dir, "summary.json", &(json + "\n"), &mut written)?;

    // confidence.svg
    let to_points = |means: &[f64]| -> Vec<(f64, f64)> {
        report
            .confidence
            .checkpoints
            .iter()
            .zip(means)
            .map(|(&q, &m)| (q as f64, m))
            .collect()
    };
    let confidence_svg = svg::line_chart(
        &format!(
            "Mean spoofing confidence over {} replicates",
            report.confidence.replicate_count
        ),
        "model queries",
        "mean confidence",
        &[
            svg::Series {
                name: "uniform starts",
                points: to_points(&report.confidence.uniform_mean),
            },
            svg::Series {
                name: "random starts",
                points: to_points(&report.confidence.random_mean),
            },
        ],
    );
    write_file(out_dir, "confidence.svg", &confidence_svg, &mut written)?;

    // hamming.svg
    let buckets: Vec<u32> = (0..report.hamming.uniform.len() as u32).collect();
    let hamming_svg = svg::grouped_bar_chart(
        "Hamming distance of final sequences to nearest true replicator",
        "Hamming distance",
        "runs",
        &buckets,
        &[
            ("uniform starts", report.hamming.uniform.as_slice()),
            ("random starts", report.hamming.random.as_slice()),
        ],
    );
    write_file(out_dir, "hamming.svg", &hamming_svg, &mut written)?;

    // positional.svg
    let positional_svg = svg::heatmap_pair(
        "Symbol frequency by position",
        symbols,
        "true replicators",
        &report.positional_true.rows,
        "spoof endpoints",
        &report.positional_spoof.rows,
    );
    write_file(out_dir, "positional.svg", &positional_svg, &mut written)?;

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{generate_synthetic, SyntheticConfig};
    use crate::neural::{MlpConfig, MlpModel};
    use crate::spoof::{run_campaign, SpoofConfig};

    fn tiny_campaign() -> (ReplicatorSet, Vec<SpoofTrajectory>) {
        let set = generate_synthetic(
            &SyntheticConfig {
                alphabet_size: 6,
                length: 5,
                target_count: 30,
                families: 2,
                core_symbols: 2,
            },
            21,
        )
        .unwrap();
        let model = MlpModel::init(
            MlpConfig {
                alphabet_size: 6,
                seq_len: 5,
                embed_dim: 4,
                hidden1: 8,
                hidden2: 4,
                dropout: 0.1,
            },
            3,
        )
        .unwrap();
        let trajectories = run_campaign(
            &model,
            &set,
            &SpoofConfig {
                query_budget: 50,
                replicates: 2,
            },
            5,
        )
        .unwrap();
        (set, trajectories)
    }

    /// Minimal well-formedness check: every open tag closes in order.
    fn assert_well_formed_xml(text: &str) {
        let mut stack: Vec<String> = Vec::new();
        let mut rest = text;
        while let Some(open) = rest.find('<') {
            let close = rest[open..].find('>').expect("unclosed angle bracket") + open;
            let tag = &rest[open + 1..close];
            rest = &rest[close + 1..];
            if tag.starts_with('?') || tag.starts_with('!') || tag.ends_with('/') {
                continue;
            }
            if let Some(name) = tag.strip_prefix('/') {
                let expected = stack.pop().unwrap_or_else(|| panic!("unmatched </{name}>"));
                assert_eq!(expected, name, "mismatched closing tag");
            } else {
                let name = tag.split_whitespace().next().unwrap().to_string();
                stack.push(name);
            }
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
        assert!(!text.contains("NaN"), "NaN leaked into SVG output");
    }

    #[test]
    fn emit_writes_all_files_deterministically() {
        let (set, trajectories) = tiny_campaign();
        let landscape = LandscapeInfo::new("synthetic", true, &set);
        let curves = vec![
            EpochStats {
                epoch: 1,
                train_loss: 0.6,
                train_accuracy: 0.7,
                validation_loss: 0.65,
                validation_accuracy: 0.68,
            },
            EpochStats {
                epoch: 2,
                train_loss: 0.4,
                train_accuracy: 0.9,
                validation_loss: 0.5,
                validation_accuracy: 0.85,
            },
        ];
        let report =
            analyze_campaign(&trajectories, &set, landscape, Some(curves), None).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let out1 = dir.path().join("a");
        let out2 = dir.path().join("b");
        let files1 = emit_report(&report, &out1).unwrap();
        let files2 = emit_report(&report, &out2).unwrap();
        assert_eq!(files1.len(), 10);
        for (f1, f2) in files1.iter().zip(&files2) {
            assert_eq!(
                std::fs::read(f1).unwrap(),
                std::fs::read(f2).unwrap(),
                "re-emission of {} must be byte-identical",
                f1.display()
            );
        }

        let table2 = std::fs::read_to_string(out1.join("table2.csv")).unwrap();
        assert!(table2.starts_with("query,random_start_mean,uniform_start_mean\n"));
        let row_count = table2.lines().count() - 1;
        assert_eq!(row_count, report.confidence.checkpoints.len());

        let endpoints = std::fs::read_to_string(out1.join("endpoints.csv")).unwrap();
        assert!(endpoints.starts_with("start_kind,rank,sequence,count\n"));
        let sum: u32 = endpoints
            .lines()
            .skip(1)
            .filter(|l| l.starts_with("uniform,"))
            .map(|l| l.rsplit(',').next().unwrap().parse::<u32>().unwrap())
            .sum();
        assert_eq!(sum as usize, report.uniform_runs);

        for name in ["confidence.svg", "hamming.svg", "positional.svg"] {
            let svg_text = std::fs::read_to_string(out1.join(name)).unwrap();
            assert_well_formed_xml(&svg_text);
        }

        let summary: ReportSummary =
            serde_json::from_str(&std::fs::read_to_string(out1.join("summary.json")).unwrap())
                .unwrap();
        assert_eq!(summary.campaign.total_runs, trajectories.len());
        assert!(summary.landscape.synthetic);
        assert_eq!(summary.final_epoch.as_ref().unwrap().epoch, 2);

        let curves_csv = std::fs::read_to_string(out1.join("curves.csv")).unwrap();
        assert!(curves_csv
            .starts_with("epoch,train_loss,train_accuracy,validation_loss,validation_accuracy\n"));
    }

    #[test]
    fn analyze_rejects_empty_campaigns() {
        let (set, _) = tiny_campaign();
        let landscape = LandscapeInfo::new("synthetic", true, &set);
        assert!(matches!(
            analyze_campaign(&[], &set, landscape, None, None),
            Err(Error::EmptyTrajectories)
        ));
    }
}
