//! Campaign aggregation: the confidence-by-query table, endpoint
//! frequencies, Hamming-distance histograms, and positional symbol
//! frequencies, plus CSV/SVG emission.
//!
//! Everything here is a pure function of trajectory logs (and the oracle
//! set), so re-running the aggregation over the same inputs reproduces every
//! output byte.

mod report;
mod svg;

pub use report::{
    analyze_campaign, curves_csv, emit_report, CampaignReport, LandscapeInfo, ReportSummary,
};
pub use svg::{grouped_bar_chart, heatmap_pair, line_chart, Series};

use crate::landscape::ReplicatorSet;
use crate::seq::{Alphabet, Sequence};
use crate::spoof::{SpoofTrajectory, StartKind};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Mean confidence of the evolving sequence at fixed query checkpoints, per
/// start kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceByQuery {
    pub checkpoints: Vec<u32>,
    pub random_mean: Vec<f64>,
    pub uniform_mean: Vec<f64>,
    pub replicate_count: u32,
}

/// Checkpoint grid 0, 25, ..., budget.
pub fn default_checkpoints(budget: u32) -> Vec<u32> {
    (0..=budget).step_by(25).collect()
}

/// Aggregate the per-trajectory step functions at `checkpoints`. Both start
/// kinds must be present; a checkpoint beyond the common query budget is an
/// error.
pub fn confidence_by_query(
    trajectories: &[SpoofTrajectory],
    checkpoints: &[u32],
) -> Result<ConfidenceByQuery> {
    if trajectories.is_empty() {
        return Err(Error::EmptyTrajectories);
    }
    if checkpoints.is_empty() {
        return Err(Error::InvalidConfig("checkpoint list is empty".into()));
    }
    for pair in checkpoints.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidConfig(format!(
                "checkpoints must be strictly increasing, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    let budget = trajectories.iter().map(|t| t.query_count()).min().unwrap();
    let last = *checkpoints.last().unwrap();
    if last > budget {
        return Err(Error::CheckpointBeyondBudget {
            checkpoint: last,
            budget,
        });
    }

    let mean_for = |kind: StartKind| -> Result<Vec<f64>> {
        let runs: Vec<&SpoofTrajectory> = trajectories
            .iter()
            .filter(|t| t.start_kind == kind)
            .collect();
        if runs.is_empty() {
            return Err(Error::EmptyTrajectories);
        }
        Ok(checkpoints
            .iter()
            .map(|&q| {
                runs.iter().map(|t| t.confidence_at(q)).sum::<f64>() / runs.len() as f64
            })
            .collect())
    };

    let replicate_count = {
        let mut reps: Vec<u32> = trajectories.iter().map(|t| t.replicate).collect();
        reps.sort_unstable();
        reps.dedup();
        reps.len() as u32
    };

    Ok(ConfidenceByQuery {
        checkpoints: checkpoints.to_vec(),
        random_mean: mean_for(StartKind::Random)?,
        uniform_mean: mean_for(StartKind::Uniform)?,
        replicate_count,
    })
}

/// Final-sequence counts per start kind, descending by count with
/// lexicographic tie-breaks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointStats {
    pub uniform: Vec<(String, u32)>,
    pub random: Vec<(String, u32)>,
}

pub fn endpoint_frequency(
    trajectories: &[SpoofTrajectory],
    alphabet: &Alphabet,
) -> EndpointStats {
    let count_for = |kind: StartKind| -> Vec<(String, u32)> {
        let mut counts: std::collections::BTreeMap<String, u32> = std::collections::BTreeMap::new();
        for t in trajectories.iter().filter(|t| t.start_kind == kind) {
            *counts.entry(t.final_sequence.render(alphabet)).or_insert(0) += 1;
        }
        let mut entries: Vec<(String, u32)> = counts.into_iter().collect();
        // BTreeMap iteration is already lexicographic, so a stable sort by
        // descending count preserves the tie order
        entries.sort_by_key(|&(_, count)| std::cmp::Reverse(count));
        entries
    };
    EndpointStats {
        uniform: count_for(StartKind::Uniform),
        random: count_for(StartKind::Random),
    }
}

/// Runs bucketed by the Hamming distance of their endpoint to the nearest
/// true replicator; index = distance, 0..=L.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingHistogram {
    pub uniform: Vec<u32>,
    pub random: Vec<u32>,
}

impl HammingHistogram {
    /// Smallest distance with the highest count, per start kind.
    pub fn mode(&self, kind: StartKind) -> usize {
        let buckets = match kind {
            StartKind::Uniform => &self.uniform,
            StartKind::Random => &self.random,
        };
        buckets
            .iter()
            .enumerate()
            .max_by_key(|&(i, &c)| (c, std::cmp::Reverse(i)))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

pub fn hamming_histogram(
    trajectories: &[SpoofTrajectory],
    set: &ReplicatorSet,
) -> Result<HammingHistogram> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let len = set.sequence_len();
    let mut uniform = vec![0u32; len + 1];
    let mut random = vec![0u32; len + 1];
    for t in trajectories {
        let d = set.nearest_hamming_distance(&t.final_sequence)?;
        match t.start_kind {
            StartKind::Uniform => uniform[d] += 1,
            StartKind::Random => random[d] += 1,
        }
    }
    Ok(HammingHistogram { uniform, random })
}

/// L x K matrix of symbol frequencies; each row sums to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionalFrequency {
    /// What the frequencies describe, e.g. "true-replicators" or
    /// "spoof-endpoints".
    pub source: String,
    pub rows: Vec<Vec<f64>>,
}

pub fn positional_frequency(
    sequences: &[&Sequence],
    alphabet: &Alphabet,
    source: &str,
) -> Result<PositionalFrequency> {
    let first = sequences.first().ok_or(Error::EmptySequences)?;
    let len = first.len();
    let k = alphabet.size();
    let mut counts = vec![vec![0u64; k]; len];
    for s in sequences {
        if s.len() != len {
            return Err(Error::LengthMismatch {
                left: s.len(),
                right: len,
            });
        }
        for (pos, &sym) in s.indices().iter().enumerate() {
            counts[pos][sym as usize] += 1;
        }
    }
    let total = sequences.len() as f64;
    Ok(PositionalFrequency {
        source: source.to_string(),
        rows: counts
            .into_iter()
            .map(|row| row.into_iter().map(|c| c as f64 / total).collect())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spoof::QueryRecord;

    fn alphabet2() -> Alphabet {
        Alphabet::lowercase_prefix(2).unwrap()
    }

    fn seq(text: &str, alphabet: &Alphabet) -> Sequence {
        Sequence::parse(text, alphabet).unwrap()
    }

    fn fake_trajectory(
        run_id: &str,
        replicate: u32,
        kind: StartKind,
        confidences: &[(f64, bool)],
        alphabet: &Alphabet,
        final_text: &str,
    ) -> SpoofTrajectory {
        let steps: Vec<QueryRecord> = confidences
            .iter()
            .enumerate()
            .map(|(i, &(confidence, accepted))| QueryRecord {
                query: i as u32,
                sequence: seq(final_text, alphabet),
                confidence,
                accepted,
            })
            .collect();
        let last_accepted = steps
            .iter()
            .rev()
            .find(|s| s.accepted)
            .expect("at least the start is accepted");
        SpoofTrajectory {
            run_id: run_id.into(),
            replicate,
            start_kind: kind,
            final_confidence: last_accepted.confidence,
            final_sequence: last_accepted.sequence.clone(),
            steps,
        }
    }

    #[test]
    fn confidence_table_is_a_per_kind_step_mean() {
        let ab = alphabet2();
        let trajectories = vec![
            fake_trajectory(
                "u0",
                0,
                StartKind::Uniform,
                &[(0.1, true), (0.3, true), (0.2, false), (0.8, true)],
                &ab,
                "aa",
            ),
            fake_trajectory(
                "u1",
                0,
                StartKind::Uniform,
                &[(0.5, true), (0.4, false), (0.4, false), (0.4, false)],
                &ab,
                "ab",
            ),
            fake_trajectory(
                "r0",
                0,
                StartKind::Random,
                &[(0.0, true), (0.6, true), (0.9, true), (0.95, true)],
                &ab,
                "bb",
            ),
        ];
        let table = confidence_by_query(&trajectories, &[0, 2, 3]).unwrap();
        // uniform at q=0: (0.1+0.5)/2, q=2: (0.3+0.5)/2, q=3: (0.8+0.5)/2
        assert_eq!(table.uniform_mean, vec![0.3, 0.4, 0.65]);
        assert_eq!(table.random_mean, vec![0.0, 0.9, 0.95]);
        assert_eq!(table.replicate_count, 1);

        // single no-accept trajectory: constant row
        let flat = vec![
            fake_trajectory("u", 0, StartKind::Uniform, &[(0.25, true), (0.1, false)], &ab, "aa"),
            fake_trajectory("r", 0, StartKind::Random, &[(0.5, true), (0.2, false)], &ab, "ab"),
        ];
        let table = confidence_by_query(&flat, &[0, 1]).unwrap();
        assert_eq!(table.uniform_mean, vec![0.25, 0.25]);
        assert_eq!(table.random_mean, vec![0.5, 0.5]);
    }

    #[test]
    fn confidence_table_rejects_bad_checkpoints() {
        let ab = alphabet2();
        let trajectories = vec![
            fake_trajectory("u", 0, StartKind::Uniform, &[(0.2, true), (0.3, true)], &ab, "aa"),
            fake_trajectory("r", 0, StartKind::Random, &[(0.2, true), (0.3, true)], &ab, "ab"),
        ];
        assert!(matches!(
            confidence_by_query(&trajectories, &[0, 5]),
            Err(Error::CheckpointBeyondBudget { checkpoint: 5, budget: 2 })
        ));
        assert!(confidence_by_query(&trajectories, &[1, 1]).is_err());
        assert!(matches!(
            confidence_by_query(&[], &[0]),
            Err(Error::EmptyTrajectories)
        ));
    }

    #[test]
    fn confidence_means_are_non_decreasing_on_monotone_runs() {
        let ab = alphabet2();
        let trajectories = vec![
            fake_trajectory(
                "u",
                0,
                StartKind::Uniform,
                &[(0.1, true), (0.2, true), (0.15, false), (0.7, true)],
                &ab,
                "aa",
            ),
            fake_trajectory(
                "r",
                0,
                StartKind::Random,
                &[(0.3, true), (0.1, false), (0.5, true), (0.2, false)],
                &ab,
                "bb",
            ),
        ];
        let table = confidence_by_query(&trajectories, &[0, 1, 2, 3]).unwrap();
        for means in [&table.uniform_mean, &table.random_mean] {
            for pair in means.windows(2) {
                assert!(pair[1] >= pair[0]);
            }
        }
    }

    #[test]
    fn endpoint_counts_sort_desc_with_lexicographic_ties() {
        let ab = alphabet2();
        let mk = |id: &str, text: &str| {
            fake_trajectory(id, 0, StartKind::Uniform, &[(0.5, true)], &ab, text)
        };
        let trajectories = vec![mk("a", "ba"), mk("b", "ab"), mk("c", "ba"), mk("d", "aa")];
        let stats = endpoint_frequency(&trajectories, &ab);
        assert_eq!(
            stats.uniform,
            vec![("ba".into(), 2), ("aa".into(), 1), ("ab".into(), 1)]
        );
        assert!(stats.random.is_empty());
        let total: u32 = stats.uniform.iter().map(|(_, c)| c).sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn endpoint_frequency_of_empty_input_is_empty() {
        let stats = endpoint_frequency(&[], &alphabet2());
        assert!(stats.uniform.is_empty() && stats.random.is_empty());
    }

    #[test]
    fn histogram_buckets_sum_to_run_counts() {
        let ab = alphabet2();
        let members = vec![seq("aa", &ab)];
        let set = ReplicatorSet::from_members(ab.clone(), 2, members).unwrap();
        let trajectories = vec![
            fake_trajectory("u0", 0, StartKind::Uniform, &[(0.5, true)], &ab, "aa"),
            fake_trajectory("u1", 0, StartKind::Uniform, &[(0.5, true)], &ab, "ab"),
            fake_trajectory("r0", 0, StartKind::Random, &[(0.5, true)], &ab, "bb"),
        ];
        let histogram = hamming_histogram(&trajectories, &set).unwrap();
        assert_eq!(histogram.uniform, vec![1, 1, 0]); // member, distance 1
        assert_eq!(histogram.random, vec![0, 0, 1]); // distance 2
        assert_eq!(histogram.uniform.iter().sum::<u32>(), 2);
        assert_eq!(histogram.random.iter().sum::<u32>(), 1);
        assert_eq!(histogram.mode(StartKind::Random), 2);
    }

    #[test]
    fn positional_rows_are_distributions() {
        let ab = alphabet2();
        let seqs = [seq("aaa", &ab), seq("aab", &ab)];
        let refs: Vec<&Sequence> = seqs.iter().collect();
        let freq = positional_frequency(&refs, &ab, "true-replicators").unwrap();
        assert_eq!(freq.rows, vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.5]]);
        for row in &freq.rows {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn positional_frequency_rejects_mismatched_lengths_and_empty() {
        let ab = alphabet2();
        let a = seq("aaa", &ab);
        let b = seq("aaaa", &ab);
        assert!(matches!(
            positional_frequency(&[&a, &b], &ab, "x"),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            positional_frequency(&[], &ab, "x"),
            Err(Error::EmptySequences)
        ));
    }
}
