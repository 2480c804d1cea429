//! Ground-truth replicator oracle.
//!
//! A [`ReplicatorSet`] answers two questions for the rest of the pipeline:
//! exact membership ("is this sequence a replicator?") and nearest-member
//! Hamming distance. Sets come from three sources: a plain-text list file
//! (one lowercase sequence per line), exhaustive enumeration of the
//! [`minirep`] virtual machine, or the seeded [`synthetic`] motif sampler
//! used for 26^9-scale experiments.

mod minirep;
mod synthetic;

pub use minirep::{
    enumerate_landscape, program_space_size, vm_check_viability, EnumerationMeta, MiniRepConfig,
    VerdictReason, ViabilityVerdict, ENUMERATION_GUARD,
};
pub use synthetic::{generate_synthetic, SyntheticConfig};

use crate::seq::{hamming, Alphabet, Sequence};
use crate::{Error, Result};
use std::collections::HashSet;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

/// Sorted, deduplicated set of replicator sequences with an exact hash index.
/// Sorted order gives deterministic serialization; the hash index keeps
/// membership O(1) expected during millions of spoof queries.
#[derive(Debug, Clone)]
pub struct ReplicatorSet {
    alphabet: Alphabet,
    len: usize,
    members: Vec<Sequence>,
    index: HashSet<Sequence>,
}

impl ReplicatorSet {
    pub fn from_members(
        alphabet: Alphabet,
        len: usize,
        mut members: Vec<Sequence>,
    ) -> Result<Self> {
        for m in &members {
            if m.len() != len {
                return Err(Error::LengthMismatch {
                    left: m.len(),
                    right: len,
                });
            }
            if let Some(&i) = m.indices().iter().find(|&&i| i as usize >= alphabet.size()) {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    alphabet_size: alphabet.size(),
                });
            }
        }
        members.sort();
        members.dedup();
        let index = members.iter().cloned().collect();
        Ok(ReplicatorSet {
            alphabet,
            len,
            members,
            index,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Sequence length shared by every member.
    pub fn sequence_len(&self) -> usize {
        self.len
    }

    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members in sorted order.
    pub fn members(&self) -> &[Sequence] {
        &self.members
    }

    /// Fraction of the full K^L space that is viable.
    pub fn fraction(&self) -> f64 {
        let space = (self.alphabet.size() as f64).powi(self.len as i32);
        self.members.len() as f64 / space
    }

    /// Exact membership. Errors if `s` does not match the set's length or
    /// alphabet.
    pub fn is_replicator(&self, s: &Sequence) -> Result<bool> {
        self.check_compatible(s)?;
        Ok(self.index.contains(s))
    }

    /// Minimum Hamming distance from `s` to any member; 0 iff `s` is a
    /// member.
    pub fn nearest_hamming_distance(&self, s: &Sequence) -> Result<usize> {
        if self.members.is_empty() {
            return Err(Error::EmptySet);
        }
        self.check_compatible(s)?;
        if self.index.contains(s) {
            return Ok(0);
        }
        let mut best = self.len;
        for m in &self.members {
            let d = hamming(m, s)?;
            if d < best {
                best = d;
                if best == 1 {
                    break; // cannot do better for a non-member
                }
            }
        }
        Ok(best)
    }

    fn check_compatible(&self, s: &Sequence) -> Result<()> {
        if s.len() != self.len {
            return Err(Error::LengthMismatch {
                left: s.len(),
                right: self.len,
            });
        }
        if let Some(&i) = s.indices().iter().find(|&&i| i as usize >= self.alphabet.size()) {
            return Err(Error::IndexOutOfRange {
                index: i,
                alphabet_size: self.alphabet.size(),
            });
        }
        Ok(())
    }

    /// SHA-256 over the serialized list format; identifies a landscape in
    /// split manifests and pipeline provenance records.
    pub fn identity_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for m in &self.members {
            hasher.update(m.render(&self.alphabet).as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Write the list format: one lowercase sequence per line, LF newlines,
    /// no header, sorted.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut out = BufWriter::new(file);
        for m in &self.members {
            writeln!(out, "{}", m.render(&self.alphabet))
                .map_err(|e| Error::io(path.display().to_string(), e))?;
        }
        out.flush().map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(())
    }
}

/// Load a replicator list file: one sequence per line. Lines of the wrong
/// length or with symbols outside the alphabet are rejected with their line
/// number; duplicates collapse; an empty file is an error.
pub fn load_replicators(path: &Path, alphabet: &Alphabet, len: usize) -> Result<ReplicatorSet> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(display.clone(), e))?;
    let reader = std::io::BufReader::new(file);
    let mut members = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(display.clone(), e))?;
        let text = line.trim_end_matches('\r');
        if text.is_empty() {
            continue;
        }
        if text.chars().count() != len {
            return Err(Error::MalformedLine {
                path: display,
                line: lineno + 1,
                reason: format!("expected {len} symbols, got {}", text.chars().count()),
            });
        }
        let seq = Sequence::parse(text, alphabet).map_err(|e| Error::MalformedLine {
            path: display.clone(),
            line: lineno + 1,
            reason: e.to_string(),
        })?;
        members.push(seq);
    }
    if members.is_empty() {
        return Err(Error::EmptyLandscape { path: display });
    }
    ReplicatorSet::from_members(alphabet.clone(), len, members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::{random_sequence, RngState};

    fn write_file(dir: &tempfile::TempDir, name: &str, contents: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn load_deduplicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "reps.txt", "aaaaaaaab\naaaaaaaab\n");
        let set = load_replicators(&path, &Alphabet::lowercase(), 9).unwrap();
        assert_eq!(set.count(), 1);
    }

    #[test]
    fn load_rejects_wrong_length_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "reps.txt", "aaaaaaaaa\nbbbbbbbbbb\n");
        let err = load_replicators(&path, &Alphabet::lowercase(), 9).unwrap_err();
        match err {
            Error::MalformedLine { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_rejects_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "reps.txt", "");
        assert!(matches!(
            load_replicators(&path, &Alphabet::lowercase(), 9),
            Err(Error::EmptyLandscape { .. })
        ));
    }

    #[test]
    fn membership_is_exact() {
        let ab = Alphabet::lowercase();
        let member = Sequence::parse("abcabcabc", &ab).unwrap();
        let set = ReplicatorSet::from_members(ab.clone(), 9, vec![member.clone()]).unwrap();
        assert!(set.is_replicator(&member).unwrap());
        let non = Sequence::parse("abcabcabd", &ab).unwrap();
        assert!(!set.is_replicator(&non).unwrap());
    }

    #[test]
    fn membership_rejects_wrong_length() {
        let ab = Alphabet::lowercase();
        let member = Sequence::parse("abc", &ab).unwrap();
        let set = ReplicatorSet::from_members(ab.clone(), 3, vec![member]).unwrap();
        let wrong = Sequence::parse("abcd", &ab).unwrap();
        assert!(set.is_replicator(&wrong).is_err());
    }

    #[test]
    fn membership_matches_linear_scan_on_random_draws() {
        let ab = Alphabet::lowercase();
        let mut rng = RngState::new(404);
        let members: Vec<Sequence> = (0..500).map(|_| random_sequence(&ab, 9, &mut rng)).collect();
        let set = ReplicatorSet::from_members(ab.clone(), 9, members.clone()).unwrap();
        for _ in 0..200 {
            let probe = random_sequence(&ab, 9, &mut rng);
            let by_scan = members.iter().any(|m| *m == probe);
            assert_eq!(set.is_replicator(&probe).unwrap(), by_scan);
        }
    }

    #[test]
    fn nearest_distance_trivial_cases() {
        let ab = Alphabet::lowercase();
        let member = Sequence::parse("aaaaaaaaa", &ab).unwrap();
        let set = ReplicatorSet::from_members(ab.clone(), 9, vec![member.clone()]).unwrap();
        assert_eq!(set.nearest_hamming_distance(&member).unwrap(), 0);
        let two_off = Sequence::parse("aaaaaaabb", &ab).unwrap();
        assert_eq!(set.nearest_hamming_distance(&two_off).unwrap(), 2);
    }

    #[test]
    fn nearest_distance_matches_linear_scan_oracle() {
        let ab = Alphabet::lowercase();
        let mut rng = RngState::new(2024);
        let members: Vec<Sequence> =
            (0..1000).map(|_| random_sequence(&ab, 9, &mut rng)).collect();
        let set = ReplicatorSet::from_members(ab.clone(), 9, members.clone()).unwrap();
        for _ in 0..50 {
            let probe = random_sequence(&ab, 9, &mut rng);
            let oracle = members
                .iter()
                .map(|m| hamming(m, &probe).unwrap())
                .min()
                .unwrap();
            assert_eq!(set.nearest_hamming_distance(&probe).unwrap(), oracle);
        }
    }

    #[test]
    fn nearest_distance_errors_on_empty_set() {
        let ab = Alphabet::lowercase();
        let set = ReplicatorSet::from_members(ab.clone(), 9, vec![]).unwrap();
        let probe = Sequence::parse("aaaaaaaaa", &ab).unwrap();
        assert!(matches!(
            set.nearest_hamming_distance(&probe),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn save_load_round_trips() {
        let ab = Alphabet::lowercase();
        let mut rng = RngState::new(31);
        let members: Vec<Sequence> = (0..200).map(|_| random_sequence(&ab, 9, &mut rng)).collect();
        let set = ReplicatorSet::from_members(ab.clone(), 9, members).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        set.save(&path).unwrap();
        let reloaded = load_replicators(&path, &ab, 9).unwrap();
        assert_eq!(reloaded.members(), set.members());
    }

    #[test]
    fn nearest_distance_bounded_by_any_member_distance() {
        let ab = Alphabet::lowercase();
        let mut rng = RngState::new(77);
        let members: Vec<Sequence> = (0..300).map(|_| random_sequence(&ab, 9, &mut rng)).collect();
        let set = ReplicatorSet::from_members(ab.clone(), 9, members.clone()).unwrap();
        for _ in 0..30 {
            let probe = random_sequence(&ab, 9, &mut rng);
            let nearest = set.nearest_hamming_distance(&probe).unwrap();
            for m in &members {
                assert!(nearest <= hamming(m, &probe).unwrap());
            }
        }
    }
}
