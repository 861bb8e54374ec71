//! Content-addressed on-disk cache of scorer outputs.
//!
//! Entries live at `<dir>/<sha256(scorer_id ‖ 0x00 ‖ sequence)>.tsv` in the
//! response format and are written through a temporary file and a rename,
//! so readers never observe a partial entry.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::model::SequenceRecord;

use super::logits::{parse_response, write_response, LogitsMatrix};
use super::Scorer;

/// Environment variable overriding the default cache directory.
pub const CACHE_ENV: &str = "RESCUESCAN_CACHE";

pub fn cache_key(scorer_id: &str, sequence: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(scorer_id.as_bytes());
    hasher.update([0u8]);
    hasher.update(sequence.as_bytes());
    hex::encode(hasher.finalize())
}

/// `$RESCUESCAN_CACHE`, else `$XDG_CACHE_HOME/rescuescan`, else
/// `$HOME/.cache/rescuescan`, else a directory under the system temp dir.
pub fn default_cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(dir);
    }
    if let Some(dir) = std::env::var_os("XDG_CACHE_HOME").filter(|v| !v.is_empty()) {
        return PathBuf::from(dir).join("rescuescan");
    }
    if let Some(home) = std::env::var_os("HOME").filter(|v| !v.is_empty()) {
        return PathBuf::from(home).join(".cache").join("rescuescan");
    }
    std::env::temp_dir().join("rescuescan-cache")
}

fn entry_path(dir: &Path, scorer_id: &str, sequence: &str) -> PathBuf {
    dir.join(format!("{}.tsv", cache_key(scorer_id, sequence)))
}

fn read_entry(path: &Path, sequence: &SequenceRecord) -> Option<LogitsMatrix> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
        Err(e) => {
            log::warn!("unreadable cache entry {}: {e}", path.display());
            return None;
        }
    };
    let parsed = parse_response(&text).ok().and_then(|mut blocks| {
        if blocks.len() != 1 || blocks[0].sequence != sequence.sequence {
            return None;
        }
        let block = blocks.pop()?;
        LogitsMatrix::from_normalized(sequence.id.clone(), block.sequence, block.rows).ok()
    });
    if parsed.is_none() {
        log::warn!("discarding corrupt cache entry {}", path.display());
    }
    parsed
}

fn write_entry(dir: &Path, path: &Path, matrix: &LogitsMatrix) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(write_response(std::slice::from_ref(matrix)).as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Returns the cached matrix for `sequence`, scoring and storing it on a miss.
/// Corrupt entries are discarded and rebuilt.
pub fn cached_logits(scorer: &dyn Scorer, sequence: &SequenceRecord, cache_dir: &Path) -> Result<LogitsMatrix> {
    let cached = CachedScorer::new(scorer, cache_dir);
    cached.score(sequence)
}

/// Wraps a scorer with the on-disk cache; misses in one batch are sent to
/// the inner scorer together.
pub struct CachedScorer<S> {
    inner: S,
    dir: PathBuf,
}

impl<S: Scorer> CachedScorer<S> {
    pub fn new(inner: S, dir: impl Into<PathBuf>) -> Self {
        Self {
            inner,
            dir: dir.into(),
        }
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

impl<S: Scorer> Scorer for CachedScorer<S> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn score_batch(&self, sequences: &[SequenceRecord]) -> Result<Vec<LogitsMatrix>> {
        let id = self.inner.id();
        let mut results: Vec<Option<LogitsMatrix>> = sequences
            .iter()
            .map(|s| read_entry(&entry_path(&self.dir, id, &s.sequence), s))
            .collect();
        let misses: Vec<usize> = (0..sequences.len()).filter(|&i| results[i].is_none()).collect();
        if !misses.is_empty() {
            let batch: Vec<SequenceRecord> = misses.iter().map(|&i| sequences[i].clone()).collect();
            let scored = self.inner.score_batch(&batch)?;
            for (&i, matrix) in misses.iter().zip(scored) {
                let path = entry_path(&self.dir, id, &sequences[i].sequence);
                write_entry(&self.dir, &path, &matrix)?;
                // return what a later hit would return
                let stored = read_entry(&path, &sequences[i]).unwrap_or(matrix);
                results[i] = Some(stored);
            }
        }
        Ok(results.into_iter().map(|m| m.expect("filled")).collect())
    }
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn score_batch(&self, sequences: &[SequenceRecord]) -> Result<Vec<LogitsMatrix>> {
        (**self).score_batch(sequences)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorer::UniformScorer;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Counting {
        id: String,
        calls: AtomicUsize,
    }

    impl Counting {
        fn new(id: &str) -> Self {
            Self {
                id: id.into(),
                calls: AtomicUsize::new(0),
            }
        }
    }

    impl Scorer for Counting {
        fn id(&self) -> &str {
            &self.id
        }
        fn score_batch(&self, sequences: &[SequenceRecord]) -> Result<Vec<LogitsMatrix>> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            let mut out = UniformScorer.score_batch(sequences)?;
            // make the values depend on the scorer so namespaces are observable
            for m in &mut out {
                let rows: Vec<_> = m
                    .rows()
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        let mut r = *r;
                        r[i % 20] += 0.3;
                        r
                    })
                    .collect();
                *m = LogitsMatrix::renormalized(m.sequence_id(), m.source_sequence(), rows)?;
            }
            Ok(out)
        }
    }

    #[test]
    fn key_is_namespaced() {
        assert_ne!(cache_key("a", "ACD"), cache_key("b", "ACD"));
        assert_ne!(cache_key("a", "ACD"), cache_key("aA", "CD"));
        assert_eq!(cache_key("a", "ACD").len(), 64);
    }

    #[test]
    fn second_call_is_a_hit() {
        let dir = tempfile::tempdir().unwrap();
        let scorer = Counting::new("lm");
        let seq = SequenceRecord::new("s", "ACDEFG");
        let first = cached_logits(&scorer, &seq, dir.path()).unwrap();
        let second = cached_logits(&scorer, &seq, dir.path()).unwrap();
        assert_eq!(scorer.calls.load(Ordering::SeqCst), 1);
        assert_eq!(first, second);
        let bytes = std::fs::read(entry_path(dir.path(), "lm", "ACDEFG")).unwrap();
        cached_logits(&scorer, &seq, dir.path()).unwrap();
        assert_eq!(bytes, std::fs::read(entry_path(dir.path(), "lm", "ACDEFG")).unwrap());
    }

    #[test]
    fn hit_carries_requested_id() {
        let dir = tempfile::tempdir().unwrap();
        let scorer = Counting::new("lm");
        cached_logits(&scorer, &SequenceRecord::new("s1", "ACD"), dir.path()).unwrap();
        let m = cached_logits(&scorer, &SequenceRecord::new("s2", "ACD"), dir.path()).unwrap();
        assert_eq!(m.sequence_id(), "s2");
        assert_eq!(scorer.calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn scorer_ids_get_distinct_entries() {
        let dir = tempfile::tempdir().unwrap();
        let seq = SequenceRecord::new("s", "ACD");
        cached_logits(&Counting::new("a"), &seq, dir.path()).unwrap();
        cached_logits(&Counting::new("b"), &seq, dir.path()).unwrap();
        let entries = std::fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(entries, 2);
    }

    #[test]
    fn truncated_entry_is_repaired() {
        let dir = tempfile::tempdir().unwrap();
        let scorer = Counting::new("lm");
        let seq = SequenceRecord::new("s", "ACDEFGHIK");
        let original = cached_logits(&scorer, &seq, dir.path()).unwrap();
        let path = entry_path(dir.path(), "lm", &seq.sequence);
        let full = std::fs::read(&path).unwrap();
        std::fs::write(&path, &full[..full.len() / 2]).unwrap();

        let recovered = cached_logits(&scorer, &seq, dir.path()).unwrap();
        assert_eq!(recovered, original);
        assert_eq!(scorer.calls.load(Ordering::SeqCst), 2);
        assert_eq!(std::fs::read(&path).unwrap(), full);
    }

    #[test]
    fn batch_sends_only_misses() {
        let dir = tempfile::tempdir().unwrap();
        let scorer = Counting::new("lm");
        let cached = CachedScorer::new(&scorer, dir.path());
        cached.score(&SequenceRecord::new("a", "ACD")).unwrap();
        let out = cached
            .score_batch(&[SequenceRecord::new("a", "ACD"), SequenceRecord::new("b", "WWW")])
            .unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[1].sequence_id(), "b");
        assert_eq!(scorer.calls.load(Ordering::SeqCst), 2);
        cached.score_batch(&[SequenceRecord::new("b", "WWW")]).unwrap();
        assert_eq!(scorer.calls.load(Ordering::SeqCst), 2);
    }
}
