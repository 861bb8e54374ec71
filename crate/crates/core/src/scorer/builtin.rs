use crate::cpd::ColumnMap;
use crate::error::{Error, Result};
use crate::model::{aa_index, SequenceRecord, ALPHABET_SIZE};
use crate::parse::Alignment;

use super::logits::{LogRow, LogitsMatrix};
use super::Scorer;

/// Uniform log-probabilities for every position of `sequence`.
pub fn uniform_logits(sequence: &str) -> Result<LogitsMatrix> {
    LogitsMatrix::uniform("", sequence)
}

/// Smoothed column frequencies for every reference position:
/// `(count(b) + α) / (n_valid + 20α)`, where `n_valid` counts rows holding a
/// canonical residue in that column.
fn column_log_probs(alignment: &Alignment, columns: &ColumnMap, pseudocount: f64) -> Vec<LogRow> {
    columns
        .columns()
        .iter()
        .map(|&col| {
            let mut counts = [0usize; ALPHABET_SIZE];
            for row in 0..alignment.rows().len() {
                if let Ok(idx) = aa_index(alignment.residue(row, col - 1)) {
                    counts[idx] += 1;
                }
            }
            let n_valid: usize = counts.iter().sum();
            let denom = n_valid as f64 + ALPHABET_SIZE as f64 * pseudocount;
            let mut row = [0.0; ALPHABET_SIZE];
            for (v, &c) in row.iter_mut().zip(&counts) {
                *v = ((c as f64 + pseudocount) / denom).ln();
            }
            row
        })
        .collect()
}

fn check_pseudocount(pseudocount: f64) -> Result<()> {
    if pseudocount > 0.0 && pseudocount.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "pseudocount must be positive, got {pseudocount}"
        )))
    }
}

/// Position-specific log-probabilities from an alignment whose de-gapped
/// reference row must equal `sequence`.
pub fn pssm_logits(alignment: &Alignment, sequence: &str, pseudocount: f64) -> Result<LogitsMatrix> {
    check_pseudocount(pseudocount)?;
    let reference = alignment.degapped_reference();
    check_same_reference(&reference, sequence)?;
    let columns = ColumnMap::from_alignment(alignment);
    let rows = column_log_probs(alignment, &columns, pseudocount);
    LogitsMatrix::from_normalized(alignment.reference().id.clone(), sequence, rows)
}

fn check_same_reference(reference: &str, sequence: &str) -> Result<()> {
    if sequence.is_empty() {
        return Err(Error::EmptySequence);
    }
    for (i, (r, s)) in reference.bytes().zip(sequence.bytes()).enumerate() {
        if r != s {
            return Err(Error::ReferenceMismatch {
                position: i + 1,
                expected: s as char,
                found: r as char,
            });
        }
    }
    if reference.len() != sequence.len() {
        let position = reference.len().min(sequence.len()) + 1;
        return Err(Error::ReferenceMismatch {
            position,
            expected: sequence.as_bytes().get(position - 1).map_or('-', |&b| b as char),
            found: reference.as_bytes().get(position - 1).map_or('-', |&b| b as char),
        });
    }
    Ok(())
}

/// Scorer returning ln(1/20) everywhere.
#[derive(Debug, Clone, Default)]
pub struct UniformScorer;

impl Scorer for UniformScorer {
    fn id(&self) -> &str {
        "uniform"
    }

    fn score_batch(&self, sequences: &[SequenceRecord]) -> Result<Vec<LogitsMatrix>> {
        sequences
            .iter()
            .map(|s| LogitsMatrix::uniform(s.id.clone(), s.sequence.clone()))
            .collect()
    }
}

/// Alignment-profile scorer.
///
/// The profile is fixed by the alignment, so any query that is a
/// substitution variant of the reference (same length, canonical residues)
/// receives the reference profile. This lets mutated backgrounds be scored.
#[derive(Debug, Clone)]
pub struct PssmScorer {
    id: String,
    reference: String,
    rows: Vec<LogRow>,
}

impl PssmScorer {
    pub fn new(id: impl Into<String>, alignment: &Alignment, pseudocount: f64) -> Result<Self> {
        check_pseudocount(pseudocount)?;
        let reference = alignment.degapped_reference();
        if let Some(c) = reference.chars().find(|c| aa_index(*c).is_err()) {
            return Err(Error::NonCanonicalResidue(c));
        }
        if reference.is_empty() {
            return Err(Error::EmptySequence);
        }
        let columns = ColumnMap::from_alignment(alignment);
        Ok(Self {
            id: id.into(),
            rows: column_log_probs(alignment, &columns, pseudocount),
            reference,
        })
    }

    pub fn reference(&self) -> &str {
        &self.reference
    }
}

impl Scorer for PssmScorer {
    fn id(&self) -> &str {
        &self.id
    }

    fn score_batch(&self, sequences: &[SequenceRecord]) -> Result<Vec<LogitsMatrix>> {
        sequences
            .iter()
            .map(|s| {
                if s.sequence.len() != self.reference.len() {
                    return Err(Error::InvalidArgument(format!(
                        "sequence '{}' has length {}, alignment reference has {}",
                        s.id,
                        s.sequence.len(),
                        self.reference.len()
                    )));
                }
                LogitsMatrix::from_normalized(s.id.clone(), s.sequence.clone(), self.rows.clone())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::aa_index;
    use crate::parse::parse_msa;
    use approx::assert_abs_diff_eq;

    fn p(m: &LogitsMatrix, pos: usize, aa: char) -> f64 {
        m.row(pos - 1)[aa_index(aa).unwrap()].exp()
    }

    #[test]
    fn laplace_smoothed_column() {
        let aln = parse_msa(">human\nAR\n>m1\nAK\n>m2\nAR\n", "human").unwrap();
        let m = pssm_logits(&aln, "AR", 1.0).unwrap();
        assert_abs_diff_eq!(p(&m, 1, 'A'), 4.0 / 23.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p(&m, 1, 'C'), 1.0 / 23.0, epsilon = 1e-15);
        let diff = m.row(0)[aa_index('C').unwrap()] - m.row(0)[aa_index('A').unwrap()];
        assert_abs_diff_eq!(diff, -(4.0f64).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(diff, -1.3863, epsilon = 1e-4);
    }

    #[test]
    fn unknown_residues_do_not_count() {
        let aln = parse_msa(">human\nA\n>m1\nA\n>m2\nX\n", "human").unwrap();
        let m = pssm_logits(&aln, "A", 1.0).unwrap();
        assert_abs_diff_eq!(p(&m, 1, 'A'), 3.0 / 22.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p(&m, 1, 'W'), 1.0 / 22.0, epsilon = 1e-15);
    }

    #[test]
    fn single_row_alignment() {
        let aln = parse_msa(">human\nW\n", "human").unwrap();
        let m = pssm_logits(&aln, "W", 1.0).unwrap();
        assert_abs_diff_eq!(p(&m, 1, 'W'), 2.0 / 21.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p(&m, 1, 'A'), 1.0 / 21.0, epsilon = 1e-15);
    }

    #[test]
    fn gapped_reference_columns_are_skipped() {
        let aln = parse_msa(">human\nA-C\n>m1\nAWC\n", "human").unwrap();
        let m = pssm_logits(&aln, "AC", 1.0).unwrap();
        assert_eq!(m.len(), 2);
        assert_abs_diff_eq!(p(&m, 2, 'C'), 3.0 / 22.0, epsilon = 1e-15);
    }

    #[test]
    fn reference_mismatch() {
        let aln = parse_msa(">human\nAR\n>m1\nAK\n", "human").unwrap();
        assert!(matches!(
            pssm_logits(&aln, "AK", 1.0),
            Err(Error::ReferenceMismatch { position: 2, .. })
        ));
        assert!(matches!(pssm_logits(&aln, "ARC", 1.0), Err(Error::ReferenceMismatch { position: 3, .. })));
        assert!(pssm_logits(&aln, "AR", 0.0).is_err());
    }

    #[test]
    fn permutation_invariant_over_rows() {
        let a = parse_msa(">human\nARND\n>m1\nAKND\n>m2\nGR-D\n>m3\nXRNE\n", "human").unwrap();
        let b = parse_msa(">m3\nXRNE\n>m2\nGR-D\n>human\nARND\n>m1\nAKND\n", "human").unwrap();
        let ma = pssm_logits(&a, "ARND", 0.5).unwrap();
        let mb = pssm_logits(&b, "ARND", 0.5).unwrap();
        assert_eq!(ma.rows(), mb.rows());
    }

    #[test]
    fn scorer_accepts_substitution_variants() {
        let aln = parse_msa(">human\nAR\n>m1\nAK\n", "human").unwrap();
        let scorer = PssmScorer::new("pssm", &aln, 1.0).unwrap();
        let m = scorer.score(&SequenceRecord::new("bg", "AK")).unwrap();
        assert_eq!(m.source_sequence(), "AK");
        assert_eq!(m.rows(), pssm_logits(&aln, "AR", 1.0).unwrap().rows());
        assert!(scorer.score(&SequenceRecord::new("bg", "A")).is_err());
    }

    #[test]
    fn uniform_scorer() {
        let m = UniformScorer.score(&SequenceRecord::new("s", "ACD")).unwrap();
        assert_eq!(m.sequence_id(), "s");
        assert_eq!(uniform_logits("ACD").unwrap().rows(), m.rows());
        assert!(uniform_logits("").is_err());
    }
}
