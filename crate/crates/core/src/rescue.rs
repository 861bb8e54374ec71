//! Secondary-mutation scans on pathogenic backgrounds.
//!
//! Each background variant is applied to the wild-type protein, the mutated
//! sequence is scored once, and every single substitution is read off as a
//! wild-type marginal relative to the mutated sequence.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{aa_index, apply_mutation, ProteinRecord, SequenceRecord, VariantRecord, ALPHABET_SIZE};
use crate::scorer::{LogRow, LogitsMatrix, Scorer};
use crate::stats;

/// L×20 secondary scores on one background.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryScoreMatrix {
    background: VariantRecord,
    sequence: String,
    entries: Vec<LogRow>,
}

impl SecondaryScoreMatrix {
    /// Builds the matrix from logits already computed on the background
    /// sequence.
    pub fn from_logits(background: VariantRecord, logits: &LogitsMatrix) -> Result<Self> {
        let sequence = logits.source_sequence().to_string();
        let entries = logits
            .rows()
            .iter()
            .zip(sequence.chars())
            .map(|(row, current)| {
                let own = row[aa_index(current)?];
                let mut out = [0.0; ALPHABET_SIZE];
                for (o, v) in out.iter_mut().zip(row) {
                    *o = v - own;
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            background,
            sequence,
            entries,
        })
    }

    pub fn background(&self) -> &VariantRecord {
        &self.background
    }

    /// The mutated sequence the scores refer to.
    pub fn sequence(&self) -> &str {
        &self.sequence
    }

    pub fn entries(&self) -> &[LogRow] {
        &self.entries
    }

    /// Entry at 0-based position `j` and alphabet index `b`.
    pub fn get(&self, j: usize, b: usize) -> f64 {
        self.entries[j][b]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Scores every single substitution on the background sequence.
pub fn background_secondary_matrix(
    scorer: &dyn Scorer,
    protein: &ProteinRecord,
    background: &VariantRecord,
) -> Result<SecondaryScoreMatrix> {
    background.validate_against(protein)?;
    let mutated = apply_mutation(protein.sequence(), background)?;
    let record = SequenceRecord::new(format!("{}|{}", protein.id(), background.label()), mutated);
    let logits = scorer.score(&record)?;
    if logits.source_sequence() != record.sequence {
        return Err(Error::InvalidArgument(format!(
            "scorer {} returned logits for a different sequence",
            scorer.id()
        )));
    }
    SecondaryScoreMatrix::from_logits(background.clone(), &logits)
}

/// Mean of the 19 non-self entries at each position.
pub fn position_summary(matrix: &SecondaryScoreMatrix) -> Vec<f64> {
    matrix
        .entries
        .iter()
        .zip(matrix.sequence.bytes())
        .map(|(row, current)| {
            let own = aa_index(current as char).expect("validated sequence");
            let sum: f64 = row
                .iter()
                .enumerate()
                .filter(|(b, _)| *b != own)
                .map(|(_, v)| v)
                .sum();
            sum / (ALPHABET_SIZE - 1) as f64
        })
        .collect()
}

/// Direction along which the rescue matrix is z-scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZAxis {
    /// Each position column across backgrounds.
    #[default]
    Position,
    /// Each background row across positions.
    Background,
}

impl ZAxis {
    pub fn label(self) -> &'static str {
        match self {
            ZAxis::Position => "position",
            ZAxis::Background => "background",
        }
    }
}

impl fmt::Display for ZAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ZAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "position" => Ok(ZAxis::Position),
            "background" => Ok(ZAxis::Background),
            other => Err(Error::InvalidArgument(format!(
                "unknown z axis '{other}' (expected position or background)"
            ))),
        }
    }
}

/// V×L per-position mean secondary scores and their z-scores.
#[derive(Debug, Clone, PartialEq)]
pub struct RescueMatrix {
    backgrounds: Vec<VariantRecord>,
    values: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    axis: ZAxis,
}

fn z_along(values: &[Vec<f64>], axis: ZAxis) -> Vec<Vec<f64>> {
    let rows = values.len();
    let cols = values.first().map_or(0, Vec::len);
    match axis {
        ZAxis::Background => values.iter().map(|row| stats::zscore(row).values).collect(),
        ZAxis::Position => {
            let mut z = vec![vec![0.0; cols]; rows];
            for j in 0..cols {
                let column: Vec<f64> = values.iter().map(|r| r[j]).collect();
                for (i, v) in stats::zscore(&column).values.into_iter().enumerate() {
                    z[i][j] = v;
                }
            }
            z
        }
    }
}

impl RescueMatrix {
    /// Assembles a matrix from summary rows and computes z-scores.
    pub fn from_rows(backgrounds: Vec<VariantRecord>, values: Vec<Vec<f64>>, axis: ZAxis) -> Result<Self> {
        if backgrounds.is_empty() {
            return Err(Error::EmptyBackgroundSet);
        }
        if backgrounds.len() != values.len() {
            return Err(Error::LengthMismatch(backgrounds.len(), values.len()));
        }
        let width = values[0].len();
        if let Some(row) = values.iter().find(|r| r.len() != width) {
            return Err(Error::LengthMismatch(width, row.len()));
        }
        if axis == ZAxis::Position && values.len() == 1 {
            log::warn!("a single background cannot be z-scored per position; z-scores set to 0");
        }
        let z = z_along(&values, axis);
        Ok(Self {
            backgrounds,
            values,
            z,
            axis,
        })
    }

    pub fn backgrounds(&self) -> &[VariantRecord] {
        &self.backgrounds
    }

    /// Mean secondary scores, one row per background.
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn z_values(&self) -> &[Vec<f64>] {
        &self.z
    }

    pub fn axis(&self) -> ZAxis {
        self.axis
    }

    /// Number of positions.
    pub fn width(&self) -> usize {
        self.values[0].len()
    }
}

/// Scans every background with one scorer call each, in parallel on the
/// current rayon pool. Rows follow input order.
pub fn build_rescue_matrix(
    scorer: &dyn Scorer,
    protein: &ProteinRecord,
    backgrounds: &[VariantRecord],
    axis: ZAxis,
) -> Result<RescueMatrix> {
    if backgrounds.is_empty() {
        return Err(Error::EmptyBackgroundSet);
    }
    for b in backgrounds {
        b.validate_against(protein)?;
    }
    let rows = backgrounds
        .par_iter()
        .map(|b| background_secondary_matrix(scorer, protein, b).map(|m| position_summary(&m)))
        .collect::<Result<Vec<_>>>()?;
    RescueMatrix::from_rows(backgrounds.to_vec(), rows, axis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ClinicalSignificance;
    use crate::parse::parse_msa;
    use crate::scorer::{PssmScorer, UniformScorer};
    use approx::assert_abs_diff_eq;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn bg(pos: usize, wt: char, mut_: char) -> VariantRecord {
        VariantRecord::new("G", pos, wt, mut_, ClinicalSignificance::PathogenicLikelyPathogenic)
    }

    fn toy_pssm() -> PssmScorer {
        let aln = parse_msa(">human\nACD\n>m1\nACD\n>m2\nAKD\n", "human").unwrap();
        PssmScorer::new("pssm", &aln, 1.0).unwrap()
    }

    fn matrix_with_row(row: LogRow, current: char) -> SecondaryScoreMatrix {
        SecondaryScoreMatrix {
            background: bg(1, 'A', 'C'),
            sequence: current.to_string(),
            entries: vec![row],
        }
    }

    #[test]
    fn uniform_background_is_zero() {
        let protein = ProteinRecord::new("G", "G", "ACDEF").unwrap();
        let m = background_secondary_matrix(&UniformScorer, &protein, &bg(2, 'C', 'W')).unwrap();
        assert_eq!(m.sequence(), "AWDEF");
        assert!(m.entries().iter().flatten().all(|v| *v == 0.0));
        assert!(position_summary(&m).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn pssm_background_uses_mutated_reference() {
        let protein = ProteinRecord::new("G", "G", "ACD").unwrap();
        let m = background_secondary_matrix(&toy_pssm(), &protein, &bg(2, 'C', 'K')).unwrap();
        // column 2 counts C:2 K:1 with unit pseudocounts -> C 3/23, K 2/23, rest 1/23
        let c = aa_index('C').unwrap();
        let k = aa_index('K').unwrap();
        assert_eq!(m.get(1, k), 0.0);
        assert_abs_diff_eq!(m.get(1, c), 1.5f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(m.get(1, aa_index('W').unwrap()), 0.5f64.ln(), epsilon = 1e-12);
        let expected = (1.5f64.ln() + 18.0 * 0.5f64.ln()) / 19.0;
        assert_abs_diff_eq!(position_summary(&m)[1], expected, epsilon = 1e-12);
        for (j, current) in m.sequence().chars().enumerate() {
            assert_eq!(m.get(j, aa_index(current).unwrap()), 0.0);
        }
    }

    #[test]
    fn summary_excludes_self() {
        let mut row = [-(19.0f64).ln(); ALPHABET_SIZE];
        row[aa_index('A').unwrap()] = 0.0;
        assert_abs_diff_eq!(position_summary(&matrix_with_row(row, 'A'))[0], -(19.0f64).ln(), epsilon = 1e-12);

        let mut row = [-1.0; ALPHABET_SIZE];
        row[aa_index('A').unwrap()] = 0.0;
        row[aa_index('W').unwrap()] = 18.0;
        assert_eq!(position_summary(&matrix_with_row(row, 'A'))[0], 0.0);
    }

    #[test]
    fn three_point_column() {
        let backgrounds = vec![bg(1, 'A', 'C'), bg(1, 'A', 'D'), bg(1, 'A', 'E')];
        let m = RescueMatrix::from_rows(backgrounds, vec![vec![1.0], vec![2.0], vec![3.0]], ZAxis::Position).unwrap();
        let z: Vec<f64> = m.z_values().iter().map(|r| r[0]).collect();
        assert_abs_diff_eq!(z[0], -1.2247, epsilon = 1e-4);
        assert_eq!(z[1], 0.0);
        assert_abs_diff_eq!(z[2], 1.2247, epsilon = 1e-4);
        assert_abs_diff_eq!(z[2], 1.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn background_axis_scores_rows() {
        let m = RescueMatrix::from_rows(vec![bg(1, 'A', 'C')], vec![vec![1.0, 2.0, 3.0]], ZAxis::Background).unwrap();
        assert_abs_diff_eq!(m.z_values()[0][0], -1.5f64.sqrt(), epsilon = 1e-12);
        let single = RescueMatrix::from_rows(vec![bg(1, 'A', 'C')], vec![vec![1.0, 2.0]], ZAxis::Position).unwrap();
        assert!(single.z_values()[0].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rejects_empty_or_ragged() {
        assert!(matches!(
            RescueMatrix::from_rows(vec![], vec![], ZAxis::Position),
            Err(Error::EmptyBackgroundSet)
        ));
        let protein = ProteinRecord::new("G", "G", "ACD").unwrap();
        assert!(matches!(
            build_rescue_matrix(&UniformScorer, &protein, &[], ZAxis::Position),
            Err(Error::EmptyBackgroundSet)
        ));
        assert!(RescueMatrix::from_rows(
            vec![bg(1, 'A', 'C'), bg(1, 'A', 'D')],
            vec![vec![1.0], vec![1.0, 2.0]],
            ZAxis::Position
        )
        .is_err());
    }

    #[test]
    fn axis_parsing() {
        assert_eq!("position".parse::<ZAxis>().unwrap(), ZAxis::Position);
        assert_eq!("background".parse::<ZAxis>().unwrap(), ZAxis::Background);
        assert!("row".parse::<ZAxis>().is_err());
        assert_eq!(ZAxis::default(), ZAxis::Position);
    }

    struct Shifted<S>(S, f64, AtomicUsize);

    impl<S: Scorer> Scorer for Shifted<S> {
        fn id(&self) -> &str {
            "shifted"
        }
        fn score_batch(&self, sequences: &[SequenceRecord]) -> Result<Vec<LogitsMatrix>> {
            self.2.fetch_add(sequences.len(), Ordering::SeqCst);
            self.0
                .score_batch(sequences)?
                .into_iter()
                .map(|m| {
                    let rows = m.rows().iter().map(|r| r.map(|v| v + self.1)).collect();
                    LogitsMatrix::renormalized(m.sequence_id(), m.source_sequence(), rows)
                })
                .collect()
        }
    }

    #[test]
    fn shift_invariance_and_call_count() {
        let protein = ProteinRecord::new("G", "G", "ACD").unwrap();
        let backgrounds = vec![bg(2, 'C', 'K'), bg(1, 'A', 'W'), bg(2, 'C', 'K')];
        let plain = build_rescue_matrix(&toy_pssm(), &protein, &backgrounds, ZAxis::Position).unwrap();
        let shifted = Shifted(toy_pssm(), 3.25, AtomicUsize::new(0));
        let moved = build_rescue_matrix(&shifted, &protein, &backgrounds, ZAxis::Position).unwrap();
        assert_eq!(shifted.2.load(Ordering::SeqCst), 3);
        for (a, b) in plain.values().iter().flatten().zip(moved.values().iter().flatten()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        for (a, b) in plain.z_values().iter().flatten().zip(moved.z_values().iter().flatten()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
        assert_eq!(plain.values()[0], plain.values()[2]);
        assert_eq!(plain.backgrounds(), &backgrounds[..]);
    }
}
