use crate::error::{Error, Result};
use crate::model::is_canonical;

use super::fasta::read_records;

pub const GAP: char = '-';
pub const UNKNOWN: char = 'X';

/// One aligned row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedRow {
    pub id: String,
    pub residues: String,
}

/// A gapped multiple sequence alignment with a designated reference row.
///
/// Rows contain only canonical residues, `-` and `X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    rows: Vec<AlignedRow>,
    width: usize,
    reference: usize,
}

impl Alignment {
    pub fn new(rows: Vec<AlignedRow>, reference_id: &str) -> Result<Self> {
        let width = rows.first().map_or(0, |r| r.residues.len());
        for row in &rows {
            if row.residues.len() != width {
                return Err(Error::AlignmentWidthMismatch {
                    id: row.id.clone(),
                    expected: width,
                    found: row.residues.len(),
                });
            }
            if let Some(c) = row.residues.chars().find(|&c| map_msa_residue(c) != Some(c)) {
                return Err(Error::NonCanonicalResidue(c));
            }
        }
        let reference = rows
            .iter()
            .position(|r| r.id == reference_id)
            .ok_or_else(|| Error::MissingReference(reference_id.to_string()))?;
        Ok(Self {
            rows,
            width,
            reference,
        })
    }

    pub fn rows(&self) -> &[AlignedRow] {
        &self.rows
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn reference(&self) -> &AlignedRow {
        &self.rows[self.reference]
    }

    pub fn reference_index(&self) -> usize {
        self.reference
    }

    /// Residue of `row` at 0-based column `col`.
    pub fn residue(&self, row: usize, col: usize) -> char {
        self.rows[row].residues.as_bytes()[col] as char
    }

    /// Reference row with gaps removed.
    pub fn degapped_reference(&self) -> String {
        self.reference().residues.chars().filter(|&c| c != GAP).collect()
    }

    /// Inserts an all-gap column before 0-based column `col`.
    pub fn with_gap_column(&self, col: usize) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut residues = r.residues.clone();
                residues.insert(col, GAP);
                AlignedRow {
                    id: r.id.clone(),
                    residues,
                }
            })
            .collect();
        Self {
            rows,
            width: self.width + 1,
            reference: self.reference,
        }
    }
}

/// Ambiguity codes collapse to `X`, `.` to a gap.
fn map_msa_residue(c: char) -> Option<char> {
    match c {
        GAP | UNKNOWN => Some(c),
        '.' => Some(GAP),
        'B' | 'Z' | 'J' | 'U' | 'O' => Some(UNKNOWN),
        c if is_canonical(c) => Some(c),
        _ => None,
    }
}

/// Parses aligned FASTA; `reference_id` names the human row.
pub fn parse_msa(text: &str, reference_id: &str) -> Result<Alignment> {
    let records = read_records(text, map_msa_residue)?;
    let rows = records
        .into_iter()
        .map(|r| AlignedRow {
            id: r.id,
            residues: r.sequence,
        })
        .collect();
    Alignment::new(rows, reference_id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_gap_column() {
        let aln = parse_msa(">human\nAR-N\n>mouse\nAH-N\n", "human").unwrap();
        assert_eq!(aln.width(), 4);
        assert_eq!(aln.rows().len(), 2);
        assert_eq!(aln.degapped_reference(), "ARN");
        assert_eq!(aln.residue(1, 1), 'H');
    }

    #[test]
    fn ragged_rows() {
        assert!(matches!(
            parse_msa(">human\nAR-N\n>mouse\nAHN\n", "human"),
            Err(Error::AlignmentWidthMismatch { expected: 4, found: 3, .. })
        ));
    }

    #[test]
    fn missing_reference() {
        assert!(matches!(
            parse_msa(">chimp\nARN\n>mouse\nAHN\n", "human"),
            Err(Error::MissingReference(id)) if id == "human"
        ));
    }

    #[test]
    fn unknown_and_ambiguous_residues() {
        let aln = parse_msa(">human\nARN\n>dog\nxB.\n", "human").unwrap();
        assert_eq!(aln.rows()[1].residues, "XX-");
        assert!(parse_msa(">human\nAR*\n", "human").is_err());
    }
}
