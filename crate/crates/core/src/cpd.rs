//! Compensated pathogenic deviations: a human variant whose mutant residue
//! is the wild type of at least one ortholog in the alignment.
//!
//! `CPD+k` additionally requires the k residues on each side of the site to
//! be identical, canonical and ungapped in every row, the human row included.
//! Neighbors that fall off either end of the protein are not tested.

use crate::error::{Error, Result};
use crate::model::{is_canonical, VariantRecord};
use crate::parse::{Alignment, GAP};
use crate::scoring::ScoredVariant;
use crate::stats::{mann_whitney_u, mean_of, UTestResult};

/// Reference position (1-based) to alignment column (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    columns: Vec<usize>,
}

impl ColumnMap {
    /// Maps the alignment's reference row.
    pub fn from_alignment(alignment: &Alignment) -> Self {
        Self::from_row(&alignment.reference().residues)
    }

    fn from_row(residues: &str) -> Self {
        let columns = residues
            .chars()
            .enumerate()
            .filter(|(_, c)| *c != GAP)
            .map(|(i, _)| i + 1)
            .collect();
        Self { columns }
    }

    /// Column of 1-based reference `position`.
    pub fn column(&self, position: usize) -> Option<usize> {
        position.checked_sub(1).and_then(|i| self.columns.get(i)).copied()
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Column map for the row named `human_id`.
pub fn map_alignment_columns(alignment: &Alignment, human_id: &str) -> Result<ColumnMap> {
    let row = alignment
        .rows()
        .iter()
        .find(|r| r.id == human_id)
        .ok_or_else(|| Error::MissingReference(human_id.to_string()))?;
    let map = ColumnMap::from_row(&row.residues);
    if map.is_empty() {
        log::warn!("reference row '{human_id}' contains only gaps");
    }
    Ok(map)
}

/// CPD call for one variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpdStatus {
    pub is_cpd: bool,
    /// `[CPD+1, CPD+2]`.
    pub window_conserved: [bool; 2],
    /// Ids of non-reference rows carrying the mutant residue, sorted.
    pub supporting_species: Vec<String>,
}

impl CpdStatus {
    /// Whether the variant qualifies at `level` (0 = plain CPD, 1 or 2 =
    /// CPD+1, CPD+2).
    pub fn at_level(&self, level: usize) -> bool {
        match level {
            0 => self.is_cpd,
            k => self.window_conserved[k - 1],
        }
    }
}

fn column_fully_conserved(alignment: &Alignment, col: usize) -> bool {
    let first = alignment.residue(0, col - 1);
    is_canonical(first)
        && (0..alignment.rows().len()).all(|r| alignment.residue(r, col - 1) == first)
}

pub fn detect_cpd(alignment: &Alignment, human_id: &str, variant: &VariantRecord) -> Result<CpdStatus> {
    if !is_canonical(variant.mut_) {
        return Err(Error::NonCanonicalResidue(variant.mut_));
    }
    let map = map_alignment_columns(alignment, human_id)?;
    let human = alignment
        .rows()
        .iter()
        .position(|r| r.id == human_id)
        .expect("mapped above");
    let col = map.column(variant.position).ok_or(Error::PositionOutOfRange {
        position: variant.position,
        length: map.len(),
    })?;
    let found = alignment.residue(human, col - 1);
    if found != variant.wt {
        return Err(Error::ReferenceMismatch {
            position: variant.position,
            expected: variant.wt,
            found,
        });
    }

    let mut supporting_species: Vec<String> = alignment
        .rows()
        .iter()
        .enumerate()
        .filter(|(i, r)| *i != human && r.residues.as_bytes()[col - 1] as char == variant.mut_)
        .map(|(_, r)| r.id.clone())
        .collect();
    supporting_species.sort();
    let is_cpd = !supporting_species.is_empty();

    let mut window_conserved = [false; 2];
    let mut conserved = is_cpd;
    for k in 1..=2usize {
        let flanks = [variant.position.checked_sub(k), Some(variant.position + k)];
        for pos in flanks.into_iter().flatten() {
            if let Some(c) = map.column(pos) {
                conserved &= column_fully_conserved(alignment, c);
            }
        }
        window_conserved[k - 1] = conserved;
    }

    Ok(CpdStatus {
        is_cpd,
        window_conserved,
        supporting_species,
    })
}

/// CPD versus non-CPD score comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CpdComparison {
    pub level: usize,
    /// Sample 1 is the CPD group.
    pub test: UTestResult,
    pub cpd_mean: f64,
    pub non_cpd_mean: f64,
    pub n_cpd: usize,
    pub n_non_cpd: usize,
}

/// Two-sided rank test of normalized scores: variants that are CPDs at
/// `level` against variants that are not CPDs at all.
pub fn cpd_score_comparison(
    scored: &[ScoredVariant],
    statuses: &[CpdStatus],
    level: usize,
) -> Result<CpdComparison> {
    if scored.len() != statuses.len() {
        return Err(Error::LengthMismatch(scored.len(), statuses.len()));
    }
    if level > 2 {
        return Err(Error::InvalidArgument(format!("CPD window must be 0, 1 or 2, got {level}")));
    }
    let mut cpd = Vec::new();
    let mut non_cpd = Vec::new();
    for (s, status) in scored.iter().zip(statuses) {
        if status.at_level(level) {
            cpd.push(s.normalized_score);
        } else if !status.is_cpd {
            non_cpd.push(s.normalized_score);
        }
    }
    if cpd.is_empty() {
        return Err(Error::EmptyGroup(format!("no CPD variants at window {level}")));
    }
    if non_cpd.is_empty() {
        return Err(Error::EmptyGroup("no non-CPD variants".into()));
    }
    Ok(CpdComparison {
        level,
        test: mann_whitney_u(&cpd, &non_cpd)?,
        cpd_mean: mean_of(&cpd).expect("non-empty"),
        non_cpd_mean: mean_of(&non_cpd).expect("non-empty"),
        n_cpd: cpd.len(),
        n_non_cpd: non_cpd.len(),
    })
}
