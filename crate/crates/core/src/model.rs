//! Canonical domain types shared across the crate: the 20-letter amino-acid
//! alphabet, protein and variant records, and single-site mutation.
//!
//! Positions are 1-based in every public type and only converted to 0-based
//! inside matrix code.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Number of canonical amino acids.
pub const ALPHABET_SIZE: usize = 20;

/// The canonical alphabet in index order.
pub const ALPHABET: &[u8; ALPHABET_SIZE] = b"ACDEFGHIKLMNPQRSTVWY";

/// Proteins at or above this length exceed the usual language-model window.
pub const LONG_PROTEIN_THRESHOLD: usize = 1024;

const INDEX_TABLE: [i8; 128] = {
    let mut table = [-1i8; 128];
    let mut i = 0;
    while i < ALPHABET_SIZE {
        table[ALPHABET[i] as usize] = i as i8;
        i += 1;
    }
    table
};

/// Index of a canonical residue letter in [`ALPHABET`].
pub fn aa_index(letter: char) -> Result<usize> {
    if letter.is_ascii() {
        let idx = INDEX_TABLE[letter as usize];
        if idx >= 0 {
            return Ok(idx as usize);
        }
    }
    Err(Error::NonCanonicalResidue(letter))
}

/// Letter at `index`; panics if `index >= 20`.
pub fn aa_letter(index: usize) -> char {
    ALPHABET[index] as char
}

pub fn is_canonical(letter: char) -> bool {
    aa_index(letter).is_ok()
}

fn validate_sequence(sequence: &str) -> Result<()> {
    if sequence.is_empty() {
        return Err(Error::EmptySequence);
    }
    match sequence.chars().find(|c| !is_canonical(*c)) {
        Some(c) => Err(Error::NonCanonicalResidue(c)),
        None => Ok(()),
    }
}

/// An identifier plus a sequence, as read from FASTA or sent to a scorer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SequenceRecord {
    pub id: String,
    pub sequence: String,
}

impl SequenceRecord {
    pub fn new(id: impl Into<String>, sequence: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            sequence: sequence.into(),
        }
    }
}

/// A protein with a validated canonical sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProteinRecord {
    id: String,
    gene_symbol: String,
    sequence: String,
}

impl ProteinRecord {
    pub fn new(
        id: impl Into<String>,
        gene_symbol: impl Into<String>,
        sequence: impl Into<String>,
    ) -> Result<Self> {
        let sequence = sequence.into();
        validate_sequence(&sequence)?;
        let record = Self {
            id: id.into(),
            gene_symbol: gene_symbol.into(),
            sequence,
        };
        if record.is_long() {
            log::warn!(
                "protein {} has {} residues (>= {})",
                record.id,
                record.len(),
                LONG_PROTEIN_THRESHOLD
            );
        }
        Ok(record)
    }

    /// Treats the FASTA id as the gene symbol.
    pub fn from_sequence_record(record: &SequenceRecord) -> Result<Self> {
        Self::new(record.id.clone(), record.id.clone(), record.sequence.clone())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn gene_symbol(&self) -> &str {
        &self.gene_symbol
    }

    pub fn sequence(&self) -> &str {
        &self.sequence
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    /// Set when the protein is at least [`LONG_PROTEIN_THRESHOLD`] residues.
    pub fn is_long(&self) -> bool {
        self.len() >= LONG_PROTEIN_THRESHOLD
    }

    pub fn to_sequence_record(&self) -> SequenceRecord {
        SequenceRecord::new(self.id.clone(), self.sequence.clone())
    }
}

/// Grouped ClinVar interpretation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClinicalSignificance {
    PathogenicLikelyPathogenic,
    BenignLikelyBenign,
    UncertainSignificance,
}

impl ClinicalSignificance {
    pub const ALL: [ClinicalSignificance; 3] = [
        ClinicalSignificance::PathogenicLikelyPathogenic,
        ClinicalSignificance::BenignLikelyBenign,
        ClinicalSignificance::UncertainSignificance,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ClinicalSignificance::PathogenicLikelyPathogenic => "P/LP",
            ClinicalSignificance::BenignLikelyBenign => "B/LB",
            ClinicalSignificance::UncertainSignificance => "VUS",
        }
    }
}

impl fmt::Display for ClinicalSignificance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ClinicalSignificance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "P/LP" => Ok(ClinicalSignificance::PathogenicLikelyPathogenic),
            "B/LB" => Ok(ClinicalSignificance::BenignLikelyBenign),
            "VUS" => Ok(ClinicalSignificance::UncertainSignificance),
            other => Err(other.to_string()),
        }
    }
}

/// Protein-level identity of a substitution, used for joins between tables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariantKey {
    pub gene: String,
    pub position: usize,
    pub wt: char,
    pub mut_: char,
}

impl fmt::Display for VariantKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}{}>{}", self.gene, self.position, self.wt, self.mut_)
    }
}

/// A missense variant with its clinical annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantRecord {
    pub gene_symbol: String,
    /// 1-based residue index.
    pub position: usize,
    pub wt: char,
    pub mut_: char,
    pub significance: ClinicalSignificance,
    pub submission_count: u32,
    pub allele_frequency: Option<f64>,
}

impl VariantRecord {
    pub fn new(
        gene_symbol: impl Into<String>,
        position: usize,
        wt: char,
        mut_: char,
        significance: ClinicalSignificance,
    ) -> Self {
        Self {
            gene_symbol: gene_symbol.into(),
            position,
            wt,
            mut_,
            significance,
            submission_count: 0,
            allele_frequency: None,
        }
    }

    pub fn key(&self) -> VariantKey {
        VariantKey {
            gene: self.gene_symbol.clone(),
            position: self.position,
            wt: self.wt,
            mut_: self.mut_,
        }
    }

    /// `GENE:posWT>MUT`, the row label used in matrix outputs.
    pub fn label(&self) -> String {
        self.key().to_string()
    }

    /// The substitution that undoes this one.
    pub fn reversed(&self) -> Self {
        Self {
            wt: self.mut_,
            mut_: self.wt,
            ..self.clone()
        }
    }

    /// Checks the record against a protein: canonical distinct residues,
    /// position in range and matching wild type.
    pub fn validate_against(&self, protein: &ProteinRecord) -> Result<()> {
        if self.gene_symbol != protein.gene_symbol() {
            return Err(Error::GeneMismatch {
                variant_gene: self.gene_symbol.clone(),
                protein_gene: protein.gene_symbol().to_string(),
            });
        }
        check_substitution(protein.sequence(), self.position, self.wt, self.mut_)
    }
}

fn check_substitution(sequence: &str, position: usize, wt: char, mut_: char) -> Result<()> {
    aa_index(wt)?;
    aa_index(mut_)?;
    if position == 0 || position > sequence.len() {
        return Err(Error::PositionOutOfRange {
            position,
            length: sequence.len(),
        });
    }
    let found = sequence.as_bytes()[position - 1] as char;
    if found != wt {
        return Err(Error::ReferenceMismatch {
            position,
            expected: wt,
            found,
        });
    }
    Ok(())
}

/// Returns a copy of `sequence` carrying the variant's mutant residue.
pub fn apply_mutation(sequence: &str, variant: &VariantRecord) -> Result<String> {
    check_substitution(sequence, variant.position, variant.wt, variant.mut_)?;
    let mut bytes = sequence.as_bytes().to_vec();
    bytes[variant.position - 1] = variant.mut_ as u8;
    // only ASCII letters were written
    Ok(String::from_utf8(bytes).expect("ascii"))
}
