use std::fmt::Write as _;

use crate::error::{Error, ParseErrorKind, Result};
use crate::model::{aa_index, ALPHABET, ALPHABET_SIZE};

/// Rows whose probability mass is further than this from 1 raise a warning.
pub const ROW_SUM_WARN: f64 = 1e-3;
/// Rows whose probability mass is further than this from 1 are rejected.
pub const ROW_SUM_FAIL: f64 = 0.5;
/// Accepted deviation of stored, already-normalized rows.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

pub type LogRow = [f64; ALPHABET_SIZE];

/// Per-position natural-log probabilities over the canonical alphabet.
///
/// Every row sums (in probability space) to 1 within [`ROW_SUM_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct LogitsMatrix {
    sequence_id: String,
    source_sequence: String,
    rows: Vec<LogRow>,
}

fn log_sum_exp(row: &LogRow) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

impl LogitsMatrix {
    fn check_shape(sequence_id: &str, source_sequence: &str, rows: &[LogRow]) -> Result<()> {
        if source_sequence.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let Some(c) = source_sequence.chars().find(|c| aa_index(*c).is_err()) {
            return Err(Error::NonCanonicalResidue(c));
        }
        if rows.len() != source_sequence.len() {
            return Err(Error::InvalidArgument(format!(
                "logits for '{sequence_id}' have {} rows for a sequence of length {}",
                rows.len(),
                source_sequence.len()
            )));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "logits for '{sequence_id}' contain non-finite values"
            )));
        }
        Ok(())
    }

    /// Ingests log-probabilities reported by a scorer, renormalizing every
    /// row over the 20 canonical letters.
    ///
    /// A row whose mass deviates from 1 by more than [`ROW_SUM_WARN`] is logged;
    /// beyond [`ROW_SUM_FAIL`] it is an error.
    pub fn from_log_scores(
        sequence_id: impl Into<String>,
        source_sequence: impl Into<String>,
        rows: Vec<LogRow>,
    ) -> Result<Self> {
        Self::build_normalized(sequence_id.into(), source_sequence.into(), rows, true)
    }

    /// Turns arbitrary finite log-scores (logits, shifted or averaged rows)
    /// into log-probabilities without any mass check.
    pub fn renormalized(
        sequence_id: impl Into<String>,
        source_sequence: impl Into<String>,
        rows: Vec<LogRow>,
    ) -> Result<Self> {
        Self::build_normalized(sequence_id.into(), source_sequence.into(), rows, false)
    }

    fn build_normalized(sequence_id: String, source_sequence: String, mut rows: Vec<LogRow>, check: bool) -> Result<Self> {
        Self::check_shape(&sequence_id, &source_sequence, &rows)?;
        let mut worst: Option<(usize, f64)> = None;
        let mut flagged = 0usize;
        for (i, row) in rows.iter_mut().enumerate() {
            let lse = log_sum_exp(row);
            if check {
                let mass = lse.exp();
                let deviation = (mass - 1.0).abs();
                if deviation > ROW_SUM_FAIL {
                    return Err(Error::RowSumOutOfRange {
                        id: sequence_id,
                        row: i + 1,
                        sum: mass,
                    });
                }
                if deviation > ROW_SUM_WARN {
                    flagged += 1;
                    if worst.is_none_or(|(_, m)| deviation > (m - 1.0).abs()) {
                        worst = Some((i + 1, mass));
                    }
                }
            }
            for v in row.iter_mut() {
                *v -= lse;
            }
        }
        if let Some((row, mass)) = worst {
            log::warn!(
                "logits for '{sequence_id}': {flagged} rows renormalized (worst row {row}, mass {mass})"
            );
        }
        Ok(Self {
            sequence_id,
            source_sequence,
            rows,
        })
    }

    /// Builds a matrix from rows that are already normalized, leaving the
    /// values untouched. Rows outside [`ROW_SUM_TOLERANCE`] are rejected.
    pub fn from_normalized(
        sequence_id: impl Into<String>,
        source_sequence: impl Into<String>,
        rows: Vec<LogRow>,
    ) -> Result<Self> {
        let (sequence_id, source_sequence) = (sequence_id.into(), source_sequence.into());
        Self::check_shape(&sequence_id, &source_sequence, &rows)?;
        for (i, row) in rows.iter().enumerate() {
            let mass: f64 = row.iter().map(|v| v.exp()).sum();
            if (mass - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RowSumOutOfRange {
                    id: sequence_id,
                    row: i + 1,
                    sum: mass,
                });
            }
        }
        Ok(Self {
            sequence_id,
            source_sequence,
            rows,
        })
    }

    /// Uniform distribution: every entry is ln(1/20).
    pub fn uniform(sequence_id: impl Into<String>, source_sequence: impl Into<String>) -> Result<Self> {
        let source_sequence = source_sequence.into();
        let value = (1.0 / ALPHABET_SIZE as f64).ln();
        let rows = vec![[value; ALPHABET_SIZE]; source_sequence.len()];
        Self::from_normalized(sequence_id, source_sequence, rows)
    }

    pub fn sequence_id(&self) -> &str {
        &self.sequence_id
    }

    pub fn source_sequence(&self) -> &str {
        &self.source_sequence
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row at 0-based index.
    pub fn row(&self, index: usize) -> &LogRow {
        &self.rows[index]
    }

    pub fn rows(&self) -> &[LogRow] {
        &self.rows
    }

    /// Residue of the source sequence at 0-based index.
    pub fn residue(&self, index: usize) -> char {
        self.source_sequence.as_bytes()[index] as char
    }

    pub fn with_sequence_id(mut self, id: impl Into<String>) -> Self {
        self.sequence_id = id.into();
        self
    }

    /// Largest |Σ exp(row) − 1| over all rows.
    pub fn max_row_sum_deviation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().map(|v| v.exp()).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Serializes matrices in the response format:
///
/// ```text
/// #id <sequence_id>
/// #alphabet ACDEFGHIKLMNPQRSTVWY
/// <position>\t<wt>\t<20 log-probabilities>
/// ```
///
/// Values carry 17 significant digits so parsing restores them exactly.
pub fn write_response(matrices: &[LogitsMatrix]) -> String {
    let mut out = String::new();
    for m in matrices {
        let _ = writeln!(out, "#id {}", m.sequence_id);
        let _ = writeln!(out, "#alphabet {}", std::str::from_utf8(ALPHABET).expect("ascii"));
        for (i, row) in m.rows.iter().enumerate() {
            let _ = write!(out, "{}\t{}", i + 1, m.residue(i));
            for v in row {
                let _ = write!(out, "\t{v:.16e}");
            }
            out.push('\n');
        }
    }
    out
}

/// One block of a response file before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseBlock {
    pub id: String,
    /// Residues read from the wild-type column.
    pub sequence: String,
    /// Rows reordered into canonical alphabet order.
    pub rows: Vec<LogRow>,
}

/// Parses a response file into raw blocks. The `#alphabet` line may list the
/// 20 canonical letters in any order; columns are permuted to canonical order.
pub fn parse_response(text: &str) -> Result<Vec<ResponseBlock>> {
    let mut blocks: Vec<ResponseBlock> = Vec::new();
    let mut order: Option<[usize; ALPHABET_SIZE]> = None;
    let other = |line: usize, msg: String| Error::parse(line, ParseErrorKind::Other(msg));

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(id) = line.strip_prefix("#id") {
            let id = id.trim();
            if id.is_empty() {
                return Err(Error::parse(line_no, ParseErrorKind::EmptyHeader));
            }
            if blocks.iter().any(|b| b.id == id) {
                return Err(Error::parse(line_no, ParseErrorKind::DuplicateId(id.into())));
            }
            blocks.push(ResponseBlock {
                id: id.to_string(),
                sequence: String::new(),
                rows: Vec::new(),
            });
            order = None;
            continue;
        }
        if let Some(letters) = line.strip_prefix("#alphabet") {
            let letters: Vec<char> = letters.trim().chars().collect();
            let mut perm = [usize::MAX; ALPHABET_SIZE];
            let mut seen = [false; ALPHABET_SIZE];
            if letters.len() != ALPHABET_SIZE {
                return Err(other(line_no, "alphabet must list 20 letters".into()));
            }
            for (col, c) in letters.iter().enumerate() {
                let idx = aa_index(*c).map_err(|_| other(line_no, format!("bad alphabet letter '{c}'")))?;
                if seen[idx] {
                    return Err(other(line_no, format!("repeated alphabet letter '{c}'")));
                }
                seen[idx] = true;
                perm[col] = idx;
            }
            order = Some(perm);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let block = blocks
            .last_mut()
            .ok_or_else(|| Error::parse(line_no, ParseErrorKind::MissingHeader))?;
        let perm = order.ok_or_else(|| other(line_no, "row before #alphabet line".into()))?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 + ALPHABET_SIZE {
            return Err(Error::parse(
                line_no,
                ParseErrorKind::FieldCount {
                    expected: 2 + ALPHABET_SIZE,
                    found: fields.len(),
                },
            ));
        }
        let position: usize = fields[0].trim().parse().map_err(|_| {
            Error::parse(
                line_no,
                ParseErrorKind::MalformedField {
                    field: "position",
                    value: fields[0].into(),
                },
            )
        })?;
        if position != block.rows.len() + 1 {
            return Err(other(
                line_no,
                format!("expected position {}, found {position}", block.rows.len() + 1),
            ));
        }
        let wt = crate::parse::parse_residue(line_no, "wt", fields[1].trim())?;
        let mut row = [0.0; ALPHABET_SIZE];
        for (col, raw) in fields[2..].iter().enumerate() {
            let v: f64 = raw.trim().parse().map_err(|_| {
                Error::parse(
                    line_no,
                    ParseErrorKind::MalformedField {
                        field: "log-probability",
                        value: raw.to_string(),
                    },
                )
            })?;
            if !v.is_finite() {
                return Err(Error::parse(line_no, ParseErrorKind::NonFinite));
            }
            row[perm[col]] = v;
        }
        block.sequence.push(wt);
        block.rows.push(row);
    }
    Ok(blocks)
}
