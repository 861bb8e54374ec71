use std::collections::HashSet;

use crate::error::{Error, ParseErrorKind, Result};
use crate::model::{is_canonical, SequenceRecord};

pub(crate) struct RawRecord {
    pub id: String,
    pub sequence: String,
    pub header_line: usize,
}

/// Shared reader for plain and aligned FASTA. `map_residue` receives the
/// uppercased character and returns the stored residue, or `None` to reject it.
pub(crate) fn read_records(
    text: &str,
    map_residue: impl Fn(char) -> Option<char>,
) -> Result<Vec<RawRecord>> {
    let mut records: Vec<RawRecord> = Vec::new();
    let mut seen = HashSet::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim_end();
        if let Some(header) = line.strip_prefix('>') {
            finish(&records)?;
            let id = header
                .split_whitespace()
                .next()
                .ok_or_else(|| Error::parse(line_no, ParseErrorKind::EmptyHeader))?;
            if !seen.insert(id.to_string()) {
                return Err(Error::parse(line_no, ParseErrorKind::DuplicateId(id.into())));
            }
            records.push(RawRecord {
                id: id.to_string(),
                sequence: String::new(),
                header_line: line_no,
            });
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let record = records
            .last_mut()
            .ok_or_else(|| Error::parse(line_no, ParseErrorKind::MissingHeader))?;
        for c in line.chars().filter(|c| !c.is_whitespace()) {
            let mapped = map_residue(c.to_ascii_uppercase())
                .ok_or_else(|| Error::parse(line_no, ParseErrorKind::InvalidCharacter(c)))?;
            record.sequence.push(mapped);
        }
    }
    finish(&records)?;
    Ok(records)
}

fn finish(records: &[RawRecord]) -> Result<()> {
    match records.last() {
        Some(r) if r.sequence.is_empty() => Err(Error::parse(
            r.header_line,
            ParseErrorKind::EmptyRecord(r.id.clone()),
        )),
        _ => Ok(()),
    }
}

/// Parses protein FASTA. Sequences are uppercased and must use only the 20
/// canonical residues.
pub fn parse_fasta(text: &str) -> Result<Vec<SequenceRecord>> {
    let records = read_records(text, |c| is_canonical(c).then_some(c))?;
    Ok(records
        .into_iter()
        .map(|r| SequenceRecord::new(r.id, r.sequence))
        .collect())
}

/// Writes records as FASTA with 60-column lines.
pub fn write_fasta(records: &[SequenceRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push('>');
        out.push_str(&record.id);
        out.push('\n');
        let bytes = record.sequence.as_bytes();
        for chunk in bytes.chunks(60) {
            out.push_str(std::str::from_utf8(chunk).expect("ascii sequence"));
            out.push('\n');
        }
    }
    out
}
