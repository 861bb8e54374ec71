//! Fixed-column PDB reader that extracts one alpha-carbon per residue.

use crate::error::{Error, ParseErrorKind, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalphaResidue {
    pub residue_number: i64,
    pub coord: [f64; 3],
}

/// Alpha-carbon coordinates of one chain, in ångströms, ordered by
/// strictly increasing residue number.
#[derive(Debug, Clone, PartialEq)]
pub struct CalphaTrace {
    pub chain: String,
    pub residues: Vec<CalphaResidue>,
}

impl CalphaTrace {
    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }
}

fn field(line: &str, start: usize, end: usize) -> &str {
    &line[start.min(line.len())..end.min(line.len())]
}

fn coordinate(line_no: usize, line: &str, start: usize, end: usize) -> Result<f64> {
    let raw = field(line, start, end).trim();
    let value: f64 = raw.parse().map_err(|_| {
        Error::parse(
            line_no,
            ParseErrorKind::MalformedField {
                field: "coordinate",
                value: raw.to_string(),
            },
        )
    })?;
    if !value.is_finite() {
        return Err(Error::parse(line_no, ParseErrorKind::NonFinite));
    }
    Ok(value)
}

/// Reads the CA atoms of `chain` from the first model.
///
/// The first CA seen for a residue number wins, so alternate locations and
/// insertion-code residues sharing a number are dropped. Residue numbers
/// that go backwards are an error.
pub fn parse_structure(text: &str, chain: &str) -> Result<CalphaTrace> {
    let chain = chain.trim();
    let mut residues: Vec<CalphaResidue> = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.starts_with("ENDMDL") {
            break;
        }
        if !line.starts_with("ATOM  ") {
            continue;
        }
        if !line.is_ascii() || line.len() < 54 {
            return Err(Error::parse(
                line_no,
                ParseErrorKind::Other("ATOM record shorter than 54 columns".into()),
            ));
        }
        if field(line, 12, 16).trim() != "CA" || field(line, 21, 22).trim() != chain {
            continue;
        }
        let raw_number = field(line, 22, 26).trim();
        let residue_number: i64 = raw_number.parse().map_err(|_| {
            Error::parse(
                line_no,
                ParseErrorKind::MalformedField {
                    field: "residue number",
                    value: raw_number.to_string(),
                },
            )
        })?;
        let coord = [
            coordinate(line_no, line, 30, 38)?,
            coordinate(line_no, line, 38, 46)?,
            coordinate(line_no, line, 46, 54)?,
        ];
        match residues.last() {
            Some(last) if last.residue_number == residue_number => continue,
            Some(last) if last.residue_number > residue_number => {
                return Err(Error::parse(
                    line_no,
                    ParseErrorKind::NonMonotonicResidue(residue_number),
                ));
            }
            _ => residues.push(CalphaResidue {
                residue_number,
                coord,
            }),
        }
    }

    if residues.is_empty() {
        return Err(Error::EmptyTrace(chain.to_string()));
    }
    Ok(CalphaTrace {
        chain: chain.to_string(),
        residues,
    })
}

/// Formats a minimal ATOM record for a CA atom.
pub fn format_ca_record(serial: usize, chain: &str, residue_number: i64, coord: [f64; 3]) -> String {
    format!(
        "ATOM  {serial:>5}  CA  ALA {chain:1}{residue_number:>4}    {:>8.3}{:>8.3}{:>8.3}  1.00  0.00           C",
        coord[0], coord[1], coord[2]
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pdb(records: &[(&str, i64, [f64; 3])]) -> String {
        records
            .iter()
            .enumerate()
            .map(|(i, (c, n, xyz))| format_ca_record(i + 1, c, *n, *xyz) + "\n")
            .collect()
    }

    #[test]
    fn minimal_trace() {
        let text = pdb(&[("A", 1, [0.0, 0.0, 0.0]), ("A", 2, [0.0, 0.0, 9.9])]);
        let trace = parse_structure(&text, "A").unwrap();
        assert_eq!(trace.len(), 2);
        assert_eq!(trace.residues[1].coord, [0.0, 0.0, 9.9]);
        assert_eq!(trace.residues[1].residue_number, 2);
    }

    #[test]
    fn chain_filter() {
        let text = pdb(&[
            ("A", 1, [0.0, 0.0, 0.0]),
            ("B", 1, [1.0, 0.0, 0.0]),
            ("B", 2, [2.0, 0.0, 0.0]),
        ]);
        let trace = parse_structure(&text, "B").unwrap();
        assert_eq!(trace.len(), 2);
        assert_eq!(trace.residues[0].coord[0], 1.0);
        assert!(matches!(parse_structure(&text, "C"), Err(Error::EmptyTrace(_))));
    }

    #[test]
    fn first_model_only() {
        let model = pdb(&[("A", 1, [0.0, 0.0, 0.0]), ("A", 2, [3.8, 0.0, 0.0])]);
        let single = parse_structure(&model, "A").unwrap();
        let shifted = pdb(&[("A", 1, [5.0, 0.0, 0.0]), ("A", 2, [8.8, 0.0, 0.0])]);
        let two_models = format!("MODEL        1\n{model}ENDMDL\nMODEL        2\n{shifted}ENDMDL\nEND\n");
        let trace = parse_structure(&two_models, "A").unwrap();
        assert_eq!(trace.len(), single.len());
        assert_eq!(trace, single);
    }

    #[test]
    fn skips_non_ca_and_altlocs() {
        let mut text = String::new();
        text.push_str("HEADER    TEST\n");
        text.push_str("ATOM      1  N   ALA A   1       0.000   0.000   0.000  1.00  0.00           N\n");
        text.push_str("ATOM      2  CA AALA A   1       1.000   0.000   0.000  0.50  0.00           C\n");
        text.push_str("ATOM      3  CA BALA A   1       1.100   0.000   0.000  0.50  0.00           C\n");
        text.push_str("HETATM    4 CA    CA A 101       9.000   9.000   9.000  1.00  0.00          CA\n");
        let trace = parse_structure(&text, "A").unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.residues[0].coord[0], 1.0);
    }

    #[test]
    fn malformed_coordinates_report_line() {
        let text = "ATOM      1  CA  ALA A   1       abc     0.000   0.000  1.00  0.00           C\n";
        assert!(matches!(parse_structure(text, "A"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_structure("ATOM      1  CA  ALA A   1\n", "A"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn decreasing_residue_numbers_rejected() {
        let text = pdb(&[("A", 5, [0.0; 3]), ("A", 4, [1.0, 0.0, 0.0])]);
        assert!(matches!(
            parse_structure(&text, "A"),
            Err(Error::Parse { line: 2, kind: ParseErrorKind::NonMonotonicResidue(4) })
        ));
    }
}
