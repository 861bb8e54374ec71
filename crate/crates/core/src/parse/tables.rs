//! Canonical variant and allele-frequency TSV tables.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use crate::error::{Error, ParseErrorKind, Result};
use crate::model::{aa_index, ClinicalSignificance, VariantKey, VariantRecord};

pub const VARIANT_COLUMNS: [&str; 6] = [
    "gene",
    "position",
    "wt",
    "mut",
    "significance",
    "submission_count",
];

pub const FREQUENCY_COLUMNS: [&str; 5] = ["gene", "position", "wt", "mut", "allele_frequency"];

/// Header-driven TSV reader. Columns are looked up by name; extra columns
/// are ignored. Blank lines and `#` comment lines are skipped.
pub(crate) struct Tsv<'a> {
    columns: Vec<&'a str>,
    rows: Vec<(usize, Vec<&'a str>)>,
}

impl<'a> Tsv<'a> {
    pub fn parse(text: &'a str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
            .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, ParseErrorKind::MissingColumn("header".into())))?;
        let columns: Vec<&str> = header.split('\t').map(str::trim).collect();
        let mut rows = Vec::new();
        for (line_no, line) in lines {
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != columns.len() {
                return Err(Error::parse(
                    line_no,
                    ParseErrorKind::FieldCount {
                        expected: columns.len(),
                        found: fields.len(),
                    },
                ));
            }
            rows.push((line_no, fields));
        }
        Ok(Self { columns, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::parse(1, ParseErrorKind::MissingColumn(name.into())))
    }

    pub fn optional_column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    pub fn columns(&self) -> &[&'a str] {
        &self.columns
    }

    pub fn rows(&self) -> &[(usize, Vec<&'a str>)] {
        &self.rows
    }
}

fn malformed(line: usize, field: &'static str, value: &str) -> Error {
    Error::parse(
        line,
        ParseErrorKind::MalformedField {
            field,
            value: value.into(),
        },
    )
}

pub(crate) fn parse_position(line: usize, value: &str) -> Result<usize> {
    match value.parse::<usize>() {
        Ok(p) if p >= 1 => Ok(p),
        _ => Err(malformed(line, "position", value)),
    }
}

pub(crate) fn parse_residue(line: usize, field: &'static str, value: &str) -> Result<char> {
    let mut chars = value.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if aa_index(c).is_ok() => Ok(c),
        _ => Err(malformed(line, field, value)),
    }
}

pub(crate) fn parse_gene(line: usize, value: &str) -> Result<String> {
    if value.is_empty() {
        return Err(malformed(line, "gene", value));
    }
    Ok(value.to_string())
}

pub(crate) fn parse_frequency(line: usize, value: &str) -> Result<f64> {
    let af: f64 = value
        .parse()
        .map_err(|_| malformed(line, "allele_frequency", value))?;
    if !(0.0..=1.0).contains(&af) {
        return Err(Error::parse(line, ParseErrorKind::FrequencyOutOfRange(af)));
    }
    Ok(af)
}

pub(crate) fn parse_key(
    line: usize,
    fields: &[&str],
    idx: (usize, usize, usize, usize),
) -> Result<VariantKey> {
    let key = VariantKey {
        gene: parse_gene(line, fields[idx.0])?,
        position: parse_position(line, fields[idx.1])?,
        wt: parse_residue(line, "wt", fields[idx.2])?,
        mut_: parse_residue(line, "mut", fields[idx.3])?,
    };
    if key.wt == key.mut_ {
        return Err(Error::parse(line, ParseErrorKind::IdentitySubstitution(key.wt)));
    }
    Ok(key)
}

/// Parses a variant table and resolves duplicate keys.
///
/// For rows sharing `(gene, position, wt, mut)`, the interpretation with
/// the largest submission count wins. If the top count is shared by rows
/// that disagree, the variant is recorded as VUS. Output is sorted by key,
/// so it does not depend on row order.
///
/// An optional `allele_frequency` column is carried through (`NA` or empty
/// means absent); duplicates keep the largest frequency.
pub fn parse_variant_table(text: &str) -> Result<Vec<VariantRecord>> {
    let tsv = Tsv::parse(text)?;
    let idx = (
        tsv.column("gene")?,
        tsv.column("position")?,
        tsv.column("wt")?,
        tsv.column("mut")?,
    );
    let sig_idx = tsv.column("significance")?;
    let count_idx = tsv.column("submission_count")?;
    let af_idx = tsv.optional_column("allele_frequency");

    let mut groups: BTreeMap<VariantKey, Vec<(ClinicalSignificance, u32, Option<f64>)>> =
        BTreeMap::new();
    for (line, fields) in tsv.rows() {
        let key = parse_key(*line, fields, idx)?;
        let significance = fields[sig_idx]
            .parse::<ClinicalSignificance>()
            .map_err(|s| Error::parse(*line, ParseErrorKind::UnknownSignificance(s)))?;
        let count: u32 = fields[count_idx]
            .parse()
            .map_err(|_| malformed(*line, "submission_count", fields[count_idx]))?;
        let af = match af_idx.map(|i| fields[i]) {
            None | Some("") | Some("NA") => None,
            Some(v) => Some(parse_frequency(*line, v)?),
        };
        groups.entry(key).or_default().push((significance, count, af));
    }

    Ok(groups
        .into_iter()
        .map(|(key, rows)| {
            let (significance, count) = resolve_conflict(&rows);
            let af = rows
                .iter()
                .filter_map(|r| r.2)
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
            VariantRecord {
                gene_symbol: key.gene,
                position: key.position,
                wt: key.wt,
                mut_: key.mut_,
                significance,
                submission_count: count,
                allele_frequency: af,
            }
        })
        .collect())
}

fn resolve_conflict(rows: &[(ClinicalSignificance, u32, Option<f64>)]) -> (ClinicalSignificance, u32) {
    let top = rows.iter().map(|r| r.1).max().expect("non-empty group");
    let mut leaders = rows.iter().filter(|r| r.1 == top).map(|r| r.0);
    let first = leaders.next().expect("non-empty group");
    if leaders.all(|s| s == first) {
        (first, top)
    } else {
        (ClinicalSignificance::UncertainSignificance, top)
    }
}

/// Writes variants in the canonical schema. The `allele_frequency` column
/// is emitted only when at least one record carries a frequency.
pub fn write_variant_table(records: &[VariantRecord]) -> String {
    let with_af = records.iter().any(|r| r.allele_frequency.is_some());
    let mut out = VARIANT_COLUMNS.join("\t");
    if with_af {
        out.push_str("\tallele_frequency");
    }
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.gene_symbol, r.position, r.wt, r.mut_, r.significance, r.submission_count
        ));
        if with_af {
            match r.allele_frequency {
                Some(af) => out.push_str(&format!("\t{af:e}")),
                None => out.push_str("\tNA"),
            }
        }
        out.push('\n');
    }
    out
}

/// Protein-level allele frequencies keyed by substitution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrequencyTable {
    entries: BTreeMap<VariantKey, f64>,
}

impl FrequencyTable {
    pub fn get(&self, key: &VariantKey) -> Option<f64> {
        self.entries.get(key).copied()
    }

    /// Inserts a frequency, keeping the larger value on collision.
    pub fn insert(&mut self, key: VariantKey, af: f64) {
        match self.entries.entry(key) {
            Entry::Vacant(e) => {
                e.insert(af);
            }
            Entry::Occupied(mut e) => {
                if af > *e.get() {
                    e.insert(af);
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VariantKey, f64)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }
}

/// Parses an allele-frequency table. Several nucleotide changes can encode
/// the same protein change; the most common allele is kept.
pub fn parse_frequency_table(text: &str) -> Result<FrequencyTable> {
    let tsv = Tsv::parse(text)?;
    let idx = (
        tsv.column("gene")?,
        tsv.column("position")?,
        tsv.column("wt")?,
        tsv.column("mut")?,
    );
    let af_idx = tsv.column("allele_frequency")?;
    let mut table = FrequencyTable::default();
    for (line, fields) in tsv.rows() {
        let key = parse_key(*line, fields, idx)?;
        table.insert(key, parse_frequency(*line, fields[af_idx])?);
    }
    Ok(table)
}

pub fn write_frequency_table(table: &FrequencyTable) -> String {
    let mut out = FREQUENCY_COLUMNS.join("\t");
    out.push('\n');
    for (k, af) in table.iter() {
        out.push_str(&format!("{}\t{}\t{}\t{}\t{af:e}\n", k.gene, k.position, k.wt, k.mut_));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ClinicalSignificance::*;

    const HEADER: &str = "gene\tposition\twt\tmut\tsignificance\tsubmission_count\n";

    fn table(rows: &[&str]) -> String {
        let mut s = HEADER.to_string();
        for r in rows {
            s.push_str(&r.replace(' ', "\t"));
            s.push('\n');
        }
        s
    }

    #[test]
    fn single_row() {
        let recs = parse_variant_table(&table(&["LDLR 100 R H P/LP 5"])).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].significance, PathogenicLikelyPathogenic);
        assert_eq!(recs[0].submission_count, 5);
        assert_eq!(recs[0].allele_frequency, None);
    }

    #[test]
    fn conflict_keeps_larger_submission_count() {
        for rows in [
            ["LDLR 100 R H P/LP 5", "LDLR 100 R H B/LB 2"],
            ["LDLR 100 R H B/LB 2", "LDLR 100 R H P/LP 5"],
        ] {
            let recs = parse_variant_table(&table(&rows)).unwrap();
            assert_eq!(recs.len(), 1);
            assert_eq!(recs[0].significance, PathogenicLikelyPathogenic);
            assert_eq!(recs[0].submission_count, 5);
        }
    }

    #[test]
    fn tie_resolves_to_vus_in_either_order() {
        let a = parse_variant_table(&table(&["LDLR 100 R H P/LP 3", "LDLR 100 R H B/LB 3"])).unwrap();
        let b = parse_variant_table(&table(&["LDLR 100 R H B/LB 3", "LDLR 100 R H P/LP 3"])).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].significance, UncertainSignificance);
    }

    #[test]
    fn agreeing_duplicates_collapse() {
        let recs = parse_variant_table(&table(&["G 1 A C B/LB 3", "G 1 A C B/LB 3", "G 2 A C VUS 0"])).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].significance, BenignLikelyBenign);
    }

    #[test]
    fn variant_errors() {
        let err = |rows: &[&str]| match parse_variant_table(&table(rows)).unwrap_err() {
            Error::Parse { line, kind } => (line, kind),
            e => panic!("{e:?}"),
        };
        assert_eq!(
            err(&["G 1 A C Pathogenic 1"]),
            (2, ParseErrorKind::UnknownSignificance("Pathogenic".into()))
        );
        assert!(matches!(err(&["G x A C VUS 1"]).1, ParseErrorKind::MalformedField { field: "position", .. }));
        assert!(matches!(err(&["G 0 A C VUS 1"]).1, ParseErrorKind::MalformedField { field: "position", .. }));
        assert_eq!(err(&["G 1 A A VUS 1"]).1, ParseErrorKind::IdentitySubstitution('A'));
        assert!(matches!(err(&["G 1 A X VUS 1"]).1, ParseErrorKind::MalformedField { field: "mut", .. }));
        assert!(matches!(err(&["G 1 A C VUS"]).1, ParseErrorKind::FieldCount { expected: 6, found: 5 }));
        assert!(matches!(
            parse_variant_table("gene\tposition\n").unwrap_err(),
            Error::Parse { kind: ParseErrorKind::MissingColumn(_), .. }
        ));
    }

    #[test]
    fn frequency_examples() {
        let text = "gene\tposition\twt\tmut\tallele_frequency\nG\t5\tR\tH\t1e-5\nG\t5\tR\tH\t3E-5\nG\t6\tA\tC\t0.0\n";
        let t = parse_frequency_table(text).unwrap();
        let key = |p, wt, m| VariantKey { gene: "G".into(), position: p, wt, mut_: m };
        assert_eq!(t.get(&key(5, 'R', 'H')), Some(3e-5));
        assert_eq!(t.get(&key(6, 'A', 'C')), Some(0.0));
        assert_eq!(t.len(), 2);

        let bad = "gene\tposition\twt\tmut\tallele_frequency\nG\t5\tR\tH\t1.5\n";
        assert!(matches!(
            parse_frequency_table(bad).unwrap_err(),
            Error::Parse { line: 2, kind: ParseErrorKind::FrequencyOutOfRange(_) }
        ));
        let bad = "gene\tposition\twt\tmut\tallele_frequency\nG\t5\tR\tH\tabc\n";
        assert!(parse_frequency_table(bad).is_err());
    }

    fn variant_strategy() -> impl Strategy<Value = VariantRecord> {
        (
            prop::sample::select(vec!["LDLR", "BAG3", "TP53"]),
            1usize..500,
            0usize..20,
            1usize..20,
            prop::sample::select(ClinicalSignificance::ALL.to_vec()),
            0u32..50,
            prop::option::of(0.0f64..=1.0),
        )
            .prop_map(|(g, pos, wt, shift, sig, count, af)| VariantRecord {
                gene_symbol: g.into(),
                position: pos,
                wt: crate::model::aa_letter(wt),
                mut_: crate::model::aa_letter((wt + shift) % 20),
                significance: sig,
                submission_count: count,
                allele_frequency: af,
            })
    }

    proptest! {
        #[test]
        fn canonical_round_trip(records in proptest::collection::vec(variant_strategy(), 0..30)) {
            let parsed = parse_variant_table(&write_variant_table(&records)).unwrap();
            let again = parse_variant_table(&write_variant_table(&parsed)).unwrap();
            prop_assert_eq!(&parsed, &again);
        }

        #[test]
        fn variant_table_independent_of_row_order(
            records in proptest::collection::vec(variant_strategy(), 1..12),
            seed in any::<u64>(),
        ) {
            let text = write_variant_table(&records);
            let mut lines: Vec<&str> = text.lines().collect();
            let header = lines.remove(0);
            let n = lines.len();
            for i in 0..n {
                lines.swap(i, (seed as usize).wrapping_add(i * 7) % n);
            }
            let shuffled = format!("{header}\n{}\n", lines.join("\n"));
            prop_assert_eq!(parse_variant_table(&text).unwrap(), parse_variant_table(&shuffled).unwrap());
        }

        #[test]
        fn frequency_round_trip(entries in proptest::collection::vec((variant_strategy(), 0.0f64..=1.0), 0..30)) {
            let mut t = FrequencyTable::default();
            for (v, af) in entries {
                t.insert(v.key(), af);
            }
            prop_assert_eq!(parse_frequency_table(&write_frequency_table(&t)).unwrap(), t);
        }
    }
}
