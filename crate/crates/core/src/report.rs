//! Deterministic TSV and SVG outputs, plus readers for the TSVs that later
//! subcommands consume.

use std::fmt::Write as _;

use crate::contacts::{ConcordanceReport, ContactMap};
use crate::cpd::{CpdComparison, CpdStatus};
use crate::error::{Error, ParseErrorKind, Result};
use crate::model::{ClinicalSignificance, VariantKey, VariantRecord};
use crate::parse::{parse_frequency, parse_key, Tsv};
use crate::rescue::RescueMatrix;
use crate::scoring::{AgreementReport, GroupComparison, ScoredVariant, StratumSummary};
use crate::stats::UTestResult;

pub const SCORED_VARIANT_COLUMNS: [&str; 9] = [
    "gene",
    "position",
    "wt",
    "mut",
    "significance",
    "allele_frequency",
    "raw_score",
    "normalized_score",
    "scorer_id",
];

const NA: &str = "NA";

/// Formats a float with 9 significant digits in the style of C's `%.9g`.
/// NaN becomes `NA`; negative zero prints as `0`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return NA.to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_float(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), format_float)
}

fn push_row<I, S>(out: &mut String, fields: I)
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut first = true;
    for f in fields {
        if !first {
            out.push('\t');
        }
        out.push_str(f.as_ref());
        first = false;
    }
    out.push('\n');
}

pub fn write_scored_variants(scored: &[ScoredVariant]) -> String {
    let mut out = String::new();
    push_row(&mut out, SCORED_VARIANT_COLUMNS);
    for s in scored {
        let v = &s.variant;
        push_row(
            &mut out,
            [
                v.gene_symbol.clone(),
                v.position.to_string(),
                v.wt.to_string(),
                v.mut_.to_string(),
                v.significance.label().to_string(),
                opt_float(v.allele_frequency),
                format_float(s.raw_score),
                format_float(s.normalized_score),
                s.scorer_id.clone(),
            ],
        );
    }
    out
}

fn malformed(line: usize, field: &'static str, value: &str) -> Error {
    Error::parse(
        line,
        ParseErrorKind::MalformedField {
            field,
            value: value.to_string(),
        },
    )
}

fn parse_float(line: usize, field: &'static str, value: &str) -> Result<f64> {
    value.parse().map_err(|_| malformed(line, field, value))
}

/// Reads a `scored_variants.tsv` file back.
pub fn parse_scored_variants(text: &str) -> Result<Vec<ScoredVariant>> {
    let tsv = Tsv::parse(text)?;
    let idx = (
        tsv.column("gene")?,
        tsv.column("position")?,
        tsv.column("wt")?,
        tsv.column("mut")?,
    );
    let sig = tsv.column("significance")?;
    let af = tsv.column("allele_frequency")?;
    let raw = tsv.column("raw_score")?;
    let norm = tsv.column("normalized_score")?;
    let id = tsv.column("scorer_id")?;
    tsv.rows()
        .iter()
        .map(|(line, f)| {
            let key = parse_key(*line, f, idx)?;
            let significance: ClinicalSignificance = f[sig]
                .parse()
                .map_err(|v| Error::parse(*line, ParseErrorKind::UnknownSignificance(v)))?;
            let mut variant = VariantRecord::new(key.gene, key.position, key.wt, key.mut_, significance);
            variant.allele_frequency = match f[af] {
                NA | "" => None,
                v => Some(parse_frequency(*line, v)?),
            };
            Ok(ScoredVariant {
                variant,
                raw_score: parse_float(*line, "raw_score", f[raw])?,
                normalized_score: parse_float(*line, "normalized_score", f[norm])?,
                scorer_id: f[id].to_string(),
            })
        })
        .collect()
}

/// Agreement between scorers `a` and `b`; `Err` carries the reason the
/// correlations are undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementRow {
    pub scorer_a: String,
    pub scorer_b: String,
    pub outcome: std::result::Result<AgreementReport, String>,
}

/// Long-format agreement table: one metric per row.
pub fn write_agreement(rows: &[AgreementRow]) -> String {
    let mut out = String::new();
    push_row(&mut out, ["scorer_a", "scorer_b", "subset", "n", "metric", "value"]);
    for r in rows {
        let mut row = |subset: &str, n: String, metric: &str, value: String| {
            push_row(&mut out, [&r.scorer_a, &r.scorer_b, subset, &n, metric, &value]);
        };
        let report = match &r.outcome {
            Ok(report) => report,
            Err(reason) => {
                row("all", NA.into(), "notice", reason.clone());
                continue;
            }
        };
        let n = report.n.to_string();
        row("all", n.clone(), "pearson_normalized", format_float(report.pearson_r));
        row("all", n.clone(), "pearson_raw", format_float(report.pearson_raw));
        row("all", n.clone(), "spearman_raw", format_float(report.spearman_rho));
        row("all", n, "n_unmatched", report.n_unmatched.to_string());
        for (sig, sub) in &report.per_significance {
            row(sig.label(), sub.n.to_string(), "pearson_normalized", opt_float(sub.pearson_normalized));
            row(sig.label(), sub.n.to_string(), "pearson_raw", opt_float(sub.pearson_raw));
        }
    }
    out
}

/// Per-cell summaries, grouped by scorer id.
pub fn write_stratified(groups: &[(String, Vec<StratumSummary>)]) -> String {
    let mut out = String::new();
    push_row(&mut out, ["scorer_id", "significance", "frequency_bin", "count", "mean", "median"]);
    for (scorer, cells) in groups {
        for c in cells {
        push_row(
            &mut out,
            [
                scorer.clone(),
                c.significance.label().to_string(),
                c.bin.to_string(),
                c.count.to_string(),
                opt_float(c.mean),
                opt_float(c.median),
            ],
        );
        }
    }
    out
}

fn test_fields(test: Option<&UTestResult>) -> [String; 4] {
    match test {
        Some(t) => [
            format_float(t.u1),
            format_float(t.z_approx),
            format_float(t.p_two_sided),
            t.method.label().to_string(),
        ],
        None => [NA.into(), NA.into(), NA.into(), NA.into()],
    }
}

/// P/LP versus B/LB rank tests, one row per (scorer, cell).
pub fn write_significance_tests(groups: &[(String, Vec<GroupComparison>)]) -> String {
    let mut out = String::new();
    push_row(
        &mut out,
        [
            "scorer_id",
            "cell",
            "n_pathogenic",
            "n_benign",
            "u_pathogenic",
            "z_approx",
            "p_two_sided",
            "method",
            "notice",
        ],
    );
    for (scorer, rows) in groups {
        for r in rows {
            let mut fields = vec![
                scorer.clone(),
                r.cell.clone(),
                r.n_pathogenic.to_string(),
                r.n_benign.to_string(),
            ];
            fields.extend(test_fields(r.test.as_ref()));
            fields.push(r.notice.clone().unwrap_or_else(|| NA.into()));
            push_row(&mut out, fields);
        }
    }
    out
}

fn write_labeled_matrix(labels: &[String], rows: &[Vec<f64>], corner: &str) -> String {
    let width = rows.first().map_or(0, Vec::len);
    let mut out = String::new();
    push_row(
        &mut out,
        std::iter::once(corner.to_string()).chain((1..=width).map(|j| j.to_string())),
    );
    for (label, row) in labels.iter().zip(rows) {
        push_row(
            &mut out,
            std::iter::once(label.clone()).chain(row.iter().map(|v| format_float(*v))),
        );
    }
    out
}

fn background_labels(rescue: &RescueMatrix) -> Vec<String> {
    rescue.backgrounds().iter().map(VariantRecord::label).collect()
}

/// Per-position mean secondary scores, rows labeled `GENE:posWT>MUT`.
pub fn write_rescue_matrix(rescue: &RescueMatrix) -> String {
    write_labeled_matrix(&background_labels(rescue), rescue.values(), "background")
}

pub fn write_rescue_zscores(rescue: &RescueMatrix) -> String {
    write_labeled_matrix(&background_labels(rescue), rescue.z_values(), "background")
}

/// Rows of a rescue matrix file: background keys and values.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    pub backgrounds: Vec<VariantKey>,
    pub rows: Vec<Vec<f64>>,
}

fn parse_label(line: usize, label: &str) -> Result<VariantKey> {
    let bad = || malformed(line, "background", label);
    let (gene, rest) = label.rsplit_once(':').ok_or_else(bad)?;
    let (left, mut_) = rest.split_once('>').ok_or_else(bad)?;
    let wt = left.chars().last().ok_or_else(bad)?;
    let position = &left[..left.len() - wt.len_utf8()];
    parse_key(line, &[gene, position, &wt.to_string(), mut_], (0, 1, 2, 3))
}

/// Reads `rescue_matrix.tsv` or `rescue_zscores.tsv`.
pub fn parse_rescue_table(text: &str) -> Result<LabeledMatrix> {
    let tsv = Tsv::parse(text)?;
    for (j, name) in tsv.columns().iter().enumerate().skip(1) {
        if name.parse::<usize>().ok() != Some(j) {
            return Err(malformed(1, "position", name));
        }
    }
    let mut backgrounds = Vec::new();
    let mut rows = Vec::new();
    for (line, fields) in tsv.rows() {
        backgrounds.push(parse_label(*line, fields[0])?);
        rows.push(
            fields[1..]
                .iter()
                .map(|v| parse_float(*line, "value", v))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if rows.is_empty() {
        return Err(Error::EmptyBackgroundSet);
    }
    Ok(LabeledMatrix { backgrounds, rows })
}

/// 0/1 contact matrix; unresolved rows and columns are `NA`.
pub fn write_contact_map(map: &ContactMap) -> String {
    let n = map.size();
    let mut out = String::new();
    push_row(
        &mut out,
        std::iter::once("position".to_string()).chain((1..=n).map(|j| j.to_string())),
    );
    for i in 1..=n {
        push_row(
            &mut out,
            std::iter::once(i.to_string()).chain((1..=n).map(|j| match map.contact(i, j) {
                Some(true) => "1".to_string(),
                Some(false) => "0".to_string(),
                None => NA.to_string(),
            })),
        );
    }
    out
}

/// Concordance summary. When the statistic is undefined (for example all
/// pairs fall in one class) the numeric fields are `NA` and the reason is
/// given as a notice.
pub fn write_concordance(
    outcome: &std::result::Result<ConcordanceReport, String>,
    min_separation: usize,
    threshold: f64,
    signed: bool,
) -> String {
    let mut out = String::new();
    push_row(
        &mut out,
        [
            "statistic",
            "score",
            "auc",
            "u_contact",
            "z_approx",
            "p_two_sided",
            "method",
            "n_pairs",
            "n_contact",
            "min_separation",
            "threshold",
            "notice",
        ],
    );
    let mut fields = vec![
        "auc+mann_whitney".to_string(),
        if signed { "z" } else { "abs_z" }.to_string(),
    ];
    match outcome {
        Ok(r) => {
            fields.push(format_float(r.auc));
            fields.extend(test_fields(Some(&r.segregation)));
            fields.push(r.n_pairs.to_string());
            fields.push(r.n_contact.to_string());
        }
        Err(_) => fields.extend(std::iter::repeat_n(NA.to_string(), 7)),
    }
    fields.push(min_separation.to_string());
    fields.push(format_float(threshold));
    fields.push(outcome.as_ref().err().cloned().unwrap_or_else(|| NA.into()));
    push_row(&mut out, fields);
    out
}

pub fn write_cpd_status(rows: &[(VariantRecord, CpdStatus)]) -> String {
    let mut out = String::new();
    push_row(
        &mut out,
        ["gene", "position", "wt", "mut", "significance", "is_cpd", "cpd_plus1", "cpd_plus2", "supporting_species"],
    );
    for (v, s) in rows {
        push_row(
            &mut out,
            [
                v.gene_symbol.clone(),
                v.position.to_string(),
                v.wt.to_string(),
                v.mut_.to_string(),
                v.significance.label().to_string(),
                s.is_cpd.to_string(),
                s.window_conserved[0].to_string(),
                s.window_conserved[1].to_string(),
                s.supporting_species.join(","),
            ],
        );
    }
    out
}

/// One row per window level; a level whose groups are empty carries the
/// error message as its notice.
pub fn write_cpd_comparison(rows: &[(usize, std::result::Result<CpdComparison, String>)]) -> String {
    let mut out = String::new();
    push_row(
        &mut out,
        [
            "window", "n_cpd", "n_non_cpd", "cpd_mean", "non_cpd_mean", "u_cpd", "z_approx", "p_two_sided", "method",
            "notice",
        ],
    );
    for (level, r) in rows {
        let mut fields = vec![level.to_string()];
        match r {
            Ok(c) => {
                fields.extend([
                    c.n_cpd.to_string(),
                    c.n_non_cpd.to_string(),
                    format_float(c.cpd_mean),
                    format_float(c.non_cpd_mean),
                ]);
                fields.extend(test_fields(Some(&c.test)));
                fields.push(NA.into());
            }
            Err(notice) => {
                fields.extend(std::iter::repeat_n(NA.to_string(), 8));
                fields.push(notice.clone());
            }
        }
        push_row(&mut out, fields);
    }
    out
}

const CELL: usize = 8;
const MARGIN_LEFT: usize = 140;
const MARGIN_TOP: usize = 30;
const LABEL_EVERY: usize = 10;
const CLIP: f64 = 3.0;

/// Diverging blue-white-red color for `v`, clipped at ±3.
pub fn heat_color(v: f64) -> String {
    const NEG: [f64; 3] = [33.0, 102.0, 172.0];
    const POS: [f64; 3] = [178.0, 24.0, 43.0];
    let t = (v / CLIP).clamp(-1.0, 1.0);
    let end = if t < 0.0 { NEG } else { POS };
    let a = t.abs();
    let c: Vec<u8> = end
        .iter()
        .map(|e| (255.0 + (e - 255.0) * a).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders a heatmap as SVG. Rows and columns are labeled every 10 cells;
/// `row_labels` may be empty to label rows by 1-based index.
pub fn heatmap_svg(matrix: &[Vec<f64>], row_labels: &[String]) -> Result<String> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyInput);
    }
    if matrix.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidArgument("heatmap rows differ in length".into()));
    }
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("heatmap values must be finite".into()));
    }
    let width = MARGIN_LEFT + cols * CELL + 10;
    let height = MARGIN_TOP + rows * CELL + 10;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="monospace" font-size="7">"#
    );
    for j in (0..cols).step_by(LABEL_EVERY) {
        let x = MARGIN_LEFT + j * CELL;
        let _ = writeln!(svg, r#"<text x="{x}" y="{}">{}</text>"#, MARGIN_TOP - 4, j + 1);
    }
    for (i, row) in matrix.iter().enumerate() {
        let y = MARGIN_TOP + i * CELL;
        if i % LABEL_EVERY == 0 {
            let label = row_labels.get(i).cloned().unwrap_or_else(|| (i + 1).to_string());
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                MARGIN_LEFT - 4,
                y + CELL - 1,
                escape(&label)
            );
        }
        for (j, v) in row.iter().enumerate() {
            let _ = writeln!(
                svg,
                r#"<rect x="{}" y="{y}" width="{CELL}" height="{CELL}" fill="{}"/>"#,
                MARGIN_LEFT + j * CELL,
                heat_color(*v)
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes the heatmap of `matrix` to `out`.
pub fn render_heatmap(matrix: &[Vec<f64>], row_labels: &[String], out: &std::path::Path) -> Result<()> {
    std::fs::write(out, heatmap_svg(matrix, row_labels)?)?;
    Ok(())
}
