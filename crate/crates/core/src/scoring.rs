//! Wild-type-marginal variant scores, their normalization, frequency
//! stratification and cross-scorer agreement.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{aa_index, ClinicalSignificance, ProteinRecord, VariantKey, VariantRecord};
use crate::parse::FrequencyTable;
use crate::scorer::{LogitsMatrix, Scorer};
use crate::stats::{self, mann_whitney_u, UTestResult};

/// Decade bins used when none are configured.
pub const DEFAULT_BIN_EDGES: [f64; 4] = [1e-5, 1e-4, 1e-3, 1e-2];

/// `log p(mut) − log p(wt)` at 1-based `position`.
pub fn wt_marginal(logits: &LogitsMatrix, position: usize, wt: char, mut_: char) -> Result<f64> {
    if position == 0 || position > logits.len() {
        return Err(Error::PositionOutOfRange {
            position,
            length: logits.len(),
        });
    }
    let found = logits.residue(position - 1);
    if found != wt {
        return Err(Error::ReferenceMismatch {
            position,
            expected: wt,
            found,
        });
    }
    let row = logits.row(position - 1);
    Ok(row[aa_index(mut_)?] - row[aa_index(wt)?])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredVariant {
    pub variant: VariantRecord,
    pub raw_score: f64,
    pub normalized_score: f64,
    pub scorer_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSet {
    pub scored: Vec<ScoredVariant>,
    /// Raw scores had zero spread, so every normalized score is 0.
    pub constant: bool,
}

/// Scores variants against precomputed wild-type logits without normalizing.
pub fn score_with_logits(
    logits: &LogitsMatrix,
    scorer_id: &str,
    protein: &ProteinRecord,
    variants: &[VariantRecord],
) -> Result<Vec<ScoredVariant>> {
    variants
        .iter()
        .map(|v| {
            v.validate_against(protein)?;
            Ok(ScoredVariant {
                variant: v.clone(),
                raw_score: wt_marginal(logits, v.position, v.wt, v.mut_)?,
                normalized_score: 0.0,
                scorer_id: scorer_id.to_string(),
            })
        })
        .collect()
}

/// Replaces normalized scores with population z-scores of the raw scores.
/// Returns `true` when the raw scores were constant.
pub fn normalize(scored: &mut [ScoredVariant]) -> bool {
    let raw: Vec<f64> = scored.iter().map(|s| s.raw_score).collect();
    let z = stats::zscore(&raw);
    for (s, v) in scored.iter_mut().zip(z.values) {
        s.normalized_score = v;
    }
    if z.constant && !scored.is_empty() {
        log::warn!("raw scores have zero spread; normalized scores set to 0");
    }
    z.constant
}

/// Scores `variants` from one pass over the wild-type protein, then
/// z-normalizes over the set. Output order matches input order.
pub fn score_variant_set(
    scorer: &dyn Scorer,
    protein: &ProteinRecord,
    variants: &[VariantRecord],
) -> Result<ScoredSet> {
    for v in variants {
        v.validate_against(protein)?;
    }
    let logits = scorer.score(&protein.to_sequence_record())?;
    let mut scored = score_with_logits(&logits, scorer.id(), protein, variants)?;
    let constant = normalize(&mut scored);
    Ok(ScoredSet { scored, constant })
}

/// Left-closed allele-frequency interval, or no frequency on record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrequencyBin {
    Range { index: usize, lo: f64, hi: f64 },
    Absent,
}

fn fmt_edge(v: f64) -> String {
    if v == 0.0 || v == 1.0 {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl fmt::Display for FrequencyBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrequencyBin::Range { lo, hi, .. } if *hi == 1.0 => {
                write!(f, "[{},{}]", fmt_edge(*lo), fmt_edge(*hi))
            }
            FrequencyBin::Range { lo, hi, .. } => write!(f, "[{},{})", fmt_edge(*lo), fmt_edge(*hi)),
            FrequencyBin::Absent => f.write_str("absent"),
        }
    }
}

/// Validated, strictly increasing interior bin edges in (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct BinEdges(Vec<f64>);

impl BinEdges {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::InvalidArgument(format!("bin edges must lie in (0, 1): {edges:?}")));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!("bin edges must increase: {edges:?}")));
        }
        Ok(Self(edges))
    }

    pub fn edges(&self) -> &[f64] {
        &self.0
    }

    /// All range bins followed by [`FrequencyBin::Absent`].
    pub fn bins(&self) -> Vec<FrequencyBin> {
        let mut bounds = vec![0.0];
        bounds.extend_from_slice(&self.0);
        bounds.push(1.0);
        let mut bins: Vec<FrequencyBin> = bounds
            .windows(2)
            .enumerate()
            .map(|(index, w)| FrequencyBin::Range {
                index,
                lo: w[0],
                hi: w[1],
            })
            .collect();
        bins.push(FrequencyBin::Absent);
        bins
    }

    pub fn bin_of(&self, af: Option<f64>) -> FrequencyBin {
        let Some(af) = af else {
            return FrequencyBin::Absent;
        };
        let index = self.0.iter().take_while(|&&e| e <= af).count();
        let lo = if index == 0 { 0.0 } else { self.0[index - 1] };
        let hi = self.0.get(index).copied().unwrap_or(1.0);
        FrequencyBin::Range { index, lo, hi }
    }
}

impl Default for BinEdges {
    fn default() -> Self {
        Self(DEFAULT_BIN_EDGES.to_vec())
    }
}

/// Summary of normalized scores in one (significance, frequency bin) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumSummary {
    pub significance: ClinicalSignificance,
    pub bin: FrequencyBin,
    pub count: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
}

fn cell_scores(
    scored: &[ScoredVariant],
    freq: &FrequencyTable,
    edges: &BinEdges,
    significance: ClinicalSignificance,
    bin: FrequencyBin,
) -> Vec<f64> {
    scored
        .iter()
        .filter(|s| s.variant.significance == significance)
        .filter(|s| edges.bin_of(freq.get(&s.variant.key())) == bin)
        .map(|s| s.normalized_score)
        .collect()
}

/// Partitions scored variants into significance × frequency-bin cells. Every
/// cell is reported, empty ones with `count == 0`.
pub fn stratify_by_frequency(
    scored: &[ScoredVariant],
    freq: &FrequencyTable,
    edges: &BinEdges,
) -> Vec<StratumSummary> {
    let mut out = Vec::new();
    for significance in ClinicalSignificance::ALL {
        for bin in edges.bins() {
            let values = cell_scores(scored, freq, edges, significance, bin);
            out.push(StratumSummary {
                significance,
                bin,
                count: values.len(),
                mean: stats::mean_of(&values),
                median: stats::median(&values),
            });
        }
    }
    out
}

/// P/LP versus B/LB rank test in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupComparison {
    pub cell: String,
    pub n_pathogenic: usize,
    pub n_benign: usize,
    /// Sample 1 is P/LP. `None` when a group is empty.
    pub test: Option<UTestResult>,
    pub notice: Option<String>,
}

fn compare_cell(cell: String, pathogenic: &[f64], benign: &[f64]) -> GroupComparison {
    let (test, notice) = if pathogenic.is_empty() || benign.is_empty() {
        log::info!("skipping significance comparison for cell {cell}: empty group");
        (None, Some("empty group".to_string()))
    } else {
        (mann_whitney_u(pathogenic, benign).ok(), None)
    };
    GroupComparison {
        cell,
        n_pathogenic: pathogenic.len(),
        n_benign: benign.len(),
        test,
        notice,
    }
}

/// Two-sided Mann-Whitney U of P/LP against B/LB normalized scores, either
/// over the whole set (`grouping == None`, cell `all`) or per frequency bin.
pub fn compare_significance_groups(
    scored: &[ScoredVariant],
    grouping: Option<(&FrequencyTable, &BinEdges)>,
) -> Vec<GroupComparison> {
    use ClinicalSignificance::*;
    match grouping {
        None => {
            let group = |sig| -> Vec<f64> {
                scored
                    .iter()
                    .filter(|s| s.variant.significance == sig)
                    .map(|s| s.normalized_score)
                    .collect()
            };
            vec![compare_cell(
                "all".into(),
                &group(PathogenicLikelyPathogenic),
                &group(BenignLikelyBenign),
            )]
        }
        Some((freq, edges)) => edges
            .bins()
            .into_iter()
            .map(|bin| {
                compare_cell(
                    bin.to_string(),
                    &cell_scores(scored, freq, edges, PathogenicLikelyPathogenic, bin),
                    &cell_scores(scored, freq, edges, BenignLikelyBenign, bin),
                )
            })
            .collect(),
    }
}

/// Agreement within one significance class.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetAgreement {
    pub n: usize,
    pub pearson_normalized: Option<f64>,
    pub pearson_raw: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport {
    /// Pearson correlation of normalized scores.
    pub pearson_r: f64,
    /// Pearson correlation of raw scores.
    pub pearson_raw: f64,
    /// Spearman correlation of raw scores.
    pub spearman_rho: f64,
    pub per_significance: BTreeMap<ClinicalSignificance, SubsetAgreement>,
    pub n: usize,
    /// Entries of either input without a partner.
    pub n_unmatched: usize,
}

/// Matches two scored sets on (gene, position, wt, mut) and correlates them.
/// Pairs are processed in key order, so swapping the inputs gives identical
/// correlations. Per-class subsets use the first input's significance.
pub fn compare_scorers(a: &[ScoredVariant], b: &[ScoredVariant]) -> Result<AgreementReport> {
    let index_a: BTreeMap<VariantKey, &ScoredVariant> =
        a.iter().rev().map(|s| (s.variant.key(), s)).collect();
    let index_b: BTreeMap<VariantKey, &ScoredVariant> =
        b.iter().rev().map(|s| (s.variant.key(), s)).collect();
    let pairs: Vec<(&ScoredVariant, &ScoredVariant)> = index_a
        .iter()
        .filter_map(|(k, sa)| index_b.get(k).map(|sb| (*sa, *sb)))
        .collect();
    let n = pairs.len();
    let n_unmatched = (a.len() - n) + (b.len() - n);
    if n_unmatched > 0 {
        log::info!("{n_unmatched} scored variants without a partner were dropped");
    }
    if n < 3 {
        return Err(Error::InsufficientData(format!("{n} matched pairs, need at least 3")));
    }
    let column = |f: &dyn Fn(&(&ScoredVariant, &ScoredVariant)) -> f64, subset: &[_]| -> Vec<f64> {
        subset.iter().map(f).collect()
    };
    let norm_a = |p: &(&ScoredVariant, &ScoredVariant)| p.0.normalized_score;
    let norm_b = |p: &(&ScoredVariant, &ScoredVariant)| p.1.normalized_score;
    let raw_a = |p: &(&ScoredVariant, &ScoredVariant)| p.0.raw_score;
    let raw_b = |p: &(&ScoredVariant, &ScoredVariant)| p.1.raw_score;

    let pearson_r = stats::pearson(&column(&norm_a, &pairs), &column(&norm_b, &pairs))?;
    let pearson_raw = stats::pearson(&column(&raw_a, &pairs), &column(&raw_b, &pairs))?;
    let spearman_rho = stats::spearman(&column(&raw_a, &pairs), &column(&raw_b, &pairs))?;

    let mut per_significance = BTreeMap::new();
    for sig in ClinicalSignificance::ALL {
        let subset: Vec<_> = pairs
            .iter()
            .filter(|p| p.0.variant.significance == sig)
            .copied()
            .collect();
        per_significance.insert(
            sig,
            SubsetAgreement {
                n: subset.len(),
                pearson_normalized: stats::pearson(&column(&norm_a, &subset), &column(&norm_b, &subset)).ok(),
                pearson_raw: stats::pearson(&column(&raw_a, &subset), &column(&raw_b, &subset)).ok(),
            },
        );
    }

    Ok(AgreementReport {
        pearson_r,
        pearson_raw,
        spearman_rho,
        per_significance,
        n,
        n_unmatched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ALPHABET_SIZE, SequenceRecord};
    use crate::parse::parse_msa;
    use crate::scorer::{PssmScorer, UniformScorer};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use ClinicalSignificance::*;

    fn v(pos: usize, wt: char, mut_: char, sig: ClinicalSignificance) -> VariantRecord {
        VariantRecord::new("G", pos, wt, mut_, sig)
    }

    fn sv(raw: f64, norm: f64, sig: ClinicalSignificance, pos: usize) -> ScoredVariant {
        ScoredVariant {
            variant: v(pos, 'A', 'C', sig),
            raw_score: raw,
            normalized_score: norm,
            scorer_id: "t".into(),
        }
    }

    #[test]
    fn wt_marginal_examples() {
        let uniform = LogitsMatrix::uniform("s", "ACD").unwrap();
        assert_eq!(wt_marginal(&uniform, 2, 'C', 'W').unwrap(), 0.0);

        let mut row = [(0.5f64 / 19.0).ln(); ALPHABET_SIZE];
        row[aa_index('C').unwrap()] = 0.5f64.ln();
        let peaked = LogitsMatrix::from_normalized("s", "C", vec![row]).unwrap();
        for mut_ in "ADEFGHIKLMNPQRSTVWY".chars() {
            assert_abs_diff_eq!(wt_marginal(&peaked, 1, 'C', mut_).unwrap(), -(19.0f64).ln(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(-(19.0f64).ln(), -2.9444, epsilon = 1e-4);
        assert_eq!(wt_marginal(&peaked, 1, 'C', 'C').unwrap(), 0.0);

        assert!(matches!(wt_marginal(&uniform, 2, 'A', 'W'), Err(Error::ReferenceMismatch { .. })));
        assert!(matches!(wt_marginal(&uniform, 4, 'A', 'W'), Err(Error::PositionOutOfRange { .. })));
    }

    #[test]
    fn uniform_set_takes_constant_path() {
        let protein = ProteinRecord::new("G", "G", "ACDEF").unwrap();
        let variants = [v(1, 'A', 'W', PathogenicLikelyPathogenic), v(3, 'D', 'K', BenignLikelyBenign)];
        let set = score_variant_set(&UniformScorer, &protein, &variants).unwrap();
        assert!(set.constant);
        assert!(set.scored.iter().all(|s| s.raw_score == 0.0 && s.normalized_score == 0.0));
        assert_eq!(set.scored[1].variant, variants[1]);
        assert_eq!(set.scored[0].scorer_id, "uniform");
    }

    #[test]
    fn pssm_set_matches_hand_value() {
        let aln = parse_msa(">human\nAR\n>m1\nAR\n>m2\nAK\n", "human").unwrap();
        let scorer = PssmScorer::new("pssm", &aln, 1.0).unwrap();
        let protein = ProteinRecord::new("G", "G", "AR").unwrap();
        let set = score_variant_set(&scorer, &protein, &[v(1, 'A', 'C', VUS_), v(2, 'R', 'K', VUS_)]).unwrap();
        assert_abs_diff_eq!(set.scored[0].raw_score, -(4.0f64).ln(), epsilon = 1e-12);
        // column 2 has R:2 K:1 -> (2/23)/(3/23)
        assert_abs_diff_eq!(set.scored[1].raw_score, (2.0f64 / 3.0).ln(), epsilon = 1e-12);
    }

    const VUS_: ClinicalSignificance = UncertainSignificance;

    #[test]
    fn two_point_normalization() {
        let mut s = vec![sv(-2.0, 0.0, VUS_, 1), sv(-4.0, 0.0, VUS_, 2)];
        assert!(!normalize(&mut s));
        assert_eq!(s[0].normalized_score, 1.0);
        assert_eq!(s[1].normalized_score, -1.0);
    }

    #[test]
    fn variant_set_rejects_foreign_variants() {
        let protein = ProteinRecord::new("G", "G", "ACD").unwrap();
        assert!(score_variant_set(&UniformScorer, &protein, &[v(2, 'A', 'W', VUS_)]).is_err());
        let mut other = v(2, 'C', 'W', VUS_);
        other.gene_symbol = "H".into();
        assert!(matches!(
            score_variant_set(&UniformScorer, &protein, &[other]),
            Err(Error::GeneMismatch { .. })
        ));
    }

    #[test]
    fn binning_rules() {
        let edges = BinEdges::new(vec![1e-4, 1e-2]).unwrap();
        assert!(matches!(edges.bin_of(Some(1e-5)), FrequencyBin::Range { index: 0, .. }));
        assert!(matches!(edges.bin_of(Some(1e-4)), FrequencyBin::Range { index: 1, .. }));
        assert!(matches!(edges.bin_of(Some(0.5)), FrequencyBin::Range { index: 2, .. }));
        assert_eq!(edges.bin_of(None), FrequencyBin::Absent);
        assert_eq!(edges.bins().len(), 4);
        assert_eq!(edges.bin_of(Some(1e-5)).to_string(), "[0,1e-4)");
        assert_eq!(edges.bin_of(Some(1.0)).to_string(), "[1e-2,1]");
        assert!(BinEdges::new(vec![1e-2, 1e-4]).is_err());
        assert!(BinEdges::new(vec![0.0]).is_err());
        assert!(BinEdges::new(vec![1.0]).is_err());
        assert_eq!(BinEdges::default().edges(), &DEFAULT_BIN_EDGES);
    }

    #[test]
    fn stratification_cells() {
        let mut freq = FrequencyTable::default();
        let scored = vec![
            sv(0.0, -1.0, PathogenicLikelyPathogenic, 1),
            sv(0.0, -3.0, PathogenicLikelyPathogenic, 2),
            sv(0.0, 0.5, BenignLikelyBenign, 3),
        ];
        freq.insert(scored[0].variant.key(), 1e-5);
        freq.insert(scored[1].variant.key(), 2e-5);
        let edges = BinEdges::new(vec![1e-4, 1e-2]).unwrap();
        let cells = stratify_by_frequency(&scored, &freq, &edges);
        assert_eq!(cells.len(), 3 * 4);
        let low = &cells[0];
        assert_eq!((low.significance, low.count), (PathogenicLikelyPathogenic, 2));
        assert_eq!(low.mean, Some(-2.0));
        assert_eq!(low.median, Some(-2.0));
        let benign_absent = cells
            .iter()
            .find(|c| c.significance == BenignLikelyBenign && c.bin == FrequencyBin::Absent)
            .unwrap();
        assert_eq!(benign_absent.count, 1);
        assert!(cells.iter().filter(|c| c.count == 0).all(|c| c.mean.is_none()));
    }

    #[test]
    fn significance_comparison_examples() {
        let scored = vec![
            sv(0.0, -3.0, PathogenicLikelyPathogenic, 1),
            sv(0.0, -2.5, PathogenicLikelyPathogenic, 2),
            sv(0.0, 0.1, BenignLikelyBenign, 3),
            sv(0.0, 0.2, BenignLikelyBenign, 4),
        ];
        let out = compare_significance_groups(&scored, None);
        let t = out[0].test.unwrap();
        assert_eq!(t.u1, 0.0);
        assert_eq!(t.p_two_sided, 2.0 / 6.0);

        let same = vec![
            sv(0.0, 1.0, PathogenicLikelyPathogenic, 1),
            sv(0.0, 2.0, PathogenicLikelyPathogenic, 2),
            sv(0.0, 1.0, BenignLikelyBenign, 3),
            sv(0.0, 2.0, BenignLikelyBenign, 4),
        ];
        assert_eq!(compare_significance_groups(&same, None)[0].test.unwrap().p_two_sided, 1.0);

        let only_p = &scored[..2];
        let out = compare_significance_groups(only_p, None);
        assert!(out[0].test.is_none());
        assert_eq!(out[0].notice.as_deref(), Some("empty group"));

        let freq = FrequencyTable::default();
        let edges = BinEdges::default();
        let per_bin = compare_significance_groups(&scored, Some((&freq, &edges)));
        assert_eq!(per_bin.len(), 6);
        assert!(per_bin.last().unwrap().test.is_some());
        assert!(per_bin[..5].iter().all(|c| c.test.is_none()));
    }

    fn set_from(values: &[f64]) -> Vec<ScoredVariant> {
        let mut s: Vec<ScoredVariant> = values
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let sig = ClinicalSignificance::ALL[i % 3];
                sv(x, 0.0, sig, i + 1)
            })
            .collect();
        normalize(&mut s);
        s
    }

    #[test]
    fn agreement_examples() {
        let a = set_from(&[1.0, 2.0, 3.0]);
        let r = compare_scorers(&a, &a).unwrap();
        assert_eq!((r.pearson_r, r.spearman_rho), (1.0, 1.0));
        let neg = set_from(&[-1.0, -2.0, -3.0]);
        assert_eq!(compare_scorers(&a, &neg).unwrap().pearson_r, -1.0);
        let b = set_from(&[1.0, 3.0, 2.0]);
        assert_abs_diff_eq!(compare_scorers(&a, &b).unwrap().pearson_r, 0.5, epsilon = 1e-12);
        assert!(matches!(compare_scorers(&a[..2], &a[..2]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn agreement_drops_unmatched() {
        let a = set_from(&[1.0, 2.0, 3.0, 4.0]);
        let b = set_from(&[1.0, 2.0, 3.0]);
        let r = compare_scorers(&a, &b).unwrap();
        assert_eq!((r.n, r.n_unmatched), (3, 1));
    }

    #[test]
    fn score_variant_set_single_scorer_pass() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        struct Counting(AtomicUsize);
        impl Scorer for Counting {
            fn id(&self) -> &str {
                "c"
            }
            fn score_batch(&self, s: &[SequenceRecord]) -> Result<Vec<LogitsMatrix>> {
                self.0.fetch_add(1, Ordering::SeqCst);
                UniformScorer.score_batch(s)
            }
        }
        let scorer = Counting(AtomicUsize::new(0));
        let protein = ProteinRecord::new("G", "G", "ACDEF").unwrap();
        let variants: Vec<_> = (1..=5).map(|p| v(p, "ACDEF".as_bytes()[p - 1] as char, 'W', VUS_)).collect();
        score_variant_set(&scorer, &protein, &variants).unwrap();
        assert_eq!(scorer.0.load(Ordering::SeqCst), 1);
    }

    proptest! {
        #[test]
        fn normalized_scores_standardized(values in proptest::collection::vec(-20.0f64..5.0, 2..40)) {
            let s = set_from(&values);
            let z: Vec<f64> = s.iter().map(|x| x.normalized_score).collect();
            let distinct = values.windows(2).any(|w| w[0] != w[1]);
            if distinct {
                let n = z.len() as f64;
                let m = z.iter().sum::<f64>() / n;
                let sd = (z.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
                prop_assert!(m.abs() <= 1e-9);
                prop_assert!((sd - 1.0).abs() <= 1e-9);
            }
        }

        #[test]
        fn agreement_symmetric_and_affine_invariant(
            values in proptest::collection::vec((-20.0f64..5.0, -20.0f64..5.0), 3..40),
            slope in 0.1f64..10.0,
            shift in -50.0f64..50.0,
        ) {
            let a = set_from(&values.iter().map(|p| p.0).collect::<Vec<_>>());
            let b = set_from(&values.iter().map(|p| p.1).collect::<Vec<_>>());
            let scaled = set_from(&values.iter().map(|p| slope * p.1 + shift).collect::<Vec<_>>());
            if let Ok(ab) = compare_scorers(&a, &b) {
                let ba = compare_scorers(&b, &a).unwrap();
                prop_assert_eq!(ab.pearson_r, ba.pearson_r);
                prop_assert_eq!(ab.spearman_rho, ba.spearman_rho);
                let scaled_report = compare_scorers(&a, &scaled).unwrap();
                prop_assert!((scaled_report.pearson_r - ab.pearson_r).abs() <= 1e-9);
                prop_assert!((scaled_report.spearman_rho - ab.spearman_rho).abs() <= 1e-12);
            }
        }
    }
}
