//! Subcommand orchestration: read inputs, run analyses, and publish output
//! files atomically into the output directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::contacts::{concordance, concordance_z, contact_map, ContactMap, DEFAULT_CONTACT_THRESHOLD, DEFAULT_MIN_SEPARATION};
use crate::cpd::{cpd_score_comparison, detect_cpd};
use crate::error::{Error, Result};
use crate::model::{ClinicalSignificance, ProteinRecord, VariantRecord};
use crate::parse::{
    parse_fasta, parse_frequency_table, parse_msa, parse_structure, parse_variant_table, read_input, FrequencyTable,
};
use crate::report::{self, AgreementRow};
use crate::rescue::{build_rescue_matrix, ZAxis};
use crate::scorer::{build_scorer, EnsembleSpace, Scorer, ScorerSpec, DEFAULT_HUMAN_ID};
use crate::scoring::{
    compare_scorers, compare_significance_groups, normalize, score_with_logits, stratify_by_frequency, BinEdges,
    ScoredVariant,
};

pub const SCORED_VARIANTS_FILE: &str = "scored_variants.tsv";
pub const AGREEMENT_FILE: &str = "agreement.tsv";
pub const STRATIFIED_FILE: &str = "stratified.tsv";
pub const SIGNIFICANCE_TESTS_FILE: &str = "significance_tests.tsv";
pub const RESCUE_MATRIX_FILE: &str = "rescue_matrix.tsv";
pub const RESCUE_ZSCORES_FILE: &str = "rescue_zscores.tsv";
pub const RESCUE_HEATMAP_FILE: &str = "rescue_heatmap.svg";
pub const CONTACT_MAP_FILE: &str = "contact_map.tsv";
pub const CONCORDANCE_FILE: &str = "concordance.tsv";
pub const CPD_STATUS_FILE: &str = "cpd_status.tsv";
pub const CPD_COMPARISON_FILE: &str = "cpd_comparison.tsv";

/// Environment variable bounding worker threads.
pub const THREADS_ENV: &str = "RESCUESCAN_THREADS";

/// Everything a subcommand may need. Unused fields are ignored.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scorers: Vec<ScorerSpec>,
    /// Combine all scorers into one ensemble instead of scoring separately.
    pub ensemble: Option<EnsembleSpace>,
    pub sequences: Option<PathBuf>,
    pub variants: Option<PathBuf>,
    pub frequencies: Option<PathBuf>,
    pub msa: Option<PathBuf>,
    pub structure: Option<PathBuf>,
    /// Previously written `scored_variants.tsv` files.
    pub scores: Vec<PathBuf>,
    /// Previously written `rescue_zscores.tsv`.
    pub rescue_zscores: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Restricts the run to one gene.
    pub gene: Option<String>,
    pub chain: String,
    pub human_id: String,
    pub z_axis: ZAxis,
    pub bin_edges: BinEdges,
    pub contact_threshold: f64,
    pub min_separation: usize,
    pub signed_concordance: bool,
    /// Scan every significance class rather than P/LP only.
    pub all_backgrounds: bool,
    pub threads: Option<usize>,
    pub cache_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            scorers: Vec::new(),
            ensemble: None,
            sequences: None,
            variants: None,
            frequencies: None,
            msa: None,
            structure: None,
            scores: Vec::new(),
            rescue_zscores: None,
            out_dir: out_dir.into(),
            gene: None,
            chain: "A".into(),
            human_id: DEFAULT_HUMAN_ID.into(),
            z_axis: ZAxis::default(),
            bin_edges: BinEdges::default(),
            contact_threshold: DEFAULT_CONTACT_THRESHOLD,
            min_separation: DEFAULT_MIN_SEPARATION,
            signed_concordance: false,
            all_backgrounds: false,
            threads: None,
            cache_dir: None,
        }
    }

    /// Checks that every configured input exists and scalar options are sane.
    pub fn validate(&self) -> Result<()> {
        let inputs = [
            &self.sequences,
            &self.variants,
            &self.frequencies,
            &self.msa,
            &self.structure,
            &self.rescue_zscores,
        ];
        for path in inputs.into_iter().flatten().chain(&self.scores) {
            if !path.is_file() {
                return Err(Error::MissingInput(path.clone()));
            }
        }
        for spec in &self.scorers {
            spec.validate()?;
            if let crate::scorer::ScorerKind::Pssm { msa, .. } = &spec.kind {
                if !msa.is_file() {
                    return Err(Error::MissingInput(msa.clone()));
                }
            }
        }
        if !(self.contact_threshold > 0.0 && self.contact_threshold.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "contact threshold must be positive, got {}",
                self.contact_threshold
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidArgument("thread count must be at least 1".into()));
        }
        if self.out_dir.exists() && !self.out_dir.is_dir() {
            return Err(Error::InvalidArgument(format!(
                "output path {} is not a directory",
                self.out_dir.display()
            )));
        }
        Ok(())
    }

    fn require<'a>(&self, path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        path.as_deref()
            .ok_or_else(|| Error::InvalidArgument(format!("--{flag} is required")))
    }

    fn build_scorer(&self) -> Result<Box<dyn Scorer>> {
        build_scorer(&self.scorers, self.ensemble.unwrap_or_default(), self.cache_dir.as_deref())
    }
}

/// Collects output files in a staging directory inside the output directory
/// and moves them into place only when the whole command succeeded.
struct Staging {
    dir: tempfile::TempDir,
    out_dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Staging {
    fn new(out_dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(out_dir).map_err(|e| Error::Io(e).in_file(out_dir))?;
        let dir = tempfile::Builder::new().prefix(".rescuescan-staging").tempdir_in(out_dir)?;
        Ok(Self {
            dir,
            out_dir: out_dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    /// Publishes every file. On failure, files already moved are removed.
    fn commit(self) -> Result<Vec<PathBuf>> {
        for (name, bytes) in &self.files {
            if bytes.is_empty() {
                return Err(Error::InvalidArgument(format!("output {name} would be empty")));
            }
            std::fs::write(self.dir.path().join(name), bytes)?;
        }
        let mut published = Vec::new();
        for (name, _) in &self.files {
            let target = self.out_dir.join(name);
            if let Err(e) = std::fs::rename(self.dir.path().join(name), &target) {
                for p in &published {
                    let _ = std::fs::remove_file(p);
                }
                return Err(Error::Io(e).in_file(&target));
            }
            published.push(target);
        }
        Ok(published)
    }
}

fn run_in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => job(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start {n} worker threads: {e}")))?
            .install(job),
    }
}

fn load_proteins(path: &Path) -> Result<Vec<ProteinRecord>> {
    let text = read_input(path)?;
    let records = parse_fasta(&text).map_err(|e| e.in_file(path))?;
    records
        .iter()
        .map(ProteinRecord::from_sequence_record)
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_file(path))
}

fn load_variants(path: &Path, gene: Option<&str>) -> Result<Vec<VariantRecord>> {
    let text = read_input(path)?;
    let mut variants = parse_variant_table(&text).map_err(|e| e.in_file(path))?;
    if let Some(g) = gene {
        variants.retain(|v| v.gene_symbol == g);
    }
    Ok(variants)
}

fn load_frequencies(path: Option<&Path>) -> Result<Option<FrequencyTable>> {
    path.map(|p| parse_frequency_table(&read_input(p)?).map_err(|e| e.in_file(p)))
        .transpose()
}

fn select_protein<'a>(proteins: &'a [ProteinRecord], gene: Option<&str>) -> Result<&'a ProteinRecord> {
    match gene {
        Some(g) => proteins
            .iter()
            .find(|p| p.gene_symbol() == g)
            .ok_or_else(|| Error::InvalidArgument(format!("no sequence for gene {g}"))),
        None if proteins.len() == 1 => Ok(&proteins[0]),
        None => Err(Error::InvalidArgument(format!(
            "{} sequences supplied; choose one with --gene",
            proteins.len()
        ))),
    }
}

/// Scores variants for every gene with one wild-type pass per gene, in
/// parallel across genes, then z-normalizes over the whole set. Output
/// follows input order.
pub fn score_all(
    scorer: &dyn Scorer,
    proteins: &[ProteinRecord],
    variants: &[VariantRecord],
) -> Result<Vec<ScoredVariant>> {
    let by_gene: BTreeMap<&str, &ProteinRecord> = proteins.iter().map(|p| (p.gene_symbol(), p)).collect();
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, v) in variants.iter().enumerate() {
        if !by_gene.contains_key(v.gene_symbol.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "no sequence for gene {} (variant {})",
                v.gene_symbol,
                v.label()
            )));
        }
        groups.entry(v.gene_symbol.as_str()).or_default().push(i);
    }
    let groups: Vec<(&str, Vec<usize>)> = groups.into_iter().collect();
    let per_gene = groups
        .par_iter()
        .map(|(gene, idx)| {
            let protein = by_gene[gene];
            let subset: Vec<VariantRecord> = idx.iter().map(|&i| variants[i].clone()).collect();
            for v in &subset {
                v.validate_against(protein)?;
            }
            let logits = scorer.score(&protein.to_sequence_record())?;
            score_with_logits(&logits, scorer.id(), protein, &subset)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut slots: Vec<Option<ScoredVariant>> = vec![None; variants.len()];
    for ((_, idx), scored) in groups.iter().zip(per_gene) {
        for (&i, s) in idx.iter().zip(scored) {
            slots[i] = Some(s);
        }
    }
    let mut scored: Vec<ScoredVariant> = slots.into_iter().map(|s| s.expect("every variant scored")).collect();
    normalize(&mut scored);
    Ok(scored)
}

fn attach_frequencies(variants: &mut [VariantRecord], freq: Option<&FrequencyTable>) -> FrequencyTable {
    if let Some(freq) = freq {
        for v in variants.iter_mut() {
            if let Some(af) = freq.get(&v.key()) {
                v.allele_frequency = Some(af);
            }
        }
    }
    let mut table = FrequencyTable::default();
    for v in variants.iter() {
        if let Some(af) = v.allele_frequency {
            table.insert(v.key(), af);
        }
    }
    table
}

fn agreement_rows(sets: &[Vec<ScoredVariant>], ids: &[String]) -> Result<Vec<AgreementRow>> {
    let mut rows = Vec::new();
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            let outcome = match compare_scorers(&sets[a], &sets[b]) {
                Ok(r) => Ok(r),
                Err(e @ (Error::ConstantInput | Error::InsufficientData(_))) => {
                    log::warn!("agreement of {} and {} undefined: {e}", ids[a], ids[b]);
                    Err(e.to_string())
                }
                Err(e) => return Err(e),
            };
            rows.push(AgreementRow {
                scorer_a: ids[a].clone(),
                scorer_b: ids[b].clone(),
                outcome,
            });
        }
    }
    Ok(rows)
}

/// Scores variants with each configured scorer (or their ensemble) and
/// writes scores, frequency strata and significance tests; with two or more
/// separate scorers also writes pairwise agreement.
pub fn cmd_score_variants(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let sequences = config.require(&config.sequences, "sequences")?;
    let variants_path = config.require(&config.variants, "variants")?;
    run_in_pool(config.threads, || {
        let proteins = load_proteins(sequences)?;
        let mut variants = load_variants(variants_path, config.gene.as_deref())?;
        if variants.is_empty() {
            return Err(Error::EmptyInput);
        }
        let freq = load_frequencies(config.frequencies.as_deref())?;
        let freq_table = attach_frequencies(&mut variants, freq.as_ref());

        let scorers: Vec<Box<dyn Scorer>> = match config.ensemble {
            Some(_) => vec![config.build_scorer()?],
            None => config
                .scorers
                .iter()
                .map(|s| s.build(config.cache_dir.as_deref()))
                .collect::<Result<_>>()?,
        };
        if scorers.is_empty() {
            return Err(Error::InvalidScorerSpec("no scorer configured".into()));
        }
        let ids: Vec<String> = scorers.iter().map(|s| s.id().to_string()).collect();
        let sets: Vec<Vec<ScoredVariant>> = scorers
            .iter()
            .map(|s| score_all(s.as_ref(), &proteins, &variants))
            .collect::<Result<_>>()?;

        let mut staging = Staging::new(&config.out_dir)?;
        let all: Vec<ScoredVariant> = sets.iter().flatten().cloned().collect();
        staging.add(SCORED_VARIANTS_FILE, report::write_scored_variants(&all));
        let strata: Vec<_> = ids
            .iter()
            .zip(&sets)
            .map(|(id, s)| (id.clone(), stratify_by_frequency(s, &freq_table, &config.bin_edges)))
            .collect();
        staging.add(STRATIFIED_FILE, report::write_stratified(&strata));
        let tests: Vec<_> = ids
            .iter()
            .zip(&sets)
            .map(|(id, s)| {
                let mut rows = compare_significance_groups(s, None);
                rows.extend(compare_significance_groups(s, Some((&freq_table, &config.bin_edges))));
                (id.clone(), rows)
            })
            .collect();
        staging.add(SIGNIFICANCE_TESTS_FILE, report::write_significance_tests(&tests));
        if sets.len() >= 2 {
            staging.add(AGREEMENT_FILE, report::write_agreement(&agreement_rows(&sets, &ids)?));
        }
        staging.commit()
    })
}

/// Compares previously written score files pairwise.
pub fn cmd_agreement(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    if config.scores.is_empty() {
        return Err(Error::InvalidArgument("at least one --scores file is required".into()));
    }
    let mut sets: Vec<Vec<ScoredVariant>> = Vec::new();
    let mut ids: Vec<String> = Vec::new();
    for path in &config.scores {
        let mut set = report::parse_scored_variants(&read_input(path)?).map_err(|e| e.in_file(path))?;
        if let Some(g) = &config.gene {
            set.retain(|s| &s.variant.gene_symbol == g);
        }
        for s in set {
            match ids.iter().position(|id| *id == s.scorer_id) {
                Some(i) => sets[i].push(s),
                None => {
                    ids.push(s.scorer_id.clone());
                    sets.push(vec![s]);
                }
            }
        }
    }
    if ids.len() < 2 {
        return Err(Error::InvalidArgument(
            "agreement needs score tables from at least two scorers".into(),
        ));
    }
    let rows = agreement_rows(&sets, &ids)?;
    let mut staging = Staging::new(&config.out_dir)?;
    staging.add(AGREEMENT_FILE, report::write_agreement(&rows));
    staging.commit()
}

fn load_contact_map(config: &RunConfig, path: &Path, length: usize) -> Result<ContactMap> {
    let trace = parse_structure(&read_input(path)?, &config.chain).map_err(|e| e.in_file(path))?;
    contact_map(&trace, length, config.contact_threshold).map_err(|e| e.in_file(path))
}

/// Scans every pathogenic background of one protein and writes the mean and
/// z-scored rescue matrices with a heatmap. With a structure, also writes
/// the contact map and its concordance with the z-scores.
pub fn cmd_rescue_scan(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let sequences = config.require(&config.sequences, "sequences")?;
    let variants_path = config.require(&config.variants, "variants")?;
    run_in_pool(config.threads, || {
        let proteins = load_proteins(sequences)?;
        let protein = select_protein(&proteins, config.gene.as_deref())?;
        let backgrounds: Vec<VariantRecord> = load_variants(variants_path, Some(protein.gene_symbol()))?
            .into_iter()
            .filter(|v| config.all_backgrounds || v.significance == ClinicalSignificance::PathogenicLikelyPathogenic)
            .collect();
        if backgrounds.is_empty() {
            return Err(Error::EmptyBackgroundSet);
        }
        let scorer = config.build_scorer()?;
        let rescue = build_rescue_matrix(scorer.as_ref(), protein, &backgrounds, config.z_axis)?;

        let mut staging = Staging::new(&config.out_dir)?;
        staging.add(RESCUE_MATRIX_FILE, report::write_rescue_matrix(&rescue));
        staging.add(RESCUE_ZSCORES_FILE, report::write_rescue_zscores(&rescue));
        let labels: Vec<String> = rescue.backgrounds().iter().map(VariantRecord::label).collect();
        staging.add(RESCUE_HEATMAP_FILE, report::heatmap_svg(rescue.z_values(), &labels)?);
        if let Some(structure) = &config.structure {
            let map = load_contact_map(config, structure, protein.len())?;
            staging.add(CONTACT_MAP_FILE, report::write_contact_map(&map));
            let outcome = concordance(&rescue, &map, config.min_separation, config.signed_concordance);
            staging.add(CONCORDANCE_FILE, concordance_table(config, outcome)?);
        }
        staging.commit()
    })
}

fn concordance_table(config: &RunConfig, outcome: Result<crate::contacts::ConcordanceReport>) -> Result<String> {
    let outcome = match outcome {
        Ok(r) => Ok(r),
        Err(e @ (Error::DegenerateLabels | Error::InsufficientData(_))) => {
            log::warn!("concordance undefined: {e}");
            Err(e.to_string())
        }
        Err(e) => return Err(e),
    };
    Ok(report::write_concordance(
        &outcome,
        config.min_separation,
        config.contact_threshold,
        config.signed_concordance,
    ))
}

/// Builds a contact map from a structure; with rescue z-scores, also their
/// concordance. Protein length comes from `--sequences` (with `--gene`) or
/// from the z-score table width.
pub fn cmd_contacts(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let structure = config.require(&config.structure, "structure")?;
    let zscores = config
        .rescue_zscores
        .as_deref()
        .map(|p| report::parse_rescue_table(&read_input(p)?).map_err(|e| e.in_file(p)))
        .transpose()?;
    let length = match (&config.sequences, &zscores) {
        (Some(path), _) => select_protein(&load_proteins(path)?, config.gene.as_deref())?.len(),
        (None, Some(z)) => z.rows[0].len(),
        (None, None) => {
            return Err(Error::InvalidArgument(
                "--sequences or --rescue-zscores is required to fix the protein length".into(),
            ))
        }
    };
    let map = load_contact_map(config, structure, length)?;
    let mut staging = Staging::new(&config.out_dir)?;
    staging.add(CONTACT_MAP_FILE, report::write_contact_map(&map));
    if let Some(z) = zscores {
        let positions: Vec<usize> = z.backgrounds.iter().map(|k| k.position).collect();
        let outcome = concordance_z(&positions, &z.rows, &map, config.min_separation, config.signed_concordance);
        staging.add(CONCORDANCE_FILE, concordance_table(config, outcome)?);
    }
    staging.commit()
}

/// Calls CPD status for every variant against the alignment. With
/// `--sequences` and a scorer, also compares CPD and non-CPD scores at each
/// window level.
pub fn cmd_cpd(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let msa_path = config.require(&config.msa, "msa")?;
    let variants_path = config.require(&config.variants, "variants")?;
    run_in_pool(config.threads, || {
        let alignment = parse_msa(&read_input(msa_path)?, &config.human_id).map_err(|e| e.in_file(msa_path))?;
        let variants = load_variants(variants_path, config.gene.as_deref())?;
        if variants.is_empty() {
            return Err(Error::EmptyInput);
        }
        let statuses = variants
            .par_iter()
            .map(|v| detect_cpd(&alignment, &config.human_id, v))
            .collect::<Result<Vec<_>>>()?;

        let mut staging = Staging::new(&config.out_dir)?;
        let rows: Vec<_> = variants.iter().cloned().zip(statuses.iter().cloned()).collect();
        staging.add(CPD_STATUS_FILE, report::write_cpd_status(&rows));

        if let (Some(sequences), false) = (&config.sequences, config.scorers.is_empty()) {
            let proteins = load_proteins(sequences)?;
            let scorer = config.build_scorer()?;
            let scored = score_all(scorer.as_ref(), &proteins, &variants)?;
            let comparisons: Vec<_> = (0..=2)
                .map(|level| {
                    let outcome = match cpd_score_comparison(&scored, &statuses, level) {
                        Ok(c) => Ok(c),
                        Err(e @ Error::EmptyGroup(_)) => Err(e.to_string()),
                        Err(e) => return Err(e),
                    };
                    Ok((level, outcome))
                })
                .collect::<Result<_>>()?;
            staging.add(CPD_COMPARISON_FILE, report::write_cpd_comparison(&comparisons));
        }
        staging.commit()
    })
}
