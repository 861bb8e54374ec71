use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rescuescan::pipeline::{self, RunConfig, THREADS_ENV};
use rescuescan::scorer::{default_cache_dir, EnsembleSpace, ScorerSpec, CACHE_ENV, DEFAULT_HUMAN_ID, DEFAULT_PSEUDOCOUNT};
use rescuescan::scoring::{BinEdges, DEFAULT_BIN_EDGES};
use rescuescan::ZAxis;

/// Variant-effect scoring and rescue-mutation scans from protein language
/// model log-probabilities.
#[derive(Parser, Debug)]
#[command(name = "rescuescan", version, about, propagate_version = true)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score variants by wild-type marginal and compare significance groups.
    ScoreVariants(ScoreVariantsArgs),
    /// Scan all secondary substitutions on each pathogenic background.
    RescueScan(RescueScanArgs),
    /// Build a contact map and optionally its concordance with rescue z-scores.
    Contacts(ContactsArgs),
    /// Call compensated pathogenic deviations from an alignment.
    Cpd(CpdArgs),
    /// Correlate previously written score tables.
    Agreement(AgreementArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Output directory.
    #[arg(short, long)]
    out: PathBuf,

    /// Restrict the run to one gene.
    #[arg(long)]
    gene: Option<String>,

    /// Worker threads (default: all cores).
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct ScorerArgs {
    /// `uniform`, `pssm:<msa>` or `external:"<cmd with {request} {response}>"`.
    /// Repeat to configure several scorers.
    #[arg(long = "scorer", value_name = "SPEC")]
    scorers: Vec<ScorerSpec>,

    /// How several scorers are averaged when combined.
    #[arg(long, default_value = "log", value_parser = ["log", "prob"])]
    ensemble_space: String,

    /// Reference row id in PSSM alignments.
    #[arg(long, default_value = DEFAULT_HUMAN_ID)]
    human_id: String,

    /// Pseudocount for PSSM scorers.
    #[arg(long, default_value_t = DEFAULT_PSEUDOCOUNT)]
    pseudocount: f64,

    /// Cache directory for external scorer outputs.
    #[arg(long, env = CACHE_ENV)]
    cache_dir: Option<PathBuf>,

    /// Do not cache external scorer outputs.
    #[arg(long)]
    no_cache: bool,
}

#[derive(Args, Debug)]
struct ScoreVariantsArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    scorer: ScorerArgs,

    /// Protein FASTA; record ids are gene symbols.
    #[arg(long)]
    sequences: PathBuf,

    /// Variant table.
    #[arg(long)]
    variants: PathBuf,

    /// Allele-frequency table.
    #[arg(long)]
    frequencies: Option<PathBuf>,

    /// Comma-separated allele-frequency bin edges.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_BIN_EDGES.to_vec())]
    bin_edges: Vec<f64>,

    /// Average all scorers into one ensemble instead of scoring separately.
    #[arg(long)]
    ensemble: bool,
}

#[derive(Args, Debug)]
struct ContactArgs {
    /// Alpha-carbon contact threshold in ångströms.
    #[arg(long, default_value_t = rescuescan::contacts::DEFAULT_CONTACT_THRESHOLD)]
    contact_threshold: f64,

    /// Minimum sequence separation of scored residue pairs.
    #[arg(long, default_value_t = rescuescan::contacts::DEFAULT_MIN_SEPARATION)]
    min_separation: usize,

    /// Score pairs by signed z instead of |z|.
    #[arg(long)]
    signed: bool,

    /// Chain to read from the structure.
    #[arg(long, default_value = "A")]
    chain: String,
}

#[derive(Args, Debug)]
struct RescueScanArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    scorer: ScorerArgs,
    #[command(flatten)]
    contact: ContactArgs,

    #[arg(long)]
    sequences: PathBuf,

    #[arg(long)]
    variants: PathBuf,

    /// PDB file for contact-map concordance.
    #[arg(long)]
    structure: Option<PathBuf>,

    /// Normalization axis of the rescue matrix.
    #[arg(long, default_value = "position", value_parser = ["position", "background"])]
    z_axis: String,

    /// Use every variant as a background, not only P/LP.
    #[arg(long)]
    all_backgrounds: bool,
}

#[derive(Args, Debug)]
struct ContactsArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    contact: ContactArgs,

    #[arg(long)]
    structure: PathBuf,

    /// Protein FASTA fixing the map size.
    #[arg(long)]
    sequences: Option<PathBuf>,

    /// `rescue_zscores.tsv` from a previous scan.
    #[arg(long)]
    rescue_zscores: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CpdArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    scorer: ScorerArgs,

    /// Ortholog alignment containing the reference row.
    #[arg(long)]
    msa: PathBuf,

    #[arg(long)]
    variants: PathBuf,

    /// Protein FASTA; with a scorer enables the CPD score comparison.
    #[arg(long)]
    sequences: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AgreementArgs {
    #[command(flatten)]
    common: Common,

    /// `scored_variants.tsv` files; rows are grouped by scorer_id.
    #[arg(long = "scores", required = true, num_args = 1..)]
    scores: Vec<PathBuf>,
}

impl Common {
    fn config(&self) -> RunConfig {
        let mut c = RunConfig::new(&self.out);
        c.gene = self.gene.clone();
        c.threads = self.threads;
        c
    }
}

impl ScorerArgs {
    fn apply(&self, c: &mut RunConfig, combine: bool) -> rescuescan::Result<()> {
        c.scorers = self
            .scorers
            .iter()
            .cloned()
            .map(|s| s.with_pssm_options(&self.human_id, self.pseudocount))
            .collect();
        c.human_id = self.human_id.clone();
        let space: EnsembleSpace = self.ensemble_space.parse()?;
        c.ensemble = combine.then_some(space);
        c.cache_dir = if self.no_cache {
            None
        } else {
            Some(self.cache_dir.clone().unwrap_or_else(default_cache_dir))
        };
        Ok(())
    }
}

impl ContactArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.contact_threshold = self.contact_threshold;
        c.min_separation = self.min_separation;
        c.signed_concordance = self.signed;
        c.chain = self.chain.clone();
    }
}

fn require_scorer(args: &ScorerArgs) -> rescuescan::Result<()> {
    if args.scorers.is_empty() {
        return Err(rescuescan::Error::InvalidScorerSpec("--scorer is required".into()));
    }
    Ok(())
}

fn run(command: Command) -> rescuescan::Result<Vec<PathBuf>> {
    match command {
        Command::ScoreVariants(a) => {
            require_scorer(&a.scorer)?;
            let mut c = a.common.config();
            a.scorer.apply(&mut c, a.ensemble)?;
            c.sequences = Some(a.sequences);
            c.variants = Some(a.variants);
            c.frequencies = a.frequencies;
            c.bin_edges = BinEdges::new(a.bin_edges)?;
            pipeline::cmd_score_variants(&c)
        }
        Command::RescueScan(a) => {
            require_scorer(&a.scorer)?;
            let mut c = a.common.config();
            a.scorer.apply(&mut c, true)?;
            a.contact.apply(&mut c);
            c.sequences = Some(a.sequences);
            c.variants = Some(a.variants);
            c.structure = a.structure;
            c.z_axis = a.z_axis.parse::<ZAxis>()?;
            c.all_backgrounds = a.all_backgrounds;
            pipeline::cmd_rescue_scan(&c)
        }
        Command::Contacts(a) => {
            let mut c = a.common.config();
            a.contact.apply(&mut c);
            c.structure = Some(a.structure);
            c.sequences = a.sequences;
            c.rescue_zscores = a.rescue_zscores;
            pipeline::cmd_contacts(&c)
        }
        Command::Cpd(a) => {
            let mut c = a.common.config();
            a.scorer.apply(&mut c, true)?;
            c.msa = Some(a.msa);
            c.variants = Some(a.variants);
            c.sequences = a.sequences;
            pipeline::cmd_cpd(&c)
        }
        Command::Agreement(a) => {
            let mut c = a.common.config();
            c.scores = a.scores;
            pipeline::cmd_agreement(&c)
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: usage: {}", one_line(first.trim_start_matches("error:")));
            return ExitCode::from(1);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match run(cli.command) {
        Ok(outputs) => {
            for p in outputs {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), one_line(&e.to_string()));
            ExitCode::from(1)
        }
    }
}
