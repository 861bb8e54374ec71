//! The scorer boundary: anything that turns protein sequences into
//! per-position log-probabilities over the canonical alphabet.
//!
//! Logits are always read from a single pass over the unmasked sequence.
//! Built-in scorers ([`UniformScorer`], [`PssmScorer`]) are deterministic and
//! cheap; [`ExternalScorer`] shells out to a model through the file protocol
//! in [`logits`], usually behind a [`CachedScorer`].

mod builtin;
mod cache;
mod external;
pub mod logits;

use std::path::{Path, PathBuf};
use std::str::FromStr;

pub use builtin::{pssm_logits, uniform_logits, PssmScorer, UniformScorer};
pub use cache::{cache_key, cached_logits, default_cache_dir, CachedScorer, CACHE_ENV};
pub use external::{ExternalScorer, REQUEST_PLACEHOLDER, RESPONSE_PLACEHOLDER};
pub use logits::{parse_response, write_response, LogRow, LogitsMatrix, ResponseBlock};

use crate::error::{Error, Result};
use crate::model::{SequenceRecord, ALPHABET_SIZE};
use crate::parse::{parse_msa, read_input};

pub trait Scorer: Send + Sync {
    /// Stable identifier, also the cache namespace.
    fn id(&self) -> &str;

    /// Scores every sequence; output order matches input order.
    fn score_batch(&self, sequences: &[SequenceRecord]) -> Result<Vec<LogitsMatrix>>;

    fn score(&self, sequence: &SequenceRecord) -> Result<LogitsMatrix> {
        self.score_batch(std::slice::from_ref(sequence))?
            .pop()
            .ok_or_else(|| Error::IncompleteResponse(sequence.id.clone()))
    }
}

impl Scorer for Box<dyn Scorer> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn score_batch(&self, sequences: &[SequenceRecord]) -> Result<Vec<LogitsMatrix>> {
        (**self).score_batch(sequences)
    }
}

pub const DEFAULT_PSEUDOCOUNT: f64 = 1.0;
pub const DEFAULT_HUMAN_ID: &str = "human";

#[derive(Debug, Clone, PartialEq)]
pub enum ScorerKind {
    Uniform,
    Pssm {
        msa: PathBuf,
        human_id: String,
        pseudocount: f64,
    },
    External {
        command: String,
    },
}

/// Declarative scorer configuration, parsed from
/// `uniform`, `pssm:<msa-path>` or `external:<command template>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScorerSpec {
    pub kind: ScorerKind,
    pub scorer_id: String,
}

impl ScorerSpec {
    pub fn uniform() -> Self {
        Self {
            kind: ScorerKind::Uniform,
            scorer_id: "uniform".into(),
        }
    }

    pub fn pssm(msa: impl Into<PathBuf>, human_id: impl Into<String>, pseudocount: f64) -> Self {
        let msa = msa.into();
        Self {
            scorer_id: format!("pssm:{}", msa.display()),
            kind: ScorerKind::Pssm {
                msa,
                human_id: human_id.into(),
                pseudocount,
            },
        }
    }

    pub fn external(command: impl Into<String>) -> Self {
        let command = command.into();
        Self {
            scorer_id: format!("external:{command}"),
            kind: ScorerKind::External { command },
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.scorer_id = id.into();
        self
    }

    /// Sets the reference row and pseudocount of a PSSM spec; no-op otherwise.
    pub fn with_pssm_options(mut self, new_human_id: &str, new_pseudocount: f64) -> Self {
        if let ScorerKind::Pssm {
            human_id,
            pseudocount,
            ..
        } = &mut self.kind
        {
            *human_id = new_human_id.to_string();
            *pseudocount = new_pseudocount;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.scorer_id.is_empty() {
            return Err(Error::InvalidScorerSpec("empty scorer id".into()));
        }
        match &self.kind {
            ScorerKind::Uniform => Ok(()),
            ScorerKind::Pssm { pseudocount, .. } if pseudocount.is_nan() || *pseudocount <= 0.0 => Err(
                Error::InvalidScorerSpec(format!("pseudocount must be positive, got {pseudocount}")),
            ),
            ScorerKind::Pssm { .. } => Ok(()),
            ScorerKind::External { command } => external::validate_template(command),
        }
    }

    pub fn is_external(&self) -> bool {
        matches!(self.kind, ScorerKind::External { .. })
    }

    /// Instantiates the scorer. External scorers are wrapped in the on-disk
    /// cache when `cache_dir` is given.
    pub fn build(&self, cache_dir: Option<&Path>) -> Result<Box<dyn Scorer>> {
        self.validate()?;
        Ok(match &self.kind {
            ScorerKind::Uniform => Box::new(UniformScorer),
            ScorerKind::Pssm {
                msa,
                human_id,
                pseudocount,
            } => {
                let alignment = parse_msa(&read_input(msa)?, human_id).map_err(|e| e.in_file(msa))?;
                Box::new(PssmScorer::new(self.scorer_id.clone(), &alignment, *pseudocount)?)
            }
            ScorerKind::External { command } => {
                let scorer = ExternalScorer::new(self.scorer_id.clone(), command.clone())?;
                match cache_dir {
                    Some(dir) => Box::new(CachedScorer::new(scorer, dir)),
                    None => Box::new(scorer),
                }
            }
        })
    }
}

impl FromStr for ScorerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let spec = if s == "uniform" {
            Self::uniform()
        } else if let Some(path) = s.strip_prefix("pssm:") {
            if path.is_empty() {
                return Err(Error::InvalidScorerSpec("pssm needs an alignment path".into()));
            }
            Self::pssm(path, DEFAULT_HUMAN_ID, DEFAULT_PSEUDOCOUNT)
        } else if let Some(cmd) = s.strip_prefix("external:") {
            Self::external(cmd.trim_matches('"'))
        } else {
            return Err(Error::InvalidScorerSpec(format!(
                "expected uniform, pssm:<msa> or external:<command>, got '{s}'"
            )));
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// How member matrices are combined in an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnsembleSpace {
    /// Mean of log-probabilities, then renormalized.
    #[default]
    Log,
    /// Log of mean probabilities.
    Prob,
}

impl FromStr for EnsembleSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(EnsembleSpace::Log),
            "prob" => Ok(EnsembleSpace::Prob),
            other => Err(Error::InvalidArgument(format!("unknown ensemble space '{other}'"))),
        }
    }
}

/// Averages several scorers position by position.
pub struct EnsembleScorer {
    id: String,
    members: Vec<Box<dyn Scorer>>,
    space: EnsembleSpace,
}

impl EnsembleScorer {
    pub fn new(members: Vec<Box<dyn Scorer>>, space: EnsembleSpace) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidScorerSpec("ensemble without members".into()));
        }
        let tag = match space {
            EnsembleSpace::Log => "log",
            EnsembleSpace::Prob => "prob",
        };
        let ids: Vec<&str> = members.iter().map(|m| m.id()).collect();
        Ok(Self {
            id: format!("ensemble[{tag}]({})", ids.join("+")),
            members,
            space,
        })
    }

    fn combine(&self, matrices: &[LogitsMatrix]) -> Result<LogitsMatrix> {
        let first = &matrices[0];
        let k = matrices.len() as f64;
        let rows = (0..first.len())
            .map(|i| {
                let mut row = [0.0; ALPHABET_SIZE];
                for (b, v) in row.iter_mut().enumerate() {
                    *v = match self.space {
                        EnsembleSpace::Log => matrices.iter().map(|m| m.row(i)[b]).sum::<f64>() / k,
                        EnsembleSpace::Prob => {
                            (matrices.iter().map(|m| m.row(i)[b].exp()).sum::<f64>() / k).ln()
                        }
                    };
                }
                row
            })
            .collect();
        LogitsMatrix::renormalized(first.sequence_id(), first.source_sequence(), rows)
    }
}

impl Scorer for EnsembleScorer {
    fn id(&self) -> &str {
        &self.id
    }

    fn score_batch(&self, sequences: &[SequenceRecord]) -> Result<Vec<LogitsMatrix>> {
        if self.members.len() == 1 {
            return self.members[0].score_batch(sequences);
        }
        let per_member: Vec<Vec<LogitsMatrix>> = self
            .members
            .iter()
            .map(|m| m.score_batch(sequences))
            .collect::<Result<_>>()?;
        (0..sequences.len())
            .map(|i| {
                let column: Vec<LogitsMatrix> = per_member.iter().map(|v| v[i].clone()).collect();
                self.combine(&column)
            })
            .collect()
    }
}

/// Builds one scorer from several specs: a single spec is used directly,
/// more are combined into an [`EnsembleScorer`].
pub fn build_scorer(
    specs: &[ScorerSpec],
    space: EnsembleSpace,
    cache_dir: Option<&Path>,
) -> Result<Box<dyn Scorer>> {
    let mut members: Vec<Box<dyn Scorer>> = specs
        .iter()
        .map(|s| s.build(cache_dir))
        .collect::<Result<_>>()?;
    match members.len() {
        0 => Err(Error::InvalidScorerSpec("no scorer configured".into())),
        1 => Ok(members.pop().expect("one member")),
        _ => Ok(Box::new(EnsembleScorer::new(members, space)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    struct Fixed(&'static str, f64);

    impl Scorer for Fixed {
        fn id(&self) -> &str {
            self.0
        }
        fn score_batch(&self, sequences: &[SequenceRecord]) -> Result<Vec<LogitsMatrix>> {
            sequences
                .iter()
                .map(|s| {
                    let mut row = [0.0; ALPHABET_SIZE];
                    row[0] = self.1;
                    LogitsMatrix::renormalized(
                        s.id.clone(),
                        s.sequence.clone(),
                        vec![row; s.sequence.len()],
                    )
                })
                .collect()
        }
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("uniform".parse::<ScorerSpec>().unwrap(), ScorerSpec::uniform());
        let pssm: ScorerSpec = "pssm:data/aln.fa".parse().unwrap();
        assert!(matches!(pssm.kind, ScorerKind::Pssm { ref human_id, pseudocount, .. } if human_id == "human" && pseudocount == 1.0));
        let ext: ScorerSpec = "external:\"run {request} {response}\"".parse().unwrap();
        assert_eq!(ext.kind, ScorerKind::External { command: "run {request} {response}".into() });
        assert!("external:run {request}".parse::<ScorerSpec>().is_err());
        assert!("esm".parse::<ScorerSpec>().is_err());
        assert!("pssm:".parse::<ScorerSpec>().is_err());
        assert!(ScorerSpec::pssm("a", "human", 0.0).validate().is_err());
    }

    #[test]
    fn ensemble_log_and_prob_spaces() {
        let seq = SequenceRecord::new("s", "AC");
        let members = || -> Vec<Box<dyn Scorer>> { vec![Box::new(Fixed("a", 0.0)), Box::new(Fixed("b", 2.0))] };
        let log = EnsembleScorer::new(members(), EnsembleSpace::Log).unwrap().score(&seq).unwrap();
        let prob = EnsembleScorer::new(members(), EnsembleSpace::Prob).unwrap().score(&seq).unwrap();
        let a = Fixed("a", 0.0).score(&seq).unwrap();
        let b = Fixed("b", 2.0).score(&seq).unwrap();
        let expected_log = (a.row(0)[0] + b.row(0)[0]) / 2.0;
        let expected_prob = ((a.row(0)[0].exp() + b.row(0)[0].exp()) / 2.0).ln();
        // renormalization of a mean of normalized rows is a small shift for log space
        assert!(log.max_row_sum_deviation() <= 1e-12);
        assert!(prob.max_row_sum_deviation() <= 1e-12);
        assert_abs_diff_eq!(prob.row(0)[0], expected_prob, epsilon = 1e-12);
        assert!(log.row(0)[0] > expected_log - 1e-12);
        assert_ne!(log.row(0), prob.row(0));
        let e = EnsembleScorer::new(members(), EnsembleSpace::Log).unwrap();
        assert_eq!(e.id(), "ensemble[log](a+b)");
    }

    #[test]
    fn build_single_and_many() {
        let one = build_scorer(&[ScorerSpec::uniform()], EnsembleSpace::Log, None).unwrap();
        assert_eq!(one.id(), "uniform");
        let two = build_scorer(&[ScorerSpec::uniform(), ScorerSpec::uniform().with_id("u2")], EnsembleSpace::Log, None).unwrap();
        assert!(two.id().starts_with("ensemble"));
        assert!(build_scorer(&[], EnsembleSpace::Log, None).is_err());
        assert!(matches!(
            ScorerSpec::pssm("/nonexistent/aln.fa", "human", 1.0).build(None),
            Err(Error::MissingInput(_))
        ));
    }
}
