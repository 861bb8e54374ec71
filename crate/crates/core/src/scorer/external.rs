use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::model::SequenceRecord;
use crate::parse::write_fasta;

use super::logits::{parse_response, LogitsMatrix};
use super::Scorer;

pub const REQUEST_PLACEHOLDER: &str = "{request}";
pub const RESPONSE_PLACEHOLDER: &str = "{response}";

const DIAGNOSTIC_LIMIT: usize = 2000;

/// Runs a shell command that reads a FASTA request and writes a response
/// file of per-position log-probabilities.
#[derive(Debug)]
pub struct ExternalScorer {
    id: String,
    template: String,
    invocations: AtomicUsize,
}

pub(crate) fn validate_template(template: &str) -> Result<()> {
    if template.trim().is_empty()
        || !template.contains(REQUEST_PLACEHOLDER)
        || !template.contains(RESPONSE_PLACEHOLDER)
    {
        return Err(Error::InvalidScorerSpec(format!(
            "command template must contain {REQUEST_PLACEHOLDER} and {RESPONSE_PLACEHOLDER}: '{template}'"
        )));
    }
    Ok(())
}

impl ExternalScorer {
    pub fn new(id: impl Into<String>, template: impl Into<String>) -> Result<Self> {
        let template = template.into();
        validate_template(&template)?;
        Ok(Self {
            id: id.into(),
            template,
            invocations: AtomicUsize::new(0),
        })
    }

    /// Number of times the command has been run.
    pub fn invocations(&self) -> usize {
        self.invocations.load(Ordering::SeqCst)
    }
}

fn tail(text: &str) -> String {
    let text = text.trim();
    let start = text.len().saturating_sub(DIAGNOSTIC_LIMIT);
    let start = (start..=text.len()).find(|&i| text.is_char_boundary(i)).unwrap_or(0);
    text[start..].replace('\n', " | ")
}

impl Scorer for ExternalScorer {
    fn id(&self) -> &str {
        &self.id
    }

    fn score_batch(&self, sequences: &[SequenceRecord]) -> Result<Vec<LogitsMatrix>> {
        if sequences.is_empty() {
            return Err(Error::InvalidArgument("no sequences to score".into()));
        }
        let workdir = tempfile::Builder::new().prefix("rescuescan-scorer").tempdir()?;
        let request = workdir.path().join("request.fasta");
        let response = workdir.path().join("response.tsv");
        std::fs::write(&request, write_fasta(sequences))?;

        let command = self
            .template
            .replace(REQUEST_PLACEHOLDER, &request.to_string_lossy())
            .replace(RESPONSE_PLACEHOLDER, &response.to_string_lossy());
        self.invocations.fetch_add(1, Ordering::SeqCst);
        log::debug!("running scorer {}: {command}", self.id);
        let output = Command::new("sh").arg("-c").arg(&command).output()?;
        if !output.status.success() {
            return Err(Error::ScorerFailed {
                status: output.status.to_string(),
                diagnostics: tail(&String::from_utf8_lossy(&output.stderr)),
            });
        }
        let text = std::fs::read_to_string(&response).map_err(|e| Error::ScorerFailed {
            status: output.status.to_string(),
            diagnostics: format!("cannot read response file: {e}"),
        })?;
        let mut blocks = parse_response(&text)?;

        sequences
            .iter()
            .map(|s| {
                let idx = blocks
                    .iter()
                    .position(|b| b.id == s.id)
                    .ok_or_else(|| Error::IncompleteResponse(s.id.clone()))?;
                let block = blocks.swap_remove(idx);
                if block.sequence != s.sequence {
                    return Err(Error::InvalidArgument(format!(
                        "response for '{}' describes a different sequence",
                        s.id
                    )));
                }
                LogitsMatrix::from_log_scores(block.id, block.sequence, block.rows)
            })
            .collect()
    }
}
