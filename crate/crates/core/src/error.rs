use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-canonical residue '{0}'")]
    NonCanonicalResidue(char),

    #[error("position {position} out of range 1..={length}")]
    PositionOutOfRange { position: usize, length: usize },

    #[error("reference mismatch at position {position}: expected '{expected}', found '{found}'")]
    ReferenceMismatch {
        position: usize,
        expected: char,
        found: char,
    },

    #[error("variant for gene {variant_gene} applied to protein {protein_gene}")]
    GeneMismatch {
        variant_gene: String,
        protein_gene: String,
    },

    #[error("empty sequence")]
    EmptySequence,

    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },

    #[error("row {id} has width {found}, expected {expected}")]
    AlignmentWidthMismatch {
        id: String,
        expected: usize,
        found: usize,
    },

    #[error("reference row '{0}' not found in alignment")]
    MissingReference(String),

    #[error("no CA atoms found for chain '{0}'")]
    EmptyTrace(String),

    #[error("trace residue {residue} outside 1..={length}")]
    TraceOutOfRange { residue: i64, length: usize },

    #[error("invalid scorer spec: {0}")]
    InvalidScorerSpec(String),

    #[error("scorer failed ({status}): {diagnostics}")]
    ScorerFailed { status: String, diagnostics: String },

    #[error("scorer response missing sequence '{0}'")]
    IncompleteResponse(String),

    #[error("scorer response for '{id}' row {row}: probability mass {sum} deviates from 1")]
    RowSumOutOfRange { id: String, row: usize, sum: f64 },

    #[error("input vectors have lengths {0} and {1}")]
    LengthMismatch(usize, usize),

    #[error("constant input")]
    ConstantInput,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("empty input")]
    EmptyInput,

    #[error("all labels belong to one class")]
    DegenerateLabels,

    #[error("empty group: {0}")]
    EmptyGroup(String),

    #[error("empty background set")]
    EmptyBackgroundSet,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("input file not found: {}", .0.display())]
    MissingInput(PathBuf),

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable kind tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonCanonicalResidue(_) => "non_canonical_residue",
            Error::PositionOutOfRange { .. } => "position_out_of_range",
            Error::ReferenceMismatch { .. } => "reference_mismatch",
            Error::GeneMismatch { .. } => "gene_mismatch",
            Error::EmptySequence => "empty_sequence",
            Error::Parse { .. } => "parse_error",
            Error::AlignmentWidthMismatch { .. } => "alignment_width_mismatch",
            Error::MissingReference(_) => "missing_reference",
            Error::EmptyTrace(_) => "empty_trace",
            Error::TraceOutOfRange { .. } => "trace_out_of_range",
            Error::InvalidScorerSpec(_) => "invalid_scorer_spec",
            Error::ScorerFailed { .. } => "scorer_failed",
            Error::IncompleteResponse(_) => "incomplete_response",
            Error::RowSumOutOfRange { .. } => "row_sum_out_of_range",
            Error::LengthMismatch(..) => "length_mismatch",
            Error::ConstantInput => "constant_input",
            Error::InsufficientData(_) => "insufficient_data",
            Error::EmptyInput => "empty_input",
            Error::DegenerateLabels => "degenerate_labels",
            Error::EmptyGroup(_) => "empty_group",
            Error::EmptyBackgroundSet => "empty_background_set",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::MissingInput(_) => "missing_input",
            Error::InFile { source, .. } => source.kind(),
            Error::Io(_) => "io_error",
        }
    }

    pub(crate) fn parse(line: usize, kind: ParseErrorKind) -> Self {
        Error::Parse { line, kind }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("invalid character '{0}'")]
    InvalidCharacter(char),
    #[error("record '{0}' has no sequence")]
    EmptyRecord(String),
    #[error("duplicate id '{0}'")]
    DuplicateId(String),
    #[error("sequence data before first '>' header")]
    MissingHeader,
    #[error("empty header")]
    EmptyHeader,
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("expected {expected} fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("malformed {field} '{value}'")]
    MalformedField { field: &'static str, value: String },
    #[error("unknown clinical significance '{0}'")]
    UnknownSignificance(String),
    #[error("wild-type and mutant residue are identical ('{0}')")]
    IdentitySubstitution(char),
    #[error("allele frequency {0} outside [0, 1]")]
    FrequencyOutOfRange(f64),
    #[error("residue number {0} does not increase")]
    NonMonotonicResidue(i64),
    #[error("non-finite value")]
    NonFinite,
    #[error("{0}")]
    Other(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
