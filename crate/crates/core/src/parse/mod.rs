//! Readers for every input format: FASTA, aligned FASTA, the canonical
//! variant and frequency tables, and PDB alpha-carbon traces.

mod fasta;
mod msa;
mod pdb;
mod tables;

pub use fasta::{parse_fasta, write_fasta};
pub use msa::{parse_msa, AlignedRow, Alignment, GAP, UNKNOWN};
pub use pdb::{format_ca_record, parse_structure, CalphaResidue, CalphaTrace};
pub use tables::{
    parse_frequency_table, parse_variant_table, write_frequency_table, write_variant_table,
    FrequencyTable, FREQUENCY_COLUMNS, VARIANT_COLUMNS,
};

pub(crate) use tables::{parse_frequency, parse_key, parse_residue, Tsv};

use std::path::Path;

use crate::error::{Error, Result};

/// Reads a whole input file, mapping a missing file to [`Error::MissingInput`].
pub fn read_input(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingInput(path.to_path_buf()),
        _ => Error::Io(e).in_file(path),
    })
}
