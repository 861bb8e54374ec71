//! Alpha-carbon contact maps and their concordance with rescue z-scores.

use crate::error::{Error, Result};
use crate::parse::CalphaTrace;
use crate::rescue::RescueMatrix;
use crate::stats::{self, UTestResult};

pub const DEFAULT_CONTACT_THRESHOLD: f64 = 10.0;
pub const DEFAULT_MIN_SEPARATION: usize = 6;

/// Symmetric residue contact matrix with a per-position resolution mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactMap {
    size: usize,
    contacts: Vec<bool>,
    valid: Vec<bool>,
    threshold: f64,
}

impl ContactMap {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Whether 1-based `position` has a resolved alpha-carbon.
    pub fn is_valid(&self, position: usize) -> bool {
        position >= 1 && position <= self.size && self.valid[position - 1]
    }

    /// Contact state of two 1-based positions; `None` if either is unresolved.
    pub fn contact(&self, i: usize, j: usize) -> Option<bool> {
        (self.is_valid(i) && self.is_valid(j)).then(|| self.contacts[(i - 1) * self.size + (j - 1)])
    }
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Marks residue pairs whose alpha-carbons lie within `threshold` ångströms
/// (inclusive). Positions missing from the trace are invalid.
pub fn contact_map(trace: &CalphaTrace, length: usize, threshold: f64) -> Result<ContactMap> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::InvalidArgument(format!("contact threshold must be positive, got {threshold}")));
    }
    let mut coords: Vec<Option<[f64; 3]>> = vec![None; length];
    for r in &trace.residues {
        if r.residue_number < 1 || r.residue_number as u64 > length as u64 {
            return Err(Error::TraceOutOfRange {
                residue: r.residue_number,
                length,
            });
        }
        coords[(r.residue_number - 1) as usize] = Some(r.coord);
    }
    let mut contacts = vec![false; length * length];
    for i in 0..length {
        let Some(a) = coords[i] else { continue };
        for j in i..length {
            let Some(b) = coords[j] else { continue };
            let c = distance(&a, &b) <= threshold;
            contacts[i * length + j] = c;
            contacts[j * length + i] = c;
        }
    }
    Ok(ContactMap {
        size: length,
        contacts,
        valid: coords.iter().map(Option::is_some).collect(),
        threshold,
    })
}

/// How strongly rescue effects segregate into structural contacts.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcordanceReport {
    /// Probability that a contact pair outscores a non-contact pair.
    pub auc: f64,
    /// Rank test with contact pairs as sample 1.
    pub segregation: UTestResult,
    pub n_pairs: usize,
    pub n_contact: usize,
    pub min_separation: usize,
    pub threshold: f64,
    pub signed: bool,
}

/// (background position, column) pairs scored by z and split by contact
/// state. `positions[v]` is the 1-based site of background row `v`;
/// `signed == false` scores with |z|.
pub fn concordance_pairs(
    positions: &[usize],
    z: &[Vec<f64>],
    map: &ContactMap,
    min_separation: usize,
    signed: bool,
) -> Result<(Vec<f64>, Vec<bool>)> {
    if positions.len() != z.len() {
        return Err(Error::LengthMismatch(positions.len(), z.len()));
    }
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (&i, row) in positions.iter().zip(z) {
        if row.len() != map.size() {
            return Err(Error::LengthMismatch(row.len(), map.size()));
        }
        for (j0, &value) in row.iter().enumerate() {
            let j = j0 + 1;
            if i.abs_diff(j) < min_separation {
                continue;
            }
            if let Some(c) = map.contact(i, j) {
                scores.push(if signed { value } else { value.abs() });
                labels.push(c);
            }
        }
    }
    Ok((scores, labels))
}

/// Concordance of raw z rows; see [`concordance`].
pub fn concordance_z(
    positions: &[usize],
    z: &[Vec<f64>],
    map: &ContactMap,
    min_separation: usize,
    signed: bool,
) -> Result<ConcordanceReport> {
    let (scores, labels) = concordance_pairs(positions, z, map, min_separation, signed)?;
    if scores.is_empty() {
        return Err(Error::InsufficientData("no residue pairs pass the separation filter".into()));
    }
    let auc = stats::auc(&scores, &labels)?;
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for (s, c) in scores.iter().zip(&labels) {
        if *c {
            inside.push(*s);
        } else {
            outside.push(*s);
        }
    }
    let segregation = stats::mann_whitney_u(&inside, &outside)?;
    Ok(ConcordanceReport {
        auc,
        segregation,
        n_pairs: scores.len(),
        n_contact: inside.len(),
        min_separation,
        threshold: map.threshold(),
        signed,
    })
}

/// Scores every (background site, column) pair at least `min_separation`
/// apart with both ends resolved, and tests whether contact pairs carry
/// larger effects.
pub fn concordance(
    rescue: &RescueMatrix,
    map: &ContactMap,
    min_separation: usize,
    signed: bool,
) -> Result<ConcordanceReport> {
    let positions: Vec<usize> = rescue.backgrounds().iter().map(|b| b.position).collect();
    concordance_z(&positions, rescue.z_values(), map, min_separation, signed)
}
