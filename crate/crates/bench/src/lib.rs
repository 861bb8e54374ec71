//! Deterministic synthetic inputs shared by the benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rescuescan::parse::{parse_msa, CalphaResidue, CalphaTrace};
use rescuescan::scorer::PssmScorer;
use rescuescan::{ClinicalSignificance, ProteinRecord, VariantRecord, ALPHABET};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_sequence(len: usize, seed: u64) -> String {
    let mut r = rng(seed);
    (0..len).map(|_| *ALPHABET.choose(&mut r).unwrap() as char).collect()
}

pub fn protein(len: usize) -> ProteinRecord {
    ProteinRecord::new("BENCH", "BENCH", random_sequence(len, 1)).expect("canonical sequence")
}

/// PSSM over `rows` random orthologs of `protein`, each differing at ~20% of sites.
pub fn pssm(protein: &ProteinRecord, rows: usize) -> PssmScorer {
    let mut r = rng(2);
    let mut msa = format!(">human\n{}\n", protein.sequence());
    for k in 0..rows {
        let row: String = protein
            .sequence()
            .chars()
            .map(|c| if r.gen_bool(0.2) { *ALPHABET.choose(&mut r).unwrap() as char } else { c })
            .collect();
        msa.push_str(&format!(">o{k}\n{row}\n"));
    }
    let aln = parse_msa(&msa, "human").expect("well-formed alignment");
    PssmScorer::new("pssm", &aln, 1.0).expect("valid pssm")
}

/// `count` distinct pathogenic substitutions spread along `protein`.
pub fn backgrounds(protein: &ProteinRecord, count: usize) -> Vec<VariantRecord> {
    let seq = protein.sequence().as_bytes();
    let step = (seq.len() / count).max(1);
    (0..count)
        .map(|k| {
            let pos = (k * step) % seq.len() + 1;
            let wt = seq[pos - 1] as char;
            let mt = ALPHABET.iter().map(|&b| b as char).find(|&c| c != wt).unwrap();
            VariantRecord::new("BENCH", pos, wt, mt, ClinicalSignificance::PathogenicLikelyPathogenic)
        })
        .collect()
}

/// Alpha-helix-like trace: radius 2.3 Å, 100° per residue, 1.5 Å rise.
pub fn helix_trace(len: usize) -> CalphaTrace {
    let residues = (0..len)
        .map(|i| {
            let t = (i as f64 * 100.0).to_radians();
            CalphaResidue {
                residue_number: i as i64 + 1,
                coord: [2.3 * t.cos(), 2.3 * t.sin(), 1.5 * i as f64],
            }
        })
        .collect();
    CalphaTrace {
        chain: "A".into(),
        residues,
    }
}

/// Two samples of continuous values; `shift` moves the second.
pub fn samples(n1: usize, n2: usize, shift: f64) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng(3);
    let a = (0..n1).map(|_| r.gen::<f64>()).collect();
    let b = (0..n2).map(|_| r.gen::<f64>() + shift).collect();
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_are_deterministic_and_valid() {
        assert_eq!(random_sequence(50, 9), random_sequence(50, 9));
        let p = protein(60);
        let bgs = backgrounds(&p, 6);
        assert_eq!(bgs.len(), 6);
        for v in &bgs {
            v.validate_against(&p).unwrap();
        }
        assert_eq!(helix_trace(10).len(), 10);
        pssm(&p, 4);
    }
}
