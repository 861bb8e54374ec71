//! Statistical kernel: correlation, rank tests, z-scores and AUC.
//!
//! Standard deviations are population (divide by n) throughout. Rank
//! statistics are computed on doubled ranks so that tie-averaged ranks stay
//! integral and exact comparisons are possible.

use std::cmp::Ordering;

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Largest pooled sample size for which [`mann_whitney_u`] enumerates the
/// exact null distribution.
pub const EXACT_MAX_TOTAL: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UTestMethod {
    Exact,
    NormalApprox,
}

impl UTestMethod {
    pub fn label(self) -> &'static str {
        match self {
            UTestMethod::Exact => "exact",
            UTestMethod::NormalApprox => "normal",
        }
    }
}

/// Two-sided Mann-Whitney U test result. `u1` counts pairs in which the
/// first sample is larger (ties count one half).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UTestResult {
    pub u1: f64,
    pub u2: f64,
    pub z_approx: f64,
    pub p_two_sided: f64,
    pub method: UTestMethod,
    pub n1: usize,
    pub n2: usize,
}

fn require_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("non-finite value in input".into()))
    }
}

/// Twice the 1-based average rank of each value.
fn doubled_ranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u64; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // tie block occupies ranks i+1..=j; twice their mean is i+j+1
        let doubled = (i + j + 1) as u64;
        for &k in &order[i..j] {
            ranks[k] = doubled;
        }
        i = j;
    }
    ranks
}

/// 1-based ranks with ties receiving the mean of their rank range.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    doubled_ranks(values)
        .into_iter()
        .map(|r| r as f64 / 2.0)
        .collect()
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "correlation needs at least 3 pairs, got {}",
            x.len()
        )));
    }
    require_finite(x)?;
    require_finite(y)
}

fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    if is_constant(x) || is_constant(y) {
        return Err(Error::ConstantInput);
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation: Pearson on average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Population z-scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ZScores {
    pub values: Vec<f64>,
    /// Set when the input had zero spread; `values` are then all zero.
    pub constant: bool,
}

pub fn zscore(values: &[f64]) -> ZScores {
    if is_constant(values) {
        return ZScores {
            values: vec![0.0; values.len()],
            constant: true,
        };
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
    let sd = var.sqrt();
    ZScores {
        values: values.iter().map(|v| (v - m) / sd).collect(),
        constant: false,
    }
}

/// Two-sided Mann-Whitney U test. Uses exact enumeration when
/// `a.len() + b.len() <= EXACT_MAX_TOTAL`, otherwise the tie-corrected
/// normal approximation with continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<UTestResult> {
    let method = if a.len() + b.len() <= EXACT_MAX_TOTAL {
        UTestMethod::Exact
    } else {
        UTestMethod::NormalApprox
    };
    mann_whitney_u_with(a, b, method)
}

/// [`mann_whitney_u`] with an explicit method. Exact enumeration is
/// exponential in the pooled size; callers forcing it should keep inputs small.
pub fn mann_whitney_u_with(a: &[f64], b: &[f64], method: UTestMethod) -> Result<UTestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    require_finite(a)?;
    require_finite(b)?;
    let (n1, n2) = (a.len(), b.len());
    let n = n1 + n2;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_ranks(&pooled);

    let offset = (n1 * (n1 + 1)) as u64;
    let u1_doubled = ranks[..n1].iter().sum::<u64>() - offset;
    let total_doubled = (2 * n1 * n2) as u64;
    let u1 = u1_doubled as f64 / 2.0;
    let u2 = (total_doubled - u1_doubled) as f64 / 2.0;

    let mu = (n1 * n2) as f64 / 2.0;
    let tie_term: f64 = tie_sizes(&pooled)
        .map(|t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let nf = n as f64;
    let var = (n1 * n2) as f64 / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    let sd = if var > 0.0 { var.sqrt() } else { 0.0 };
    let z_approx = if sd > 0.0 { (u1 - mu) / sd } else { 0.0 };

    let p = match method {
        UTestMethod::Exact => exact_two_sided(&ranks, n1, u1_doubled + offset),
        UTestMethod::NormalApprox => {
            if sd > 0.0 {
                let zc = ((u1 - mu).abs() - 0.5).max(0.0) / sd;
                erfc(zc / std::f64::consts::SQRT_2)
            } else {
                1.0
            }
        }
    };

    Ok(UTestResult {
        u1,
        u2,
        z_approx,
        p_two_sided: p.clamp(f64::MIN_POSITIVE, 1.0),
        method,
        n1,
        n2,
    })
}

fn tie_sizes(values: &[f64]) -> impl Iterator<Item = usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        sizes.push(j - i);
        i = j;
    }
    sizes.into_iter()
}

/// Permutation p-value: every assignment of `n1` of the pooled (doubled)
/// ranks to sample 1 is equally likely under the null.
fn exact_two_sided(ranks: &[u64], n1: usize, observed: u64) -> f64 {
    let mut le = 0u64;
    let mut ge = 0u64;
    let mut total = 0u64;
    let mut visit = |sum: u64| {
        total += 1;
        if sum <= observed {
            le += 1;
        }
        if sum >= observed {
            ge += 1;
        }
    };
    enumerate_subset_sums(ranks, n1, 0, 0, &mut visit);
    (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
}

fn enumerate_subset_sums(
    ranks: &[u64],
    remaining: usize,
    start: usize,
    sum: u64,
    visit: &mut impl FnMut(u64),
) {
    if remaining == 0 {
        visit(sum);
        return;
    }
    for i in start..=ranks.len() - remaining {
        enumerate_subset_sums(ranks, remaining - 1, i + 1, sum + ranks[i], visit);
    }
}

/// Rank-based area under the ROC curve: the probability that a random
/// positive scores above a random negative, ties counting one half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch(scores.len(), labels.len()));
    }
    require_finite(scores)?;
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateLabels);
    }
    let ranks = doubled_ranks(scores);
    let pos_sum: u64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(r, _)| *r)
        .sum();
    let u_doubled = pos_sum - (n_pos * (n_pos + 1)) as u64;
    Ok(u_doubled as f64 / (2 * n_pos * n_neg) as f64)
}

/// Median of a slice; `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = sorted.len();
    Some(if n.is_multiple_of(2) {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    } else {
        sorted[n / 2]
    })
}

pub fn mean_of(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| mean(values))
}
