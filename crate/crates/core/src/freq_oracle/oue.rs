//! Optimized unary encoding.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::{DomainSpec, FrequencyEstimate, PrivacySpec};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OueReport {
    bits: Vec<bool>,
}

impl OueReport {
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// One-hot encode `item` and flip each bit independently: the item's own bit
/// is reported as 1 with probability 1/2, every other bit with probability
/// `1 / (1 + e^ε)`.
pub fn oue_perturb<R: Rng + ?Sized>(
    item: usize,
    domain: DomainSpec,
    privacy: &PrivacySpec,
    rng: &mut R,
) -> Result<OueReport> {
    domain.check_item(item)?;
    let q = privacy.oue_flip_probability();
    let bits = (0..domain.d())
        .map(|j| if j == item { rng.random_bool(0.5) } else { rng.random_bool(q) })
        .collect();
    Ok(OueReport { bits })
}

/// Per-position counts of reported 1-bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OueAccumulator {
    ones: Vec<u64>,
    reports: u64,
}

impl OueAccumulator {
    pub fn new(d: usize) -> Self {
        Self { ones: vec![0; d], reports: 0 }
    }

    pub fn add(&mut self, report: &OueReport) -> Result<()> {
        if report.bits.len() != self.ones.len() {
            return domain(format!(
                "OUE report has {} bits, expected {}",
                report.bits.len(),
                self.ones.len()
            ));
        }
        for (count, &bit) in self.ones.iter_mut().zip(&report.bits) {
            *count += bit as u64;
        }
        self.reports += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &OueAccumulator) -> Result<()> {
        if other.ones.len() != self.ones.len() {
            return domain("cannot merge OUE accumulators over different domains");
        }
        for (a, b) in self.ones.iter_mut().zip(&other.ones) {
            *a += b;
        }
        self.reports += other.reports;
        Ok(())
    }

    pub fn reports(&self) -> u64 {
        self.reports
    }

    pub fn finalize(&self, privacy: &PrivacySpec) -> Result<FrequencyEstimate> {
        oue_estimate_from_counts(&self.ones, self.reports, privacy)
    }
}

/// Bias-correct per-position 1-counts from `n` reports:
/// `θ̂[z] = (S_z / N - q) / (1/2 - q)` with `q = 1 / (e^ε + 1)`.
pub fn oue_estimate_from_counts(
    ones: &[u64],
    n: u64,
    privacy: &PrivacySpec,
) -> Result<FrequencyEstimate> {
    if n == 0 {
        return Err(Error::EmptyInput("OUE aggregation needs at least one report"));
    }
    let q = privacy.oue_flip_probability();
    let scale = 1.0 / (0.5 - q);
    let n_f = n as f64;
    let theta_hat = ones.iter().map(|&s| (s as f64 / n_f - q) * scale).collect();
    Ok(FrequencyEstimate { theta_hat, n_reports: n })
}

pub fn oue_aggregate(
    reports: &[OueReport],
    privacy: &PrivacySpec,
    domain: DomainSpec,
) -> Result<FrequencyEstimate> {
    if reports.is_empty() {
        return Err(Error::EmptyInput("OUE aggregation needs at least one report"));
    }
    let mut acc = OueAccumulator::new(domain.d());
    for report in reports {
        acc.add(report)?;
    }
    acc.finalize(privacy)
}

/// Draw the aggregated 1-counts that `N = Σ true_counts` OUE reports would
/// produce, without materializing them: per item,
/// `Bino(c_j, 1/2) + Bino(N - c_j, 1/(1+e^ε))`.
pub fn oue_simulate_counts<R: Rng + ?Sized>(
    true_counts: &[u64],
    privacy: &PrivacySpec,
    rng: &mut R,
) -> Vec<u64> {
    let n: u64 = true_counts.iter().sum();
    let q = privacy.oue_flip_probability();
    true_counts
        .iter()
        .map(|&c| binomial(c, 0.5, rng) + binomial(n - c, q, rng))
        .collect()
}

pub(crate) fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("probability checked above").sample(rng)
}
