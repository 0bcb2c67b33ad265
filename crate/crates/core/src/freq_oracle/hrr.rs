//! Hadamard randomized response: each user releases one randomly chosen
//! Hadamard coefficient of their one-hot vector, flipped with probability
//! `1 / (1 + e^ε)`.

use rand::Rng;

use super::{fwht_in_place, hadamard_entry, DomainSpec, FrequencyEstimate, PrivacySpec};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HrrReport {
    index: usize,
    bit: i8,
}

impl HrrReport {
    pub fn new(index: usize, bit: i8) -> Result<Self> {
        if bit != 1 && bit != -1 {
            return domain(format!("HRR bit must be ±1, got {bit}"));
        }
        Ok(Self { index, bit })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn bit(&self) -> i8 {
        self.bit
    }
}

pub fn hrr_perturb<R: Rng + ?Sized>(
    item: usize,
    domain: DomainSpec,
    privacy: &PrivacySpec,
    rng: &mut R,
) -> Result<HrrReport> {
    if item >= domain.padded_d() {
        return crate::error::domain(format!(
            "item {item} outside padded domain [0, {})",
            domain.padded_d()
        ));
    }
    Ok(hrr_perturb_signed(item, 1, domain.padded_d(), privacy.keep_probability(), rng))
}

/// HRR on the signed one-hot vector `sign · e_item` of power-of-two length
/// `len`. By linearity the released coefficient is just negated.
#[inline]
pub(crate) fn hrr_perturb_signed<R: Rng + ?Sized>(
    item: usize,
    sign: i8,
    len: usize,
    keep: f64,
    rng: &mut R,
) -> HrrReport {
    let index = if len == 1 { 0 } else { rng.random_range(0..len) };
    let truth = sign * hadamard_entry(item, index);
    let bit = if rng.random_bool(keep) { truth } else { -truth };
    HrrReport { index, bit }
}

/// Per-coefficient sums of reported bits and per-coefficient report counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HrrAccumulator {
    sums: Vec<i64>,
    counts: Vec<u64>,
    reports: u64,
}

impl HrrAccumulator {
    /// `len` is the (power-of-two) transform length.
    pub fn new(len: usize) -> Self {
        debug_assert!(len.is_power_of_two());
        Self { sums: vec![0; len], counts: vec![0; len], reports: 0 }
    }

    pub fn add(&mut self, report: &HrrReport) -> Result<()> {
        if report.index >= self.sums.len() {
            return domain(format!(
                "HRR index {} outside [0, {})",
                report.index,
                self.sums.len()
            ));
        }
        self.sums[report.index] += report.bit as i64;
        self.counts[report.index] += 1;
        self.reports += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &HrrAccumulator) -> Result<()> {
        if other.sums.len() != self.sums.len() {
            return domain("cannot merge HRR accumulators of different lengths");
        }
        for i in 0..self.sums.len() {
            self.sums[i] += other.sums[i];
            self.counts[i] += other.counts[i];
        }
        self.reports += other.reports;
        Ok(())
    }

    pub fn reports(&self) -> u64 {
        self.reports
    }

    /// Unbiased estimate of the population-mean (signed) one-hot vector over
    /// the full transform length.
    ///
    /// Each coefficient is the mean reported bit for that index divided by
    /// `2p - 1`; an index nobody sampled contributes zero.
    pub(crate) fn decode(&self, keep: f64) -> Result<Vec<f64>> {
        if self.reports == 0 {
            return Err(Error::EmptyInput("HRR aggregation needs at least one report"));
        }
        let gain = 2.0 * keep - 1.0;
        let mut coeffs: Vec<f64> = self
            .sums
            .iter()
            .zip(&self.counts)
            .map(|(&s, &c)| if c == 0 { 0.0 } else { s as f64 / (c as f64 * gain) })
            .collect();
        fwht_in_place(&mut coeffs);
        let scale = 1.0 / coeffs.len() as f64;
        coeffs.iter_mut().for_each(|x| *x *= scale);
        Ok(coeffs)
    }

    pub fn finalize(&self, privacy: &PrivacySpec, domain: DomainSpec) -> Result<FrequencyEstimate> {
        if domain.padded_d() != self.sums.len() {
            return crate::error::domain("HRR accumulator length does not match the domain");
        }
        let mut theta_hat = self.decode(privacy.keep_probability())?;
        theta_hat.truncate(domain.d());
        Ok(FrequencyEstimate { theta_hat, n_reports: self.reports })
    }
}

pub fn hrr_aggregate(
    reports: &[HrrReport],
    domain: DomainSpec,
    privacy: &PrivacySpec,
) -> Result<FrequencyEstimate> {
    if reports.is_empty() {
        return Err(Error::EmptyInput("HRR aggregation needs at least one report"));
    }
    let mut acc = HrrAccumulator::new(domain.padded_d());
    for r in reports {
        acc.add(r)?;
    }
    acc.finalize(privacy, domain)
}
