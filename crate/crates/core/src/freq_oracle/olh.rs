//! Optimal local hashing: hash the item into `g` buckets with a per-user key,
//! then apply `g`-ary randomized response to the bucket.
//!
//! Decoding touches every (report, item) pair, so aggregation costs `O(N·D)`.

use rand::Rng;

use super::{DomainSpec, FrequencyEstimate, PrivacySpec};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OlhReport {
    key: u64,
    value: u64,
}

impl OlhReport {
    pub fn new(key: u64, value: u64, g: u64) -> Result<Self> {
        if value >= g {
            return domain(format!("OLH value {value} outside [0, {g})"));
        }
        Ok(Self { key, value })
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn value(&self) -> u64 {
        self.value
    }
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 33)).wrapping_mul(0xff51_afd7_ed55_8ccd);
    z = (z ^ (z >> 33)).wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    z ^ (z >> 33)
}

/// Keyed multiply-add-shift hash of `item` into `[0, g)`.
#[inline]
pub fn olh_hash(key: u64, item: u64, g: u64) -> u64 {
    let a = mix(key) | 1;
    let b = mix(key ^ 0x5851_f42d_4c95_7f2d);
    let h32 = a.wrapping_mul(item).wrapping_add(b) >> 32;
    (h32 * g) >> 32
}

pub fn olh_perturb<R: Rng + ?Sized>(
    item: usize,
    domain: DomainSpec,
    privacy: &PrivacySpec,
    rng: &mut R,
) -> Result<OlhReport> {
    domain.check_item(item)?;
    let g = privacy.olh_range();
    let key: u64 = rng.random();
    let truth = olh_hash(key, item as u64, g);
    let value = if rng.random_bool(privacy.olh_keep_probability()) {
        truth
    } else {
        // uniform over the other g - 1 buckets
        let other = rng.random_range(0..g - 1);
        if other >= truth {
            other + 1
        } else {
            other
        }
    };
    Ok(OlhReport { key, value })
}

/// Support counts: `support[j]` is the number of reports whose hashed value
/// matches item `j` under the report's key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OlhAccumulator {
    support: Vec<u64>,
    g: u64,
    reports: u64,
}

impl OlhAccumulator {
    pub fn new(d: usize, g: u64) -> Self {
        Self { support: vec![0; d], g, reports: 0 }
    }

    pub fn add(&mut self, report: &OlhReport) -> Result<()> {
        if report.value >= self.g {
            return domain(format!("OLH value {} outside [0, {})", report.value, self.g));
        }
        for (j, count) in self.support.iter_mut().enumerate() {
            if olh_hash(report.key, j as u64, self.g) == report.value {
                *count += 1;
            }
        }
        self.reports += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &OlhAccumulator) -> Result<()> {
        if other.support.len() != self.support.len() || other.g != self.g {
            return domain("cannot merge OLH accumulators with different shapes");
        }
        for (a, b) in self.support.iter_mut().zip(&other.support) {
            *a += b;
        }
        self.reports += other.reports;
        Ok(())
    }

    pub fn reports(&self) -> u64 {
        self.reports
    }

    /// `θ̂[j] = (T[j]/N - 1/g) / (p - 1/g)`.
    pub fn finalize(&self, privacy: &PrivacySpec) -> Result<FrequencyEstimate> {
        if self.reports == 0 {
            return Err(Error::EmptyInput("OLH aggregation needs at least one report"));
        }
        if self.g != privacy.olh_range() {
            return domain("OLH accumulator range does not match the privacy budget");
        }
        let inv_g = 1.0 / self.g as f64;
        let scale = 1.0 / (privacy.olh_keep_probability() - inv_g);
        let n = self.reports as f64;
        let theta_hat = self.support.iter().map(|&t| (t as f64 / n - inv_g) * scale).collect();
        Ok(FrequencyEstimate { theta_hat, n_reports: self.reports })
    }
}

pub fn olh_aggregate(
    reports: &[OlhReport],
    domain: DomainSpec,
    privacy: &PrivacySpec,
) -> Result<FrequencyEstimate> {
    if reports.is_empty() {
        return Err(Error::EmptyInput("OLH aggregation needs at least one report"));
    }
    let mut acc = OlhAccumulator::new(domain.d(), privacy.olh_range());
    for r in reports {
        acc.add(r)?;
    }
    acc.finalize(privacy)
}
