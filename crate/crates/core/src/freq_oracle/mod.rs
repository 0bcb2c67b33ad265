//! Point-frequency oracles under local differential privacy.
//!
//! Each mechanism has a user-side perturbation function that turns one item
//! into one report, and an aggregator-side accumulator that counts reports and
//! finalizes them into an unbiased [`FrequencyEstimate`]. Accumulators hold only
//! integer counters, so shards built independently merge to exactly the
//! sequential result.
//!
//! All three mechanisms share the per-item variance
//! `4 e^ε / (N (e^ε - 1)^2)` (see [`variance_formula`]).

mod hadamard;
mod olh;
mod oue;
mod hrr;
mod ratio;

pub use hadamard::{fast_walsh_hadamard, hadamard_entry};
pub(crate) use hadamard::fwht_in_place;
pub use hrr::{hrr_aggregate, hrr_perturb, HrrAccumulator, HrrReport};
pub(crate) use hrr::hrr_perturb_signed;
pub(crate) use oue::binomial as binomial_draw;
pub use olh::{olh_aggregate, olh_hash, olh_perturb, OlhAccumulator, OlhReport};
pub use oue::{
    oue_aggregate, oue_estimate_from_counts, oue_perturb, oue_simulate_counts, OueAccumulator,
    OueReport,
};
pub use ratio::{ldp_ratio_check, Channel};

use crate::error::{domain, Error, Result};

const OLH_MAX_RANGE: u64 = 1 << 32;

/// Privacy budget ε together with the derived channel probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacySpec {
    epsilon: f64,
    e_eps: f64,
}

impl PrivacySpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return domain(format!("epsilon must be positive and finite, got {epsilon}"));
        }
        let e_eps = epsilon.exp();
        if !e_eps.is_finite() {
            return domain(format!("epsilon {epsilon} overflows e^epsilon"));
        }
        Ok(Self { epsilon, e_eps })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn e_eps(&self) -> f64 {
        self.e_eps
    }

    /// Probability that binary randomized response keeps the true value:
    /// `e^ε / (1 + e^ε)`.
    pub fn keep_probability(&self) -> f64 {
        self.e_eps / (1.0 + self.e_eps)
    }

    /// OUE probability of reporting 1 at a position whose true bit is 0.
    pub fn oue_flip_probability(&self) -> f64 {
        1.0 / (1.0 + self.e_eps)
    }

    /// OLH hash range, `max(2, round(e^ε + 1))`, capped at the 32-bit hash
    /// width.
    pub fn olh_range(&self) -> u64 {
        ((self.e_eps + 1.0).round().min(OLH_MAX_RANGE as f64) as u64).max(2)
    }

    /// OLH probability of reporting the true hash value.
    pub fn olh_keep_probability(&self) -> f64 {
        let g = self.olh_range() as f64;
        self.e_eps / (self.e_eps + g - 1.0)
    }
}

/// Domain size `d` and the next power of two used by transform-based paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DomainSpec {
    d: usize,
    padded_d: usize,
}

impl DomainSpec {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return domain("domain size must be at least 1");
        }
        let padded_d = d
            .checked_next_power_of_two()
            .ok_or_else(|| Error::Capacity(format!("domain size {d} is too large")))?;
        Ok(Self { d, padded_d })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn padded_d(&self) -> usize {
        self.padded_d
    }

    pub(crate) fn check_item(&self, item: usize) -> Result<()> {
        if item < self.d {
            Ok(())
        } else {
            domain(format!("item {item} outside domain [0, {})", self.d))
        }
    }
}

/// The frequency oracles implemented here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mechanism {
    Oue,
    Olh,
    Hrr,
}

impl Mechanism {
    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::Oue => "oue",
            Mechanism::Olh => "olh",
            Mechanism::Hrr => "hrr",
        }
    }
}

impl std::str::FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oue" => Ok(Mechanism::Oue),
            "olh" => Ok(Mechanism::Olh),
            "hrr" => Ok(Mechanism::Hrr),
            other => domain(format!("unknown frequency oracle `{other}`")),
        }
    }
}

/// Estimated item fractions. Entries are unbiased but unclipped: they may be
/// negative or exceed one.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyEstimate {
    pub theta_hat: Vec<f64>,
    pub n_reports: u64,
}

/// Per-item variance `4 e^ε / (N (e^ε - 1)^2)`, shared by OUE, OLH (with
/// `g = e^ε + 1`) and HRR.
pub fn variance_formula(mechanism: Mechanism, privacy: &PrivacySpec, n: u64) -> Result<f64> {
    if n == 0 {
        return domain(format!("{} variance needs a positive population", mechanism.name()));
    }
    let e = privacy.e_eps();
    Ok(4.0 * e / (n as f64 * (e - 1.0).powi(2)))
}
