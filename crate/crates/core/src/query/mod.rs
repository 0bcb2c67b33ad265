//! A single interface over the flat, hierarchical, consistent and Haar
//! estimators for range, prefix and quantile queries.

mod quantile;

pub use quantile::{quantile, true_quantile, QuantileResult, QuantileSearch};

use crate::consistency::ConsistentEstimates;
use crate::error::{domain, Result};
use crate::freq_oracle::FrequencyEstimate;
use crate::hierarchy::{hh_answer_range, NodeEstimates};
use crate::wavelet::{haar_answer_range, HaarEstimates};

/// Inclusive range `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RangeQuery {
    pub a: usize,
    pub b: usize,
}

impl RangeQuery {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a > b {
            return domain(format!("empty range [{a}, {b}]"));
        }
        Ok(Self { a, b })
    }

    pub fn prefix(b: usize) -> Self {
        Self { a: 0, b }
    }

    pub fn len(&self) -> usize {
        self.b - self.a + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    Flat(FrequencyEstimate),
    Hierarchical(NodeEstimates),
    Consistent(ConsistentEstimates),
    Haar(HaarEstimates),
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Flat(_) => "flat",
            Estimator::Hierarchical(_) => "hh",
            Estimator::Consistent(_) => "hh_c",
            Estimator::Haar(_) => "haar",
        }
    }

    /// Number of real items queries may address.
    pub fn domain(&self) -> usize {
        match self {
            Estimator::Flat(f) => f.theta_hat.len(),
            Estimator::Hierarchical(e) => e.layout().domain(),
            Estimator::Consistent(e) => e.layout().domain(),
            Estimator::Haar(e) => e.layout().domain(),
        }
    }

    pub fn answer_range(&self, q: RangeQuery) -> Result<f64> {
        match self {
            Estimator::Flat(f) => {
                if q.a > q.b || q.b >= f.theta_hat.len() {
                    return domain(format!(
                        "range [{}, {}] outside domain of size {}",
                        q.a,
                        q.b,
                        f.theta_hat.len()
                    ));
                }
                Ok(f.theta_hat[q.a..=q.b].iter().sum())
            }
            Estimator::Hierarchical(e) => hh_answer_range(e, q.a, q.b),
            Estimator::Consistent(e) => hh_answer_range(e.as_node_estimates(), q.a, q.b),
            Estimator::Haar(e) => haar_answer_range(e, q.a, q.b),
        }
    }

    pub fn answer_prefix(&self, b: usize) -> Result<f64> {
        self.answer_range(RangeQuery::prefix(b))
    }

    /// Per-item estimates over the real domain. For the consistent and Haar
    /// backends every range answer is a sum of these; the raw hierarchy has
    /// no such representation and falls back to its leaf level.
    pub fn point_estimates(&self) -> Vec<f64> {
        let d = self.domain();
        match self {
            Estimator::Flat(f) => f.theta_hat.clone(),
            Estimator::Hierarchical(e) => e.level(e.layout().height())[..d].to_vec(),
            Estimator::Consistent(e) => e.leaves()[..d].to_vec(),
            Estimator::Haar(e) => {
                let mut x = e.reconstruct();
                x.truncate(d);
                x
            }
        }
    }

    /// Whether every range answer equals the sum of [`point_estimates`]
    /// over the range.
    ///
    /// [`point_estimates`]: Estimator::point_estimates
    pub fn is_additive(&self) -> bool {
        !matches!(self, Estimator::Hierarchical(_))
    }

    /// `answer_prefix(b)` for every `b` in the domain.
    pub fn prefix_values(&self) -> Result<Vec<f64>> {
        if self.is_additive() {
            let mut acc = 0.0;
            Ok(self
                .point_estimates()
                .into_iter()
                .map(|x| {
                    acc += x;
                    acc
                })
                .collect())
        } else {
            (0..self.domain()).map(|b| self.answer_prefix(b)).collect()
        }
    }

    /// Estimated total mass over the real domain.
    pub fn total(&self) -> Result<f64> {
        self.answer_range(RangeQuery::new(0, self.domain() - 1)?)
    }
}
