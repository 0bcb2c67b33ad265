use super::Estimator;
use crate::error::{domain, Error, Result};

/// Relative slack on the quantile threshold, absorbing rounding in prefix
/// sums that are exactly on the boundary.
const THRESHOLD_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileResult {
    pub phi: f64,
    pub index: usize,
    /// `(index - Q)²` for the true `phi`-quantile `Q`.
    pub value_error: Option<f64>,
    /// Distance from `phi` to the band of quantiles `index` truly represents,
    /// `[CDF(index - 1), CDF(index)]`.
    pub quantile_error: Option<f64>,
}

/// Monotone (running-maximum) prefix estimates, built once and searched for
/// many quantiles.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileSearch {
    prefixes: Vec<f64>,
    total: f64,
}

impl QuantileSearch {
    pub fn new(est: &Estimator) -> Result<Self> {
        let mut prefixes = est.prefix_values()?;
        let total = est.total()?;
        if total.is_nan() || total <= 0.0 {
            return Err(Error::DegenerateEstimate(format!(
                "estimated total mass {total} is not positive"
            )));
        }
        let mut running = f64::NEG_INFINITY;
        for p in prefixes.iter_mut() {
            running = running.max(*p);
            *p = running;
        }
        Ok(Self { prefixes, total })
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Smallest index whose monotone prefix reaches `phi` times the
    /// estimated total. `truth` is the true fraction (or count) histogram.
    pub fn quantile(&self, phi: f64, truth: Option<&[f64]>) -> Result<QuantileResult> {
        if !(0.0..=1.0).contains(&phi) {
            return domain(format!("quantile {phi} outside [0, 1]"));
        }
        let threshold = phi * self.total * (1.0 - THRESHOLD_SLACK);
        let last = self.prefixes.len() - 1;
        let index = self.prefixes.partition_point(|&p| p < threshold).min(last);
        let (value_error, quantile_error) = match truth {
            None => (None, None),
            Some(t) => {
                if t.len() != self.prefixes.len() {
                    return domain(format!(
                        "true histogram has {} items, estimator has {}",
                        t.len(),
                        self.prefixes.len()
                    ));
                }
                let q = true_quantile(t, phi)?;
                let mass: f64 = t.iter().sum();
                let below: f64 = t[..index].iter().sum::<f64>() / mass;
                let upto = below + t[index] / mass;
                let qe = if phi < below {
                    below - phi
                } else if phi > upto {
                    phi - upto
                } else {
                    0.0
                };
                let dv = index as f64 - q as f64;
                (Some(dv * dv), Some(qe.clamp(0.0, 1.0)))
            }
        };
        Ok(QuantileResult { phi, index, value_error, quantile_error })
    }
}

/// One-shot quantile query. Use [`QuantileSearch`] when asking several.
pub fn quantile(est: &Estimator, phi: f64, truth: Option<&[f64]>) -> Result<QuantileResult> {
    QuantileSearch::new(est)?.quantile(phi, truth)
}

/// Smallest index whose cumulative share of `hist` reaches `phi`.
pub fn true_quantile(hist: &[f64], phi: f64) -> Result<usize> {
    let mass: f64 = hist.iter().sum();
    if hist.is_empty() || mass.is_nan() || mass <= 0.0 {
        return Err(Error::DegenerateEstimate("true histogram has no mass".into()));
    }
    let threshold = phi * mass * (1.0 - THRESHOLD_SLACK);
    let mut acc = 0.0;
    for (i, &x) in hist.iter().enumerate() {
        acc += x;
        if acc >= threshold {
            return Ok(i);
        }
    }
    Ok(hist.len() - 1)
}
